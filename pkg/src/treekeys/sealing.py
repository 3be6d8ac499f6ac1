"""Authenticated object sealing bound to a policy label.

Container layout: magic "PKAS1", two-byte big-endian label length, the
label's UTF-8 bytes, a 12-byte nonce, then the ChaCha20-Poly1305
ciphertext. The label rides as associated data, so a ciphertext cannot be
replayed under a different label even though the label itself is public.
"""

from __future__ import annotations

import os

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from .errors import PolicyError, VerificationError

MAGIC = b"PKAS1"
NONCE_BYTES = 12
_LEN_BYTES = 2


def seal(key: bytes, label: str, plaintext: bytes, *, nonce: bytes | None = None) -> bytes:
    """Encrypt ``plaintext`` under the object key for ``label``."""
    encoded = label.encode("utf-8")
    if not encoded or len(encoded) > 0xFFFF:
        raise PolicyError(f"label must encode to 1..65535 bytes, got {len(encoded)}")
    if nonce is None:
        nonce = os.urandom(NONCE_BYTES)
    if len(nonce) != NONCE_BYTES:
        raise ValueError(f"nonce must be {NONCE_BYTES} bytes")
    ciphertext = ChaCha20Poly1305(key).encrypt(nonce, plaintext, encoded)
    return MAGIC + len(encoded).to_bytes(_LEN_BYTES, "big") + encoded + nonce + ciphertext


def sealed_label(blob: bytes) -> str:
    """Read the (public) label of a sealed container without decrypting."""
    if len(blob) < len(MAGIC) + _LEN_BYTES or not blob.startswith(MAGIC):
        raise PolicyError("not a sealed object: bad magic")
    offset = len(MAGIC)
    label_len = int.from_bytes(blob[offset : offset + _LEN_BYTES], "big")
    offset += _LEN_BYTES
    if len(blob) < offset + label_len + NONCE_BYTES:
        raise PolicyError("truncated sealed object")
    try:
        return blob[offset : offset + label_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise PolicyError(f"sealed object carries a non-UTF-8 label: {exc}") from exc


def unseal(key: bytes, blob: bytes) -> tuple[str, bytes]:
    """Decrypt a sealed container, returning (label, plaintext).

    Raises VerificationError when authentication fails (tampered payload,
    wrong key, or a label/ciphertext mismatch).
    """
    label = sealed_label(blob)
    encoded = label.encode("utf-8")
    offset = len(MAGIC) + _LEN_BYTES + len(encoded)
    nonce = blob[offset : offset + NONCE_BYTES]
    ciphertext = blob[offset + NONCE_BYTES :]
    try:
        plaintext = ChaCha20Poly1305(key).decrypt(nonce, ciphertext, encoded)
    except InvalidTag as exc:
        raise VerificationError("sealed object failed authentication") from exc
    return label, plaintext
