"""Command-line front end.

Subcommands cover the operator workflow end to end: inspect a policy,
build the cheapest derivation tree, cut keys, hand out bundles, derive
keys, size up alternative schemes, seal and unseal objects, and run the
self-verification battery.

Exit codes: 0 success, 1 usage or parse failure, 2 authorization refused,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.parse
from pathlib import Path
from typing import Any, Mapping

from . import baselines, kdf, oracles, sealing
from .allocation import canonical_allocation, scheme_metrics
from .errors import AuthorizationError, PolicyError, VerificationError
from .poset import (
    VIRTUAL_ROOT,
    ChainPartition,
    Poset,
    UserAssignment,
    min_chain_partition,
    parse_policy,
    width,
)
from .trees import DerivationOutTree, min_leaf_out_tree, min_weight_out_tree, validate_tree


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _load_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PolicyError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolicyError(
            f"parse error in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _write_json(path: Path, data: Mapping[str, Any]) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_policy(args: argparse.Namespace) -> tuple[Poset, UserAssignment]:
    return parse_policy(_load_json(args.policy), root_label=args.root_label)


def _load_tree(poset: Poset, path: str) -> DerivationOutTree:
    tree = DerivationOutTree.from_json_dict(_load_json(path))
    validate_tree(poset, tree)
    return tree


def _bundle_filename(label: str) -> str:
    return f"sigma_{urllib.parse.quote(label, safe='')}.json"


# -- subcommands ---------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> int:
    poset, _users = _load_policy(args)
    original_maximal = (
        poset.cover_children(poset.root) if poset.virtual_root else (poset.root,)
    )
    info = {
        "elements": len(poset.elements),
        "cover_arcs": len(poset.covers),
        "closure_arcs": len(poset.closure),
        "width": width(poset),
        "root": poset.root,
        "augmented": poset.virtual_root,
        "maximal": list(original_maximal),
    }
    if args.json:
        print(json.dumps(info, sort_keys=True, indent=2))
    else:
        print(f"elements:     {info['elements']}")
        print(f"cover arcs:   {info['cover_arcs']}")
        print(f"closure arcs: {info['closure_arcs']}")
        print(f"width:        {info['width']}")
        print(f"root:         {info['root']}")
        print(f"augmented:    {'yes' if info['augmented'] else 'no'}")
        print(f"maximal:      {' '.join(info['maximal'])}")
    return 0


def cmd_build_tree(args: argparse.Namespace) -> int:
    poset, users = _load_policy(args)
    candidate = poset.covers if args.arcs == "covers" else poset.closure
    build = min_leaf_out_tree if args.min_leaves else min_weight_out_tree
    tree = build(poset, users, candidate)
    allocation = canonical_allocation(poset, tree)
    metrics = scheme_metrics(poset, users, tree, allocation)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "tree.json", tree.to_json_dict())
    _write_json(out / "allocation.json", allocation.to_json_dict())
    _write_json(out / "metrics.json", metrics.to_json_dict())
    print(
        f"wrote tree.json allocation.json metrics.json to {out} "
        f"(K_total={metrics.K_total} K_hat={metrics.K_hat} k_max={metrics.k_max} "
        f"d_max={metrics.d_max})"
    )
    return 0


def cmd_keygen(args: argparse.Namespace) -> int:
    poset, _users = _load_policy(args)
    tree = _load_tree(poset, args.tree)
    allocation = canonical_allocation(poset, tree)
    if args.seed is not None:
        try:
            seed = bytes.fromhex(args.seed)
        except ValueError as exc:
            raise PolicyError(f"seed is not valid hex: {exc}") from exc
        if len(seed) != kdf.KEY_BYTES:
            raise PolicyError(f"seed must be {kdf.KEY_BYTES} bytes ({kdf.KEY_BYTES * 2} hex chars)")
        rng = kdf.seeded_bytes(seed)
    else:
        rng = os.urandom
    store, bundles = kdf.setup(poset, tree, allocation, rng=rng)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "keystore.json", store.to_json_dict())
    for label in poset.sorted_elements:
        _write_json(out / _bundle_filename(label), bundles[label].to_json_dict())
    print(f"wrote keystore.json and {len(bundles)} bundle files to {out}")
    return 0


def cmd_derive(args: argparse.Namespace) -> int:
    poset, _users = _load_policy(args)
    tree = _load_tree(poset, args.tree)
    allocation = canonical_allocation(poset, tree)
    bundle = kdf.SigmaBundle.from_json_dict(_load_json(args.bundle))
    key = kdf.derive(poset, tree, allocation, bundle, args.target)
    print(key.hex())
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    poset, users = _load_policy(args)
    if args.partition:
        partition = ChainPartition.from_json_dict(_load_json(args.partition))
    else:
        partition = min_chain_partition(poset)
    chain = baselines.chain_scheme_build(poset, partition)
    tree = min_weight_out_tree(poset, users)
    allocation = canonical_allocation(poset, tree)
    rows = {
        name: baselines.classic_scheme_metrics(poset, users, name)
        for name in baselines.CLASSIC_SCHEMES
    }
    rows["chain"] = baselines.chain_metrics(poset, users, chain)
    rows["tree"] = scheme_metrics(poset, users, tree, allocation)
    if args.json:
        print(json.dumps({k: m.to_json_dict() for k, m in rows.items()}, sort_keys=True, indent=2))
        return 0
    print(f"{'scheme':<10} {'K':>6} {'K_hat':>6} {'k':>4} {'p':>5} {'d':>4}")
    for name in (*baselines.CLASSIC_SCHEMES, "chain", "tree"):
        m = rows[name]
        print(f"{name:<10} {m.K_total:>6} {m.K_hat:>6} {m.k_max:>4} {m.p:>5} {m.d_max:>4}")
    return 0


def _load_manifest(poset: Poset, path: str) -> list[tuple[Path, str]]:
    document = _load_json(path)
    if not isinstance(document, Mapping):
        raise PolicyError("manifest must be a JSON object")
    unknown = set(document) - {"objects"}
    if unknown:
        raise PolicyError(f"unknown manifest fields: {sorted(unknown)}")
    objects = document.get("objects")
    if not isinstance(objects, list):
        raise PolicyError("manifest must map 'objects' to a list")
    entries: list[tuple[Path, str]] = []
    for entry in objects:
        if not isinstance(entry, Mapping) or set(entry) != {"path", "label"}:
            raise PolicyError(f"manifest entry {entry!r} must have exactly 'path' and 'label'")
        label = entry["label"]
        poset.require(label)
        if poset.virtual_root and label == poset.root:
            raise PolicyError("objects cannot be labeled with the virtual root")
        entries.append((Path(entry["path"]), label))
    return entries


def _object_key(
    args: argparse.Namespace,
    poset: Poset,
    tree: DerivationOutTree,
    label: str,
) -> bytes:
    if args.keystore:
        store = kdf.SecretStore.from_json_dict(_load_json(args.keystore))
        try:
            return store.keys[label]
        except KeyError as exc:
            raise PolicyError(f"keystore has no key for label {label!r}") from exc
    bundle = kdf.SigmaBundle.from_json_dict(_load_json(args.bundle))
    allocation = canonical_allocation(poset, tree)
    return kdf.derive(poset, tree, allocation, bundle, label)


def cmd_encrypt(args: argparse.Namespace) -> int:
    poset, _users = _load_policy(args)
    tree = _load_tree(poset, args.tree)
    entries = _load_manifest(poset, args.manifest)
    for path, label in entries:
        key = _object_key(args, poset, tree, label)
        try:
            plaintext = path.read_bytes()
        except OSError as exc:
            raise PolicyError(f"cannot read {path}: {exc.strerror or exc}") from exc
        sealed = sealing.seal(key, label, plaintext)
        target = path.with_name(path.name + args.suffix)
        target.write_bytes(sealed)
        print(f"sealed {path} -> {target} (label {label})")
    return 0


def cmd_decrypt(args: argparse.Namespace) -> int:
    poset, _users = _load_policy(args)
    tree = _load_tree(poset, args.tree)
    for name in args.sealed:
        path = Path(name)
        try:
            blob = path.read_bytes()
        except OSError as exc:
            raise PolicyError(f"cannot read {path}: {exc.strerror or exc}") from exc
        label = sealing.sealed_label(blob)
        poset.require(label)
        key = _object_key(args, poset, tree, label)
        _, plaintext = sealing.unseal(key, blob)
        if args.out_dir:
            base = path.name[: -len(args.suffix)] if path.name.endswith(args.suffix) else path.name
            target = Path(args.out_dir) / base
            target.parent.mkdir(parents=True, exist_ok=True)
        elif path.name.endswith(args.suffix):
            target = path.with_name(path.name[: -len(args.suffix)])
        else:
            raise PolicyError(
                f"{path} does not end with {args.suffix!r}; pass --out-dir to choose a destination"
            )
        target.write_bytes(plaintext)
        print(f"opened {path} -> {target} (label {label})")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    poset, users = _load_policy(args)
    report = oracles.run_suite(poset, users, seeds=args.seeds, base_seed=args.base_seed)
    if args.json:
        print(json.dumps(report.to_json_dict(), sort_keys=True, indent=2))
    else:
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            line = f"{check.name:<32} {status}  ({check.instances} instances)"
            if not check.passed and check.counterexample:
                line += f"  counterexample: {check.counterexample}"
            print(line)
        print(f"verification {'passed' if report.passed else 'FAILED'} "
              f"in {report.elapsed_seconds:.1f}s")
    return 0 if report.passed else 3


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treekeys", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("policy", help="policy document (JSON)")
    common.add_argument(
        "--root-label",
        default=VIRTUAL_ROOT,
        help="reserved label for the virtual root (default: %(default)s)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="print structural policy statistics")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("build-tree", parents=[common], help="compute the derivation tree")
    p.add_argument("--arcs", choices=("covers", "closure"), default="covers",
                   help="candidate arc set (default: %(default)s)")
    p.add_argument("--min-leaves", action="store_true",
                   help="among minimum-cost trees, pick one with fewest leaves")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_build_tree)

    p = sub.add_parser("keygen", parents=[common], help="generate keystore and bundles")
    p.add_argument("--tree", required=True, help="tree document from build-tree")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--seed", help=f"{kdf.KEY_BYTES * 2} hex chars; reproducible output")
    source.add_argument("--system-entropy", action="store_true",
                        help="draw the root secret from the OS")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("derive", parents=[common], help="derive an object key from a bundle")
    p.add_argument("--tree", required=True)
    p.add_argument("--bundle", required=True, help="the holder's bundle file")
    p.add_argument("target", help="label to derive the key for")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("compare", parents=[common], help="size up enforcement schemes")
    p.add_argument("--partition", help="chain partition document (default: computed)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    for name, handler in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        p = sub.add_parser(name, parents=[common], help=f"{name} objects under label keys")
        p.add_argument("--tree", required=True)
        holder = p.add_mutually_exclusive_group(required=True)
        holder.add_argument("--keystore", help="full keystore (administrator)")
        holder.add_argument("--bundle", help="a holder's bundle; keys are derived")
        p.add_argument("--suffix", default=".sealed")
        if name == "encrypt":
            p.add_argument("--manifest", required=True,
                           help='JSON: {"objects": [{"path": ..., "label": ...}]}')
        else:
            p.add_argument("sealed", nargs="+", help="sealed files to open")
            p.add_argument("--out-dir", help="write plaintexts here instead of in place")
        p.set_defaults(func=handler)

    p = sub.add_parser("verify", parents=[common], help="run the self-verification battery")
    p.add_argument("--seeds", type=int, default=25,
                   help="number of random instances (0 = policy checks only)")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"treekeys: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except AuthorizationError as exc:
        print(f"treekeys: not authorized: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"treekeys: verification failed: {exc}", file=sys.stderr)
        return 3
    except PolicyError as exc:
        print(f"treekeys: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"treekeys: i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
