"""Comparison schemes: chain-partition enforcement and the classic
public-information constructions.

The chain scheme splits the poset into disjoint chains and chains keys
down each one with a PRF, so, like the tree scheme, it needs no public
helper data; holders get one key per chain their down-set touches. The
basic/iterative/direct schemes are sized only (key counts, public items,
derivation depth): they exist here to quantify trade-offs, not to ship
keys.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Mapping

from .allocation import SchemeMetrics
from .errors import AuthorizationError, PolicyError
from .kdf import KEY_BYTES, prf
from .poset import ChainPartition, Poset, UserAssignment


@dataclass(frozen=True)
class ChainScheme:
    """A chain partition plus, per label, the chain tops its users need."""

    partition: ChainPartition
    start_points: Mapping[str, frozenset[str]]


def chain_scheme_build(poset: Poset, partition: ChainPartition) -> ChainScheme:
    """Start points for every label: in each chain its down-set touches,
    the topmost touched entry."""
    partition.validate_for(poset)
    start_points: dict[str, frozenset[str]] = {}
    for x in poset.sorted_elements:
        down = poset.down_set(x)
        points = set()
        for chain in partition.chains:
            for label in chain:  # chains run top to bottom
                if label in down:
                    points.add(label)
                    break
        start_points[x] = frozenset(points)
    return ChainScheme(partition=partition, start_points=start_points)


def chain_setup(
    scheme: ChainScheme, *, rng: Callable[[int], bytes] = os.urandom
) -> dict[str, bytes]:
    """Keys for every label: fresh at each chain top, then PRF-chained down.

    Chaining uses the PRF with an empty message, so one primitive serves
    both schemes.
    """
    keys: dict[str, bytes] = {}
    for chain in scheme.partition.chains:
        key = rng(KEY_BYTES)
        if not isinstance(key, bytes) or len(key) != KEY_BYTES:
            raise ValueError(f"randomness source must yield {KEY_BYTES} bytes")
        keys[chain[0]] = key
        for label in chain[1:]:
            key = prf(key, b"")
            keys[label] = key
    return keys


def chain_user_keys(scheme: ChainScheme, keys: Mapping[str, bytes], holder: str) -> dict[str, bytes]:
    """The keys actually handed to a holder: one per start point."""
    return {z: keys[z] for z in sorted(scheme.start_points[holder])}


def chain_derive(
    scheme: ChainScheme, holder: str, holder_keys: Mapping[str, bytes], target: str
) -> bytes:
    """Walk down from the holder's start point in the target's chain."""
    chain = scheme.partition.chain_of(target)
    start = next((z for z in chain if z in scheme.start_points[holder]), None)
    if start is None or chain.index(start) > chain.index(target):
        raise AuthorizationError(f"{holder!r} is not authorized for {target!r}")
    key = holder_keys[start]
    for _ in range(chain.index(target) - chain.index(start)):
        key = prf(key, b"")
    return key


def chain_metrics(poset: Poset, users: UserAssignment, scheme: ChainScheme) -> SchemeMetrics:
    """Size parameters of a chain scheme (no public items, like the tree scheme)."""
    sizes = {x: len(scheme.start_points[x]) for x in poset.sorted_elements}
    d_max = 0
    for x in poset.sorted_elements:
        down = poset.down_set(x)
        for chain in scheme.partition.chains:
            touched = [i for i, label in enumerate(chain) if label in down]
            if touched:
                d_max = max(d_max, touched[-1] - touched[0])
    return SchemeMetrics(
        K_total=sum(sizes.values()),
        K_hat=sum(users.count(x) * sizes[x] for x in sizes),
        k_max=max(sizes.values()),
        d_max=d_max,
        p=0,
    )


def _longest_cover_path(poset: Poset) -> int:
    depth: dict[str, int] = {}

    def height(x: str) -> int:
        if x not in depth:
            kids = poset.cover_children(x)
            depth[x] = 0 if not kids else 1 + max(height(c) for c in kids)
        return depth[x]

    return max(height(x) for x in poset.sorted_elements)


CLASSIC_SCHEMES = ("basic", "iterative", "direct")


def classic_scheme_metrics(poset: Poset, users: UserAssignment, scheme: str) -> SchemeMetrics:
    """Size parameters of the classic public-information constructions.

    basic hands every authorized key out directly; iterative publishes one
    helper item per cover arc and walks them; direct publishes one per
    strict-order pair and derives in a single step. K_total counts keys
    per label, K_hat weights by users.
    """
    n = len(poset.elements)
    if scheme == "basic":
        down_sizes = {x: len(poset.down_set(x)) for x in poset.sorted_elements}
        return SchemeMetrics(
            K_total=sum(down_sizes.values()),
            K_hat=sum(users.count(x) * down_sizes[x] for x in down_sizes),
            k_max=max(down_sizes.values()),
            d_max=0,
            p=0,
        )
    if scheme == "iterative":
        return SchemeMetrics(
            K_total=n,
            K_hat=users.total,
            k_max=1,
            d_max=_longest_cover_path(poset),
            p=len(poset.covers),
        )
    if scheme == "direct":
        return SchemeMetrics(
            K_total=n,
            K_hat=users.total,
            k_max=1,
            d_max=1,
            p=len(poset.closure),
        )
    raise PolicyError(f"unknown scheme {scheme!r}; expected one of {CLASSIC_SCHEMES}")
