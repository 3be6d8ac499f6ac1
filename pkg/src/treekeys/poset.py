"""Finite partially ordered sets of security labels.

A label hierarchy is kept in two normalized forms: the cover arcs (the
order's diagram, written parent -> child) and the full strict order (its
transitive closure). Every poset is rooted: when the input order has more
than one maximal label, a reserved virtual top label is placed above all
of them so that every label is reachable from a single point. Labels are
unique non-empty strings; their bytes feed the key derivation PRF, so
uniqueness matters beyond aesthetics.

All values here are immutable and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .errors import CycleError, PolicyError, UnknownLabelError
from .matching import max_bipartite_matching

#: Reserved label for the virtual top element added by root augmentation.
VIRTUAL_ROOT = "⊤"

#: An ordered pair (x, y) read "x is above y" (x > y, or x covers y).
Arc = tuple[str, str]


def _topological_order(adjacency: Mapping[str, set[str]]) -> list[str]:
    indegree = {v: 0 for v in adjacency}
    for v in adjacency:
        for w in adjacency[v]:
            indegree[w] += 1
    queue = sorted(v for v, d in indegree.items() if d == 0)
    order: list[str] = []
    while queue:
        v = queue.pop()
        order.append(v)
        for w in sorted(adjacency[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                queue.append(w)
    if len(order) != len(adjacency):
        raise CycleError("cycle detected: the order relation is not antisymmetric")
    return order


def transitive_closure(arcs: Iterable[Arc], elements: Iterable[str]) -> frozenset[Arc]:
    """All pairs (x, y) joined by a nonempty directed path in ``arcs``.

    Raises CycleError if the digraph has a directed cycle (including
    self-loops) and UnknownLabelError if an arc mentions a label outside
    ``elements``.
    """
    elems = set(elements)
    adjacency: dict[str, set[str]] = {e: set() for e in elems}
    for x, y in arcs:
        for lab in (x, y):
            if lab not in elems:
                raise UnknownLabelError(f"arc ({x!r}, {y!r}) references unknown label {lab!r}")
        if x == y:
            raise CycleError(f"cycle detected: self-loop on {x!r}")
        adjacency[x].add(y)
    order = _topological_order(adjacency)
    below: dict[str, set[str]] = {e: set() for e in elems}
    for v in reversed(order):
        for child in adjacency[v]:
            below[v].add(child)
            below[v] |= below[child]
    return frozenset((x, y) for x in elems for y in below[x])


def transitive_reduction(closure: Iterable[Arc], elements: Iterable[str]) -> frozenset[Arc]:
    """Cover arcs of a strict order: the pairs not implied by a two-step path.

    The input must be a strict partial order (irreflexive, antisymmetric,
    transitive); anything else raises.
    """
    elems = set(elements)
    pairs = set(closure)
    succ: dict[str, set[str]] = {e: set() for e in elems}
    for x, y in pairs:
        for lab in (x, y):
            if lab not in elems:
                raise UnknownLabelError(f"pair ({x!r}, {y!r}) references unknown label {lab!r}")
        if x == y:
            raise PolicyError(f"strict order cannot contain the reflexive pair ({x!r}, {x!r})")
        if (y, x) in pairs:
            raise CycleError(f"cycle detected: both ({x!r}, {y!r}) and ({y!r}, {x!r}) present")
        succ[x].add(y)
    for x in elems:
        for y in succ[x]:
            missing = succ[y] - succ[x]
            if missing:
                raise PolicyError(
                    f"relation is not transitive: ({x!r}, {sorted(missing)[0]!r}) is missing"
                )
    return frozenset(
        (x, y) for x, y in pairs if not any((x, z) in pairs and (z, y) in pairs for z in elems)
    )


def ensure_root(
    elements: frozenset[str], closure: frozenset[Arc], root_label: str = VIRTUAL_ROOT
) -> tuple[frozenset[str], frozenset[Arc], str, bool]:
    """Make the order rooted: identity if a unique maximum exists, otherwise
    add ``root_label`` above every element.

    Returns (elements, closure, root, added). Raises PolicyError if the
    reserved label is already taken when augmentation is needed.
    """
    non_maximal = {y for _, y in closure}
    maximal = sorted(elements - non_maximal)
    if len(maximal) == 1:
        return elements, closure, maximal[0], False
    if root_label in elements:
        raise PolicyError(f"reserved root label {root_label!r} already in use")
    new_elements = elements | {root_label}
    new_closure = closure | {(root_label, x) for x in elements}
    return frozenset(new_elements), frozenset(new_closure), root_label, True


@dataclass(frozen=True)
class Poset:
    """A rooted finite strict order over unique string labels.

    ``covers`` is the transitive reduction of ``closure``; both store
    ordered pairs (x, y) with x above y. ``root`` is the unique maximum,
    possibly the virtual one added during normalization.
    """

    elements: frozenset[str]
    covers: frozenset[Arc]
    closure: frozenset[Arc]
    root: str
    virtual_root: bool = False

    def __post_init__(self) -> None:
        if self.root not in self.elements:
            raise PolicyError(f"root {self.root!r} is not an element")

    @classmethod
    def from_arcs(
        cls,
        elements: Iterable[str],
        arcs: Iterable[Arc],
        *,
        root_label: str = VIRTUAL_ROOT,
    ) -> "Poset":
        """Normalize any generating arc set into a rooted poset.

        ``arcs`` may be any subset of the intended strict order whose
        closure is that order (cover arcs, the full order, or anything in
        between).
        """
        seen: set[str] = set()
        for lab in elements:
            if not isinstance(lab, str) or not lab:
                raise PolicyError(f"labels must be non-empty strings, got {lab!r}")
            if lab in seen:
                raise PolicyError(f"duplicate element {lab!r}")
            seen.add(lab)
        if not seen:
            raise PolicyError("a policy needs at least one element")
        closure = transitive_closure(arcs, seen)
        elems, closure, root, added = ensure_root(frozenset(seen), closure, root_label)
        covers = transitive_reduction(closure, elems)
        return cls(elements=elems, covers=covers, closure=closure, root=root, virtual_root=added)

    # -- order queries ----------------------------------------------------

    @property
    def sorted_elements(self) -> tuple[str, ...]:
        return tuple(sorted(self.elements))

    def require(self, label: str) -> None:
        if label not in self.elements:
            raise UnknownLabelError(f"unknown label {label!r}")

    def geq(self, x: str, y: str) -> bool:
        """True iff x is at or above y."""
        return x == y or (x, y) in self.closure

    def leq(self, x: str, y: str) -> bool:
        """True iff x is at or below y."""
        return x == y or (y, x) in self.closure

    def down_set(self, x: str) -> frozenset[str]:
        """Every label at or below x (x included)."""
        self.require(x)
        return frozenset(y for y in self.elements if self.leq(y, x))

    def up_set(self, x: str) -> frozenset[str]:
        """Every label at or above x (x included)."""
        self.require(x)
        return frozenset(y for y in self.elements if self.geq(y, x))

    def maximal_elements(self) -> tuple[str, ...]:
        non_maximal = {y for _, y in self.closure}
        return tuple(sorted(self.elements - non_maximal))

    def cover_children(self, x: str) -> tuple[str, ...]:
        self.require(x)
        return tuple(sorted(y for p, y in self.covers if p == x))

    def comparability(self) -> tuple[dict[str, int], list[list[bool]]]:
        """Index map and boolean matrix with entry [i][j] true iff label_i >= label_j."""
        order = self.sorted_elements
        index = {lab: i for i, lab in enumerate(order)}
        n = len(order)
        geq = [[False] * n for _ in range(n)]
        for i in range(n):
            geq[i][i] = True
        for x, y in self.closure:
            geq[index[x]][index[y]] = True
        return index, geq


@dataclass(frozen=True)
class UserAssignment:
    """How many users sit at each label. The virtual root never has users."""

    counts: Mapping[str, int]

    @classmethod
    def uniform(cls, poset: Poset, count: int = 1) -> "UserAssignment":
        values = {x: count for x in poset.sorted_elements}
        if poset.virtual_root:
            values[poset.root] = 0
        return cls(counts=values)

    @classmethod
    def from_counts(cls, poset: Poset, counts: Mapping[str, Any]) -> "UserAssignment":
        values = {x: 0 for x in poset.sorted_elements}
        for label, count in counts.items():
            poset.require(label)
            if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                raise PolicyError(f"user count for {label!r} must be a non-negative integer")
            if poset.virtual_root and label == poset.root and count != 0:
                raise PolicyError("the virtual root cannot have users assigned")
            values[label] = count
        return cls(counts=values)

    def count(self, label: str) -> int:
        return self.counts.get(label, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class ChainPartition:
    """Disjoint chains covering the whole poset, each listed top to bottom."""

    chains: tuple[tuple[str, ...], ...]

    def validate_for(self, poset: Poset) -> None:
        seen: set[str] = set()
        for chain in self.chains:
            if not chain:
                raise PolicyError("empty chain in partition")
            for label in chain:
                poset.require(label)
                if label in seen:
                    raise PolicyError(f"label {label!r} appears in more than one chain")
                seen.add(label)
            for upper, lower in zip(chain, chain[1:]):
                if not (poset.geq(upper, lower) and upper != lower):
                    raise PolicyError(
                        f"chain entries {upper!r}, {lower!r} are not strictly decreasing"
                    )
        if seen != set(poset.elements):
            missing = sorted(set(poset.elements) - seen)
            raise PolicyError(f"partition does not cover labels: {missing}")

    def chain_of(self, label: str) -> tuple[str, ...]:
        for chain in self.chains:
            if label in chain:
                return chain
        raise UnknownLabelError(f"label {label!r} not in any chain")

    def to_json_dict(self) -> dict[str, Any]:
        return {"chains": [list(chain) for chain in self.chains]}

    @classmethod
    def from_json_dict(cls, document: Mapping[str, Any]) -> "ChainPartition":
        unknown = set(document) - {"chains"}
        if unknown:
            raise PolicyError(f"unknown partition fields: {sorted(unknown)}")
        chains = document.get("chains")
        if not isinstance(chains, list) or not all(isinstance(c, list) for c in chains):
            raise PolicyError("partition document must map 'chains' to a list of lists")
        return cls(chains=tuple(tuple(str(lab) for lab in chain) for chain in chains))


def min_chain_partition(poset: Poset) -> ChainPartition:
    """A minimum chain partition (as many chains as the poset is wide).

    Computed as a minimum path cover of the strict order via maximum
    bipartite matching; ties are resolved lexicographically, so the result
    is deterministic.
    """
    order = poset.sorted_elements
    adjacency = {x: [y for y in order if (x, y) in poset.closure] for x in order}
    successor = max_bipartite_matching(adjacency)
    has_predecessor = set(successor.values())
    chains: list[tuple[str, ...]] = []
    for head in order:
        if head in has_predecessor:
            continue
        chain = [head]
        while chain[-1] in successor:
            chain.append(successor[chain[-1]])
        chains.append(tuple(chain))
    chains.sort(key=lambda c: c[0])
    return ChainPartition(chains=tuple(chains))


def width(poset: Poset) -> int:
    """Size of a maximum antichain (equivalently, of a minimum chain partition)."""
    return len(min_chain_partition(poset).chains)


_POLICY_FIELDS = {"elements", "arcs", "users"}


def parse_policy(
    document: Mapping[str, Any], *, root_label: str = VIRTUAL_ROOT
) -> tuple[Poset, UserAssignment]:
    """Parse a policy document into a rooted poset and a user assignment.

    Document shape: {"elements": [label, ...], "arcs": [[x, y], ...],
    "users": {label: count}}. Arcs read "x is above y" and may be any
    generating subset of the intended order. "users" is optional: omitted
    entirely, every element gets one user; present, unlisted labels get
    zero. Unknown fields are rejected.
    """
    if not isinstance(document, Mapping):
        raise PolicyError("policy document must be a JSON object")
    unknown = set(document) - _POLICY_FIELDS
    if unknown:
        raise PolicyError(f"unknown policy fields: {sorted(unknown)}")
    elements = document.get("elements")
    if not isinstance(elements, list):
        raise PolicyError("policy must list 'elements'")
    arcs_raw = document.get("arcs", [])
    if not isinstance(arcs_raw, list):
        raise PolicyError("'arcs' must be a list of [upper, lower] pairs")
    arcs: list[Arc] = []
    for entry in arcs_raw:
        if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
            raise PolicyError(f"arc {entry!r} is not an [upper, lower] pair")
        x, y = entry
        if not isinstance(x, str) or not isinstance(y, str):
            raise PolicyError(f"arc {entry!r} must contain string labels")
        arcs.append((x, y))
    poset = Poset.from_arcs(elements, arcs, root_label=root_label)
    users_raw = document.get("users")
    if users_raw is None:
        users = UserAssignment.uniform(poset)
    else:
        if not isinstance(users_raw, Mapping):
            raise PolicyError("'users' must map labels to counts")
        users = UserAssignment.from_counts(poset, users_raw)
    return poset, users
