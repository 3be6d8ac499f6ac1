"""Start-point allocation over a derivation out-tree, plus scheme metrics.

Once a derivation tree is fixed, each label x needs a set of tree
positions ("start points") from which exactly the labels at or below x
remain reachable. The canonical allocation is pointwise minimal: any
allocation that enforces the policy on the same tree contains it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .errors import PolicyError
from .poset import Poset, UserAssignment
from .trees import DerivationOutTree, validate_tree


@dataclass(frozen=True)
class KeyAllocation:
    """Per-label start-point sets. Serialized under the "phi" key."""

    phi: Mapping[str, frozenset[str]]

    def start_points(self, label: str) -> frozenset[str]:
        return self.phi[label]

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.phi.values())

    def to_json_dict(self) -> dict[str, Any]:
        return {"phi": {label: sorted(points) for label, points in sorted(self.phi.items())}}

    @classmethod
    def from_json_dict(cls, document: Mapping[str, Any]) -> "KeyAllocation":
        unknown = set(document) - {"phi"}
        if unknown:
            raise PolicyError(f"unknown allocation fields: {sorted(unknown)}")
        phi = document.get("phi")
        if not isinstance(phi, Mapping):
            raise PolicyError("allocation document needs a 'phi' map")
        return cls(phi={label: frozenset(points) for label, points in phi.items()})


def canonical_allocation(poset: Poset, tree: DerivationOutTree) -> KeyAllocation:
    """The pointwise-minimal allocation for ``tree``.

    A label z is a start point for x exactly when some tree arc (y, z)
    enters z from a parent that x does not dominate while x dominates z;
    the root's only start point is itself. Runs in O(labels^2): one pass
    over the tree's arcs per label, with constant-time order lookups.
    """
    validate_tree(poset, tree)
    arcs = tree.arcs()
    phi: dict[str, frozenset[str]] = {}
    for x in poset.sorted_elements:
        if x == tree.root:
            phi[x] = frozenset({x})
        else:
            phi[x] = frozenset(
                z for y, z in arcs if poset.geq(x, z) and not poset.geq(x, y)
            )
    return KeyAllocation(phi=phi)


@dataclass(frozen=True)
class Violation:
    kind: str  # "membership" | "unreachable" | "overreach" | "unknown"
    label: str
    detail: str


@dataclass(frozen=True)
class EnforcementReport:
    """Outcome of checking an allocation against a tree and policy.

    ``minimal`` is None unless minimality was requested; violations make a
    scheme unsound, non-minimality merely wasteful.
    """

    violations: tuple[Violation, ...]
    minimal: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "minimal": self.minimal,
            "violations": [
                {"kind": v.kind, "label": v.label, "detail": v.detail} for v in self.violations
            ],
        }


def validate_enforcement(
    poset: Poset,
    tree: DerivationOutTree,
    allocation: KeyAllocation,
    *,
    require_minimal: bool = False,
) -> EnforcementReport:
    """Check the three enforcement conditions by explicit tree reachability.

    Every label must be its own start point, every authorized label must be
    reachable from some start point, and no start point may reach an
    unauthorized label. Violations are reported, not raised.
    """
    validate_tree(poset, tree)
    reach = tree.descendant_sets()
    violations: list[Violation] = []
    for x in poset.sorted_elements:
        points = allocation.phi.get(x, frozenset())
        unknown = sorted(points - poset.elements)
        for z in unknown:
            violations.append(Violation("unknown", x, f"start point {z!r} is not a label"))
        points = points & poset.elements
        if x not in points:
            violations.append(Violation("membership", x, "label is not among its own start points"))
        covered: set[str] = set()
        for z in points:
            covered |= reach[z]
        for u in sorted(poset.down_set(x) - covered):
            violations.append(
                Violation("unreachable", x, f"authorized label {u!r} unreachable from start points")
            )
        for u in sorted(covered):
            if not poset.geq(x, u):
                violations.append(
                    Violation("overreach", x, f"start points reach unauthorized label {u!r}")
                )
    minimal: bool | None = None
    if require_minimal:
        canonical = canonical_allocation(poset, tree)
        minimal = all(
            allocation.phi.get(x, frozenset()) == canonical.phi[x] for x in poset.elements
        )
    return EnforcementReport(violations=tuple(violations), minimal=minimal)


@dataclass(frozen=True)
class SchemeMetrics:
    """Size parameters of an enforcement scheme.

    K_total counts start points over labels, K_hat weights them by users,
    k_max is the largest per-label count, d_max the longest derivation walk
    (PRF steps along the tree; the final key step is not included), and p
    the number of public helper items (always zero for tree schemes).
    """

    K_total: int
    K_hat: int
    k_max: int
    d_max: int
    p: int

    def to_json_dict(self) -> dict[str, int]:
        return {
            "K_total": self.K_total,
            "K_hat": self.K_hat,
            "k_max": self.k_max,
            "d_max": self.d_max,
            "p": self.p,
        }


def scheme_metrics(
    poset: Poset,
    users: UserAssignment,
    tree: DerivationOutTree,
    allocation: KeyAllocation,
) -> SchemeMetrics:
    """Metrics for a validated tree scheme.

    The derivation distance for (x, u) is the hop count from the nearest
    start point of x above u down to u.
    """
    report = validate_enforcement(poset, tree, allocation)
    if not report.ok:
        first = report.violations[0]
        raise PolicyError(f"allocation is not a valid enforcement: {first.kind} at {first.label!r}")
    depth = tree.depths()
    d_max = 0
    for x in poset.sorted_elements:
        points = allocation.phi[x]
        for u in poset.down_set(x):
            for anc in tree.ancestors(u):
                if anc in points:
                    d_max = max(d_max, depth[u] - depth[anc])
                    break
    sizes = {x: len(allocation.phi[x]) for x in poset.sorted_elements}
    return SchemeMetrics(
        K_total=sum(sizes.values()),
        K_hat=sum(users.count(x) * sizes[x] for x in sizes),
        k_max=max(sizes.values()),
        d_max=d_max,
        p=0,
    )
