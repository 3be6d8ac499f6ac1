import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treekeys import (
    DerivationOutTree,
    KeyAllocation,
    Poset,
    PolicyError,
    UserAssignment,
    canonical_allocation,
    scheme_metrics,
    validate_enforcement,
    weight_function,
)
from treekeys.oracles import (
    RandomPosetSpec,
    allocation_by_definition,
    enumerate_out_trees,
    random_poset,
    random_users,
)


def instances(max_elements=7):
    @st.composite
    def build(draw):
        spec = RandomPosetSpec(
            element_count=draw(st.integers(2, max_elements)),
            edge_density=draw(st.sampled_from([0.1, 0.25, 0.4, 0.6])),
            seed=draw(st.integers(0, 2**32 - 1)),
        )
        poset = random_poset(spec)
        users = random_users(poset, spec.seed + 1)
        return poset, users

    return build()


class TestCanonicalAllocation:
    def test_sample_start_points(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        assert allocation.phi["b"] == {"a", "b"}
        assert allocation.phi["e"] == {"c", "e"}
        assert allocation.phi["f"] == {"d", "f"}
        assert allocation.phi["c"] == {"c"}
        assert allocation.total == 11

    def test_root_is_its_own_start_point(self, poset8, tree8_gd):
        assert canonical_allocation(poset8, tree8_gd).phi["h"] == {"h"}

    def test_total_order_needs_one_point_each(self):
        labels = list("abcd")
        poset = Poset.from_arcs(labels, [(labels[i + 1], labels[i]) for i in range(3)])
        tree = DerivationOutTree(root="d", parent={"a": "b", "b": "c", "c": "d"})
        allocation = canonical_allocation(poset, tree)
        assert all(allocation.phi[x] == {x} for x in labels)

    def test_every_label_contains_itself(self, poset8, tree8_fd):
        allocation = canonical_allocation(poset8, tree8_fd)
        assert all(x in allocation.phi[x] for x in poset8.elements)

    def test_json_round_trip(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        doc = allocation.to_json_dict()
        assert doc["phi"]["b"] == ["a", "b"]
        assert KeyAllocation.from_json_dict(doc).phi == allocation.phi


class TestValidateEnforcement:
    def test_canonical_is_valid_and_minimal(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        report = validate_enforcement(poset8, tree8_gd, allocation, require_minimal=True)
        assert report.ok
        assert report.minimal is True

    def test_missing_start_point_is_flagged(self, poset8, tree8_gd):
        # b's users need a start at a: the tree enters a from c, and b is not above c
        allocation = canonical_allocation(poset8, tree8_gd)
        phi = dict(allocation.phi)
        phi["b"] = frozenset({"b"})
        report = validate_enforcement(poset8, tree8_gd, KeyAllocation(phi=phi))
        assert not report.ok
        assert any(v.kind == "unreachable" and v.label == "b" for v in report.violations)

    def test_overreaching_start_point_is_flagged(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        phi = dict(allocation.phi)
        phi["c"] = frozenset({"c", "e"})
        report = validate_enforcement(poset8, tree8_gd, KeyAllocation(phi=phi))
        assert not report.ok
        assert any(v.kind == "overreach" and v.label == "c" for v in report.violations)

    def test_missing_self_is_flagged(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        phi = dict(allocation.phi)
        phi["g"] = frozenset({"d", "e"})  # covers down(g) minus g itself
        report = validate_enforcement(poset8, tree8_gd, KeyAllocation(phi=phi))
        assert any(v.kind == "membership" and v.label == "g" for v in report.violations)

    def test_unknown_start_point_is_flagged(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        phi = dict(allocation.phi)
        phi["g"] = phi["g"] | {"zz"}
        report = validate_enforcement(poset8, tree8_gd, KeyAllocation(phi=phi))
        assert any(v.kind == "unknown" for v in report.violations)

    def test_valid_but_wasteful_allocation(self, poset8, tree8_gd):
        # an extra start point below h stays sound but is not minimal
        allocation = canonical_allocation(poset8, tree8_gd)
        phi = dict(allocation.phi)
        phi["h"] = frozenset({"h", "a"})
        report = validate_enforcement(
            poset8, tree8_gd, KeyAllocation(phi=phi), require_minimal=True
        )
        assert report.ok
        assert report.minimal is False


class TestSchemeMetrics:
    def test_sample_metrics(self, poset8, users8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        metrics = scheme_metrics(poset8, users8, tree8_gd, allocation)
        assert metrics.K_total == 11
        assert metrics.K_hat == 11
        assert metrics.k_max == 2
        assert metrics.d_max == 4  # h's bundle reaches a in four hops
        assert metrics.p == 0

    def test_fd_variant_has_same_totals(self, poset8, users8, tree8_fd):
        allocation = canonical_allocation(poset8, tree8_fd)
        metrics = scheme_metrics(poset8, users8, tree8_fd, allocation)
        assert metrics.K_total == 11
        assert metrics.k_max == 2

    def test_singleton(self):
        poset = Poset.from_arcs(["a"], [])
        users = UserAssignment.uniform(poset)
        tree = DerivationOutTree(root="a", parent={})
        allocation = canonical_allocation(poset, tree)
        metrics = scheme_metrics(poset, users, tree, allocation)
        assert metrics.K_total == 1
        assert metrics.d_max == 0

    def test_rejects_invalid_allocation(self, poset8, users8, tree8_gd):
        phi = {x: frozenset({x}) for x in poset8.elements}
        with pytest.raises(PolicyError, match="not a valid enforcement"):
            scheme_metrics(poset8, users8, tree8_gd, KeyAllocation(phi=phi))

    def test_weighted_total_scales_with_users(self, poset8, tree8_gd):
        allocation = canonical_allocation(poset8, tree8_gd)
        heavy = UserAssignment.from_counts(poset8, {"f": 10})
        metrics = scheme_metrics(poset8, heavy, tree8_gd, allocation)
        assert metrics.K_total == 11
        assert metrics.K_hat == 10 * len(allocation.phi["f"])


def test_start_points_may_exceed_the_width():
    # not an invariant: a label can need more start points than the poset
    # is wide, because the tree thins the arc set below the full order
    from treekeys import min_weight_out_tree
    from treekeys.poset import width

    arcs = [("b", "a"), ("c", "b"), ("e", "c"), ("e", "d"), ("f", "b"), ("f", "d")]
    poset = Poset.from_arcs(list("abcdef"), arcs)
    users = UserAssignment.uniform(poset)
    tree = min_weight_out_tree(poset, users)
    allocation = canonical_allocation(poset, tree)
    assert width(poset) == 2
    assert allocation.phi["f"] == {"b", "d", "f"}
    assert validate_enforcement(poset, tree, allocation).ok


@settings(max_examples=40, deadline=None)
@given(instances())
def test_weighted_key_total_equals_arc_cost_total(instance):
    # holds for every derivation tree, optimal or not
    poset, users = instance
    sampled = 0
    for tree in enumerate_out_trees(poset):
        allocation = canonical_allocation(poset, tree)
        per_user_keys = sum(
            users.count(x) * len(allocation.phi[x])
            for x in poset.elements
            if x != poset.root
        )
        wf = weight_function(poset, users, frozenset(tree.arcs()))
        assert per_user_keys == wf.tree_total(tree)
        sampled += 1
        if sampled >= 25:
            break


@settings(max_examples=40, deadline=None)
@given(instances())
def test_canonical_matches_literal_definition(instance):
    poset, users = instance
    from treekeys import min_weight_out_tree

    tree = min_weight_out_tree(poset, users)
    assert canonical_allocation(poset, tree).phi == allocation_by_definition(poset, tree).phi


@settings(max_examples=40, deadline=None)
@given(instances())
def test_canonical_always_validates(instance):
    poset, users = instance
    from treekeys import min_weight_out_tree

    tree = min_weight_out_tree(poset, users)
    report = validate_enforcement(
        poset, tree, canonical_allocation(poset, tree), require_minimal=True
    )
    assert report.ok and report.minimal is True


@settings(max_examples=40, deadline=None)
@given(instances())
def test_start_points_cover_down_sets_disjointly(instance):
    poset, users = instance
    from treekeys import min_weight_out_tree

    tree = min_weight_out_tree(poset, users)
    allocation = canonical_allocation(poset, tree)
    reach = tree.descendant_sets()
    for x in poset.elements:
        points = sorted(allocation.phi[x])
        union = set()
        for z in points:
            assert not (union & reach[z])  # pairwise disjoint
            union |= reach[z]
        assert union == poset.down_set(x)


@settings(max_examples=30, deadline=None)
@given(instances(max_elements=6), st.integers(0, 2**16))
def test_valid_allocations_contain_the_canonical_one(instance, salt):
    # randomly perturb: supersets that still validate must contain the
    # canonical points; dropping a canonical point must always be caught
    poset, users = instance
    from treekeys import min_weight_out_tree

    tree = min_weight_out_tree(poset, users)
    canonical = canonical_allocation(poset, tree)
    rng = random.Random(salt)
    phi = {}
    for x in poset.elements:
        extra = set()
        candidates = sorted(poset.down_set(x) - canonical.phi[x])
        if candidates and rng.random() < 0.7:
            extra.add(rng.choice(candidates))
        phi[x] = canonical.phi[x] | extra
    report = validate_enforcement(poset, tree, KeyAllocation(phi=phi))
    assert report.ok
    assert all(phi[x] >= canonical.phi[x] for x in poset.elements)

    victims = [x for x in poset.sorted_elements if len(canonical.phi[x]) > 1]
    if victims:
        victim = rng.choice(victims)
        dropped = dict(canonical.phi)
        dropped[victim] = frozenset(sorted(dropped[victim])[1:])
        assert not validate_enforcement(poset, tree, KeyAllocation(phi=dropped)).ok
