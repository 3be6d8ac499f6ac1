from hypothesis import given, settings
from hypothesis import strategies as st

from treekeys.matching import max_bipartite_matching


def brute_max_matching_size(adjacency):
    """Exponential reference: try every injective assignment."""

    def go(lefts, taken):
        if not lefts:
            return 0
        head, rest = lefts[0], lefts[1:]
        best = go(rest, taken)  # leave head unmatched
        for right in adjacency[head]:
            if right not in taken:
                best = max(best, 1 + go(rest, taken | {right}))
        return best

    return go(list(adjacency), frozenset())


def test_perfect_matching():
    got = max_bipartite_matching({"a": [1, 2], "b": [1], "c": [2, 3]})
    assert len(got) == 3
    assert got["b"] == 1


def test_bottleneck():
    # three lefts share one right
    got = max_bipartite_matching({"a": [1], "b": [1], "c": [1]})
    assert len(got) == 1


def test_empty():
    assert max_bipartite_matching({}) == {}
    assert max_bipartite_matching({"a": []}) == {}


def test_augmenting_path_needed():
    # greedy would match a-1 and strand b; maximum matching pairs both
    got = max_bipartite_matching({"a": [1, 2], "b": [1]})
    assert len(got) == 2
    assert got == {"a": 2, "b": 1}


def test_deterministic():
    adjacency = {"a": [1, 2, 3], "b": [1, 2], "c": [2, 3], "d": [3]}
    assert max_bipartite_matching(adjacency) == max_bipartite_matching(adjacency)


@settings(max_examples=150, deadline=None)
@given(
    st.dictionaries(
        st.integers(0, 5),
        st.lists(st.integers(0, 5), unique=True, max_size=6),
        max_size=6,
    )
)
def test_matching_is_valid_and_maximum(adjacency):
    got = max_bipartite_matching(adjacency)
    for left, right in got.items():
        assert right in adjacency[left]
    assert len(set(got.values())) == len(got)  # injective
    assert len(got) == brute_max_matching_size(adjacency)
