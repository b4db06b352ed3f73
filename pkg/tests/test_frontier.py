from hypothesis import given, settings

from dlchar.core import Signature, depth, depth_nr_size, parse_concept, render_concept, size
from dlchar.frontier import frontier, size_bound, verify_frontier
from dlchar.reason import equivalent_empty, irredundant, subsumes_empty

from oracles import ELQ_OPS, concepts

P = parse_concept


def members(text):
    return [render_concept(m) for m in frontier(P(text))]


def test_frontier_examples():
    assert members("top") == []
    assert members("A") == ["top"]
    assert members("exists R.top") == ["top"]
    assert members(">=2 R.A") == [">=2 R.top & exists R.A"]


def test_frontier_of_conjunction_of_atoms():
    assert sorted(members("A & B")) == ["A", "B"]


def test_frontier_normalises_first():
    assert members("A & exists R.A & exists R.(A & B)") == members("A & exists R.(A & B)")


def test_verify_examples():
    sig = Signature(frozenset("AB"), frozenset("R"))
    assert verify_frontier(P("A & B"), [P("A"), P("B")], 0, 0, 5, sig).ok
    assert verify_frontier(P("A"), [P("top")], 0, 0, 5).ok
    rep = verify_frontier(P(">=2 R.A"), [P("exists R.A")], 1, 2, 8)
    assert not rep.ok
    assert ("uncovered", P(">=2 R.top")) in rep.violations


def test_verify_flags_non_subsumers_and_non_strict():
    rep = verify_frontier(P("A"), [P("B"), P("A")], 0, 0, 3, Signature(frozenset("AB")))
    kinds = sorted(k for k, _ in rep.violations)
    assert kinds == ["not a subsumer", "not strict"]


def test_bound_at_depth_zero():
    # the cubic bound vanishes at depth 0, where the frontier of A is {top}
    assert size_bound(P("A")) == 1
    assert frontier(P("A")).total_size() <= size_bound(P("A"))


_bounded = concepts(ops=ELQ_OPS, max_leaves=5, max_k=2).map(irredundant).filter(
    lambda c: depth_nr_size(c)[0] <= 2 and depth_nr_size(c)[1] <= 2)


@settings(max_examples=80, deadline=None)
@given(_bounded)
def test_frontier_verifies(c):
    fr = frontier(c)
    rep = verify_frontier(c, fr, 2, 2, size(c) + 6, Signature(frozenset("AB"), frozenset("R")))
    assert rep.ok, rep.violations
    assert fr.total_size() <= size_bound(c)
    if depth(c) > 0:
        assert fr.total_size() <= 5 * depth(c) * size(c) ** 3


@settings(max_examples=150, deadline=None)
@given(_bounded)
def test_members_are_strict_subsumers(c):
    for m in frontier(c):
        assert subsumes_empty(c, m)
        assert not equivalent_empty(c, m)
