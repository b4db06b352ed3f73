import pytest

from dlchar.characterise import Bounds, verify_characterisation
from dlchar.core import EL_BOT, ELQ, Signature, TOP, parse_concept, render_concept
from dlchar.data import catdog_ontology, example_two
from dlchar.interp import Interpretation, PointedInterpretation, fits
from dlchar.learn import LearningFailed, MembershipOracle, QueryRejected, mq_learn, oracle_from_concept
from dlchar.ontology import el_equivalent_wrt, parse_ontology
from dlchar.reason import enumerate_concepts, equivalent_empty

P = parse_concept
A_R = Signature(frozenset("A"), frozenset("R"))
AB_R = Signature(frozenset("AB"), frozenset("R"))


def point(labels, sig=None):
    return PointedInterpretation(Interpretation(["x"], {a: ["x"] for a in labels}, {}, sig), "x")


def test_oracle_answers():
    assert oracle_from_concept(P("A")).ask(point("A"))
    _, e = example_two()
    assert not oracle_from_concept(P("exists R.A")).ask(e.negatives[0])


def test_oracle_rejects_examples_outside_the_ontology():
    o = parse_ontology("A <= !B")
    oracle = oracle_from_concept(P("A"), o)
    with pytest.raises(QueryRejected):
        oracle.ask(point("AB"))
    assert oracle.query_count == 0


@pytest.mark.parametrize("text", ["A", "B", "A & B", "exists R.A", "exists R.top", ">=2 R.top"])
def test_learns_depth_one_targets(text):
    target = P(text)
    oracle = oracle_from_concept(target)
    t = mq_learn(ELQ, AB_R, Bounds(dp=1, nr=2, size=6), oracle)
    assert equivalent_empty(t.hypothesis, target)
    assert fits(t.hypothesis, t.as_examples(AB_R))
    assert oracle.query_count == len(t.queried)


def test_learns_under_ontology():
    o = catdog_ontology()
    target = P("Cat & Red")
    t = mq_learn(EL_BOT, Signature(frozenset(["Red"])), Bounds(dp=0, size=6), oracle_from_concept(target, o))
    assert el_equivalent_wrt(t.hypothesis, target, o)


def test_query_count_bounded_by_characterisations():
    b = Bounds(dp=1, nr=1, size=5)
    oracle = oracle_from_concept(P("exists R.A"))
    t = mq_learn(ELQ, A_R, b, oracle)
    n_cands = len(enumerate_concepts(ELQ, A_R, b.dp, b.nr, b.size))
    assert t.candidates_tried <= n_cands
    # each candidate costs at least one fresh query until the target is reached
    assert len(t.queried) >= 1 and len(t.queried) <= 4 * t.candidates_tried


def test_top_is_not_the_first_candidate():
    t = mq_learn(ELQ, A_R, Bounds(dp=1, nr=1, size=5), oracle_from_concept(TOP))
    assert t.hypothesis == TOP
    assert t.candidates_tried == 2


def test_transcript_render():
    t = mq_learn(ELQ, A_R, Bounds(dp=0, size=3), oracle_from_concept(P("A")))
    text = t.render()
    assert text.splitlines()[-1] == "hypothesis: A"
    assert text.startswith(f"queries: {len(t.queried)}")


def test_unlearnable_target_fails():
    # every candidate is satisfiable, so a constant "no" contradicts each characterisation
    oracle = MembershipOracle(lambda pi: False)
    with pytest.raises(LearningFailed):
        mq_learn(ELQ, A_R, Bounds(dp=1, nr=1, size=4), oracle)


def test_rejects_unsupported_fragment():
    with pytest.raises(ValueError):
        mq_learn(EL_BOT, A_R, Bounds(), oracle_from_concept(P("A")))


@pytest.mark.parametrize("text", ["A & exists R.top", ">=2 R.A"])
def test_transcript_characterises_the_hypothesis(text):
    b = Bounds(dp=1, nr=2, size=6)
    t = mq_learn(ELQ, A_R, b, oracle_from_concept(P(text)))
    rep = verify_characterisation(t.hypothesis, t.as_examples(A_R), ELQ, bounds=b, signature=A_R)
    assert rep.ok, rep.render()
