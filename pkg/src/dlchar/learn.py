"""Exact learning from membership queries, driven by characterisations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from dlchar.characterise import Bounds, characterise_el_dllite, characterise_elq
from dlchar.core import EL_BOT, ELQ, Concept, Fragment, Signature, render_concept
from dlchar.interp import ExampleSet, PointedInterpretation, holds_at
from dlchar.ontology import DLLiteOntology, el_equivalent_wrt, satisfies_ontology
from dlchar.reason import enumerate_concepts


class QueryRejected(ValueError):
    """The queried example violates the oracle's ontology."""


class LearningFailed(RuntimeError):
    """No enumerated candidate is consistent with the oracle."""


@dataclass
class MembershipOracle:
    answer: Callable[[PointedInterpretation], bool]
    ontology: Optional[DLLiteOntology] = None
    query_count: int = 0

    def ask(self, pi: PointedInterpretation) -> bool:
        if self.ontology is not None and not satisfies_ontology(pi.interp, self.ontology):
            raise QueryRejected("the example does not satisfy the ontology")
        self.query_count += 1
        return bool(self.answer(pi))


def oracle_from_concept(c: Concept, o: Optional[DLLiteOntology] = None) -> MembershipOracle:
    return MembershipOracle(lambda pi: holds_at(c, pi, strict=False), o)


@dataclass
class LearningTranscript:
    queried: list = field(default_factory=list)
    hypothesis: Optional[Concept] = None
    candidates_tried: int = 0

    def as_examples(self, signature: Optional[Signature] = None) -> ExampleSet:
        return ExampleSet([p for p, a in self.queried if a], [p for p, a in self.queried if not a], signature)

    def render(self) -> str:
        lines = [f"queries: {len(self.queried)}  candidates tried: {self.candidates_tried}"]
        for i, (pi, a) in enumerate(self.queried):
            lines.append(f"  q{i}: {len(pi)} elements -> {'yes' if a else 'no'}")
        lines.append(f"hypothesis: {render_concept(self.hypothesis) if self.hypothesis is not None else '-'}")
        return "\n".join(lines)


def _key(pi: PointedInterpretation) -> str:
    return json.dumps(pi.to_json(), sort_keys=True)


def mq_learn(f: Fragment, sig: Signature, bounds: Bounds, oracle: MembershipOracle) -> LearningTranscript:
    """Try candidates in (size, text) order; return the first whose characterisation the oracle confirms.

    Without an ontology the candidates come from ``f`` within L(>=,&,top);
    with one, from L(exists,&,top,bot) up to equivalence under it.  Answers
    are cached, so an example shared by several characterisations is asked once.
    """
    o = oracle.ontology
    if o is None and not f.ops <= ELQ.ops:
        raise ValueError("without an ontology the learner handles fragments of L(>=,&,top)")
    if o is not None and not f.ops <= EL_BOT.ops:
        raise ValueError("under an ontology the learner handles fragments of L(exists,&,top,bot)")
    full_sig = sig | (o.signature if o is not None else Signature())
    t = LearningTranscript()
    answers: dict[str, bool] = {}
    seen: list[Concept] = []
    for cand in enumerate_concepts(f, full_sig, bounds.dp, bounds.nr, bounds.size, bounds.budget):
        if o is not None:
            if any(el_equivalent_wrt(cand, s, o) for s in seen):
                continue
            seen.append(cand)
            e = characterise_el_dllite(cand, o, bounds, full_sig)
        else:
            e = characterise_elq(cand, "bounded_complete", bounds, full_sig, f)
        t.candidates_tried += 1
        consistent = True
        for pi, label in e.labelled():
            k = _key(pi)
            if k not in answers:
                answers[k] = oracle.ask(pi)
                t.queried.append((pi, answers[k]))
            if answers[k] != label:
                consistent = False
                break
        if consistent:
            t.hypothesis = cand
            return t
    raise LearningFailed("enumeration exhausted; widen the bounds")


__all__ = ["MembershipOracle", "QueryRejected", "LearningFailed", "oracle_from_concept",
           "LearningTranscript", "mq_learn"]
