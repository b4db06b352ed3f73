"""The twelve acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line (also under
``pytest -v`` without ``-s``).  Random sampling is seeded by ``DLCHAR_SEED``
(default 0) and the seed is printed first.
"""

import itertools
import os
import random
import statistics
import time

import pytest

from dlchar.characterise import (
    Bounds, adversarial_fit, characterise_aleq, characterise_bot_dllite, characterise_el_dllite,
    characterise_elq, gen_lowerbound_instance, geq_or_family, geq_or_witness, inverse_family,
    inverse_witness, lowerbound_family, shrink_positive_example, verify_characterisation,
)
from dlchar.core import (
    ALEQ, EL, EL_BOT, ELQ, Fragment, Signature, depth, depth_nr_size, parse_concept, render_concept, size,
)
from dlchar.data import catdog_ontology, ebike, example_three, example_two, inverse_ontology
from dlchar.frontier import frontier, size_bound, verify_frontier
from dlchar.interp import ExampleSet, Interpretation, PointedInterpretation, eval_concept, fits, holds_at
from dlchar.learn import mq_learn, oracle_from_concept
from dlchar.ontology import (
    CI, DLLiteOntology, basics_over, canonical_model, el_equivalent_wrt, el_subsumes_wrt, named_form,
    satisfiable_wrt, satisfies_ontology,
)
from dlchar.reason import (
    bounded_equivalent, elq_countermodel, enumerate_concepts, equivalent_empty, find_model,
    semantic_types, subsumes_empty,
)

from oracles import naive_holds

SEED = int(os.environ.get("DLCHAR_SEED", "0"))
P = parse_concept
A_R = Signature(frozenset("A"), frozenset("R"))
AB_R = Signature(frozenset("AB"), frozenset("R"))
ABC_R = Signature(frozenset("ABC"), frozenset("R"))


@pytest.fixture(scope="module", autouse=True)
def _header(request):
    with request.config.pluginmanager.get_plugin("capturemanager").global_and_fixture_disabled():
        print(f"\n# dlchar acceptance seed={SEED}")
    yield


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str, started: float) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.1f}s)")
        assert ok, detail
    return emit


def rng(n: int) -> random.Random:
    return random.Random(f"{SEED}-{n}")


def random_interp(r: random.Random, n: int, sig: Signature, p_label=0.4, degree=1.5) -> Interpretation:
    dom = [f"x{i}" for i in range(n)]
    p_edge = min(1.0, degree / n)
    concepts = {a: [x for x in dom if r.random() < p_label] for a in sorted(sig.concepts)}
    roles = {s: [(x, y) for x in dom for y in dom if r.random() < p_edge] for s in sorted(sig.roles)}
    return Interpretation(dom, concepts, roles, sig)


def random_named_ontology(r: random.Random, sig: Signature, max_cis: int) -> DLLiteOntology:
    basics = basics_over(sig)
    cis = tuple(CI(r.choice(basics), r.choice(basics), r.random() < 0.3) for _ in range(r.randint(0, max_cis)))
    o, _ = named_form(DLLiteOntology(cis, sig))
    return o


# -- worked examples -------------------------------------------------------------------

def test_criterion_1_ebike(report):
    t = time.perf_counter()
    c, e = ebike()
    fr = fits(c, e)
    exact = [holds_at(c, pi) for pi in (*e.positives, *e.negatives)] == [True, False, False]
    elapsed = time.perf_counter() - t
    report(1, bool(fr) and exact and elapsed < 1, f"fits={bool(fr)} exact={exact}", t)


def test_criterion_2_example_two(report):
    t = time.perf_counter()
    f, b = Fragment.parse("exists,and,or"), Bounds(dp=2, size=8)
    c, e = example_two(("A",))
    over_a = verify_characterisation(c, e, f, bounds=b)
    c, e = example_two(("A", "B"))
    over_ab = verify_characterisation(c, e, f, bounds=b)
    reported = P("exists R.(A | B)") in over_ab.fitting()
    ok = over_a.ok and not over_ab.ok and reported and time.perf_counter() - t < 10
    report(2, ok, f"over A ok={over_a.ok}; over A,B violations={len(over_ab.violations)} "
                  f"reports exists R.(A | B)={reported}", t)


def test_criterion_3_example_three(report):
    t = time.perf_counter()
    c, e, o = example_three()
    f, b = Fragment.parse("and,or,neg"), Bounds(dp=0, size=8)
    models = satisfies_ontology(e.positives[0].interp, o)
    with_o = verify_characterisation(c, e, f, o, b)
    without = verify_characterisation(c, e, f, None, b)
    target = P("Cat & Red & !Dog")
    named = any(bounded_equivalent(d, target, None, 1) for d in without.fitting())
    ok = models and with_o.ok and not without.ok and named and time.perf_counter() - t < 10
    report(3, ok, f"I |= O: {models}; under O ok={with_o.ok}; without O reports Cat & Red & !Dog={named}", t)


# -- subsumption oracle ---------------------------------------------------------------------

_C4 = {}


def _criterion_4_data():
    if not _C4:
        cs = enumerate_concepts(ELQ, AB_R, 2, 2, 14, budget=10 ** 7)
        types = semantic_types(cs, AB_R, 4)
        masks = [0] * len(cs)
        for t_i, key in enumerate(types):
            for j in range(len(cs)):
                if key >> j & 1:
                    masks[j] |= 1 << t_i
        mismatches = [(c, d) for i, c in enumerate(cs) for j, d in enumerate(cs)
                      if subsumes_empty(c, d) != (masks[i] & ~masks[j] == 0)]
        _C4.update(cs=cs, mismatches=mismatches)
    return _C4


def test_criterion_4_dp_matches_brute_force_cap_4(report):
    t = time.perf_counter()
    data = _criterion_4_data()
    n, bad = len(data["cs"]), data["mismatches"]
    detail = f"{n} concepts, {n * n} pairs, {len(bad)} mismatches at model cap 4"
    if bad:
        c, d = bad[0]
        detail += f"; e.g. {render_concept(c)} vs {render_concept(d)}"
    report(4, not bad and time.perf_counter() - t < 300, detail, t)


def test_criterion_4_mismatches_are_cap_artefacts():
    # every cap-4 disagreement is a true non-subsumption whose smallest countermodel has 5 elements
    for c, d in _criterion_4_data()["mismatches"]:
        assert not subsumes_empty(c, d)
        assert find_model([c], [d], None, 4, AB_R) is None
        w = find_model([c], [d], None, 5, AB_R)
        assert w is not None and naive_holds(c, w) and not naive_holds(d, w)
        cm = elq_countermodel(c, d)
        assert naive_holds(c, cm) and not naive_holds(d, cm)


# -- frontier --------------------------------------------------------------------------------

def test_criterion_5_frontier(report):
    t = time.perf_counter()
    r = rng(5)
    pool = enumerate_concepts(ELQ, AB_R, 2, 2, 12, budget=10 ** 7)
    sample = [r.choice(pool) for _ in range(200)]
    failures, over, at_zero = [], [], 0
    for c in sample:
        fr = frontier(c)
        if not verify_frontier(c, fr, 2, 2, size(c) + 4, AB_R).ok:
            failures.append(c)
        total = fr.total_size()
        if depth(c) == 0:
            # the cubic term vanishes at depth 0; the induction's base case gives |C|^2
            at_zero += 1
            if total > size(c) ** 2:
                over.append(c)
        elif total > 5 * depth(c) * size(c) ** 3:
            over.append(c)
    ok = not failures and not over and time.perf_counter() - t < 300
    report(5, ok, f"200 concepts, {len(failures)} verification failures, {len(over)} over the bound "
                  f"({at_zero} at depth 0 checked against |C|^2)", t)


# -- small models ------------------------------------------------------------------------------

def test_criterion_6_shrink(report):
    t = time.perf_counter()
    r = rng(6)
    pool = enumerate_concepts(ELQ, AB_R, 2, 2, 10, budget=10 ** 7)
    done, bad = 0, []
    while done < 100:
        c = r.choice(pool)
        interp = random_interp(r, r.randint(1, 8), AB_R, degree=2.5)
        ext = sorted(eval_concept(c, interp, strict=False))
        if not ext:
            continue
        pi = PointedInterpretation(interp, r.choice(ext))
        small = shrink_positive_example(c, pi)
        n = size(c)
        if not (small.interp.is_subinterpretation_of(interp) and small.point == pi.point
                and naive_holds(c, small) and len(small) <= n ** n):
            bad.append(c)
        done += 1
    report(6, not bad and time.perf_counter() - t < 60, f"100 instances, {len(bad)} violations", t)


# -- canonical models ------------------------------------------------------------------------------

def test_criterion_7_canonical_model(report):
    t = time.perf_counter()
    r = rng(7)
    pool = enumerate_concepts(EL, AB_R, 2, 1, 7)
    ds = enumerate_concepts(EL, AB_R, 2, 1, 7)
    done, violations, z3_checked = 0, 0, 0
    while done < 100:
        c, o = r.choice(pool), random_named_ontology(r, AB_R, 3)
        if not satisfiable_wrt(c, o):
            continue
        can = canonical_model(c, o)
        if not satisfies_ontology(can.interp, o):
            violations += 1
        for d in ds:
            member = holds_at(d, can, strict=False)
            # an O-unsatisfiable D is never entailed by the satisfiable C
            entailed = satisfiable_wrt(d, o) and el_subsumes_wrt(c, d, o, route="simulation")
            if member != entailed:
                violations += 1
        # independent confirmation by bounded model search on a few D per instance
        for d in r.sample(ds, 3):
            member = holds_at(d, can, strict=False)
            witness = find_model([c], [d], o, 4 if member else 5)
            z3_checked += 1
            if member != (witness is None):
                violations += 1
        done += 1
    ok = violations == 0 and time.perf_counter() - t < 300
    report(7, ok, f"100 instances x {len(ds)} D, {z3_checked} z3 cross-checks, {violations} violations", t)


# -- characterisations -----------------------------------------------------------------------------

def test_criterion_8_characterisations(report):
    t = time.perf_counter()
    r = rng(8)
    failed = {"elq": 0, "el_dllite": 0, "bot": 0, "aleq": 0}

    b = Bounds(dp=2, nr=2, size=8)
    pool = enumerate_concepts(ELQ, AB_R, 2, 2, 8)
    for c in (r.choice(pool) for _ in range(50)):
        e = characterise_elq(c, "bounded_complete", b, AB_R)
        failed["elq"] += not verify_characterisation(c, e, ELQ, bounds=b, signature=AB_R).ok

    b = Bounds(dp=2, nr=1, size=7)
    pool = enumerate_concepts(EL, ABC_R, 2, 1, 6)
    done = 0
    while done < 50:
        c, o = r.choice(pool), random_named_ontology(r, ABC_R, 3)
        if not satisfiable_wrt(c, o):
            continue
        e = characterise_el_dllite(c, o, b, ABC_R)
        failed["el_dllite"] += not verify_characterisation(c, e, EL_BOT, o, b, ABC_R).ok
        done += 1

    b = Bounds(dp=1, nr=1, size=7)
    for _ in range(50):
        o = random_named_ontology(r, ABC_R, 3)
        e = characterise_bot_dllite(o, ABC_R)
        failed["bot"] += not verify_characterisation(P("bot"), e, EL_BOT, o, b, ABC_R).ok

    b = Bounds(dp=1, nr=1, size=8)
    pool = enumerate_concepts(ALEQ, A_R, 1, 1, 8)
    for c in (r.choice(pool) for _ in range(50)):
        e = characterise_aleq(c, 1, 1, A_R, b)
        failed["aleq"] += not verify_characterisation(c, e, ALEQ, bounds=b, signature=A_R).ok

    ok = not any(failed.values()) and time.perf_counter() - t < 900
    report(8, ok, "failures per builder over 50 targets: " + ", ".join(f"{k}={v}" for k, v in failed.items()), t)


# -- negative results --------------------------------------------------------------------------------

def test_criterion_9_adversarial(report):
    t = time.perf_counter()
    c = P("A")
    e = characterise_elq(c, "bounded_complete", Bounds(dp=1, nr=2, size=6), A_R)
    k = 1 + max(len(pi) for pi, _ in e.labelled())
    fam = geq_or_family("A", "R", k)
    hits = adversarial_fit(e, Fragment.parse("geq,or"), Bounds(dp=1, nr=2, size=5))
    w = geq_or_witness("A", "R", k)
    geq_ok = fam in hits and bool(fits(fam, e)) and holds_at(fam, w) and not holds_at(c, w)

    o = inverse_ontology()
    e = characterise_el_dllite(c, o)
    n = 1 + max(len(pi) for pi, _ in e.labelled())
    cn = inverse_family("A", "R", n)
    hits = adversarial_fit(e, Fragment.parse("exists,inv,and"), Bounds(dp=1, size=5), o)
    w = inverse_witness("A", "R", n)
    inv_ok = (cn in hits and bool(fits(cn, e)) and satisfies_ontology(w.interp, o)
              and holds_at(c, w) and not holds_at(cn, w))
    ok = geq_ok and inv_ok and time.perf_counter() - t < 60
    report(9, ok, f"A | >=k R.A with k={k} fits and differs: {geq_ok}; C_n with n={n} fits and differs: {inv_ok}", t)


# -- lower bound ---------------------------------------------------------------------------------------

def test_criterion_10_lower_bound(report):
    t = time.perf_counter()
    details, ok = [], True
    for n in (1, 2):
        c, sig = gen_lowerbound_instance(n)
        dp, nr, _ = depth_nr_size(c)
        b = Bounds(dp=dp, nr=nr, size=5)
        fam = lowerbound_family(n)
        e = characterise_elq(c, "bounded_complete", b, sig, extra=fam)

        def passes(ps):
            return verify_characterisation(c, ExampleSet(ps, e.negatives, sig), ELQ, None, b, sig, fam).ok

        ps = list(e.positives)
        start_ok = passes(ps)
        for pi in list(ps):
            rest = [q for q in ps if q is not pi]
            if passes(rest):
                ps = rest
        below = not any(passes(list(sub)) for sub in itertools.combinations(ps, 2 ** n - 1))
        ok = ok and start_ok and len(ps) >= 2 ** n and below
        details.append(f"n={n}: {len(e.positives)} -> {len(ps)} positives (need {2 ** n})")
    report(10, ok and time.perf_counter() - t < 600, "; ".join(details), t)


# -- learning ---------------------------------------------------------------------------------------------

def test_criterion_11_mq_learning(report):
    t = time.perf_counter()
    targets = enumerate_concepts(EL, A_R, 1, 1, 20)
    wrong = []
    for c in targets:
        h = mq_learn(EL, A_R, Bounds(dp=1, nr=1, size=8), oracle_from_concept(c)).hypothesis
        if not equivalent_empty(h, c):
            wrong.append(c)
    o = catdog_ontology()
    target = P("Cat & Red")
    h = mq_learn(EL_BOT, Signature(frozenset(["Red"])), Bounds(dp=0, size=6), oracle_from_concept(target, o)).hypothesis
    catdog = el_equivalent_wrt(h, target, o)
    ok = not wrong and catdog and time.perf_counter() - t < 300
    report(11, ok, f"{len(targets) - len(wrong)}/{len(targets)} depth-1 targets recovered; Cat & Red: {catdog}", t)


# -- scaling ------------------------------------------------------------------------------------------------

def test_criterion_12_eval_scaling(report):
    t = time.perf_counter()
    r = rng(12)
    c = P("exists R.(A & >=2 R.B) & forall R.exists R-.A & !(B | exists R.exists R.A)")
    sizes = (100, 200, 400)
    times = []
    for n in sizes:
        interp = random_interp(r, n, AB_R, degree=3)
        runs = []
        for _ in range(7):
            s = time.perf_counter()
            eval_concept(c, interp)
            runs.append(time.perf_counter() - s)
        times.append(statistics.median(runs))
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(q <= 4 * 1.5 for q in ratios) and time.perf_counter() - t < 60
    shown = ", ".join(f"{n}: {s * 1e3:.2f}ms" for n, s in zip(sizes, times))
    report(12, ok, f"{shown}; doubling ratios {', '.join(f'{q:.2f}' for q in ratios)} (limit 6.0)", t)
