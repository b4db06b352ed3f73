"""Command-line interface.

Exit codes: 0 success, 1 verification or property failure, 2 usage or parse
error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from dlchar.characterise import (
    Bounds, adversarial_fit, build_enk, characterise_aleq, characterise_el_dllite,
    characterise_elq, gen_lowerbound_instance, lowerbound_family, verify_characterisation,
)
from dlchar.core import (
    ALEQ, EL_BOT, ELQ, Fragment, FragmentError, ParseError, Signature, UnknownNameError,
    depth_nr_size, fragment_check, parse_concept, render_concept, signature_of,
)
from dlchar.frontier import frontier, size_bound, verify_frontier
from dlchar.interp import ExampleSet, describe, fits
from dlchar.learn import LearningFailed, mq_learn, oracle_from_concept
from dlchar.ontology import (
    UnsatisfiableError, canonical_model, load_ontology, satisfiable_wrt, satisfies_ontology,
)
from dlchar.reason import BudgetExceeded, find_model, subsumes_in

OK, FAILED, USAGE, BUDGET = 0, 1, 2, 3

DEFAULTS = {"max_depth": 2, "max_nr": 2, "max_size": 8, "model_cap": 5, "budget": 100_000,
            "mode": "bounded", "seed": 0, "fragment": None}

SUBCOMMANDS = ("check", "subsume", "frontier", "characterise", "verify", "canonical", "fit-search",
               "learn-demo", "enk", "lowerbound")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    concept: Optional[str] = None
    left: Optional[str] = None
    right: Optional[str] = None
    ontology: Optional[str] = None
    examples: Optional[str] = None
    signature: Optional[str] = None
    fragment: Optional[str] = None
    max_depth: int = 2
    max_nr: int = 2
    max_size: int = 8
    model_cap: int = 5
    budget: int = 100_000
    mode: str = "bounded"
    seed: int = 0
    n: Optional[int] = None
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("max_depth", "max_nr", "max_size", "model_cap", "budget"):
            if getattr(self, name) < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be nonnegative")
        if self.mode not in ("paper-exact", "bounded"):
            raise UsageError("--mode is paper-exact or bounded")

    @property
    def bounds(self) -> Bounds:
        return Bounds(self.max_depth, self.max_nr, self.max_size, self.model_cap, self.budget)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dlchar", description="Characterise description logic concepts by examples.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--concept")
        s.add_argument("--left")
        s.add_argument("--right")
        s.add_argument("--ontology", metavar="FILE")
        s.add_argument("--examples", metavar="FILE")
        s.add_argument("--signature", metavar="FILE")
        s.add_argument("--fragment", metavar="LIST")
        s.add_argument("--max-depth", type=int, metavar="N")
        s.add_argument("--max-nr", type=int, metavar="N")
        s.add_argument("--max-size", type=int, metavar="N")
        s.add_argument("--model-cap", type=int, metavar="N")
        s.add_argument("--mode", choices=("paper-exact", "bounded"))
        s.add_argument("--budget", type=int, metavar="N")
        s.add_argument("--seed", type=int, metavar="N")
        s.add_argument("--n", type=int, metavar="N")
        s.add_argument("--config", metavar="FILE", help="JSON file with the same keys as the flags")
        s.add_argument("--out", metavar="FILE")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    values = dict(DEFAULTS)
    if ns.config:
        with open(ns.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("the config file must hold a JSON object")
        for k, v in loaded.items():
            values[k.replace("-", "_")] = v
    for k, v in vars(ns).items():
        if k != "config" and v is not None:
            values[k] = v
    known = set(RunConfig.__dataclass_fields__) - {"extra"}
    extra = {k: v for k, v in values.items() if k not in known}
    if extra:
        raise UsageError(f"unknown configuration keys: {sorted(extra)}")
    return RunConfig(**values)


# -- helpers ---------------------------------------------------------------

def _signature(cfg: RunConfig) -> Signature:
    if not cfg.signature:
        return Signature()
    with open(cfg.signature, encoding="utf-8") as fh:
        return Signature.from_json(json.load(fh))


def _concept(text: Optional[str], flag: str):
    if text is None:
        raise UsageError(f"{flag} is required")
    return parse_concept(text)


def _ontology(cfg: RunConfig):
    return load_ontology(cfg.ontology) if cfg.ontology else None


def _examples(cfg: RunConfig) -> ExampleSet:
    if not cfg.examples:
        raise UsageError("--examples is required")
    with open(cfg.examples, encoding="utf-8") as fh:
        return ExampleSet.from_json(json.load(fh))


def _fragment(cfg: RunConfig, default: Optional[Fragment] = None) -> Fragment:
    if cfg.fragment:
        return Fragment.parse(cfg.fragment)
    if default is None:
        raise UsageError("--fragment is required")
    return default


class Output:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines = [f"# dlchar {cfg.subcommand} seed={cfg.seed}"]
        self.data: dict = {"subcommand": cfg.subcommand, "seed": cfg.seed}

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def flush(self, stream) -> None:
        stream.write("\n".join(self.lines) + "\n")
        if self.cfg.out:
            with open(self.cfg.out, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(self.data, indent=2, sort_keys=True) + "\n")


# -- subcommands -------------------------------------------------------------

def cmd_check(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    dp, nr, sz = depth_nr_size(c)
    out.say(render_concept(c))
    out.say(f"size {sz}  depth {dp}  nr {nr}")
    out.data.update({"concept": render_concept(c), "size": sz, "depth": dp, "nr": nr})
    code = OK
    if cfg.fragment:
        inside = fragment_check(c, Fragment.parse(cfg.fragment))
        out.say(f"in fragment {cfg.fragment}: {'yes' if inside else 'no'}")
        out.data["in_fragment"] = inside
        code = code if inside else FAILED
    o = _ontology(cfg)
    if o is not None and fragment_check(c, EL_BOT):
        sat = satisfiable_wrt(c, o)
        out.say(f"satisfiable w.r.t. ontology: {'yes' if sat else 'no'}")
        out.data["satisfiable"] = sat
    if cfg.examples:
        e = _examples(cfg)
        fr = fits(c, e)
        out.say(f"fits examples: {'yes' if fr else 'no'}")
        out.data["fits"] = fr.ok
        code = code if fr else FAILED
        if o is not None:
            good = all(satisfies_ontology(pi.interp, o) for pi, _ in e.labelled())
            out.say(f"examples satisfy ontology: {'yes' if good else 'no'}")
            out.data["examples_satisfy_ontology"] = good
            code = code if good else FAILED
    return code


def cmd_subsume(cfg: RunConfig, out: Output) -> int:
    c, d = _concept(cfg.left, "--left"), _concept(cfg.right, "--right")
    o = _ontology(cfg)
    verdict = subsumes_in(c, d, o, cfg.model_cap, _signature(cfg))
    out.say("true" if verdict else "false")
    out.data.update({"left": render_concept(c), "right": render_concept(d), "subsumed": verdict})
    if not verdict:
        w = find_model([c], [d], o, max(cfg.model_cap, 6), _signature(cfg))
        if w is not None:
            out.say(f"witness: {describe(w)}")
            out.data["witness"] = w.to_json()
    return OK


def cmd_frontier(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    fr = frontier(c)
    for m in fr:
        out.say(render_concept(m))
    rep = verify_frontier(c, fr, cfg.max_depth, cfg.max_nr, cfg.max_size, _signature(cfg) | signature_of(c), cfg.budget)
    out.say(f"members {len(fr)}  total size {fr.total_size()}  bound {size_bound(c)}")
    out.say(f"verified against {rep.checked} strict subsumers: {'ok' if rep.ok else 'FAILED'}")
    for kind, d in rep.violations:
        out.say(f"  {kind}: {render_concept(d)}")
    out.data.update({"concept": render_concept(c), "members": [render_concept(m) for m in fr],
                     "total_size": fr.total_size(), "bound": size_bound(c), "verified": rep.ok})
    return OK if rep.ok else FAILED


def _characterise(cfg: RunConfig, c, o, sig: Signature) -> ExampleSet:
    if o is not None:
        f = _fragment(cfg, EL_BOT)
        if not f.ops <= EL_BOT.ops:
            raise UsageError("under an ontology only fragments of exists,and,top,bot are supported")
        return characterise_el_dllite(c, o, cfg.bounds, sig)
    f = _fragment(cfg, ELQ)
    if f.ops <= ELQ.ops:
        mode = "paper_exact" if cfg.mode == "paper-exact" else "bounded_complete"
        return characterise_elq(c, mode, cfg.bounds, sig, f)
    if f.ops <= ALEQ.ops:
        return characterise_aleq(c, None, None, sig, cfg.bounds)
    raise UsageError(f"no characterisation builder for fragment {f}; try fit-search")


def cmd_characterise(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    o = _ontology(cfg)
    e = _characterise(cfg, c, o, _signature(cfg))
    out.say(f"target: {render_concept(c)}")
    out.say(f"positives: {len(e.positives)}  negatives: {len(e.negatives)}")
    for label, group in (("+", e.positives), ("-", e.negatives)):
        for pi in group:
            out.say(f"{label} {describe(pi)}")
    out.data.update(e.to_json())
    out.data["meta"] = e.meta
    return OK


def cmd_verify(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    e = _examples(cfg)
    o = _ontology(cfg)
    rep = verify_characterisation(c, e, _fragment(cfg), o, cfg.bounds, _signature(cfg))
    out.say(rep.render())
    out.data.update(rep.to_json())
    return OK if rep.ok else FAILED


def cmd_canonical(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    o = _ontology(cfg)
    if o is None:
        raise UsageError("--ontology is required")
    pi = canonical_model(c, o)
    out.say(describe(pi))
    out.data.update(pi.to_json())
    return OK


def cmd_fit_search(cfg: RunConfig, out: Output) -> int:
    e = _examples(cfg)
    o = _ontology(cfg)
    hits = adversarial_fit(e, _fragment(cfg), cfg.bounds, o, _signature(cfg))
    for h in hits:
        out.say(render_concept(h))
    out.say(f"{len(hits)} fitting concept(s)")
    out.data["fitting"] = [render_concept(h) for h in hits]
    return OK


def cmd_learn_demo(cfg: RunConfig, out: Output) -> int:
    c = _concept(cfg.concept, "--concept")
    o = _ontology(cfg)
    sig = _signature(cfg) | signature_of(c)
    f = _fragment(cfg, EL_BOT if o is not None else ELQ)
    oracle = oracle_from_concept(c, o)
    t = mq_learn(f, sig, cfg.bounds, oracle)
    out.say(t.render())
    out.say(f"query count: {oracle.query_count}")
    out.data.update({"hidden": render_concept(c), "hypothesis": render_concept(t.hypothesis),
                     "queries": oracle.query_count, "answers": [a for _, a in t.queried]})
    return OK


def cmd_enk(cfg: RunConfig, out: Output) -> int:
    sig = _signature(cfg)
    e = build_enk(cfg.max_depth, max(cfg.max_nr, 1), sig, cfg.budget)
    for pi in e.positives:
        out.say(f"+ {describe(pi)}")
    out.data.update(e.to_json())
    return OK


def cmd_lowerbound(cfg: RunConfig, out: Output) -> int:
    n = cfg.n if cfg.n is not None else 1
    if n < 1:
        raise UsageError("--n must be at least 1")
    c, sig = gen_lowerbound_instance(n)
    out.say(render_concept(c))
    out.say(f"signature: {', '.join(sorted(sig.concepts))}; roles: {', '.join(sorted(sig.roles))}")
    out.say(f"positive examples needed: at least {2 ** n}")
    out.data.update({"concept": render_concept(c), "signature": sig.to_json(),
                     "family": [render_concept(d) for d in lowerbound_family(n)], "min_positives": 2 ** n})
    return OK


HANDLERS = {
    "check": cmd_check, "subsume": cmd_subsume, "frontier": cmd_frontier,
    "characterise": cmd_characterise, "verify": cmd_verify, "canonical": cmd_canonical,
    "fit-search": cmd_fit_search, "learn-demo": cmd_learn_demo, "enk": cmd_enk,
    "lowerbound": cmd_lowerbound,
}


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        cfg = make_config(ns)
        out = Output(cfg)
        code = HANDLERS[cfg.subcommand](cfg, out)
    except BudgetExceeded as exc:
        stderr.write(f"budget exceeded: {exc}\n")
        return BUDGET
    except (UsageError, ParseError, UnknownNameError, FragmentError, UnsatisfiableError,
            OSError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return USAGE
    except LearningFailed as exc:
        stderr.write(f"learning failed: {exc}\n")
        return FAILED
    out.flush(stdout)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
