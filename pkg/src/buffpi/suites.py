"""Named check suites: fixed programs, seeded generators and their reports.

Each suite returns a :class:`Report`; the command line prints it and the
acceptance tests assert on it.  Reports contain counts and the first
counterexample only, never timings, so reruns are byte-identical.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import erlang, go
from .canon import canonicalize
from .checks import (
    abstraction_pairs, abstraction_verdicts, corpus, correspondence_mismatches, nontrivial_bisimilar_pairs,
    substitution_failures, substitution_instances, validity_violations,
)
from .equivalence import Bisimilar, Lts, naive_bisimilar, random_lts, strong_bisim, weak_bisim
from .errors import UnknownSuite
from .parser import parse_config, parse_erl, parse_go
from .printer import show_config
from .semantics import run_trace


@dataclass
class Report:
    suite: str
    checked: int
    failures: int
    first: str | None = None
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def lines(self) -> list[str]:
        out = [f"{self.suite}: {self.checked} checked, {self.failures} failures"]
        for k, v in sorted(self.notes.items()):
            out.append(f"  {k}: {v}")
        if self.first:
            out.append(f"  first counterexample: {self.first}")
        return out

    def to_json(self) -> dict:
        return {"suite": self.suite, "checked": self.checked, "failures": self.failures, "first": self.first,
                "notes": dict(sorted(self.notes.items()))}


# ---------------------------------------------------------- golden traces

# start configuration, number of tau steps, and the printed intermediate
# states (primes spelled out) that the trace must reproduce
GOLDEN = {
    "extrusion": (
        "new a in b<a>.a(x).0 | b(y).y<c>.0 ; { b -> (5, []) }",
        [
            "new a in a(x).0 | b(y).y<c>.0 ; { b -> (5, [(new a)]) }",
            "new a in a(x).0 | a<c>.0 ; { b -> (5, []) }",
        ],
    ),
    "global_clash": (
        "b<a>.(new a in b<a>.b<a>.0) ; { b -> (5, []) }",
        [
            "new a in b<a>.b<a>.0 ; { b -> (5, [a]) }",
            "new a' in b<a'>.0 ; { b -> (5, [a, (new a')]) }",
            "new a' in 0 ; { b -> (5, [a, (new a'), (new a')]) }",
        ],
    ),
    "nested_local": (
        "new a in b<a>.(new a in b<a>.0) ; { b -> (5, []) }",
        [
            "new a in (new a in b<a>.0) ; { b -> (5, [(new a)]) }",
            "new a in new a' in 0 ; { b -> (5, [(new a), (new a')]) }",
        ],
    ),
    "shadowed": (
        "new a in new a in b<a>.b<a>.0 ; { b -> (5, []) }",
        [
            "new a in new a' in b<a'>.0 ; { b -> (5, [(new a')]) }",
            "new a in new a' in 0 ; { b -> (5, [(new a'), (new a')]) }",
        ],
    ),
}


def golden_trace(name: str):
    start, states = GOLDEN[name]
    return run_trace(parse_config(start), ["tau"] * len(states))


def check_golden(names=None) -> Report:
    names = sorted(GOLDEN) if names is None else names
    checked = bad = 0
    first = None
    for name in names:
        _, states = GOLDEN[name]
        trace = golden_trace(name)
        for i, (t, want) in enumerate(zip(trace, states)):
            checked += 1
            expected = canonicalize(parse_config(want))
            if t.target != expected or t.action.kind != "tau":
                bad += 1
                first = first or f"{name} step {i + 1}: {show_config(t.target)} != {show_config(expected)}"
    return Report("golden", checked, bad, first)


# --------------------------------------------------------------- go corpus

GO_PROGRAMS = {
    "handshake": """
chan c = make(chan int, 0)
func main(x, y) { x = make(chan int, 0); go f(x); y = <-x; c <- y }
func f(w) { w <- 5 }
""",
    "local_buffer": """
chan c = make(chan int, 0)
func main(x, y) { x = make(chan int, 1); x <- 1; y = <-x; c <- y }
""",
    "global_buffer": """
chan c = make(chan int, 0)
chan d = make(chan int, 1)
func main(y) { d <- 2; y = <-d; c <- y }
""",
    "select": """
chan c = make(chan int, 0)
func main(x, y) { x = make(chan int, 0); go f(x); select { case y = <-x: c <- y case c <- 7: nil } }
func f(w) { w <- 3 }
""",
    "relay": """
chan c = make(chan int, 0)
chan d = make(chan int, 0)
func main(x) { x = 3; go g(x); c <- x }
func g(v) { d <- v }
""",
}

_SEND1 = "chan c = make(chan int, 0)\nfunc main() { c <- 1 }\n"
_SEND2 = "chan c = make(chan int, 0)\nfunc main() { c <- 2 }\n"
_SEL12 = "chan c = make(chan int, 0)\nfunc main() { select { case c <- 1: nil case c <- 2: nil } }\n"
_SEL21 = "chan c = make(chan int, 0)\nfunc main() { select { case c <- 2: nil case c <- 1: nil } }\n"
_SEND5 = "chan c = make(chan int, 0)\nfunc main(x, y) { c <- 5 }\n"
_SEND1XY = "chan c = make(chan int, 0)\nfunc main(x, y) { c <- 1 }\n"

# (name, left, right, expected Go-level verdict)
GO_PAIRS = [
    ("same", GO_PROGRAMS["handshake"], GO_PROGRAMS["handshake"], True),
    ("internal_vs_direct", GO_PROGRAMS["handshake"], _SEND5, True),
    ("buffer_vs_direct", GO_PROGRAMS["local_buffer"], _SEND1XY, True),
    ("select_order", _SEL12, _SEL21, True),
    ("distinct_values", _SEND1, _SEND2, False),
    ("select_vs_send", _SEL12, _SEND1, False),
]


def check_gosim(programs=None, max_states: int = 200) -> Report:
    programs = sorted(GO_PROGRAMS) if programs is None else programs
    checked = bad = 0
    first = None
    notes = {}
    for name in programs:
        g = parse_go(GO_PROGRAMS[name])
        fails = go.simulation_failures(g, max_states=max_states)
        n = len(go.go_lts(g, max_states=max_states).edges)
        notes[name] = f"{n} transitions, {len(fails)} failures"
        checked += n
        bad += len(fails)
        if fails and first is None:
            first = f"{name}: {fails[0]}"
    return Report("gosim", checked, bad, first, notes)


def _verdict(v) -> bool | None:
    if isinstance(v, Bisimilar):
        return True
    return None if type(v).__name__ == "BoundedOnly" else False


def check_goabs(pairs=None) -> Report:
    pairs = GO_PAIRS if pairs is None else pairs
    bad = 0
    first = None
    notes = {}
    for name, left, right, _expected in pairs:
        src, tgt = go.abstraction_verdicts(parse_go(left), parse_go(right))
        s, t = _verdict(src), _verdict(tgt)
        notes[name] = f"go {s}, encoding {t}"
        if s is None or s != t:
            bad += 1
            first = first or name
    return Report("goabs", len(pairs), bad, first, notes)


# ----------------------------------------------------------- erlang corpus

ERL_PROGRAMS = {
    "ping": ("start = fun () -> let p = spawn echo [] in p ! 'ok'.\n"
             "echo = fun () -> receive x when 'true' -> x end.\n", False),
    "selective": ("start = fun () -> let p = spawn w [] in let u = p ! 2 in p ! 1.\n"
                  "w = fun () -> receive x when lt(x, 2) -> out ! x end.\n", False),
    "observed": ("start = fun () -> receive x when eq(x, 'go') -> out ! 'done'; y when 'true' -> y end.\n", True),
    "apply": ("start = fun () -> apply f(3).\nf = fun (n) -> out ! n.\n", False),
}


def check_erlsim(programs=None, max_states: int = 200) -> Report:
    programs = sorted(ERL_PROGRAMS) if programs is None else programs
    checked = bad = 0
    first = None
    notes = {}
    for name in programs:
        text, accessible = ERL_PROGRAMS[name]
        g = parse_erl(text, accessible=accessible)
        env = erlang.erl_env(g)
        n = len(erlang.erl_lts(g, env, max_states).edges)
        fails = erlang.simulation_failures(g, env, max_states)
        notes[name] = f"{n} transitions, {len(fails)} failures"
        checked += n
        bad += len(fails)
        if fails and first is None:
            first = f"{name}: {fails[0]}"
    return Report("erlsim", checked, bad, first, notes)


def check_receive(cases: int = 200, seed: int = 0) -> Report:
    bad = blocked = 0
    first = None
    for mbox, clauses in erlang.receive_cases(cases, seed):
        r = erlang.receive_agreement(mbox, clauses)
        blocked += r["rule"] == erlang.BLOCKED
        if not (r["rule"] == r["oracle"] == r["encoding"]):
            bad += 1
            if first is None:
                guards = ", ".join(erlang.show_expr(c.guard) for c in clauses)
                first = f"mailbox [{', '.join(mbox)}], guards [{guards}]: {r}"
    return Report("receive", cases, bad, first, {"blocked": blocked})


def check_erlsubst(cases: int = 500, seed: int = 0) -> Report:
    fails = erlang.substitution_failures(cases, seed)
    first = None
    if fails:
        e, x, v = fails[0]
        first = f"{erlang.show_expr(e)} with {v} for {x}"
    return Report("erlsubst", cases, len(fails), first)


# ------------------------------------------------------------- pi corpus


def check_pisubst(cases: int = 500, seed: int = 0) -> Report:
    from .printer import show

    fails = substitution_failures(cases, seed)
    first = None
    if fails:
        p, buffered, x, c = fails[0]
        first = f"{show(p)} with {c} for {x}, buffered {sorted(buffered)}"
    return Report("pisubst", cases, len(fails), first)


def check_validity(max_size: int = 3) -> Report:
    configs = corpus(max_size)
    bad = validity_violations(configs)
    return Report("validity", len(configs), len(bad), bad[0] if bad else None)


def check_correspondence(max_size: int = 3) -> Report:
    configs = corpus(max_size)
    bad = correspondence_mismatches(configs)
    return Report("correspondence", len(configs), len(bad), str(bad[0]) if bad else None)


def check_abstraction(pairs: int = 50, congruent: int = 15, seed: int = 0, max_size: int = 3) -> Report:
    configs = corpus(max_size)
    chosen = abstraction_pairs(configs, pairs, congruent, seed) + nontrivial_bisimilar_pairs(configs)
    bad = bisimilar = 0
    first = None
    for a, b in chosen:
        src, enc = abstraction_verdicts(a, b)
        bisimilar += src == "bisimilar"
        if src != enc or src == "bounded":
            bad += 1
            first = first or f"{show_config(a)} vs {show_config(b)}: {src} / {enc}"
    return Report("abstraction", len(chosen), bad, first, {"bisimilar pairs": bisimilar})


# --------------------------------------------------------- bisimulation


def lts_pairs(n: int, seed: int = 0, max_states: int = 30) -> list[tuple[Lts, Lts]]:
    """Random pairs: independent systems, relabelled copies with a duplicated
    state (bisimilar by construction) and single-edge mutants."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        kind = i % 3
        a = random_lts(rng, max_states - 1 if kind == 1 else max_states)  # room for the duplicate
        if kind == 0:
            b = random_lts(rng, max_states)
        elif kind == 1:
            perm = list(range(a.size))
            rng.shuffle(perm)
            dup = rng.randrange(a.size)
            extra = a.size  # a copy of state ``dup`` with the same outgoing edges
            edges = [(perm[s], lab, perm[t]) for s, lab, t in a.edges]
            edges += [(extra, lab, perm[t]) for s, lab, t in a.edges if s == dup]
            edges += [(perm[s], lab, extra) for s, lab, t in a.edges if t == dup and rng.random() < 0.5]
            b = Lts.from_edges(a.size + 1, edges, perm[a.initial])
        else:
            edges = list(a.edges)
            if edges:
                j = rng.randrange(len(edges))
                s, lab, t = edges[j]
                edges[j] = (s, rng.choice([x for x in ("a", "b", "tau") if x != lab]), t)
            b = Lts.from_edges(a.size, edges, a.initial)
        out.append((a, b))
    return out


def check_engine(cases: int = 200, seed: int = 0) -> Report:
    bad = 0
    first = None
    agree = {"strong": 0, "weak": 0}
    for i, (a, b) in enumerate(lts_pairs(cases, seed)):
        for mode, fn in (("strong", strong_bisim), ("weak", weak_bisim)):
            fast = isinstance(fn(a, b), Bisimilar)
            slow = naive_bisimilar(a, b, weak=mode == "weak")
            agree[mode] += fast
            if fast != slow:
                bad += 1
                first = first or f"pair {i} ({mode})"
    return Report("engine", 2 * cases, bad, first,
                  {"strong bisimilar": agree["strong"], "weak bisimilar": agree["weak"]})


SUITES = {
    "golden": check_golden,
    "validity": check_validity,
    "correspondence": check_correspondence,
    "abstraction": check_abstraction,
    "engine": check_engine,
    "gosim": check_gosim,
    "goabs": check_goabs,
    "receive": check_receive,
    "pisubst": check_pisubst,
    "erlsubst": check_erlsubst,
    "erlsim": check_erlsim,
}


def run_suite(name: str, **params) -> Report:
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name](**params)


__all__ = [
    "Report", "GOLDEN", "golden_trace", "GO_PROGRAMS", "GO_PAIRS", "ERL_PROGRAMS", "lts_pairs", "SUITES",
    "run_suite", "check_golden", "check_validity", "check_correspondence", "check_abstraction", "check_engine",
    "check_gosim", "check_goabs", "check_receive", "check_pisubst", "check_erlsubst", "check_erlsim",
]
