"""One test per acceptance criterion.  Each prints a single PASS/FAIL line
(also collected into the terminal summary) with the measured runtime against
its pinned limit."""

import subprocess
import sys
import time

import pytest

from buffpi import erlang
from buffpi.suites import (
    GO_PAIRS, GO_PROGRAMS, GOLDEN, check_abstraction, check_correspondence, check_engine, check_erlsubst,
    check_golden, check_goabs, check_gosim, check_pisubst, check_receive, check_validity, lts_pairs,
)

from conftest import ACCEPTANCE_LINES

# pinned wall-clock limits in seconds
LIMITS = {
    "golden": 1.0, "validity": 30.0, "correspondence": 120.0, "engine": 60.0,
    "gosim": 120.0, "receive": 120.0,
}


def record(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def timed(fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_c1_golden_traces(name):
    rep, dt = timed(check_golden, [name])
    record(f"C1[{name}]", rep.ok and dt < LIMITS["golden"],
           f"{rep.checked} steps, {rep.failures} mismatches, {dt:.2f}s < {LIMITS['golden']}s {rep.first or ''}")


def test_c1_final_queues():
    from buffpi.suites import golden_trace

    def queue(name):
        return [(e.local, e.name) for e in golden_trace(name)[-1].target.store["b"].queue]

    two, three = queue("global_clash"), queue("nested_local")
    ok2 = len(two) == 3 and two[0] == (False, "a") and two[1][0] and two[2][0] and two[1][1] == two[2][1]
    ok3 = len(three) == 2 and all(loc for loc, _ in three) and three[0][1] != three[1][1]
    record("C1[queues]", ok2 and ok3, f"global_clash {two}, nested_local {three}")


def test_c2_validity_preservation():
    rep, dt = timed(check_validity, 3)
    record("C2", rep.ok and dt < LIMITS["validity"],
           f"{rep.checked} configs, {rep.failures} violations, {dt:.1f}s < {LIMITS['validity']}s")


def test_c3_encoding_correspondence():
    rep, dt = timed(check_correspondence, 3)
    record("C3", rep.ok and dt < LIMITS["correspondence"],
           f"{rep.checked} configs, {rep.failures} mismatches, {dt:.1f}s < {LIMITS['correspondence']}s "
           f"{rep.first or ''}")


def test_c4_full_abstraction():
    rep, dt = timed(check_abstraction, 50, 15)
    bis = rep.notes["bisimilar pairs"]
    record("C4", rep.ok and rep.checked >= 50 and bis >= 10,
           f"{rep.checked} pairs ({bis} bisimilar), {rep.failures} disagreements, {dt:.1f}s")


def test_c5_engine_matches_naive():
    sizes = [max(a.size, b.size) for a, b in lts_pairs(200, 0)]
    rep, dt = timed(check_engine, 200, 0)
    record("C5", rep.ok and rep.checked == 400 and max(sizes) <= 30 and dt < LIMITS["engine"],
           f"200 pairs <= {max(sizes)} states, strong+weak, {rep.failures} disagreements, "
           f"{dt:.1f}s < {LIMITS['engine']}s")


def test_c6_go_simulation():
    rep, dt = timed(check_gosim)
    record("C6", rep.ok and len(GO_PROGRAMS) >= 5 and dt < LIMITS["gosim"],
           f"{len(GO_PROGRAMS)} programs, {rep.checked} transitions, {rep.failures} failures, "
           f"{dt:.1f}s < {LIMITS['gosim']}s")


def test_c7_go_full_abstraction():
    rep, dt = timed(check_goabs)
    kinds = {exp for *_, exp in GO_PAIRS}
    record("C7", rep.ok and rep.checked >= 5 and kinds == {True, False},
           f"{rep.checked} pairs, {rep.failures} disagreements, {dt:.1f}s")


def test_c8_erlang_receive():
    cases = erlang.receive_cases(200, 0)
    shape = all(len(m) <= 6 and 1 <= len(c) <= 3 for m, c in cases)
    rep, dt = timed(check_receive, 200, 0)
    record("C8", rep.ok and shape and dt < LIMITS["receive"],
           f"{rep.checked} cases ({rep.notes['blocked']} blocked), {rep.failures} disagreements, "
           f"{dt:.1f}s < {LIMITS['receive']}s")


@pytest.mark.parametrize("which", ["pisubst", "erlsubst"])
def test_c9_substitution(which):
    fn = check_pisubst if which == "pisubst" else check_erlsubst
    rep, dt = timed(fn, 500, 0)
    record(f"C9[{which}]", rep.ok and rep.checked == 500,
           f"{rep.checked} instances, {rep.failures} failures, {dt:.1f}s {rep.first or ''}")


def test_c10_determinism(tmp_path):
    pib = tmp_path / "h.pib"
    pib.write_text("new a in b<a>.b(x).x<a>.0 | b(y).y<c>.0 ; { b -> (2, []) }\n")
    other = tmp_path / "k.pib"
    other.write_text("new a in b<a>.0 | b(y).y<c>.0 ; { b -> (2, []) }\n")
    prog = tmp_path / "s.go"
    prog.write_text(GO_PROGRAMS["select"])
    commands = [
        ["parse", str(pib)],
        ["step", str(pib), "--json"],
        ["trace", str(pib), "tau", "tau", "--json"],
        ["lts", str(pib), "--max-states", "200"],
        ["bisim", str(pib), str(other)],
        ["encode", str(pib)],
        ["lts", str(prog)],
        ["check", "engine", "--cases", "30", "--seed", "7"],
        ["check", "receive", "--cases", "30", "--seed", "7", "--json"],
    ]
    diffs = []
    for cmd in commands:
        runs = [subprocess.run([sys.executable, "-m", "buffpi", *cmd], capture_output=True) for _ in range(2)]
        if runs[0].stdout != runs[1].stdout or runs[0].returncode != runs[1].returncode or not runs[0].stdout:
            diffs.append(" ".join(cmd[:1]))
    record("C10", not diffs, f"{len(commands)} commands rerun, differing: {diffs or 'none'}")
