import json

import pytest
from click.testing import CliRunner

from buffpi.cli import main, run_repl
from buffpi.parser import parse_config
from buffpi.canon import canonicalize
from buffpi.suites import ERL_PROGRAMS, GO_PROGRAMS

HANDSHAKE = "b<a>.0 | b(x).x<c>.0 ; { b -> (1, []) }\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_parse_prints_canonical_form(files):
    r = run("parse", files("h.pib", HANDSHAKE))
    assert r.exit_code == 0
    assert r.output == "b(_1)._1<c>.0 | b<a>.0 ; { b -> (1, []) }\n"


def test_parse_error_exits_2(files):
    r = run("parse", files("bad.pib", "b<.0"))
    assert r.exit_code == 2 and "1:3" in r.output


def test_missing_file_exits_2():
    assert run("parse", "/nonexistent/x.pib").exit_code == 2


def test_step_numbers_successors(files):
    r = run("step", files("h.pib", HANDSHAKE))
    assert r.exit_code == 0
    assert r.output.splitlines()[-1] == "[4] --tau--> b(_1)._1<c>.0 ; { b -> (1, [a]) }"


def test_trace_json_and_no_match(files):
    f = files("h.pib", HANDSHAKE)
    r = run("trace", f, "tau", "tau", "--json")
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert [s["action"]["kind"] for s in data["steps"]] == ["tau", "tau"]
    assert data["steps"][-1]["target"] == "a<c>.0"
    assert run("trace", f, "out q *").exit_code == 1


def test_lts_bound_exits_3(files):
    f = files("h.pib", HANDSHAKE)
    assert run("lts", f, "--max-states", "3").exit_code == 3
    r = run("lts", f)
    assert r.exit_code == 0 and r.output.startswith("64 states")


def test_bisim_verdicts(files):
    a = files("a.pib", HANDSHAKE)
    b = files("b.pib", HANDSHAKE.replace("(1,", "(2,"))
    assert run("bisim", a, a).exit_code == 0
    r = run("bisim", a, b)
    assert r.exit_code == 1 and "witness" in r.output


def test_bisim_go_programs(files):
    h = files("h.go", GO_PROGRAMS["handshake"])
    d = files("d.go", "chan c = make(chan int, 0)\nfunc main(x, y) { c <- 5 }\n")
    assert run("bisim", h, d).exit_code == 0


def test_encode_each_language(files):
    assert run("encode", files("h.pib", HANDSHAKE)).output == "b!i(_1,_2)._2<c,c>.0 | b!o<a,a>.0 | F[1; ; b!i, b!o]\n"
    assert run("encode", files("h.go", GO_PROGRAMS["relay"])).exit_code == 0
    assert run("encode", files("p.erl", ERL_PROGRAMS["apply"][0])).exit_code == 0


def test_check_suite_exit_codes():
    r = run("check", "golden")
    assert r.exit_code == 0 and r.output.startswith("golden: 9 checked, 0 failures")
    assert run("check", "nope").exit_code == 2
    assert run("check", "golden", "--pairs", "3").exit_code == 2
    r = run("check", "receive", "--cases", "5", "--json")
    assert json.loads(r.output)["checked"] == 5


def test_repl_script_undo_and_log(tmp_path):
    cfg = canonicalize(parse_config(HANDSHAKE))
    log = tmp_path / "log.txt"
    out = []
    trace = run_repl(cfg, commands=iter(["4", "undo", "4", "1", "quit"]), log_path=str(log), out=out.append)
    assert [str(t.action) for t in trace] == ["tau", "tau"]
    assert log.read_text().split() == ["4", "undo", "4", "1", "quit"]
    replay = run_repl(cfg, commands=iter(log.read_text().splitlines()), out=[].append)
    assert [t.target for t in replay] == [t.target for t in trace]
