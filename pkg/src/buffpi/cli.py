"""Command line: ``buffpi <command> ...``.

Exit codes: 0 success or positive verdict, 1 negative verdict or failed
check, 2 usage or parse error, 3 exploration bound exhausted.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import erlang, go
from .canon import canonicalize
from .equivalence import Bisimilar, BoundedOnly, NotBisimilar, strong_bisim, weak_bisim
from .errors import BuffpiError, NoMatch, ParseError, UnknownSuite
from .parser import parse_config, parse_erl, parse_go, parse_process, show_erl_program, show_go_program
from .polyadic import encode_config, poly_lts, poly_successors
from .printer import show, show_config
from .semantics import reachable_lts, run_trace, successors, trace_json

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3
LANGS = ("pib", "poly", "go", "erl")
_SUFFIX = {".pib": "pib", ".pi": "pib", ".poly": "poly", ".go": "go", ".erl": "erl"}


class Source:
    """A parsed input: its language, the object and its canonical text."""

    def __init__(self, lang: str, obj, text: str):
        self.lang, self.obj, self.text = lang, obj, text


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _lang(path: str, lang: str | None) -> str:
    if lang:
        return lang
    return _SUFFIX.get(Path(path).suffix, "pib")


def _load(path: str, lang: str | None, store: str | None = None) -> Source:
    lang = _lang(path, lang)
    text = _read(path)
    if lang == "pib":
        cfg = canonicalize(parse_config(text, _read(store) if store else None))
        return Source(lang, cfg, show_config(cfg))
    if lang == "poly":
        p = canonicalize(parse_config(text)).process
        return Source(lang, p, show(p))
    if lang == "go":
        g = parse_go(text)
        return Source(lang, g, go.show_go(g))
    g = parse_erl(text)
    return Source(lang, g, erlang.show_erl(g))


def _env(env: str | None) -> tuple:
    return tuple(sorted({n.strip() for n in env.split(",") if n.strip()})) if env else ()


def _emit(data, as_json: bool, lines) -> None:
    if as_json:
        click.echo(json.dumps(data, ensure_ascii=False, indent=2))
    else:
        for line in lines:
            click.echo(line)


def _successors(src: Source, env, repl_unfold):
    """``(label text, target text)`` pairs plus the raw targets."""
    if src.lang == "pib":
        ts = successors(src.obj, env, repl_unfold)
        return [(str(t.action), show_config(t.target), t.target, t.action) for t in ts]
    if src.lang == "poly":
        return [(str(a), show(p), p, a) for a, p in poly_successors(src.obj, env)]
    if src.lang == "go":
        return [(str(a), go.show_go(g), g, a) for a, g in go.go_global_successors(src.obj, env)]
    return [(str(a), erlang.show_erl(g), g, a) for a, g in erlang.erl_global_successors(src.obj, env)]


def _lts(src: Source, env, max_states, max_depth, repl_unfold):
    if src.lang == "pib":
        return reachable_lts(src.obj, max_states, max_depth, repl_unfold, env)
    if src.lang == "poly":
        return poly_lts(src.obj, env, max_states, max_depth)
    if src.lang == "go":
        return go.go_lts(src.obj, env or go.go_env(src.obj), max_states, max_depth)
    return erlang.erl_lts(src.obj, env or erlang.erl_env(src.obj), max_states, max_depth)


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ParseError as e:
            click.echo(f"parse error: {e}", err=True)
            ctx.exit(EXIT_USAGE)
        except (UnknownSuite, FileNotFoundError) as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_USAGE)
        except BuffpiError as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_NEGATIVE)


_lang_opt = click.option("--lang", type=click.Choice(LANGS), default=None,
                         help="Input language (default: from the file suffix, else pib).")
_store_opt = click.option("--store", "store", type=click.Path(dir_okay=False), default=None,
                          help="File holding a buffer-store literal.")
_env_opt = click.option("--env", default=None, help="Comma-separated input instantiation pool.")
_json_opt = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
_bounds = [
    click.option("--max-states", default=10_000, show_default=True, type=int),
    click.option("--max-depth", default=None, type=int),
    click.option("--repl-unfold", default=3, show_default=True, type=int),
]


def _with_bounds(fn):
    for opt in reversed(_bounds):
        fn = opt(fn)
    return fn


@click.group(cls=_Group)
def main():
    """Workbench for the buffered pi-calculus and its Go/Erlang encodings."""


@main.command("parse")
@click.argument("file")
@_lang_opt
@_store_opt
@_json_opt
def cmd_parse(file, lang, store, as_json):
    """Parse FILE and print its canonical form."""
    src = _load(file, lang, store)
    if src.lang == "go":
        text = show_go_program(src.obj)
    elif src.lang == "erl":
        text = show_erl_program(dict(src.obj.funcs))
    else:
        text = src.text
    _emit({"lang": src.lang, "text": text}, as_json, [text.rstrip("\n")])


@main.command("step")
@click.argument("file")
@_lang_opt
@_store_opt
@_env_opt
@click.option("--repl-unfold", default=3, show_default=True, type=int)
@_json_opt
def cmd_step(file, lang, store, env, repl_unfold, as_json):
    """List the numbered successors of FILE."""
    src = _load(file, lang, store)
    succ = _successors(src, _env(env), repl_unfold)
    data = [{"index": i, "action": a, "target": t} for i, (a, t, _, _) in enumerate(succ)]
    _emit(data, as_json, [f"[{i}] --{a}--> {t}" for i, (a, t, _, _) in enumerate(succ)])


@main.command("trace")
@click.argument("file")
@click.argument("patterns", nargs=-1)
@_store_opt
@_env_opt
@click.option("--script", type=click.Path(dir_okay=False), default=None,
              help="File with one action pattern per line.")
@_json_opt
def cmd_trace(file, patterns, store, env, script, as_json):
    """Follow action PATTERNS (``tau``, ``in c d``, ``out c *`` ...) from FILE."""
    src = _load(file, "pib", store)
    pats = list(patterns)
    if script:
        pats += [ln.strip() for ln in _read(script).splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        trace = run_trace(src.obj, pats, _env(env))
    except NoMatch as e:
        click.echo(f"no transition matches pattern #{e.index}: {e.pattern}", err=True)
        sys.exit(EXIT_NEGATIVE)
    lines = [src.text] + [f"--{t.action}--> {show_config(t.target)}" for t in trace]
    _emit(trace_json(src.obj, trace), as_json, lines)


@main.command("lts")
@click.argument("file")
@_lang_opt
@_store_opt
@_env_opt
@_with_bounds
@_json_opt
def cmd_lts(file, lang, store, env, max_states, max_depth, repl_unfold, as_json):
    """Explore the reachable state space of FILE."""
    src = _load(file, lang, store)
    lts = _lts(src, _env(env), max_states, max_depth, repl_unfold)
    data = {
        "states": [str(s) for s in lts.states],
        "edges": [[s, str(lab), t] for s, lab, t in lts.edges],
        "truncated": sorted(lts.truncated),
    }
    lines = [f"{lts.size} states, {len(lts.edges)} edges, {len(lts.truncated)} truncated"]
    lines += [f"s{i}: {s}" for i, s in enumerate(lts.states)]
    lines += [f"s{s} --{lab}--> s{t}" for s, lab, t in lts.edges]
    _emit(data, as_json, lines)
    if lts.truncated:
        sys.exit(EXIT_BOUND)


@main.command("bisim")
@click.argument("left")
@click.argument("right")
@_lang_opt
@click.option("--weak", is_flag=True, help="Weak instead of strong bisimilarity.")
@_env_opt
@_with_bounds
@_json_opt
def cmd_bisim(left, right, lang, weak, env, max_states, max_depth, repl_unfold, as_json):
    """Decide whether LEFT and RIGHT are bisimilar (bounded)."""
    a, b = _load(left, lang), _load(right, lang)
    if a.lang != b.lang:
        raise click.UsageError("both inputs must be in the same language")
    names = set(_env(env))
    if a.lang == "pib":
        from .syntax import config_free_names

        names |= config_free_names(a.obj) | config_free_names(b.obj)
    elif a.lang == "go":
        names |= set(go.go_env(a.obj, b.obj))
    elif a.lang == "erl":
        names |= set(erlang.erl_env(a.obj)) | set(erlang.erl_env(b.obj))
    env_t = tuple(sorted(names))
    la = _lts(a, env_t, max_states, max_depth, repl_unfold)
    lb = _lts(b, env_t, max_states, max_depth, repl_unfold)
    v = (weak_bisim if weak or a.lang in ("go", "erl") else strong_bisim)(la, lb)
    if isinstance(v, Bisimilar):
        data, code, lines = {"verdict": "bisimilar"}, EXIT_OK, ["bisimilar"]
    elif isinstance(v, NotBisimilar):
        word = [str(x) for x in v.witness]
        data, code = {"verdict": "distinct", "witness": word}, EXIT_NEGATIVE
        lines = ["not bisimilar", "witness: " + " ".join(word)]
    else:
        data, code, lines = {"verdict": "bounded", "depth": v.depth}, EXIT_BOUND, [f"bounded at depth {v.depth}"]
    _emit(data, as_json, lines)
    sys.exit(code)


@main.command("encode")
@click.argument("file")
@_lang_opt
@_store_opt
@_json_opt
def cmd_encode(file, lang, store, as_json):
    """Translate FILE: pib to polyadic, go and erl to pib."""
    src = _load(file, lang, store)
    if src.lang == "pib":
        text = show(encode_config(src.obj))
    elif src.lang == "go":
        text = show_config(go.encode_go_global(src.obj))
    elif src.lang == "erl":
        text = show_config(erlang.encode_erl_global(src.obj))
    else:
        raise click.UsageError("polyadic terms are already an encoding target")
    _emit({"from": src.lang, "text": text}, as_json, [text])


@main.command("check")
@click.argument("suite")
@click.option("--max-size", type=int, default=None, help="Corpus prefix bound (validity, correspondence, abstraction).")
@click.option("--pairs", type=int, default=None, help="Random pairs (abstraction).")
@click.option("--cases", type=int, default=None, help="Random instances (receive, pisubst, erlsubst, engine).")
@click.option("--seed", type=int, default=None)
@_json_opt
def cmd_check(suite, max_size, pairs, cases, seed, as_json):
    """Run a named check SUITE and report pass/fail counts."""
    from .suites import SUITES, run_suite

    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; known: {', '.join(SUITES)}")
    import inspect

    accepted = inspect.signature(SUITES[suite]).parameters
    given = {"max_size": max_size, "pairs": pairs, "cases": cases, "seed": seed}
    params = {k: v for k, v in given.items() if v is not None and k in accepted}
    ignored = sorted(k for k, v in given.items() if v is not None and k not in accepted)
    if ignored:
        raise click.UsageError(f"suite {suite} does not take {', '.join('--' + k.replace('_', '-') for k in ignored)}")
    report = run_suite(suite, **params)
    _emit(report.to_json(), as_json, report.lines())
    sys.exit(EXIT_OK if report.ok else EXIT_NEGATIVE)


REPL_HELP = "commands: <index> | undo | store | show | save FILE | help | quit"


@main.command("repl")
@click.argument("file")
@_store_opt
@_env_opt
@click.option("--repl-unfold", default=3, show_default=True, type=int)
@click.option("--script", type=click.Path(dir_okay=False), default=None,
              help="Read commands from this file instead of stdin.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Append every accepted command to this file (replayable with --script).")
def cmd_repl(file, store, env, repl_unfold, script, log_path):
    """Step through FILE interactively by choosing successor indices."""
    src = _load(file, "pib", store)
    lines = iter(_read(script).splitlines()) if script else None
    run_repl(src.obj, _env(env), repl_unfold, lines, log_path)


def run_repl(cfg, env=(), repl_unfold=3, commands=None, log_path=None, out=click.echo) -> list:
    """The stepping loop; ``commands`` is an iterator of lines (default: stdin).
    Returns the trace taken."""
    history = [cfg]
    trace = []
    log = open(log_path, "a", encoding="utf-8") if log_path else None

    def read():
        if commands is not None:
            return next(commands, None)
        try:
            return input("> ")
        except EOFError:
            return None

    def accepted(cmd):
        if log:
            log.write(cmd + "\n")

    try:
        while True:
            current = history[-1]
            ts = successors(current, env, repl_unfold)
            out(f"state {len(trace)}: {show_config(current)}")
            for i, t in enumerate(ts):
                out(f"  [{i}] --{t.action}--> {show_config(t.target)}")
            line = read()
            if line is None:
                break
            cmd = line.strip()
            if not cmd or cmd.startswith("#"):
                continue
            if cmd in ("quit", "exit"):
                accepted(cmd)
                break
            if cmd == "help":
                out(REPL_HELP)
            elif cmd == "undo":
                if trace:
                    history.pop()
                    trace.pop()
                    accepted(cmd)
                else:
                    out("nothing to undo")
            elif cmd == "store":
                from .printer import show_store

                out(show_store(current.store))
            elif cmd == "show":
                out(show_config(current))
            elif cmd.startswith("save "):
                path = cmd[5:].strip()
                Path(path).write_text(json.dumps(trace_json(history[0], trace), ensure_ascii=False, indent=2) + "\n",
                                      encoding="utf-8")
                accepted(cmd)
                out(f"saved {len(trace)} steps to {path}")
            elif cmd.isdigit() and int(cmd) < len(ts):
                t = ts[int(cmd)]
                trace.append(t)
                history.append(t.target)
                accepted(cmd)
            else:
                out(f"unrecognised input {cmd!r}; {REPL_HELP}")
    finally:
        if log:
            log.close()
    return trace


if __name__ == "__main__":
    main()
