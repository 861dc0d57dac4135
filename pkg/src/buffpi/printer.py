"""Pretty printer emitting the exact surface grammar accepted by the parsers."""

from __future__ import annotations

from .syntax import (
    INF, Agent, BufferStore, Choice, Config, IfEq, In, New, NewBuf, Out, Par, Process, Repl, Tau,
)


def _cap(c) -> str:
    return "inf" if c == INF else str(int(c))


def show_prefix(pre) -> str:
    mark = ""
    if pre.mark == "*":
        mark = "*"
    elif pre.mark:
        mark = "*" + pre.mark
    match pre:
        case In(s, bs):
            return f"{s}({','.join(bs)}){mark}"
        case Out(s, os):
            return f"{s}<{','.join(os)}>{mark}"
        case Tau():
            return "tau" + mark
    raise TypeError(pre)


def _flatten_par(p):
    if isinstance(p, Par):
        return _flatten_par(p.left) + _flatten_par(p.right)
    return [p]


def _is_atom(p: Process) -> bool:
    """True when ``p`` can follow a prefix dot without parentheses."""
    match p:
        case Choice(branches):
            return len(branches) <= 1
        case Repl(body):
            return _is_atom(body)
        case Agent():
            return True
    return False


def _cont(p: Process) -> str:
    return show(p) if _is_atom(p) else f"({show(p)})"


def _component(p: Process) -> str:
    match p:
        case Choice(branches) if len(branches) > 1:
            return show(p)
        case Par() | New() | NewBuf() | IfEq():
            return f"({show(p)})"
    return show(p)


def show(p: Process) -> str:
    match p:
        case Choice(()):
            return "0"
        case Choice(branches):
            return " + ".join(f"{show_prefix(pre)}.{_cont(c)}" for pre, c in branches)
        case Par():
            return " | ".join(_component(q) for q in _flatten_par(p))
        case New():
            names = []
            while isinstance(p, New):
                names.append(p.name)
                p = p.body
            return f"new {', '.join(names)} in {show(p)}"
        case NewBuf(n, cap, body, mark):
            m = "*" if mark else ""
            return f"new {n}:{_cap(cap)}{m} in {show(body)}"
        case Repl(body):
            return "!" + _cont(body)
        case IfEq(x, y, a, b):
            return f"if {x} = {y} then {_cont(a)} else {_cont(b)}"
        case Agent(cap, contents, i, o):
            pairs = ", ".join(f"({a},{b})" for a, b in contents)
            return f"F[{_cap(cap)}; {pairs}; {i}, {o}]"
    raise TypeError(p)


def show_store(store: BufferStore) -> str:
    if not store.entries:
        return "{}"
    items = []
    for name, buf in store.entries:
        q = ", ".join(f"(new {e.name})" if e.local else e.name for e in buf.queue)
        items.append(f"{name} -> ({_cap(buf.capacity)}, [{q}])")
    return "{ " + ", ".join(items) + " }"


def show_config(c: Config) -> str:
    if c.text is not None:
        return c.text
    return f"{show(c.process)} ; {show_store(c.store)}"


def store_json(store: BufferStore) -> list:
    return [
        {
            "name": name,
            "cap": "inf" if buf.capacity == INF else int(buf.capacity),
            "queue": [{"name": e.name, "local": e.local} for e in buf.queue],
        }
        for name, buf in store.entries
    ]
