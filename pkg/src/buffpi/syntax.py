"""Terms of the buffered pi-calculus, buffer stores and name hygiene.

Prefixes carry tuples of names so that the same term language serves the
monadic calculus (arity 1), the polyadic target of the pair encoding
(arity 2) and the tuple-passing agents produced by the Go and Erlang
encodings.  Every node is an immutable, hashable dataclass.

A prefix may carry a *mark*: ``""`` (plain), ``"*"`` (simulating step) or a
name ``v`` meaning "simulating when the received object is ``v``".  Marks are
metadata for the encodings and are ignored by the transition rules.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields
from typing import Iterable, Union

Name = str
INF = math.inf

_IDENT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*'*(![io])?|[0-9]+|'[A-Za-z0-9_]*')$")


def is_name(token: str) -> bool:
    return bool(_IDENT.match(token))


def fresh(base: str, avoid: Iterable[str]) -> str:
    """Return ``base`` if unused, else ``base_k`` for the smallest free ``k``."""
    avoid = set(avoid)
    base = base.strip("'") or "n"
    if not base[0].isalpha() and base[0] != "_":
        base = "n" + base
    base = base.split("!")[0].rstrip("'")
    if base not in avoid:
        return base
    k = 1
    while True:
        cand = f"{base}_{k}"
        if cand not in avoid:
            return cand
        k += 1


# ---------------------------------------------------------------- prefixes


@dataclass(frozen=True, slots=True)
class In:
    subject: Name
    binders: tuple[Name, ...] = ()
    mark: str = ""


@dataclass(frozen=True, slots=True)
class Out:
    subject: Name
    objects: tuple[Name, ...] = ()
    mark: str = ""


@dataclass(frozen=True, slots=True)
class Tau:
    mark: str = ""


Prefix = Union[In, Out, Tau]


def inp(subject: Name, *binders: Name, mark: str = "") -> In:
    return In(subject, tuple(binders), mark)


def out(subject: Name, *objects: Name, mark: str = "") -> Out:
    return Out(subject, tuple(objects), mark)


# --------------------------------------------------------------- processes


def _cached_hash(cls):
    """Memoize the structural hash of a frozen node (terms are deep trees)."""
    names = tuple(f.name for f in fields(cls) if f.compare)

    def __hash__(self):
        h = self._h
        if h is None:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_cached_hash
@dataclass(frozen=True, slots=True)
class Choice:
    branches: tuple[tuple[Prefix, "Process"], ...] = ()
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


@_cached_hash
@dataclass(frozen=True, slots=True)
class Par:
    left: "Process"
    right: "Process"
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


@_cached_hash
@dataclass(frozen=True, slots=True)
class New:
    name: Name
    body: "Process"
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


@_cached_hash
@dataclass(frozen=True, slots=True)
class NewBuf:
    name: Name
    capacity: float
    body: "Process"
    mark: str = ""
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (self.capacity == INF or (int(self.capacity) == self.capacity and self.capacity > 0)):
            raise ValueError(f"buffer capacity must be positive, got {self.capacity}")


@_cached_hash
@dataclass(frozen=True, slots=True)
class Repl:
    body: "Process"
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


@_cached_hash
@dataclass(frozen=True, slots=True)
class IfEq:
    """Name match ``if x = y then P else Q``, used by the Erlang encoding."""

    left: Name
    right: Name
    then: "Process"
    orelse: "Process"
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


@_cached_hash
@dataclass(frozen=True, slots=True)
class Agent:
    """Buffer agent ``F[n; L; b1, b2]`` of the polyadic pair encoding."""

    capacity: float
    contents: tuple[tuple[Name, Name], ...]
    b1: Name
    b2: Name
    _h: int | None = field(default=None, init=False, compare=False, repr=False)
    _fn: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _an: frozenset | None = field(default=None, init=False, compare=False, repr=False)
    _fs: tuple | None = field(default=None, init=False, compare=False, repr=False)
    _k: dict | None = field(default=None, init=False, compare=False, repr=False)


Process = Union[Choice, Par, New, NewBuf, Repl, IfEq, Agent]


NIL = Choice(())


def prefixed(pre: Prefix, cont: Process = NIL) -> Choice:
    return Choice(((pre, cont),))


def par(*procs: Process) -> Process:
    procs = [p for p in procs if p != NIL]
    if not procs:
        return NIL
    acc = procs[-1]
    for p in reversed(procs[:-1]):
        acc = Par(p, acc)
    return acc


def news(names: Iterable[Name], body: Process) -> Process:
    for n in reversed(list(names)):
        body = New(n, body)
    return body


def choice(*branches: Choice) -> Choice:
    out_branches = []
    for b in branches:
        out_branches.extend(b.branches)
    return Choice(tuple(out_branches))


# ------------------------------------------------------------ buffer store


@dataclass(frozen=True, slots=True)
class Entry:
    name: Name
    local: bool = False


@dataclass(frozen=True, slots=True)
class Buffer:
    capacity: float
    queue: tuple[Entry, ...] = ()

    def full(self) -> bool:
        return len(self.queue) >= self.capacity


@dataclass(frozen=True)
class BufferStore:
    """Partial map from buffered names to bounded FIFO queues."""

    entries: tuple[tuple[Name, Buffer], ...] = ()

    def __post_init__(self):
        for name, buf in self.entries:
            if len(buf.queue) > buf.capacity:
                raise ValueError(f"queue of {name} exceeds its capacity")
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda kv: kv[0])))

    @classmethod
    def of(cls, mapping: dict) -> "BufferStore":
        items = []
        for name, spec in mapping.items():
            cap, queue = (spec.capacity, spec.queue) if isinstance(spec, Buffer) else spec
            q = tuple(e if isinstance(e, Entry) else Entry(e) for e in queue)
            items.append((name, Buffer(cap, q)))
        return cls(tuple(items))

    def __contains__(self, name: Name) -> bool:
        return any(n == name for n, _ in self.entries)

    def __getitem__(self, name: Name) -> Buffer:
        for n, b in self.entries:
            if n == name:
                return b
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.entries)

    def domain(self) -> set[Name]:
        return {n for n, _ in self.entries}

    def set(self, name: Name, buf: Buffer) -> "BufferStore":
        rest = tuple((n, b) for n, b in self.entries if n != name)
        return BufferStore(rest + ((name, buf),))

    def local_names(self) -> set[Name]:
        return {e.name for _, b in self.entries for e in b.queue if e.local}

    def global_names(self) -> set[Name]:
        return {e.name for _, b in self.entries for e in b.queue if not e.local}


EMPTY_STORE = BufferStore()


def store_substitute(store: BufferStore, new: Entry, old: Entry) -> BufferStore:
    """Replace every queue entry equal to ``old`` by ``new``.

    ``store_substitute(B, Entry(c), Entry(c, True))`` is ``B{c/νc}`` and the
    converse call is ``B{νc/c}``.
    """
    items = []
    for n, b in store.entries:
        items.append((n, Buffer(b.capacity, tuple(new if e == old else e for e in b.queue))))
    return BufferStore(tuple(items))


@dataclass(frozen=True)
class Config:
    process: Process
    store: BufferStore = EMPTY_STORE
    # rendering memo filled in by canonicalization; not part of the value
    text: str | None = field(default=None, compare=False, repr=False)


# ----------------------------------------------------------- name functions


def prefix_names(pre: Prefix) -> set[Name]:
    match pre:
        case In(s, bs):
            return {s, *bs}
        case Out(s, os):
            return {s, *os}
    return set()


def _slot_memo(fn, slot: str):
    """Cache ``fn(p)`` as a frozenset in a spare slot of the (immutable) node."""

    def wrapper(p):
        res = getattr(p, slot)
        if res is None:
            res = frozenset(fn(p))
            object.__setattr__(p, slot, res)
            if slot == "_fn":
                object.__setattr__(p, "_fs", tuple(sorted(res)))
        return res

    wrapper.__name__ = fn.__name__.lstrip("_")
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _free_names(p: Process) -> set[Name]:
    """Names not bound by any input or restriction (the global names)."""
    match p:
        case Choice(branches):
            acc: set[Name] = set()
            for pre, cont in branches:
                inner = free_names(cont)
                if isinstance(pre, In):
                    inner -= set(pre.binders)
                    acc.add(pre.subject)
                elif isinstance(pre, Out):
                    acc.add(pre.subject)
                    acc.update(pre.objects)
                acc |= inner
            return acc
        case Par(l, r):
            return free_names(l) | free_names(r)
        case New(n, body) | NewBuf(n, _, body):
            return free_names(body) - {n}
        case Repl(body):
            return free_names(body)
        case IfEq(x, y, a, b):
            return {x, y} | free_names(a) | free_names(b)
        case Agent(_, contents, i, o):
            return {i, o} | {n for pair in contents for n in pair}
    raise TypeError(p)


free_names = _slot_memo(_free_names, "_fn")


def local_names(p: Process) -> set[Name]:
    """Names introduced by a restriction anywhere in ``p``."""
    match p:
        case Choice(branches):
            return set().union(*(local_names(c) for _, c in branches)) if branches else set()
        case Par(l, r):
            return local_names(l) | local_names(r)
        case New(n, body) | NewBuf(n, _, body):
            return {n} | local_names(body)
        case Repl(body):
            return local_names(body)
        case IfEq(_, _, a, b):
            return local_names(a) | local_names(b)
        case Agent():
            return set()
    raise TypeError(p)


def _all_names(p: Process) -> set[Name]:
    match p:
        case Choice(branches):
            acc: set[Name] = set()
            for pre, c in branches:
                acc |= prefix_names(pre) | all_names(c)
            return acc
        case Par(l, r):
            return all_names(l) | all_names(r)
        case New(n, body) | NewBuf(n, _, body):
            return {n} | all_names(body)
        case Repl(body):
            return all_names(body)
        case IfEq(x, y, a, b):
            return {x, y} | all_names(a) | all_names(b)
        case Agent():
            return free_names(p)
    raise TypeError(p)


all_names = _slot_memo(_all_names, "_an")


def config_free_names(c: Config) -> set[Name]:
    """Free names of the process plus global store names and global keys."""
    fn = free_names(c.process) | c.store.global_names()
    top = set(top_restricted(c.process))
    fn |= {k for k in c.store.domain() if k not in top}
    return fn


def top_restricted(p: Process) -> list[Name]:
    """Names restricted at the outermost (unguarded) level, in pre-order."""
    acc: list[Name] = []

    def walk(q):
        match q:
            case New(n, body):
                acc.append(n)
                walk(body)
            case Par(l, r):
                walk(l)
                walk(r)

    walk(p)
    return acc


def is_marked(p: Process) -> bool:
    match p:
        case Choice(branches):
            return any(pre.mark or is_marked(c) for pre, c in branches)
        case Par(l, r):
            return is_marked(l) or is_marked(r)
        case New(_, body) | Repl(body):
            return is_marked(body)
        case NewBuf(_, _, body, mark):
            return bool(mark) or is_marked(body)
        case IfEq(_, _, a, b):
            return is_marked(a) or is_marked(b)
    return False


# ------------------------------------------------------------- substitution


def _rename_binders(names: tuple[Name, ...], sub: dict, avoid: set) -> tuple[tuple[Name, ...], dict]:
    """Drop shadowed keys and rename binders that would capture."""
    sub = {k: v for k, v in sub.items() if k not in names}
    hits = set(sub.values())
    fresh_names = []
    for n in names:
        if n in hits:
            nn = fresh(n, avoid | hits | set(names) | set(fresh_names))
            avoid = avoid | {nn}
            sub[n] = nn
            fresh_names.append(nn)
        else:
            fresh_names.append(n)
    return tuple(fresh_names), sub


def subst(p: Process, sub: dict[Name, Name]) -> Process:
    """Simultaneous capture-avoiding substitution of free names."""
    if not sub:
        return p

    def r(n):
        return sub.get(n, n)

    match p:
        case Choice(branches):
            out_b = []
            for pre, cont in branches:
                match pre:
                    case In(s, bs, m):
                        avoid = all_names(cont) | set(sub.values())
                        nbs, inner = _rename_binders(bs, sub, avoid)
                        out_b.append((In(r(s), nbs, m), subst(cont, inner)))
                    case Out(s, os, m):
                        out_b.append((Out(r(s), tuple(r(o) for o in os), m), subst(cont, sub)))
                    case Tau():
                        out_b.append((pre, subst(cont, sub)))
            return Choice(tuple(out_b))
        case Par(left, right):
            return Par(subst(left, sub), subst(right, sub))
        case New(n, body):
            (nn,), inner = _rename_binders((n,), sub, all_names(body) | set(sub.values()))
            return New(nn, subst(body, inner))
        case NewBuf(n, cap, body, m):
            (nn,), inner = _rename_binders((n,), sub, all_names(body) | set(sub.values()))
            return NewBuf(nn, cap, subst(body, inner), m)
        case Repl(body):
            return Repl(subst(body, sub))
        case IfEq(x, y, a, b):
            return IfEq(r(x), r(y), subst(a, sub), subst(b, sub))
        case Agent(cap, contents, i, o):
            return Agent(cap, tuple((r(a), r(b)) for a, b in contents), r(i), r(o))
    raise TypeError(p)


def substitute(p: Process, replacement: Name, target: Name) -> Process:
    """``p{replacement/target}`` re-canonicalized."""
    from .canon import canonical_process

    return canonical_process(subst(p, {target: replacement}))


def prefix_size(p: Process) -> int:
    match p:
        case Choice(branches):
            return sum(1 + prefix_size(c) for _, c in branches)
        case Par(l, r):
            return prefix_size(l) + prefix_size(r)
        case New(_, b) | NewBuf(_, _, b) | Repl(b):
            return prefix_size(b)
        case IfEq(_, _, a, b):
            return prefix_size(a) + prefix_size(b)
    return 0


__all__ = [
    "Name", "INF", "In", "Out", "Tau", "Prefix", "Choice", "Par", "New", "NewBuf", "Repl", "IfEq",
    "Agent", "Process", "NIL", "Entry", "Buffer", "BufferStore", "EMPTY_STORE", "Config",
    "inp", "out", "prefixed", "par", "news", "choice", "fresh", "is_name", "free_names",
    "local_names", "all_names", "config_free_names", "top_restricted", "subst", "substitute",
    "store_substitute", "is_marked", "prefix_size",
]
