"""A core of Go: channels, goroutines and select.

Values are names: integer literals print as digits, channels as identifiers.
A program is a table of parameter-only functions plus a channel store; the
running state is a multiset of routines ``(statement, local store)``.

Encoding into buffered pi follows a continuation style: every expression
returns its value on a result name ``r``, every statement signals completion
on ``r``, variables become small store agents and functions replicated
inputs.  Prefixes standing for a source step carry the mark ``*``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .canon import canonicalize, check_validity
from .errors import InvalidStore, UnknownVar, UnsupportedFeature
from .lts import Lts, explore
from .semantics import TAU, Action, reachable_lts
from .simulation import admits_step
from .syntax import (
    NIL, Buffer, BufferStore, Choice, Config, Entry, In, New, NewBuf, Out, Par, Process, Repl, Tau, fresh,
    news, par, prefixed,
)

# ------------------------------------------------------------------- syntax


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class ChanLit:
    name: str


@dataclass(frozen=True)
class Make:
    elem: str
    size: int


@dataclass(frozen=True)
class Recv:
    chan: "GoExpr"


GoExpr = Var | IntLit | ChanLit | Make | Recv


@dataclass(frozen=True)
class Assign:
    var: str
    expr: GoExpr


@dataclass(frozen=True)
class Send:
    chan: GoExpr
    value: GoExpr


@dataclass(frozen=True)
class Seq:
    first: "GoStmt"
    second: "GoStmt"


@dataclass(frozen=True)
class GoCall:
    func: str
    args: tuple = ()


@dataclass(frozen=True)
class RecvCase:
    var: str
    chan: GoExpr
    body: "GoStmt"


@dataclass(frozen=True)
class SendCase:
    chan: GoExpr
    value: GoExpr
    body: "GoStmt"


@dataclass(frozen=True)
class Select:
    clauses: tuple = ()


@dataclass(frozen=True)
class Nil:
    pass


GoStmt = Assign | Send | Seq | GoCall | Select | Nil
NIL_STMT = Nil()


def seq(*stmts: GoStmt) -> GoStmt:
    acc = stmts[-1]
    for s in reversed(stmts[:-1]):
        acc = Seq(s, acc)
    return acc


def is_value(e) -> bool:
    return isinstance(e, (IntLit, ChanLit))


def value_name(e) -> str:
    return str(e.value) if isinstance(e, IntLit) else e.name


def lit(v: str) -> GoExpr:
    return IntLit(int(v)) if v.isdigit() else ChanLit(v)


# ------------------------------------------------------------------ printing


def show_expr(e: GoExpr) -> str:
    match e:
        case Var(x):
            return x
        case IntLit(n):
            return str(n)
        case ChanLit(c):
            return c
        case Make(t, n):
            return f"make(chan {t}, {n})"
        case Recv(c):
            return f"<-{show_expr(c)}"
    raise TypeError(e)


def show_stmt(s: GoStmt) -> str:
    match s:
        case Nil():
            return "nil"
        case Assign(x, e):
            return f"{x} = {show_expr(e)}"
        case Send(c, v):
            return f"{show_expr(c)} <- {show_expr(v)}"
        case Seq(a, b):
            return f"{show_stmt(a)}; {show_stmt(b)}"
        case GoCall(f, args):
            return f"go {f}({', '.join(show_expr(a) for a in args)})"
        case Select(clauses):
            return "select { " + " ".join(_show_case(c) for c in clauses) + " }" if clauses else "select { }"
    raise TypeError(s)


def _show_case(c) -> str:
    match c:
        case RecvCase(x, ch, body):
            return f"case {x} = <-{show_expr(ch)}: {show_stmt(body)}"
        case SendCase(ch, v, body):
            return f"case {show_expr(ch)} <- {show_expr(v)}: {show_stmt(body)}"
    raise TypeError(c)


# ------------------------------------------------------------------- stores


@dataclass(frozen=True)
class Chan:
    capacity: int
    queue: tuple = ()
    gtag: int = 0


# a channel the program never created belongs to the environment
ENV_CHAN = Chan(0, (), 1)


@dataclass(frozen=True)
class Func:
    params: tuple
    body: GoStmt


@dataclass(frozen=True)
class Routine:
    stmt: GoStmt
    store: tuple = ()  # sorted (var, value) pairs

    def lookup(self, x: str) -> str:
        for k, v in self.store:
            if k == x:
                return v
        raise UnknownVar(x)


def _sigma(mapping) -> tuple:
    return tuple(sorted(dict(mapping).items()))


@dataclass(frozen=True)
class GoConfig:
    routines: tuple
    channels: tuple = ()  # sorted (name, Chan)
    funcs: tuple = ()  # sorted (name, Func)
    key: str = field(default="", compare=False, repr=False)

    @classmethod
    def make(cls, routines, channels=(), funcs=()) -> "GoConfig":
        rs = tuple(sorted(routines, key=show_routine))
        cs = tuple(sorted(dict(channels).items()))
        fs = tuple(sorted(dict(funcs).items()))
        g = cls(rs, cs, fs)
        object.__setattr__(g, "key", show_go(g))
        return g

    def chan(self, ch: str) -> Chan:
        return dict(self.channels).get(ch, ENV_CHAN)

    def func(self, f: str) -> Func:
        fs = dict(self.funcs)
        if f not in fs:
            raise UnknownVar(f"function {f}")
        return fs[f]


def show_routine(r: Routine) -> str:
    sigma = ", ".join(f"{k} = {v}" for k, v in r.store)
    return f"<{show_stmt(r.stmt)} | {sigma}>"


def show_go(g: GoConfig) -> str:
    rs = " ".join(show_routine(r) for r in g.routines)
    cs = ", ".join(f"{k} -> ({c.capacity}, [{', '.join(c.queue)}], {c.gtag})" for k, c in g.channels)
    return f"{rs} ; {{{cs}}}"


def program(funcs: dict, channels: dict | None = None, main: str = "main") -> GoConfig:
    """The initial configuration: ``main`` runs with every parameter bound to
    ``0``; ``channels`` lists the global channels and their capacities."""
    chans = {c: Chan(n, (), 1) for c, n in (channels or {}).items()}
    fs = {f: fn if isinstance(fn, Func) else Func(*fn) for f, fn in funcs.items()}
    start = fs[main]
    return GoConfig.make([Routine(start.body, _sigma({x: "0" for x in start.params}))], chans, fs)


# ---------------------------------------------------------------- semantics


@dataclass(frozen=True)
class GoAction:
    """``tau``, ``r`` (receive), ``s`` (send), ``snu`` (send exporting a
    private channel) or the routine-local ``g`` (spawn request)."""

    kind: str
    subject: str | None = None
    objects: tuple = ()

    def __str__(self) -> str:
        if self.kind == "tau":
            return "tau"
        if self.kind == "snu":
            return f"s({self.subject}, new {self.objects[0]})"
        return f"{self.kind}({', '.join((self.subject,) + self.objects)})"

    def to_pib(self) -> Action:
        match self.kind:
            case "tau":
                return TAU
            case "r":
                return Action("in", self.subject, self.objects)
            case "s":
                return Action("out", self.subject, self.objects)
            case "snu":
                return Action("bout", self.subject, self.objects, self.objects)
        raise ValueError(f"{self.kind} has no buffered-pi counterpart")


GO_TAU = GoAction("tau")


class _Chans:
    """Copy-on-write view of a channel store."""

    def __init__(self, chans: dict):
        self.data = chans

    def get(self, ch: str) -> Chan:
        return self.data.get(ch, ENV_CHAN)

    def set(self, ch: str, c: Chan) -> dict:
        return {**self.data, ch: c}


def _fresh_chan(chans: dict, avoid) -> str:
    return fresh("ch", set(chans) | set(avoid))


def go_expr_step(e: GoExpr, sigma, chans: dict, pool=(), avoid=()) -> list[tuple]:
    """One-step derivatives ``(action, e', chans')`` of an expression."""
    sig = dict(sigma)
    cs = _Chans(chans)
    match e:
        case Var(x):
            if x not in sig:
                raise UnknownVar(x)
            return [(GO_TAU, lit(sig[x]), chans)]
        case Make(_, n):
            ch = _fresh_chan(chans, avoid)
            return [(GO_TAU, ChanLit(ch), cs.set(ch, Chan(n, (), 0)))]
        case Recv(c):
            if not is_value(c):
                return [(a, Recv(c2), d) for a, c2, d in go_expr_step(c, sigma, chans, pool, avoid)]
            return [(a, lit(v), d) for a, v, d in _receive(value_name(c), cs, pool)]
    return []


def _receive(ch: str, cs: _Chans, pool) -> list[tuple]:
    c = cs.get(ch)
    if c.capacity == 0:
        return [(GoAction("r", ch, (v,)), v, cs.data) for v in pool]
    if c.queue:
        return [(GO_TAU, c.queue[0], cs.set(ch, replace(c, queue=c.queue[1:])))]
    return []


def _send(ch: str, v: str, cs: _Chans) -> list[tuple]:
    c = cs.get(ch)
    if c.capacity == 0:
        return [(GoAction("s", ch, (v,)), cs.data)]
    if len(c.queue) < c.capacity:
        return [(GO_TAU, cs.set(ch, replace(c, queue=c.queue + (v,))))]
    return []


def _first_open(exprs) -> int | None:
    return next((i for i, e in enumerate(exprs) if not is_value(e)), None)


def _case_exprs(clauses) -> list:
    acc = []
    for c in clauses:
        acc.extend([c.chan] if isinstance(c, RecvCase) else [c.chan, c.value])
    return acc


def _with_case_exprs(clauses, exprs) -> tuple:
    it = iter(exprs)
    out_c = []
    for c in clauses:
        if isinstance(c, RecvCase):
            out_c.append(RecvCase(c.var, next(it), c.body))
        else:
            out_c.append(SendCase(next(it), next(it), c.body))
    return tuple(out_c)


def go_local_step(s: GoStmt, sigma, chans: dict, pool=(), avoid=()) -> list[tuple]:
    """One-step derivatives ``(action, s', sigma', chans')`` of a statement."""
    cs = _Chans(chans)

    def under(e, rebuild):
        return [(a, rebuild(e2), sigma, d) for a, e2, d in go_expr_step(e, sigma, chans, pool, avoid)]

    match s:
        case Nil():
            return []
        case Assign(x, e):
            if x not in dict(sigma):
                raise UnknownVar(x)
            if is_value(e):
                return [(GO_TAU, NIL_STMT, _sigma({**dict(sigma), x: value_name(e)}), chans)]
            return under(e, lambda e2: Assign(x, e2))
        case Send(c, v):
            if not is_value(c):
                return under(c, lambda c2: Send(c2, v))
            if not is_value(v):
                return under(v, lambda v2: Send(c, v2))
            return [(a, NIL_STMT, sigma, d) for a, d in _send(value_name(c), value_name(v), cs)]
        case GoCall(f, args):
            i = _first_open(args)
            if i is not None:
                return under(args[i], lambda e2: GoCall(f, args[:i] + (e2,) + args[i + 1:]))
            return [(GoAction("g", f, tuple(value_name(a) for a in args)), NIL_STMT, sigma, chans)]
        case Select(clauses):
            exprs = _case_exprs(clauses)
            i = _first_open(exprs)
            if i is not None:
                return under(exprs[i], lambda e2: Select(_with_case_exprs(clauses, exprs[:i] + [e2] + exprs[i + 1:])))
            res = []
            for c in clauses:
                if isinstance(c, RecvCase):
                    for a, v, d in _receive(value_name(c.chan), cs, pool):
                        res.append((a, Seq(Assign(c.var, lit(v)), c.body), sigma, d))
                else:
                    for a, d in _send(value_name(c.chan), value_name(c.value), cs):
                        res.append((a, c.body, sigma, d))
            return res
        case Seq(first, second):
            if isinstance(first, Nil):
                return go_local_step(second, sigma, chans, pool, avoid)
            return [(a, Seq(f2, second), sg, d) for a, f2, sg, d in go_local_step(first, sigma, chans, pool, avoid)]
    raise TypeError(s)


# ------------------------------------------------------------ global level


def _expr_values(e, acc: set) -> None:
    match e:
        case IntLit() | ChanLit():
            acc.add(value_name(e))
        case Recv(c):
            _expr_values(c, acc)


def _stmt_values(s, acc: set) -> None:
    match s:
        case Assign(_, e):
            _expr_values(e, acc)
        case Send(c, v):
            _expr_values(c, acc)
            _expr_values(v, acc)
        case Seq(a, b):
            _stmt_values(a, acc)
            _stmt_values(b, acc)
        case GoCall(_, args):
            for a in args:
                _expr_values(a, acc)
        case Select(clauses):
            for e in _case_exprs(clauses):
                _expr_values(e, acc)
            for c in clauses:
                _stmt_values(c.body, acc)


def go_values(g: GoConfig) -> set:
    """Every value mentioned by the configuration (program text included)."""
    acc: set = set()
    for r in g.routines:
        _stmt_values(r.stmt, acc)
        acc.update(v for _, v in r.store)
    for ch, c in g.channels:
        acc.add(ch)
        acc.update(c.queue)
    for _, fn in g.funcs:
        _stmt_values(fn.body, acc)
    return acc


def local_channels(g: GoConfig) -> set:
    return {ch for ch, c in g.channels if c.gtag == 0}


def go_pool(g: GoConfig, env=()) -> list[str]:
    """Values the environment may send: known non-private values plus one fresh."""
    values = go_values(g)
    known = (values | set(env)) - local_channels(g)
    return sorted(known) + [fresh("z", values | set(env))]


def _rename_expr(e, ren):
    match e:
        case IntLit() | ChanLit():
            return lit(ren.get(value_name(e), value_name(e)))
        case Recv(c):
            return Recv(_rename_expr(c, ren))
    return e


def _rename_stmt(s, ren):
    match s:
        case Assign(x, e):
            return Assign(x, _rename_expr(e, ren))
        case Send(c, v):
            return Send(_rename_expr(c, ren), _rename_expr(v, ren))
        case Seq(a, b):
            return Seq(_rename_stmt(a, ren), _rename_stmt(b, ren))
        case GoCall(f, args):
            return GoCall(f, tuple(_rename_expr(a, ren) for a in args))
        case Select(clauses):
            cs = _with_case_exprs(clauses, [_rename_expr(e, ren) for e in _case_exprs(clauses)])
            return Select(tuple(replace(c, body=_rename_stmt(c.body, ren)) for c in cs))
    return s


def _export(routines, chans: dict, ch: str, avoid) -> tuple[str, list, dict]:
    """Make channel ``ch`` global under a fresh name ``n``, ``n_1``, ..."""
    new = fresh("n", avoid)
    ren = {ch: new}
    rs = [Routine(_rename_stmt(r.stmt, ren), _sigma({k: ren.get(v, v) for k, v in r.store})) for r in routines]
    cs = {}
    for k, c in chans.items():
        q = tuple(ren.get(v, v) for v in c.queue)
        cs[ren.get(k, k)] = Chan(c.capacity, q, 1 if k == ch else c.gtag)
    return new, rs, cs


def go_global_successors(g: GoConfig, env=()) -> list[tuple[GoAction, GoConfig]]:
    """All global transitions, sorted by label then target."""
    chans = dict(g.channels)
    pool = go_pool(g, env)
    avoid = go_values(g) | set(env) | set(pool)
    routines = list(g.routines)
    res = []

    def emit(action, rs, cs):
        res.append((action, GoConfig.make(rs, cs, g.funcs)))

    def send_out(ch, v, rs, cs):
        # a send to the environment; exporting a private channel renames it
        if v in cs and cs[v].gtag == 0:
            new, rs2, cs2 = _export(rs, cs, v, avoid)
            emit(GoAction("snu", ch, (new,)), rs2, cs2)
        else:
            emit(GoAction("s", ch, (v,)), rs, cs)

    sent = {}
    local = []
    for i, r in enumerate(routines):
        steps = go_local_step(r.stmt, r.store, chans, pool, avoid)
        local.append(steps)
        for a, s2, sg, cs in steps:
            if a.kind == "s":
                sent.setdefault(a.subject, set()).add(a.objects[0])
    extra = sorted({v for vs in sent.values() for v in vs} - set(pool))
    for i, r in enumerate(routines):
        if extra and any(a.kind == "r" for a, *_ in local[i]):
            local[i] = go_local_step(r.stmt, r.store, chans, pool + extra, avoid)

    for i, r in enumerate(routines):
        others = routines[:i] + routines[i + 1:]
        for a, s2, sg, cs in local[i]:
            me = Routine(s2, sg)
            match a.kind:
                case "tau":
                    emit(GO_TAU, others + [me], cs)
                case "g":
                    fn = g.func(a.subject)
                    if len(fn.params) != len(a.objects):
                        raise UnsupportedFeature(f"{a.subject} expects {len(fn.params)} arguments")
                    child = Routine(fn.body, _sigma(zip(fn.params, a.objects)))
                    emit(GO_TAU, others + [me, child], cs)
                case "r":
                    ch, v = a.subject, a.objects[0]
                    c = _Chans(chans).get(ch)
                    if c.gtag == 1 and v in pool:
                        emit(a, others + [me], cs)
                    for j, other in enumerate(routines):
                        if j == i:
                            continue
                        for b, t2, tg, cs2 in local[j]:
                            if b.kind == "s" and b.subject == ch and b.objects == (v,):
                                rest = [x for k, x in enumerate(routines) if k not in (i, j)]
                                emit(GO_TAU, rest + [me, Routine(t2, tg)], cs)
                case "s":
                    ch, v = a.subject, a.objects[0]
                    if _Chans(chans).get(ch).gtag == 1:
                        send_out(ch, v, others + [me], cs)

    for ch, c in g.channels:
        if c.gtag != 1 or c.capacity == 0:
            continue
        if len(c.queue) < c.capacity:
            for v in pool:
                emit(GoAction("r", ch, (v,)), routines, {**chans, ch: replace(c, queue=c.queue + (v,))})
        if c.queue:
            send_out(ch, c.queue[0], routines, {**chans, ch: replace(c, queue=c.queue[1:])})

    uniq = {(a, t.key): (a, t) for a, t in res}
    return sorted(uniq.values(), key=lambda at: (str(at[0]), at[1].key))


def go_lts(g: GoConfig, env=(), max_states: int = 10_000, max_depth=None) -> Lts:
    """Reachable global configurations, labels translated to buffered-pi actions."""
    env = tuple(env)

    def expand(state, depth):
        return [(a.to_pib(), t, None) for a, t in go_global_successors(state, env)], False

    return explore(g, expand, lambda s: s.key, max_states, max_depth)


# ----------------------------------------------------------------- encoding


class _Names:
    def __init__(self, avoid):
        self.used = set(avoid)

    def __call__(self, base: str) -> str:
        n = fresh(base, self.used)
        self.used.add(n)
        return n


def _expr_names(e, acc: set) -> None:
    match e:
        case Var(x):
            acc.add(x)
        case IntLit() | ChanLit():
            acc.add(value_name(e))
        case Recv(c):
            _expr_names(c, acc)


def _stmt_names(s, acc: set) -> None:
    match s:
        case Assign(x, e):
            acc.add(x)
            _expr_names(e, acc)
        case Send(c, v):
            _expr_names(c, acc)
            _expr_names(v, acc)
        case Seq(a, b):
            _stmt_names(a, acc)
            _stmt_names(b, acc)
        case GoCall(f, args):
            acc.add(f)
            for a in args:
                _expr_names(a, acc)
        case Select(clauses):
            for e in _case_exprs(clauses):
                _expr_names(e, acc)
            for c in clauses:
                if isinstance(c, RecvCase):
                    acc.add(c.var)
                _stmt_names(c.body, acc)


def var_agent(x: str, v: str, fresh_name=None) -> Process:
    """``Var(x, v)``: a cell holding ``v`` that serves reads and writes on ``x``."""
    nm = fresh_name or _Names({x, v})
    t, z, g, p, y = nm("t"), nm("z"), nm("g"), nm("p"), nm("y")
    serve = prefixed(In(x, (g, p)), Par(prefixed(In(p, (y,)), prefixed(Out(t, (y,)))),
                                         prefixed(Out(g, (z,)), prefixed(Out(t, (z,))))))
    return New(t, Par(prefixed(Out(t, (v,))), Repl(prefixed(In(t, (z,)), serve))))


def _lr(exprs, r: str, nm: _Names) -> Process:
    """Evaluate ``exprs`` left to right and send their values on ``r``."""
    open_ = [i for i, e in enumerate(exprs) if not is_value(e)]
    if not open_:
        return prefixed(Out(r, tuple(value_name(e) for e in exprs)))
    results = {i: nm("v") for i in open_}
    rs = [nm("r") for _ in open_]
    ts = [None] + [nm("t") for _ in open_[1:]]
    comps = [_enc_expr(exprs[open_[0]], rs[0], nm)]
    for k in range(1, len(open_)):
        comps.append(prefixed(In(ts[k]), _enc_expr(exprs[open_[k]], rs[k], nm)))
    final = prefixed(Out(r, tuple(results[i] if i in results else value_name(e) for i, e in enumerate(exprs))))
    chain = final
    for k in reversed(range(len(open_))):
        chain = prefixed(In(rs[k], (results[open_[k]],)), chain)
        if k > 0:
            chain = prefixed(Out(ts[k]), chain)
    names = [rs[0]] + [n for k in range(1, len(open_)) for n in (ts[k], rs[k])]
    return news(names, par(*comps, chain))


def _enc_expr(e: GoExpr, r: str, nm: _Names) -> Process:
    match e:
        case IntLit() | ChanLit():
            return prefixed(Out(r, (value_name(e),)))
        case Var(x):
            g, p, z = nm("g"), nm("p"), nm("z")
            return news([g, p], prefixed(Out(x, (g, p)), prefixed(In(g, (z,), "*"), prefixed(Out(r, (z,))))))
        case Recv(c):
            r1, y, z = nm("r"), nm("y"), nm("z")
            return New(r1, Par(_enc_expr(c, r1, nm),
                               prefixed(In(r1, (y,)), prefixed(In(y, (z,), "*"), prefixed(Out(r, (z,)))))))
        case Make(_, 0):
            a = nm("a")
            return prefixed(Tau("*"), New(a, prefixed(Out(r, (a,)))))
        case Make(_, n):
            b = nm("b")
            return NewBuf(b, n, prefixed(Out(r, (b,))), "*")
    raise UnsupportedFeature(type(e).__name__)


def _enc_stmt(s: GoStmt, r: str, nm: _Names) -> Process:
    match s:
        case Nil():
            return prefixed(Out(r))
        case Assign(x, e):
            r1, z, g, p = nm("r"), nm("z"), nm("g"), nm("p")
            write = news([g, p], prefixed(Out(x, (g, p)), prefixed(Out(p, (z,), "*"), prefixed(Out(r)))))
            return New(r1, Par(_enc_expr(e, r1, nm), prefixed(In(r1, (z,)), write)))
        case Send(c, v):
            r1, y, z = nm("r"), nm("y"), nm("z")
            body = prefixed(In(r1, (y, z)), prefixed(Out(y, (z,), "*"), prefixed(Out(r))))
            return New(r1, Par(_lr([c, v], r1, nm), body))
        case Seq(a, b):
            r1 = nm("r")
            return New(r1, Par(_enc_stmt(a, r1, nm), prefixed(In(r1), _enc_stmt(b, r, nm))))
        case GoCall(f, args):
            r1 = nm("r")
            ys = tuple(nm("y") for _ in args)
            body = prefixed(In(r1, ys), prefixed(Out(f, ys, "*"), prefixed(Out(r))))
            return New(r1, Par(_lr(list(args), r1, nm), body))
        case Select(clauses):
            exprs = _case_exprs(clauses)
            r1 = nm("r")
            ys = tuple(nm("y") for _ in exprs)
            branches = []
            k = 0
            for c in clauses:
                if isinstance(c, RecvCase):
                    v = nm("v")
                    cont = _enc_stmt(Seq(Assign(c.var, ChanLit(v)), c.body), r, nm)
                    branches.append((In(ys[k], (v,), "*"), cont))
                    k += 1
                else:
                    branches.append((Out(ys[k], (ys[k + 1],), "*"), _enc_stmt(c.body, r, nm)))
                    k += 2
            return New(r1, Par(_lr(exprs, r1, nm), prefixed(In(r1, ys), Choice(tuple(branches)))))
    raise UnsupportedFeature(type(s).__name__)


def encode_go_expr(e: GoExpr, r: str = "r") -> Process:
    acc = {r}
    _expr_names(e, acc)
    return _enc_expr(e, r, _Names(acc))


def encode_go_stmt(s: GoStmt, r: str = "r") -> Process:
    acc = {r}
    _stmt_names(s, acc)
    return _enc_stmt(s, r, _Names(acc))


def _function(f: str, fn: Func, nm: _Names) -> Process:
    zs = tuple(nm("z") for _ in fn.params)
    r1 = nm("r")
    cells = [var_agent(x, z, nm) for x, z in zip(fn.params, zs)]
    body = news(fn.params, par(*cells, New(r1, _enc_stmt(fn.body, r1, nm))))
    return Repl(prefixed(In(f, zs), body))


def _routine(rt: Routine, nm: _Names) -> Process:
    r = nm("r")
    cells = [var_agent(x, v, nm) for x, v in rt.store]
    return news([x for x, _ in rt.store], par(New(r, _enc_stmt(rt.stmt, r, nm)), *cells))


def _check_scopes(g: GoConfig) -> None:
    funcs = {f for f, _ in g.funcs}
    values = go_values(g)
    for f, fn in g.funcs:
        clash = set(fn.params) & (funcs | values)
        if clash:
            raise UnsupportedFeature(f"parameter names {sorted(clash)} of {f} clash with functions or channels")
    for r in g.routines:
        clash = {x for x, _ in r.store} & (funcs | values)
        if clash:
            raise UnsupportedFeature(f"variables {sorted(clash)} clash with functions or channels")


def encode_go_global(g: GoConfig) -> Config:
    """The buffered-pi configuration of a global Go configuration.

    Private channels and function names are restricted; the store keeps the
    buffered channels with private channel entries marked local, and drops
    unbuffered channels and visibility tags."""
    _check_scopes(g)
    acc = go_values(g) | {f for f, _ in g.funcs}
    for r in g.routines:
        _stmt_names(r.stmt, acc)
        acc.update(x for x, _ in r.store)
    for _, fn in g.funcs:
        _stmt_names(fn.body, acc)
        acc.update(fn.params)
    nm = _Names(acc)
    comps = [_routine(rt, nm) for rt in g.routines] + [_function(f, fn, nm) for f, fn in g.funcs]
    private = local_channels(g)
    store = {}
    for ch, c in g.channels:
        if c.capacity > 0:
            store[ch] = Buffer(c.capacity, tuple(Entry(v, v in private) for v in c.queue))
    restricted = sorted(private) + [f for f, _ in g.funcs]
    cfg = Config(news(restricted, par(*comps)), BufferStore.of(store))
    if not check_validity(cfg):
        raise InvalidStore("derived buffer store is not valid")
    return canonicalize(cfg)


# ------------------------------------------------------------------ checks


@dataclass(frozen=True)
class StepFailure:
    source: str
    action: str
    target: str


def go_env(*gs: GoConfig) -> list[str]:
    """Shared instantiation pool base for comparing configurations."""
    acc = set()
    for g in gs:
        acc |= go_values(g) - local_channels(g)
    return sorted(acc)


def simulation_failures(g: GoConfig, env=(), max_states: int = 200) -> list[StepFailure]:
    """Global steps of ``g`` (up to ``max_states`` configurations) whose
    encoding does not admit preparing moves, one matching step and preparing
    moves into the class of the target's encoding."""
    lts = go_lts(g, env, max_states)
    env = tuple(env) if env else tuple(go_env(g))
    encoded = {}

    def enc(state):
        if state.key not in encoded:
            encoded[state.key] = encode_go_global(state)
        return encoded[state.key]

    bad = []
    forms: dict = {}
    for s, lab, t in lts.edges:
        src, tgt = lts.payload[s], lts.payload[t]
        penv = tuple(sorted(set(env) | set(go_pool(src, env)[:-1])))
        if not admits_step(enc(src), lab, enc(tgt), penv, cache=forms.setdefault(penv, {})):
            bad.append(StepFailure(src.key, str(lab), tgt.key))
    return bad


def abstraction_verdicts(g1: GoConfig, g2: GoConfig, max_states: int = 20_000) -> tuple:
    """Weak bisimilarity of two Go configurations and of their encodings."""
    from .equivalence import weak_bisim

    env = go_env(g1, g2)
    src = weak_bisim(go_lts(g1, env, max_states), go_lts(g2, env, max_states))
    e1, e2 = encode_go_global(g1), encode_go_global(g2)
    tgt = weak_bisim(reachable_lts(e1, max_states, repl_unfold=None, env=env),
                     reachable_lts(e2, max_states, repl_unfold=None, env=env))
    return src, tgt


__all__ = [
    "Var", "IntLit", "ChanLit", "Make", "Recv", "Assign", "Send", "Seq", "GoCall", "RecvCase", "SendCase",
    "Select", "Nil", "NIL_STMT", "seq", "is_value", "value_name", "lit", "show_expr", "show_stmt", "Chan",
    "Func", "Routine", "GoConfig", "show_go", "program", "GoAction", "GO_TAU", "go_expr_step", "go_local_step",
    "go_values", "go_pool", "local_channels", "go_global_successors", "go_lts", "var_agent", "encode_go_expr",
    "encode_go_stmt", "encode_go_global", "StepFailure", "go_env", "simulation_failures",
    "abstraction_verdicts",
]
