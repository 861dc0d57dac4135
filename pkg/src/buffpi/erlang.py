"""A core of Erlang: processes, mailboxes and selective receive.

Values are names: integers print as digits, atoms in single quotes and
process ids as identifiers.  A running program is a set of processes
``(id, expression, mailbox, tag)``; the tag tells whether the environment
knows the id.  Guards may use the primitives ``eq`` and ``lt``.

The encoding into buffered pi gives each process a mailbox chain: a line of
unbounded buffers joined by copy agents, fed through the id and drained at
the current output port.  Every completed receive appends one buffer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .canon import _split, canonicalize, check_validity
from .errors import GuardDiverged, GuardNonBoolean, InvalidStore, UnknownVar, UnsupportedFeature
from .lts import Lts, explore
from .semantics import TAU, Action, step
from .simulation import admits_step, preparing_normal_form
from .syntax import (
    INF, NIL, Buffer, BufferStore, Choice, Config, Entry, IfEq, In, New, NewBuf, Out, Par, Process, Repl, Tau,
    fresh, news, par, prefixed, subst,
)

TRUE = "'true'"
FALSE = "'false'"
GUARD_BOUND = 1000

# ------------------------------------------------------------------- syntax


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Atom:
    name: str  # without quotes


@dataclass(frozen=True)
class Pid:
    id: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Let:
    var: str
    bound: "ErlExpr"
    body: "ErlExpr"


@dataclass(frozen=True)
class Apply:
    fn: str
    args: tuple = ()


@dataclass(frozen=True)
class Spawn:
    fn: str
    args: tuple = ()


@dataclass(frozen=True)
class Send:
    target: "ErlExpr"
    message: "ErlExpr"


@dataclass(frozen=True)
class Clause:
    var: str
    guard: "ErlExpr"
    body: "ErlExpr"


@dataclass(frozen=True)
class Receive:
    clauses: tuple = ()


@dataclass(frozen=True)
class Prim:
    """Guard builtin: ``eq`` (name equality) or ``lt`` (integer order)."""

    op: str
    args: tuple = ()


ErlExpr = IntLit | Atom | Pid | Var | Let | Apply | Spawn | Send | Receive | Prim
PRIMS = ("eq", "lt")


def is_value(e) -> bool:
    return isinstance(e, (IntLit, Atom, Pid))


def value_name(e) -> str:
    match e:
        case IntLit(n):
            return str(n)
        case Atom(a):
            return f"'{a}'"
        case Pid(i):
            return i
    raise TypeError(e)


def lit(v: str) -> ErlExpr:
    if v.isdigit():
        return IntLit(int(v))
    if v.startswith("'"):
        return Atom(v.strip("'"))
    return Pid(v)


def is_int(v: str) -> bool:
    return v.isdigit()


# ------------------------------------------------------------------ printing


def show_expr(e: ErlExpr) -> str:
    match e:
        case IntLit() | Atom() | Pid():
            return value_name(e)
        case Var(x):
            return x
        case Let(x, a, b):
            return f"let {x} = {show_expr(a)} in {show_expr(b)}"
        case Apply(f, args):
            return f"apply {f}({', '.join(show_expr(a) for a in args)})"
        case Spawn(f, args):
            return f"spawn {f} [{', '.join(show_expr(a) for a in args)}]"
        case Send(a, b):
            return f"{_operand(a)} ! {_operand(b)}"
        case Receive(cs):
            body = "; ".join(f"{c.var} when {show_expr(c.guard)} -> {show_expr(c.body)}" for c in cs)
            return f"receive {body} end"
        case Prim(op, args):
            return f"{op}({', '.join(show_expr(a) for a in args)})"
    raise TypeError(e)


def _operand(e) -> str:
    return f"({show_expr(e)})" if isinstance(e, (Send, Let)) else show_expr(e)


# ------------------------------------------------------------- substitution


def subst_expr(e: ErlExpr, sub: dict) -> ErlExpr:
    """Replace free variables by values (``sub`` maps names to value names)."""
    if not sub:
        return e
    match e:
        case Var(x):
            return lit(sub[x]) if x in sub else e
        case IntLit() | Atom() | Pid():
            return e
        case Let(x, a, b):
            inner = {k: v for k, v in sub.items() if k != x}
            return Let(x, subst_expr(a, sub), subst_expr(b, inner))
        case Apply(f, args):
            return Apply(f, tuple(subst_expr(a, sub) for a in args))
        case Spawn(f, args):
            return Spawn(f, tuple(subst_expr(a, sub) for a in args))
        case Send(a, b):
            return Send(subst_expr(a, sub), subst_expr(b, sub))
        case Receive(cs):
            out_c = []
            for c in cs:
                inner = {k: v for k, v in sub.items() if k != c.var}
                out_c.append(Clause(c.var, subst_expr(c.guard, inner), subst_expr(c.body, inner)))
            return Receive(tuple(out_c))
        case Prim(op, args):
            return Prim(op, tuple(subst_expr(a, sub) for a in args))
    raise TypeError(e)


def rename_values(e: ErlExpr, ren: dict) -> ErlExpr:
    """Rename value names (used when a process id is exported)."""
    match e:
        case IntLit() | Atom() | Pid():
            v = value_name(e)
            return lit(ren[v]) if v in ren else e
        case Var():
            return e
        case Let(x, a, b):
            return Let(x, rename_values(a, ren), rename_values(b, ren))
        case Apply(f, args):
            return Apply(f, tuple(rename_values(a, ren) for a in args))
        case Spawn(f, args):
            return Spawn(f, tuple(rename_values(a, ren) for a in args))
        case Send(a, b):
            return Send(rename_values(a, ren), rename_values(b, ren))
        case Receive(cs):
            return Receive(tuple(Clause(c.var, rename_values(c.guard, ren), rename_values(c.body, ren)) for c in cs))
        case Prim(op, args):
            return Prim(op, tuple(rename_values(a, ren) for a in args))
    raise TypeError(e)


def expr_values(e: ErlExpr, acc: set) -> set:
    match e:
        case IntLit() | Atom() | Pid():
            acc.add(value_name(e))
        case Var():
            pass
        case Let(_, a, b) | Send(a, b):
            expr_values(a, acc)
            expr_values(b, acc)
        case Apply(_, args) | Spawn(_, args) | Prim(_, args):
            for a in args:
                expr_values(a, acc)
        case Receive(cs):
            for c in cs:
                expr_values(c.guard, acc)
                expr_values(c.body, acc)
    return acc


def expr_names(e: ErlExpr, acc: set) -> set:
    """Values, variables and function names occurring in ``e``."""
    match e:
        case IntLit() | Atom() | Pid():
            acc.add(value_name(e))
        case Var(x):
            acc.add(x)
        case Let(x, a, b):
            acc.add(x)
            expr_names(a, acc)
            expr_names(b, acc)
        case Send(a, b):
            expr_names(a, acc)
            expr_names(b, acc)
        case Apply(f, args) | Spawn(f, args):
            acc.add(f)
            for a in args:
                expr_names(a, acc)
        case Prim(_, args):
            for a in args:
                expr_names(a, acc)
        case Receive(cs):
            for c in cs:
                acc.add(c.var)
                expr_names(c.guard, acc)
                expr_names(c.body, acc)
    return acc


# ------------------------------------------------------------------- state


@dataclass(frozen=True)
class ErlFunc:
    params: tuple
    body: ErlExpr


@dataclass(frozen=True)
class ErlProc:
    """One process.  ``depth`` counts completed receives; it only fixes the
    length of the mailbox chain in the encoding."""

    id: str
    expr: ErlExpr
    mailbox: tuple = ()
    gtag: int = 0
    depth: int = 0


def show_proc(p: ErlProc) -> str:
    return f"<{p.id}: {show_expr(p.expr)} | [{', '.join(p.mailbox)}], {p.gtag}>"


@dataclass(frozen=True)
class ErlConfig:
    procs: tuple  # sorted by id
    funcs: tuple = ()  # sorted (name, ErlFunc)
    key: str = field(default="", compare=False, repr=False)

    @classmethod
    def make(cls, procs, funcs=()) -> "ErlConfig":
        ps = tuple(sorted(procs, key=lambda p: p.id))
        fs = tuple(sorted(dict(funcs).items()))
        g = cls(ps, fs)
        object.__setattr__(g, "key", show_erl(g))
        return g

    def ids(self) -> set:
        return {p.id for p in self.procs}

    def proc(self, pid: str) -> ErlProc:
        for p in self.procs:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def func(self, f: str) -> ErlFunc:
        fs = dict(self.funcs)
        if f not in fs:
            raise UnknownVar(f"function {f}")
        return fs[f]


def show_erl(g: ErlConfig) -> str:
    return " ".join(show_proc(p) for p in g.procs) + " ; depth " + ",".join(str(p.depth) for p in g.procs)


def erl_program(funcs: dict, args=(), start: str = "start", accessible: bool = False) -> ErlConfig:
    """The initial configuration: one process running ``start`` on ``args``."""
    fs = {f: fn if isinstance(fn, ErlFunc) else ErlFunc(*fn) for f, fn in funcs.items()}
    fn = fs[start]
    if len(fn.params) != len(args):
        raise UnsupportedFeature(f"{start} expects {len(fn.params)} arguments")
    known = set(args)
    for f in fs.values():
        expr_values(f.body, known)
    pid = fresh("id", known)
    body = subst_expr(fn.body, dict(zip(fn.params, args)))
    return ErlConfig.make([ErlProc(pid, body, (), int(accessible))], fs)


def erl_values(g: ErlConfig) -> set:
    acc = set()
    for p in g.procs:
        acc.add(p.id)
        acc.update(p.mailbox)
        expr_values(p.expr, acc)
    for _, fn in g.funcs:
        expr_values(fn.body, acc)
    return acc


def hidden_ids(g: ErlConfig) -> set:
    return {p.id for p in g.procs if p.gtag == 0}


def erl_pool(g: ErlConfig, env=()) -> list[str]:
    """Values the environment may send: known non-private values plus one fresh."""
    values = erl_values(g)
    known = (values | set(env)) - hidden_ids(g)
    return sorted(known) + [fresh("z", values | set(env))]


# --------------------------------------------------------------- semantics


@dataclass(frozen=True)
class ErlAction:
    """Local kinds ``tau``, ``rcv`` (a silent receive), ``sd`` and ``sp``;
    global kinds ``tau``, ``s``, ``snu`` (send exporting a hidden id) and ``r``."""

    kind: str
    subject: str | None = None
    objects: tuple = ()

    def __str__(self) -> str:
        if self.kind in ("tau", "rcv"):
            return self.kind
        if self.kind == "snu":
            return f"s({self.subject}, new {self.objects[0]})"
        return f"{self.kind}({', '.join((self.subject,) + self.objects)})"

    def to_pib(self) -> Action:
        match self.kind:
            case "tau" | "rcv":
                return TAU
            case "r":
                return Action("in", self.subject, self.objects)
            case "s":
                return Action("out", self.subject, self.objects)
            case "snu":
                return Action("bout", self.subject, self.objects, self.objects)
        raise ValueError(f"{self.kind} has no buffered-pi counterpart")


ERL_TAU = ErlAction("tau")


def _prim(op: str, vs: tuple) -> str:
    if op == "eq":
        return TRUE if vs[0] == vs[1] else FALSE
    if op == "lt":
        ok = is_int(vs[0]) and is_int(vs[1]) and int(vs[0]) < int(vs[1])
        return TRUE if ok else FALSE
    raise UnsupportedFeature(f"primitive {op}")


def _args_step(args: tuple, rebuild, mbox, pid, funcs, avoid) -> list[tuple]:
    res = []
    for i, a in enumerate(args):
        if not is_value(a):
            for act, a2, m2 in erl_local_step(a, mbox, pid, funcs, avoid):
                res.append((act, rebuild(args[:i] + (a2,) + args[i + 1:]), m2))
    return res


def erl_local_step(e: ErlExpr, mbox: tuple, pid: str, funcs: dict, avoid=()) -> list[tuple]:
    """One-step derivatives ``(action, e', mbox')`` of process ``pid``.

    Argument positions step in every order.  A receive is one silent step
    (kind ``rcv``) whose guards are evaluated to completion beforehand.
    """
    match e:
        case IntLit() | Atom() | Pid():
            return []
        case Var(x):
            raise UnknownVar(x)
        case Let(x, a, b):
            if is_value(a):
                return [(ERL_TAU, subst_expr(b, {x: value_name(a)}), mbox)]
            return [(act, Let(x, a2, b), m2) for act, a2, m2 in erl_local_step(a, mbox, pid, funcs, avoid)]
        case Apply(f, args):
            if all(is_value(a) for a in args):
                fn = _lookup(funcs, f, len(args))
                return [(ERL_TAU, subst_expr(fn.body, dict(zip(fn.params, map(value_name, args)))), mbox)]
            return _args_step(args, lambda xs: Apply(f, xs), mbox, pid, funcs, avoid)
        case Spawn(f, args):
            if all(is_value(a) for a in args):
                _lookup(funcs, f, len(args))
                new = fresh("id", avoid)
                return [(ErlAction("sp", new, (f,) + tuple(map(value_name, args))), Pid(new), mbox)]
            return _args_step(args, lambda xs: Spawn(f, xs), mbox, pid, funcs, avoid)
        case Send(a, b):
            if is_value(a) and is_value(b):
                return [(ErlAction("sd", value_name(a), (value_name(b),)), b, mbox)]
            res = []
            if not is_value(a):
                res += [(act, Send(a2, b), m2) for act, a2, m2 in erl_local_step(a, mbox, pid, funcs, avoid)]
            if not is_value(b):
                res += [(act, Send(a, b2), m2) for act, b2, m2 in erl_local_step(b, mbox, pid, funcs, avoid)]
            return res
        case Prim(op, args):
            if all(is_value(a) for a in args):
                if len(args) != 2:
                    raise UnsupportedFeature(f"{op} takes two arguments")
                return [(ERL_TAU, lit(_prim(op, tuple(map(value_name, args)))), mbox)]
            return _args_step(args, lambda xs: Prim(op, xs), mbox, pid, funcs, avoid)
        case Receive(clauses):
            hit = rcv_choice(mbox, clauses, pid, funcs)
            if hit is None:
                return []
            i, k = hit
            c = clauses[i]
            body = subst_expr(c.body, {c.var: mbox[k]})
            return [(ErlAction("rcv"), body, mbox[:k] + mbox[k + 1:])]
    raise TypeError(e)


def _lookup(funcs: dict, f: str, n: int) -> ErlFunc:
    if f not in funcs:
        raise UnknownVar(f"function {f}")
    fn = funcs[f]
    if len(fn.params) != n:
        raise UnsupportedFeature(f"{f} expects {len(fn.params)} arguments")
    return fn


def eval_guard(e: ErlExpr, mbox: tuple, pid: str, funcs: dict, bound: int = GUARD_BOUND) -> str:
    """Run a guard silently to a value and return its name."""
    for _ in range(bound):
        if is_value(e):
            if not isinstance(e, Atom):
                raise GuardNonBoolean(show_expr(e))
            return value_name(e)
        steps = erl_local_step(e, mbox, pid, funcs)
        if not steps:
            raise UnsupportedFeature(f"guard is stuck: {show_expr(e)}")
        act, e, m2 = steps[0]
        if act.kind != "tau" or m2 != mbox:
            raise UnsupportedFeature(f"guard has side effects: {act}")
    raise GuardDiverged(f"guard still running after {bound} steps")


def rcv_choice(mbox: tuple, clauses: tuple, pid: str = "", funcs=None, bound: int = GUARD_BOUND):
    """The premise of the receive rule: the first message (then the first
    clause) whose guard yields ``'true'``, every earlier trial yielding
    ``'false'``.  Returns zero-based ``(clause, message)`` or ``None``."""
    funcs = funcs or {}
    for k, v in enumerate(mbox):
        for i, c in enumerate(clauses):
            res = eval_guard(subst_expr(c.guard, {c.var: v}), mbox, pid, funcs, bound)
            if res == TRUE:
                return i, k
            if res != FALSE:
                return None  # the premise cannot be met past this trial
    return None


BLOCKED = "blocked"


def receive_oracle(mbox, clauses, guard_eval):
    """Brute-force reading of the receive algorithm: scan messages first to
    last and clauses left to right.  ``guard_eval(clause_index, message)``
    returns a truth value.  Returns one-based ``(clause, message)`` or
    ``BLOCKED``."""
    for k, v in enumerate(mbox, start=1):
        for i in range(1, len(clauses) + 1):
            if guard_eval(i - 1, v):
                return i, k
    return BLOCKED


# ------------------------------------------------------------ global level


def _export(procs: list, pid: str, avoid) -> tuple[str, list]:
    """Make the hidden id ``pid`` accessible under a fresh name ``n``, ``n_1``, ..."""
    new = fresh("n", avoid)
    ren = {pid: new}
    out_p = []
    for p in procs:
        out_p.append(ErlProc(ren.get(p.id, p.id), rename_values(p.expr, ren),
                             tuple(ren.get(v, v) for v in p.mailbox), 1 if p.id == pid else p.gtag, p.depth))
    return new, out_p


def erl_global_successors(g: ErlConfig, env=()) -> list[tuple[ErlAction, ErlConfig]]:
    """All global transitions, sorted by label then target."""
    funcs = dict(g.funcs)
    pool = erl_pool(g, env)
    avoid = erl_values(g) | set(env) | set(pool)
    ids = g.ids()
    procs = list(g.procs)
    res = []

    def emit(action, ps):
        res.append((action, ErlConfig.make(ps, g.funcs)))

    for i, p in enumerate(procs):
        others = procs[:i] + procs[i + 1:]
        for act, e2, m2 in erl_local_step(p.expr, p.mailbox, p.id, funcs, avoid):
            me = ErlProc(p.id, e2, m2, p.gtag, p.depth + (act.kind == "rcv"))
            match act.kind:
                case "tau" | "rcv":
                    emit(ERL_TAU, others + [me])
                case "sp":
                    fn = funcs[act.objects[0]]
                    body = subst_expr(fn.body, dict(zip(fn.params, act.objects[1:])))
                    emit(ERL_TAU, others + [me, ErlProc(act.subject, body)])
                case "sd":
                    to, v = act.subject, act.objects[0]
                    if to in ids:
                        ps = []
                        for q in others + [me]:
                            if q.id == to:
                                q = ErlProc(q.id, q.expr, q.mailbox + (v,), q.gtag, q.depth)
                            ps.append(q)
                        emit(ERL_TAU, ps)
                    elif v in ids and g.proc(v).gtag == 0:
                        new, ps = _export(others + [me], v, avoid)
                        emit(ErlAction("snu", to, (new,)), ps)
                    else:
                        emit(ErlAction("s", to, (v,)), others + [me])

    for i, p in enumerate(procs):
        if p.gtag == 1:
            others = procs[:i] + procs[i + 1:]
            for v in pool:
                emit(ErlAction("r", p.id, (v,)), others + [ErlProc(p.id, p.expr, p.mailbox + (v,), 1, p.depth)])

    uniq = {(a, t.key): (a, t) for a, t in res}
    return sorted(uniq.values(), key=lambda at: (str(at[0]), at[1].key))


def erl_lts(g: ErlConfig, env=(), max_states: int = 10_000, max_depth=None) -> Lts:
    """Reachable global configurations, labels translated to buffered-pi actions."""
    env = tuple(env)

    def expand(state, depth):
        return [(a.to_pib(), t, None) for a, t in erl_global_successors(state, env)], False

    return explore(g, expand, lambda s: s.key, max_states, max_depth)


# ----------------------------------------------------------------- encoding


class _Names:
    def __init__(self, avoid):
        self.used = set(avoid)

    def __call__(self, base: str) -> str:
        n = fresh(base, self.used)
        self.used.add(n)
        return n


def copier(c: str, b: str, nm) -> Process:
    """``Cp(c, b)``: forward everything arriving on ``c`` to ``b``, in order."""
    t, z = nm("t"), nm("z")
    loop = prefixed(In(t), prefixed(In(c, (z,)), prefixed(Out(b, (z,)), prefixed(Out(t)))))
    return New(t, Par(prefixed(Out(t)), Repl(loop)))


def _lt_table(x: str, y: str, r: str, universe) -> Process:
    """``r<'true'>`` when ``x < y`` over the integer ``universe``, else ``r<'false'>``."""
    no = prefixed(Out(r, (FALSE,)))
    acc = no
    for u in reversed(universe):
        smaller = [w for w in universe if int(w) < int(u)]
        inner = no
        for w in reversed(smaller):
            inner = IfEq(x, w, prefixed(Out(r, (TRUE,))), inner)
        acc = IfEq(y, u, inner, acc)
    return acc


class _Encoder:
    def __init__(self, nm: _Names, universe):
        self.nm = nm
        self.universe = sorted({u for u in universe if is_int(u)}, key=int)

    def expr(self, e: ErlExpr, a: str, p: str, r: str, guard: bool = False) -> Process:
        nm = self.nm
        mark = "" if guard else "*"
        match e:
            case IntLit() | Atom() | Pid():
                return prefixed(Out(r, (value_name(e),)))
            case Var(x):
                return prefixed(Out(r, (x,)))
            case Let(x, e1, e2):
                r1 = nm("r")
                return New(r1, Par(self.expr(e1, a, p, r1, guard),
                                   prefixed(In(r1, (x,), mark), self.expr(e2, a, p, r, guard))))
            case Apply(f, args):
                if guard:
                    raise UnsupportedFeature("function application inside a guard")
                rs, zs, comps = self._args(args, a, p)
                call = prefixed(Out(f, (a, p, r) + zs, "*"))
                return news(rs, par(*comps, _inputs(rs, zs, call)))
            case Spawn(f, args):
                if guard:
                    raise UnsupportedFeature("spawn inside a guard")
                rs, zs, comps = self._args(args, a, p)
                b2, a2, p2, r2 = nm("b"), nm("a"), nm("p"), nm("r")
                child = news([a2, p2, r2], par(copier(a2, b2, nm), prefixed(Out(p2, (b2,))),
                                              prefixed(Out(f, (a2, p2, r2) + zs, "*"), prefixed(Out(r, (a2,))))))
                return news(rs, par(*comps, _inputs(rs, zs, NewBuf(b2, INF, child))))
            case Send(e1, e2):
                if guard:
                    raise UnsupportedFeature("send inside a guard")
                r1, r2, y, z = nm("r"), nm("r"), nm("y"), nm("z")
                tail = prefixed(In(r1, (y,)), prefixed(In(r2, (z,)), prefixed(Out(y, (z,), "*"),
                                                                               prefixed(Out(r, (z,))))))
                return news([r1, r2], par(self.expr(e1, a, p, r1), self.expr(e2, a, p, r2), tail))
            case Prim(op, args):
                if op not in PRIMS or len(args) != 2:
                    raise UnsupportedFeature(f"primitive {op}/{len(args)}")
                r1, r2, x, y = nm("r"), nm("r"), nm("x"), nm("y")
                if op == "eq":
                    verdict = IfEq(x, y, prefixed(Out(r, (TRUE,))), prefixed(Out(r, (FALSE,))))
                else:
                    verdict = _lt_table(x, y, r, self.universe)
                tail = prefixed(In(r1, (x,)), prefixed(In(r2, (y,), mark), verdict))
                return news([r1, r2], par(self.expr(args[0], a, p, r1, guard),
                                          self.expr(args[1], a, p, r2, guard), tail))
            case Receive(clauses):
                if guard:
                    raise UnsupportedFeature("receive inside a guard")
                return self.receive(clauses, a, p, r)
        raise UnsupportedFeature(type(e).__name__)

    def _args(self, args, a, p):
        rs = [self.nm("r") for _ in args]
        zs = tuple(self.nm("z") for _ in args)
        return rs, zs, [self.expr(e, a, p, ri) for e, ri in zip(args, rs)]

    def receive(self, clauses, a, p, r) -> Process:
        nm = self.nm
        b, b2, t = nm("b"), nm("b"), nm("t")
        ss = [nm("s") for _ in range(len(clauses) + 1)]
        z1, z2 = nm("z"), nm("z")
        rh = Par(prefixed(In(t), prefixed(In(b, (z1,)), prefixed(Out(ss[0], (z1,))))),
                 prefixed(In(ss[-1], (z2,)), prefixed(Out(b2, (z2,)), prefixed(Out(t)))))
        rcs = [Repl(self.clause(c, a, p, r, b, b2, ss[i], ss[i + 1])) for i, c in enumerate(clauses)]
        body = news([t] + ss, par(prefixed(Out(t)), Repl(rh), *rcs))
        return prefixed(In(p, (b,)), NewBuf(b2, INF, body))

    def clause(self, c: Clause, a, p, r, b, b2, s, s2) -> Process:
        nm = self.nm
        r1, y = nm("r"), nm("y")
        hit = par(self.expr(c.body, a, p, r), copier(b, b2, nm), prefixed(Out(p, (b2,))))
        verdict = IfEq(y, TRUE, hit, prefixed(Out(s2, (c.var,))))
        test = New(r1, Par(self.expr(c.guard, a, p, r1, guard=True), prefixed(In(r1, (y,), TRUE), verdict)))
        return prefixed(In(s, (c.var,)), test)


def _inputs(rs, zs, cont: Process) -> Process:
    for ri, zi in reversed(list(zip(rs, zs))):
        cont = prefixed(In(ri, (zi,)), cont)
    return cont


def encode_erl(e: ErlExpr, a: str = "a", p: str = "p", r: str = "r", universe=None) -> Process:
    """``[[e]](a, p, r)``.  ``universe`` lists the integers ``lt`` can compare
    (default: the integer literals of ``e``)."""
    acc = expr_names(e, {a, p, r})
    if universe is None:
        universe = [v for v in expr_values(e, set()) if is_int(v)]
    acc |= set(universe)
    return _Encoder(_Names(acc), universe).expr(e, a, p, r)


def erl_universe(g: ErlConfig, env=()) -> list[str]:
    """Integers a configuration (and its environment) can ever hold."""
    return sorted({v for v in erl_values(g) | set(env) if is_int(v)}, key=int)


def encode_erl_global(g: ErlConfig, universe=None) -> Config:
    """The buffered-pi configuration of a global Erlang configuration.

    Hidden process ids and function names are restricted.  Each process gets
    ``depth + 1`` unbounded buffers; its messages sit in the last one."""
    universe = erl_universe(g) if universe is None else universe
    acc = erl_values(g) | {f for f, _ in g.funcs} | set(universe)
    for p in g.procs:
        expr_names(p.expr, acc)
    for _, fn in g.funcs:
        expr_names(fn.body, acc)
        acc.update(fn.params)
    nm = _Names(acc)
    enc = _Encoder(nm, universe)
    hidden = hidden_ids(g)
    comps, store = [], {}
    for proc in g.procs:
        pp, rr = nm("p"), nm("r")
        chain = [nm("b") for _ in range(proc.depth + 1)]
        links = [copier(proc.id, chain[0], nm)] + [copier(x, y, nm) for x, y in zip(chain, chain[1:])]
        body = par(enc.expr(proc.expr, proc.id, pp, rr), prefixed(Out(pp, (chain[-1],))), *links)
        comps.append(news([pp, rr] + chain, body))
        for bname in chain[:-1]:
            store[bname] = Buffer(INF)
        store[chain[-1]] = Buffer(INF, tuple(Entry(v, v in hidden) for v in proc.mailbox))
    for f, fn in g.funcs:
        a, pp, rr = nm("a"), nm("p"), nm("r")
        comps.append(Repl(prefixed(In(f, (a, pp, rr) + tuple(fn.params)), enc.expr(fn.body, a, pp, rr))))
    restricted = sorted(hidden) + [f for f, _ in g.funcs]
    cfg = Config(news(restricted, par(*comps)), BufferStore.of(store))
    if not check_validity(cfg):
        raise InvalidStore("derived buffer store is not valid")
    return canonicalize(cfg)


# ------------------------------------------------------------ mailbox chain


def _copier_links(comps) -> tuple[dict, dict]:
    """Copy agents ``c -> b`` (keyed by source) and their in-flight messages."""
    links = {}
    for c in comps:
        if not isinstance(c, Repl):
            continue
        body = c.body
        try:
            (pre1, k1), = body.branches
            (pre2, k2), = k1.branches
            (pre3, k3), = k2.branches
            (pre4, k4), = k3.branches
        except (AttributeError, ValueError):
            continue
        if (isinstance(pre1, In) and not pre1.binders and isinstance(pre2, In) and len(pre2.binders) == 1
                and isinstance(pre3, Out) and pre3.objects == pre2.binders and isinstance(pre4, Out)
                and pre4.subject == pre1.subject and k4 == NIL):
            links[pre2.subject] = (pre3.subject, pre1.subject)
    flying = {}
    for c in comps:
        if isinstance(c, Choice) and len(c.branches) == 1:
            pre, k = c.branches[0]
            if (isinstance(pre, Out) and len(pre.objects) == 1 and isinstance(k, Choice)
                    and len(k.branches) == 1 and isinstance(k.branches[0][0], Out)
                    and k.branches[0][1] == NIL):
                flying[(pre.subject, k.branches[0][0].subject)] = pre.objects[0]
    return links, flying


def mailbox_chain(cfg: Config, port: str) -> list[str]:
    """Read the mailbox fed through ``port``: queues and messages held by copy
    agents, from the output end (oldest) back to the input port."""
    _, comps = _split(cfg.process)
    links, flying = _copier_links(comps)
    path = []
    cur = port
    seen = {port}
    while cur in links:
        nxt, t = links[cur]
        path.append((cur, nxt, t))
        if nxt in seen:
            break
        seen.add(nxt)
        cur = nxt
    msgs = []
    for src, dst, t in reversed(path):
        if dst in cfg.store:
            msgs.extend(e.name for e in cfg.store[dst].queue)
        if (dst, t) in flying:
            msgs.append(flying[(dst, t)])
    return msgs


# ------------------------------------------------------------------ checks


@dataclass(frozen=True)
class StepFailure:
    source: str
    action: str
    target: str


def erl_env(*gs: ErlConfig) -> list[str]:
    acc = set()
    for g in gs:
        acc |= erl_values(g) - hidden_ids(g)
    return sorted(acc)


def simulation_failures(g: ErlConfig, env=(), max_states: int = 200) -> list[StepFailure]:
    """Global steps of ``g`` whose encoding does not admit preparing moves, one
    matching step and preparing moves into the class of the target's encoding."""
    lts = erl_lts(g, env, max_states)
    env = tuple(env) if env else tuple(erl_env(g))
    universe = sorted({u for s in lts.payload for u in erl_universe(s, env)}, key=int)
    encoded = {}

    def enc(state):
        if state.key not in encoded:
            encoded[state.key] = encode_erl_global(state, universe)
        return encoded[state.key]

    bad = []
    forms: dict = {}
    for s, lab, t in lts.edges:
        src, tgt = lts.payload[s], lts.payload[t]
        penv = tuple(sorted(set(env) | set(erl_pool(src, env)[:-1])))
        if not admits_step(enc(src), lab, enc(tgt), penv, cache=forms.setdefault(penv, {})):
            bad.append(StepFailure(src.key, str(lab), tgt.key))
    return bad


def encoded_receive(mbox, clauses, pid: str = "a", universe=None):
    """Run the encoding of ``receive clauses`` over ``mbox`` to its first
    simulating step.

    Returns ``(target, residual)`` where ``target`` is the configuration
    reached by that step and ``residual`` the mailbox read off the chain, or
    ``None`` when the encoding blocks.
    """
    g = ErlConfig.make([ErlProc(pid, Receive(tuple(clauses)), tuple(mbox), 1)])
    if universe is None:
        universe = erl_universe(g)
    start = preparing_normal_form(encode_erl_global(g, universe))
    ts, _ = step(start, (), keep=lambda act, sim: act.kind == "tau" and sim)
    if not ts:
        return None
    target = ts[0].target
    return target, mailbox_chain(target, pid)


def guard_value(e: ErlExpr, env: dict) -> str:
    """Direct big-step evaluation of a pure guard (no small-step rules)."""
    match e:
        case IntLit() | Atom() | Pid():
            return value_name(e)
        case Var(x):
            return env[x]
        case Let(x, a, b):
            return guard_value(b, {**env, x: guard_value(a, env)})
        case Prim(op, (l, r)):
            return _prim(op, (guard_value(l, env), guard_value(r, env)))
    raise UnsupportedFeature(f"not a pure guard: {show_expr(e)}")


def receive_cases(n: int, seed: int = 0, max_mailbox: int = 6, max_clauses: int = 3, values: int = 4) -> list:
    """Seeded random receive instances ``(mailbox, clauses)`` with ``eq``/``lt``
    guards.  Clause ``i`` answers by sending the message to ``k<i>``."""
    import random

    rng = random.Random(seed)
    nums = [str(v) for v in range(values)]

    def guard(x):
        roll = rng.random()
        if roll < 0.1:
            return Atom(rng.choice(["true", "false"]))
        c = IntLit(int(rng.choice(nums)))
        op = rng.choice(PRIMS)
        args = (Var(x), c) if rng.random() < 0.7 else (c, Var(x))
        g = Prim(op, args)
        if roll > 0.9:
            g = Let("w", Var(x), Prim(op, (Var("w"), c)))
        return g

    cases = []
    for _ in range(n):
        mbox = tuple(rng.choice(nums) for _ in range(rng.randint(0, max_mailbox)))
        clauses = tuple(Clause("x", guard("x"), Send(Pid(f"k{i + 1}"), Var("x")))
                        for i in range(rng.randint(1, max_clauses)))
        cases.append((mbox, clauses))
    return cases


def _answer(body: ErlExpr):
    match body:
        case Send(Pid(k), v) if k.startswith("k") and is_value(v):
            return int(k[1:]), value_name(v)
    raise ValueError(f"unexpected clause body {show_expr(body)}")


def receive_agreement(mbox, clauses) -> dict:
    """What the receive rule, the brute-force oracle and the encoding each
    select: ``(clause, message, residual mailbox)`` or ``BLOCKED``."""
    mbox = tuple(mbox)
    out_r = {}
    steps = erl_local_step(Receive(tuple(clauses)), mbox, "a", {})
    if steps:
        (_, body, rest), = steps
        out_r["rule"] = _answer(body) + (tuple(rest),)
    else:
        out_r["rule"] = BLOCKED

    def truth(i, v):
        return guard_value(clauses[i].guard, {clauses[i].var: v}) == TRUE

    hit = receive_oracle(mbox, clauses, truth)
    if hit == BLOCKED:
        out_r["oracle"] = BLOCKED
    else:
        i, k = hit
        out_r["oracle"] = (i, mbox[k - 1], mbox[:k - 1] + mbox[k:])

    run = encoded_receive(mbox, clauses)
    if run is None:
        out_r["encoding"] = BLOCKED
    else:
        target, residual = run
        after = preparing_normal_form(target)
        ts, _ = step(after, (), keep=lambda act, sim: act.kind == "out")
        outs = sorted((int(t.action.subject[1:]), t.action.objects[0]) for t in ts
                      if t.action.subject.startswith("k"))
        out_r["encoding"] = (outs[0] + (tuple(residual),)) if len(outs) == 1 else ("?", outs, tuple(residual))
    return out_r


# ------------------------------------------------------------- substitution


def random_expr(rng, size: int, variables=("x", "y"), funcs=("f",)) -> ErlExpr:
    """A random expression over a few variables, values and function names."""
    values = [IntLit(0), IntLit(1), IntLit(2), Atom("ok"), Pid("q")]

    def leaf(scope):
        if scope and rng.random() < 0.5:
            return Var(rng.choice(scope))
        return rng.choice(values)

    def guard(scope):
        if rng.random() < 0.2:
            return Atom(rng.choice(("true", "false")))
        return Prim(rng.choice(PRIMS), (leaf(scope), leaf(scope)))

    def gen(k, scope):
        if k <= 0:
            return leaf(scope)
        roll = rng.random()
        if roll < 0.25:
            v = rng.choice(variables)
            i = rng.randint(0, k - 1)
            return Let(v, gen(i, scope), gen(k - 1 - i, scope + [v]))
        if roll < 0.45:
            return Send(gen((k - 1) // 2, scope), gen((k - 1) // 2, scope))
        if roll < 0.6:
            n = rng.randint(0, 2)
            args = tuple(gen((k - 1) // max(n, 1), scope) for _ in range(n))
            return (Apply if rng.random() < 0.5 else Spawn)(rng.choice(funcs), args)
        if roll < 0.85:
            cs = []
            for _ in range(rng.randint(1, 2)):
                v = rng.choice(variables)
                cs.append(Clause(v, guard(scope + [v]), gen((k - 1) // 2, scope + [v])))
            return Receive(tuple(cs))
        return leaf(scope)

    return gen(size, list(variables))


def substitution_cases(n: int, seed: int = 0, size: int = 5) -> list[tuple]:
    """``(expression, variable, value)`` samples whose variable occurs free."""
    import random

    rng = random.Random(seed)
    out = []
    while len(out) < n:
        e = random_expr(rng, size)
        x = rng.choice(("x", "y"))
        if subst_expr(e, {x: "'probe'"}) == e:
            continue
        out.append((e, x, rng.choice(("0", "2", "3", "'ok'", "'true'", "q", "w"))))
    return out


def substitution_holds(e: ErlExpr, x: str, v: str) -> bool:
    """``[[e{v/x}]] = [[e]]{v/x}`` up to canonical form (same ``lt`` universe)."""
    universe = sorted({w for w in expr_values(e, {v}) if is_int(w)}, key=int)
    left = encode_erl(subst_expr(e, {x: v}), universe=universe)
    right = subst(encode_erl(e, universe=universe), {x: v})
    return canonicalize(Config(left)).process == canonicalize(Config(right)).process


def substitution_failures(n: int = 500, seed: int = 0, size: int = 5) -> list[tuple]:
    return [c for c in substitution_cases(n, seed, size) if not substitution_holds(*c)]


__all__ = [
    "random_expr", "substitution_cases", "substitution_holds", "substitution_failures",
    "IntLit", "Atom", "Pid", "Var", "Let", "Apply", "Spawn", "Send", "Clause", "Receive", "Prim", "PRIMS",
    "TRUE", "FALSE", "is_value", "value_name", "lit", "show_expr", "subst_expr", "ErlFunc", "ErlProc",
    "ErlConfig", "show_erl", "erl_program", "erl_values", "erl_pool", "ErlAction", "ERL_TAU",
    "erl_local_step", "eval_guard", "rcv_choice", "receive_oracle", "BLOCKED", "erl_global_successors",
    "erl_lts", "copier", "encode_erl", "erl_universe", "encode_erl_global", "mailbox_chain", "StepFailure",
    "erl_env", "simulation_failures", "encoded_receive", "guard_value", "receive_cases", "receive_agreement",
]
