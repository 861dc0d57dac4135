"""Recursive-descent parsers for the three surface syntaxes.

``parse_process``/``parse_store``/``parse_config`` read buffered pi (and the
polyadic target, which only adds tuples and ``F[...]`` agents); ``parse_go``
reads core-Go programs and ``parse_erl`` core-Erlang programs.  Every parser
accepts exactly what the matching printer emits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import erlang as E
from . import go as G
from .errors import ParseError
from .syntax import (
    INF, NIL, Agent, Buffer, BufferStore, Choice, Config, Entry, IfEq, In, NewBuf, Out, Process, Repl, Tau,
    news, par,
)

_SYMBOLS = ("<-", "->", "!", "(", ")", "<", ">", ".", ",", "|", "+", ";", ":", "=", "{", "}", "[", "]", "*")
_NAME = {
    "pi": r"[A-Za-z_][A-Za-z0-9_]*'*(?:![io](?![A-Za-z0-9_]))?",
    "go": r"[A-Za-z_][A-Za-z0-9_]*",
    "erl": r"[A-Za-z_][A-Za-z0-9_]*",
}
_COMMENT = {"pi": r"\#[^\n]*", "go": r"(?:\#|//)[^\n]*", "erl": r"[\#%][^\n]*"}


@dataclass(frozen=True)
class Token:
    kind: str  # name, int, atom, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str, lang: str = "pi") -> list[Token]:
    sym = "|".join(re.escape(s) for s in _SYMBOLS)
    master = re.compile(
        rf"(?P<ws>\s+)|(?P<comment>{_COMMENT[lang]})|(?P<name>{_NAME[lang]})|(?P<int>[0-9]+)"
        rf"|(?P<atom>'[A-Za-z0-9_]*')|(?P<sym>{sym})"
    )
    toks, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = master.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    keywords: frozenset = frozenset()

    def __init__(self, text: str, lang: str):
        self.toks = tokenize(text, lang)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, message: str, expected=(), tok: Token | None = None):
        t = tok or self.tok
        found = t.text or "end of input"
        raise ParseError(f"{message} (found {found!r})", t.line, t.col, expected)

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("sym", "name") and t.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}", (text,))
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "name" or t.text in self.keywords:
            self.fail(f"expected {what}", (what,))
        self.i += 1
        return t.text

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.fail("expected an integer", ("integer",))
        self.i += 1
        return int(t.text)

    def end(self) -> None:
        if self.tok.kind != "eof":
            self.fail("unexpected trailing input", ("end of input",))


# ------------------------------------------------------------ buffered pi


class _PiParser(_Parser):
    keywords = frozenset({"new", "in", "tau", "if", "then", "else", "inf"})

    def __init__(self, text: str):
        super().__init__(text, "pi")

    def name(self) -> str:
        t = self.tok
        if t.kind in ("int", "atom") or (t.kind == "name" and t.text not in self.keywords):
            self.i += 1
            return t.text
        self.fail("expected a name", ("name",))

    def names(self, close: str) -> tuple:
        out = []
        if not self.at(close):
            out.append(self.name())
            while self.accept(","):
                out.append(self.name())
        self.expect(close)
        return tuple(out)

    def capacity(self, allow_inf: bool = True):
        t = self.tok
        if allow_inf and self.accept("inf"):
            return INF
        n = self.integer()
        if n <= 0:
            self.fail("buffer capacity must be a positive integer", ("positive integer",), t)
        return n

    def mark(self) -> str:
        if not self.accept("*"):
            return ""
        if self.tok.kind == "atom":
            self.i += 1
            return self.toks[self.i - 1].text
        return "*"

    def process(self) -> Process:
        comps = [self.summand_group()]
        while self.accept("|"):
            comps.append(self.summand_group())
        return par(*comps) if len(comps) > 1 else comps[0]

    def summand_group(self) -> Process:
        start = self.tok
        first = self.term()
        if not self.at("+"):
            return first
        branches = []
        for p, t in [(first, start)] + self._more_summands():
            if not (isinstance(p, Choice) and len(p.branches) == 1):
                self.fail("every branch of a sum must be prefixed", ("prefix",), t)
            branches.extend(p.branches)
        return Choice(tuple(branches))

    def _more_summands(self):
        out = []
        while self.accept("+"):
            t = self.tok
            out.append((self.term(), t))
        return out

    def term(self) -> Process:
        t = self.tok
        if t.kind == "int" and t.text == "0" and not self.peek().text in ("(", "<"):
            self.i += 1
            return NIL
        if self.accept("("):
            p = self.process()
            self.expect(")")
            return p
        if self.accept("!"):
            return Repl(self.term())
        if self.at("new"):
            return self.restriction()
        if self.at("if"):
            self.i += 1
            x = self.name()
            self.expect("=")
            y = self.name()
            self.expect("then")
            a = self.term()
            self.expect("else")
            return IfEq(x, y, a, self.term())
        if t.kind == "name" and t.text == "F" and self.peek().text == "[":
            return self.agent()
        pre = self.prefix()
        if self.accept("."):
            return Choice(((pre, self.term()),))
        return Choice(((pre, NIL),))

    def restriction(self) -> Process:
        self.expect("new")
        first = self.name()
        if self.accept(":"):
            cap = self.capacity()
            mark = "*" if self.accept("*") else ""
            self.expect("in")
            return NewBuf(first, cap, self.process(), mark)
        names = [first]
        while self.accept(","):
            names.append(self.name())
        self.expect("in")
        return news(names, self.process())

    def prefix(self):
        if self.accept("tau"):
            return Tau(self.mark())
        subject = self.name()
        if self.accept("("):
            binders = self.names(")")
            return In(subject, binders, self.mark())
        if self.accept("<"):
            objects = self.names(">")
            return Out(subject, objects, self.mark())
        self.fail("expected '(' or '<' after a channel name", ("(", "<"))

    def agent(self) -> Agent:
        self.expect("F")
        self.expect("[")
        cap = self.capacity()
        self.expect(";")
        pairs = []
        while self.accept("("):
            a = self.name()
            self.expect(",")
            b = self.name()
            self.expect(")")
            pairs.append((a, b))
            if not self.accept(","):
                break
        self.expect(";")
        i = self.name()
        self.expect(",")
        o = self.name()
        self.expect("]")
        if len(pairs) > cap:
            self.fail("agent holds more pairs than its capacity")
        return Agent(cap, tuple(pairs), i, o)

    def store(self) -> BufferStore:
        self.expect("{")
        items, seen = [], set()
        if not self.at("}"):
            items.append(self.store_item(seen))
            while self.accept(","):
                items.append(self.store_item(seen))
        self.expect("}")
        return BufferStore(tuple(items))

    def store_item(self, seen: set):
        t = self.tok
        key = self.name()
        if key in seen:
            self.fail(f"buffered name {key} listed twice", tok=t)
        seen.add(key)
        self.expect("->")
        self.expect("(")
        cap = self.capacity()
        self.expect(",")
        self.expect("[")
        queue = []
        if not self.at("]"):
            queue.append(self.entry())
            while self.accept(","):
                queue.append(self.entry())
        self.expect("]")
        self.expect(")")
        if len(queue) > cap:
            self.fail(f"queue of {key} exceeds its capacity", tok=t)
        return key, Buffer(cap, tuple(queue))

    def entry(self) -> Entry:
        if self.at("(") and self.peek().text == "new":
            self.i += 2
            n = self.name()
            self.expect(")")
            return Entry(n, True)
        return Entry(self.name())


def parse_process(text: str) -> Process:
    """Parse a process term exactly as written (no canonicalization)."""
    p = _PiParser(text)
    proc = p.process()
    p.end()
    return proc


def parse_store(text: str) -> BufferStore:
    p = _PiParser(text)
    store = p.store()
    p.end()
    return store


def parse_config(text: str, store: str | None = None) -> Config:
    """``P`` or ``P ; { store }``; a separate ``store`` text is merged in."""
    p = _PiParser(text)
    proc = p.process()
    st = BufferStore()
    if p.accept(";"):
        st = p.store()
    p.end()
    if store is not None:
        extra = parse_store(store)
        clash = st.domain() & extra.domain()
        if clash:
            raise ParseError(f"buffered name listed twice: {sorted(clash)[0]}")
        st = BufferStore(st.entries + extra.entries)
    return Config(proc, st)


def parse_pib(text: str, store: str | None = None) -> Config:
    """Parse a configuration and return its canonical form."""
    from .canon import canonicalize, check_validity
    from .errors import InvalidStore

    cfg = parse_config(text, store)
    if not check_validity(cfg):
        raise InvalidStore("a local store entry is not bound by an outermost restriction")
    return canonicalize(cfg)


# -------------------------------------------------------------------- Go


class _GoParser(_Parser):
    keywords = frozenset({"func", "chan", "make", "go", "select", "case", "nil"})

    def __init__(self, text: str, variables=()):
        super().__init__(text, "go")
        self.vars = set(variables)
        self.calls = []  # (token, name, arity)

    def ident_expr(self, x: str):
        return G.Var(x) if x in self.vars else G.ChanLit(x)

    def expr(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return G.IntLit(int(t.text))
        if self.accept("<-"):
            return G.Recv(self.expr())
        if self.accept("make"):
            self.expect("(")
            self.expect("chan")
            elem = self.ident("element type")
            self.expect(",")
            size = self.integer()
            self.expect(")")
            return G.Make(elem, size)
        return self.ident_expr(self.ident("expression"))

    def exprs(self, close: str) -> tuple:
        out = []
        if not self.at(close):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(close)
        return tuple(out)

    def assignable(self) -> str:
        t = self.tok
        x = self.ident("variable")
        if x not in self.vars:
            self.fail(f"{x} is not a parameter; functions have no other locals", tok=t)
        return x

    def stmts(self, stop=("}",)):
        out = [self.stmt()]
        while self.accept(";"):
            if self.at(*stop) or self.tok.kind == "eof":
                break
            out.append(self.stmt())
        return G.seq(*out)

    def stmt(self):
        if self.accept("nil"):
            return G.NIL_STMT
        if self.at("go"):
            self.i += 1
            t = self.tok
            f = self.ident("function name")
            self.expect("(")
            args = self.exprs(")")
            self.calls.append((t, f, len(args)))
            return G.GoCall(f, args)
        if self.accept("select"):
            self.expect("{")
            clauses = []
            while self.accept("case"):
                clauses.append(self.case())
            self.expect("}")
            return G.Select(tuple(clauses))
        if self.tok.kind == "name" and self.peek().text == "=":
            x = self.assignable()
            self.expect("=")
            return G.Assign(x, self.expr())
        ch = self.expr()
        self.expect("<-")
        return G.Send(ch, self.expr())

    def case(self):
        if self.tok.kind == "name" and self.peek().text == "=":
            x = self.assignable()
            self.expect("=")
            self.expect("<-")
            ch = self.expr()
            self.expect(":")
            return G.RecvCase(x, ch, self.case_body())
        ch = self.expr()
        self.expect("<-")
        v = self.expr()
        self.expect(":")
        return G.SendCase(ch, v, self.case_body())

    def case_body(self):
        return self.stmts(stop=("case", "}"))

    def program(self, main: str = "main"):
        funcs, chans = {}, {}
        while self.tok.kind != "eof":
            if self.accept("chan"):
                t = self.tok
                c = self.ident("channel name")
                if c in chans:
                    self.fail(f"channel {c} declared twice", tok=t)
                self.expect("=")
                self.expect("make")
                self.expect("(")
                self.expect("chan")
                self.ident("element type")
                self.expect(",")
                chans[c] = self.integer()
                self.expect(")")
                self.accept(";")
                continue
            self.expect("func")
            t = self.tok
            f = self.ident("function name")
            if f in funcs:
                self.fail(f"function {f} defined twice", tok=t)
            self.expect("(")
            params = []
            if not self.at(")"):
                params.append(self.ident("parameter"))
                while self.accept(","):
                    params.append(self.ident("parameter"))
            self.expect(")")
            self.expect("{")
            self.vars = set(params)
            body = G.NIL_STMT if self.at("}") else self.stmts()
            self.expect("}")
            funcs[f] = G.Func(tuple(params), body)
        for t, f, n in self.calls:
            if f not in funcs:
                self.fail(f"unknown function {f}", tok=t)
            if len(funcs[f].params) != n:
                self.fail(f"{f} expects {len(funcs[f].params)} arguments", tok=t)
        if main not in funcs:
            self.fail(f"no function named {main}")
        return G.program(funcs, chans, main)


def parse_go(text: str, main: str = "main") -> "G.GoConfig":
    """Parse a core-Go program into its initial global configuration."""
    return _GoParser(text).program(main)


def parse_go_stmt(text: str, variables=()) -> "G.GoStmt":
    """Identifiers listed in ``variables`` are variables, the rest channels."""
    p = _GoParser(text, variables)
    s = p.stmts()
    p.end()
    return s


def parse_go_expr(text: str, variables=()) -> "G.GoExpr":
    p = _GoParser(text, variables)
    e = p.expr()
    p.end()
    return e


def show_go_program(g: "G.GoConfig", main: str = "main") -> str:
    """Print a program (functions and global channels) in parseable form."""
    lines = [f"chan {c} = make(chan int, {ch.capacity})" for c, ch in g.channels]
    for f, fn in g.funcs:
        lines.append(f"func {f}({', '.join(fn.params)}) {{ {G.show_stmt(fn.body)} }}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- Erlang


class _ErlParser(_Parser):
    keywords = frozenset({"let", "in", "apply", "spawn", "receive", "when", "end", "fun"})

    def __init__(self, text: str, variables=()):
        super().__init__(text, "erl")
        self.scope = [set(variables)]
        self.calls = []

    def bound(self, x: str) -> bool:
        return any(x in s for s in self.scope)

    def expr(self):
        if self.accept("let"):
            x = self.ident("variable")
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            self.scope.append({x})
            body = self.expr()
            self.scope.pop()
            return E.Let(x, bound, body)
        left = self.operand()
        if self.accept("!"):
            return E.Send(left, self.operand())
        return left

    def args(self, close: str) -> tuple:
        out = []
        if not self.at(close):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(close)
        return tuple(out)

    def operand(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return E.IntLit(int(t.text))
        if t.kind == "atom":
            self.i += 1
            return E.Atom(t.text[1:-1])
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("apply", "spawn"):
            kw = t.text
            self.i += 1
            ft = self.tok
            f = self.ident("function name")
            self.expect("(" if kw == "apply" else "[")
            args = self.args(")" if kw == "apply" else "]")
            self.calls.append((ft, f, len(args)))
            return E.Apply(f, args) if kw == "apply" else E.Spawn(f, args)
        if self.accept("receive"):
            clauses = [self.clause()]
            while self.accept(";"):
                clauses.append(self.clause())
            self.expect("end")
            return E.Receive(tuple(clauses))
        x = self.ident("expression")
        if self.at("(") and x in E.PRIMS:
            self.i += 1
            args = self.args(")")
            if len(args) != 2:
                self.fail(f"{x} takes two arguments", tok=t)
            return E.Prim(x, args)
        return E.Var(x) if self.bound(x) else E.Pid(x)

    def clause(self):
        x = self.ident("pattern variable")
        self.expect("when")
        self.scope.append({x})
        guard = self.expr()
        self.expect("->")
        body = self.expr()
        self.scope.pop()
        return E.Clause(x, guard, body)

    def program(self):
        funcs = {}
        while self.tok.kind != "eof":
            t = self.tok
            f = self.ident("function name")
            if f in funcs:
                self.fail(f"function {f} defined twice", tok=t)
            self.expect("=")
            self.expect("fun")
            self.expect("(")
            params = []
            if not self.at(")"):
                params.append(self.ident("parameter"))
                while self.accept(","):
                    params.append(self.ident("parameter"))
            self.expect(")")
            self.expect("->")
            self.scope = [set(params)]
            body = self.expr()
            self.expect(".")
            funcs[f] = E.ErlFunc(tuple(params), body)
        for t, f, n in self.calls:
            if f not in funcs:
                self.fail(f"unknown function {f}", tok=t)
            if len(funcs[f].params) != n:
                self.fail(f"{f} expects {len(funcs[f].params)} arguments", tok=t)
        return funcs


def parse_erl_funcs(text: str) -> dict:
    return _ErlParser(text).program()


def parse_erl(text: str, args=(), start: str = "start", accessible: bool = False) -> "E.ErlConfig":
    """Parse a core-Erlang program into its initial global configuration."""
    funcs = parse_erl_funcs(text)
    if start not in funcs:
        raise ParseError(f"no function named {start}")
    return E.erl_program(funcs, tuple(args), start, accessible)


def parse_erl_expr(text: str, variables=()) -> "E.ErlExpr":
    """Identifiers listed in ``variables`` (or bound inside) are variables, the rest pids."""
    p = _ErlParser(text, variables)
    e = p.expr()
    p.end()
    return e


def show_erl_program(funcs: dict) -> str:
    return "".join(
        f"{f} = fun ({', '.join(fn.params)}) -> {E.show_expr(fn.body)}.\n" for f, fn in sorted(funcs.items())
    )


__all__ = [
    "Token", "tokenize", "parse_process", "parse_store", "parse_config", "parse_pib", "parse_go",
    "parse_go_stmt", "parse_go_expr", "show_go_program", "parse_erl", "parse_erl_funcs", "parse_erl_expr",
    "show_erl_program",
]
