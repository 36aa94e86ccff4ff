"""Plain-text syntax for terms, formulas, sequents and grammars.

Conventions::

    terms     "ab"_i^j . "cd"_j^k      word factors (product is '.')
              d^i_j                     delta factor (upper i, lower j)
              "abc"                     loop factor (cyclic word)
              x^i_j, x^[i j]_[k]        variable factors
              1                         unit

    formulas  a^i_j, p^[i j]_[k l]     atoms (single index or bracket rows)
              ~a^i_j                    negative literal (rows as written)
              A * B, A # B              tensor / par ('*' binds tighter)
              nab^i_j A, tri^i_j A      binders
              ~(A)                      dual of a compound formula

    sequents  |- t :: A, B              ('|- A, B' abbreviates term 1)
    nd        x^i_j : a^j_i |- t : F

Within a quoted word, whitespace separates symbols; a quoted word without
whitespace is a sequence of one-character symbols.  Names starting with '%'
are reserved for generated indices and rejected by the parser unless
explicitly allowed.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import ParseError
from .formulas import Atom, Formula, Nabla, Par, Tensor, Triangle, dual
from .terms import LoopFactor, Term, VarFactor, WordFactor

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"[^"]*")
  | (?P<dcolon>::)
  | (?P<turnstile>\|-)
  | (?P<name>[A-Za-z%][A-Za-z0-9%!']*)
  | (?P<punct>[\^_\[\]().,:*#~/\\1])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"cannot tokenize at: {text[pos:pos + 20]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        out.append((kind, m.group()))
    out.append(("eof", ""))
    return out


class _Parser:
    def __init__(self, text: str, allow_reserved: bool = False):
        self.toks = tokenize(text)
        self.pos = 0
        self.allow_reserved = allow_reserved

    def peek(self) -> tuple[str, str]:
        return self.toks[self.pos]

    def next(self) -> tuple[str, str]:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, value: str | None = None) -> str:
        k, v = self.next()
        if k != kind or (value is not None and v != value):
            raise ParseError(f"expected {value or kind}, got {v!r}")
        return v

    def at_punct(self, ch: str) -> bool:
        k, v = self.peek()
        return k == "punct" and v == ch

    def eat_punct(self, ch: str) -> bool:
        if self.at_punct(ch):
            self.next()
            return True
        return False

    def name(self) -> str:
        k, v = self.next()
        if k != "name":
            raise ParseError(f"expected a name, got {v!r}")
        if v.startswith("%") and not self.allow_reserved:
            raise ParseError(f"reserved name {v!r}")
        return v

    # ---- index rows -----------------------------------------------------

    def index_row(self) -> tuple[str, ...]:
        if self.eat_punct("["):
            items = []
            while not self.at_punct("]"):
                items.append(self.name())
            self.expect("punct", "]")
            return tuple(items)
        return (self.name(),)

    def opt_rows(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        upper: tuple[str, ...] = ()
        lower: tuple[str, ...] = ()
        while True:
            if self.eat_punct("^"):
                upper = upper + self.index_row()
            elif self.eat_punct("_"):
                lower = lower + self.index_row()
            else:
                return upper, lower

    # ---- terms ----------------------------------------------------------

    def term(self) -> Term:
        if self.at_punct("1"):
            self.next()
            return Term()
        factors = [self.factor()]
        while self.eat_punct("."):
            factors.append(self.factor())
        return Term(factors)

    def factor(self):
        k, v = self.peek()
        if k == "string":
            self.next()
            word = _split_word(v[1:-1])
            upper, lower = self.opt_rows()
            if not upper and not lower:
                return LoopFactor(word)
            if len(upper) == 1 and len(lower) == 1:
                return WordFactor(word, lower[0], upper[0])
            raise ParseError("a word factor needs exactly one upper and one lower index")
        if k == "name":
            name = self.name()
            upper, lower = self.opt_rows()
            if name == "d":
                if len(upper) == 1 and len(lower) == 1:
                    return WordFactor((), lower[0], upper[0])
                raise ParseError("delta needs exactly one upper and one lower index")
            return VarFactor(name, upper, lower)
        raise ParseError(f"expected a factor, got {v!r}")

    # ---- formulas --------------------------------------------------------

    def formula(self) -> Formula:
        left = self.formula_tensor()
        while self.eat_punct("#"):
            left = Par(left, self.formula_tensor())
        return left

    def formula_tensor(self) -> Formula:
        left = self.formula_unary()
        while self.eat_punct("*"):
            left = Tensor(left, self.formula_unary())
        return left

    def formula_unary(self) -> Formula:
        if self.eat_punct("~"):
            k, v = self.peek()
            if k == "name":
                name = self.name()
                upper, lower = self.opt_rows()
                return Atom(name, False, upper, lower)
            return dual(self.formula_unary())
        k, v = self.peek()
        if k == "punct" and v == "(":
            self.next()
            f = self.formula()
            self.expect("punct", ")")
            return f
        name = self.name()
        if name in ("nab", "tri"):
            upper, lower = self.opt_rows()
            if len(upper) != 1 or len(lower) != 1:
                raise ParseError(f"{name} needs one upper and one lower index")
            body = self.formula_unary()
            cls = Nabla if name == "nab" else Triangle
            return cls(upper[0], lower[0], body)
        upper, lower = self.opt_rows()
        return Atom(name, True, upper, lower)

    # ---- sequents ---------------------------------------------------------

    def sequent(self):
        from .judgements import Sequent

        self.expect("turnstile")
        mark = self.pos
        try:
            term = self.term()
            self.expect("dcolon")
        except ParseError:
            self.pos = mark
            term = Term()
        ctx = [self.formula()]
        while self.eat_punct(","):
            ctx.append(self.formula())
        self.expect("eof")
        return Sequent(term, tuple(ctx))

    def nd_sequent(self):
        from .nd import NDSequent

        bindings = []
        if self.peek()[0] != "turnstile":
            while True:
                name = self.name()
                upper, lower = self.opt_rows()
                self.expect("punct", ":")
                f = self.formula()
                bindings.append((VarFactor(name, upper, lower), f))
                if not self.eat_punct(","):
                    break
        self.expect("turnstile")
        term = self.term()
        self.expect("punct", ":")
        f = self.formula()
        self.expect("eof")
        return NDSequent(tuple(bindings), term, f)


def _split_word(text: str) -> tuple[str, ...]:
    if not text:
        return ()
    if any(c.isspace() for c in text):
        return tuple(text.split())
    return tuple(text)


# ---- public parse API -------------------------------------------------------


def parse_term(text: str, allow_reserved: bool = False) -> Term:
    p = _Parser(text, allow_reserved)
    t = p.term()
    p.expect("eof")
    return t


def parse_formula(text: str, allow_reserved: bool = False) -> Formula:
    p = _Parser(text, allow_reserved)
    f = p.formula()
    p.expect("eof")
    return f


def parse_sequent(text: str, allow_reserved: bool = False):
    return _Parser(text, allow_reserved).sequent()


def parse_nd_sequent(text: str, allow_reserved: bool = False):
    return _Parser(text, allow_reserved).nd_sequent()


# ---- printers ----------------------------------------------------------------


def _show_word(word: tuple[str, ...]) -> str:
    if all(len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(word)


def _show_row(row: tuple[str, ...], mark: str) -> str:
    if not row:
        return ""
    if len(row) == 1:
        return f"{mark}{row[0]}"
    return f"{mark}[{' '.join(row)}]"


def show_factor(f) -> str:
    if isinstance(f, WordFactor):
        if not f.word:
            return f"d^{f.upper}_{f.lower}"
        return f'"{_show_word(f.word)}"_{f.lower}^{f.upper}'
    if isinstance(f, LoopFactor):
        return f'"{_show_word(f.word)}"'
    return f"{f.name}{_show_row(f.upper, '^')}{_show_row(f.lower, '_')}"


def show_term(t: Term) -> str:
    if t.is_unit():
        return "1"
    return " . ".join(show_factor(f) for f in t.factors)


def show_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        neg = "" if f.positive else "~"
        return f"{neg}{f.name}{_show_row(f.upper, '^')}{_show_row(f.lower, '_')}"
    if isinstance(f, (Tensor, Par)):
        op = "*" if isinstance(f, Tensor) else "#"
        return f"{_paren(f.left)} {op} {_paren(f.right)}"
    kw = "nab" if isinstance(f, Nabla) else "tri"
    return f"{kw}^{f.up}_{f.down} {_paren(f.body)}"


def _paren(f: Formula) -> str:
    if isinstance(f, (Tensor, Par)):
        return f"({show_formula(f)})"
    return show_formula(f)


def show_sequent(seq) -> str:
    ctx = ", ".join(show_formula(f) for f in seq.context)
    if seq.term.is_unit():
        return f"|- {ctx}"
    return f"|- {show_term(seq.term)} :: {ctx}"


def show_nd_sequent(seq) -> str:
    bindings = ", ".join(f"{show_factor(v)} : {show_formula(a)}" for v, a in seq.bindings)
    head = f"{bindings} " if bindings else ""
    return f"{head}|- {show_term(seq.term)} : {show_formula(seq.formula)}"
