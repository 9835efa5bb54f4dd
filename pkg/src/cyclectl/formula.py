"""Cycle-CTL* formulas: AST, parser, printer and syntactic transformations.

Concrete syntax (tightest binding first)::

    !  X  F  G  E  A  EC  AC  ECs     prefix operators
    U                                 right associative
    &                                 left associative
    |                                 left associative
    ->                                right associative

Atoms are identifiers ``[A-Za-z_][A-Za-z0-9_]*`` that are not keywords.
``#`` starts a comment running to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

ATOM = "atom"
TRUE = "true"
FALSE = "false"
NOT = "not"
AND = "and"
OR = "or"
IMPLIES = "implies"
EXISTS = "E"
FORALL = "A"
EXISTS_CYCLE = "EC"
FORALL_CYCLE = "AC"
SIMPLE_EXISTS_CYCLE = "ECs"
NEXT = "X"
UNTIL = "U"
FINALLY = "F"
GLOBALLY = "G"

QUANTIFIERS = frozenset({EXISTS, FORALL, EXISTS_CYCLE, FORALL_CYCLE, SIMPLE_EXISTS_CYCLE})
TEMPORAL = frozenset({NEXT, UNTIL, FINALLY, GLOBALLY})
BOOLEAN = frozenset({NOT, AND, OR, IMPLIES})
_ARITY = {
    ATOM: 0, TRUE: 0, FALSE: 0, NOT: 1, AND: 2, OR: 2, IMPLIES: 2,
    EXISTS: 1, FORALL: 1, EXISTS_CYCLE: 1, FORALL_CYCLE: 1, SIMPLE_EXISTS_CYCLE: 1,
    NEXT: 1, UNTIL: 2, FINALLY: 1, GLOBALLY: 1,
}


@dataclass(frozen=True, eq=False)
class Formula:
    """An immutable formula node.

    ``op`` is one of the module-level node kinds, ``args`` holds the children
    and ``name`` is set for atoms only.
    """

    op: str
    args: tuple["Formula", ...] = ()
    name: str | None = None

    def __post_init__(self):
        if self.op not in _ARITY:
            raise ValueError(f"unknown node kind {self.op!r}")
        if len(self.args) != _ARITY[self.op]:
            raise ValueError(f"{self.op} takes {_ARITY[self.op]} children, got {len(self.args)}")
        if (self.op == ATOM) != (self.name is not None):
            raise ValueError("only atoms carry a name")
        # formulas are dictionary keys everywhere; hash once
        object.__setattr__(self, "_hash", hash((self.op, self.args, self.name)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Formula) or self._hash != other._hash:
            return False
        return self.op == other.op and self.name == other.name and self.args == other.args

    @property
    def is_state(self) -> bool:
        """True for state formulas, False for proper path formulas."""
        if self.op in (ATOM, TRUE, FALSE) or self.op in QUANTIFIERS:
            return True
        if self.op in TEMPORAL:
            return False
        return all(a.is_state for a in self.args)

    def __str__(self) -> str:
        return to_text(self)


def Atom(name: str) -> Formula:
    return Formula(ATOM, (), name)


Top = Formula(TRUE)
Bottom = Formula(FALSE)


def Not(f: Formula) -> Formula:
    return Formula(NOT, (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula(AND, (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula(OR, (a, b))


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula(IMPLIES, (a, b))


def E(f: Formula) -> Formula:
    return Formula(EXISTS, (f,))


def A(f: Formula) -> Formula:
    return Formula(FORALL, (f,))


def EC(f: Formula) -> Formula:
    return Formula(EXISTS_CYCLE, (f,))


def AC(f: Formula) -> Formula:
    return Formula(FORALL_CYCLE, (f,))


def ECs(f: Formula) -> Formula:
    return Formula(SIMPLE_EXISTS_CYCLE, (f,))


def X(f: Formula) -> Formula:
    return Formula(NEXT, (f,))


def U(a: Formula, b: Formula) -> Formula:
    return Formula(UNTIL, (a, b))


def F(f: Formula) -> Formula:
    return Formula(FINALLY, (f,))


def G(f: Formula) -> Formula:
    return Formula(GLOBALLY, (f,))


def conjunction(items) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    items = list(items)
    if not items:
        return Top
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disjunction(items) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``false``."""
    items = list(items)
    if not items:
        return Bottom
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


# --------------------------------------------------------------------------
# parsing

class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class FormulaCategoryError(FormulaError):
    """A path formula appears where a state formula is required."""


KEYWORDS = frozenset({"E", "A", "EC", "AC", "ECs", "X", "U", "F", "G", "true", "false"})
_PREFIX = {"!": NOT, "X": NEXT, "F": FINALLY, "G": GLOBALLY, "E": EXISTS, "A": FORALL,
           "EC": EXISTS_CYCLE, "AC": FORALL_CYCLE, "ECs": SIMPLE_EXISTS_CYCLE}
_TOKEN = re.compile(r"\s+|#[^\n]*|->|[()!&|]|[A-Za-z_][A-Za-z0-9_]*")
ATOM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _tokenize(text: str) -> list[tuple[str, int, int]]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        tok = m.group()
        if not tok[0].isspace() and tok[0] != "#":
            tokens.append((tok, line, pos - line_start + 1))
        for i, ch in enumerate(tok):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(("<end>", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def error(self, message: str):
        _, line, col = self.tokens[self.i]
        raise FormulaSyntaxError(message, line, col)

    def expect(self, tok: str):
        if self.peek() != tok:
            self.error(f"expected {tok!r}, found {self.peek()!r}")
        self.take()

    def implication(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.until()
        while self.peek() == "&":
            self.take()
            out = And(out, self.until())
        return out

    def until(self) -> Formula:
        left = self.unary()
        if self.peek() == "U":
            self.take()
            return U(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok in _PREFIX:
            self.take()
            return Formula(_PREFIX[tok], (self.unary(),))
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            inner = self.implication()
            self.expect(")")
            return inner
        if tok == "true":
            self.take()
            return Top
        if tok == "false":
            self.take()
            return Bottom
        if tok not in KEYWORDS and ATOM_RE.match(tok):
            self.take()
            return Atom(tok)
        if tok == "<end>":
            self.error("unexpected end of input")
        self.error(f"unexpected token {tok!r}")


def parse_path(text: str) -> Formula:
    """Parse without requiring a state formula at the top."""
    p = _Parser(text)
    f = p.implication()
    if p.peek() != "<end>":
        p.error(f"unexpected token {p.peek()!r}")
    return f


def parse(text: str) -> Formula:
    """Parse a state formula.

    Raises FormulaSyntaxError (with line and column) on malformed text and
    FormulaCategoryError when the text denotes a path formula, e.g. a bare
    ``X p`` outside any path quantifier.
    """
    f = parse_path(text)
    if not f.is_state:
        raise FormulaCategoryError(
            f"path formula {to_text(f)!r} must be wrapped in a path quantifier")
    return f


# --------------------------------------------------------------------------
# printing

_PREC = {IMPLIES: 1, OR: 2, AND: 3, UNTIL: 4}
_RIGHT_ASSOC = {IMPLIES, UNTIL}
_INFIX = {IMPLIES: "->", OR: "|", AND: "&", UNTIL: "U"}
_UNARY_TEXT = {NOT: "!", NEXT: "X ", FINALLY: "F ", GLOBALLY: "G ", EXISTS: "E ",
               FORALL: "A ", EXISTS_CYCLE: "EC ", FORALL_CYCLE: "AC ",
               SIMPLE_EXISTS_CYCLE: "ECs "}


def to_text(f: Formula) -> str:
    """Print ``f`` in the concrete syntax with minimal parentheses."""
    if f.op == ATOM:
        return f.name
    if f.op in (TRUE, FALSE):
        return f.op
    if f.op in _UNARY_TEXT:
        child = f.args[0]
        inner = to_text(child)
        if child.op in _PREC:
            inner = f"({inner})"
        return _UNARY_TEXT[f.op] + inner
    prec = _PREC[f.op]
    left, right = f.args
    ltxt, rtxt = to_text(left), to_text(right)
    right_assoc = f.op in _RIGHT_ASSOC
    if left.op in _PREC and (_PREC[left.op] < prec or (_PREC[left.op] == prec and right_assoc)):
        ltxt = f"({ltxt})"
    if right.op in _PREC and (_PREC[right.op] < prec or (_PREC[right.op] == prec and not right_assoc)):
        rtxt = f"({rtxt})"
    return f"{ltxt} {_INFIX[f.op]} {rtxt}"


# --------------------------------------------------------------------------
# traversal

def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal (children before parents), duplicates included."""
    for a in f.args:
        yield from subformulas(a)
    yield f


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if g.op == ATOM}


def size(f: Formula) -> int:
    return 1 + sum(size(a) for a in f.args)


def depth(f: Formula) -> int:
    return 1 + max((depth(a) for a in f.args), default=0)


def quantified_subformulas(f: Formula) -> list[Formula]:
    """Distinct quantified subformulas, innermost first."""
    seen: dict[Formula, None] = {}
    for g in subformulas(f):
        if g.op in QUANTIFIERS and g not in seen:
            seen[g] = None
    return list(seen)


def replace(f: Formula, mapping: dict[Formula, Formula]) -> Formula:
    """Replace maximal occurrences of the keys of ``mapping``."""
    if f in mapping:
        return mapping[f]
    if not f.args:
        return f
    args = tuple(replace(a, mapping) for a in f.args)
    return f if args == f.args else Formula(f.op, args, f.name)


def desugar(f: Formula) -> Formula:
    """Rewrite F, G, -> and false into the core connectives."""
    args = tuple(desugar(a) for a in f.args)
    if f.op == FALSE:
        return Not(Top)
    if f.op == IMPLIES:
        return Or(Not(args[0]), args[1])
    if f.op == FINALLY:
        return U(Top, args[0])
    if f.op == GLOBALLY:
        return Not(U(Top, Not(args[0])))
    return f if args == f.args else Formula(f.op, args, f.name)


def closure_size(f: Formula) -> int:
    """Number of distinct subformulas of the desugared formula."""
    return len(set(subformulas(desugar(f))))


# --------------------------------------------------------------------------
# normal forms

_DUAL = {EXISTS: FORALL, FORALL: EXISTS, EXISTS_CYCLE: FORALL_CYCLE, FORALL_CYCLE: EXISTS_CYCLE}


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms.

    Negated untils become ``(!b U (!a & !b)) | G !b``; no release operator is
    introduced. Implications are eliminated.
    """
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    op = f.op
    if op == ATOM:
        return Not(f) if neg else f
    if op == TRUE:
        return Bottom if neg else Top
    if op == FALSE:
        return Top if neg else Bottom
    if op == NOT:
        return _nnf(f.args[0], not neg)
    if op in (AND, OR):
        a, b = (_nnf(x, neg) for x in f.args)
        flip = (op == AND) == neg
        return Or(a, b) if flip else And(a, b)
    if op == IMPLIES:
        a, b = f.args
        if neg:
            return And(_nnf(a, False), _nnf(b, True))
        return Or(_nnf(a, True), _nnf(b, False))
    if op in _DUAL:
        body = _nnf(f.args[0], neg)
        return Formula(_DUAL[op] if neg else op, (body,))
    if op == SIMPLE_EXISTS_CYCLE:
        if neg:
            raise FormulaError("the negation of ECs has no dual quantifier")
        return ECs(_nnf(f.args[0], False))
    if op == NEXT:
        return X(_nnf(f.args[0], neg))
    if op == UNTIL:
        a, b = f.args
        if not neg:
            return U(_nnf(a, False), _nnf(b, False))
        na, nb = _nnf(a, True), _nnf(b, True)
        return Or(U(nb, And(na, nb)), G(nb))
    if op == FINALLY:
        inner = _nnf(f.args[0], neg)
        return G(inner) if neg else F(inner)
    if op == GLOBALLY:
        inner = _nnf(f.args[0], neg)
        return F(inner) if neg else G(inner)
    raise AssertionError(op)


def is_nnf(f: Formula) -> bool:
    for g in subformulas(f):
        if g.op == IMPLIES:
            return False
        if g.op == NOT and g.args[0].op != ATOM:
            return False
    return True


def simple_cycle_translate(f: Formula) -> Formula:
    """Replace every EC by ECs in a formula already in negation normal form."""
    if not is_nnf(f):
        raise FormulaError("simple cycle translation needs a formula in negation normal form")
    return _to_simple(f)


def _to_simple(f: Formula) -> Formula:
    args = tuple(_to_simple(a) for a in f.args)
    op = SIMPLE_EXISTS_CYCLE if f.op == EXISTS_CYCLE else f.op
    return Formula(op, args, f.name)
