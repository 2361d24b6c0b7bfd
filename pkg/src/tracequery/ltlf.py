"""Linear temporal logic over finite, nonempty traces.

Formulas are immutable trees with structural equality, so they can serve
as dictionary keys (the automaton builder relies on this).  The module
provides a text parser, a canonical printer, a direct dynamic-programming
evaluator, and the letter-by-letter progression calculus that the
automaton construction is built on.

Concrete grammar (atoms bind tightest, `|` loosest)::

    formula := disj
    disj    := conj ('|' disj)?
    conj    := until ('&' conj)?
    until   := unary ('U' until)?
    unary   := ('!' | 'X' | 'F' | 'G') unary | atom
    atom    := 'true' | 'false' | ident | '(' formula ')'
    ident   := [a-z0-9_-]+

`&`, `|` and `U` associate to the right; the binary operators are
semantically associative, so this only matters for exact tree shapes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Letter = frozenset[str]
Trace = Sequence[Letter]


def letter(*names: str) -> Letter:
    """Convenience constructor for a trace letter."""
    return frozenset(names)


class FormulaSyntaxError(ValueError):
    """Raised by parse() with the offending character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownPredicateError(ValueError):
    """A predicate name that is not part of the active vocabulary."""

    def __init__(self, name: str):
        super().__init__(f"unknown predicate: {name!r}")
        self.name = name


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True, slots=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Pred(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class Always(Formula):
    operand: Formula


TRUE = TrueFormula()
FALSE = FalseFormula()


def _children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case And(a, b) | Or(a, b) | Until(a, b):
            return (a, b)
        case Not(g) | Next(g) | Eventually(g) | Always(g):
            return (g,)
        case _:
            return ()


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas in bottom-up (children first) order."""
    seen: set[Formula] = set()
    out: list[Formula] = []

    def walk(g: Formula) -> None:
        if g in seen:
            return
        seen.add(g)
        for c in _children(g):
            walk(c)
        out.append(g)

    walk(f)
    return out


def predicates(f: Formula) -> set[str]:
    """Names of all predicates occurring in the formula."""
    return {g.name for g in subformulas(f) if isinstance(g, Pred)}


def check_vocabulary(f: Formula, vocab: Iterable[str]) -> None:
    """Raise UnknownPredicateError for any predicate outside `vocab`."""
    known = set(vocab)
    for name in sorted(predicates(f)):
        if name not in known:
            raise UnknownPredicateError(name)


# ---------------------------------------------------------------------------
# Printing

_PREC_OR = 1
_PREC_AND = 2
_PREC_UNTIL = 3
_PREC_UNARY = 4
_PREC_ATOM = 5


def format_formula(f: Formula) -> str:
    """Canonical text form; parse(format_formula(f)) == f."""
    return _fmt(f, 0)


def _fmt(f: Formula, need: int) -> str:
    match f:
        case TrueFormula():
            level, s = _PREC_ATOM, "true"
        case FalseFormula():
            level, s = _PREC_ATOM, "false"
        case Pred(name):
            level, s = _PREC_ATOM, name
        case Not(g):
            level, s = _PREC_UNARY, "!" + _fmt(g, _PREC_UNARY)
        case Next(g):
            level, s = _PREC_UNARY, "X " + _fmt(g, _PREC_UNARY)
        case Eventually(g):
            level, s = _PREC_UNARY, "F " + _fmt(g, _PREC_UNARY)
        case Always(g):
            level, s = _PREC_UNARY, "G " + _fmt(g, _PREC_UNARY)
        case Until(a, b):
            level = _PREC_UNTIL
            s = _fmt(a, _PREC_UNTIL + 1) + " U " + _fmt(b, _PREC_UNTIL)
        case And(a, b):
            level = _PREC_AND
            s = _fmt(a, _PREC_AND + 1) + " & " + _fmt(b, _PREC_AND)
        case Or(a, b):
            level = _PREC_OR
            s = _fmt(a, _PREC_OR + 1) + " | " + _fmt(b, _PREC_OR)
        case _:
            raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if level < need else s


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"[a-z0-9_-]+|[!&|()UXFG]")
_WS = re.compile(r"\s*")


class _Parser:
    def __init__(self, text: str, vocab: set[str] | None):
        self.text = text
        self.vocab = vocab
        self.pos = 0

    def error(self, message: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(message, self.pos)

    def peek(self) -> str | None:
        self.pos = _WS.match(self.text, self.pos).end()
        if self.pos >= len(self.text):
            return None
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            raise self.error(f"unexpected character {self.text[self.pos]!r}")
        return m.group()

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos += len(tok)
        return tok

    def parse(self) -> Formula:
        f = self.disj()
        if self.peek() is not None:
            raise self.error(f"unexpected token {self.peek()!r}")
        return f

    def disj(self) -> Formula:
        left = self.conj()
        if self.peek() == "|":
            self.take()
            return Or(left, self.disj())
        return left

    def conj(self) -> Formula:
        left = self.until()
        if self.peek() == "&":
            self.take()
            return And(left, self.conj())
        return left

    def until(self) -> Formula:
        left = self.unary()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok in ("!", "X", "F", "G"):
            self.take()
            inner = self.unary()
            return {"!": Not, "X": Next, "F": Eventually, "G": Always}[tok](inner)
        return self.atom()

    def atom(self) -> Formula:
        tok = self.take()
        if tok == "(":
            f = self.disj()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.take()
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if _TOKEN.fullmatch(tok) and tok[0] not in "!&|()UXFG":
            if self.vocab is not None and tok not in self.vocab:
                raise UnknownPredicateError(tok)
            return Pred(tok)
        raise self.error(f"unexpected token {tok!r}")


def parse(text: str, vocab: Iterable[str] | None = None) -> Formula:
    """Parse the documented grammar; optionally restrict predicate names."""
    if not text or not text.strip():
        raise FormulaSyntaxError("empty formula", 0)
    return _Parser(text, set(vocab) if vocab is not None else None).parse()


# ---------------------------------------------------------------------------
# Evaluation

def suffix_verdicts(f: Formula, trace: Trace) -> list[bool]:
    """Verdict of `f` on every suffix of the trace; entry i is
    evaluate(f, trace[i:]).

    Dynamic programming over (subformula, position), O(|f| * len(trace)).
    Until is strict: the left operand is required only before the
    position where the right operand fires.
    """
    k = len(trace)
    if k == 0:
        raise ValueError("trace must be nonempty")
    rows: dict[Formula, list[bool]] = {}
    for g in subformulas(f):
        row = [False] * k
        match g:
            case TrueFormula():
                row = [True] * k
            case FalseFormula():
                pass
            case Pred(name):
                row = [name in trace[i] for i in range(k)]
            case Not(a):
                sub = rows[a]
                row = [not v for v in sub]
            case And(a, b):
                ra, rb = rows[a], rows[b]
                row = [x and y for x, y in zip(ra, rb)]
            case Or(a, b):
                ra, rb = rows[a], rows[b]
                row = [x or y for x, y in zip(ra, rb)]
            case Next(a):
                sub = rows[a]
                row = [sub[i + 1] if i + 1 < k else False for i in range(k)]
            case Until(a, b):
                ra, rb = rows[a], rows[b]
                for i in range(k - 1, -1, -1):
                    row[i] = rb[i] or (ra[i] and i + 1 < k and row[i + 1])
            case Eventually(a):
                sub = rows[a]
                for i in range(k - 1, -1, -1):
                    row[i] = sub[i] or (i + 1 < k and row[i + 1])
            case Always(a):
                sub = rows[a]
                for i in range(k - 1, -1, -1):
                    row[i] = sub[i] and (i + 1 == k or row[i + 1])
        rows[g] = row
    return rows[f]


def evaluate(f: Formula, trace: Trace) -> bool:
    """Direct semantics of `f` on a nonempty trace."""
    return suffix_verdicts(f, trace)[0]


# ---------------------------------------------------------------------------
# Sugar expansion and canonical Boolean simplification

def expand(f: Formula) -> Formula:
    """Rewrite F and G into their Until definitions, recursively."""
    match f:
        case Eventually(g):
            return Until(TRUE, expand(g))
        case Always(g):
            return Not(Until(TRUE, Not(expand(g))))
        case Not(g):
            return Not(expand(g))
        case Next(g):
            return Next(expand(g))
        case And(a, b):
            return And(expand(a), expand(b))
        case Or(a, b):
            return Or(expand(a), expand(b))
        case Until(a, b):
            return Until(expand(a), expand(b))
        case _:
            return f


_sort_key = lru_cache(maxsize=65536)(format_formula)

# The Boolean skeleton of a residual is kept in canonical disjunctive
# normal form: an antichain of implicants, each implicant a set of atoms
# (an atom is anything not rooted in And/Or, with Not pushed down to
# atom level).  TRUE is the single empty implicant, FALSE the empty
# antichain.  Progression only ever produces atoms from the closure of
# the original formula, so this representation bounds residual growth.

_TRUE_DNF = frozenset({frozenset()})
_FALSE_DNF: frozenset[frozenset[Formula]] = frozenset()


def _atom_negation(atom: Formula) -> Formula:
    return atom.operand if isinstance(atom, Not) else Not(atom)


def _implicants(f: Formula) -> frozenset[frozenset[Formula]]:
    match f:
        case TrueFormula():
            return _TRUE_DNF
        case FalseFormula():
            return _FALSE_DNF
        case And(a, b):
            return _conj_dnf(_implicants(a), _implicants(b))
        case Or(a, b):
            return _prune(_implicants(a) | _implicants(b))
        case _:
            return frozenset({frozenset({f})})


def _conj_dnf(
    left: frozenset[frozenset[Formula]], right: frozenset[frozenset[Formula]]
) -> frozenset[frozenset[Formula]]:
    out = set()
    for a in left:
        for b in right:
            term = a | b
            if any(_atom_negation(atom) in term for atom in term):
                continue  # contradictory implicant
            out.add(term)
    return _prune(out)


def _prune(implicants: Iterable[frozenset[Formula]]) -> frozenset[frozenset[Formula]]:
    """Keep minimal implicants only; collapse {x} | {!x} to true."""
    by_size = sorted(implicants, key=len)
    minimal: list[frozenset[Formula]] = []
    for term in by_size:
        if not any(kept <= term for kept in minimal):
            minimal.append(term)
    units = {next(iter(t)) for t in minimal if len(t) == 1}
    if any(_atom_negation(u) in units for u in units):
        return _TRUE_DNF
    return frozenset(minimal)


def _reify(implicants: frozenset[frozenset[Formula]]) -> Formula:
    if implicants == _TRUE_DNF:
        return TRUE
    if not implicants:
        return FALSE
    terms = []
    for implicant in implicants:
        atoms = sorted(implicant, key=_sort_key)
        term = atoms[-1]
        for atom in reversed(atoms[:-1]):
            term = And(atom, term)
        terms.append(term)
    terms.sort(key=_sort_key)
    out = terms[-1]
    for term in reversed(terms[:-1]):
        out = Or(term, out)
    return out


def _and_all(parts: list[Formula]) -> Formula:
    dnf = _TRUE_DNF
    for p in parts:
        dnf = _conj_dnf(dnf, _implicants(p))
        if not dnf:
            return FALSE
    return _reify(dnf)


def _or_all(parts: list[Formula]) -> Formula:
    dnf: frozenset[frozenset[Formula]] = _FALSE_DNF
    for p in parts:
        dnf = dnf | _implicants(p)
    return _reify(_prune(dnf))


def _negate(f: Formula) -> Formula:
    """Negation pushed to atom level through the Boolean skeleton."""
    match f:
        case TrueFormula():
            return FALSE
        case FalseFormula():
            return TRUE
        case Not(g):
            return g
        case And(a, b):
            return _or_all([_negate(a), _negate(b)])
        case Or(a, b):
            return _and_all([_negate(a), _negate(b)])
        case _:
            return Not(f)


def simplify(f: Formula) -> Formula:
    """Canonical Boolean form: negation normal form at the Boolean level
    and the And/Or skeleton rebuilt as a sorted, deduplicated disjunction
    of minimal conjunctions (True/False absorbed, complementary pairs
    collapsed, subsumed conjunctions dropped).  Temporal operators are
    opaque atoms with their operands simplified recursively, which keeps
    the rewrite sound for end-of-trace acceptance as well as whole-trace
    semantics.
    """
    match f:
        case Not(g):
            return _negate(simplify(g))
        case And(a, b):
            return _and_all([simplify(a), simplify(b)])
        case Or(a, b):
            return _or_all([simplify(a), simplify(b)])
        case Next(g):
            return Next(simplify(g))
        case Until(a, b):
            return Until(simplify(a), simplify(b))
        case Eventually(g):
            return Eventually(simplify(g))
        case Always(g):
            return Always(simplify(g))
        case _:
            return f


# ---------------------------------------------------------------------------
# Progression

# "The remaining trace is nonempty": false once no positions remain,
# dissolves to true after any letter.  Progressing X g must keep this
# obligation whenever g alone would be satisfied at end of trace, because
# the strict Next demands that a successor position exists.
NONEMPTY = Until(TRUE, TRUE)


def progress(f: Formula, sigma: Letter) -> Formula:
    """Residual obligation on the rest of the trace after reading `sigma`.

    Requires sugar-expanded input (no F/G nodes); the result is in
    canonical simplified form so that equivalent residuals compare equal.
    """
    match f:
        case TrueFormula() | FalseFormula():
            return f
        case Pred(name):
            return TRUE if name in sigma else FALSE
        case Not(g):
            return _negate(progress(g, sigma))
        case And(a, b):
            return _and_all([progress(a, sigma), progress(b, sigma)])
        case Or(a, b):
            return _or_all([progress(a, sigma), progress(b, sigma)])
        case Next(g):
            return _and_all([g, NONEMPTY]) if accept_at_end(g) else g
        case Until(a, b):
            return _or_all(
                [progress(b, sigma), _and_all([progress(a, sigma), f])]
            )
        case _:
            raise ValueError(f"progress requires sugar-expanded input, got {f}")


def accept_at_end(f: Formula) -> bool:
    """Is the residual satisfied when no trace positions remain?"""
    match f:
        case TrueFormula():
            return True
        case FalseFormula() | Pred(_) | Next(_) | Until(_, _):
            return False
        case Not(g):
            return not accept_at_end(g)
        case And(a, b):
            return accept_at_end(a) and accept_at_end(b)
        case Or(a, b):
            return accept_at_end(a) or accept_at_end(b)
        case _:
            raise ValueError(f"accept_at_end requires sugar-expanded input, got {f}")
