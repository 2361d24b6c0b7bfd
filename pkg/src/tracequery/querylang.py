"""Structured query templates and their translation to temporal formulas.

A query constrains the first frame, the last frame, and optionally the
stretch in between ("changes", "stays constant", "changes into").  Each
component is a conjunction of predicate literals, which is exactly what
a drop-down interface can express.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .abstraction import PredicateDef
from .ltlf import (
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Next,
    Not,
    Pred,
    Until,
    UnknownPredicateError,
)

CONSTRAINT_KINDS = ("changes", "stays_constant", "changes_into")


class SchemaError(ValueError):
    """A malformed wire-level query; `field` names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
        self.detail = message


@dataclass(frozen=True)
class Literal:
    name: str
    negated: bool = False

    def __str__(self) -> str:
        return ("!" if self.negated else "") + self.name


PropFormula = tuple[Literal, ...]  # conjunction; empty means True


@dataclass(frozen=True)
class Constraint:
    kind: str
    c: PropFormula
    c_prime: Optional[PropFormula] = None


@dataclass(frozen=True)
class StructuredQuery:
    start: PropFormula = ()
    end: PropFormula = ()
    constraint: Optional[Constraint] = None


def _literal_formula(lit: Literal) -> Formula:
    return Not(Pred(lit.name)) if lit.negated else Pred(lit.name)


def _conjoin(parts: Sequence[Formula]) -> Formula:
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def _prop(prop: PropFormula) -> Formula:
    return _conjoin([_literal_formula(lit) for lit in prop])


def to_ltlf(q: StructuredQuery) -> Formula:
    """Temporal formula for a query, following the template encodings.

    For constraint c between start s and end e:
      changes:       (s & c) & F !c & F G e
      stays_constant:(s & c) & X (c U e)
      changes_into:  (s & c & !c') & F (!c & c') & F G e
    and with no constraint simply  s & F G e.  Empty components are True
    and their conjuncts are dropped where that is semantics-preserving
    (F G true is true on every nonempty trace; X (c U true) is not
    dropped since it still requires a second frame).
    """
    parts: list[Formula] = [_literal_formula(lit) for lit in q.start]
    con = q.constraint
    end_term: Optional[Formula] = (
        Eventually(Always(_prop(q.end))) if q.end else None
    )

    if con is None:
        pass
    elif con.kind == "stays_constant":
        parts.extend(_literal_formula(lit) for lit in con.c)
        parts.append(Next(Until(_prop(con.c), _prop(q.end))))
        end_term = None  # the Until clause already pins the end frame
    elif con.kind == "changes":
        parts.extend(_literal_formula(lit) for lit in con.c)
        parts.append(Eventually(Not(_prop(con.c))))
    elif con.kind == "changes_into":
        assert con.c_prime is not None
        parts.extend(_literal_formula(lit) for lit in con.c)
        parts.append(Not(_prop(con.c_prime)))
        parts.append(Eventually(And(Not(_prop(con.c)), _prop(con.c_prime))))
    else:
        raise SchemaError(f"unknown constraint kind {con.kind!r}", "constraint.kind")

    if end_term is not None:
        parts.append(end_term)
    return _conjoin(parts)


# ---------------------------------------------------------------------------
# Wire-level validation

def _parse_literals(
    value: object, field: str, names: set[str]
) -> PropFormula:
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)):
        raise SchemaError("expected a list of literal strings", field)
    literals = []
    for i, item in enumerate(value):
        if not isinstance(item, str) or not item:
            raise SchemaError("literal must be a nonempty string", f"{field}[{i}]")
        negated = item.startswith("!")
        name = item[1:] if negated else item
        if name not in names:
            raise UnknownPredicateError(name)
        literals.append(Literal(name, negated))
    return tuple(literals)


def validate(raw: object, vocab: Iterable[PredicateDef]) -> StructuredQuery:
    """Schema-check a wire-level query body and resolve predicate names."""
    names = {p.name for p in vocab}
    if not isinstance(raw, dict):
        raise SchemaError("query must be an object")

    start = _parse_literals(raw.get("start"), "start", names)
    end = _parse_literals(raw.get("end"), "end", names)

    rawcon = raw.get("constraint")
    constraint = None
    if rawcon is not None:
        if not isinstance(rawcon, dict):
            raise SchemaError("expected an object or null", "constraint")
        kind = rawcon.get("kind")
        if kind not in CONSTRAINT_KINDS:
            raise SchemaError(
                f"kind must be one of {', '.join(CONSTRAINT_KINDS)}",
                "constraint.kind",
            )
        c = _parse_literals(rawcon.get("c"), "constraint.c", names)
        if not c:
            raise SchemaError("constraint formula must be nonempty", "constraint.c")
        c_prime = None
        if kind == "changes_into":
            if rawcon.get("c_prime") is None:
                raise SchemaError(
                    "changes_into requires c_prime", "constraint.c_prime"
                )
            c_prime = _parse_literals(
                rawcon.get("c_prime"), "constraint.c_prime", names
            )
            if not c_prime:
                raise SchemaError(
                    "constraint formula must be nonempty", "constraint.c_prime"
                )
            if set(c_prime) == set(c):
                raise SchemaError(
                    "c_prime must differ from c", "constraint.c_prime"
                )
        elif rawcon.get("c_prime") is not None:
            raise SchemaError(
                "c_prime is only valid for changes_into", "constraint.c_prime"
            )
        constraint = Constraint(kind=kind, c=c, c_prime=c_prime)

    return StructuredQuery(start=start, end=end, constraint=constraint)


# ---------------------------------------------------------------------------
# Static contradiction warnings

def _component_warnings(
    label: str, prop: PropFormula, vocab: list[PredicateDef]
) -> list[str]:
    warnings = []
    exclusive_groups = ("lane", "action")
    group_of = {p.name: p.group for p in vocab}
    for group in exclusive_groups:
        positives = sorted(
            {lit.name for lit in prop if not lit.negated and group_of.get(lit.name) == group}
        )
        if len(positives) > 1:
            warnings.append(
                f"{label}: {' and '.join(positives)} cannot hold together"
            )
    seen = {lit for lit in prop}
    for lit in sorted(seen, key=str):
        if not lit.negated and Literal(lit.name, True) in seen:
            warnings.append(f"{label}: {lit.name} and !{lit.name} contradict")
    return warnings


def warn_contradiction(
    q: StructuredQuery, vocab: list[PredicateDef]
) -> list[str]:
    """Flag statically unsatisfiable components.  Warnings never block a
    query; a contradictory one simply matches nothing."""
    warnings = []
    warnings += _component_warnings("start", q.start, vocab)
    warnings += _component_warnings("end", q.end, vocab)
    if q.constraint is not None:
        warnings += _component_warnings("constraint.c", q.constraint.c, vocab)
        if q.constraint.c_prime is not None:
            warnings += _component_warnings(
                "constraint.c_prime", q.constraint.c_prime, vocab
            )
    return warnings
