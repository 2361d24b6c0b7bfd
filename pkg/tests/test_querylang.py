import itertools

import pytest

from tracequery.abstraction import default_vocab
from tracequery.ltlf import (
    Always,
    And,
    Eventually,
    Next,
    Not,
    Pred,
    UnknownPredicateError,
    Until,
    evaluate,
    format_formula,
)
from tracequery.querylang import (
    Constraint,
    Literal,
    SchemaError,
    StructuredQuery,
    to_ltlf,
    validate,
    warn_contradiction,
)

VOCAB = default_vocab(4)


def lits(*names):
    return tuple(Literal(n[1:], True) if n.startswith("!") else Literal(n) for n in names)


class TestEncodings:
    """The three constraint encodings, golden per template."""

    def test_stays_constant(self):
        q = StructuredQuery(
            start=lits("lane-1", "behind"),
            end=lits("lane-4"),
            constraint=Constraint("stays_constant", lits("behind")),
        )
        expected = And(
            Pred("lane-1"),
            And(
                Pred("behind"),
                And(
                    Pred("behind"),
                    Next(Until(Pred("behind"), Pred("lane-4"))),
                ),
            ),
        )
        assert to_ltlf(q) == expected
        assert format_formula(to_ltlf(q)) == (
            "lane-1 & behind & behind & X (behind U lane-4)"
        )

    def test_changes(self):
        q = StructuredQuery(
            start=lits("lane-1", "behind"),
            end=lits("lane-4"),
            constraint=Constraint("changes", lits("behind")),
        )
        expected = And(
            Pred("lane-1"),
            And(
                Pred("behind"),
                And(
                    Pred("behind"),
                    And(
                        Eventually(Not(Pred("behind"))),
                        Eventually(Always(Pred("lane-4"))),
                    ),
                ),
            ),
        )
        assert to_ltlf(q) == expected
        assert format_formula(to_ltlf(q)) == (
            "lane-1 & behind & behind & F !behind & F G lane-4"
        )

    def test_changes_into(self):
        q = StructuredQuery(
            start=lits("lane-1"),
            end=lits("lane-4"),
            constraint=Constraint("changes_into", lits("lane-1"), lits("lane-2")),
        )
        expected = And(
            Pred("lane-1"),
            And(
                Pred("lane-1"),
                And(
                    Not(Pred("lane-2")),
                    And(
                        Eventually(And(Not(Pred("lane-1")), Pred("lane-2"))),
                        Eventually(Always(Pred("lane-4"))),
                    ),
                ),
            ),
        )
        assert to_ltlf(q) == expected
        assert format_formula(to_ltlf(q)) == (
            "lane-1 & lane-1 & !lane-2 & F (!lane-1 & lane-2) & F G lane-4"
        )

    def test_no_constraint(self):
        q = StructuredQuery(start=lits("lane-1"), end=lits("lane-4"))
        assert format_formula(to_ltlf(q)) == "lane-1 & F G lane-4"

    def test_unconstrained_query_is_true(self):
        assert format_formula(to_ltlf(StructuredQuery())) == "true"

    def test_empty_end_keeps_next_clause(self):
        # X (c U true) still demands a second frame, so it is not dropped
        q = StructuredQuery(constraint=Constraint("stays_constant", lits("behind")))
        assert format_formula(to_ltlf(q)) == "behind & X (behind U true)"

    def test_negated_literals(self):
        q = StructuredQuery(start=lits("lane-1", "!behind"))
        assert format_formula(to_ltlf(q)) == "lane-1 & !behind"


class TestStaysConstantSemantics:
    def test_constraint_holds_until_end_component(self):
        """On every satisfying trace there is a position where the end
        formula holds, preceded everywhere by the constraint."""
        q = StructuredQuery(
            start=(),
            end=(Literal("q"),),
            constraint=Constraint("stays_constant", (Literal("p"),)),
        )
        formula = to_ltlf(q)
        alphabet = [frozenset(s) for s in ({}, {"p"}, {"q"}, {"p", "q"})]
        for length in range(1, 6):
            for combo in itertools.product(alphabet, repeat=length):
                trace = list(combo)
                if not evaluate(formula, trace):
                    continue
                assert "p" in trace[0]
                witnesses = [
                    m
                    for m in range(1, length)
                    if "q" in trace[m]
                    and all("p" in trace[j] for j in range(1, m))
                ]
                assert witnesses, trace


class TestValidate:
    def test_well_formed_body(self):
        q = validate(
            {
                "start": ["lane-1", "behind"],
                "end": ["lane-4"],
                "constraint": {"kind": "changes", "c": ["behind"]},
            },
            VOCAB,
        )
        assert q.start == lits("lane-1", "behind")
        assert q.constraint.kind == "changes"

    def test_negated_wire_literals(self):
        q = validate({"start": ["!behind"]}, VOCAB)
        assert q.start == (Literal("behind", True),)

    def test_missing_c_prime(self):
        with pytest.raises(SchemaError) as exc:
            validate(
                {"constraint": {"kind": "changes_into", "c": ["behind"]}}, VOCAB
            )
        assert exc.value.field == "constraint.c_prime"

    def test_unknown_predicate(self):
        with pytest.raises(UnknownPredicateError) as exc:
            validate({"start": ["lane-9"]}, VOCAB)
        assert exc.value.name == "lane-9"

    def test_bad_constraint_kind(self):
        with pytest.raises(SchemaError) as exc:
            validate({"constraint": {"kind": "wobbles", "c": ["behind"]}}, VOCAB)
        assert exc.value.field == "constraint.kind"

    def test_empty_constraint_formula(self):
        with pytest.raises(SchemaError) as exc:
            validate({"constraint": {"kind": "changes", "c": []}}, VOCAB)
        assert exc.value.field == "constraint.c"

    def test_changes_into_identical_components(self):
        with pytest.raises(SchemaError) as exc:
            validate(
                {
                    "constraint": {
                        "kind": "changes_into",
                        "c": ["behind"],
                        "c_prime": ["behind"],
                    }
                },
                VOCAB,
            )
        assert exc.value.field == "constraint.c_prime"

    def test_c_prime_outside_changes_into(self):
        with pytest.raises(SchemaError):
            validate(
                {
                    "constraint": {
                        "kind": "changes",
                        "c": ["behind"],
                        "c_prime": ["above"],
                    }
                },
                VOCAB,
            )

    def test_literal_type_errors(self):
        with pytest.raises(SchemaError) as exc:
            validate({"start": "lane-1"}, VOCAB)
        assert exc.value.field == "start"
        with pytest.raises(SchemaError) as exc:
            validate({"start": [1]}, VOCAB)
        assert exc.value.field == "start[0]"


class TestWarnings:
    def test_two_positive_lanes(self):
        q = StructuredQuery(start=lits("lane-1", "lane-2"))
        assert len(warn_contradiction(q, VOCAB)) == 1

    def test_literal_and_negation(self):
        q = StructuredQuery(start=lits("behind", "!behind"))
        assert len(warn_contradiction(q, VOCAB)) == 1

    def test_consistent_component(self):
        q = StructuredQuery(start=lits("lane-1", "behind"))
        assert warn_contradiction(q, VOCAB) == []

    def test_constraint_components_are_checked(self):
        q = StructuredQuery(
            constraint=Constraint("changes", lits("lane-1", "lane-3"))
        )
        warnings = warn_contradiction(q, VOCAB)
        assert len(warnings) == 1 and "constraint.c" in warnings[0]
