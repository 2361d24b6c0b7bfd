"""Seeded randomized verification suites.

These are the independent oracles behind the test suite, exposed through
the CLI `selfcheck` subcommand as well: automaton acceptance against the
direct evaluator, the reversal law against mirrored words, and the
two-pass search against an exhaustive window scan that reuses only the
evaluator's semantics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .abstraction import SimConfig, simulate
from .automata import compile_cached, reverse
from .engine import ClipMatch, SearchConfig, SearchCounters, find_all
from .ltlf import (
    FALSE,
    TRUE,
    Always,
    And,
    Eventually,
    Formula,
    Letter,
    Next,
    Not,
    Or,
    Pred,
    Trace,
    Until,
    evaluate,
    format_formula,
    suffix_verdicts,
)
from .querylang import Constraint, Literal, StructuredQuery, to_ltlf


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.failures)} FAILED"
        return f"{self.name}: {self.cases} cases, {status}"


# ---------------------------------------------------------------------------
# Random generators

def random_formula(
    rng: random.Random, max_depth: int = 4, preds: tuple[str, ...] = ("p", "q", "r")
) -> Formula:
    if max_depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.8:
            return Pred(rng.choice(preds))
        return TRUE if roll < 0.9 else FALSE
    op = rng.choice(("not", "and", "or", "next", "until", "eventually", "always"))
    a = random_formula(rng, max_depth - 1, preds)
    if op == "not":
        return Not(a)
    if op == "next":
        return Next(a)
    if op == "eventually":
        return Eventually(a)
    if op == "always":
        return Always(a)
    b = random_formula(rng, max_depth - 1, preds)
    return {"and": And, "or": Or, "until": Until}[op](a, b)


def random_trace(
    rng: random.Random, max_len: int = 8, preds: tuple[str, ...] = ("p", "q", "r")
) -> list[Letter]:
    length = rng.randint(1, max_len)
    return [
        frozenset(p for p in preds if rng.random() < 0.5) for _ in range(length)
    ]


# ---------------------------------------------------------------------------
# Oracle suites

def oracle_equivalence_suite(cases: int = 1000, seed: int = 2024) -> SuiteResult:
    """Automaton acceptance must equal direct evaluation."""
    rng = random.Random(seed)
    result = SuiteResult("oracle-equivalence", cases)
    for _ in range(cases):
        f = random_formula(rng)
        trace = random_trace(rng)
        expected = evaluate(f, trace)
        got = compile_cached(f).accepts(trace)
        if expected != got:
            result.failures.append(
                f"{format_formula(f)} on {[sorted(s) for s in trace]}: "
                f"evaluate={expected} automaton={got}"
            )
    return result


def reversal_suite(cases: int = 1000, seed: int = 4096) -> SuiteResult:
    """reverse(A) accepts w exactly when A accepts the mirror of w."""
    rng = random.Random(seed)
    result = SuiteResult("reversal-law", cases)
    for _ in range(cases):
        f = random_formula(rng)
        word = random_trace(rng)
        aut = compile_cached(f)
        rev = reverse(aut)
        if rev.accepts(word) != aut.accepts(list(reversed(word))):
            result.failures.append(
                f"{format_formula(f)} on {[sorted(s) for s in word]}"
            )
        if reverse(rev).accepts(word) != aut.accepts(word):
            result.failures.append(
                f"double reversal of {format_formula(f)} "
                f"on {[sorted(s) for s in word]}"
            )
    return result


# ---------------------------------------------------------------------------
# Brute-force search oracle

def window_verdicts(f: Formula, trace: Trace, ell: int) -> list[bool]:
    """For a fixed window end `ell` (1-based), the verdict of f on every
    window k..ell, k = 1..ell; entry [k-1] is evaluate(f, trace[k-1:ell])."""
    return suffix_verdicts(f, trace[:ell])


def brute_force_matches(
    trace: Trace, f: Formula, cfg: SearchConfig, trace_id: str = "trace"
) -> list[ClipMatch]:
    """Exhaustive reference for find_all: per restart segment, the minimal
    end index with any satisfying window, then the maximal start index
    among those within the length bounds."""
    n = len(trace)
    out: list[ClipMatch] = []
    seg = 1
    while seg <= n:
        advanced = False
        for ell in range(seg, n + 1):
            verdicts = window_verdicts(f, trace, ell)
            ks = [k for k in range(seg, ell + 1) if verdicts[k - 1]]
            if not ks:
                continue
            admissible = [
                k for k in ks if cfg.min_len <= ell - k + 1 <= cfg.max_len
            ]
            if admissible:
                out.append(ClipMatch(trace_id, max(admissible), ell))
            seg = ell + 1
            advanced = True
            break
        if not advanced:
            break
    return out


# ---------------------------------------------------------------------------
# Pattern-query search suite

_LANES = ("lane-1", "lane-2", "lane-3", "lane-4")
_RELATIONS = ("behind", "in-front", "above", "below")


def random_pattern_query(rng: random.Random) -> StructuredQuery:
    def component() -> tuple[Literal, ...]:
        literals = []
        if rng.random() < 0.6:
            literals.append(Literal(rng.choice(_LANES)))
        if rng.random() < 0.5:
            literals.append(Literal(rng.choice(_RELATIONS), rng.random() < 0.25))
        return tuple(literals)

    def constraint_formula() -> tuple[Literal, ...]:
        if rng.random() < 0.5:
            return (Literal(rng.choice(_RELATIONS), rng.random() < 0.3),)
        return (Literal(rng.choice(_LANES)),)

    kind = rng.choice((None, "changes", "stays_constant", "changes_into"))
    constraint = None
    if kind is not None:
        c = constraint_formula()
        c_prime = None
        if kind == "changes_into":
            c_prime = constraint_formula()
            while set(c_prime) == set(c):
                c_prime = constraint_formula()
        constraint = Constraint(kind=kind, c=c, c_prime=c_prime)
    return StructuredQuery(start=component(), end=component(), constraint=constraint)


def _sample_traces(seed: int, count: int, steps: int) -> list[list[Letter]]:
    cfg = SimConfig(steps=steps, npc_count=5)
    traces = []
    for i in range(count):
        kind = ("plain", "toplane", "dual-trigger")[i % 3]
        traces.append(simulate(cfg, seed + i, kind, f"ep-{i}").letters)
    return traces


def search_suite(
    queries: int = 60,
    seed: int = 99,
    trace_len: int = 30,
    trace_count: int = 6,
) -> SuiteResult:
    """find_all against the exhaustive oracle on short traces: same match
    lists (existence, minimal end per segment, maximal admissible start),
    every returned clip's letters satisfy the formula, and every
    find_first call feeds at most twice the letters it spans."""
    rng = random.Random(seed)
    traces = _sample_traces(seed, trace_count, trace_len)
    cfg = SearchConfig(min_len=1, max_len=trace_len)
    result = SuiteResult("two-pass-search", queries * len(traces))
    for _ in range(queries):
        query = random_pattern_query(rng)
        formula = to_ltlf(query)
        for t_index, trace in enumerate(traces):
            counters = SearchCounters()
            got = find_all(trace, formula, cfg, f"t{t_index}", counters)
            expected = brute_force_matches(trace, formula, cfg, f"t{t_index}")
            if got != expected:
                result.failures.append(
                    f"{format_formula(formula)} on trace {t_index}: "
                    f"engine={[(m.k, m.ell) for m in got]} "
                    f"oracle={[(m.k, m.ell) for m in expected]}"
                )
                continue
            for m in got:
                if not evaluate(formula, trace[m.k - 1 : m.ell]):
                    result.failures.append(
                        f"unsound clip ({m.k},{m.ell}) for {format_formula(formula)}"
                    )
            for fed, spanned in counters.calls:
                if fed > 2 * spanned:
                    result.failures.append(
                        f"two-pass bound violated: fed {fed} > 2*{spanned} "
                        f"for {format_formula(formula)}"
                    )
    return result


def run_all(fast: bool = False) -> list[SuiteResult]:
    scale = 0.2 if fast else 1.0
    return [
        oracle_equivalence_suite(cases=int(1000 * scale) or 100),
        reversal_suite(cases=int(1000 * scale) or 100),
        search_suite(queries=int(60 * scale) or 12),
    ]
