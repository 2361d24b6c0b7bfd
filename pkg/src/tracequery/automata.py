"""Finite automata over predicate letters, compiled by formula progression.

The effective alphabet of a formula is the powerset of the predicates it
mentions; concrete letters act on the automaton only through that
projection.  Letters are encoded internally as bitmasks over the
effective predicates, which keeps stepping cheap on long traces.  Guards
on transitions are stored as propositional formulas in disjunctive
normal form (one full literal conjunction per letter class, merged per
target) so automata can be inspected and reversed symbolically.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

from .ltlf import (
    TRUE,
    And,
    Eventually,
    FalseFormula,
    Formula,
    Letter,
    Not,
    Or,
    Pred,
    Trace,
    TrueFormula,
    accept_at_end,
    expand,
    format_formula,
    predicates,
    progress,
    simplify,
)

DEFAULT_STATE_BUDGET = 4096


class StateBudgetExceeded(RuntimeError):
    """Progression closure grew past the configured cap."""

    def __init__(self, formula: Formula, budget: int):
        super().__init__(
            f"automaton for {format_formula(formula)!r} exceeds {budget} states"
        )
        self.budget = budget


@dataclass(frozen=True)
class SymbolicAutomaton:
    """States are indexed; each carries its residual formula as a label.

    `delta[state][mask]` lists successor states for the letter class
    `mask` (bit j set iff effective_predicates[j] is in the letter).
    Forward-compiled automata are deterministic (every cell is a
    singleton); reversed automata generally are not.
    """

    labels: tuple[Formula, ...]
    transitions: tuple[tuple[int, Formula, int], ...]
    initial: frozenset[int]
    accepting: frozenset[int]
    effective_predicates: tuple[str, ...]
    deterministic: bool
    delta: tuple[tuple[tuple[int, ...], ...], ...]

    def __len__(self) -> int:
        return len(self.labels)

    def mask_of(self, sigma: Letter) -> int:
        """Projection of a concrete letter onto the effective alphabet."""
        m = 0
        for j, p in enumerate(self.effective_predicates):
            if p in sigma:
                m |= 1 << j
        return m

    def step(self, current: frozenset[int], sigma: Letter) -> frozenset[int]:
        """Subset step; the empty set is a dead configuration and stays dead."""
        mask = self.mask_of(sigma)
        out: set[int] = set()
        for q in current:
            out.update(self.delta[q][mask])
        return frozenset(out)

    def is_accepting(self, current: Iterable[int]) -> bool:
        return not self.accepting.isdisjoint(current)

    def accepts(self, word: Trace) -> bool:
        cur = self.initial
        for sigma in word:
            cur = self.step(cur, sigma)
            if not cur:
                return False
        return self.is_accepting(cur)


def _mask_letter(mask: int, preds: tuple[str, ...]) -> Letter:
    return frozenset(p for j, p in enumerate(preds) if mask >> j & 1)


def _mask_guard(mask: int, preds: tuple[str, ...]) -> Formula:
    """Full literal conjunction describing one letter class."""
    literals = [
        Pred(p) if mask >> j & 1 else Not(Pred(p)) for j, p in enumerate(preds)
    ]
    if not literals:
        return TRUE
    out = literals[-1]
    for lit in reversed(literals[:-1]):
        out = And(lit, out)
    return out


def _merge_guard(masks: list[int], preds: tuple[str, ...], n_masks: int) -> Formula:
    if len(masks) == n_masks:
        return TRUE
    terms = [_mask_guard(m, preds) for m in sorted(masks)]
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Or(t, out)
    return out


def guard_masks(guard: Formula, preds: tuple[str, ...]) -> set[int]:
    """Decode a stored guard back into its set of letter classes."""
    if isinstance(guard, TrueFormula):
        return set(range(1 << len(preds)))
    index = {p: j for j, p in enumerate(preds)}
    masks: set[int] = set()
    for term in _flat(guard, Or):
        mask = 0
        seen: set[str] = set()
        for lit in _flat(term, And):
            match lit:
                case Pred(name):
                    mask |= 1 << index[name]
                    seen.add(name)
                case Not(Pred(name)):
                    seen.add(name)
                case _:
                    raise ValueError(f"not a guard literal: {lit}")
        if seen != set(preds):
            raise ValueError(f"guard term does not cover all predicates: {term}")
        masks.add(mask)
    return masks


def _flat(f: Formula, op: type) -> list[Formula]:
    if isinstance(f, op):
        return _flat(f.left, op) + _flat(f.right, op)
    return [f]


def guard_satisfied(guard: Formula, sigma: Letter) -> bool:
    """Propositional evaluation of a guard against a concrete letter."""
    match guard:
        case TrueFormula():
            return True
        case FalseFormula():
            return False
        case Pred(name):
            return name in sigma
        case Not(g):
            return not guard_satisfied(g, sigma)
        case And(a, b):
            return guard_satisfied(a, sigma) and guard_satisfied(b, sigma)
        case Or(a, b):
            return guard_satisfied(a, sigma) or guard_satisfied(b, sigma)
    raise ValueError(f"not a propositional guard: {guard}")


def compile_formula(
    f: Formula, max_states: int = DEFAULT_STATE_BUDGET
) -> SymbolicAutomaton:
    """Deterministic automaton accepting exactly the traces satisfying `f`.

    Explores the closure of progress() from the sugar-expanded,
    canonically simplified formula over all letter classes of the
    effective alphabet.
    """
    root = simplify(expand(f))
    preds = tuple(sorted(predicates(f)))
    n_masks = 1 << len(preds)
    class_letters = [_mask_letter(m, preds) for m in range(n_masks)]

    index: dict[Formula, int] = {root: 0}
    labels: list[Formula] = [root]
    rows: list[list[int]] = []
    i = 0
    while i < len(labels):
        g = labels[i]
        row: list[int] = []
        for m in range(n_masks):
            h = progress(g, class_letters[m])
            t = index.get(h)
            if t is None:
                if len(labels) >= max_states:
                    raise StateBudgetExceeded(f, max_states)
                t = len(labels)
                index[h] = t
                labels.append(h)
            row.append(t)
        rows.append(row)
        i += 1

    accepting = frozenset(s for s, g in enumerate(labels) if accept_at_end(g))
    transitions: list[tuple[int, Formula, int]] = []
    for s, row in enumerate(rows):
        by_target: dict[int, list[int]] = {}
        for m, t in enumerate(row):
            by_target.setdefault(t, []).append(m)
        for t in sorted(by_target, key=lambda t: by_target[t][0]):
            transitions.append((s, _merge_guard(by_target[t], preds, n_masks), t))

    aut = SymbolicAutomaton(
        labels=tuple(labels),
        transitions=tuple(transitions),
        initial=frozenset({0}),
        accepting=accepting,
        effective_predicates=preds,
        deterministic=True,
        delta=tuple(tuple((t,) for t in row) for row in rows),
    )
    _check_guard_partition(aut)
    return aut


def _check_guard_partition(aut: SymbolicAutomaton) -> None:
    """Each state's out-guards must partition the effective-letter space."""
    n_masks = 1 << len(aut.effective_predicates)
    covered: dict[int, set[int]] = {s: set() for s in range(len(aut))}
    for s, guard, _t in aut.transitions:
        masks = guard_masks(guard, aut.effective_predicates)
        if covered[s] & masks:
            raise RuntimeError(f"overlapping guards out of state {s}")
        covered[s] |= masks
    for s, masks in covered.items():
        if len(masks) != n_masks:
            raise RuntimeError(f"guards out of state {s} do not cover the alphabet")


def reverse(aut: SymbolicAutomaton) -> SymbolicAutomaton:
    """Accepting states become initial, initial accepting, transitions flip.

    The result accepts exactly the mirror images of the original's words.
    Unreachable states are kept; subset stepping tolerates them.
    """
    n_masks = 1 << len(aut.effective_predicates)
    rev: list[list[set[int]]] = [
        [set() for _ in range(n_masks)] for _ in range(len(aut))
    ]
    for s, row in enumerate(aut.delta):
        for m, targets in enumerate(row):
            for t in targets:
                rev[t][m].add(s)
    delta = tuple(
        tuple(tuple(sorted(cell)) for cell in row) for row in rev
    )
    deterministic = len(aut.accepting) <= 1 and all(
        len(cell) <= 1 for row in delta for cell in row
    )
    return SymbolicAutomaton(
        labels=aut.labels,
        transitions=tuple((t, g, s) for s, g, t in aut.transitions),
        initial=aut.accepting,
        accepting=aut.initial,
        effective_predicates=aut.effective_predicates,
        deterministic=deterministic,
        delta=delta,
    )


def describe(aut: SymbolicAutomaton) -> str:
    """Plain-text adjacency listing with guard labels, for inspection."""
    lines = []
    for s, label in enumerate(aut.labels):
        tags = "".join(
            [" [initial]" if s in aut.initial else "",
             " [accepting]" if s in aut.accepting else ""]
        )
        lines.append(f"state {s}{tags}: {format_formula(label)}")
        for src, guard, t in aut.transitions:
            if src == s:
                lines.append(f"  --{format_formula(guard)}--> {t}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Per-process cache, keyed by canonical formula text.

_cache_lock = threading.Lock()
_forward_cache: dict[tuple[str, int], SymbolicAutomaton] = {}
_reversed_cache: dict[tuple[str, int], SymbolicAutomaton] = {}


def _canonical_key(f: Formula) -> str:
    return format_formula(simplify(expand(f)))


def compile_cached(
    f: Formula, max_states: int = DEFAULT_STATE_BUDGET
) -> SymbolicAutomaton:
    key = (_canonical_key(f), max_states)
    with _cache_lock:
        hit = _forward_cache.get(key)
    if hit is not None:
        return hit
    aut = compile_formula(f, max_states)
    with _cache_lock:
        return _forward_cache.setdefault(key, aut)


def reversed_cached(
    f: Formula, max_states: int = DEFAULT_STATE_BUDGET
) -> SymbolicAutomaton:
    key = (_canonical_key(f), max_states)
    with _cache_lock:
        hit = _reversed_cache.get(key)
    if hit is not None:
        return hit
    aut = reverse(compile_cached(f, max_states))
    with _cache_lock:
        return _reversed_cache.setdefault(key, aut)


def eventually_cached(
    f: Formula, max_states: int = DEFAULT_STATE_BUDGET
) -> SymbolicAutomaton:
    """Automaton for 'some suffix satisfies f' (the forward search pass)."""
    return compile_cached(Eventually(f), max_states)


def clear_cache() -> None:
    with _cache_lock:
        _forward_cache.clear()
        _reversed_cache.clear()
