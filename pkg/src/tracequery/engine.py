"""Two-pass automaton search for satisfying subtraces.

Pass 1 feeds the trace forward into the automaton for "some suffix
satisfies f" and stops at the first accepting index, which is the
minimal end index ell of any satisfying subtrace in the current segment.
Pass 2 feeds letters backward from ell into the reversed automaton for f
and collects start indices; the first acceptable one found walking
backward is the maximal start k, i.e. the shortest admissible clip.
Start indices that violate the length bounds are skipped; if none fits,
the forward scan resumes at ell + 1, as it does after every returned
match.  Each find_first call therefore feeds at most twice the letters
it spans.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Union

from .abstraction import EpisodeStep
from .automata import (
    DEFAULT_STATE_BUDGET,
    eventually_cached,
    reversed_cached,
)
from .ltlf import Formula, Trace, check_vocabulary, format_formula, parse
from .querylang import SchemaError, StructuredQuery, to_ltlf, warn_contradiction

Query = Union[StructuredQuery, Formula, str]


@dataclass(frozen=True)
class ClipMatch:
    """A satisfying subtrace: letters k..ell (1-based, inclusive)."""

    trace_id: str
    k: int
    ell: int

    @property
    def length(self) -> int:
        return self.ell - self.k + 1


@dataclass(frozen=True)
class SearchConfig:
    min_len: int = 5
    max_len: int = 60
    max_results: int = 4
    sample_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not (1 <= self.min_len <= self.max_len):
            raise ValueError("need 1 <= min_len <= max_len")
        if self.max_results < 1:
            raise ValueError("max_results must be at least 1")


@dataclass
class SearchCounters:
    """Instrumentation: letters fed to automata, and per find_first call
    the pair (letters fed, letters spanned) for the two-pass bound."""

    letters_fed: int = 0
    matches: int = 0
    calls: list[tuple[int, int]] = field(default_factory=list)


def find_first(
    trace: Trace,
    f: Formula,
    start: int = 1,
    cfg: SearchConfig = SearchConfig(),
    trace_id: str = "trace",
    counters: Optional[SearchCounters] = None,
    max_states: int = DEFAULT_STATE_BUDGET,
) -> Optional[ClipMatch]:
    """First admissible match whose letters lie within trace[start..]."""
    n = len(trace)
    if not 1 <= start <= n:
        raise ValueError(f"start index {start} outside 1..{n}")

    fwd = eventually_cached(f, max_states)
    rev = reversed_cached(f, max_states)
    fwd_delta = fwd.delta
    fwd_accepting = fwd.accepting
    rev_delta = rev.delta
    rev_accepting = rev.accepting
    rev_initial = rev.initial

    fed = 0
    last_pos = start  # furthest 1-based index the forward pass has read
    result: Optional[ClipMatch] = None

    seg = start
    while seg <= n:
        # Pass 1: forward with the suffix-exists automaton, fresh per segment.
        (state,) = fwd.initial
        ell = None
        for i in range(seg, n + 1):
            state = fwd_delta[state][fwd.mask_of(trace[i - 1])][0]
            fed += 1
            last_pos = i
            if state in fwd_accepting:
                ell = i
                break
        if ell is None:
            break

        # Pass 2: backward with the reversed automaton, within bounds.
        low = max(seg, ell - cfg.max_len + 1)
        current: frozenset[int] = rev_initial
        k = ell
        while k >= low:
            mask = rev.mask_of(trace[k - 1])
            nxt: set[int] = set()
            for q in current:
                nxt.update(rev_delta[q][mask])
            fed += 1
            current = frozenset(nxt)
            if not current:
                break
            if ell - k + 1 >= cfg.min_len and not rev_accepting.isdisjoint(current):
                result = ClipMatch(trace_id, k, ell)
                break
            k -= 1
        if result is not None:
            break
        seg = ell + 1  # nothing admissible ends here; resume the forward scan

    if counters is not None:
        counters.letters_fed += fed
        counters.calls.append((fed, last_pos - start + 1))
        if result is not None:
            counters.matches += 1
    return result


def find_all(
    trace: Trace,
    f: Formula,
    cfg: SearchConfig = SearchConfig(),
    trace_id: str = "trace",
    counters: Optional[SearchCounters] = None,
    max_states: int = DEFAULT_STATE_BUDGET,
) -> list[ClipMatch]:
    """All matches in order, restarting after each match's end index."""
    out: list[ClipMatch] = []
    pos = 1
    while pos <= len(trace):
        m = find_first(trace, f, pos, cfg, trace_id, counters, max_states)
        if m is None:
            break
        out.append(m)
        pos = m.ell + 1
    return out


# ---------------------------------------------------------------------------
# Library-level querying

@dataclass(frozen=True)
class Clip:
    clip_id: str
    trace_id: str
    k: int
    ell: int
    frames: tuple[EpisodeStep, ...]


@dataclass
class QueryResult:
    clips: list[Clip]
    warnings: list[str]
    continuation: Optional[str]
    sample_seed: int
    total_matches: int
    formula: str
    timing: dict[str, float]
    counters: SearchCounters


def clip_id(trace_id: str, k: int, ell: int) -> str:
    return f"{trace_id}:{k}-{ell}"


def _query_hash(formula: Formula, cfg: SearchConfig) -> str:
    text = f"{format_formula(formula)}|{cfg.min_len}|{cfg.max_len}"
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def encode_continuation(qhash: str, seed: int, offset: int) -> str:
    payload = json.dumps({"q": qhash, "seed": seed, "offset": offset})
    return base64.urlsafe_b64encode(payload.encode()).decode()


def decode_continuation(token: str, qhash: str) -> tuple[int, int]:
    try:
        payload = json.loads(base64.urlsafe_b64decode(token.encode()))
        tok_hash, seed, offset = payload["q"], payload["seed"], payload["offset"]
    except (ValueError, KeyError, TypeError, binascii.Error) as exc:
        raise SchemaError("malformed continuation token", "continuation") from exc
    if tok_hash != qhash:
        raise SchemaError(
            "continuation token does not match this query", "continuation"
        )
    if not isinstance(seed, int) or not isinstance(offset, int) or offset < 0:
        raise SchemaError("malformed continuation token", "continuation")
    return seed, offset


def resolve_query(query: Query, library) -> tuple[Formula, list[str]]:
    """Turn a structured query, formula text, or formula into a checked
    formula plus any static-contradiction warnings."""
    names = [p.name for p in library.vocab]
    if isinstance(query, StructuredQuery):
        return to_ltlf(query), warn_contradiction(query, library.vocab)
    if isinstance(query, str):
        return parse(query, vocab=names), []
    check_vocabulary(query, names)
    return query, []


def run_query(
    library,
    query: Query,
    cfg: SearchConfig = SearchConfig(),
    continuation: Optional[str] = None,
    max_states: int = DEFAULT_STATE_BUDGET,
) -> QueryResult:
    """Search every trace in the library, pool the matches, and return a
    seeded random sample of at most cfg.max_results clips.

    The continuation token pins (query, seed, offset), so load-more is
    stateless and repeatable; with no seed given, one is drawn from
    entropy and reported back in the result.
    """
    if not library.episodes:
        raise ValueError("library has no episodes")
    formula, warnings = resolve_query(query, library)

    t0 = time.perf_counter()
    eventually_cached(formula, max_states)
    reversed_cached(formula, max_states)
    compile_s = time.perf_counter() - t0

    qhash = _query_hash(formula, cfg)
    seed = cfg.sample_seed
    offset = 0
    if continuation is not None:
        seed, offset = decode_continuation(continuation, qhash)
    if seed is None:
        seed = random.SystemRandom().randrange(2**31)

    counters = SearchCounters()
    t0 = time.perf_counter()
    matches: list[ClipMatch] = []
    for trace_id in sorted(library.episodes):
        episode = library.episodes[trace_id]
        matches.extend(
            find_all(
                episode.letters, formula, cfg, trace_id, counters, max_states
            )
        )
    search_s = time.perf_counter() - t0

    order = list(matches)
    random.Random(seed).shuffle(order)
    page = order[offset : offset + cfg.max_results]

    t0 = time.perf_counter()
    clips = [
        Clip(
            clip_id=clip_id(m.trace_id, m.k, m.ell),
            trace_id=m.trace_id,
            k=m.k,
            ell=m.ell,
            frames=library.episodes[m.trace_id].steps[m.k - 1 : m.ell],
        )
        for m in page
    ]
    render_s = time.perf_counter() - t0

    next_offset = offset + len(page)
    token = (
        encode_continuation(qhash, seed, next_offset)
        if next_offset < len(order)
        else None
    )
    return QueryResult(
        clips=clips,
        warnings=warnings,
        continuation=token,
        sample_seed=seed,
        total_matches=len(order),
        formula=format_formula(formula),
        timing={"compile_s": compile_s, "search_s": search_s, "render_s": render_s},
        counters=counters,
    )
