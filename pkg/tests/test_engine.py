import random

import pytest

from tracequery.engine import (
    SearchConfig,
    SearchCounters,
    decode_continuation,
    find_all,
    find_first,
    run_query,
)
from tracequery.ltlf import FALSE, TRUE, Pred, evaluate, letter, parse
from tracequery.querylang import Constraint, Literal, SchemaError, StructuredQuery
from tracequery.selfcheck import (
    brute_force_matches,
    random_pattern_query,
    search_suite,
)

WIDE = SearchConfig(min_len=1, max_len=60)


class TestFindFirst:
    def test_minimal_end_then_maximal_start(self):
        trace = [letter("lane-1"), letter("lane-1", "behind"), letter("lane-2")]
        m = find_first(trace, Pred("behind"), 1, WIDE)
        assert (m.k, m.ell) == (2, 2)

    def test_until_shortest_clip_tiebreak(self):
        trace = [letter("lane-1"), letter("lane-1"), letter("lane-1", "behind")]
        m = find_first(trace, parse("lane-1 U behind"), 1, WIDE)
        assert (m.k, m.ell) == (3, 3)

    def test_unsatisfiable_formula(self):
        trace = [letter("lane-1")] * 10
        assert find_first(trace, FALSE, 1, WIDE) is None

    def test_from_index_respected(self):
        trace = [letter("p"), letter(), letter("p")]
        m = find_first(trace, Pred("p"), 2, WIDE)
        assert (m.k, m.ell) == (3, 3)

    def test_from_index_validated(self):
        with pytest.raises(ValueError):
            find_first([letter()], TRUE, 0, WIDE)
        with pytest.raises(ValueError):
            find_first([letter()], TRUE, 2, WIDE)

    def test_min_len_extends_backward_scan(self):
        # first q at index 4; the backward pass skips the length-1 and
        # length-2 starts and settles on k=2
        trace = [letter(), letter("p"), letter("p"), letter("q"), letter()]
        cfg = SearchConfig(min_len=3, max_len=10)
        m = find_first(trace, parse("F q"), 1, cfg)
        assert (m.k, m.ell) == (2, 4)

    def test_min_len_can_rule_out_every_match(self):
        # every satisfying window ends at its own start index, so no
        # clip ever reaches the minimum length and each segment advances
        trace = [letter()] * 2 + [letter("p")] * 4 + [letter()] * 2
        cfg = SearchConfig(min_len=3, max_len=10)
        assert find_first(trace, parse("G p"), 1, cfg) is None

    def test_max_len_bounds_backward_scan(self):
        # only a long window satisfies: p at index 1, F q fires at index 9
        trace = [letter("p")] + [letter()] * 7 + [letter("q")]
        cfg = SearchConfig(min_len=1, max_len=5)
        assert find_first(trace, parse("p & F q"), 1, cfg) is None

    def test_resumes_forward_after_unprunable_end(self):
        # first q at index 3 only reachable from k=1 (length 3 > max 2);
        # the scan must resume and find the later pair
        trace = [letter("p"), letter(), letter("q"), letter("p"), letter("q")]
        cfg = SearchConfig(min_len=1, max_len=2)
        m = find_first(trace, parse("p & F q"), 1, cfg)
        assert (m.k, m.ell) == (4, 5)


class TestFindAll:
    def test_restart_after_each_match(self):
        trace = [letter(), letter("behind"), letter(), letter(), letter("behind"), letter()]
        ms = find_all(trace, Pred("behind"), WIDE)
        assert [(m.k, m.ell) for m in ms] == [(2, 2), (5, 5)]

    def test_true_matches_every_index(self):
        trace = [letter()] * 5
        ms = find_all(trace, TRUE, SearchConfig(min_len=1, max_len=60))
        assert [(m.k, m.ell) for m in ms] == [(i, i) for i in range(1, 6)]

    def test_no_match_is_empty_list(self):
        assert find_all([letter()] * 4, Pred("p"), WIDE) == []

    def test_counters_track_every_call(self):
        counters = SearchCounters()
        trace = [letter("p") if i % 3 == 0 else letter() for i in range(30)]
        matches = find_all(trace, Pred("p"), WIDE, counters=counters)
        assert counters.matches == len(matches)
        assert len(counters.calls) >= counters.matches
        assert counters.letters_fed == sum(fed for fed, _ in counters.calls)
        for fed, spanned in counters.calls:
            assert fed <= 2 * spanned


class TestAgainstBruteForce:
    def test_sample_traces_and_pattern_queries(self):
        result = search_suite(queries=40, seed=71)
        assert result.ok, result.failures[:5]

    def test_random_letter_traces(self):
        """Exact agreement with the window oracle on arbitrary traces."""
        rng = random.Random(73)
        preds = ("lane-1", "lane-2", "behind", "above")
        for _ in range(150):
            trace = [
                frozenset(p for p in preds if rng.random() < 0.4)
                for _ in range(rng.randint(1, 30))
            ]
            query = random_pattern_query(rng)
            from tracequery.querylang import to_ltlf

            f = to_ltlf(query)
            cfg = SearchConfig(min_len=1, max_len=30)
            got = find_all(trace, f, cfg)
            expected = brute_force_matches(trace, f, cfg)
            assert got == expected

    def test_bounded_search_against_oracle(self):
        rng = random.Random(79)
        for _ in range(100):
            trace = [
                frozenset(p for p in ("p", "q") if rng.random() < 0.5)
                for _ in range(rng.randint(1, 25))
            ]
            f = parse(rng.choice(["p", "p & F q", "p U q", "G p", "X p"]))
            cfg = SearchConfig(
                min_len=rng.randint(1, 4), max_len=rng.randint(4, 12)
            )
            assert find_all(trace, f, cfg) == brute_force_matches(trace, f, cfg)


class TestRunQuery:
    def test_start_component_pins_first_frame(self, dual_library):
        q = StructuredQuery(start=(Literal("lane-2"), Literal("above")))
        result = run_query(
            dual_library, q, SearchConfig(min_len=1, max_len=60, sample_seed=5)
        )
        assert result.clips
        for clip in result.clips:
            assert {"lane-2", "above"} <= clip.frames[0].letter

    def test_seeded_sampling_is_reproducible(self, small_library):
        q = StructuredQuery(end=(Literal("lane-1"),))
        cfg = SearchConfig(min_len=1, max_len=60, sample_seed=42)
        r1 = run_query(small_library, q, cfg)
        r2 = run_query(small_library, q, cfg)
        assert [c.clip_id for c in r1.clips] == [c.clip_id for c in r2.clips]
        assert r1.sample_seed == 42

    def test_entropy_seed_reported_back(self, small_library):
        q = StructuredQuery()
        r = run_query(small_library, q, SearchConfig(min_len=1, max_len=60))
        assert isinstance(r.sample_seed, int)
        replay = run_query(
            small_library,
            q,
            SearchConfig(min_len=1, max_len=60, sample_seed=r.sample_seed),
        )
        assert [c.clip_id for c in replay.clips] == [c.clip_id for c in r.clips]

    def test_contradiction_returns_empty_with_warning(self, small_library):
        q = StructuredQuery(start=(Literal("lane-1"), Literal("lane-2")))
        result = run_query(small_library, q, SearchConfig(sample_seed=3))
        assert result.clips == []
        assert result.total_matches == 0
        assert result.warnings

    def test_clip_soundness_oracle(self, small_library):
        """Every returned clip's letters satisfy the query formula."""
        rng = random.Random(83)
        for _ in range(30):
            query = random_pattern_query(rng)
            result = run_query(
                small_library, query, SearchConfig(min_len=1, max_len=40, sample_seed=9)
            )
            from tracequery.querylang import to_ltlf

            f = to_ltlf(query)
            for clip in result.clips:
                assert evaluate(f, [fr.letter for fr in clip.frames])

    def test_raw_formula_queries(self, small_library):
        result = run_query(
            small_library, "F behind", SearchConfig(min_len=1, sample_seed=1)
        )
        assert result.formula == "F behind"
        for clip in result.clips:
            assert any("behind" in fr.letter for fr in clip.frames)

    def test_paging_with_continuation(self, small_library):
        q = StructuredQuery(end=(Literal("lane-4"),))
        cfg = SearchConfig(min_len=1, max_len=60, max_results=2, sample_seed=12)
        first = run_query(small_library, q, cfg)
        assert len(first.clips) <= 2
        seen = {c.clip_id for c in first.clips}
        token = first.continuation
        while token is not None:
            page = run_query(small_library, q, cfg, continuation=token)
            ids = {c.clip_id for c in page.clips}
            assert not (ids & seen), "load-more returned a duplicate clip"
            seen |= ids
            token = page.continuation
        assert len(seen) == first.total_matches

    def test_stale_continuation_rejected(self, small_library):
        q = StructuredQuery(end=(Literal("lane-4"),))
        cfg = SearchConfig(min_len=1, max_len=60, max_results=2, sample_seed=12)
        token = run_query(small_library, q, cfg).continuation
        other = StructuredQuery(end=(Literal("lane-1"),))
        with pytest.raises(SchemaError):
            run_query(small_library, other, cfg, continuation=token)
        with pytest.raises(SchemaError):
            decode_continuation("not-a-token", "whatever")

    def test_empty_library_rejected(self):
        class Empty:
            episodes = {}
            vocab = []

        with pytest.raises(ValueError):
            run_query(Empty(), StructuredQuery())


class TestSearchConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(min_len=0)
        with pytest.raises(ValueError):
            SearchConfig(min_len=10, max_len=5)
        with pytest.raises(ValueError):
            SearchConfig(max_results=0)
