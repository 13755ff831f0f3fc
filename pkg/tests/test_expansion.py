"""Paraphrase-beam filtering and expanded-query assembly."""

from __future__ import annotations

import io
import logging
import random

import pytest

from qxrank.corpus_io import QueryRecord
from qxrank.errors import (ConfigError, ContractViolation, ParseError,
                           ValidationError)
from qxrank.expansion import (ExpandedQuery, FilterPolicy, ParaphraseBeam,
                              QueryExpander, assemble, fetch_expansions,
                              filter_beams, load_precomputed_expansions,
                              parse_filter_policy, write_expansions)
from qxrank.tokenization import tokenize

TESLA = QueryRecord("q1", "average tesla cost")
TESLA_BEAMS = [
    ParaphraseBeam("what is the cost of the new tesla", -0.4, 1),
    ParaphraseBeam("how much money do you save purchasing a tesla", -0.9, 2),
    ParaphraseBeam("how much do you have to pay for a tesla", -1.3, 3),
]


def random_beams(rng, n=None):
    n = rng.randrange(0, 6) if n is None else n
    ll = 0.0
    beams = []
    for rank in range(1, n + 1):
        ll -= rng.random()
        text = " ".join(rng.choice("abcdefg") for _ in range(rng.randrange(1, 6)))
        beams.append(ParaphraseBeam(text, ll, rank))
    return beams


class TestParaphraseBeam:
    def test_zero_log_likelihood_allowed(self):
        assert ParaphraseBeam("x", 0.0, 1).log_likelihood == 0.0

    def test_positive_log_likelihood_rejected(self):
        with pytest.raises(ValidationError):
            ParaphraseBeam("x", 0.1, 1)

    def test_rank_below_one_rejected(self):
        with pytest.raises(ValidationError):
            ParaphraseBeam("x", -1.0, 0)


class TestAssemble:
    def test_worked_example(self):
        expanded = assemble(TESLA, TESLA_BEAMS, 3)
        assert expanded.assembled_text == (
            "average tesla cost "
            "what is the cost of the new tesla "
            "how much money do you save purchasing a tesla "
            "how much do you have to pay for a tesla")
        assert expanded.query_id == "q1"
        assert expanded.beams_used == tuple(TESLA_BEAMS)

    def test_k_zero_is_identity(self):
        expanded = assemble(TESLA, TESLA_BEAMS, 0)
        assert expanded.assembled_text == TESLA.text
        assert expanded.beams_used == ()

    def test_k_beyond_available_uses_all(self):
        expanded = assemble(TESLA, TESLA_BEAMS, 5)
        assert len(expanded.beams_used) == 3

    def test_unsorted_beams_rejected(self):
        with pytest.raises(ContractViolation):
            assemble(TESLA, list(reversed(TESLA_BEAMS)), 3)

    def test_duplicate_ranks_rejected(self):
        beams = [ParaphraseBeam("a", -0.5, 1), ParaphraseBeam("b", -0.6, 1)]
        with pytest.raises(ContractViolation):
            assemble(TESLA, beams, 2)

    def test_negative_k_rejected(self):
        with pytest.raises(ConfigError):
            assemble(TESLA, TESLA_BEAMS, -1)

    def test_token_count_is_additive(self):
        rng = random.Random(5)
        for _ in range(50):
            beams = random_beams(rng)
            k = rng.randrange(0, 6)
            original = QueryRecord("q", " ".join(
                rng.choice("hijk") for _ in range(rng.randrange(1, 5))))
            expanded = assemble(original, beams, k)
            expected = len(tokenize(original.text)) + sum(
                len(tokenize(b.text)) for b in expanded.beams_used)
            assert len(tokenize(expanded.assembled_text)) == expected
            assert expanded.assembled_text.startswith(original.text)


class TestParseFilterPolicy:
    @pytest.mark.parametrize("text,expected", [
        ("none", FilterPolicy("none")),
        ("dedup-exact", FilterPolicy("dedup-exact")),
        ("min-log-likelihood:-1.5", FilterPolicy("min-log-likelihood", -1.5)),
        ("min-log-likelihood(-1.5)", FilterPolicy("min-log-likelihood", -1.5)),
        ("lexical-overlap:0.25", FilterPolicy("lexical-overlap", 0.25)),
        ("lexical-overlap(1.0)", FilterPolicy("lexical-overlap", 1.0)),
        ("  none  ", FilterPolicy("none")),
    ])
    def test_valid_spellings(self, text, expected):
        assert parse_filter_policy(text) == expected

    @pytest.mark.parametrize("text", [
        "nope", "lexical-overlap:1.5", "lexical-overlap:-0.1",
        "lexical-overlap", "min-log-likelihood", "none:0.5",
        "dedup-exact(1)", "min-log-likelihood:abc",
    ])
    def test_invalid_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_filter_policy(text)


class TestFilterBeams:
    def test_none_is_identity(self):
        assert filter_beams(TESLA_BEAMS, FilterPolicy("none")) == TESLA_BEAMS

    def test_dedup_exact_keeps_first_duplicate(self):
        repeated = "what is not a waste product of cellular respiration"
        beams = [ParaphraseBeam(repeated, -0.2, 1),
                 ParaphraseBeam("what happens during photosynthesis", -0.7, 2),
                 ParaphraseBeam(repeated, -1.1, 3)]
        kept = filter_beams(beams, FilterPolicy("dedup-exact"))
        assert kept == beams[:2]

    def test_dedup_exact_drops_copy_of_original(self):
        beams = [ParaphraseBeam("average tesla cost", -0.1, 1),
                 ParaphraseBeam("tesla price", -0.5, 2)]
        kept = filter_beams(beams, FilterPolicy("dedup-exact"),
                            original_text="average tesla cost")
        assert kept == beams[1:]

    def test_min_log_likelihood_keeps_boundary(self):
        policy = FilterPolicy("min-log-likelihood", -0.9)
        kept = filter_beams(TESLA_BEAMS, policy)
        assert kept == TESLA_BEAMS[:2]

    def test_lexical_overlap_thresholds(self):
        beams = [ParaphraseBeam("average tesla cost", -0.1, 1),
                 ParaphraseBeam("tesla cost guide", -0.5, 2),
                 ParaphraseBeam("unrelated words entirely", -0.9, 3)]
        policy = FilterPolicy("lexical-overlap", 0.5)
        kept = filter_beams(beams, policy, original_text="average tesla cost")
        assert kept == beams[:2]

    def test_lexical_overlap_full_threshold_disjoint_beams(self):
        beams = [ParaphraseBeam("x y", -0.3, 1)]
        policy = FilterPolicy("lexical-overlap", 1.0)
        assert filter_beams(beams, policy, original_text="a b") == []

    def test_lexical_overlap_needs_original(self):
        with pytest.raises(ConfigError):
            filter_beams(TESLA_BEAMS, FilterPolicy("lexical-overlap", 0.5))

    @pytest.mark.parametrize("policy", [
        FilterPolicy("none"), FilterPolicy("dedup-exact"),
        FilterPolicy("min-log-likelihood", -0.8),
        FilterPolicy("lexical-overlap", 0.3),
    ])
    def test_idempotent(self, policy):
        rng = random.Random(8)
        for _ in range(25):
            beams = random_beams(rng)
            once = filter_beams(beams, policy, original_text="a b c")
            twice = filter_beams(once, policy, original_text="a b c")
            assert twice == once

    def test_order_preserving_subsequence(self):
        rng = random.Random(9)
        for _ in range(25):
            beams = random_beams(rng)
            kept = filter_beams(beams, FilterPolicy("min-log-likelihood", -1.2))
            it = iter(beams)
            assert all(b in it for b in kept)


class TestExpansionsTsv:
    def test_load_groups_and_sorts(self):
        text = "q2\t2\t-1.2\tbeta\nq1\t1\t-0.5\talpha\nq2\t1\t-0.5\tgamma\n"
        beams = load_precomputed_expansions(io.StringIO(text))
        assert set(beams) == {"q1", "q2"}
        assert [b.text for b in beams["q2"]] == ["gamma", "beta"]
        assert beams["q1"] == [ParaphraseBeam("alpha", -0.5, 1)]

    def test_increasing_log_likelihood_rejected(self):
        text = "q1\t1\t-1.2\ta\nq1\t2\t-0.5\tb\n"
        with pytest.raises(ValidationError, match="increase"):
            load_precomputed_expansions(io.StringIO(text))

    def test_duplicate_rank_rejected(self):
        text = "q1\t1\t-0.5\ta\nq1\t1\t-0.6\tb\n"
        with pytest.raises(ValidationError, match="duplicate"):
            load_precomputed_expansions(io.StringIO(text))

    def test_malformed_line_rejected(self):
        with pytest.raises(ParseError, match=":1:"):
            load_precomputed_expansions(io.StringIO("q1\t1\t-0.5\n"))

    def test_bad_numeric_fields_rejected(self):
        with pytest.raises(ParseError):
            load_precomputed_expansions(io.StringIO("q1\tone\t-0.5\ttext\n"))

    def test_positive_log_likelihood_rejected_with_location(self):
        with pytest.raises(ValidationError, match=":1:"):
            load_precomputed_expansions(io.StringIO("q1\t1\t0.5\ttext\n"))

    def test_blank_lines_skipped(self):
        beams = load_precomputed_expansions(
            io.StringIO("\nq1\t1\t-0.5\ttext\n\n"))
        assert len(beams["q1"]) == 1

    def test_writer_rejects_tabs_in_text(self):
        with pytest.raises(ValidationError):
            write_expansions({"q1": [ParaphraseBeam("a\tb", -0.5, 1)]},
                             io.StringIO())

    def test_roundtrip(self):
        rng = random.Random(3)
        beams_by_query = {f"q{i}": random_beams(rng) for i in range(10)}
        beams_by_query = {q: b for q, b in beams_by_query.items() if b}
        out = io.StringIO()
        write_expansions(beams_by_query, out)
        loaded = load_precomputed_expansions(io.StringIO(out.getvalue()))
        for qid, beams in beams_by_query.items():
            assert [b.text for b in loaded[qid]] == [b.text for b in beams]
            assert [b.beam_rank for b in loaded[qid]] == \
                [b.beam_rank for b in beams]
            for got, want in zip(loaded[qid], beams):
                assert got.log_likelihood == \
                    pytest.approx(want.log_likelihood, abs=1e-6)


class FakeParaphraseClient:
    def __init__(self, beams_by_query):
        self.beams_by_query = beams_by_query
        self.calls = 0

    def expansions(self, queries, num_beams):
        self.calls += 1
        return {q.id: self.beams_by_query[q.id][:num_beams] for q in queries}


class TestFetchExpansions:
    def test_fetch_and_persist(self):
        client = FakeParaphraseClient({"q1": TESLA_BEAMS})
        out = io.StringIO()
        fetched = fetch_expansions([TESLA], client, 2, persist_to=out)
        assert [b.text for b in fetched["q1"]] == \
            [b.text for b in TESLA_BEAMS[:2]]
        reloaded = load_precomputed_expansions(io.StringIO(out.getvalue()))
        assert [b.text for b in reloaded["q1"]] == \
            [b.text for b in TESLA_BEAMS[:2]]

    def test_empty_queries_send_nothing(self):
        client = FakeParaphraseClient({})
        assert fetch_expansions([], client, 3) == {}
        assert client.calls == 0

    def test_num_beams_below_one_rejected(self):
        with pytest.raises(ConfigError):
            fetch_expansions([TESLA], FakeParaphraseClient({}), 0)


class TestQueryExpander:
    def test_transform_assembles(self):
        expander = QueryExpander(num_beams=2).fit({"q1": TESLA_BEAMS})
        (expanded,) = expander.transform([TESLA])
        assert expanded == assemble(TESLA, TESLA_BEAMS, 2)

    def test_missing_query_passes_through_with_warning(self, caplog):
        expander = QueryExpander().fit({})
        with caplog.at_level(logging.WARNING, logger="qxrank.expansion"):
            (expanded,) = expander.transform([TESLA])
        assert expanded.assembled_text == TESLA.text
        assert any("q1" in r.message for r in caplog.records)

    def test_filter_policy_applied_before_assembly(self):
        beams = [ParaphraseBeam("average tesla cost", -0.1, 1),
                 ParaphraseBeam("tesla price", -0.5, 2),
                 ParaphraseBeam("tesla price", -0.9, 3)]
        expander = QueryExpander(num_beams=3,
                                 filter_policy="dedup-exact").fit({"q1": beams})
        (expanded,) = expander.transform([TESLA])
        assert expanded.assembled_text == "average tesla cost tesla price"

    def test_transform_before_fit_rejected(self):
        with pytest.raises(ConfigError):
            QueryExpander().transform([TESLA])

    def test_bad_policy_rejected_at_fit(self):
        with pytest.raises(ConfigError):
            QueryExpander(filter_policy="bogus").fit({})

    def test_get_params_round_trip(self):
        params = QueryExpander(num_beams=5,
                               filter_policy="dedup-exact").get_params()
        assert params == {"num_beams": 5, "filter_policy": "dedup-exact"}

    def test_offline_and_online_paths_agree(self):
        client = FakeParaphraseClient({"q1": TESLA_BEAMS})
        out = io.StringIO()
        online = fetch_expansions([TESLA], client, 3, persist_to=out)
        offline = load_precomputed_expansions(io.StringIO(out.getvalue()))
        via_online = QueryExpander().fit(online).transform([TESLA])
        via_offline = QueryExpander().fit(offline).transform([TESLA])
        assert [e.assembled_text for e in via_online] == \
            [e.assembled_text for e in via_offline]
