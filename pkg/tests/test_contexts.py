"""Context selection: length screen, probability filtering, random sampling."""

import numpy as np
import pytest

from saxe.contexts import (
    ContextPool,
    ContextRecord,
    length_ok,
    select_contexts_for_axes,
    select_default_contexts,
    select_pole_prob_contexts,
    select_prob_contexts,
)
from saxe.lexicon import AxisSpec, Pole


def rec(context_id, adjective="good", syn=None, ant=None, n_tokens=12):
    tokens = tuple(f"t{i}" for i in range(n_tokens))
    return ContextRecord(
        context_id=context_id,
        adjective=adjective,
        tokens=tokens,
        target_index=0,
        syn_probs=syn if syn is not None else {"s": 0.5},
        ant_probs=ant if ant is not None else {"a": 0.1},
    )


class TestLengthScreen:
    @pytest.mark.parametrize("n,expected", [(10, False), (11, True), (150, True),
                                            (151, False), (1, False)])
    def test_boundaries(self, n, expected):
        assert length_ok(["x"] * n) is expected

    def test_pool_applies_screen_and_cap(self):
        pool = ContextPool(cap=2)
        assert pool.add(rec("c1", n_tokens=10)) is False  # too short
        assert pool.add(rec("c2")) is True
        assert pool.add(rec("c3")) is True
        assert pool.add(rec("c4")) is False  # over cap
        assert len(pool) == 2


class TestProbSelection:
    def test_filter_fires(self):
        only = rec("c1", syn={"s": 0.2}, ant={"a": 0.3})
        assert select_prob_contexts([only]) == []

    def test_equality_kept(self):
        only = rec("c1", syn={"s": 0.3}, ant={"a": 0.3})
        assert select_prob_contexts([only]) == [only]

    def test_forced_ordering(self):
        a = rec("A", syn={"s": 0.4}, ant={"a": 0.1})
        b = rec("B", syn={"s": 0.6}, ant={"a": 0.2})
        c = rec("C", syn={"s": 0.1}, ant={"a": 0.5})
        assert select_prob_contexts([a, b, c], k=2) == [b, a]

    def test_empty_prob_map_excluded_with_warning(self, caplog):
        good = rec("c1")
        broken = rec("c2", syn={}, ant={"a": 0.1})
        with caplog.at_level("WARNING"):
            assert select_prob_contexts([broken, good]) == [good]
        assert any("c2" in r.message for r in caplog.records)

    def test_ties_break_by_context_id(self):
        records = [rec(cid, syn={"s": 0.5}, ant={"a": 0.1}) for cid in ("z9", "a1", "m5")]
        got = select_prob_contexts(records, k=3)
        assert [r.context_id for r in got] == ["a1", "m5", "z9"]

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(21)
        records = []
        for i in range(20):
            # coarse grid probabilities force plenty of exact ties
            syn = {w: round(float(rng.choice([0.1, 0.2, 0.3, 0.4])), 2)
                   for w in ("s1", "s2")}
            ant = {w: round(float(rng.choice([0.1, 0.2, 0.3])), 2) for w in ("a1",)}
            records.append(rec(f"c{i:02d}", syn=syn, ant=ant))
        got = select_prob_contexts(records, k=5)

        # oracle: explicit filter loop, stable sort, truncate
        surviving = []
        for r in records:
            syn_mean = sum(r.syn_probs.values()) / len(r.syn_probs)
            ant_mean = sum(r.ant_probs.values()) / len(r.ant_probs)
            if not ant_mean > syn_mean:
                surviving.append((syn_mean, r))
        surviving.sort(key=lambda sr: sr[1].context_id)
        surviving.sort(key=lambda sr: -sr[0])
        assert got == [r for _, r in surviving[:5]]

    def test_output_invariants(self):
        rng = np.random.default_rng(8)
        records = [
            rec(f"c{i}", syn={"s": float(rng.uniform())}, ant={"a": float(rng.uniform())})
            for i in range(30)
        ]
        got = select_prob_contexts(records, k=10)
        assert len(got) <= 10
        assert all(r in records for r in got)
        means = [sum(r.syn_probs.values()) / len(r.syn_probs) for r in got]
        assert all(means[i] >= means[i + 1] for i in range(len(means) - 1))
        for r in got:
            syn = sum(r.syn_probs.values()) / len(r.syn_probs)
            ant = sum(r.ant_probs.values()) / len(r.ant_probs)
            assert not ant > syn

    def test_pole_selection_merges_adjectives_by_probability(self):
        pool = ContextPool()
        # pole budget is shared: the global top-k by synonym probability
        # wins regardless of which adjective a context came from
        for i, p in enumerate((0.9, 0.2)):
            pool.add(rec(f"g{i}", adjective="good", syn={"s": p}, ant={"a": 0.0}))
        for i, p in enumerate((0.5, 0.4)):
            pool.add(rec(f"f{i}", adjective="fine", syn={"s": p}, ant={"a": 0.0}))
        got = select_pole_prob_contexts(pool, ["good", "fine"], k=3)
        assert [r.context_id for r in got] == ["g0", "f0", "f1"]
        got2 = select_pole_prob_contexts(pool, ["good", "fine"], k=2)
        assert [r.context_id for r in got2] == ["g0", "f0"]


class TestDefaultSelection:
    def test_undersized_pool_returns_all(self):
        pool = [rec(f"c{i}") for i in range(3)]
        assert select_default_contexts(pool, k=100, seed=1) == pool

    def test_deterministic_under_seed(self):
        pool = [rec(f"c{i:04d}") for i in range(1000)]
        first = select_default_contexts(pool, k=100, seed=42)
        second = select_default_contexts(pool, k=100, seed=42)
        assert first == second
        assert len(first) == 100

    def test_empty_pool_is_an_error(self):
        with pytest.raises(ValueError, match="pole cannot be represented"):
            select_default_contexts([], k=10, seed=0)

    def test_pure_function_of_pool_order_k_seed(self):
        pool = [rec(f"c{i}") for i in range(30)]
        a = select_default_contexts(pool, k=7, seed=5)
        b = select_default_contexts(list(pool), k=7, seed=5)
        assert a == b
        different = select_default_contexts(pool, k=7, seed=6)
        assert a != different  # overwhelmingly likely under a different seed

    def test_empirical_uniformity(self):
        """Inclusion rates over a seed sweep stay within 3 sigma of k/n.

        Checked on position buckets (10 items each) rather than single
        items so the bound holds jointly; positional bias bugs show up at
        bucket level regardless.
        """
        n, k, trials = 50, 10, 1000
        pool = [rec(f"c{i:02d}") for i in range(n)]
        counts = np.zeros(n)
        for seed in range(trials):
            for r in select_default_contexts(pool, k=k, seed=seed):
                counts[int(r.context_id[1:])] += 1
        p = k / n
        bucket = counts.reshape(5, 10).sum(axis=1) / (trials * 10)
        sigma = np.sqrt(p * (1 - p) / (trials * 10))
        assert np.all(np.abs(bucket - p) <= 3 * sigma)


class TestAxisSelection:
    def _spec(self):
        return AxisSpec(
            axis_id="x1",
            left=Pole("s1", ("fine", "good")),
            right=Pole("s2", ("awful", "bad")),
        )

    def _pool(self):
        pool = ContextPool()
        for adj in ("good", "fine", "bad", "awful"):
            for i in range(5):
                pool.add(rec(f"{adj}-{i}", adjective=adj,
                             syn={"s": 0.5}, ant={"a": 0.1}))
        return pool

    def test_prob_selection_records_method(self):
        sels = select_contexts_for_axes(
            [self._spec()], self._pool(), "prob",
            wp_vocab={"good", "bad"}, k=3, seed=0,
        )
        assert {s.side for s in sels} == {"left", "right"}
        assert all(s.method == "prob" and not s.backoff for s in sels)

    def test_backoff_when_pole_lacks_single_wordpiece(self):
        sels = select_contexts_for_axes(
            [self._spec()], self._pool(), "prob",
            wp_vocab={"good", "fine"},  # right pole absent -> axis backs off
            k=3, seed=0,
        )
        assert all(s.method == "default" and s.backoff for s in sels)

    def test_default_method_never_backs_off(self):
        sels = select_contexts_for_axes([self._spec()], self._pool(), "default",
                                        k=3, seed=0)
        assert all(s.method == "default" and not s.backoff for s in sels)

    def test_axis_without_contexts_skipped(self, caplog):
        empty_spec = AxisSpec(
            axis_id="x2",
            left=Pole("s3", ("unseen",)),
            right=Pole("s4", ("alsounseen",)),
        )
        with caplog.at_level("WARNING"):
            sels = select_contexts_for_axes([empty_spec], self._pool(), "default",
                                            k=3, seed=0)
        assert sels == []
        assert any("x2" in r.message for r in caplog.records)
