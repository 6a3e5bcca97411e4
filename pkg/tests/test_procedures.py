import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plis.core import PlisError, STANDARD_NORMAL, derive_rng
from plis.mirror import ScorePairVector, mirror_decide
from plis.procedures import (
    METHODS,
    WorkingModelSpec,
    bh,
    conformal_bh,
    conformal_p_values,
    derandomized_plis,
    e_bh,
    lis_baseline,
    one_bit_p_values,
    plis,
    plis_cbh,
    plis_sym,
    run_method,
    selective_seqstep_plus,
    semi_supervised_plis,
    storey_null_proportion,
    two_sided_p_values,
)
from plis.simgen import gen_hmm, gen_iid_two_group

from conftest import random_scores


class TestStepUpRules:
    def test_bh_hand_example(self):
        out = bh([0.01, 0.2, 0.04, 0.02], alpha=0.05)
        assert list(out) == [True, False, False, True]

    def test_bh_rejects_everything_at_alpha_one(self):
        assert bh([0.3, 0.9, 1.0], alpha=1.0).all()

    def test_bh_bad_input(self):
        with pytest.raises(PlisError):
            bh([1.2], 0.1)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=50), st.floats(0.01, 0.99))
    def test_bh_fdp_identity(self, p, alpha):
        # every rejected p-value sits below k*alpha/m where k is the count
        out = bh(p, alpha)
        k = out.sum()
        if k:
            assert max(np.asarray(p)[out]) <= k * alpha / len(p) + 1e-12

    def test_e_bh_hand_example(self):
        out = e_bh([4.0, 4.0, 0.0, 4.0], alpha=0.5)
        assert list(out) == [True, True, False, True]

    def test_e_bh_no_rejection_when_small(self):
        assert not e_bh([1.0, 1.0], alpha=0.05).any()

    def test_e_bh_bad_input(self):
        with pytest.raises(PlisError):
            e_bh([-1.0], 0.1)
        with pytest.raises(PlisError):
            e_bh([np.inf], 0.1)

    def test_two_sided_p_values_uniform_quantiles(self):
        x = np.array([0.0, 1.959963984540054])
        p = two_sided_p_values(x, STANDARD_NORMAL)
        assert p[0] == pytest.approx(1.0)
        assert p[1] == pytest.approx(0.05, abs=1e-9)


class TestConformal:
    def test_conformal_p_values_formula(self):
        p = conformal_p_values([0.1, 0.5], [0.2, 0.4])
        np.testing.assert_allclose(p, [(1 + 0) / 3, (1 + 2) / 3])

    def test_ties_count_strictly_below(self):
        p = conformal_p_values([0.2], [0.2])
        assert p[0] == pytest.approx(0.5)

    def test_conformal_bh_smoke(self):
        rng = derive_rng(0, "cbh")
        s_x = np.concatenate([rng.random(90), rng.random(10) * 1e-3])
        s_y = rng.random(100)
        out = conformal_bh(s_x, s_y, alpha=0.2)
        assert out[-10:].sum() > 0

    def test_storey_estimator_bounds(self):
        assert storey_null_proportion(np.linspace(0.01, 0.99, 100)) <= 1.0
        assert storey_null_proportion([0.9] * 10) == 1.0


class TestVariants:
    def test_no_split_variant_fixture(self, fixture_scores):
        # hand sweep over t in {0.05, 0.1, 0.2, 0.7}: ratios 1, 1/2, 1/3, 1/2
        assert list(plis_cbh(fixture_scores, 0.6)) == [True, True, True, True]
        assert list(plis_cbh(fixture_scores, 0.4)) == [True, True, False, True]
        assert not plis_cbh(fixture_scores, 0.3).any()

    def test_antisymmetric_variant_fixture(self, fixture_scores):
        # T = (0.8, 0.6, -0.4, 0.9); smallest admissible threshold is 0.6
        out = plis_sym(fixture_scores, 0.5)
        assert list(out) == [True, True, False, True]

    def test_antisymmetric_no_rejections_at_tiny_alpha(self, fixture_scores):
        assert not plis_sym(fixture_scores, 0.01).any()

    def test_one_bit_p_values(self):
        np.testing.assert_array_equal(one_bit_p_values([0.3, -0.2, 0.0]), [0.5, 1.0, 1.0])

    def test_seqstep_prefix_rule(self):
        # c = 1/2 -> control ratio alpha; prefix of 4 with one large
        # p-value: (1+1)/3 <= 0.8 admissible, reject the small ones
        out = selective_seqstep_plus(np.array([0.5, 0.5, 1.0, 0.5]), 0.5, 0.8)
        assert list(out) == [True, True, False, True]

    def test_seqstep_bad_c(self):
        with pytest.raises(PlisError):
            selective_seqstep_plus(np.array([0.5]), 1.0, 0.1)

    @given(st.integers(0, 10_000), st.floats(0.05, 0.9))
    @settings(max_examples=40)
    def test_seqstep_reproduces_mirror_rejections(self, seed, alpha):
        # ordering by decreasing signed-magnitude statistic turns the
        # mirror threshold search into a prefix rule over 1-bit p-values
        rng = derive_rng(seed, "seqstep_eq")
        scores = random_scores(rng, int(rng.integers(3, 80)))
        decision = mirror_decide(scores, alpha)
        g_x, g_y = np.exp(-scores.s_x), np.exp(-scores.s_y)
        t_s = np.sign(scores.s_y - scores.s_x) * np.maximum(g_x, g_y)
        order = np.argsort(-np.abs(t_s), kind="stable")
        prefix = selective_seqstep_plus(one_bit_p_values(t_s[order]), 0.5, alpha)
        out = np.zeros(scores.m, dtype=bool)
        out[order[prefix]] = True
        np.testing.assert_array_equal(out, decision.rejected == 1)

    @given(st.integers(0, 10_000), st.floats(0.05, 0.9))
    @settings(max_examples=40)
    def test_one_bit_reproduces_antisymmetric_variant(self, seed, alpha):
        rng = derive_rng(seed, "sym_eq")
        scores = random_scores(rng, int(rng.integers(3, 80)))
        t = scores.s_y - scores.s_x
        order = np.argsort(-np.abs(t), kind="stable")
        prefix = selective_seqstep_plus(one_bit_p_values(t[order]), 0.5, alpha)
        out = np.zeros(scores.m, dtype=bool)
        out[order[prefix]] = True
        np.testing.assert_array_equal(out, plis_sym(scores, alpha))


class TestLisBaseline:
    def test_running_mean_rule(self):
        out = lis_baseline([0.01, 0.02, 0.5, 0.9], alpha=0.1)
        # prefix means: 0.01, 0.015, 0.177 -> stop at k = 2
        assert list(out) == [True, True, False, False]

    def test_bad_posteriors(self):
        with pytest.raises(PlisError):
            lis_baseline([1.5], 0.1)


class TestMainProcedures:
    def test_supervised_run_is_deterministic(self):
        data = gen_hmm(300, 0.95, 0.8, 2.6, 42)
        a = plis(data.x, STANDARD_NORMAL, WorkingModelSpec("hmm"), 0.1, seed=7)
        b = plis(data.x, STANDARD_NORMAL, WorkingModelSpec("hmm"), 0.1, seed=7)
        np.testing.assert_array_equal(a.decisions, b.decisions)
        assert a.tau == b.tau

    def test_internal_equivalences_hold_on_real_run(self):
        data = gen_hmm(400, 0.95, 0.8, 2.6, 3)
        result = plis(data.x, STANDARD_NORMAL, WorkingModelSpec("twogroup"), 0.1, seed=7)
        rejected = result.decisions.astype(bool)
        np.testing.assert_array_equal(result.q_values <= 0.1, rejected)
        np.testing.assert_array_equal(e_bh(result.e_values, 0.1), rejected)

    def test_semi_supervised_requires_large_pool(self):
        data = gen_hmm(100, 0.95, 0.8, 2.6, 1)
        with pytest.raises(PlisError, match="screen"):
            semi_supervised_plis(data.x, np.zeros(150), WorkingModelSpec("hmm"))

    def test_semi_supervised_runs_both_models(self):
        rng = derive_rng(8, "ss")
        data = gen_hmm(200, 0.95, 0.8, 3.0, 12)
        pool = rng.standard_normal(500)
        for kind in ("hmm", "twogroup"):
            result = semi_supervised_plis(data.x, pool, WorkingModelSpec(kind), 0.2, seed=5)
            assert result.decisions.size == 200
            assert result.diagnostics["n_train_nulls"] == 300

    def test_derandomized_alphas_validation(self):
        data = gen_iid_two_group(50, 0.2, 3.0, 2)
        with pytest.raises(PlisError):
            derandomized_plis(data.x, STANDARD_NORMAL, WorkingModelSpec("twogroup"),
                              n_runs=3, alphas=[0.05] * 2)
        with pytest.raises(PlisError):
            derandomized_plis(data.x, STANDARD_NORMAL, n_runs=0)

    def test_derandomized_inflated_inner_level_kills_discoveries(self):
        data = gen_iid_two_group(300, 0.2, 3.0, 9)
        result = derandomized_plis(
            data.x, STANDARD_NORMAL, WorkingModelSpec("twogroup"),
            n_runs=5, alphas=np.full(5, 0.06), alpha=0.05, seed=3,
        )
        assert result.decisions.sum() == 0


class TestMethodRegistry:
    def test_known_names(self):
        expected = {
            "plis_hm", "plis_tg", "ss_plis_hm", "ss_plis_tg", "bh",
            "conformal_bh", "plis_cbh", "plis_sym", "lis", "derandomized_plis",
        }
        assert expected == set(METHODS)

    def test_unknown_method(self):
        with pytest.raises(PlisError):
            run_method("magic", np.zeros(3), 0.1, 0)

    @pytest.mark.parametrize("name", sorted(METHODS))
    def test_every_method_returns_boolean_decisions(self, name):
        data = gen_hmm(120, 0.9, 0.7, 3.0, 99)
        kwargs = {}
        if name.startswith("ss_"):
            kwargs["nulls"] = derive_rng(1, "pool").standard_normal(300)
        out = run_method(name, data.x, 0.2, seed=11, **kwargs)
        assert out.dtype == bool and out.shape == (120,)
