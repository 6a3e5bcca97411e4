import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plis.baseline import build_paired
from plis.core import Gaussian, PlisError, STANDARD_NORMAL, derive_rng
from plis.hmm_model import (
    EmConfig,
    HmmParams,
    default_init,
    em_fit,
    forward_backward,
    plis_scores_hmm,
)
from plis.simgen import gen_hmm
from plis.verification import oracle_posterior


def make_params(a01=0.1, a11=0.8, mean1=2.5, null_dist=None) -> HmmParams:
    return HmmParams(
        initial=np.array([0.9, 0.1]),
        transition=np.array([[1 - a01, a01], [1 - a11, a11]]),
        mean0=0.0, sd0=1.0, mean1=mean1, sd1=1.0, null_dist=null_dist,
    )


class TestHmmParams:
    def test_rejects_bad_transition(self):
        with pytest.raises(PlisError):
            HmmParams(
                initial=np.array([0.5, 0.5]),
                transition=np.array([[0.9, 0.2], [0.2, 0.8]]),
                mean0=0.0, sd0=1.0, mean1=2.0, sd1=1.0,
            )

    def test_rejects_bad_sd(self):
        with pytest.raises(PlisError):
            HmmParams(
                initial=np.array([0.5, 0.5]),
                transition=np.array([[0.9, 0.1], [0.2, 0.8]]),
                mean0=0.0, sd0=0.0, mean1=2.0, sd1=1.0,
            )

    def test_config_text_round_trip(self):
        params = make_params(null_dist=Gaussian(0.1, 1.3))
        restored = HmmParams.from_config_text(params.to_config_text())
        np.testing.assert_allclose(restored.transition, params.transition)
        np.testing.assert_allclose(restored.initial, params.initial)
        assert restored.mean1 == params.mean1
        assert isinstance(restored.null_dist, Gaussian)
        assert restored.null_dist.mean == 0.1

    def test_frozen_null_overrides_state0_emission(self):
        params = make_params(null_dist=Gaussian(5.0, 1.0))
        x = np.array([5.0])
        lem = params.log_emissions(x)
        assert lem[0, 0] == pytest.approx(Gaussian(5.0, 1.0).logpdf(5.0))


class TestForwardBackward:
    def test_single_point_uninformative_emission(self):
        params = HmmParams(
            initial=np.array([0.5, 0.5]),
            transition=np.array([[0.5, 0.5], [0.5, 0.5]]),
            mean0=0.0, sd0=1.0, mean1=0.0, sd1=1.0,
        )
        assert forward_backward([1.3], params)[0] == pytest.approx(0.5)

    def test_single_point_bayes_rule(self):
        params = make_params()
        x = 1.7
        f0 = STANDARD_NORMAL.pdf(x)
        f1 = Gaussian(2.5, 1.0).pdf(x)
        expected = 0.9 * f0 / (0.9 * f0 + 0.1 * f1)
        assert forward_backward([x], params)[0] == pytest.approx(expected, abs=1e-12)

    @given(st.integers(0, 10_000), st.integers(2, 12))
    @settings(max_examples=25)
    def test_matches_path_enumeration(self, seed, m):
        rng = derive_rng(seed, "fb_oracle")
        params = make_params(
            a01=float(rng.uniform(0.05, 0.95)),
            a11=float(rng.uniform(0.05, 0.95)),
            mean1=float(rng.uniform(0.5, 3.0)),
        )
        x = rng.standard_normal(m) * 1.5
        np.testing.assert_allclose(
            forward_backward(x, params), oracle_posterior(x, params), atol=1e-10
        )

    def test_posterior_bounds(self):
        rng = derive_rng(4, "bounds")
        gamma = forward_backward(rng.standard_normal(500) * 3, make_params())
        assert np.all((gamma >= 0) & (gamma <= 1))


class TestEmFit:
    def test_recovers_generating_parameters(self):
        data = gen_hmm(4000, 0.95, 0.8, 3.0, 20240117)
        params, report = em_fit(data.x, EmConfig(frozen_null=STANDARD_NORMAL))
        assert report.converged
        assert params.transition[0, 0] == pytest.approx(0.95, abs=0.05)
        assert params.mean1 == pytest.approx(3.0, abs=0.3)

    def test_loglik_trace_monotone_over_random_inits(self):
        rng = derive_rng(9, "em_inits")
        w = np.concatenate([rng.standard_normal(400), rng.standard_normal(80) + 2.5])
        for _ in range(100):
            init = make_params(
                a01=float(rng.uniform(0.05, 0.5)),
                a11=float(rng.uniform(0.3, 0.95)),
                mean1=float(rng.uniform(1.0, 4.0)),
            )
            _, report = em_fit(w, EmConfig(max_iter=40, init=init))
            diffs = np.diff(np.asarray(report.trace))
            assert diffs.size == 0 or diffs.min() >= -1e-8

    def test_tol_inf_short_circuits(self):
        rng = derive_rng(9, "em_short")
        w = rng.standard_normal(100)
        init = make_params()
        params, report = em_fit(w, EmConfig(tol=np.inf, init=init))
        assert report.iterations == 0
        np.testing.assert_array_equal(params.transition, init.transition)

    def test_one_step_from_truth_does_not_decrease_loglik(self):
        data = gen_hmm(1500, 0.95, 0.8, 3.0, 77)
        truth = make_params(a01=0.05, a11=0.8, mean1=3.0)
        _, report = em_fit(data.x, EmConfig(max_iter=1, init=truth))
        diffs = np.diff(np.asarray(report.trace))
        assert diffs.size == 0 or diffs.min() >= -1e-8

    def test_degenerate_fit_falls_back_and_flags(self):
        # an all-identical sequence gives one state essentially zero mass
        w = np.zeros(50)
        params, report = em_fit(w, EmConfig(frozen_null=STANDARD_NORMAL))
        assert report.degenerate
        default = default_init(w, STANDARD_NORMAL)
        np.testing.assert_allclose(params.transition, default.transition)

    def test_frozen_null_pins_state0(self):
        data = gen_hmm(1000, 0.95, 0.8, 2.6, 5)
        params, _ = em_fit(data.x, EmConfig(frozen_null=Gaussian(0.0, 1.0)))
        assert params.null_dist == Gaussian(0.0, 1.0)


class TestScores:
    def test_fast_equals_naive(self):
        rng = derive_rng(13, "scores")
        data = gen_hmm(60, 0.9, 0.7, 2.5, 31)
        paired = build_paired(data.x, rng.standard_normal(60))
        params = make_params()
        fast = plis_scores_hmm(paired, params, method="fast")
        naive = plis_scores_hmm(paired, params, method="naive")
        np.testing.assert_allclose(fast.s_x, naive.s_x, atol=1e-10)
        np.testing.assert_allclose(fast.s_y, naive.s_y, atol=1e-10)

    def test_identical_pair_gives_equal_scores(self):
        x = np.array([0.3, 2.1, -0.5])
        y = np.array([0.3, 0.4, 0.8])
        paired = build_paired(x, y)
        scores = plis_scores_hmm(paired, make_params())
        assert scores.s_x[0] == scores.s_y[0]

    def test_swap_exchanges_score_pair_exactly(self):
        rng = derive_rng(21, "swap")
        x, y = rng.standard_normal(25), rng.standard_normal(25)
        params = make_params()
        base = plis_scores_hmm(build_paired(x, y), params)
        for i in (0, 7, 24):
            x2, y2 = x.copy(), y.copy()
            x2[i], y2[i] = y[i], x[i]
            swapped = plis_scores_hmm(build_paired(x2, y2), params)
            assert swapped.s_x[i] == base.s_y[i]
            assert swapped.s_y[i] == base.s_x[i]
            mask = np.arange(25) != i
            np.testing.assert_array_equal(swapped.s_x[mask], base.s_x[mask])
            np.testing.assert_array_equal(swapped.s_y[mask], base.s_y[mask])

    def test_matches_posterior_oracle_on_substituted_sequences(self):
        rng = derive_rng(2, "oracle_sub")
        x, y = rng.standard_normal(6) + 1.0, rng.standard_normal(6)
        paired = build_paired(x, y)
        params = make_params()
        scores = plis_scores_hmm(paired, params)
        for i in range(6):
            xi = paired.w.copy()
            xi[i] = x[i]
            assert scores.s_x[i] == pytest.approx(oracle_posterior(xi, params)[i], abs=1e-10)

    def test_clustering_raises_suspicion_near_large_neighbors(self):
        # equal observations, one surrounded by large values, one by
        # small ones: the former should look less null
        seq_x = np.array([0.1, 0.2, 2.5, 0.1, 0.0, 3.5, 2.5, 3.0, 0.2])
        y = np.zeros(9)
        scores = plis_scores_hmm(build_paired(seq_x, y), make_params())
        j, k = 2, 6  # x_j = x_k = 2.5
        assert scores.s_x[k] < scores.s_x[j]

    def test_unknown_method_rejected(self):
        paired = build_paired([1.0], [0.5])
        with pytest.raises(Exception):
            plis_scores_hmm(paired, make_params(), method="magic")
