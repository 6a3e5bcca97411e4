import numpy as np
import pytest
from scipy import stats

from plis.baseline import build_paired
from plis.core import STANDARD_NORMAL, derive_rng
from plis.twogroup_model import (
    density_ratio_scores,
    kde_fit,
    plis_scores_twogroup,
)


class TestKdeFit:
    def test_bandwidth_rule_of_thumb(self):
        rng = derive_rng(1, "kde")
        x = rng.standard_normal(500)
        est = kde_fit(x)
        assert est.bandwidth == pytest.approx(1.06 * np.std(x) * 500 ** (-0.2))
        assert not est.degenerate

    def test_matches_scipy_density(self):
        rng = derive_rng(2, "kde")
        x = rng.standard_normal(300)
        est = kde_fit(x)
        ref = stats.gaussian_kde(x, bw_method=est.bandwidth / np.std(x, ddof=1))
        q = np.linspace(-3, 3, 21)
        np.testing.assert_allclose(est.pdf(q), ref(q), rtol=1e-8)

    def test_degenerate_sample_floors_bandwidth(self):
        est = kde_fit(np.zeros(50))
        assert est.degenerate and est.bandwidth == 1e-3
        assert np.isfinite(est.pdf([0.0]))[0]

    def test_integrates_to_one(self):
        rng = derive_rng(3, "kde")
        est = kde_fit(rng.standard_normal(200))
        grid = np.linspace(-8, 8, 4001)
        assert np.trapezoid(est.pdf(grid), grid) == pytest.approx(1.0, abs=1e-4)


class TestDensityRatioScores:
    def test_small_scores_in_alternative_region(self):
        rng = derive_rng(4, "ratio")
        mix = kde_fit(np.concatenate([rng.standard_normal(800),
                                      rng.standard_normal(200) + 3.0]))
        s = density_ratio_scores([0.0, 3.0], STANDARD_NORMAL, mix)
        assert s[1] < s[0]

    def test_underflow_gets_sentinel(self):
        mix = kde_fit(np.linspace(-1, 1, 50))
        s = density_ratio_scores([60.0], STANDARD_NORMAL, mix)
        assert s[0] == 1e300


class TestPairedScores:
    def test_identical_pair_gives_equal_scores(self):
        paired = build_paired([1.0, 2.0], [1.0, 0.5])
        scores = plis_scores_twogroup(paired, STANDARD_NORMAL)
        assert scores.s_x[0] == scores.s_y[0]

    def test_swap_exchanges_scores_when_mixture_fixed(self):
        rng = derive_rng(5, "swap_tg")
        x, y = rng.standard_normal(40) + 1.0, rng.standard_normal(40)
        mix = kde_fit(np.concatenate([x, y]))
        base = plis_scores_twogroup(build_paired(x, y), STANDARD_NORMAL, mix)
        x2, y2 = x.copy(), y.copy()
        x2[3], y2[3] = y[3], x[3]
        swapped = plis_scores_twogroup(build_paired(x2, y2), STANDARD_NORMAL, mix)
        assert swapped.s_x[3] == base.s_y[3]
        assert swapped.s_y[3] == base.s_x[3]
        mask = np.arange(40) != 3
        np.testing.assert_array_equal(swapped.s_x[mask], base.s_x[mask])
