import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plis.mirror import (
    CALIBRATION,
    REJECTION_CANDIDATE,
    TIE,
    ScorePairVector,
    conformal_q_values,
    generalized_e_values,
    mirror_decide,
    mirror_q,
    select_threshold,
)
from plis.procedures import e_bh
from plis.verification import oracle_threshold

from conftest import random_scores

score_vectors = st.integers(1, 60).flatmap(
    lambda m: st.tuples(
        st.lists(st.floats(0, 1, allow_nan=False), min_size=m, max_size=m),
        st.lists(st.floats(0, 1, allow_nan=False), min_size=m, max_size=m),
    )
).map(lambda pair: ScorePairVector.from_scores(*pair))


class TestScorePairVector:
    def test_membership_partition(self, fixture_scores):
        assert list(fixture_scores.membership) == [1, 1, -1, 1]
        assert fixture_scores.candidates.sum() == 3
        assert fixture_scores.calibration.sum() == 1

    def test_exact_tie_is_neither(self):
        scores = ScorePairVector.from_scores([0.5, 0.2], [0.5, 0.9])
        assert scores.membership[0] == TIE
        assert scores.membership[1] == REJECTION_CANDIDATE

    @given(score_vectors)
    def test_membership_values(self, scores):
        assert set(np.unique(scores.membership)) <= {REJECTION_CANDIDATE, CALIBRATION, TIE}
        assert np.all((scores.s_x < scores.s_y) == scores.candidates)


class TestThreshold:
    def test_fixture_threshold(self, fixture_scores):
        # Q = 1/3 up to t = 0.2 and jumps above 0.4 at t = 0.3
        assert select_threshold(fixture_scores, 0.4) == pytest.approx(0.2)
        assert mirror_q(0.2, fixture_scores) == pytest.approx(1 / 3)
        assert mirror_q(0.3, fixture_scores) == pytest.approx(2 / 3)

    def test_no_admissible_threshold(self, fixture_scores):
        assert select_threshold(fixture_scores, 0.2) == float("-inf")

    def test_empty_candidate_set(self):
        scores = ScorePairVector.from_scores([0.9, 0.8], [0.1, 0.2])
        assert select_threshold(scores, 0.9) == float("-inf")

    @given(score_vectors, st.floats(0.01, 0.99))
    def test_matches_naive_oracle(self, scores, alpha):
        assert select_threshold(scores, alpha) == oracle_threshold(scores, alpha)

    @given(score_vectors, st.floats(0.01, 0.9), st.floats(0.01, 0.9))
    def test_monotone_in_alpha(self, scores, a1, a2):
        lo, hi = sorted((a1, a2))
        r_lo = mirror_decide(scores, lo).rejected
        r_hi = mirror_decide(scores, hi).rejected
        assert np.all(r_lo <= r_hi)

    @given(score_vectors, st.floats(0.05, 0.9))
    def test_rank_order_invariance(self, scores, alpha):
        # any strictly increasing transform of the score scale leaves
        # memberships, counts, and hence rejections unchanged
        def transform(v):
            return np.expm1(2.0 * v)

        mapped = ScorePairVector.from_scores(transform(scores.s_x), transform(scores.s_y))
        np.testing.assert_array_equal(
            mirror_decide(scores, alpha).rejected, mirror_decide(mapped, alpha).rejected
        )


class TestQValues:
    def test_fixture_q_values(self, fixture_scores):
        np.testing.assert_allclose(
            conformal_q_values(fixture_scores), [1 / 3, 1 / 3, 1.0, 1 / 3]
        )

    @given(score_vectors)
    def test_q_values_in_unit_interval_and_one_off_candidates(self, scores):
        q = conformal_q_values(scores)
        assert np.all((q > 0) & (q <= 1))
        assert np.all(q[~scores.candidates] == 1.0)

    @given(score_vectors, st.floats(0.01, 0.99))
    def test_thresholding_q_reproduces_rejections(self, scores, alpha):
        decision = mirror_decide(scores, alpha)
        np.testing.assert_array_equal(decision.q_values <= alpha, decision.rejected == 1)

    @given(score_vectors)
    def test_q_matches_naive_minimization(self, scores):
        grid = np.concatenate([scores.s_x, scores.s_y])
        q = conformal_q_values(scores)
        for i in range(scores.m):
            if not scores.candidates[i]:
                continue
            candidates_t = grid[grid >= scores.s_x[i]]
            naive = min(min(mirror_q(t, scores) for t in candidates_t), 1.0)
            assert q[i] == pytest.approx(naive)


class TestEValues:
    def test_fixture_e_values(self, fixture_scores):
        np.testing.assert_allclose(
            generalized_e_values(fixture_scores, 0.2), [4.0, 4.0, 0.0, 4.0]
        )

    def test_overridden_m(self, fixture_scores):
        np.testing.assert_allclose(
            generalized_e_values(fixture_scores, 0.2, m=8), [8.0, 8.0, 0.0, 8.0]
        )

    def test_no_threshold_gives_zeros(self, fixture_scores):
        assert generalized_e_values(fixture_scores, float("-inf")).sum() == 0.0

    @given(score_vectors, st.floats(0.01, 0.99))
    def test_e_bh_reproduces_rejections(self, scores, alpha):
        decision = mirror_decide(scores, alpha)
        np.testing.assert_array_equal(e_bh(decision.e_values, alpha), decision.rejected == 1)


class TestMirrorDecide:
    def test_fixture_decision(self, fixture_scores):
        decision = mirror_decide(fixture_scores, 0.4)
        assert decision.tau == pytest.approx(0.2)
        assert list(decision.rejected) == [1, 1, 0, 1]

    @given(score_vectors, st.floats(0.01, 0.99))
    def test_fdp_estimate_bounded_at_tau(self, scores, alpha):
        decision = mirror_decide(scores, alpha)
        if decision.tau > float("-inf"):
            assert mirror_q(decision.tau, scores) <= alpha

    def test_ties_never_rejected(self):
        rng = np.random.default_rng(11)
        s = rng.random(30)
        scores = ScorePairVector.from_scores(s, s)  # all exact ties
        decision = mirror_decide(scores, 0.99)
        assert decision.rejected.sum() == 0
        assert np.all(decision.q_values == 1.0)

    def test_single_unit(self):
        scores = ScorePairVector.from_scores([0.1], [0.9])
        decision = mirror_decide(scores, 0.5)
        # with an empty calibration set Q(t) = 1/1 = 1 > alpha
        assert decision.rejected.sum() == 0

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        scores = random_scores(rng, 40)
        a = mirror_decide(scores, 0.3)
        b = mirror_decide(scores, 0.3)
        np.testing.assert_array_equal(a.rejected, b.rejected)
        assert a.tau == b.tau
