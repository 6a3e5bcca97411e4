"""Reproduction suites: one callable per acceptance criterion, each
returning a pass/fail verdict with a human-readable detail string.

These are Monte-Carlo reproductions of the headline simulation findings
at desk scale (m = 2000, 200 replications by default); tolerances are
stated in Monte-Carlo standard errors. They are exposed both through
pytest and through the ``accept`` CLI subcommand.
"""

from __future__ import annotations

import functools
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .core import STANDARD_NORMAL, compute_fdp_tdp, derive_rng
from .harness import ExperimentPlan, PlanCell, run_plan, write_raw_csv, write_summary_csv
from .hmm_model import EmConfig, default_init, em_fit
from .mirror import ScorePairVector, conformal_q_values, generalized_e_values, mirror_decide, select_threshold
from .plans import DEFAULT_SEED, plan_e7, plan_fig2, plan_fig3
from .procedures import (
    WorkingModelSpec,
    derandomized_plis,
    e_bh,
    one_bit_p_values,
    plis,
    plis_sym,
    selective_seqstep_plus,
)
from .simgen import GeneratorConfig, gen_hmm, gen_iid_two_group
from .verification import oracle_posterior, oracle_threshold
from .hmm_model import HmmParams, forward_backward


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.name}: {self.detail}"


def _bound(summary) -> float:
    return 0.05 + 2.0 * summary.se_fdr


@functools.lru_cache(maxsize=4)
def _fig2_results(n_rep: int, seed: int):
    _, summaries = run_plan(plan_fig2(n_rep=n_rep, seed=seed))
    return {(s.cell_id, s.method): s for s in summaries}


def criterion_1(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """FDR control for every method on the homogeneous-chain grid."""
    table = _fig2_results(n_rep, seed)
    worst = max(table.values(), key=lambda s: s.fdr - _bound(s))
    passed = all(s.fdr <= _bound(s) for s in table.values())
    return CriterionResult(
        1, "fdr_validity_grid", passed,
        f"worst cell {worst.cell_id}/{worst.method}: fdr={worst.fdr:.4f} "
        f"vs bound {_bound(worst):.4f}",
    )


def criterion_2(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Power ordering on the same grid: sequence-model scores beat BH by
    >= 0.02 wherever a11 >= 0.5 and stay within 1 SE of the two-group
    variant everywhere."""
    table = _fig2_results(n_rep, seed)
    cells = sorted({c for c, _ in table})
    fails = []
    for cell in cells:
        hm, tg, base = table[(cell, "plis_hm")], table[(cell, "plis_tg")], table[(cell, "bh")]
        a11 = float(cell.split("=")[1])
        if a11 >= 0.5 and not (hm.ap - base.ap >= 0.02):
            fails.append(f"{cell}: hm_ap={hm.ap:.3f} bh_ap={base.ap:.3f}")
        if not (hm.ap >= tg.ap - tg.se_ap):
            fails.append(f"{cell}: hm_ap={hm.ap:.3f} < tg_ap-se={tg.ap - tg.se_ap:.3f}")
    detail = "all ordering clauses hold" if not fails else "; ".join(fails)
    return CriterionResult(2, "power_ordering_grid", not fails, detail)


def criterion_3(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Heterogeneous chain: FDR control and power at least matching the
    conformal-BH baseline, strictly better at mu >= 2.6."""
    _, summaries = run_plan(plan_fig3(n_rep=n_rep, seed=seed))
    table = {(s.cell_id, s.method): s for s in summaries}
    fails = []
    for cell in sorted({c for c, _ in table}):
        mu = float(cell.split("=")[1])
        hm, cb = table[(cell, "plis_hm")], table[(cell, "conformal_bh")]
        if hm.fdr > _bound(hm):
            fails.append(f"{cell}: fdr={hm.fdr:.4f}")
        if not (hm.ap >= cb.ap - cb.se_ap):
            fails.append(f"{cell}: ap={hm.ap:.3f} < cbh-se={cb.ap - cb.se_ap:.3f}")
        if mu >= 2.6 and not (hm.ap > cb.ap):
            fails.append(f"{cell}: ap={hm.ap:.3f} not > cbh={cb.ap:.3f}")
    detail = "fdr controlled, power dominates baseline" if not fails else "; ".join(fails)
    return CriterionResult(3, "heterogeneous_chain", not fails, detail)


def criterion_4(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Misspecification: the naive posterior-thresholding baseline
    inflates FDR on covariate-modulated data while the mirror procedure
    does not."""
    plan = ExperimentPlan(
        name="c4",
        cells=(
            PlanCell(
                cell_id="covariate_i",
                generator=GeneratorConfig(
                    kind="covariate_adaptive", m=3000, mu=2.6,
                    params={"scenario": "i", "pi_base": 0.1},
                ),
            ),
        ),
        methods=("lis", "plis_hm"),
        alpha=0.05,
        n_rep=n_rep,
        seed=seed,
    )
    _, summaries = run_plan(plan)
    table = {s.method: s for s in summaries}
    lis, hm = table["lis"], table["plis_hm"]
    passed = (lis.fdr > 0.05 + 2 * lis.se_fdr) and (hm.fdr <= _bound(hm))
    return CriterionResult(
        4, "misspecification_inflation", passed,
        f"naive-posterior fdr={lis.fdr:.3f} (bound {0.05 + 2 * lis.se_fdr:.4f}), "
        f"mirror fdr={hm.fdr:.4f} (bound {_bound(hm):.4f})",
    )


def criterion_5(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Semi-supervised FDR control under equicorrelated noise."""
    cells = tuple(
        PlanCell(
            cell_id=f"rho={rho:.1f}",
            generator=GeneratorConfig(
                kind="hmm", m=2000, mu=3.0, params={"a00": 0.95, "a11": 0.8},
                noise="equicorrelated", rho=rho,
            ),
        )
        for rho in (0.2, 0.4, 0.6)
    )
    plan = ExperimentPlan(
        name="c5", cells=cells, methods=("ss_plis_hm", "ss_plis_tg"),
        alpha=0.05, n_rep=n_rep, seed=seed,
    )
    _, summaries = run_plan(plan)
    worst = max(summaries, key=lambda s: s.fdr - _bound(s))
    passed = all(s.fdr <= _bound(s) for s in summaries)
    return CriterionResult(
        5, "semi_supervised_validity", passed,
        f"worst {worst.cell_id}/{worst.method}: fdr={worst.fdr:.4f} vs bound {_bound(worst):.4f}",
    )


def criterion_6(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Null-sum budget of the generalized e-values: mean over
    replications of sum_{true nulls} e_j stays below m (+ 2 SE)."""
    m = 2000
    sums = []
    for rep in range(n_rep):
        rep_seed = int(derive_rng(seed, "c6", rep).integers(0, 2**63 - 1))
        data = gen_hmm(m, 0.95, 0.8, 2.6, rep_seed)
        result = plis(data.x, STANDARD_NORMAL, WorkingModelSpec("hmm"), 0.05, rep_seed)
        sums.append(float(result.e_values[data.truth == 0].sum()))
    mean = float(np.mean(sums))
    se = float(np.std(sums, ddof=1) / np.sqrt(n_rep))
    passed = mean <= m + 2 * se
    return CriterionResult(
        6, "e_value_budget", passed, f"mean null e-sum {mean:.1f} vs budget {m} + 2*{se:.1f}"
    )


def criterion_7(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Derandomization shrinks the across-replication variance of the
    discovery count; running the inner level above the target kills
    discoveries."""
    m, n_runs, alpha = 1000, 30, 0.05
    model = WorkingModelSpec("twogroup")
    single, derand, high = [], [], []
    for rep in range(n_rep):
        rep_seed = int(derive_rng(seed, "c7", rep).integers(0, 2**63 - 1))
        data = gen_iid_two_group(m, 0.2, 3.0, rep_seed)
        single.append(plis(data.x, STANDARD_NORMAL, model, alpha, rep_seed).n_rejected)
        derand.append(
            int(derandomized_plis(data.x, STANDARD_NORMAL, model, n_runs, None, alpha,
                                  rep_seed).decisions.sum())
        )
        high.append(
            int(derandomized_plis(data.x, STANDARD_NORMAL, model, n_runs,
                                  np.full(n_runs, 1.2 * alpha), alpha,
                                  rep_seed).decisions.sum())
        )
    var_single = float(np.var(single, ddof=1))
    var_derand = float(np.var(derand, ddof=1))
    mean_high = float(np.mean(high))
    passed = (var_derand < var_single) and (mean_high <= 1.0)
    return CriterionResult(
        7, "derandomization", passed,
        f"var single={var_single:.1f} vs derandomized={var_derand:.1f}; "
        f"mean discoveries at inflated inner level={mean_high:.3f}",
    )


def criterion_8(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Magnitude-keeping combiner beats the additive combiner by >= 0.02
    average power."""
    _, summaries = run_plan(plan_e7(n_rep=n_rep, seed=seed))
    table = {s.cell_id: s for s in summaries}
    fails = []
    for a11 in (0.5, 0.8):
        keep = table[f"a11={a11:.1f}/max_abs"]
        add = table[f"a11={a11:.1f}/additive"]
        if not (keep.ap >= add.ap + 0.02):
            fails.append(f"a11={a11}: {keep.ap:.3f} vs {add.ap:.3f}")
    detail = (
        "; ".join(
            f"a11={a11}: max_abs={table[f'a11={a11:.1f}/max_abs'].ap:.3f} "
            f"additive={table[f'a11={a11:.1f}/additive'].ap:.3f}"
            for a11 in (0.5, 0.8)
        )
        if not fails
        else "; ".join(fails)
    )
    return CriterionResult(8, "combiner_ablation", not fails, detail)


def criterion_9(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Variant ablation at mu=3, a00=0.6: the split-based mirror matches
    or beats both the no-split conformal variant and the anti-symmetric
    variant, and the no-split variant is visibly conservative under
    strong dependence."""
    a11_grid = [round(0.1 * k, 1) for k in range(1, 10)]
    cells = tuple(
        PlanCell(
            cell_id=f"a11={a11:.1f}",
            generator=GeneratorConfig(kind="hmm", m=2000, mu=3.0,
                                      params={"a00": 0.6, "a11": a11}),
        )
        for a11 in a11_grid
    )
    plan = ExperimentPlan(
        name="c9", cells=cells, methods=("plis_hm", "plis_cbh", "plis_sym"),
        alpha=0.05, n_rep=n_rep, seed=seed,
    )
    _, summaries = run_plan(plan)
    table = {(s.cell_id, s.method): s for s in summaries}
    fails, strict = [], 0
    for a11 in a11_grid:
        cell = f"a11={a11:.1f}"
        hm = table[(cell, "plis_hm")]
        cbh = table[(cell, "plis_cbh")]
        sym = table[(cell, "plis_sym")]
        best_variant = max(cbh.ap, sym.ap)
        se = max(cbh.se_ap, sym.se_ap)
        if not (hm.ap >= best_variant - se):
            fails.append(f"{cell}: {hm.ap:.3f} < {best_variant:.3f}-se")
        if hm.ap > best_variant:
            strict += 1
        if a11 >= 0.6 and not (cbh.fdr <= 0.03):
            fails.append(f"{cell}: no-split fdr={cbh.fdr:.3f} > 0.03")
    if strict < (len(a11_grid) + 1) // 2:
        fails.append(f"strict dominance only in {strict}/{len(a11_grid)} cells")
    detail = f"strict dominance in {strict}/{len(a11_grid)} cells" if not fails else "; ".join(fails)
    return CriterionResult(9, "variant_ablation", not fails, detail)


def criterion_10(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Exact structural equivalences on random instances: q-value
    thresholding, e-BH reconstruction, the prior-ordered step-up
    reformulation, and the 1-bit p-value form of the anti-symmetric
    variant."""
    n_instances = max(100, n_rep // 2)
    rng = derive_rng(seed, "c10")
    for _ in range(n_instances):
        m = int(rng.integers(5, 120))
        scores = ScorePairVector.from_scores(rng.random(m), rng.random(m))
        alpha = float(rng.uniform(0.05, 0.6))
        decision = mirror_decide(scores, alpha)
        rejected = decision.rejected.astype(bool)

        via_q = decision.q_values <= alpha
        if not np.array_equal(via_q, rejected):
            return CriterionResult(10, "exact_equivalences", False, "q-value mismatch")
        via_e = e_bh(decision.e_values, alpha)
        if not np.array_equal(via_e, rejected):
            return CriterionResult(10, "exact_equivalences", False, "e-BH mismatch")

        # prior-ordered step-up on signed magnitude statistics, with a
        # strictly decreasing transform g(s) = exp(-s)
        g_x, g_y = np.exp(-scores.s_x), np.exp(-scores.s_y)
        t_s = np.sign(scores.s_y - scores.s_x) * np.maximum(g_x, g_y)
        order = np.argsort(-np.abs(t_s), kind="stable")
        p_bits = one_bit_p_values(t_s[order])
        seq = selective_seqstep_plus(p_bits, 0.5, alpha)
        via_seq = np.zeros(m, dtype=bool)
        via_seq[order[seq]] = True
        if not np.array_equal(via_seq, rejected):
            return CriterionResult(10, "exact_equivalences", False, "step-up mismatch")

        # 1-bit p-values ordered by |T| reproduce the anti-symmetric variant
        t = scores.s_y - scores.s_x
        order_t = np.argsort(-np.abs(t), kind="stable")
        seq_t = selective_seqstep_plus(one_bit_p_values(t[order_t]), 0.5, alpha)
        via_sym = np.zeros(m, dtype=bool)
        via_sym[order_t[seq_t]] = True
        if not np.array_equal(via_sym, plis_sym(scores, alpha)):
            return CriterionResult(10, "exact_equivalences", False, "1-bit mismatch")
    return CriterionResult(
        10, "exact_equivalences", True, f"all four equivalences on {n_instances} instances"
    )


def criterion_11(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Numerical oracles: message passing vs path enumeration, EM
    log-likelihood monotonicity, and the threshold sweep vs naive
    counting."""
    rng = derive_rng(seed, "c11")
    n_posterior = 50
    for _ in range(n_posterior):
        m = int(rng.integers(2, 13))
        a01, a11 = rng.uniform(0.05, 0.95, size=2)
        params = HmmParams(
            initial=np.array([0.7, 0.3]),
            transition=np.array([[1 - a01, a01], [1 - a11, a11]]),
            mean0=0.0, sd0=1.0, mean1=float(rng.uniform(0.5, 3.0)), sd1=1.0,
        )
        x = rng.standard_normal(m) * 1.5
        gap = float(np.max(np.abs(forward_backward(x, params) - oracle_posterior(x, params))))
        if gap > 1e-10:
            return CriterionResult(11, "numerical_oracles", False, f"posterior gap {gap:.2e}")

    for _ in range(20):
        w = np.concatenate([rng.standard_normal(300), rng.standard_normal(60) + 2.5])
        _, report = em_fit(w, EmConfig(init=default_init(w)))
        diffs = np.diff(np.asarray(report.trace))
        if diffs.size and float(diffs.min()) < -1e-8:
            return CriterionResult(
                11, "numerical_oracles", False, f"loglik decreased by {-diffs.min():.2e}"
            )

    for _ in range(100):
        m = int(rng.integers(3, 80))
        scores = ScorePairVector.from_scores(rng.random(m), rng.random(m))
        alpha = float(rng.uniform(0.05, 0.9))
        if select_threshold(scores, alpha) != oracle_threshold(scores, alpha):
            return CriterionResult(11, "numerical_oracles", False, "threshold mismatch")
    return CriterionResult(
        11, "numerical_oracles", True,
        "posterior<=1e-10, loglik monotone to 1e-8, threshold sweep exact",
    )


def criterion_12(n_rep: int = 200, seed: int = DEFAULT_SEED) -> CriterionResult:
    """Determinism: the same plan run twice, and with different thread
    counts, yields identical result files (all seed-derived columns)."""
    plan = ExperimentPlan(
        name="c12",
        cells=(
            PlanCell(
                cell_id="a11=0.8",
                generator=GeneratorConfig(kind="hmm", m=400, mu=2.6,
                                          params={"a00": 0.95, "a11": 0.8}),
            ),
        ),
        methods=("plis_hm", "bh"),
        alpha=0.05,
        n_rep=8,
        seed=seed,
    )
    outputs = []
    for threads in (1, 1, 4):
        rows, summaries = run_plan(plan, threads=threads)
        with tempfile.TemporaryDirectory() as tmp:
            raw, summ = os.path.join(tmp, "raw.csv"), os.path.join(tmp, "summary.csv")
            write_raw_csv(rows, raw)
            write_summary_csv(summaries, summ)
            with open(raw) as fh:
                # wall-clock runtime is the one column that cannot be
                # seed-derived; strip it before comparing bytes
                raw_text = "\n".join(
                    line.rsplit(",", 1)[0] for line in fh.read().splitlines()
                )
            with open(summ) as fh:
                summary_text = fh.read()
        outputs.append((raw_text, summary_text))
    passed = outputs[0] == outputs[1] == outputs[2]
    return CriterionResult(
        12, "determinism", passed,
        "raw (sans runtime) and summary files identical across reruns and thread counts"
        if passed else "outputs differ between runs",
    )


ALL_CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
)


def run_all(n_rep: int = 200, seed: int = DEFAULT_SEED, numbers=None):
    wanted = set(numbers) if numbers else None
    results = []
    for k, fn in enumerate(ALL_CRITERIA, start=1):
        if wanted and k not in wanted:
            continue
        results.append(fn(n_rep=n_rep, seed=seed))
    return results
