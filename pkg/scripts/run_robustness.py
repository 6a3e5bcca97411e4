#!/usr/bin/env python3
"""Robustness studies: misspecification (naive posterior thresholding vs
the mirror procedure on covariate-modulated data), semi-supervised runs
under correlated noise, and derandomization variance reduction."""

import argparse

import numpy as np

from plis.core import STANDARD_NORMAL, derive_rng
from plis.harness import ExperimentPlan, PlanCell, run_plan
from plis.plans import DEFAULT_SEED
from plis.procedures import WorkingModelSpec, derandomized_plis, plis
from plis.simgen import GeneratorConfig, gen_iid_two_group


def misspecification(n_rep: int, seed: int, threads: int) -> None:
    plan = ExperimentPlan(
        name="misspec",
        cells=(
            PlanCell(
                cell_id="covariate_i",
                generator=GeneratorConfig(kind="covariate_adaptive", m=3000, mu=2.6,
                                          params={"scenario": "i", "pi_base": 0.1}),
            ),
        ),
        methods=("lis", "plis_hm"),
        alpha=0.05, n_rep=n_rep, seed=seed,
    )
    _, summaries = run_plan(plan, threads=threads)
    print("== misspecification (covariate-modulated, scenario i) ==")
    for s in summaries:
        print(f"{s.method:>10} fdr={s.fdr:.4f} (se {s.se_fdr:.4f}) ap={s.ap:.4f}")


def correlated_noise(n_rep: int, seed: int, threads: int) -> None:
    cells = tuple(
        PlanCell(
            cell_id=f"rho={rho:.1f}",
            generator=GeneratorConfig(kind="hmm", m=2000, mu=3.0,
                                      params={"a00": 0.95, "a11": 0.8},
                                      noise="equicorrelated", rho=rho),
        )
        for rho in (0.2, 0.4, 0.6)
    )
    plan = ExperimentPlan(name="corr", cells=cells,
                          methods=("ss_plis_hm", "ss_plis_tg"),
                          alpha=0.05, n_rep=n_rep, seed=seed)
    _, summaries = run_plan(plan, threads=threads)
    print("== semi-supervised under equicorrelated noise ==")
    for s in summaries:
        print(f"{s.cell_id:>8} {s.method:>10} fdr={s.fdr:.4f} ap={s.ap:.4f}")


def derandomization(n_rep: int, seed: int) -> None:
    m, alpha = 1000, 0.05
    model = WorkingModelSpec("twogroup")
    single, derand = [], []
    for rep in range(n_rep):
        rep_seed = int(derive_rng(seed, "derand_demo", rep).integers(0, 2**63 - 1))
        data = gen_iid_two_group(m, 0.2, 3.0, rep_seed)
        single.append(plis(data.x, STANDARD_NORMAL, model, alpha, rep_seed).n_rejected)
        derand.append(int(derandomized_plis(
            data.x, STANDARD_NORMAL, model, 30, None, alpha, rep_seed
        ).decisions.sum()))
    print("== derandomization (30 runs averaged) ==")
    print(f"single-run discoveries: mean={np.mean(single):.1f} var={np.var(single, ddof=1):.1f}")
    print(f"derandomized:           mean={np.mean(derand):.1f} var={np.var(derand, ddof=1):.1f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-rep", type=int, default=200)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    misspecification(args.n_rep, args.seed, args.threads)
    correlated_noise(args.n_rep, args.seed, args.threads)
    derandomization(args.n_rep, args.seed)


if __name__ == "__main__":
    main()
