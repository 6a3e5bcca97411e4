"""Bundled experiment plans reproducing the headline simulation grids:
the homogeneous-chain method comparison, the exponentially-decaying
heterogeneous grid, and the baseline-combiner ablation."""

from __future__ import annotations

from .harness import ExperimentPlan, PlanCell
from .simgen import GeneratorConfig

DEFAULT_SEED = 20240117


def plan_fig2(n_rep: int = 200, seed: int = DEFAULT_SEED) -> ExperimentPlan:
    """Homogeneous chain, mu = 2.6, a11 varying over {0.1..0.9}."""
    cells = tuple(
        PlanCell(
            cell_id=f"a11={a11:.1f}",
            generator=GeneratorConfig(kind="hmm", m=2000, mu=2.6, params={"a00": 0.95, "a11": a11}),
        )
        for a11 in [round(0.1 * k, 1) for k in range(1, 10)]
    )
    return ExperimentPlan(
        name="fig2",
        cells=cells,
        methods=("plis_hm", "plis_tg", "bh", "conformal_bh"),
        alpha=0.05,
        n_rep=n_rep,
        seed=seed,
    )


def plan_fig3(n_rep: int = 200, seed: int = DEFAULT_SEED) -> ExperimentPlan:
    """Exponentially decaying non-null persistence, mu over {2.2..3.2}."""
    cells = tuple(
        PlanCell(
            cell_id=f"mu={mu:.1f}",
            generator=GeneratorConfig(kind="hetero_hmm_exp", m=2000, mu=mu),
        )
        for mu in [round(2.2 + 0.2 * k, 1) for k in range(6)]
    )
    return ExperimentPlan(
        name="fig3",
        cells=cells,
        methods=("plis_hm", "bh", "conformal_bh"),
        alpha=0.05,
        n_rep=n_rep,
        seed=seed,
    )


def plan_e7(n_rep: int = 200, seed: int = DEFAULT_SEED) -> ExperimentPlan:
    """Baseline-combiner ablation: magnitude-keeping vs additive."""
    cells = []
    for a11 in (0.5, 0.8):
        gen = GeneratorConfig(kind="hmm", m=2000, mu=2.6, params={"a00": 0.95, "a11": a11})
        cells.append(PlanCell(cell_id=f"a11={a11:.1f}/max_abs", generator=gen))
        cells.append(
            PlanCell(
                cell_id=f"a11={a11:.1f}/additive",
                generator=gen,
                method_params={"combiner": "additive"},
            )
        )
    return ExperimentPlan(
        name="e7",
        cells=tuple(cells),
        methods=("plis_hm",),
        alpha=0.05,
        n_rep=n_rep,
        seed=seed,
    )


BUNDLED_PLANS = {"fig2": plan_fig2, "fig3": plan_fig3, "e7": plan_e7}
