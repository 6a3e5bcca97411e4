"""Conformal multiple testing with structured working models.

Finite-sample FDR control via pairwise-exchangeable conformity scores
and a mirror FDP process, with hidden-chain and two-group working
models, conformal q-values, generalized e-values, derandomization, and
a seeded simulation harness.
"""

from .baseline import PairedData, build_paired
from .core import (
    Gaussian,
    IngestionError,
    LengthMismatchError,
    NullDistribution,
    PlisError,
    STANDARD_NORMAL,
    compute_fdp_tdp,
    derive_rng,
)
from .hmm_model import EmConfig, HmmParams, em_fit, forward_backward, plis_scores_hmm
from .mirror import (
    MirrorDecision,
    ScorePairVector,
    conformal_q_values,
    generalized_e_values,
    mirror_decide,
    mirror_q,
    select_threshold,
)
from .procedures import (
    METHODS,
    ProcedureResult,
    WorkingModelSpec,
    bh,
    conformal_bh,
    derandomized_plis,
    e_bh,
    lis_baseline,
    plis,
    plis_cbh,
    plis_sym,
    run_method,
    selective_seqstep_plus,
    semi_supervised_plis,
)
from .simgen import GeneratorConfig, LabeledDataset, generate
from .twogroup_model import KdeEstimate, density_ratio_scores, kde_fit, plis_scores_twogroup

__version__ = "0.1.0"
