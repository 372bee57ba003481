"""Lebesgue decomposition of positive operators and a q-LAN verification kit."""

__version__ = "0.1.0"

from .linalg import (
    DEFAULT_CUTOFF,
    PositiveOperator,
    SpectralDecomposition,
    default_cutoff,
    eig_hermitian,
    excision,
    expm,
    geometric_mean,
    hermitian_part,
    hermitize,
    log_pd,
    pinv_psd,
    positive,
    set_default_cutoff,
    sqrt_psd,
    support_projector,
)
from .decomp import (
    LebesgueDecomposition,
    QllrVersion,
    SupportSplit,
    ac_ball_radius,
    is_absolutely_continuous,
    is_mutually_ac,
    is_singular,
    lebesgue_decompose,
    lebesgue_decompose_direct,
    qllr,
    support_split,
)
from .gaussian import GaussianSpec, char_fn, lecam_limit_spec, qcf
from .qlan import (
    ConvergenceReport,
    Oh2Report,
    ParametricModel,
    ProbeReport,
    SldSet,
    collective_qcf_brute,
    collective_qcf_factorized,
    fisher_j,
    iid_remainder_rule,
    infinitesimal_probe,
    lecam_report,
    oh2_report,
    qclt_report,
    sandwich_qcf,
    sandwich_report,
    sld,
    sld_set,
)
from .models import (
    RandomPsdPairSpec,
    get_model,
    pure_pair,
    qubit_fullrank_model,
    random_psd_pair,
    spin_perturbed_model,
    spin_perturbed_state,
    spin_pure_model,
    spin_pure_state,
)

__all__ = [
    "ConvergenceReport",
    "DEFAULT_CUTOFF",
    "GaussianSpec",
    "LebesgueDecomposition",
    "Oh2Report",
    "ParametricModel",
    "PositiveOperator",
    "ProbeReport",
    "QllrVersion",
    "RandomPsdPairSpec",
    "SldSet",
    "SpectralDecomposition",
    "SupportSplit",
    "__version__",
    "ac_ball_radius",
    "char_fn",
    "collective_qcf_brute",
    "collective_qcf_factorized",
    "default_cutoff",
    "eig_hermitian",
    "excision",
    "expm",
    "fisher_j",
    "geometric_mean",
    "get_model",
    "hermitian_part",
    "hermitize",
    "iid_remainder_rule",
    "infinitesimal_probe",
    "is_absolutely_continuous",
    "is_mutually_ac",
    "is_singular",
    "lebesgue_decompose",
    "lebesgue_decompose_direct",
    "lecam_limit_spec",
    "lecam_report",
    "log_pd",
    "oh2_report",
    "pinv_psd",
    "positive",
    "pure_pair",
    "qcf",
    "qclt_report",
    "qllr",
    "qubit_fullrank_model",
    "random_psd_pair",
    "sandwich_qcf",
    "sandwich_report",
    "set_default_cutoff",
    "sld",
    "sld_set",
    "spin_perturbed_model",
    "spin_perturbed_state",
    "spin_pure_model",
    "spin_pure_state",
    "sqrt_psd",
    "support_projector",
    "support_split",
]
