"""
PC-LS Covariance Kernels Package.

This package contains the covariance building blocks of the model:
- excov: exponentially convex covariances psi for the random weights U^j
- stationary: stationary covariances gamma_j with their spectral measures
- pc_component: the periodically correlated component X^p
"""

from pcls.kernels.excov import (
    ClosedForm,
    ExpConvexCov,
    LaplaceMixture,
    WeightProcessRealization,
    eval_psi,
    excov_from_dict,
    gram_psd_check,
    register_closed_form,
    sample_weight_process,
)

from pcls.kernels.stationary import (
    CosineMixture,
    DiscreteSpectralMeasure,
    Exponential,
    SquaredExp,
    StationaryCov,
    eval_cov,
    spectral_measure,
    stationary_from_dict,
)

from pcls.kernels.pc_component import (
    IntervalMeasureCov,
    IntervalMeasureGrid,
    IntervalMeasureSampler,
    PCSequenceSpec,
    global_psd_check,
    harmonic_mean_gram,
    interval_correlation,
    measure_cov,
    pcseq_from_dict,
    project,
    xp_cov,
)

__all__ = [
    # Weight covariances
    "ClosedForm",
    "ExpConvexCov",
    "LaplaceMixture",
    "WeightProcessRealization",
    "eval_psi",
    "excov_from_dict",
    "gram_psd_check",
    "register_closed_form",
    "sample_weight_process",
    # Stationary covariances
    "CosineMixture",
    "DiscreteSpectralMeasure",
    "Exponential",
    "SquaredExp",
    "StationaryCov",
    "eval_cov",
    "spectral_measure",
    "stationary_from_dict",
    # PC component
    "IntervalMeasureCov",
    "IntervalMeasureGrid",
    "IntervalMeasureSampler",
    "PCSequenceSpec",
    "global_psd_check",
    "harmonic_mean_gram",
    "interval_correlation",
    "measure_cov",
    "pcseq_from_dict",
    "project",
    "xp_cov",
]
