"""Convergence criteria and Monte Carlo bound checks for dependent random series.

The package makes three families of questions computable for a series
sum a_n X_n with covariance kernel gamma(n, m) = E(X_n conj(X_m)):

* do the deterministic criterion sums (quadratic, log-weighted double
  sum, power-weighted) stay bounded along a truncation ladder,
* do sampled Gaussian processes respect the explicit maximal
  inequalities those sums promise,
* how do trigonometric series behave at points drawn from a singular
  measure, seen through its Fourier coefficients.

Modules: ``kernels`` (covariance kernels, Gram matrices, PSD checks),
``criteria`` (criterion sums and diagnostics), ``dyadic`` (index
decompositions), ``montecarlo`` (sampling and bound reports),
``measures`` (Fourier coefficients, decay fits, trig partial sums),
``report`` (serialization), ``cli`` (command line).
"""

from ._accel import BACKEND
from .criteria import (
    CoefficientSequence,
    convergence_diagnostic,
    gaussian_condition_sum,
    mr_sum,
    one_sided,
    schur_bound_estimate,
    theorem1_sum,
    threshold_b,
    two_sided,
    weighted_sum,
)
from .dyadic import dyadic_digits, dyadic_intervals
from .kernels import gram_matrix, make_kernel, repair_psd, validate_psd
from .measures import (
    ae_probe,
    cantor,
    decay_fit,
    fourier_dimension_witness,
    lebesgue,
    sample_measure,
    sobolev_norm,
    synthetic_power_table,
    trig_partial_sum,
)
from .montecarlo import (
    SimulationConfig,
    run_simulation,
    sample_gaussian,
    sudakov_check,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoefficientSequence",
    "SimulationConfig",
    "__version__",
    "ae_probe",
    "cantor",
    "convergence_diagnostic",
    "decay_fit",
    "dyadic_digits",
    "dyadic_intervals",
    "fourier_dimension_witness",
    "gaussian_condition_sum",
    "gram_matrix",
    "lebesgue",
    "make_kernel",
    "mr_sum",
    "one_sided",
    "repair_psd",
    "run_simulation",
    "sample_gaussian",
    "sample_measure",
    "schur_bound_estimate",
    "sobolev_norm",
    "sudakov_check",
    "synthetic_power_table",
    "theorem1_sum",
    "threshold_b",
    "trig_partial_sum",
    "two_sided",
    "validate_psd",
    "weighted_sum",
]
