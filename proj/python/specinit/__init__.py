"""Optimal spectral-initialization design for generalized phase retrieval.

Thresholds, optimal performance curves, preprocessing-function design, and
finite-n Monte Carlo validation. The heavy lifting lives in the compiled
extension; this package re-exports its surface.
"""

from ._core import (
    Bounds,
    CFunction,
    Channel,
    DesignResult,
    OptimalDesign,
    Prediction,
    Preprocessor,
    SpecinitError,
    SweepRow,
    TrialResult,
    __version__,
    beta_alpha,
    c_star,
    design_at,
    epsilon_preprocessor,
    f_beta,
    optimal_preprocessor,
    phi,
    predict,
    psi,
    rho_optimal,
    run_sweep,
    run_trial,
    squared_cosine,
)

__all__ = [
    "Bounds",
    "CFunction",
    "Channel",
    "DesignResult",
    "OptimalDesign",
    "Prediction",
    "Preprocessor",
    "SpecinitError",
    "SweepRow",
    "TrialResult",
    "__version__",
    "beta_alpha",
    "c_star",
    "design_at",
    "epsilon_preprocessor",
    "f_beta",
    "optimal_preprocessor",
    "phi",
    "predict",
    "psi",
    "rho_optimal",
    "run_sweep",
    "run_trial",
    "squared_cosine",
]
