"""Eigenvalue statistics of products of non-Hermitian random matrices.

Samplers for four product models, exact finite-size determinantal kernels,
all limiting kernels of the M/N phase transition, the local scaling charts
connecting the two, and a verification suite comparing rescaled empirical
statistics against the theory.
"""

from .ensembles import (
    EnsembleSpec,
    ScaledProduct,
    SpectrumSample,
    eigenvalues,
    lyapunov_spectrum_qr,
    sample_ginibre,
    sample_haar_truncation,
    sample_product,
    stability_exponents,
    stability_exponents_compound,
    stream_for,
)
from .kernels_exact import (
    ExactKernelSpec,
    LogComplex,
    correlation,
    kernel,
    kernel_diag,
    log_weight,
    truncated_sum,
    weight,
)
from .kernels_limit import (
    CriticalBulk,
    CriticalEdge,
    GaussianDensity,
    GinibreBulk,
    GinibreEdge,
    critical_bulk,
    critical_edge,
    duality_residual,
    duality_transform,
    gaussian_limit_density,
    ginibre_bulk,
    ginibre_edge,
    rescaled_critical,
)
from .scalings import RegimeSpec, chart
from .specfun import SeriesControl, digamma, erfc, log_gamma, theta_sum, trigamma

__version__ = "0.1.0"
