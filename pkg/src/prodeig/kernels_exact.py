"""Exact finite-size determinantal kernels for the three product models.

The radial weight w(|z|) is an inverse Mellin transform of gamma-function
powers.  For models A and C it is evaluated by trapezoidal quadrature along
a vertical contour Re s = -c, assembled in log space; by default the
contour is placed through the real saddle of the integrand, which keeps the
rescaled integrand positive and O(1) for every radius (a fixed small offset
suffers catastrophic cancellation once |z| leaves the unit scale).  An
explicitly supplied offset is honoured as given, for contour-sensitivity
checks at small radii.

For model B the integrand is a rational function raised to the M-th power
(the gamma ratio telescopes for integer truncation depth), so its vertical
tails decay only polynomially; the weight is instead computed exactly from
the residue series, a polynomial in log r^2 with powers of r^2, supported
on the unit disk.

Truncated series, kernels and correlation determinants carry values as
(log-modulus, phase) pairs so that products with hundreds of factors stay
inside double range.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln, loggamma, polygamma

from .specfun import AccuracyError, digamma

__all__ = [
    "ExactKernelSpec",
    "LogComplex",
    "weight",
    "log_weight",
    "truncated_sum",
    "kernel",
    "kernel_log",
    "kernel_diag",
    "log_kernel_diag",
    "correlation",
    "log_orthogonal_mass",
    "log_moment_integral",
    "radial_intensity_integral",
]

log = logging.getLogger(__name__)

_MODELS = ("A", "B", "C")


@dataclass(frozen=True)
class ExactKernelSpec:
    """Model parameters plus contour-quadrature controls.

    ``contour_offset``, ``contour_half_width`` and ``quadrature_step``
    default to None, meaning: place the contour at the saddle of the
    integrand, choose the step from the curvature there and the width of
    the pole-free strip, and extend the grid until the certified envelope
    drops below ``target_tolerance``.
    """

    model: str
    M: int
    N: int
    L: int = 0
    contour_offset: float | None = None
    contour_half_width: float | None = None
    quadrature_step: float | None = None
    target_tolerance: float = 1e-10

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be >= 1")
        if self.model in ("B", "C") and self.L < 1:
            raise ValueError(f"model {self.model} requires L >= 1")
        if self.target_tolerance <= 0:
            raise ValueError("target_tolerance must be > 0")
        c = self.contour_offset
        if c is not None:
            hi = 1.0 if self.model in ("A", "B") else self.N + 1.0
            if not 0.0 < c < hi:
                raise ValueError(f"contour_offset must lie in (0, {hi}) for model {self.model}")
        if self.quadrature_step is not None and self.quadrature_step <= 0:
            raise ValueError("quadrature_step must be > 0")
        if self.contour_half_width is not None and self.contour_half_width <= 0:
            raise ValueError("contour_half_width must be > 0")


@dataclass(frozen=True)
class LogComplex:
    """A complex value |v| = exp(log_modulus), arg v = phase in (-pi, pi]."""

    log_modulus: float
    phase: float

    @staticmethod
    def from_complex(z):
        z = complex(z)
        if z == 0:
            return LogComplex(-math.inf, 0.0)
        return LogComplex(math.log(abs(z)), cmath.phase(z))

    def to_complex(self):
        return cmath.rect(math.exp(self.log_modulus), self.phase)


def _wrap_phase(p):
    p = math.remainder(p, 2.0 * math.pi)
    if p <= -math.pi:
        p += 2.0 * math.pi
    return p


# ---------------------------------------------------------------------------
# Weight function
# ---------------------------------------------------------------------------


def _saddle_offset(spec, logr):
    """Real saddle of the contour integrand (minimiser of its t=0 value)."""
    M, N, L = spec.M, spec.N, spec.L
    if spec.model == "A":
        f = lambda c: M * digamma(c) - 2.0 * logr
        lo, hi = 1e-12, 8.0
    elif spec.model == "B":
        f = lambda c: M * (digamma(c) - digamma(L + c)) - 2.0 * logr
        lo, hi = 1e-12, 8.0
    else:
        f = lambda c: M * digamma(c) - L * digamma(N + 1.0 - c) - 2.0 * logr
        return brentq(f, 1e-9, N + 1.0 - 1e-9, xtol=1e-13, rtol=8.9e-16)
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise AccuracyError("saddle search failed")
    while f(lo) > 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise AccuracyError("saddle search failed")
    return brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)


def _log_integrand(spec, c, t, logr):
    """phi(t) = log of the Mellin integrand at s = -c + i t."""
    M, N, L = spec.M, spec.N, spec.L
    s = M * loggamma(c - 1j * t)
    if spec.model == "B":
        s = s - M * loggamma(L + c - 1j * t)
    elif spec.model == "C":
        s = s + L * loggamma(N + 1.0 - c + 1j * t)
    return s + 2.0 * (-c + 1j * t) * logr


def _curvature(spec, c):
    M, N, L = spec.M, spec.N, spec.L
    curv = M * polygamma(1, c)
    if spec.model == "B":
        curv -= M * polygamma(1, L + c)
    elif spec.model == "C":
        curv += L * polygamma(1, N + 1.0 - c)
    return float(curv)


def _log_weight_zero_radius(spec):
    # r = 0 limits: finite for M = 1, logarithmically divergent otherwise.
    if spec.M > 1:
        return math.inf
    if spec.model == "A":
        return 0.0
    if spec.model == "B":
        return -gammaln(spec.L)
    return spec.L * gammaln(spec.N + 1.0)


def _weight_b_residue(spec, r):
    """Model B weight from the residue series (exact for integer L).

    The Mellin integrand is r^{2s} prod_{j<L} (j-s)^{-M}; summing the
    order-M residues at s = 0..L-1 gives w(r) = sum_m r^{2m} P_m(2 log r)
    with the P_m assembled by short power-series arithmetic.
    """
    M, L = spec.M, spec.L
    if r >= 1.0:
        return 0.0
    lr2 = 2.0 * math.log(r)
    total = 0.0
    for m in range(L):
        # series of H(s) = prod_{j != m} (j - s)^{-M} around s = m:
        # log H(m + e) = log H(m) + M sum_k p_k e^k / k, p_k = sum (j-m)^{-k}
        sign = -1.0 if (m % 2) and (M % 2) else 1.0
        logh0 = -M * sum(math.log(abs(j - m)) for j in range(L) if j != m)
        series = np.zeros(M)
        for k in range(1, M):
            series[k] = M * sum(float(j - m) ** (-k) for j in range(L) if j != m) / k
        es = np.zeros(M)
        es[0] = 1.0
        term = es.copy()
        for n in range(1, M):
            term = np.convolve(term, series)[:M] / n
            es += term
        ex = np.array([lr2**k / math.factorial(k) for k in range(M)])
        g = np.convolve(sign * math.exp(logh0) * es, ex)[: M]
        total += (-1.0) ** M * g[M - 1] * r ** (2 * m)
    return max(-total, 0.0)


def log_weight(spec, r):
    """log w(|z| = r).  Returns -inf where the weight vanishes."""
    r = float(r)
    if r < 0.0:
        raise ValueError("radius must be >= 0")
    if r == 0.0:
        return _log_weight_zero_radius(spec)
    if spec.model == "B":
        if r >= 1.0:
            # weight supported in the unit disk; quadrature there is pure
            # cancellation, so short-circuit to 0.
            return -math.inf
        if spec.contour_offset is None and spec.quadrature_step is None:
            w = _weight_b_residue(spec, r)
            return math.log(w) if w > 0.0 else -math.inf
    return _log_weight_quadrature(spec, r)


def _log_weight_quadrature(spec, r):
    logr = math.log(r)
    c = spec.contour_offset
    if c is None:
        c = _saddle_offset(spec, logr)
    sigma = 1.0 / math.sqrt(_curvature(spec, c))
    strip = c if spec.model in ("A", "B") else min(c, spec.N + 1.0 - c)
    tol = spec.target_tolerance
    h = spec.quadrature_step
    if h is None:
        h = min(0.7 * sigma, 2.0 * math.pi * strip / math.log(1.0 / min(tol, 1e-14)))
        if abs(logr) > 1.0:
            # resolve the |z|^{2it} oscillation off the saddle
            h = min(h, math.pi / (4.0 * abs(logr)))
    m0 = float(np.real(_log_integrand(spec, c, 0.0, logr)))
    t_cap = spec.contour_half_width
    if t_cap is None:
        t_cap = max(80.0 * sigma, 40.0 / max(spec.M, 1) + 10.0) + 10.0 * strip + 20.0

    # tail terms of model B decay only polynomially; their oscillatory sum
    # is damped by a factor ~ 1/(2 |log r|), which the stop rule credits
    damp = 1.0 if spec.model != "B" else min(1.0, 1.0 / max(2.0 * abs(logr), 1e-3))

    total = 1.0  # exp(phi(0) - m0), accumulated with conjugate symmetry
    block = 64
    t0 = h
    quiet = 0
    last_mag = 1.0
    while True:
        ts = t0 + h * np.arange(block)
        vals = np.exp(_log_integrand(spec, c, ts, logr) - m0)
        total += 2.0 * float(np.sum(np.real(vals)))
        last_mag = float(np.abs(vals[-1]))
        if last_mag * damp < tol * 1e-3 * max(abs(total), 1e-6):
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        t0 = float(ts[-1]) + h
        if t0 > t_cap:
            raise AccuracyError(
                f"weight quadrature did not reach tolerance within |Im s| <= {t_cap:.3g}",
                achieved=last_mag * damp,
            )
    if total <= 0.0:
        # cancellation beyond representable range on an explicit contour
        log.debug("weight quadrature gave non-positive rescaled sum %g at r=%g", total, r)
        return -math.inf
    return m0 + math.log(h * total / (2.0 * math.pi))


def weight(spec, r):
    """w(|z| = r) >= 0; tiny cancellation-negative results clamp to 0."""
    lw = log_weight(spec, r)
    if lw == -math.inf:
        return 0.0
    return math.exp(lw)


# ---------------------------------------------------------------------------
# Truncated series and kernels
# ---------------------------------------------------------------------------


def _log_series_coeffs(spec):
    """log of the positive series coefficients g_j, T = sum_j g_j (z1 conj(z2))^j."""
    j = np.arange(spec.N)
    if spec.model == "A":
        return -spec.M * gammaln(j + 1.0)
    if spec.model == "B":
        return spec.M * (gammaln(spec.L + j + 1.0) - gammaln(j + 1.0))
    return -spec.M * gammaln(j + 1.0) - spec.L * gammaln(spec.N - j.astype(float))


def _aslog(z):
    if isinstance(z, LogComplex):
        return z
    return LogComplex.from_complex(z)


def truncated_sum(spec, z1, z2):
    """T(z1, z2) = sum_{j<N} g_j (z1 conj(z2))^j as a LogComplex.

    Accepts complex numbers or LogComplex points; the finite sum is exact
    up to rounding (the largest term is factored out before accumulation).
    """
    l1 = _aslog(z1)
    l2 = _aslog(z2)
    coeffs = _log_series_coeffs(spec)
    if math.isinf(l1.log_modulus) or math.isinf(l2.log_modulus):
        return LogComplex(float(coeffs[0]), 0.0)  # only j = 0 survives
    logprod = l1.log_modulus + l2.log_modulus
    dphase = l1.phase - l2.phase
    j = np.arange(spec.N)
    re_log = coeffs + j * logprod
    shift = float(np.max(re_log))
    total = complex(np.sum(np.exp(re_log - shift + 1j * j * dphase)))
    if total == 0:
        return LogComplex(-math.inf, 0.0)
    return LogComplex(shift + math.log(abs(total)), _wrap_phase(cmath.phase(total)))


def kernel_log(spec, z1, z2):
    """K(z1, z2) as a LogComplex."""
    l1 = _aslog(z1)
    l2 = _aslog(z2)
    r1 = 0.0 if math.isinf(l1.log_modulus) else math.exp(l1.log_modulus)
    r2 = 0.0 if math.isinf(l2.log_modulus) else math.exp(l2.log_modulus)
    lw1 = log_weight(spec, r1)
    lw2 = log_weight(spec, r2)
    if spec.model == "B" and (lw1 == -math.inf or lw2 == -math.inf):
        raise ValueError("model B kernel requires both points strictly inside the unit disk")
    t = truncated_sum(spec, l1, l2)
    return LogComplex(0.5 * (lw1 + lw2) + t.log_modulus - math.log(math.pi), t.phase)


def kernel(spec, z1, z2):
    """K(z1, z2) as a complex double (may over/underflow; see kernel_log)."""
    return kernel_log(spec, z1, z2).to_complex()


def log_kernel_diag(spec, log_r):
    """log K(z, z) for |z| = exp(log_r); the diagonal is radial and real."""
    coeffs = _log_series_coeffs(spec)
    j = np.arange(spec.N)
    re_log = coeffs + 2.0 * j * log_r
    shift = float(np.max(re_log))
    t = shift + math.log(float(np.sum(np.exp(re_log - shift))))
    lw = log_weight(spec, math.exp(log_r))
    return lw + t - math.log(math.pi)


def kernel_diag(spec, r):
    """R^(1)(z) = K(z, z) at |z| = r."""
    r = float(r)
    if r == 0.0:
        lw = log_weight(spec, 0.0)
        return math.exp(lw + float(_log_series_coeffs(spec)[0]) - math.log(math.pi))
    lk = log_kernel_diag(spec, math.log(r))
    return 0.0 if lk == -math.inf else math.exp(lk)


_CORRELATION_MAX_POINTS = 8


def correlation(spec, points):
    """n-point correlation det[K(z_i, z_j)], n <= 8.

    Entries are assembled from LogComplex kernels with a per-row log factor
    extracted; cancellation-negative determinants clamp to 0.
    """
    pts = [_aslog(z) for z in points]
    n = len(pts)
    if not 1 <= n <= _CORRELATION_MAX_POINTS:
        raise ValueError(f"correlation supports 1..{_CORRELATION_MAX_POINTS} points, got {n}")
    logw = []
    for p in pts:
        r = 0.0 if math.isinf(p.log_modulus) else math.exp(p.log_modulus)
        lw = log_weight(spec, r)
        if spec.model == "B" and lw == -math.inf:
            raise ValueError("model B correlation requires points inside the unit disk")
        logw.append(lw)
    logmat = np.empty((n, n))
    phases = np.empty((n, n))
    for i in range(n):
        for k in range(n):
            t = truncated_sum(spec, pts[i], pts[k])
            logmat[i, k] = 0.5 * (logw[i] + logw[k]) + t.log_modulus - math.log(math.pi)
            phases[i, k] = t.phase
    row_shift = np.max(logmat, axis=1)
    mat = np.exp(logmat - row_shift[:, None] + 1j * phases)
    det = complex(np.linalg.det(mat))
    value = det.real * math.exp(float(np.sum(row_shift)))
    if value < 0.0:
        log.debug("correlation clamped raw value %g to 0", value)
        return 0.0
    return value


# ---------------------------------------------------------------------------
# Orthogonality masses and radial integrals
# ---------------------------------------------------------------------------


def log_orthogonal_mass(spec, j):
    """log h_j, where the integral of w(z) |z|^{2j} over the plane is pi h_j."""
    if not 0 <= j <= spec.N - 1:
        raise ValueError(f"j must lie in [0, N-1], got {j}")
    if spec.model == "A":
        return spec.M * gammaln(j + 1.0)
    if spec.model == "B":
        return spec.M * (gammaln(j + 1.0) - gammaln(spec.L + j + 1.0))
    return spec.M * gammaln(j + 1.0) + spec.L * gammaln(float(spec.N - j))


def _log_peaked_integral(f_log, x_lo, x_hi, n_coarse=160):
    """log of integral exp(f_log(x)) dx: coarse peak scan, then quad."""
    xs = np.linspace(x_lo, x_hi, n_coarse)
    vals = np.array([f_log(x) for x in xs])
    vals[~np.isfinite(vals)] = -math.inf
    i0 = int(np.argmax(vals))
    peak = float(vals[i0])
    keep = vals > peak - 46.0
    lo = float(xs[int(np.argmax(keep))])
    hi = float(xs[len(keep) - 1 - int(np.argmax(keep[::-1]))])
    pad = 0.1 * (hi - lo) + 1e-3
    lo = max(x_lo, lo - pad)
    hi = min(x_hi, hi + pad)

    def g(x):
        v = f_log(x)
        return math.exp(v - peak) if math.isfinite(v) else 0.0

    val, _ = quad(g, lo, hi, points=[float(xs[i0])], limit=300, epsabs=1e-13, epsrel=1e-11)
    return peak + math.log(val)


def log_moment_integral(spec, j):
    """log of the integral over the plane of w(z) |z|^{2j} dA, by radial quadrature.

    In x = log r the integrand is w(e^x) e^{(2j+2)x}; the moment tests
    compare exp of this against pi h_j.
    """
    if spec.model == "B":
        x_lo, x_hi = -16.0, -1e-12
    else:
        x_hi = math.log(max(spec.N + j + 4.0, 10.0)) * max(spec.M, spec.L + 1) / 2.0 + 4.0
        x_lo = -14.0
    f = lambda x: log_weight(spec, math.exp(x)) + (2.0 * j + 2.0) * x
    return math.log(2.0 * math.pi) + _log_peaked_integral(f, x_lo, x_hi)


def radial_intensity_integral(spec):
    """Integral over the plane of R^(1), by radial quadrature; equals N in theory."""
    if spec.model == "B":
        x_lo, x_hi = -16.0, -1e-12
    else:
        x_hi = math.log(max(2.0 * spec.N, 10.0)) * max(spec.M, spec.L + 1) / 2.0 + 4.0
        x_lo = -14.0
    f = lambda x: log_kernel_diag(spec, x) + 2.0 * x
    return math.exp(math.log(2.0 * math.pi) + _log_peaked_integral(f, x_lo, x_hi))
