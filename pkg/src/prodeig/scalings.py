"""Local coordinate charts of the nine limit theorems.

A chart packages the map v -> z from local to global eigenvalue
coordinates, the unfolding prefactor of the theorem display, the predicted
limit kernel, and the multivalued pullback z -> v used to bin empirical
eigenvalues.  The limit ratios gamma = M/N, tau = L/N, gamma1, gamma2 are
instantiated with the run's actual finite-size values.

Two chart geometries exist.  Supercritical charts are affine in
(log-modulus, angle): z = exp(center + kappa v) e^{i(theta + phi)} with a
free angle.  The critical and subcritical charts are power charts
z = B (1 + a (v - shift))^P; their pullback expands each eigenvalue into
its P root branches before inverting the affine inner map, keeping the
branches that land in the chart window (choosing a principal branch would
bias the angular statistics).

Model D charts reuse model C's formulas (its limit statements are asserted
to coincide with model C's).

Two misprints in the source theorems are corrected here, each confirmed
against the corresponding proof and by direct macroscopic density checks:
the supercritical model-B centre has the sign giving contraction
(psi(N-k+1) - psi(L+N-k+1) < 0), and the model-C charts carry N^{(M-L)/2}
with per-point prefactor (M+L)/(rho |u| N).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels_exact import LogComplex
from .kernels_limit import (
    CriticalBulk,
    CriticalEdge,
    GaussianDensity,
    GinibreBulk,
    GinibreEdge,
)
from .specfun import digamma, trigamma

__all__ = ["RegimeSpec", "RadialChart", "PowerChart", "chart"]

_REGIMES = ("supercritical", "critical", "subcritical")
_MODELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class RegimeSpec:
    """Which theorem to instantiate: model, regime, sizes and base point.

    base parameters by (model, regime):
      supercritical: k (ring index), optional theta;
      critical:      q in [0, 1) (A/B; q = 0 is the edge) or (0, 1) (C/D),
                     theta;
      subcritical:   A: u complex (|u| <= 1); B: q in (0, 1] (q = 1 is the
                     edge); C/D: q in (0, 1); theta.
    """

    model: str
    regime: str
    M: int
    N: int
    L: int = 0
    k: int | None = None
    q: float | None = None
    u: complex | None = None
    theta: float = 0.0
    window_radius: float = 3.0

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")
        if self.regime not in _REGIMES:
            raise ValueError(f"regime must be one of {_REGIMES}")
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be >= 1")
        if self.model in ("B", "C", "D") and self.L < 1:
            raise ValueError(f"model {self.model} charts require L >= 1")
        if self.window_radius <= 0:
            raise ValueError("window_radius must be > 0")
        if self.regime == "supercritical":
            if self.k is None or not 1 <= self.k <= self.N:
                raise ValueError("supercritical charts need k in [1, N]")
        elif self.regime == "critical":
            if self.q is None:
                raise ValueError("critical charts need q")
            if self.model in ("A", "B") and not 0.0 <= self.q < 1.0:
                raise ValueError("critical q must lie in [0, 1)")
            if self.model in ("C", "D") and not 0.0 < self.q < 1.0:
                raise ValueError("model C/D critical q must lie in (0, 1)")
        else:
            if self.model == "A":
                if self.u is None or abs(self.u) == 0 or abs(self.u) > 1.0 + 1e-12:
                    raise ValueError("model A subcritical charts need u with 0 < |u| <= 1")
            elif self.model == "B":
                if self.q is None or not 0.0 < self.q <= 1.0:
                    raise ValueError("model B subcritical q must lie in (0, 1]")
            else:
                if self.q is None or not 0.0 < self.q < 1.0:
                    raise ValueError("model C/D subcritical q must lie in (0, 1)")

    @property
    def gamma(self):
        return self.M / self.N

    @property
    def tau(self):
        return self.L / self.N

    @property
    def gamma1(self):
        return self.M / self.N

    @property
    def gamma2(self):
        return self.L / self.N


def _wrap(p):
    p = math.remainder(p, 2.0 * math.pi)
    if p <= -math.pi:
        p += 2.0 * math.pi
    return p


@dataclass(frozen=True)
class RadialChart:
    """Affine chart in (log-modulus, angle) for the supercritical regime."""

    spec: RegimeSpec
    center: float  # centre of log|z|
    kappa: float  # d log|z| / dv
    rho: float  # the theorem's length scale
    theta: float
    predicted: GaussianDensity = field(default_factory=GaussianDensity)

    @property
    def window_radius(self):
        return self.spec.window_radius

    def forward(self, v, phi=0.0):
        return LogComplex(self.center + self.kappa * float(v), _wrap(self.theta + phi))

    def pullback(self, sample):
        """Local radial coordinates of all eigenvalues inside the window."""
        v = (np.asarray(sample.eigen_log_moduli) - self.center) / self.kappa
        return v[np.abs(v) <= self.spec.window_radius]

    def log_prefactor(self, points):
        """log of the theorem's n-point prefactor at global points."""
        total = 0.0
        for z in points:
            lz = z if isinstance(z, LogComplex) else LogComplex.from_complex(z)
            total += math.log(self.kappa) + 2.0 * lz.log_modulus
        return total

    def pooled_predicted_density(self, v):
        """Density of v after pooling the uniform angle (integrates to 1)."""
        return self.predicted.pooled_density(v)


@dataclass(frozen=True)
class PowerChart:
    """Chart z = B (1 + a (v - shift))^P for critical/subcritical regimes."""

    spec: RegimeSpec
    power: int
    base: LogComplex
    a: complex
    shift: complex
    log_pref_const: float  # per-point constant of the theorem prefactor
    predicted: object
    rho: float | None = None
    beta: float | None = None
    u_mod: float | None = None

    def __post_init__(self):
        if self.spec.window_radius * abs(self.a) >= 0.9:
            raise ValueError(
                "window_radius leaves the chart's injectivity domain "
                f"(|a| window = {self.spec.window_radius * abs(self.a):.3g})"
            )

    @property
    def window_radius(self):
        return self.spec.window_radius

    def _bracket(self, v):
        return 1.0 + self.a * (complex(v) - self.shift)

    def forward(self, v, phi=0.0):
        w = self._bracket(v)
        lw = cmath.log(w)  # |a (v - shift)| < 1 keeps this on the principal branch
        return LogComplex(
            self.base.log_modulus + self.power * lw.real,
            _wrap(self.base.phase + self.power * lw.imag),
        )

    def forward_complex(self, v):
        return self.forward(v).to_complex()

    def pullback(self, sample):
        """All P root branches of each eigenvalue, window-filtered."""
        lm = np.asarray(sample.eigen_log_moduli)
        ph = np.asarray(sample.eigen_phases)
        p = self.power
        m = np.arange(p)
        g_log = (lm[:, None] - self.base.log_modulus) / p
        g_arg = (ph[:, None] - self.base.phase + 2.0 * math.pi * m[None, :]) / p
        g = np.exp(g_log + 1j * g_arg)
        v = self.shift + (g - 1.0) / self.a
        v = v.ravel()
        return v[np.abs(v) <= self.spec.window_radius]

    def log_prefactor(self, points):
        """log of the theorem's n-point prefactor at global points."""
        total = 0.0
        for z in points:
            lz = z if isinstance(z, LogComplex) else LogComplex.from_complex(z)
            total += self.log_pref_const + 2.0 * lz.log_modulus
        return total

    def log_jacobian(self, v):
        """log |dz/dv|^2 of the forward map."""
        w = self._bracket(v)
        return (
            2.0 * self.base.log_modulus
            + math.log(self.power**2 * abs(self.a) ** 2)
            + (2.0 * self.power - 2.0) * math.log(abs(w))
        )

    def display_weight(self, v):
        """Per-point weight converting the branch density into the theorem display.

        A pullback point at v, weighted by exp(prefactor + 2 log|z(v)|
        - log|dz/dv|^2), estimates the theorem's unfolded intensity, whose
        predicted limit is the chart's kernel diagonal.
        """
        z = self.forward(v)
        return math.exp(self.log_pref_const + 2.0 * z.log_modulus - self.log_jacobian(v))


def _supercritical(spec):
    M, N, L, k = spec.M, spec.N, spec.L, spec.k
    if spec.model == "A":
        rho = 2.0 / math.sqrt(N * trigamma(N - k + 1))
        center = M * 0.5 * digamma(N - k + 1)
        kappa = math.sqrt(M / N) / rho
    elif spec.model == "B":
        curv = trigamma(N - k + 1) - trigamma(L + N - k + 1)
        rho = 2.0 / math.sqrt(N * curv)
        # centre sign corrected: products of truncations contract, the
        # k-th modulus sits at exp(M/2 (psi(N-k+1) - psi(L+N-k+1))) < 1
        center = M * 0.5 * (digamma(N - k + 1) - digamma(L + N - k + 1))
        kappa = math.sqrt(M / N) / rho
    else:
        rho = 2.0 / math.sqrt(M * trigamma(N - k + 1) + L * trigamma(k))
        center = 0.5 * (M * digamma(N - k + 1) - L * digamma(k))
        kappa = 1.0 / rho
    return RadialChart(spec, center, kappa, rho, spec.theta)


def _critical(spec):
    M, N, L, q, theta = spec.M, spec.N, spec.L, spec.q, spec.theta
    g, t = spec.gamma, spec.tau
    qfloor = math.floor(q * N) / N
    if spec.model == "A":
        u2 = 1.0 - qfloor
        base = LogComplex(M * 0.5 * (math.log(N) + math.log(u2)), _wrap(M * theta))
        shift = g / (4.0 * (1.0 - q))
        power = M
        pred = CriticalBulk(g / (1.0 - q)) if q > 0 else CriticalEdge(g)
    elif spec.model == "B":
        u2 = 1.0 - qfloor
        base = LogComplex(M * 0.5 * math.log(u2), _wrap(M * theta))
        shift = g * t / (4.0 * (1.0 - q) * (1.0 - q + t))
        power = M
        pred = (
            CriticalBulk(g * t / ((1.0 - q) * (1.0 - q + t)))
            if q > 0
            else CriticalEdge(g * t / (1.0 + t))
        )
    else:
        g1, g2 = spec.gamma1, spec.gamma2
        u2 = (1.0 - qfloor) ** (M / (M + L)) * ((math.floor(q * N) + 1.0) / N) ** (-L / (M + L))
        power = M + L
        base = LogComplex(
            0.5 * (M - L) * math.log(N) + power * 0.5 * math.log(u2), _wrap(power * theta)
        )
        shift = g1 / (4.0 * (1.0 - q)) + g2 / (4.0 * q)
        pred = CriticalBulk(g1 / (1.0 - q) + g2 / q)
    a = 1.0 / math.sqrt((spec.gamma1 + (spec.gamma2 if spec.model in ("C", "D") else 0.0)) * power * N)
    beta = getattr(pred, "beta", None)
    return PowerChart(spec, power, base, a, shift, 0.0, pred, beta=beta, u_mod=math.sqrt(u2))


def _subcritical(spec):
    M, N, L, theta = spec.M, spec.N, spec.L, spec.theta
    if spec.model == "A":
        u = complex(spec.u)
        umod = abs(u)
        theta = cmath.phase(u)
        base = LogComplex(M * (0.5 * math.log(N) + math.log(umod)), _wrap(M * theta))
        a = 1.0 / (u * math.sqrt(M * N))
        power = M
        pref = math.log(M / (N * umod**2))
        pred = GinibreBulk() if umod < 1.0 - 1e-12 else GinibreEdge(theta)
        return PowerChart(spec, power, base, a, 0.0, pref, pred, u_mod=umod)
    if spec.model == "B":
        q = spec.q
        u2 = q * N / (q * N + L)
        rho = math.sqrt(spec.tau) / (1.0 - u2)
        u = math.sqrt(u2) * cmath.exp(1j * theta)
        base = LogComplex(M * 0.5 * math.log(u2), _wrap(M * theta))
        a = 1.0 / (rho * u * math.sqrt(M * N))
        pref = math.log(M / (rho**2 * u2 * N))
        pred = GinibreBulk() if q < 1.0 else GinibreEdge(theta)
        return PowerChart(spec, M, base, a, 0.0, pref, pred, rho=rho, u_mod=math.sqrt(u2))
    q = spec.q
    power = M + L
    u2 = q ** (M / power) * (1.0 - q) ** (-L / power)
    umod = math.sqrt(u2)
    rho = q * (1.0 - q) * power / (umod * ((1.0 - q) * M + q * L))
    u = umod * cmath.exp(1j * theta)
    base = LogComplex(0.5 * (M - L) * math.log(N) + power * math.log(umod), _wrap(power * theta))
    a = 1.0 / (u * rho * math.sqrt(power * N))
    # per-point prefactor (M+L)/(rho |u| N); the source display carries M
    # where the L = 0 reduction and the exact spherical density require M+L
    pref = math.log(power / (rho * umod * N))
    return PowerChart(spec, power, base, a, 0.0, pref, GinibreBulk(), rho=rho, u_mod=umod)


def chart(spec):
    """Instantiate the theorem chart selected by a RegimeSpec."""
    if spec.regime == "supercritical":
        return _supercritical(spec)
    if spec.regime == "critical":
        return _critical(spec)
    return _subcritical(spec)
