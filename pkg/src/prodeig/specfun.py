"""Special functions used by the kernels and scaling charts.

Gamma-family functions are thin wrappers over scipy.special (which already
implements reflection/recurrence strategies accurate on vertical lines with
large imaginary part).  The Gaussian lattice sums are implemented here
directly: they are the one ingredient with no off-the-shelf equivalent in
the exact shape the kernels need (full- and half-lattice support, certified
geometric tail bound, term-count reporting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as _sp

__all__ = [
    "AccuracyError",
    "SeriesControl",
    "log_gamma",
    "digamma",
    "trigamma",
    "erfc",
    "erfcx",
    "theta_sum",
    "theta_sum_detailed",
    "ThetaSumResult",
]


class AccuracyError(ArithmeticError):
    """A numerical routine could not reach its requested tolerance.

    ``achieved`` carries the best bound that was certified.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the lattice sums."""

    relative_tolerance: float = 1e-14
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise ValueError("relative_tolerance must be > 0")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


_DEFAULT_CTL = SeriesControl()


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex z.

    Raises ValueError at the poles (z a non-positive integer on the real
    axis); callers that need Gamma itself exponentiate in their own log
    space.
    """
    zc = complex(z)
    if zc.imag == 0.0 and zc.real <= 0.0 and zc.real == math.floor(zc.real):
        raise ValueError(f"log_gamma pole at z={zc}")
    return complex(_sp.loggamma(zc))


def digamma(x):
    """psi(x) for real x > 0."""
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    return float(_sp.digamma(x))


def trigamma(x):
    """psi'(x) for real x > 0."""
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"trigamma requires x > 0, got {x}")
    return float(_sp.polygamma(1, x))


def erfc(z):
    """Complementary error function, entire continuation to complex z."""
    if np.isrealobj(z) and not isinstance(z, complex):
        return float(_sp.erfc(float(z)))
    return complex(_sp.erfc(complex(z)))


def erfcx(z):
    """Scaled complement exp(z^2) erfc(z), stable for large Re z.

    For complex z this is the Faddeeva function w(iz).
    """
    if isinstance(z, complex) or (hasattr(z, "imag") and np.imag(z) != 0):
        return complex(_sp.wofz(1j * complex(z)))
    return float(_sp.erfcx(float(z)))


@dataclass(frozen=True)
class ThetaSumResult:
    value: complex
    terms_used: int
    tail_bound: float


def theta_sum(beta, w, support="full", ctl=_DEFAULT_CTL):
    """Gaussian lattice sum sum_j exp(-beta j^2 / 2 - w j).

    ``support`` selects the index set: "full" sums over all integers,
    "half" over j = 0, 1, 2, ...  Terms are added outward from j = 0 and
    summation stops once the next term is below ``ctl.relative_tolerance``
    times the partial sum and the remaining tail is certified by a
    geometric bound.  Works in linear arithmetic; for parameter ranges
    where individual terms overflow doubles (|Re w|^2/(2 beta) >~ 700) the
    caller should use a resummed representation instead.
    """
    return theta_sum_detailed(beta, w, support, ctl).value


def theta_sum_detailed(beta, w, support="full", ctl=_DEFAULT_CTL):
    """As :func:`theta_sum` but reporting term count and tail bound."""
    beta = float(beta)
    if beta <= 0.0:
        raise ValueError(f"theta_sum requires beta > 0, got {beta}")
    if support not in ("full", "half"):
        raise ValueError(f"support must be 'full' or 'half', got {support!r}")
    w = complex(w)
    rew = abs(w.real)

    total = 1.0 + 0.0j  # j = 0
    nterms = 1
    j = 1
    while True:
        if support == "full":
            tp = np.exp(-0.5 * beta * j * j - w * j)
            tm = np.exp(-0.5 * beta * j * j + w * j)
            step = tp + tm
            mag = max(abs(tp), abs(tm))
            nterms += 2
        else:
            tp = np.exp(-0.5 * beta * j * j - w * j)
            step = tp
            mag = abs(tp)
            nterms += 1
        total += step
        # Beyond the term-magnitude peak (beta*j > |Re w|) the magnitude
        # ratio of consecutive terms is q = exp(-beta(j+1/2) + |Re w|) < 1,
        # so the tail is below mag*q/(1-q).
        if beta * j > rew:
            q = math.exp(-beta * (j + 0.5) + rew)
            if q < 1.0:
                tail = mag * q / (1.0 - q)
                if support == "full":
                    tail *= 2.0
                if tail <= ctl.relative_tolerance * abs(total) and mag <= ctl.relative_tolerance * abs(total):
                    return ThetaSumResult(complex(total), nterms, tail)
        j += 1
        if nterms > ctl.max_terms:
            raise AccuracyError(
                f"theta_sum: max_terms={ctl.max_terms} exceeded at beta={beta}, w={w}",
                achieved=mag / max(abs(total), 1e-300),
            )
