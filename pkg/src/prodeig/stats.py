"""Empirical point-process statistics and theory comparison.

Density estimation happens in chart coordinates.  Clouds may carry
per-point weights (the chart's display weights); the weighted histogram
then estimates the theorem's unfolded intensity, whose limit is the
predicted kernel diagonal.  Distances are computed over bins with enough
counts for the Poisson error model; aggregation across replicas is a
commutative merge, so thread scheduling cannot affect results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels_exact import ExactKernelSpec, log_moment_integral, log_orthogonal_mass

__all__ = [
    "PointCloud",
    "DensityEstimate",
    "ComparisonReport",
    "InsufficientDataError",
    "merge_clouds",
    "estimate_density",
    "estimate_profile",
    "disk_mean_density",
    "compare",
    "radial_cdf_check",
    "normality_report",
    "weight_moment_check",
]


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class PointCloud:
    """Pulled-back points from many replicas, with optional display weights."""

    points: np.ndarray
    replica_count: int
    points_per_replica_expected: float = math.nan
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.replica_count < 1:
            raise ValueError("replica_count must be >= 1")
        if self.weights is not None and len(self.weights) != len(self.points):
            raise ValueError("weights/points length mismatch")


def merge_clouds(a, b):
    """Commutative, associative merge of two clouds."""
    wa = a.weights if a.weights is not None else np.ones(len(a.points))
    wb = b.weights if b.weights is not None else np.ones(len(b.points))
    expected = a.points_per_replica_expected
    if math.isnan(expected):
        expected = b.points_per_replica_expected
    return PointCloud(
        np.concatenate([a.points, b.points]),
        a.replica_count + b.replica_count,
        expected,
        np.concatenate([wa, wb]),
    )


@dataclass(frozen=True)
class DensityEstimate:
    """Binned density over a chart window (2-D grid or 1-D profile)."""

    edges_x: np.ndarray
    edges_y: np.ndarray | None
    counts: np.ndarray
    density: np.ndarray
    std_error: np.ndarray
    replica_count: int

    @property
    def centers_x(self):
        return 0.5 * (self.edges_x[:-1] + self.edges_x[1:])

    @property
    def centers_y(self):
        if self.edges_y is None:
            return None
        return 0.5 * (self.edges_y[:-1] + self.edges_y[1:])


def estimate_density(cloud, bin_width, window):
    """2-D weighted histogram density over the square [-window, window]^2.

    density = (sum of weights in bin) / (replicas * bin area); the Poisson
    standard error uses the raw counts scaled by the mean bin weight.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be > 0")
    nb = max(1, int(round(2.0 * window / bin_width)))
    edges = np.linspace(-window, window, nb + 1)
    pts = np.asarray(cloud.points)
    w = cloud.weights if cloud.weights is not None else np.ones(len(pts))
    x = np.real(pts)
    y = np.imag(pts)
    counts, _, _ = np.histogram2d(x, y, bins=[edges, edges])
    wsum, _, _ = np.histogram2d(x, y, bins=[edges, edges], weights=w)
    area = (edges[1] - edges[0]) ** 2
    norm = cloud.replica_count * area
    density = wsum / norm
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_w = np.where(counts > 0, wsum / counts, 1.0)
    err = np.sqrt(np.maximum(counts, 1.0)) * mean_w / norm
    err[counts == 0] = math.inf
    return DensityEstimate(edges, edges, counts, density, err, cloud.replica_count)


def estimate_profile(cloud, bin_width, window, axis="real"):
    """1-D weighted histogram along Re v or the real coordinate itself.

    Used where the predicted diagonal depends only on one coordinate (the
    supercritical radial coordinate; the critical kernels' Re v).  The
    density is per unit length of the binned coordinate; for complex
    clouds the transverse coordinate is NOT divided out, so predictions
    must be pre-integrated accordingly by the caller.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be > 0")
    pts = np.asarray(cloud.points)
    x = np.real(pts) if axis == "real" else np.imag(pts)
    w = cloud.weights if cloud.weights is not None else np.ones(len(pts))
    nb = max(1, int(round(2.0 * window / bin_width)))
    edges = np.linspace(-window, window, nb + 1)
    counts, _ = np.histogram(x, bins=edges)
    wsum, _ = np.histogram(x, bins=edges, weights=w)
    norm = cloud.replica_count * (edges[1] - edges[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_w = np.where(counts > 0, wsum / counts, 1.0)
    err = np.sqrt(np.maximum(counts, 1.0)) * mean_w / norm
    err[counts == 0] = math.inf
    return DensityEstimate(edges, None, counts.astype(float), wsum / norm, err, cloud.replica_count)


def disk_mean_density(cloud, radius):
    """(weighted count inside |v| <= radius) / (replicas * disk area), with s.e."""
    pts = np.asarray(cloud.points)
    w = cloud.weights if cloud.weights is not None else np.ones(len(pts))
    inside = np.abs(pts) <= radius
    norm = cloud.replica_count * math.pi * radius**2
    n = float(np.sum(inside))
    val = float(np.sum(w[inside])) / norm
    err = math.sqrt(max(n, 1.0)) * (np.mean(w[inside]) if n else 1.0) / norm
    return val, err


@dataclass(frozen=True)
class ComparisonReport:
    sup_distance: float
    l1_distance: float
    max_z_score: float
    passed: bool
    table: list = field(repr=False, default_factory=list)
    sup_tolerance: float = math.nan
    z_threshold: float = math.nan

    def to_dict(self):
        return {
            "sup_distance": self.sup_distance,
            "l1_distance": self.l1_distance,
            "max_z_score": self.max_z_score,
            "pass": self.passed,
            "sup_tolerance": self.sup_tolerance,
            "z_threshold": self.z_threshold,
        }


_MIN_BIN_COUNT = 5


def compare(est, predicted, sup_tolerance=math.inf, z_threshold=4.0, min_count=_MIN_BIN_COUNT,
            region=None):
    """Distances between a density estimate and a predicted density.

    ``predicted`` is evaluated at bin centres (complex centres for 2-D
    grids).  Bins with fewer than ``min_count`` points, or whose centre
    falls outside ``region`` (a predicate), are excluded; bins straddling
    the chart window boundary must be masked this way or their partial
    coverage shows up as spurious deficit.  Passing requires
    max |z| <= z_threshold and sup-distance <= sup_tolerance.
    """
    rows = []
    if est.edges_y is None:
        get = lambda i, _j: (est.counts[i], est.density[i], est.std_error[i])
        cells = [(i, None) for i in range(len(est.centers_x))]
    else:
        cells = [
            (i, j) for i in range(len(est.centers_x)) for j in range(len(est.centers_y))
        ]
        get = lambda i, j: (est.counts[i, j], est.density[i, j], est.std_error[i, j])
    sup = 0.0
    l1 = 0.0
    maxz = 0.0
    area = est.edges_x[1] - est.edges_x[0]
    if est.edges_y is not None:
        area *= est.edges_y[1] - est.edges_y[0]
    for i, j in cells:
        cx = est.centers_x[i]
        c = cx if j is None else complex(cx, est.centers_y[j])
        count, dens, err = get(i, j)
        pred = float(predicted(c))
        if count < min_count:
            continue
        dev = dens - pred
        z = dev / err if err > 0 else math.inf
        sup = max(sup, abs(dev))
        l1 += abs(dev) * area
        maxz = max(maxz, abs(z))
        rows.append({"center": c, "count": float(count), "density": float(dens),
                     "predicted": pred, "z": float(z)})
    passed = maxz <= z_threshold and sup <= sup_tolerance
    return ComparisonReport(sup, l1, maxz, passed, rows, sup_tolerance, z_threshold)


def radial_cdf_check(sample, N):
    """KS-style distance of |z|/sqrt(N) moduli to the circular-law CDF min(r^2, 1)."""
    r = np.exp(np.asarray(sample.eigen_log_moduli) - 0.5 * math.log(N))
    r = np.sort(r)
    n = len(r)
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    f = np.minimum(r**2, 1.0)
    d = float(np.max(np.maximum(np.abs(grid_hi - f), np.abs(grid_lo - f))))
    passed = d <= 1.36 / math.sqrt(n)  # 95% KS point
    return ComparisonReport(d, d, math.nan, passed, [], 1.36 / math.sqrt(n))


@dataclass(frozen=True)
class NormalityReport:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    passed: bool


def normality_report(samples, skew_tol=0.25, kurt_tol=0.5):
    """Moment-based normality diagnostics for >= 200 samples."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 200:
        raise InsufficientDataError(f"need >= 200 samples, got {len(x)}")
    mu = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    if var <= 0:
        raise InsufficientDataError("degenerate (constant) sample")
    c = x - mu
    skew = float(np.mean(c**3)) / var**1.5
    kurt = float(np.mean(c**4)) / var**2 - 3.0
    passed = abs(skew) <= skew_tol and abs(kurt) <= kurt_tol
    return NormalityReport(mu, var, skew, kurt, passed)


def weight_moment_check(spec: ExactKernelSpec, j):
    """Relative error of the quadrature moment against pi h_j."""
    target = math.log(math.pi) + log_orthogonal_mass(spec, j)
    got = log_moment_integral(spec, j)
    return abs(math.expm1(got - target))
