"""Deterministic replica execution.

Replicas are split into contiguous chunks processed by a small thread pool
(the heavy work happens in LAPACK with the GIL released; BLAS pools are
pinned to one thread meanwhile).  Every replica owns a counter-based
stream, and clouds merge commutatively, so the thread count and chunking
never change results.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from threadpoolctl import threadpool_limits

from .ensembles import exponent_monte_carlo, spectra_monte_carlo
from .scalings import PowerChart
from .stats import PointCloud, merge_clouds

__all__ = ["default_threads", "chart_cloud", "exponent_table", "collect_spectra"]


def default_threads():
    return max(1, os.cpu_count() or 1)


def _chunks(replicas, threads):
    per = math.ceil(replicas / max(1, threads))
    return [(lo, min(per, replicas - lo)) for lo in range(0, replicas, per)]


def _density_weights(chart, v):
    """Constant converting the branch density into kernel-diagonal units.

    The theorem display equals |1 + a (v - shift)|^2 times this constant
    times the branch density; the |.|^2 factor tends to 1 and is excluded
    here because keeping it would fold the display's slow finite-size
    drift back into the estimate.
    """
    if not isinstance(chart, PowerChart):
        return np.ones(len(v))
    c = math.exp(chart.log_pref_const) / (chart.power**2 * abs(chart.a) ** 2)
    return np.full(len(v), c)


def chart_cloud(spec, chart, replicas, threads=None, keep_samples=False):
    """Sample ``replicas`` products and pull their spectra back through a chart.

    Returns a PointCloud of local coordinates with display weights (and,
    when requested, the raw SpectrumSamples in replica order).
    """
    threads = threads or default_threads()
    samples = [None] * replicas if keep_samples else None

    def work(lo, count):
        vs = []
        for idx, sample in spectra_monte_carlo(spec, count, first_replica=lo):
            v = chart.pullback(sample)
            vs.append(np.asarray(v))
            if keep_samples:
                samples[idx] = sample
        pts = np.concatenate(vs) if vs else np.empty(0, dtype=complex)
        return PointCloud(pts, count, weights=_density_weights(chart, pts))

    with threadpool_limits(limits=1):
        if threads == 1:
            clouds = [work(lo, c) for lo, c in _chunks(replicas, threads)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                clouds = list(pool.map(lambda lc: work(*lc), _chunks(replicas, threads)))
    cloud = clouds[0]
    for other in clouds[1:]:
        cloud = merge_clouds(cloud, other)
    if keep_samples:
        return cloud, samples
    return cloud


def exponent_table(spec, replicas, threads=None, **kwargs):
    """Threaded wrapper around ensembles.exponent_monte_carlo."""
    threads = threads or default_threads()

    def work(lo, count):
        return lo, exponent_monte_carlo(spec, count, first_replica=lo, **kwargs)

    with threadpool_limits(limits=1):
        if threads == 1:
            parts = [work(lo, c) for lo, c in _chunks(replicas, threads)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda lc: work(*lc), _chunks(replicas, threads)))
    parts.sort(key=lambda t: t[0])
    out = {}
    for key in parts[0][1]:
        out[key] = np.concatenate([p[key] for _, p in parts])
    return out


def collect_spectra(spec, replicas, threads=None):
    """All spectra in replica order (threaded)."""
    threads = threads or default_threads()
    samples = [None] * replicas

    def work(lo, count):
        for idx, sample in spectra_monte_carlo(spec, count, first_replica=lo):
            samples[idx] = sample

    with threadpool_limits(limits=1):
        if threads == 1:
            for lo, c in _chunks(replicas, threads):
                work(lo, c)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda lc: work(*lc), _chunks(replicas, threads)))
    return samples
