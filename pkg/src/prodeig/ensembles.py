"""Sampling of the four product models and exponent statistics.

Every sampler takes an explicit ``numpy.random.Generator``; replica streams
are counter-based (Philox keyed by (seed, replica_index)) so results are
bit-identical regardless of how replicas are distributed over threads.

Products of many factors are kept representable by a scalar Frobenius
renormalisation after every factor; scalars commute with the product, so
the true eigenvalues are exactly exp(log_scale) times those of the stored
matrix.  Eigenvalue extraction by a dense solver is reliable only while
the spectral spread M*(mu_1 - mu_N) stays a safe margin inside the double
exponent range; beyond that, ordered log-moduli are still available through
exterior-power (compound-matrix) products, whose top eigenvalue is always
well-conditioned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnsembleSpec",
    "ScaledProduct",
    "SpectrumSample",
    "stream_for",
    "sample_ginibre",
    "sample_haar_truncation",
    "sample_product",
    "eigenvalues",
    "lyapunov_spectrum_qr",
    "stability_exponents",
    "stability_exponents_compound",
    "exponent_monte_carlo",
    "spectra_monte_carlo",
]

_MODELS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class EnsembleSpec:
    """Identity of a product-ensemble experiment.

    L is the truncation depth of each factor for models B and D and the
    inverse-factor count for models C and D (model D reuses the same L for
    both, matching its definition).
    """

    model: str
    N: int
    M: int
    L: int = 0
    seed: int = 0
    replica_index: int = 0

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be >= 1")
        if self.L < 0:
            raise ValueError("L must be >= 0")
        if self.replica_index < 0:
            raise ValueError("replica_index must be >= 0")

    def with_replica(self, replica_index):
        return EnsembleSpec(self.model, self.N, self.M, self.L, self.seed, replica_index)


@dataclass(frozen=True)
class ScaledProduct:
    """Unit-scale matrix plus accumulated log of the scalar factors."""

    matrix: np.ndarray
    log_scale: float
    resamples: int = 0


@dataclass(frozen=True)
class SpectrumSample:
    """Eigenvalues as (log-modulus, phase), sorted by log-modulus descending."""

    eigen_log_moduli: np.ndarray
    eigen_phases: np.ndarray

    def __post_init__(self):
        if self.eigen_log_moduli.shape != self.eigen_phases.shape:
            raise ValueError("moduli/phase length mismatch")


def stream_for(spec):
    """Counter-based generator for one replica of one experiment."""
    ss = np.random.SeedSequence([int(spec.seed) & (2**64 - 1), int(spec.replica_index)])
    return np.random.Generator(np.random.Philox(ss))


def sample_ginibre(n, rng):
    """n x n matrix of i.i.d. complex Gaussians with E|entry|^2 = 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    re = rng.standard_normal((n, n))
    im = rng.standard_normal((n, n))
    return (re + 1j * im) / math.sqrt(2.0)


def sample_haar_truncation(n, l, rng):
    """Upper-left n x n corner of a Haar unitary of size (n+l) x (n+l).

    Haar sampling is QR of a Ginibre matrix with the diagonal phases of R
    divided out (without the phase correction the distribution is not
    Haar).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if l < 0:
        raise ValueError("l must be >= 0")
    g = sample_ginibre(n + l, rng)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return np.ascontiguousarray(q[:n, :n])


_MAX_RESAMPLE = 8


def _forward_kind(model):
    return "ginibre" if model in ("A", "C") else "truncation"


def _inverse_kind(model):
    return "ginibre" if model == "C" else "truncation"


def _draw_one(kind, n, l, rng):
    if kind == "ginibre":
        return sample_ginibre(n, rng)
    return sample_haar_truncation(n, l, rng)


def _rescale(mat, log_scale):
    s = float(np.linalg.norm(mat)) / mat.shape[-1]
    if not np.isfinite(s) or s <= 0.0:
        raise ArithmeticError("degenerate product matrix")
    return mat / s, log_scale + math.log(s)


def sample_product(spec, rng=None):
    """Draw the model's product with per-factor scalar renormalisation.

    Forward factors are multiplied in one at a time; inverse factors of
    models C and D are applied through linear solves, never explicit
    inverses, and a numerically singular inverse factor is resampled
    (counted, at most 8 attempts).
    """
    if rng is None:
        rng = stream_for(spec)
    n = spec.N
    p = np.eye(n, dtype=complex)
    log_scale = 0.0
    fwd = _forward_kind(spec.model)
    for _ in range(spec.M):
        p = _draw_one(fwd, n, spec.L, rng) @ p
        p, log_scale = _rescale(p, log_scale)
    resamples = 0
    if spec.model in ("C", "D"):
        inv = _inverse_kind(spec.model)
        for _ in range(spec.L):
            for attempt in range(_MAX_RESAMPLE + 1):
                y = _draw_one(inv, n, spec.L, rng)
                try:
                    sol = np.linalg.solve(y, p)
                except np.linalg.LinAlgError:
                    sol = None
                if sol is not None and np.all(np.isfinite(sol)):
                    p = sol
                    break
                resamples += 1
                if attempt == _MAX_RESAMPLE:
                    raise ArithmeticError("inverse factor singular after 8 resampling attempts")
            p, log_scale = _rescale(p, log_scale)
    return ScaledProduct(p, log_scale, resamples)


def eigenvalues(sp):
    """Spectrum of the true product, recovered from the scaled matrix.

    Reliable while the log-modulus spread of the spectrum stays well inside
    ~700 (the double exponent range); beyond that only the leading moduli
    are meaningful and stability_exponents_compound should be used.
    """
    if not np.all(np.isfinite(sp.matrix)):
        raise ValueError("non-finite matrix")
    lam = np.linalg.eigvals(sp.matrix)
    with np.errstate(divide="ignore"):
        logmod = np.log(np.abs(lam)) + sp.log_scale
    order = np.argsort(-logmod)
    return SpectrumSample(logmod[order], np.angle(lam[order]))


def lyapunov_spectrum_qr(spec, rng=None):
    """Finite-time Lyapunov exponents by the successive-QR method (models A/B)."""
    if spec.model not in ("A", "B"):
        raise ValueError("QR Lyapunov exponents are defined for the forward models A and B")
    if rng is None:
        rng = stream_for(spec)
    n = spec.N
    q = np.eye(n, dtype=complex)
    acc = np.zeros(n)
    fwd = _forward_kind(spec.model)
    for _ in range(spec.M):
        z = _draw_one(fwd, n, spec.L, rng) @ q
        q, r = np.linalg.qr(z)
        acc += np.log(np.abs(np.diagonal(r)))
    return acc / spec.M


def stability_exponents(sample, M):
    """Finite-time stability exponents log|z_k| / M, order preserved."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return sample.eigen_log_moduli / M


# ---------------------------------------------------------------------------
# Compound (exterior power) machinery: ordered log-moduli at any M
# ---------------------------------------------------------------------------


def _compound_indexer(n, k):
    """Index arrays gathering the k x k minors of a stacked (…, n, n) array."""
    subsets = list(itertools.combinations(range(n), k))
    m = len(subsets)
    rows = np.empty((m, m, k, k), dtype=np.intp)
    cols = np.empty((m, m, k, k), dtype=np.intp)
    for a, ii in enumerate(subsets):
        for b, jj in enumerate(subsets):
            rows[a, b] = np.asarray(ii)[:, None]
            cols[a, b] = np.asarray(jj)[None, :]
    return rows, cols


def _compound_apply(mat, rows, cols):
    """k-th compound of stacked matrices: entries are the minors det(mat[I, J])."""
    return np.linalg.det(mat[..., rows, cols])


def stability_exponents_compound(spec):
    """All N stability exponents of one replica via exterior-power products.

    The k-th exterior power of the product is the product of the k-th
    exterior powers, and its spectral radius is |z_1 ... z_k|; successive
    differences of the top log-moduli give every log|z_k| without forming
    the ill-conditioned full spectrum.  Cost grows like binomial(N, N/2)^2,
    meant for the small-N supercritical scales.
    """
    out = exponent_monte_carlo(
        spec, replicas=1, first_replica=spec.replica_index, want_qr=False
    )
    return out["stability"][0]


# ---------------------------------------------------------------------------
# Batched Monte Carlo drivers
# ---------------------------------------------------------------------------


def _draw_factor_block(kind, n, l, rngs, nb):
    """Stacked block of nb factors per replica.

    The per-replica draw order matches nb successive single-factor draws,
    so batched and one-at-a-time sampling are bit-identical.
    """
    if kind == "ginibre":
        out = np.empty((len(rngs), nb, n, n), dtype=complex)
        for i, rng in enumerate(rngs):
            a = rng.standard_normal((nb, 2, n, n))
            out[i] = (a[:, 0] + 1j * a[:, 1]) / math.sqrt(2.0)
        return out
    nl = n + l
    g = np.empty((len(rngs), nb, nl, nl), dtype=complex)
    for i, rng in enumerate(rngs):
        a = rng.standard_normal((nb, 2, nl, nl))
        g[i] = (a[:, 0] + 1j * a[:, 1]) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[..., None, :]
    return np.ascontiguousarray(q[..., :n, :n])


def _block_norms(p):
    return np.sqrt(np.sum(np.abs(p) ** 2, axis=(-2, -1))) / p.shape[-1]


def exponent_monte_carlo(
    spec,
    replicas,
    *,
    first_replica=0,
    want_qr=True,
    want_compound=True,
    block=16,
    chunk=512,
):
    """Batched exponent statistics across replicas.

    Returns a dict with keys (when requested)
      - "qr": (replicas, N) finite-time Lyapunov exponents (models A/B),
      - "stability": (replicas, N) stability exponents from compound tops,
      - "top_log_modulus": (replicas,) log|z_1| of the true product.

    Per-replica streams make the result independent of chunking; the block
    size only groups factors between renormalisations.
    """
    n, M, L = spec.N, spec.M, spec.L
    want_qr = want_qr and spec.model in ("A", "B")
    if want_compound and n > 6:
        chunk = min(chunk, 32)  # minor gather arrays grow like binom(n, n/2)^2 k^2
    idx = {k: _compound_indexer(n, k) for k in range(2, n)} if want_compound and n > 2 else {}
    out_qr = np.empty((replicas, n)) if want_qr else None
    out_mu = np.empty((replicas, n)) if want_compound else None
    out_top = np.empty(replicas)
    fwd = _forward_kind(spec.model)

    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        rngs = [stream_for(spec.with_replica(first_replica + i)) for i in range(lo, hi)]
        r = len(rngs)
        ks = list(range(1, n + 1)) if want_compound else [1]
        comp_p = {}
        comp_s = {}
        for k in ks:
            m = math.comb(n, k)
            comp_p[k] = np.broadcast_to(np.eye(m, dtype=complex), (r, m, m)).copy()
            comp_s[k] = np.zeros(r)
        if want_qr:
            q = np.broadcast_to(np.eye(n, dtype=complex), (r, n, n)).copy()
            acc = np.zeros((r, n))

        def fold_forward(pb, s_log):
            nonlocal q, acc
            for k in ks:
                if k == 1:
                    ck = pb
                elif k == n:
                    ck = np.linalg.det(pb)[:, None, None]
                else:
                    ck = _compound_apply(pb, *idx[k])
                comp_p[k] = ck @ comp_p[k]
                s = _block_norms(comp_p[k])
                comp_p[k] /= s[:, None, None]
                comp_s[k] += np.log(s) + k * s_log
            if want_qr:
                z = pb @ q
                q, rr = np.linalg.qr(z)
                acc += np.log(np.abs(np.diagonal(rr, axis1=-2, axis2=-1))) + s_log[:, None]

        done = 0
        while done < M:
            nb = min(block, M - done)
            f = _draw_factor_block(fwd, n, L, rngs, nb)
            pb = f[:, 0]
            s_log = np.zeros(r)
            for b in range(1, nb):
                pb = f[:, b] @ pb
                s = _block_norms(pb)
                pb /= s[:, None, None]
                s_log += np.log(s)
            fold_forward(pb, s_log)
            done += nb
        if spec.model in ("C", "D"):
            inv = _inverse_kind(spec.model)
            done = 0
            while done < L:
                nb = min(block, L - done)
                f = _draw_factor_block(inv, n, L, rngs, nb)
                for b in range(nb):
                    yb = f[:, b]
                    for k in ks:
                        if k == 1:
                            ck = yb
                        elif k == n:
                            ck = np.linalg.det(yb)[:, None, None]
                        else:
                            ck = _compound_apply(yb, *idx[k])
                        comp_p[k] = np.linalg.solve(ck, comp_p[k])
                        s = _block_norms(comp_p[k])
                        comp_p[k] /= s[:, None, None]
                        comp_s[k] += np.log(s)
                done += nb

        tops = np.zeros((r, n + 1))
        for k in ks:
            lam = np.linalg.eigvals(comp_p[k])
            tops[:, k] = np.max(np.log(np.abs(lam)), axis=1) + comp_s[k]
        out_top[lo:hi] = tops[:, 1]
        if want_compound:
            out_mu[lo:hi] = np.diff(tops, axis=1) / M
        if want_qr:
            out_qr[lo:hi] = acc / M

    result = {"top_log_modulus": out_top}
    if want_qr:
        result["qr"] = out_qr
    if want_compound:
        result["stability"] = out_mu
    return result


def spectra_monte_carlo(spec, replicas, *, first_replica=0, chunk=64):
    """Full spectra for many replicas, batched over the heavy linear algebra.

    Yields (replica_index, SpectrumSample) in replica order; results are
    identical to sample_product followed by eigenvalues, replica by
    replica.
    """
    fwd = _forward_kind(spec.model)
    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        rngs = [stream_for(spec.with_replica(first_replica + i)) for i in range(lo, hi)]
        r = len(rngs)
        p = np.broadcast_to(np.eye(spec.N, dtype=complex), (r, spec.N, spec.N)).copy()
        log_scale = np.zeros(r)
        for _ in range(spec.M):
            f = np.stack([_draw_one(fwd, spec.N, spec.L, rng) for rng in rngs])
            p = f @ p
            s = _block_norms(p)
            p /= s[:, None, None]
            log_scale += np.log(s)
        if spec.model in ("C", "D"):
            inv = _inverse_kind(spec.model)
            for _ in range(spec.L):
                f = np.stack([_draw_one(inv, spec.N, spec.L, rng) for rng in rngs])
                p = np.linalg.solve(f, p)
                s = _block_norms(p)
                p /= s[:, None, None]
                log_scale += np.log(s)
        lam = np.linalg.eigvals(p)
        with np.errstate(divide="ignore"):
            logmod = np.log(np.abs(lam)) + log_scale[:, None]
        phases = np.angle(lam)
        for i in range(r):
            order = np.argsort(-logmod[i])
            yield first_replica + lo + i, SpectrumSample(logmod[i][order], phases[i][order])
