"""Reproducible experiment runner.

Subcommands: ``sample`` (eigenvalue CSV + summary JSON), ``kernel-eval``
(exact/limit kernel values at points), ``verify`` (acceptance criteria,
exit 0 only if all pass), ``scan`` (M/N grid, distance of the empirical
local density to each limit family).

Configuration is a single JSON document; command-line flags override the
file.  All numeric output is serialised with 17 significant digits, and a
rerun with the same configuration is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels_exact as kx
from . import kernels_limit as kl
from .ensembles import EnsembleSpec
from .runner import chart_cloud, collect_spectra, default_threads, exponent_table
from .scalings import RegimeSpec, chart
from .stats import PointCloud, disk_mean_density, estimate_profile
from .verify import run_criteria

ENV_OUTPUT_DIR = "PRODEIG_OUTPUT_DIR"


def _fmt(x):
    return f"{float(x):.17g}"


def _outdir(args_out):
    base = args_out or os.environ.get(ENV_OUTPUT_DIR, ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def cmd_sample(cfg, args):
    ens = cfg.get("ensemble", {})
    spec = EnsembleSpec(
        model=ens.get("model", "A"),
        N=int(ens.get("N", 8)),
        M=int(ens.get("M", 1)),
        L=int(ens.get("L", 0)),
        seed=int(args.seed if args.seed is not None else ens.get("seed", 0)),
    )
    replicas = int(cfg.get("replicas", 10))
    threads = args.threads or int(cfg.get("threads", 0)) or default_threads()
    out = _outdir(args.out)
    t0 = time.time()
    samples = collect_spectra(spec, replicas, threads=threads)
    csv_path = out / "eigenvalues.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write("replica,index,log_modulus,phase\n")
        for rep, sample in enumerate(samples):
            for idx in range(len(sample.eigen_log_moduli)):
                fh.write(
                    f"{rep},{idx},{_fmt(sample.eigen_log_moduli[idx])},"
                    f"{_fmt(sample.eigen_phases[idx])}\n"
                )
    summary = {
        "ensemble": {"model": spec.model, "N": spec.N, "M": spec.M, "L": spec.L,
                     "seed": spec.seed},
        "replicas": replicas,
        "eigenvalues": replicas * spec.N,
        "runtime_s": time.time() - t0,
        "csv": csv_path.name,
    }
    _write_json(out / "summary.json", summary)
    print(f"wrote {csv_path} ({replicas * spec.N} rows)")
    return 0


# ---------------------------------------------------------------------------
# kernel-eval
# ---------------------------------------------------------------------------


def _regime_from_config(block):
    return RegimeSpec(
        model=block.get("model", "A"),
        regime=block["regime"],
        M=int(block["M"]),
        N=int(block["N"]),
        L=int(block.get("L", 0)),
        k=block.get("k"),
        q=block.get("q"),
        u=complex(*block["u"]) if isinstance(block.get("u"), list) else block.get("u"),
        theta=float(block.get("theta", 0.0)),
    )


def cmd_kernel_eval(cfg, args):
    out = _outdir(args.out)
    report = {}
    if "exact" in cfg:
        ex = cfg["exact"]
        spec = kx.ExactKernelSpec(
            model=ex.get("model", "A"),
            M=int(ex.get("M", 1)),
            N=int(ex.get("N", 1)),
            L=int(ex.get("L", 0)),
            target_tolerance=float(ex.get("target_tolerance", 1e-10)),
        )
        points = [complex(p[0], p[1]) for p in ex.get("points", [[0.0, 0.0]])]
        values = []
        for z in points:
            klog = kx.kernel_log(spec, z, z)
            values.append(
                {
                    "z": [z.real, z.imag],
                    "intensity": kx.kernel_diag(spec, abs(z)),
                    "log_intensity": klog.log_modulus,
                    "weight": kx.weight(spec, abs(z)),
                }
            )
        report["exact"] = {
            "spec": {"model": spec.model, "M": spec.M, "N": spec.N, "L": spec.L},
            "points": values,
        }
        if len(points) > 1:
            report["exact"]["correlation"] = kx.correlation(spec, points[: 8])
    if "limit" in cfg:
        lim = cfg["limit"]
        beta = float(lim.get("beta", 1.0))
        pts = [complex(p[0], p[1]) for p in lim.get("points", [[0.0, 0.0]])]
        vals = []
        for z in pts:
            vals.append(
                {
                    "z": [z.real, z.imag],
                    "ginibre_bulk": abs(kl.ginibre_bulk(z, z)),
                    "critical_bulk": kl.critical_bulk(beta, z, z).real,
                    "critical_edge": kl.critical_edge(beta, z, z).real,
                    "gaussian": kl.gaussian_limit_density(z.real),
                }
            )
        report["limit"] = {"beta": beta, "points": vals}
    if args.duality_check or cfg.get("duality_check"):
        rng = np.random.default_rng(11)
        worst = 0.0
        for beta in (0.5, 1.0, 2.0, 2.0 * math.pi, 8.0):
            for _ in range(25):
                z1 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                z2 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                worst = max(worst, kl.duality_residual(beta, z1, z2))
        report["duality_max_residual"] = worst
    path = out / "kernel_eval.json"
    _write_json(path, report)
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(cfg, args):
    threads = args.threads or int(cfg.get("threads", 0)) or default_threads()
    results = run_criteria(only=args.only or cfg.get("only"), threads=threads)
    out = _outdir(args.out)
    for res in results:
        print(res.line())
    payload = {"criteria": [r.to_dict() for r in results],
               "pass": all(r.passed for r in results)}
    _write_json(out / "verify_report.json", payload)
    return 0 if payload["pass"] else 1


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


def _family_distances(mm, nn, seed, replicas, threads):
    """Distance of the empirical local density to each limit family."""
    out = {}
    # Ginibre family: subcritical bulk chart at u = 1/2
    ens = EnsembleSpec("A", N=nn, M=mm, seed=seed)
    ch = chart(RegimeSpec("A", "subcritical", M=mm, N=nn, u=0.5))
    cloud = chart_cloud(ens, ch, replicas, threads=threads)
    val, _ = disk_mean_density(cloud, 1.0)
    out["ginibre"] = abs(val * math.pi - 1.0)
    # critical family: bulk chart at q = 1/2 with the run's beta
    ch = chart(RegimeSpec("A", "critical", M=mm, N=nn, q=0.5))
    cloud = chart_cloud(ens, ch, replicas, threads=threads)
    sel = np.abs(np.imag(cloud.points)) <= 1.0
    sub = PointCloud(cloud.points[sel], cloud.replica_count, weights=cloud.weights[sel])
    est = estimate_profile(sub, 0.5, 1.0)
    dist = 0.0
    used = 0
    for x, dens, cnt in zip(est.centers_x, est.density, est.counts):
        pred = 2.0 * kl.critical_bulk(ch.beta, complex(x), complex(x)).real
        if cnt >= 5:
            dist = max(dist, abs(dens - pred) / pred)
            used += 1
    out["critical"] = dist if used else math.inf
    # Gaussian family: supercritical chart at k = 1
    ch = chart(RegimeSpec("A", "supercritical", M=mm, N=nn, k=1))
    table = exponent_table(ens, replicas, threads=threads, want_qr=False, want_compound=False)
    v = (table["top_log_modulus"] - ch.center) / ch.kappa
    cloudg = PointCloud(v.astype(complex), replicas, 1.0)
    estg = estimate_profile(cloudg, 0.5, 3.0)
    dist = 0.0
    used = 0
    for x, dens, cnt in zip(estg.centers_x, estg.density, estg.counts):
        pred = math.exp(-0.5 * float(x) ** 2) / math.sqrt(2.0 * math.pi)
        if cnt >= 5:
            dist = max(dist, abs(dens - pred) / pred)
            used += 1
    out["gaussian"] = dist if used else math.inf
    return out


def cmd_scan(cfg, args):
    cells = cfg.get("cells") or [{"M": 1, "N": 64}, {"M": 16, "N": 16}, {"M": 256, "N": 4}]
    replicas = int(cfg.get("replicas", 100))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    threads = args.threads or int(cfg.get("threads", 0)) or default_threads()
    out = _outdir(args.out)
    path = out / "scan.csv"
    with open(path, "w", newline="") as fh:
        fh.write("M,N,dist_ginibre,dist_critical,dist_gaussian,winner\n")
        for cell in cells:
            mm, nn = int(cell["M"]), int(cell["N"])
            try:
                d = _family_distances(mm, nn, seed, replicas, threads)
                winner = min(d, key=d.get)
                fh.write(
                    f"{mm},{nn},{_fmt(d['ginibre'])},{_fmt(d['critical'])},"
                    f"{_fmt(d['gaussian'])},{winner}\n"
                )
            except Exception as exc:  # per-cell failures logged, scan continues
                print(f"cell (M={mm}, N={nn}) failed: {exc}", file=sys.stderr)
                fh.write(f"{mm},{nn},nan,nan,nan,error\n")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None):
    parser = argparse.ArgumentParser(prog="prodeig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sample", "kernel-eval", "verify", "scan"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} or .)")
        if name == "verify":
            p.add_argument("--only", help="run a single criterion (id or name)")
        if name == "kernel-eval":
            p.add_argument("--duality-check", action="store_true")
    args = parser.parse_args(argv)
    cfg = _load_config(args.config)
    handlers = {
        "sample": cmd_sample,
        "kernel-eval": cmd_kernel_eval,
        "verify": cmd_verify,
        "scan": cmd_scan,
    }
    try:
        return handlers[args.command](cfg, args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
