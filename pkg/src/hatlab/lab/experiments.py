"""Experiment drivers: each takes a validated config and writes its outputs."""
from __future__ import annotations

import logging
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from .. import harmonic as hm
from ..cluster import algorithm1
from ..hat import KernelCache, renewal_analysis, run, step
from ..lattice import Config, canonicalize, diameter, make_line, make_pair
from ..potential import MAX_RADIUS, default_table, write_triples
from . import audits
from .config import ExperimentConfig, replica_seed
from .output import emit_plot, write_csv, write_json, write_rows

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_AUDIT = 0, 1, 2
SPIRAL_REFERENCE = 2 * math.log(2 + math.sqrt(3))


def _versions() -> dict:
    import numba
    import scipy

    return {
        "hatlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
    }


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    return {"config": cfg.as_dict(), "config_hash": cfg.digest(), "versions": _versions(), **extra}


def _pool_map(fn, tasks: list, threads: int) -> list:
    """Map over tasks in order; results come back sorted by task position."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks, chunksize=1))


def parse_init(spec: str, n: int) -> Config:
    if spec == "line":
        return make_line(n)
    if spec.startswith("pair:"):
        if n != 2:
            raise ValueError("pair:d initial states need n = 2")
        return make_pair(int(spec.split(":", 1)[1]))
    return Config.from_text(Path(spec).read_text(encoding="utf-8"))


def separated_state(n: int, d: int) -> Config:
    """A segment of n - 1 sites with one more site at horizontal distance d."""
    if n == 2:
        return make_pair(d)
    return Config([*make_line(n - 1).sites, (d, 0)])


# individual experiments ------------------------------------------------------------
def _simulate(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    U0 = parse_init(p["init"], cfg.n)
    if U0.n != cfg.n:
        raise ValueError(f"initial state has {U0.n} sites, expected n = {cfg.n}")
    table = default_table(p["radius"])
    traj = run(U0, p["steps"], table, np.random.default_rng(cfg.seed), seed=cfg.seed)
    ts = range(0, traj.steps + 1, p["thin"])
    pre = cfg.output
    write_csv(f"{pre}.diam.csv", [{"t": t, "diam": float(traj.diameters[t])} for t in ts])
    write_csv(f"{pre}.com.csv", [{"t": t, "mx": float(traj.com[t, 0]), "my": float(traj.com[t, 1])} for t in ts])
    ev = traj.events
    write_csv(
        f"{pre}.events.csv",
        [{"t": t, "ax": int(ev[t, 0]), "ay": int(ev[t, 1]), "dx": int(ev[t, 2]), "dy": int(ev[t, 3])} for t in range(0, traj.steps, p["thin"])],
    )
    write_json(f"{pre}.meta.json", _meta(cfg, seed=cfg.seed, final_class=canonicalize(traj.state(traj.steps)).hash))
    return EXIT_OK


_CACHES: dict[int, KernelCache] = {}


def _process_cache(radius: int) -> KernelCache:
    """One kernel cache per worker process; cached laws never change, so sharing is safe."""
    if radius not in _CACHES:
        _CACHES[radius] = KernelCache(default_table(radius), maxsize=1 << 16)
    return _CACHES[radius]


class ReplicaError(RuntimeError):
    """A replica failed; the message names the replica and its seed."""


def _attributed(fn, task, label: str):
    try:
        return fn(task)
    except Exception as exc:
        raise ReplicaError(f"{label} failed: {type(exc).__name__}: {exc}") from exc


def _collapse_body(task):
    n, d, replica, stream_seed, r_stop, max_steps, radius, method, delta = task
    table = default_table(radius)
    rng = np.random.default_rng(stream_seed)
    cache = _process_cache(radius)
    U = separated_state(n, d)
    if method == "algorithm1":
        rec = algorithm1(U, r_stop, delta, table, rng, cache=cache)
        t, flag = rec.total, rec.flag
    else:
        t = 0
        while diameter(U) > r_stop and t < max_steps:
            U = step(U, table, rng, cache)
            t += 1
        flag = int(diameter(U) > r_stop)
    return {"n": n, "d": d, "replica": replica, "seed": stream_seed, "T_collapse": t, "flag": flag}


def _collapse_task(task):
    n, d, replica, stream_seed = task[:4]
    return _attributed(_collapse_body, task, f"collapse replica {replica} (d={d}, seed={stream_seed})")


def auto_radius(d: int) -> int:
    """Smallest power of two, at least 256 and at most 4096, keeping separations d + 4 exact."""
    return int(min(MAX_RADIUS, max(256, 2 ** math.ceil(math.log2(d + 4)))))


def fit_exponent(ds, medians) -> float:
    """Least-squares slope of log T against log log d."""
    x = np.log(np.log(np.asarray(ds, dtype=float)))
    y = np.log(np.maximum(np.asarray(medians, dtype=float), 1.0))
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def collapse_scaling(
    n: int,
    d_list,
    replicas: int,
    seed: int,
    r_stop=None,
    max_steps: int = 100000,
    radius: int | None = None,
    threads: int = 1,
    method: str = "chain",
    delta: float | None = None,
):
    """Collapse times from a segment plus one far site, over separations and replicas.

    Every (separation, replica) pair draws from its own stream, keyed by its
    position in the task grid.
    """
    r_stop = r_stop if r_stop is not None else max(5, 2 * n)
    radius = radius if radius is not None else auto_radius(max(d_list))
    delta = delta if delta is not None else (3 * n) ** -2.0
    tasks = [
        (n, d, i, replica_seed(seed, k * replicas + i), r_stop, max_steps, radius, method, delta)
        for k, d in enumerate(d_list)
        for i in range(replicas)
    ]
    rows = _pool_map(_collapse_task, tasks, threads)
    rows.sort(key=lambda r: (d_list.index(r["d"]), r["replica"]))
    summary = []
    for d in d_list:
        Ts = [r["T_collapse"] for r in rows if r["d"] == d]
        summary.append({"d": d, "median_T": float(np.median(Ts)), "mean_T": float(np.mean(Ts)), "flags": sum(r["flag"] for r in rows if r["d"] == d)})
    med = [s["median_T"] for s in summary]
    p = fit_exponent(d_list, med)
    return rows, summary, {"exponent": p, "nondecreasing": all(a <= b for a, b in zip(med, med[1:])), "r_stop": r_stop}


def _collapse(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    rows, summary, fit = collapse_scaling(
        cfg.n, p["d_list"], p["replicas"], cfg.seed, p["r_stop"], p["max_steps"], p["radius"], cfg.threads, p["method"], p["delta"]
    )
    write_rows(cfg.output, rows, cfg.format)
    write_rows(cfg.output, summary, cfg.format, ".summary")
    emit_plot(summary, {"x": "d", "y": "median_T", "kind": "loglog", "title": "median collapse time", "metadata": {"config_hash": cfg.digest(), "seed": cfg.seed}}, f"{cfg.output}.svg")
    write_json(f"{cfg.output}.meta.json", _meta(cfg, **fit))
    return EXIT_OK


def _stationary(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    table = default_table(p["radius"])
    traj = run(make_line(cfg.n), p["steps"], table, np.random.default_rng(cfg.seed), thin=max(1, p["steps"]), seed=cfg.seed)
    start = int(p["burn_in"] * p["steps"])
    bins = np.floor(traj.diameters[start:]).astype(int)
    vals, counts = np.unique(bins, return_counts=True)
    total = counts.sum()
    rows = [
        {"diam": int(v), "count": int(c), "frequency": float(c / total), "log10_frequency": float(math.log10(c / total))}
        for v, c in zip(vals, counts)
    ]
    write_rows(cfg.output, rows, cfg.format)
    emit_plot(rows, {"x": "diam", "y": "frequency", "kind": "semilog", "title": "diameter frequency", "metadata": {"config_hash": cfg.digest(), "seed": cfg.seed}}, f"{cfg.output}.svg")
    write_json(f"{cfg.output}.meta.json", _meta(cfg, qualitative=True, burn_in_steps=start))
    return EXIT_OK


def _diffusivity_task(task):
    return _attributed(_diffusivity_body, task, f"diffusivity replica {task[2]} (seed={replica_seed(task[3], task[2])})")


def _within(value: float, se: float, k: float = 3.0) -> bool:
    return abs(value) <= k * se


def _diffusivity_body(task):
    n, steps, replica, seed, boots, radius = task
    table = default_table(radius)
    rs = replica_seed(seed, replica)
    traj = run(make_line(n), steps, table, np.random.default_rng(rs), seed=rs)
    rep = renewal_analysis(traj, n, bootstrap=boots, seed=rs % (2**32))
    rng = np.random.default_rng(rs ^ 0x5EED)
    k = len(rep.increments)
    chis = []
    for _ in range(boots):
        idx = rng.integers(0, k, k)
        c = np.cov(rep.increments[idx].T)
        chis.append((c[0, 0] + c[1, 1]) / 2 / rep.return_times[idx].mean())
    lo, hi = np.quantile(chis, [0.025, 0.975])
    row = {"replica": replica, "seed": rs, **rep.summary(), "chi2_lo": float(lo), "chi2_hi": float(hi)}
    row.update(
        {
            "mean_dx_se": float(rep.mean_increment_se[0]),
            "mean_dy_se": float(rep.mean_increment_se[1]),
            "cov_xx_se": float(rep.covariance_se[0, 0]),
            "cov_yy_se": float(rep.covariance_se[1, 1]),
            "cov_xy_se": float(rep.covariance_se[0, 1]),
        }
    )
    se = rep.covariance_se
    row["mean_zero"] = _within(rep.mean_increment[0], rep.mean_increment_se[0]) and _within(rep.mean_increment[1], rep.mean_increment_se[1])
    row["offdiag_zero"] = _within(rep.covariance[0, 1], se[0, 1])
    row["isotropic"] = _within(rep.covariance[0, 0] - rep.covariance[1, 1], math.hypot(se[0, 0], se[1, 1]))
    return row


def _diffusivity(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    tasks = [(cfg.n, p["steps"], i, cfg.seed, p["bootstrap"], p["radius"]) for i in range(p["replicas"])]
    rows = sorted(_pool_map(_diffusivity_task, tasks, cfg.threads), key=lambda r: r["replica"])
    write_rows(cfg.output, rows, cfg.format)
    write_json(f"{cfg.output}.meta.json", _meta(cfg, chi2_mean=float(np.mean([r["chi2"] for r in rows]))))
    return EXIT_OK


def spiral_rows(n_list, table) -> list[dict]:
    rows = []
    for n in n_list:
        sp = hm.build_spiral(n)
        h = hm.harmonic_measure_deep(sp.sites, (0, 0), table)
        rate = -math.log(h) / n
        rows.append(
            {
                "n": n,
                "path_length": sp.path_length,
                "path_ratio": sp.path_length / (2 * n),
                "hm_origin": h,
                "rate": rate,
                "reference": SPIRAL_REFERENCE,
                "ratio": rate / SPIRAL_REFERENCE,
            }
        )
    return rows


def _spiral(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    rows = spiral_rows(p["n_list"], default_table(p["radius"]))
    write_rows(cfg.output, rows, cfg.format)
    emit_plot(rows, {"x": "n", "y": "rate", "kind": "linear", "reference": SPIRAL_REFERENCE, "title": "-(1/n) log H(o)", "metadata": {"config_hash": cfg.digest()}}, f"{cfg.output}.svg")
    write_json(f"{cfg.output}.meta.json", _meta(cfg, spiral_version=hm.SPIRAL_VERSION))
    return EXIT_OK


def _audit(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    table = default_table(p["radius"])
    items = audits.run_all(table, samples=p["samples"], random_sets=p["random_sets"], seed=cfg.seed)
    rows = [{"audit": it.name, "passed": bool(it.passed), "worst_margin": float(it.worst_margin), "checked": int(it.checked)} for it in items]
    write_rows(cfg.output, rows, cfg.format)
    for r in rows:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['audit']}  (margin {r['worst_margin']:.3g}, n={r['checked']})")
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_AUDIT


def _kernel_table(cfg: ExperimentConfig) -> int:
    table = default_table(cfg.parameters["radius"])
    out = cfg.output if cfg.output.endswith(".txt") else f"{cfg.output}.txt"
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_triples(table, out)
    return EXIT_OK


def _hm(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    A = Config.from_text(Path(p["set"]).read_text(encoding="utf-8"))
    alpha = hm.harmonic_measure(A, default_table(p["radius"]))
    h = canonicalize(A).hash
    rows = [
        {"set_hash": h, "n": A.n, "site": f"{s.x} {s.y}", "value": float(v), "method": "kernel-solve", "tolerance": 1e-7}
        for s, v in zip(A.sites, alpha)
    ]
    write_rows(cfg.output, rows, cfg.format)
    return EXIT_OK


def _escape(cfg: ExperimentConfig) -> int:
    p = cfg.parameters
    A = Config.from_text(Path(p["set"]).read_text(encoding="utf-8"))
    x = tuple(p["start"])
    v = hm.escape_probability(A, x, p["distance"], default_table(p["radius"]))
    rows = [{"set_hash": canonicalize(A).hash, "n": A.n, "site": f"{x[0]} {x[1]}", "value": v, "method": "kernel-solve", "tolerance": 1e-8}]
    write_rows(cfg.output, rows, cfg.format)
    return EXIT_OK


DRIVERS = {
    "simulate": _simulate,
    "collapse-scaling": _collapse,
    "stationary-tail": _stationary,
    "diffusivity": _diffusivity,
    "spiral-sweep": _spiral,
    "audit-bounds": _audit,
    "kernel-table": _kernel_table,
    "hm": _hm,
    "escape": _escape,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Validate, run and write outputs; returns the process exit status."""
    cfg.validate()
    Path(cfg.output).parent.mkdir(parents=True, exist_ok=True)
    return DRIVERS[cfg.experiment](cfg)


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get("HATLAB_THREADS")
    return int(raw) if raw else default
