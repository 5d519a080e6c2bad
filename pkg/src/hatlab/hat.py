"""The harmonic activation and transport chain.

One step activates a site X of U with probability H_U(X), releases a walk
from X and places the particle at S_{tau-1}, the last site visited before the
walk returns to U \\ {X}.  Transport laws are computed exactly: for each
candidate y next to W = U \\ {X},

    P_X(S_{tau-1} = y) = P_X(walk reaches y before W) * s_y,

where s_y is the chance that the final excursion from y is the one entering
W, summed over the geometric number of returns to y.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .harmonic import harmonic_measure
from .lattice import (
    Config,
    Site,
    apply_dihedral,
    canonical_key,
    diameter,
    exposed_sites,
    exterior_boundary,
    inverse_dihedral,
    make_line,
    neighbors,
)
from .potential import PotentialTable

NORMALIZATION_TOL = 1e-8


class TransportNormalizationError(RuntimeError):
    pass


class NotExposed(ValueError):
    pass


def transport_distribution(U: Config, x, table: PotentialTable) -> tuple[list[Site], np.ndarray]:
    """Candidates y in ∂(U \\ {x}) in lexicographic order and P_x(S_{tau-1} = y)."""
    x = Site(*x)
    if U.n < 2:
        raise ValueError("transport needs at least two sites")
    if x not in exposed_sites(U):
        raise NotExposed(f"{tuple(x)} is not exposed")
    W = U.without(x)
    members = set(W.sites)
    cands = sorted(exterior_boundary(W.sites))
    n, m = W.n, len(cands)
    Wa = W.array()
    Y = np.array(cands, dtype=np.int64)
    # system for h_y on W ∪ {y}, with y stored last
    P = np.empty((m, n + 1, 2), dtype=np.int64)
    P[:, :n] = Wa[None]
    P[:, n] = Y
    diff = P[:, :, None, :] - P[:, None, :, :]
    M = np.zeros((m, n + 2, n + 2))
    M[:, : n + 1, : n + 1] = table.many(diff[..., 0], diff[..., 1])
    M[:, : n + 1, n + 1] = 1.0
    M[:, n + 1, : n + 1] = 1.0
    rhs = np.zeros((m, n + 2, 1))
    rhs[:, n] = 1.0
    X = np.linalg.solve(M, rhs)
    X += np.linalg.solve(M, rhs - M @ X)
    beta, alpha = X[:, : n + 1, 0], X[:, n + 1, 0]
    # probes: x followed by the four neighbors of y
    probes = np.empty((m, 5, 2), dtype=np.int64)
    probes[:, 0] = x
    for k, (dx, dy) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
        probes[:, k + 1] = Y + (dx, dy)
    pd = probes[:, :, None, :] - P[:, None, :, :]
    h = alpha[:, None] + np.einsum("mpk,mk->mp", table.many(pd[..., 0], pd[..., 1]), beta)
    probs = np.empty(m)
    for i, y in enumerate(cands):
        p = 1.0 if y == x else h[i, 0]
        ret = 0.0
        k_y = 0
        for k, u in enumerate(neighbors(y)):
            if u in members:
                k_y += 1
            else:
                ret += 0.25 * h[i, k + 1]
        probs[i] = p * (k_y / 4) / (1 - ret)
    total = probs.sum()
    tol = NORMALIZATION_TOL
    if np.ptp(U.array(), axis=0).max() + 2 > table.exact_radius / math.sqrt(2):
        tol += 4 * table.lambda_bound / table.exact_radius**2  # asymptotic kernel in use
    if abs(total - 1) > tol or probs.min() < -tol:
        raise TransportNormalizationError(f"transport row from {tuple(x)} sums to {total!r}")
    return cands, probs


@dataclass
class TransitionKernel:
    state: Config
    activation: dict  # exposed site -> H_U(site)
    transport: dict  # exposed site -> (candidates, probabilities)

    def probability(self, target: Config) -> float:
        """P(U_1 = target | U_0 = state)."""
        total = 0.0
        for x, hx in self.activation.items():
            cands, probs = self.transport[x]
            for y, p in zip(cands, probs):
                if self.state.move(x, y) == target:
                    total += hx * p
        return total

    def successors(self) -> dict:
        out: dict = {}
        for x, hx in self.activation.items():
            cands, probs = self.transport[x]
            for y, p in zip(cands, probs):
                key = self.state.move(x, y)
                out[key] = out.get(key, 0.0) + hx * p
        return out


def activation_law(U: Config, table: PotentialTable) -> tuple[list[Site], np.ndarray]:
    """Exposed sites in lexicographic order with their harmonic measure.

    The support is taken from the combinatorial exposure test; the sub-1e-10
    roundoff left on covered sites is dropped and the vector renormalized.
    """
    alpha = harmonic_measure(U, table, check=False)
    exposed = exposed_sites(U)
    sites = [s for s in U.sites if s in exposed]
    w = np.array([alpha[U.index(s)] for s in sites])
    return sites, w / w.sum()


def transition_kernel(U: Config, table: PotentialTable) -> TransitionKernel:
    if U.n < 2:
        raise ValueError("the chain needs at least two sites")
    harmonic_measure(U, table, check=True)  # raises if the two computations disagree
    sites, w = activation_law(U, table)
    act = dict(zip(sites, w))
    return TransitionKernel(U, act, {x: transport_distribution(U, x, table) for x in sites})


# cached sampling --------------------------------------------------------------
class KernelCache:
    """Activation and transport CDFs per symmetry class, computed on demand.

    Laws are stored in the frame of the class representative; sampling maps
    the chosen sites back through the inverse dihedral map and translation.
    """

    def __init__(self, table: PotentialTable, maxsize: int = 1 << 18):
        self.table = table
        self.maxsize = maxsize
        self.entries: OrderedDict = OrderedDict()
        self.hits = 0
        self.misses = 0

    def entry(self, rep: tuple) -> dict:
        e = self.entries.get(rep)
        if e is not None:
            self.hits += 1
            self.entries.move_to_end(rep)
            return e
        self.misses += 1
        U = Config(rep)
        sites, w = activation_law(U, self.table)
        cdf = np.cumsum(w)
        cdf[-1] = 1.0
        e = {"config": U, "sites": sites, "cdf": cdf.tolist(), "rows": {}}
        self.entries[rep] = e
        if len(self.entries) > self.maxsize:
            self.entries.popitem(last=False)
        return e

    def row(self, e: dict, x: Site):
        r = e["rows"].get(x)
        if r is None:
            cands, probs = transport_distribution(e["config"], x, self.table)
            cdf = np.cumsum(probs)
            cdf /= cdf[-1]
            r = (cands, cdf.tolist())
            e["rows"][x] = r
        return r


def _sample(cdf: list, u: float) -> int:
    return min(bisect_right(cdf, u), len(cdf) - 1)


def step_with_event(U: Config, table: PotentialTable, rng: np.random.Generator, cache: KernelCache | None = None):
    """One step; returns (next state, activated site, landing site)."""
    if U.n < 2:
        raise ValueError("the chain needs at least two sites")
    cache = cache or KernelCache(table)
    rep, g, shift = canonical_key(U)
    e = cache.entry(rep)
    xr = e["sites"][_sample(e["cdf"], rng.random())]
    cands, cdf = cache.row(e, xr)
    yr = cands[_sample(cdf, rng.random())]
    gi = inverse_dihedral(g)
    x = apply_dihedral(gi, (xr[0] - shift[0], xr[1] - shift[1]))
    y = apply_dihedral(gi, (yr[0] - shift[0], yr[1] - shift[1]))
    return U.move(x, y), x, y


def step(U: Config, table: PotentialTable, rng: np.random.Generator, cache: KernelCache | None = None) -> Config:
    return step_with_event(U, table, rng, cache)[0]


# trajectories -------------------------------------------------------------------
@dataclass
class Trajectory:
    seed: int
    n: int
    states: np.ndarray  # (steps + 1, n, 2), sites sorted lexicographically
    diameters: np.ndarray
    com: np.ndarray  # (steps + 1, 2)
    events: np.ndarray  # (steps, 4): activated x, y then landing x, y
    class_ids: np.ndarray  # (steps + 1,) index into class_keys, or -1 when thinned out
    class_keys: list = field(default_factory=list)
    thin: int = 1

    @property
    def steps(self) -> int:
        return len(self.events)

    def state(self, t: int) -> Config:
        return Config(map(tuple, self.states[t]))


def run(
    U0: Config,
    steps: int,
    table: PotentialTable,
    rng: np.random.Generator | int,
    thin: int = 1,
    cache: KernelCache | None = None,
    seed: int | None = None,
) -> Trajectory:
    """Iterate the chain; deterministic given the seed (or generator state)."""
    if U0.n < 2:
        raise ValueError("the chain needs at least two sites")
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    cache = cache or KernelCache(table)
    n = U0.n
    states = np.empty((steps + 1, n, 2), dtype=np.int64)
    diam = np.empty(steps + 1)
    events = np.empty((steps, 4), dtype=np.int64)
    ids = np.full(steps + 1, -1, dtype=np.int64)
    keys: list = []
    key_index: dict = {}
    U = U0
    for t in range(steps + 1):
        states[t] = U.array()
        diam[t] = diameter(U)
        if t % thin == 0:
            rep = canonical_key(U)[0]
            i = key_index.get(rep)
            if i is None:
                i = key_index[rep] = len(keys)
                keys.append(rep)
            ids[t] = i
        if t == steps:
            break
        U, x, y = step_with_event(U, table, rng, cache)
        events[t] = (x[0], x[1], y[0], y[1])
        if diameter(U) > diam[t] + 1 + 1e-9:
            raise AssertionError("diameter grew by more than one in a step")
    com = states.mean(axis=1)
    return Trajectory(seed if seed is not None else -1, n, states, diam, com, events, ids, keys, thin)


# renewal analysis -------------------------------------------------------------
class InsufficientReturns(RuntimeError):
    pass


@dataclass
class RenewalReport:
    return_times: np.ndarray
    increments: np.ndarray
    nu2: float
    mean_tau: float
    chi2: float
    covariance: np.ndarray
    mean_increment: np.ndarray
    mean_increment_se: np.ndarray
    covariance_se: np.ndarray
    kac: float
    msd_exponent: float

    def summary(self) -> dict:
        return {
            "returns": int(len(self.return_times)),
            "mean_tau": self.mean_tau,
            "nu2": self.nu2,
            "chi2": self.chi2,
            "mean_dx": float(self.mean_increment[0]),
            "mean_dy": float(self.mean_increment[1]),
            "cov_xx": float(self.covariance[0, 0]),
            "cov_yy": float(self.covariance[1, 1]),
            "cov_xy": float(self.covariance[0, 1]),
            "kac": self.kac,
            "msd_exponent": self.msd_exponent,
        }


def msd_exponent(com: np.ndarray, lags=None) -> float:
    """Slope of log E|M_{t+s} - M_t|^2 against log s over a dyadic range of lags."""
    T = len(com)
    if lags is None:
        hi = max(4, T // 100)
        lags = np.unique(np.geomspace(16, hi, 12).astype(int))
    msd = [np.mean(((com[s:] - com[:-s]) ** 2).sum(axis=1)) for s in lags]
    return float(np.polyfit(np.log(lags), np.log(msd), 1)[0])


def renewal_analysis(traj: Trajectory, n: int | None = None, bootstrap: int = 200, seed: int = 0) -> RenewalReport:
    """Return-time structure at visits to the class of the segment L_n."""
    n = n or traj.n
    if traj.thin != 1:
        raise ValueError("renewal analysis needs an unthinned trajectory")
    target = canonical_key(make_line(n))[0]
    if target in traj.class_keys:
        tid = traj.class_keys.index(target)
        visits = np.nonzero(traj.class_ids == tid)[0]
    else:
        visits = np.array([], dtype=np.int64)
    if len(visits) < 31:
        raise InsufficientReturns(f"only {len(visits)} visits to the segment class")
    rt = np.diff(visits)
    inc = traj.com[visits[1:]] - traj.com[visits[:-1]]
    mean = inc.mean(axis=0)
    cov = np.cov(inc.T)
    k = len(inc)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(bootstrap):
        s = inc[rng.integers(0, k, k)]
        c = np.cov(s.T)
        boots.append((c[0, 0], c[1, 1], c[0, 1]))
    boots = np.array(boots)
    cov_se = np.array([[boots[:, 0].std(), boots[:, 2].std()], [boots[:, 2].std(), boots[:, 1].std()]])
    nu2 = float((cov[0, 0] + cov[1, 1]) / 2)
    mean_tau = float(rt.mean())
    # occupation frequency from the first half of the run times the mean return
    # time from the second half, so the two factors are estimated separately
    half = len(traj.class_ids) // 2
    freq = np.count_nonzero(visits < half) / half
    late = np.diff(visits[visits >= half])
    kac = float(freq * late.mean()) if len(late) else float("nan")
    return RenewalReport(
        return_times=rt,
        increments=inc,
        nu2=nu2,
        mean_tau=mean_tau,
        chi2=nu2 / mean_tau,
        covariance=cov,
        mean_increment=mean,
        mean_increment_se=inc.std(axis=0, ddof=1) / math.sqrt(k),
        covariance_se=cov_se,
        kac=kac,
        msd_exponent=msd_exponent(traj.com),
    )
