"""Iterated-exponential scales, exponential clusterings and collapse bookkeeping."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .hat import KernelCache, step_with_event
from .lattice import Config, Site, diameter, dist, exterior_boundary
from .potential import PotentialTable

log = logging.getLogger(__name__)

EXP_LIMIT = 700.0  # exp overflows doubles a little above 709


@dataclass(frozen=True, order=False)
class ThetaValue:
    """theta_m(r), kept linear while small and as its logarithm afterwards.

    ``saturated`` means even the logarithm is beyond double range; such a
    value exceeds every representable distance.
    """

    linear: float
    log_form: float
    saturated: bool = False

    def _key(self):
        return (self.saturated, self.log_form)

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def exceeds(self, distance: float) -> bool:
        if self.saturated or math.isinf(self.linear):
            return True
        return self.linear > distance

    def exp(self) -> float:
        """e^theta, or inf when that overflows."""
        if self.saturated or self.linear > EXP_LIMIT:
            return math.inf
        return math.exp(self.linear)

    def __float__(self) -> float:
        return self.linear


def _theta_value(v: float) -> ThetaValue:
    return ThetaValue(v, math.log(v) if v > 0 else -math.inf)


def theta(m: int, r: float) -> ThetaValue:
    """theta_0 = r, theta_m = theta_{m-1} + exp(theta_{m-1})."""
    if m < 0 or m > 64:
        raise ValueError("need 0 <= m <= 64")
    if r < 0:
        raise ValueError("need r >= 0")
    val = _theta_value(float(r))
    for _ in range(m):
        if val.saturated:
            break
        t = val.linear
        if not math.isinf(t) and t <= EXP_LIMIT:
            nxt = t + math.exp(t)
            val = _theta_value(nxt)
        else:
            # log(theta + e^theta) = theta + log1p(theta e^{-theta}) = theta in double precision
            lg = t if not math.isinf(t) else math.inf
            if math.isinf(lg):
                val = ThetaValue(math.inf, math.inf, True)
            else:
                val = ThetaValue(math.inf, lg)
    return val


def phi(n: int, d: float, rtol: float = 1e-9) -> float:
    """The r >= 0 with theta_n(r) = d, by bisection."""
    lo_val = theta(n, 0.0)
    if lo_val.exceeds(d):
        raise ValueError(f"d = {d} lies below theta_{n}(0) = {lo_val.linear}")
    if n == 0:
        return float(d)
    lo, hi = 0.0, float(d)
    while hi - lo > rtol * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if theta(n, mid).exceeds(d):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def phi_clamped(n: int, d: float) -> float:
    """phi(n, d), or 0 when d is below the range of theta_n."""
    try:
        return phi(n, d)
    except ValueError:
        return 0.0


# clusterings -----------------------------------------------------------------
class ClusteringError(RuntimeError):
    pass


@dataclass(frozen=True)
class Cluster:
    sites: Config
    center: Site
    radius: ThetaValue


@dataclass(frozen=True)
class Clustering:
    clusters: tuple
    parameter: float

    @property
    def k(self) -> int:
        return len(self.clusters)

    def verify(self, A: Config) -> None:
        seen: list = []
        for c in self.clusters:
            seen.extend(c.sites.sites)
            if c.radius.linear < self.parameter:
                raise ClusteringError("cluster radius below the parameter")
            inside = {p for p in A if _in_disk(p, c.center, c.radius)}
            if inside != set(c.sites.sites):
                raise ClusteringError("cluster differs from the disk intersection")
        if sorted(seen) != list(A.sites):
            raise ClusteringError("clusters do not partition the set")
        for i, a in enumerate(self.clusters):
            for b in self.clusters[i + 1 :]:
                need = max(a.radius, b.radius).exp()
                if not dist(a.sites, b.sites) > need:
                    raise ClusteringError("clusters closer than the exponential of their radii")


def _in_disk(p, center, radius: ThetaValue) -> bool:
    """|p - center| < radius for an open disk; every disk contains its own center."""
    if p[0] == center[0] and p[1] == center[1]:
        return True
    if radius.saturated or math.isinf(radius.linear):
        return True
    return (p[0] - center[0]) ** 2 + (p[1] - center[1]) ** 2 < radius.linear**2


def exponential_clustering(A: Config, r: float) -> Clustering:
    """Partition A by the annulus construction: grow theta_m(r) disks until an empty annulus."""
    if r < 0:
        raise ValueError("need r >= 0")
    n = A.n
    thetas = [theta(m, r) for m in range(n + 1)]
    star = {}
    for x in A:
        m = 1
        while True:
            outer, inner = thetas[m], thetas[m - 1]
            occupied = any(_in_disk(y, x, outer) and not _in_disk(y, x, inner) for y in A)
            if not occupied:
                break
            m += 1
            if m > n:  # the n + 1 annuli cannot all be occupied by n - 1 other sites
                raise ClusteringError("no empty annulus found")
        rad = thetas[m - 1]
        members = frozenset(y for y in A if _in_disk(y, x, rad))
        star[x] = (members, rad)
    chosen: dict = {}
    for xi in A:
        holders = [x for x in A if xi in star[x][0]]
        best = holders[0]
        for x in holders[1:]:
            if star[best][0] < star[x][0]:
                best = x
            elif not star[x][0] <= star[best][0]:
                raise ClusteringError("membership sets are not nested")
        members, rad = star[best]
        if members not in chosen:
            chosen[members] = Cluster(Config(members), best, rad)
    clusters = tuple(sorted(chosen.values(), key=lambda c: c.sites.sites))
    out = Clustering(clusters, float(r))
    out.verify(A)
    return out


# collapse tracking -------------------------------------------------------------
@dataclass
class CollapseRecord:
    thresholds: list = field(default_factory=list)  # T_l
    rho: list = field(default_factory=list)
    expiry: list = field(default_factory=list)
    flag: int = 0
    total: int = 0
    intersections: int = 0
    lemma_violations: int = 0
    events: list = field(default_factory=list)


def _sep(parts: list[set], i: int) -> float:
    others = set().union(*(p for j, p in enumerate(parts) if j != i))
    return dist(parts[i], others)


def _min_sep(parts: list[set]) -> float:
    live = [p for p in parts if p]
    if len(live) < 2:
        return math.inf
    return min(_sep(live, i) for i in range(len(live)))


class ClusterTracker:
    """Advances cluster memberships with U_t^i = U_t ∩ (U_{t-1}^i ∪ ∂U_{t-1}^i)."""

    def __init__(self, clustering: Clustering):
        self.parts = [set(c.sites.sites) for c in clustering.clusters]
        self.k = len(self.parts)
        self.t = 0
        self.record = CollapseRecord()
        self._last_collapse = 0
        self._emptied = 0
        self._seps = [_sep(self.parts, i) if self.k > 1 else math.inf for i in range(self.k)]
        self._diams = [diameter(Config(p)) for p in self.parts]
        self._rho_pending = _min_sep(self.parts)

    def advance(self, U: Config) -> None:
        self.t += 1
        members = set(U.sites)
        new = []
        for p in self.parts:
            new.append(members & (p | exterior_boundary(p)) if p else set())
        for i in range(self.k):
            for j in range(i + 1, self.k):
                if new[i] & new[j]:
                    self.record.intersections += 1
        # bookkeeping: separation falls and diameter grows by at most one per step
        for i, p in enumerate(new):
            if not p:
                continue
            s = _sep(new, i) if self.k > 1 else math.inf
            dm = diameter(Config(p))
            if s < self._seps[i] - 1 - 1e-9 or dm > self._diams[i] + 1 + 1e-9:
                self.record.lemma_violations += 1
            self._seps[i], self._diams[i] = s, dm
        self.parts = new
        emptied = sum(1 for p in new if not p)
        while self._emptied < emptied:
            self._emptied += 1
            prev_t = self._last_collapse
            rho = self._rho_pending
            self.record.thresholds.append(self.t)
            self.record.rho.append(rho)
            self.record.expiry.append(
                math.log(rho) ** 2 - 4 * math.log(rho + prev_t) - prev_t if math.isfinite(rho) else math.inf
            )
            self._last_collapse = self.t
            self._rho_pending = _min_sep(new)

    @property
    def emptied(self) -> int:
        return self._emptied


def track_clusters(traj, clustering0: Clustering) -> CollapseRecord:
    """Replay a trajectory through the cluster update rule and record collapse times."""
    tracker = ClusterTracker(clustering0)
    for t in range(1, traj.steps + 1):
        tracker.advance(traj.state(t))
    rec = tracker.record
    rec.total = rec.thresholds[-1] if rec.thresholds else 0
    return rec


def algorithm1(
    U: Config,
    threshold: float,
    exponent_delta: float,
    table: PotentialTable,
    rng: np.random.Generator,
    cache: KernelCache | None = None,
    max_loops: int = 10_000,
) -> CollapseRecord:
    """Cluster, wait for all but one cluster to collapse, repeat until the diameter is small.

    Each loop runs the chain from the current state until k - 1 clusters have
    emptied or until (log d)^(1 + 7 delta) steps have passed, in which case
    the flag is raised and the loop ends without updating the state.
    """
    if U.n < 2 or threshold <= 0:
        raise ValueError("need at least two sites and a positive threshold")
    cache = cache or KernelCache(table)
    n = U.n
    V = U
    d = diameter(V)
    r = phi_clamped(n, d)
    out = CollapseRecord()
    loops = 0
    while d > threshold and out.flag == 0 and loops < max_loops:
        loops += 1
        C = exponential_clustering(V, r)
        tries = 0
        while C.k == 1 and tries < 8 and r > 0:
            r /= 2
            tries += 1
            out.events.append(("recluster", loops, r))
            log.info("single cluster above threshold at diameter %s; re-clustering with r = %s", d, r)
            C = exponential_clustering(V, r)
        if C.k == 1:
            # nothing to collapse at any admissible r: advance one step and try again
            out.events.append(("single-cluster-step", loops, d))
            V = step_with_event(V, table, rng, cache)[0]
            out.total += 1
            d = diameter(V)
            r = phi_clamped(n, d)
            continue
        budget = math.floor(math.log(d) ** (1 + 7 * exponent_delta))
        tracker = ClusterTracker(C)
        W = V
        t = 0
        while tracker.emptied < C.k - 1 and t < budget:
            W = step_with_event(W, table, rng, cache)[0]
            t += 1
            tracker.advance(W)
        out.intersections += tracker.record.intersections
        out.lemma_violations += tracker.record.lemma_violations
        if tracker.emptied < C.k - 1:
            out.flag = 1
            break
        out.thresholds.append(t)
        out.rho.extend(tracker.record.rho)
        out.expiry.extend(tracker.record.expiry)
        V = W
        d = diameter(V)
        r = phi_clamped(n, d)
        out.total += t
    return out
