"""Exact hitting distributions and harmonic measure for finite subsets of Z^2.

For a finite set A = {z_1, ..., z_k} and a target y in A, the function
``v -> P_v(S_{sigma_A} = y)`` is the unique bounded function that is harmonic
off A and equals 1{v = y} on A.  Writing it as

    h_y(v) = alpha_y + sum_w beta_{y,w} a(v - w),   sum_w beta_{y,w} = 0,

gives a (k+1) x (k+1) symmetric linear system in the potential kernel matrix.
The constant alpha_y is the harmonic measure H_A(y) from infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import (
    Config,
    Site,
    _outside_component,
    exposed_sites,
    exterior_boundary,
    neighbors,
)
from .potential import PotentialTable, circle_sites

MAX_SET_SIZE = 2000


class SolverError(RuntimeError):
    pass


class SingularSystem(SolverError):
    def __init__(self, k: int, rcond: float):
        super().__init__(f"hitting system for a {k}-site set is singular (rcond={rcond:.3g})")
        self.rcond = rcond


class SetTooLarge(SolverError):
    pass


class HarmonicMeasureMismatch(SolverError):
    pass


def _augmented(table: PotentialTable, pts: np.ndarray) -> np.ndarray:
    k = len(pts)
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = table.matrix(pts, pts)
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    return M


@dataclass(frozen=True, eq=False)
class HittingSolution:
    """Coefficients of h_y for every y in the target set.

    ``beta[i, :]`` are the kernel coefficients for target ``target.sites[i]``.
    """

    target: Config
    alpha: np.ndarray
    beta: np.ndarray
    table: PotentialTable
    rcond: float = 1.0

    @property
    def points(self) -> np.ndarray:
        return self.target.array()

    def evaluate_many(self, V) -> np.ndarray:
        """Rows P_v(S_{sigma_A} = .) for each probe v (delta when v is in A)."""
        V = np.asarray(V, dtype=np.int64).reshape(-1, 2)
        K = self.table.matrix(V, self.points)  # (m, k)
        out = self.alpha[None, :] + K @ self.beta.T
        lookup = {p: i for i, p in enumerate(self.target.sites)}
        for row, v in enumerate(V):
            i = lookup.get((int(v[0]), int(v[1])))
            if i is not None:
                out[row] = 0.0
                out[row, i] = 1.0
        return out

    def evaluate(self, v) -> np.ndarray:
        return self.evaluate_many([v])[0]

    def first_hit(self, v) -> np.ndarray:
        """P_v(S_{tau_A} = .) with tau_A = inf{j >= 1: S_j in A}."""
        if v in self.target:
            return self.evaluate_many(neighbors(v)).mean(axis=0)
        return self.evaluate(v)


def solve_hitting(A: Config, table: PotentialTable, refine: bool = True) -> HittingSolution:
    k = A.n
    if k > MAX_SET_SIZE:
        raise SetTooLarge(f"|A| = {k} exceeds the solver cap {MAX_SET_SIZE}")
    if k == 1:
        return HittingSolution(A, np.ones(1), np.zeros((1, 1)), table)
    pts = A.array()
    M = _augmented(table, pts)
    rhs = np.zeros((k + 1, k))
    rhs[:k, :k] = np.eye(k)
    lu, piv = sla.lu_factor(M, check_finite=False)
    rcond = sla.lapack.dgecon(lu, np.linalg.norm(M, 1), norm="1")[0]
    if not np.isfinite(rcond) or rcond < 1e-15:
        raise SingularSystem(k, float(rcond))
    X = sla.lu_solve((lu, piv), rhs, check_finite=False)
    if refine:
        X += sla.lu_solve((lu, piv), rhs - M @ X, check_finite=False)
    beta = X[:k, :].T.copy()
    alpha = X[k, :].copy()
    return HittingSolution(A, alpha, beta, table, float(rcond))


def neighbor_formula(A: Config, sol: HittingSolution, x) -> float:
    """H_A(x) = 1/4 sum_{u ~ x, u not in A} (a(u - z0) - E_u a(S_{tau_A} - z0))."""
    table = sol.table
    z0 = A.sites[0]
    outs = [u for u in neighbors(x) if u not in A]
    if not outs:
        return 0.0
    U = np.array(outs)
    P = sol.evaluate_many(U)
    az = table.many(A.array()[:, 0] - z0[0], A.array()[:, 1] - z0[1])
    au = table.many(U[:, 0] - z0[0], U[:, 1] - z0[1])
    return float(0.25 * (au - P @ az).sum())


def harmonic_measure(A: Config, table: PotentialTable, check: bool = True, tol: float = 1e-7) -> np.ndarray:
    """Harmonic measure from infinity, indexed like ``A.sites``.

    With ``check`` every positive entry is recomputed from the neighbor formula
    and a disagreement beyond ``tol`` raises HarmonicMeasureMismatch.  When the
    set spreads past the exact kernel disk the tolerance grows by four times
    the certified kernel error there.
    """
    sol = solve_hitting(A, table)
    alpha = sol.alpha.copy()
    if check:
        # beyond the exact disk the kernel carries an error up to lambda / R0^2,
        # which the two computations propagate differently
        pts = A.array()
        spread = np.abs(pts[:, None, :] - pts[None, :, :]).max() + 1
        if spread > table.exact_radius / math.sqrt(2):
            tol = tol + 4 * table.lambda_bound / table.exact_radius**2
        for i, x in enumerate(A.sites):
            if alpha[i] > 1e-12:
                other = neighbor_formula(A, sol, x)
                if abs(other - alpha[i]) > tol:
                    raise HarmonicMeasureMismatch(
                        f"H_A({tuple(x)}): solver {alpha[i]:.12g} vs neighbor formula {other:.12g}"
                    )
    return alpha


def support(alpha: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    return alpha > tol


# escape probabilities --------------------------------------------------------
def fattening_boundary(A: Config, d: float) -> set[Site]:
    """Exterior boundary of A_d = {x : dist(x, A) < d}."""
    pts = A.array()
    R = int(math.ceil(d)) + 2
    x0, y0 = pts.min(axis=0) - R
    x1, y1 = pts.max(axis=0) + R
    xs = np.arange(x0, x1 + 1)
    ys = np.arange(y0, y1 + 1)
    d2 = np.full((len(xs), len(ys)), np.inf)
    for px, py in pts:
        d2 = np.minimum(d2, (xs[:, None] - px) ** 2 + (ys[None, :] - py) ** 2)
    fat = d2 < d * d
    grown = np.zeros_like(fat)
    grown[1:] |= fat[:-1]
    grown[:-1] |= fat[1:]
    grown[:, 1:] |= fat[:, :-1]
    grown[:, :-1] |= fat[:, 1:]
    I, J = np.nonzero(grown & ~fat)
    return {Site(int(xs[i]), int(ys[j])) for i, j in zip(I, J)}


def _escape_through(start, A: Config, barrier, table: PotentialTable) -> float:
    """P_start(tau_barrier < tau_A) for a start inside the barrier, barrier disjoint from A."""
    barrier = {Site(*b) for b in barrier}
    if barrier & set(A.sites):
        raise ValueError("barrier overlaps the set")
    B = Config([*A.sites, *barrier])
    if B.n > MAX_SET_SIZE:
        raise SetTooLarge(f"|A ∪ barrier| = {B.n} exceeds the solver cap {MAX_SET_SIZE}")
    sol = solve_hitting(B, table)
    mask = np.array([s in barrier for s in B.sites])
    return float(sol.first_hit(start)[mask].sum())


def escape_probability(A: Config, x, d: float, table: PotentialTable) -> float:
    """P_x(tau_{∂A_d} < tau_A) for x in A."""
    if x not in A:
        raise ValueError("start must belong to A")
    if d < 1:
        raise ValueError("escape distance must be at least 1")
    return _escape_through(x, A, fattening_boundary(A, d), table)


def escape_from(B: Config, x, rho: float, table: PotentialTable) -> float:
    """P_x(tau_{∂B_rho} < tau_B) for a start x with dist(x, B) < rho (x may lie outside B)."""
    return _escape_through(x, B, fattening_boundary(B, rho), table)


def escape_upper_bound(A: Config, x, rho: float) -> float:
    """(log diam(A) + 2)/log rho, the bound for escaping A \\ {x} to distance rho."""
    from .lattice import diameter

    return (math.log(diameter(A)) + 2) / math.log(rho)


def circle_escape(A: Config, x, r: float, table: PotentialTable, center=(0, 0)) -> float:
    """P_x(tau_{C(r)} < tau_A) for x in A, with C(r) centered at ``center``."""
    if x not in A:
        raise ValueError("start must belong to A")
    C = [Site(int(p[0]), int(p[1])) for p in circle_sites(r, center)]
    if set(C) & set(A.sites):
        raise ValueError("circle overlaps the set")
    return _escape_through(x, A, C, table)


def circle_escape_sparse(A: Config, x, r: float, center=(0, 0)) -> float:
    """Same quantity as circle_escape by a finite absorbing chain on D(r)."""
    cx, cy = center
    R = int(math.ceil(r)) + 1
    members = set(A.sites)
    idx: dict[tuple[int, int], int] = {}
    for dx in range(-R, R + 1):
        for dy in range(-R, R + 1):
            if dx * dx + dy * dy < r * r:
                p = (cx + dx, cy + dy)
                if p not in members:
                    idx[p] = len(idx)
    n = len(idx)
    rows, cols, vals = [], [], []
    b = np.zeros(n)
    for p, i in idx.items():
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for q in neighbors(p):
            j = idx.get(q)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(-0.25)
            elif q not in members:
                b[i] += 0.25  # q is outside D(r): it lies on C(r)
    M = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    f = spla.spsolve(M, b)
    total = 0.0
    for q in neighbors(x):
        if q in members:
            continue
        j = idx.get(q)
        total += 0.25 * (f[j] if j is not None else 1.0)
    return float(total)


# circle comparisons ------------------------------------------------------------
@dataclass
class RatioReport:
    r: float
    R: float
    starts: list
    ratios: np.ndarray  # (len(starts), |C(r)|)
    lower: float = 0.93
    upper: float = 1.04

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    @property
    def passed(self) -> bool:
        return self.lower <= self.min_ratio and self.max_ratio <= self.upper


def circle_hitting_ratio(r: float, R: float, table: PotentialTable, samples: int = 16, starts=None) -> RatioReport:
    """Ratios H_{C(r)}(x, y) / H_{C(r)}(y) for starts x on C(R) and all y in C(r)."""
    if r < 10 or R < 100 * r:
        raise ValueError("need r >= 10 and R >= 100 r")
    C = Config(map(tuple, circle_sites(r)))
    sol = solve_hitting(C, table)
    if starts is None:
        ring = circle_sites(R)
        angles = np.arctan2(ring[:, 1], ring[:, 0]) % (2 * math.pi)
        starts = []
        for j in range(samples):
            t = 2 * math.pi * j / samples
            gap = np.abs((angles - t + math.pi) % (2 * math.pi) - math.pi)
            starts.append(tuple(int(c) for c in ring[int(np.argmin(gap))]))
    H = sol.evaluate_many(np.array(starts))
    return RatioReport(r, R, list(starts), H / sol.alpha[None, :])


def two_point(x, y, z, table: PotentialTable) -> float:
    """P_z(sigma_y < sigma_x) in closed form."""
    if tuple(x) == tuple(y):
        raise ValueError("two_point needs distinct sites")
    if tuple(z) == tuple(y):
        return 1.0
    if tuple(z) == tuple(x):
        return 0.0
    a = table
    axy = a((x[0] - y[0], x[1] - y[1]))
    return (a((x[0] - z[0], x[1] - z[1])) - a((y[0] - z[0], y[1] - z[1]))) / (2 * axy) + 0.5


# conditional entrance measure ------------------------------------------------------
def conditional_entrance(eps: float, R: float, table: PotentialTable, starts: int = 8) -> dict:
    """Lower envelope of the conditional entrance law on C(eps^2 R) relative to uniform.

    For starts x on C(eps R) and eta the first hitting time of C(eps^2 R) ∪ C(R),
    bounds P_x(S_eta = y | inner circle first) from below for every y and
    returns the smallest ratio to the uniform mass 1/|C(eps^2 R)|.  The outer
    circle is handled analytically: on C(R) every inner hitting function
    h_y = alpha_y + sum_u beta_{y,u} a(. - u) is within a computable distance
    of alpha_y, and e(v) = a(v) - E_v a(S_{tau_C}) is within a computable
    distance of its asymptotic value, so the returned constant is a rigorous
    lower bound given the kernel error bound.
    """
    r_in, r_mid = eps * eps * R, eps * R
    C = Config(map(tuple, circle_sites(r_in)))
    sol = solve_hitting(C, table)
    k = C.n
    pts = C.array()
    ring = circle_sites(r_mid)
    X = ring[np.linspace(0, len(ring) - 1, starts).astype(int)]
    H = sol.evaluate_many(X)
    gap = R - r_in - 1
    # |a(w - u) - a(w)| for |w| >= R and |u| <= r_in + 1
    shift = (2 / math.pi) * math.log1p((r_in + 1) / gap) + 2 * table.lambda_bound / gap**2
    osc = np.abs(sol.beta).sum(axis=1) * shift
    aC = table.many(pts[:, 0], pts[:, 1])
    eX = table.many(X[:, 0], X[:, 1]) - H @ aC
    e_out = (2 / math.pi) * math.log(R) + table.kappa - float(sol.alpha @ aC)
    slack = (2 / math.pi) * math.log1p(1 / R) + table.lambda_bound / R**2 + float(osc @ np.abs(aC))
    q_lo = eX / (e_out + slack)
    q_hi = eX / (e_out - slack)
    joint_lo = H - q_hi[:, None] * (sol.alpha + osc)[None, :]
    ratio = joint_lo / (1 - q_lo)[:, None] * k
    return {
        "eps": eps,
        "R": R,
        "inner_sites": k,
        "min_hit_probability": float((1 - q_hi).min()),
        "fitted_c": float(ratio.min()),
    }


# tunnels and spirals -----------------------------------------------------------
def tunnel_value(L: int, i: int) -> float:
    """f(i) for f(1) = 0, f(L) = 1, f(j) = (f(j+1) + f(j-1))/4, solved exactly."""
    if L < 2 or not (1 <= i <= L):
        raise ValueError("need L >= 2 and 1 <= i <= L")
    if L == 2:
        return float(i - 1)
    # unknowns f(2..L-1): -f(j-1)/4 + f(j) - f(j+1)/4 = rhs, Thomas algorithm in rationals
    m = L - 2
    sub = Fraction(-1, 4)
    cprime: list[Fraction] = []
    dprime: list[Fraction] = []
    for j in range(m):
        rhs = Fraction(1, 4) if j == m - 1 else Fraction(0)
        diag = Fraction(1) - (sub * cprime[-1] if cprime else 0)
        cprime.append(sub / diag)
        dprime.append((rhs - (sub * dprime[-1] if dprime else 0)) / diag)
    f = [Fraction(0)] * m
    f[-1] = dprime[-1]
    for j in range(m - 2, -1, -1):
        f[j] = dprime[j] - cprime[j] * f[j + 1]
    full = [Fraction(0), *f, Fraction(1)]
    return float(full[i - 1])


def tunnel_closed_form(L: int) -> float:
    s = math.sqrt(3)
    return 2 * s / ((2 + s) ** (L - 1) - (2 - s) ** (L - 1))


@dataclass(frozen=True)
class Spiral:
    sites: Config
    path_length: int  # |Gamma|, vertices on the shortest admissible path ending at o


SPIRAL_VERSION = 1
SPIRAL_SPACING = 3


def _spiral_wall(count: int) -> list[Site]:
    """First ``count`` sites of a diagonal wall wound as a square spiral.

    In rotated coordinates u = x + y, v = x - y the wall is a square spiral
    polyline with arm lengths 3, 3, 6, 6, 9, ...; its lattice points (u, v of
    equal parity) form an 8-connected chain, hence a barrier for the walk.
    Parallel turns sit three rotated units apart, which leaves a staircase
    corridor in which every cell has exactly two open neighbors.
    """
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    u = v = 0
    pts: list[Site] = [Site(0, 0)]
    seen = {pts[0]}
    k = 0
    while len(pts) < count:
        du, dv = dirs[k % 4]
        for _ in range(SPIRAL_SPACING * (k // 2 + 1)):
            u, v = u + du, v + dv
            if (u - v) % 2 == 0:
                p = Site((u + v) // 2, (u - v) // 2)
                if p not in seen:
                    seen.add(p)
                    pts.append(p)
                    if len(pts) >= count:
                        break
        k += 1
    return pts


def build_spiral(n: int) -> Spiral:
    """Frozen spiral with n sites whose origin sits at the far end of the corridor.

    The wall uses n - 1 sites; the origin is the free site farthest (in walk
    steps) from the outside, ties broken lexicographically, and the set is
    translated so that it lands on o.
    """
    if n < 4:
        raise ValueError("build_spiral needs n >= 4")
    from collections import deque

    wall = set(_spiral_wall(n - 1))
    outside, (x0, x1, y0, y1) = _outside_component(wall, pad=2)
    depth: dict[Site, int] = {}
    queue: deque[Site] = deque()
    for p in sorted(outside):
        if p.x in (x0, x1) or p.y in (y0, y1):
            depth[p] = 0
            queue.append(p)
    while queue:
        p = queue.popleft()
        for q in neighbors(p):
            if q in outside and q not in depth:
                depth[q] = depth[p] + 1
                queue.append(q)
    o = max(sorted(depth), key=lambda p: depth[p])
    A = Config([Site(p.x - o.x, p.y - o.y) for p in wall | {o}])
    return Spiral(A, shortest_admissible_path(A))


def shortest_admissible_path(A: Config, target=(0, 0)) -> int:
    """Vertices on a shortest path from ∂(A ∪ ∂A) to ``target`` avoiding A \\ {target}."""
    from collections import deque

    target = Site(*target)
    blocked = set(A.sites) - {target}
    fat = set(A.sites) | exterior_boundary(A.sites)
    sources = exterior_boundary(fat)
    outside, (x0, x1, y0, y1) = _outside_component(set(A.sites) | fat, pad=2)
    sources = {s for s in sources if s in outside}
    dist = {s: 1 for s in sources}
    queue = deque(sources)
    pad = 4
    while queue:
        p = queue.popleft()
        if p == target:
            return dist[p]
        for q in neighbors(p):
            if q in blocked or q in dist:
                continue
            if not (x0 - pad <= q.x <= x1 + pad and y0 - pad <= q.y <= y1 + pad):
                continue
            dist[q] = dist[p] + 1
            queue.append(q)
    raise ValueError("target is not reachable from infinity")


def _cut_vertex(A: Config, target: Site):
    """Outermost site c outside A whose removal separates ``target`` from infinity."""
    from collections import deque

    blocked = set(A.sites) - {target}
    _, (x0, x1, y0, y1) = _outside_component(set(A.sites))
    prev = {target: None}
    queue = deque([target])
    hit = None
    while queue:
        p = queue.popleft()
        if p.x in (x0, x1) or p.y in (y0, y1):
            hit = p
            break
        for q in neighbors(p):
            if q not in blocked and q not in prev and x0 <= q.x <= x1 and y0 <= q.y <= y1:
                prev[q] = p
                queue.append(q)
    if hit is None:
        raise ValueError("target not exposed")
    chain = []
    p = prev[hit]
    while p is not None and p != target:
        chain.append(p)
        p = prev[p]
    for c in chain:  # from the rim inward
        sealed, _ = _outside_component(set(A.sites) | {c})
        if not any(q in sealed for q in neighbors(target)):
            return c
    return None


def harmonic_measure_deep(A: Config, target, table: PotentialTable, dps: int | None = None) -> float:
    """H_A(target) for targets buried at the end of a corridor.

    Factorizes through a cut vertex c: H_A(target) = H_{A ∪ {c}}(c) P_c(S_{tau_A} = target).
    The outer factor is a moderate quantity from the dense solver; the inner
    region is a finite absorbing chain solved in multiprecision, so values far
    below double-precision roundoff keep full relative accuracy.
    """
    target = Site(*target)
    c = _cut_vertex(A, target)
    if c is None:
        return float(harmonic_measure(A, table, check=False)[A.index(target)])
    members = set(A.sites)
    Ac = Config([*A.sites, c])
    outer = solve_hitting(Ac, table)
    ic = Ac.index(c)
    sealed, _ = _outside_component(members | {c})
    # inner region: sites not in A ∪ {c} and not connected to infinity
    inner: dict[Site, int] = {}
    stack = [q for q in neighbors(c) if q not in members and q not in sealed]
    while stack:
        p = stack.pop()
        if p in inner or p in members or p == c or p in sealed:
            continue
        inner[p] = len(inner)
        stack.extend(neighbors(p))
    m = len(inner)
    dps = dps or (30 + int(2 * len(A)))
    succ = ret = mpmath.mpf(0)
    with mpmath.workdps(dps):
        if m:
            M = mpmath.zeros(m, m)
            rhs = mpmath.zeros(m, 2)
            for p, i in inner.items():
                M[i, i] = 1
                for q in neighbors(p):
                    j = inner.get(q)
                    if j is not None:
                        M[i, j] -= mpmath.mpf(1) / 4
                    elif q == target:
                        rhs[i, 0] += mpmath.mpf(1) / 4
                    elif q == c:
                        rhs[i, 1] += mpmath.mpf(1) / 4
            sol = mpmath.lu_solve(M, rhs[:, 0])
            solr = mpmath.lu_solve(M, rhs[:, 1])
        for q in neighbors(c):
            if q == target:
                succ += mpmath.mpf(1) / 4
            elif q in members:
                continue
            elif q in inner:
                succ += sol[inner[q]] / 4
                ret += solr[inner[q]] / 4
            else:
                ret += mpmath.mpf(float(outer.evaluate(q)[ic])) / 4
        p_inner = succ / (1 - ret)
        return float(mpmath.mpf(float(outer.alpha[ic])) * p_inner)


# rectangles -------------------------------------------------------------------
def _in_rect(px, py, phi, w, l, eps=1e-9):
    c, s = math.cos(phi), math.sin(phi)
    along = px * c + py * s
    across = -px * s + py * c
    return (along >= -w - eps) & (along <= l + eps) & (np.abs(across) <= w / 2 + eps)


def rectangle_exit(phi: float, w: float, l: float) -> float:
    """P_o(tau_{∂Rec} < tau_{∂Rec+}) with Rec = Rec(phi, w, l), Rec+ = Rec(phi, w, l + w).

    Rec is the set of sites within the closed rectangle of width w around the
    segment from -w e^{i phi} to l e^{i phi}.
    """
    if not (24 <= w <= l):
        raise ValueError("need 24 <= w <= l")
    R = int(math.ceil(l + 2 * w)) + 2
    xs, ys = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1), indexing="ij")
    rec = _in_rect(xs, ys, phi, w, l)
    recp = _in_rect(xs, ys, phi, w, l + w)
    if not rec[R, R]:
        raise ValueError("origin not in the rasterized rectangle")
    idx = -np.ones(rec.shape, dtype=np.int64)
    idx[rec] = np.arange(rec.sum())
    n = int(rec.sum())
    rows, cols, vals = [np.arange(n)], [np.arange(n)], [np.ones(n)]
    b = np.zeros(n)
    I, J = np.nonzero(rec)
    me = idx[I, J]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        I2, J2 = I + di, J + dj
        inside = rec[I2, J2]
        rows.append(me[inside])
        cols.append(idx[I2[inside], J2[inside]])
        vals.append(np.full(inside.sum(), -0.25))
        success = ~inside & recp[I2, J2]
        np.add.at(b, me[success], 0.25)
    if b.sum() == 0:
        raise ValueError("degenerate rectangle: empty interface")
    M = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    f = spla.spsolve(M, b)
    return float(f[idx[R, R]])
