"""Potential kernel of simple random walk on Z^2.

Exact values inside a disk come from the diagonal closed form
``a(k, k) = (4/pi) * sum_{j<=k} 1/(2j-1)`` together with ``a(1, 0) = 1`` and
discrete harmonicity, filled level by level away from the diagonal.  The fill
recursion loses about 2.5 bits per level, so it runs on fixed-point Python
integers carrying ``2.6 * R0 + 64`` fractional bits; the results are exact to
double precision.  Outside the disk the kernel is ``(2/pi) log|x| + kappa``,
whose absolute error is below ``LAMBDA / |x|^2``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numpy as np

LAMBDA = 0.06882
MIN_RADIUS, MAX_RADIUS = 4, 4096
CACHE_MAGIC = b"HATPOT"
CACHE_VERSION = 1


def _kappa() -> float:
    with mpmath.workdps(40):
        return float((2 * mpmath.euler + 3 * mpmath.log(2)) / mpmath.pi)


KAPPA = _kappa()
TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True, eq=False)
class PotentialTable:
    """Exact kernel values on the octant ``0 <= y <= x <= R0 + 1``.

    ``values[x, y]`` holds a(x, y) for the full square ``0 <= x, y <= R0 + 1``
    (mirrored across the diagonal) so that lookups need no branching.
    """

    exact_radius: int
    values: np.ndarray
    kappa: float = KAPPA
    lambda_bound: float = LAMBDA

    def __call__(self, x) -> float:
        return kernel(self, x)

    def many(self, dx, dy) -> np.ndarray:
        """Vectorized kernel on integer displacement arrays."""
        dx = np.abs(np.asarray(dx, dtype=np.int64))
        dy = np.abs(np.asarray(dy, dtype=np.int64))
        r2 = dx * dx + dy * dy
        inside = r2 <= self.exact_radius**2
        out = np.empty(np.broadcast(dx, dy).shape, dtype=float)
        dxb, dyb = np.broadcast_arrays(dx, dy)
        out[inside] = self.values[dxb[inside], dyb[inside]]
        far = ~inside
        if far.any():
            out[far] = TWO_OVER_PI * 0.5 * np.log(r2[far].astype(float)) + self.kappa
        return out

    def matrix(self, P, Q) -> np.ndarray:
        """Matrix of a(p - q) for site arrays P (m, 2) and Q (k, 2)."""
        P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
        Q = np.asarray(Q, dtype=np.int64).reshape(-1, 2)
        return self.many(P[:, None, 0] - Q[None, :, 0], P[:, None, 1] - Q[None, :, 1])


def _fill(N: int) -> np.ndarray:
    bits = int(2.6 * N) + 64
    scale = 1 << bits
    out = np.zeros((N + 1, N + 1))
    with mpmath.workprec(bits + 64):
        c = 4 / mpmath.pi
        s = mpmath.mpf(0)
        diag = [0]
        for k in range(1, N + 1):
            s += mpmath.mpf(1) / (2 * k - 1)
            diag.append(int(mpmath.nint(c * s * scale)))
    idx = np.arange(N + 1)
    out[idx, idx] = [v / scale for v in diag]
    # level j holds a(y + j, y) for y = 0 .. N - j
    lvl1 = [scale]
    for k in range(1, N):
        lvl1.append(2 * diag[k] - lvl1[k - 1])
    out[idx[:N] + 1, idx[:N]] = [v / scale for v in lvl1]
    prev2, prev1 = diag, lvl1
    for j in range(2, N + 1):
        cur: list[int] = []
        for y in range(N - j + 1):
            # harmonicity at (y + j - 1, y); a(x, -1) = a(x, 1) sits on level j - 2
            down = prev2[1] if y == 0 else cur[y - 1]
            cur.append(4 * prev1[y] - prev2[y] - prev2[y + 1] - down)
        ys = np.arange(N - j + 1)
        out[ys + j, ys] = [v / scale for v in cur]
        prev2, prev1 = prev1, cur
    iu = np.triu_indices(N + 1, 1)
    out[iu] = out.T[iu]
    return out


def build_table(R0: int = 256) -> PotentialTable:
    if not (MIN_RADIUS <= R0 <= MAX_RADIUS):
        raise ValueError(f"R0 must lie in [{MIN_RADIUS}, {MAX_RADIUS}], got {R0}")
    return PotentialTable(int(R0), _fill(int(R0) + 1))


_TABLES: dict[int, PotentialTable] = {}


def default_table(R0: int = 256) -> PotentialTable:
    """Process-wide memoized table; radii above 512 also go through the disk cache."""
    if R0 not in _TABLES:
        _TABLES[R0] = cached_table(R0) if R0 > 512 else build_table(R0)
    return _TABLES[R0]


def kernel(table: PotentialTable, x) -> float:
    dx, dy = abs(int(x[0])), abs(int(x[1]))
    r2 = dx * dx + dy * dy
    if r2 <= table.exact_radius**2:
        return float(table.values[dx, dy])
    return TWO_OVER_PI * 0.5 * math.log(r2) + table.kappa


def kernel_prime(r: float, kappa: float = KAPPA) -> float:
    """a'(r) = (2/pi) log r + kappa, the kernel evaluated 'on' the circle C(r)."""
    if r <= 0:
        raise ValueError("kernel_prime needs r > 0")
    return TWO_OVER_PI * math.log(r) + kappa


def error_bound(table: PotentialTable, x) -> float:
    """Certified absolute error of kernel(table, x)."""
    r2 = x[0] ** 2 + x[1] ** 2
    if r2 <= table.exact_radius**2:
        return 1e-13
    return table.lambda_bound / r2


# cache file ----------------------------------------------------------------
def save_table(table: PotentialTable, path) -> None:
    header = CACHE_MAGIC + struct.pack("<HIdd", CACHE_VERSION, table.exact_radius, table.kappa, table.lambda_bound)
    with open(path, "wb") as fh:
        fh.write(header)
        np.ascontiguousarray(table.values, dtype="<f8").tofile(fh)


def load_table(path) -> PotentialTable:
    with open(path, "rb") as fh:
        magic = fh.read(len(CACHE_MAGIC))
        if magic != CACHE_MAGIC:
            raise ValueError(f"{path} is not a potential-kernel cache")
        version, R0, kappa, lam = struct.unpack("<HIdd", fh.read(struct.calcsize("<HIdd")))
        if version != CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        N = R0 + 2
        values = np.fromfile(fh, dtype="<f8", count=N * N).reshape(N, N)
    return PotentialTable(R0, values, kappa, lam)


def write_triples(table: PotentialTable, path) -> int:
    """Dump "x y a(x,y)" for every site of the closed disk of radius R0."""
    R0 = table.exact_radius
    rows = 0
    with open(path, "w") as fh:
        for x in range(-R0, R0 + 1):
            ymax = math.isqrt(R0 * R0 - x * x)
            for y in range(-ymax, ymax + 1):
                fh.write(f"{x} {y} {table.values[abs(x), abs(y)]:.17g}\n")
                rows += 1
    return rows


def cached_table(R0: int, cache_dir=None) -> PotentialTable:
    cache_dir = Path(cache_dir or Path.home() / ".cache" / "hatlab")
    path = cache_dir / f"potential_R{R0}_v{CACHE_VERSION}.bin"
    if path.exists():
        try:
            return load_table(path)
        except ValueError:
            pass
    table = build_table(R0)
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        save_table(table, path)
    except OSError:
        pass
    return table


# audits ----------------------------------------------------------------------
@dataclass
class AuditItem:
    name: str
    passed: bool
    worst_margin: float
    checked: int

    def row(self) -> dict:
        return {"item": self.name, "passed": self.passed, "worst_margin": self.worst_margin, "checked": self.checked}


def _disk_sites(rng, rmin: float, rmax: float, size: int) -> np.ndarray:
    """Random integer sites with rmin <= |x| <= rmax (rejection on the annulus)."""
    out = np.empty((0, 2), dtype=np.int64)
    R = int(math.floor(rmax))
    while len(out) < size:
        cand = rng.integers(-R, R + 1, size=(4 * size + 16, 2))
        r = np.hypot(cand[:, 0], cand[:, 1])
        out = np.concatenate([out, cand[(r >= rmin) & (r <= rmax)]])
    return out[:size]


def circle_sites(r: float, center=(0, 0)) -> np.ndarray:
    """C_x(r): sites outside the open disk D_x(r) with a neighbor inside it."""
    R = int(math.ceil(r)) + 1
    xs, ys = np.meshgrid(np.arange(-R, R + 1), np.arange(-R, R + 1), indexing="ij")
    d2 = xs * xs + ys * ys
    inside = d2 < r * r
    outside = ~inside
    touch = np.zeros_like(inside)
    touch[1:, :] |= inside[:-1, :]
    touch[:-1, :] |= inside[1:, :]
    touch[:, 1:] |= inside[:, :-1]
    touch[:, :-1] |= inside[:, 1:]
    sel = outside & touch
    pts = np.stack([xs[sel], ys[sel]], axis=1)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order] + np.asarray(center, dtype=np.int64)


def audit_kernel_bounds(table: PotentialTable, samples: int = 10_000, rng_seed=0) -> list[AuditItem]:
    """Check the six potential-kernel inequalities, the circle-average bound and
    the lambda error bound on random admissible inputs inside the exact disk."""
    rng = np.random.default_rng(rng_seed)
    R0 = table.exact_radius
    pi = math.pi
    lam = table.lambda_bound
    a = table.many
    items: list[AuditItem] = []

    def record(name, margins):
        margins = np.asarray(margins, dtype=float)
        items.append(AuditItem(name, bool((margins >= -1e-12).all()), float(margins.min()), len(margins)))

    # (1) |y| >= 1.06|x| and |x| >= 2  =>  a(y) >= a(x); also the sharp sufficient radius
    x = _disk_sites(rng, 2, R0 / 1.07, samples)
    rx = np.hypot(x[:, 0], x[:, 1])
    lo = np.maximum(1.06 * rx, rx * (1 + pi * lam / rx**2 + (pi * lam) ** 2 / rx**4))
    t = rng.uniform(0, 1, samples)
    ry = lo + t * (R0 - lo)
    ang = rng.uniform(0, 2 * pi, samples)
    y = np.stack([np.ceil(ry * np.cos(ang)), np.ceil(ry * np.sin(ang))], 1).astype(np.int64)
    keep = (np.hypot(y[:, 0], y[:, 1]) >= lo) & (np.hypot(y[:, 0], y[:, 1]) <= R0)
    record("monotone in radius", a(y[keep, 0], y[keep, 1]) - a(x[keep, 0], x[keep, 1]))

    # (2) a(x) >= (2/pi) log|x| for |x| >= 1; a(x) <= 4 log|x| for |x| >= 2
    x = _disk_sites(rng, 1, R0, samples)
    rx = np.hypot(x[:, 0], x[:, 1])
    ax = a(x[:, 0], x[:, 1])
    m_lo = ax - TWO_OVER_PI * np.log(rx)
    big = rx >= 2
    m_hi = 4 * np.log(rx[big]) - ax[big]
    record("log bounds", np.concatenate([m_lo, m_hi]))

    # (3) z, z' in C(r), y outside D(R), r <= R/100, R >= 100: |a(y-z) - a(y-z')| <= 4/pi
    margins = []
    per = max(1, samples // 50)
    for _ in range(50):
        R = rng.uniform(100, max(101.0, R0 / 2))
        r = rng.uniform(1, R / 100)
        C = circle_sites(r)
        y = _disk_sites(rng, R, R0 - r - 2, per)
        i = rng.integers(0, len(C), per)
        k = rng.integers(0, len(C), per)
        d1 = y - C[i]
        d2 = y - C[k]
        margins.append(4 / pi - np.abs(a(d1[:, 0], d1[:, 1]) - a(d2[:, 0], d2[:, 1])))
    record("circle oscillation", np.concatenate(margins))

    # (4) |x|,|y| >= 1, 1/K <= |y|/|x| <= K, K >= 2: a(y) - a(x) <= log K
    x = _disk_sites(rng, 1, R0, samples)
    y = _disk_sites(rng, 1, R0, samples)
    rx = np.hypot(x[:, 0], x[:, 1])
    ry = np.hypot(y[:, 0], y[:, 1])
    K = np.maximum(2.0, np.maximum(ry / rx, rx / ry))
    record("radius ratio", np.log(K) - (a(y[:, 0], y[:, 1]) - a(x[:, 0], x[:, 1])))

    # (5) |x| >= 8|y|, |y| >= 10: |a(x+y) - a(x)| <= 0.7|y|/|x|
    y = _disk_sites(rng, 10, max(10.5, (R0 - 1) / 9), samples)
    ry = np.hypot(y[:, 0], y[:, 1])
    rx_lo = 8 * ry
    rx = rx_lo + rng.uniform(0, 1, samples) * np.maximum(0, R0 - ry - rx_lo - 2)
    ang = rng.uniform(0, 2 * pi, samples)
    x = np.stack([np.round(rx * np.cos(ang)), np.round(rx * np.sin(ang))], 1).astype(np.int64)
    rxa = np.hypot(x[:, 0], x[:, 1])
    s = x + y
    keep = (rxa >= 8 * ry) & (np.hypot(s[:, 0], s[:, 1]) <= R0)
    record("increment", 0.7 * ry[keep] / rxa[keep] - np.abs(a(s[keep, 0], s[keep, 1]) - a(x[keep, 0], x[keep, 1])))

    # (6) R >= 10r, r >= 10, x in C(R), y in C(r): 0.56 log(R/r) <= a(x) - a(y) <= log(R/r)
    margins = []
    for _ in range(40):
        r = rng.uniform(10, max(10.5, (R0 - 2) / 10))
        R = rng.uniform(10 * r, R0 - 2)
        CR, Cr = circle_sites(R), circle_sites(r)
        aR = a(CR[:, 0], CR[:, 1])
        ar = a(Cr[:, 0], Cr[:, 1])
        L = math.log(R / r)
        margins.append(np.concatenate([aR.min() - ar.max() - 0.56 * L + np.zeros(1), [L - (aR.max() - ar.min())]]))
    record("annulus", np.concatenate(margins))

    # circle average: |sum mu(y) a(y) - a'(r)| <= (5/(2pi) + 2 lambda)(|x|+1)/r over C_x(r)
    margins = []
    for _ in range(40):
        xc = _disk_sites(rng, 0, max(1.0, R0 / 8), 1)[0]
        rmin = 2 * (math.hypot(*xc) + 1)
        r = rng.uniform(rmin, max(rmin + 0.5, R0 - math.hypot(*xc) - 2))
        C = circle_sites(r, xc)
        vals = a(C[:, 0], C[:, 1])
        bound = (5 / (2 * pi) + 2 * lam) * (math.hypot(*xc) + 1) / r
        ap = kernel_prime(r, table.kappa)
        # any probability measure: the extreme values suffice
        margins.append([bound - abs(vals.max() - ap), bound - abs(vals.min() - ap)])
    record("circle average", np.concatenate(margins))

    # lambda error bound on the exact disk
    x = _disk_sites(rng, 1, R0, samples)
    r2 = (x[:, 0] ** 2 + x[:, 1] ** 2).astype(float)
    err = np.abs(a(x[:, 0], x[:, 1]) - TWO_OVER_PI * 0.5 * np.log(r2) - table.kappa)
    record("lambda bound", lam / r2 - err)
    return items
