"""Monte Carlo transport by random walk with walk-on-squares acceleration.

A walk at l-infinity distance rho >= 2 from the absorbing set W may jump
straight to the boundary ring of the square of half-width m <= rho - 1
centered at its position, because no absorbing site lies inside that square.
The exit law of the ring seen from the center is known exactly (corners are
never hit first and each side carries mass 1/4), so every jump is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import Config, Site, exposed_sites

DEFAULT_MAX_HALF_WIDTH = 2**17
DEFAULT_BUDGET = 10**9


class StepBudgetExhausted(RuntimeError):
    pass


def square_exit_side(m: int) -> np.ndarray:
    """Law of the offset j in (-m, m) of the exit point, given exit through one side.

    From the center of {|q|_inf <= m} the exit density at (m, j) is
    sum_{k odd} s_k(j) s_k(0) / (2m cosh(m alpha_k)) with
    s_k(y) = sin(pi k (y + m) / (2m)) and cosh(alpha_k) = 2 - cos(pi k / (2m)),
    a sine series evaluated with one type-I DST.  Returned normalized to 1.
    """
    if m < 1:
        raise ValueError("half-width must be positive")
    if m == 1:
        return np.ones(1)
    k = np.arange(1, 2 * m)
    alpha = np.arccosh(2 - np.cos(np.pi * k / (2 * m)))
    sech = 2 * np.exp(-m * alpha) / (1 + np.exp(-2 * m * alpha))
    coef = np.sin(np.pi * k / 2) * sech / (2 * m)
    dens = scipy.fft.dst(coef, type=1) / 2
    dens = np.clip(dens, 0.0, None)
    return dens / dens.sum()


def square_exit_dense(m: int) -> np.ndarray:
    """Same law by a sparse absorbing solve on the (2m-1)^2 interior (oracle for small m)."""
    n = 2 * m - 1
    idx = np.arange(n * n).reshape(n, n)
    rows, cols, vals = [np.arange(n * n)], [np.arange(n * n)], [np.ones(n * n)]
    b = np.zeros(n * n)
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        I2, J2 = I + di, J + dj
        ok = (I2 >= 0) & (I2 < n) & (J2 >= 0) & (J2 < n)
        rows.append(idx[ok])
        cols.append(idx[I2[ok], J2[ok]])
        vals.append(np.full(ok.sum(), -0.25))
    M = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n * n, n * n))
    lu = spla.splu(M)
    out = np.zeros(n)
    for j in range(n):
        b[:] = 0
        b[idx[n - 1, j]] = 0.25  # the side x = m sits just beyond the last interior column
        out[j] = lu.solve(b)[idx[m - 1, m - 1]]
    return out / out.sum()


@lru_cache(maxsize=8)
def exit_tables(max_half_width: int = DEFAULT_MAX_HALF_WIDTH):
    """Dyadic half-widths with concatenated per-side CDFs and offsets into them."""
    widths = []
    m = 1
    while m <= max_half_width:
        widths.append(m)
        m *= 2
    cdfs, offsets = [], [0]
    for m in widths:
        c = np.cumsum(square_exit_side(m))
        c[-1] = 1.0
        cdfs.append(c)
        offsets.append(offsets[-1] + len(c))
    return np.array(widths, dtype=np.int64), np.concatenate(cdfs), np.array(offsets, dtype=np.int64)


@numba.njit(cache=True)
def _linf_to_set(px, py, W):
    best = 1 << 62
    for i in range(W.shape[0]):
        d = max(abs(px - W[i, 0]), abs(py - W[i, 1]))
        if d < best:
            best = d
    return best


@numba.njit(cache=True)
def _walk_batch(W, sx, sy, count, seed, widths, cdf, offsets, cx, cy, rmax, budget, accelerate):
    np.random.seed(seed)
    out = np.empty((count, 2), dtype=np.int64)
    dxs = np.array([1, -1, 0, 0])
    dys = np.array([0, 0, 1, -1])
    rmax2 = rmax * rmax
    for s in range(count):
        px, py = sx, sy
        used = 0
        while True:
            used += 1
            if used > budget:
                return out, s
            rho = _linf_to_set(px, py, W)
            if accelerate and rho >= 2:
                level = 0
                while level + 1 < widths.shape[0] and widths[level + 1] <= rho - 1:
                    level += 1
                m = widths[level]
                side = np.random.randint(0, 4)
                lo, hi = offsets[level], offsets[level + 1]
                j = np.searchsorted(cdf[lo:hi], np.random.random(), side="right")
                if j > hi - lo - 1:
                    j = hi - lo - 1
                off = j - (m - 1)
                if side == 0:
                    px, py = px + m, py + off
                elif side == 1:
                    px, py = px - m, py - off
                elif side == 2:
                    px, py = px - off, py + m
                else:
                    px, py = px + off, py - m
            else:
                d = np.random.randint(0, 4)
                qx, qy = px + dxs[d], py + dys[d]
                if rho <= 1:
                    hit = False
                    for i in range(W.shape[0]):
                        if W[i, 0] == qx and W[i, 1] == qy:
                            hit = True
                            break
                    if hit:
                        out[s, 0] = px
                        out[s, 1] = py
                        break
                px, py = qx, qy
            ex, ey = px - cx, py - cy
            if ex * ex + ey * ey > rmax2:
                theta = 2 * np.pi * np.random.random()
                half = rmax / 2
                px = cx + int(np.floor(half * np.cos(theta) + 0.5))
                py = cy + int(np.floor(half * np.sin(theta) + 0.5))
    return out, count


@dataclass(frozen=True)
class WalkOptions:
    r_max_factor: float = 2.0**16
    max_half_width: int = DEFAULT_MAX_HALF_WIDTH
    budget: int = DEFAULT_BUDGET
    accelerate: bool = True


def _frame(U: Config) -> tuple[int, int, float]:
    arr = U.array()
    cx, cy = (int(round(v)) for v in arr.mean(axis=0))
    radius = float(np.sqrt(((arr - [cx, cy]) ** 2).sum(axis=1)).max()) + 1.0
    return cx, cy, radius


def mc_transport_many(U: Config, x, count: int, seed: int, opts: WalkOptions = WalkOptions()) -> np.ndarray:
    """Landing sites S_{tau-1} of ``count`` independent walks from x against U \\ {x}."""
    x = Site(*x)
    if x not in exposed_sites(U):
        raise ValueError(f"{tuple(x)} is not exposed in the configuration")
    W = U.without(x).array()
    cx, cy, radius = _frame(U)
    widths, cdf, offsets = exit_tables(opts.max_half_width)
    out, done = _walk_batch(
        W, int(x[0]), int(x[1]), int(count), int(seed) % (2**32), widths, cdf, offsets,
        cx, cy, float(opts.r_max_factor * radius), int(opts.budget), bool(opts.accelerate),
    )
    if done < count:
        raise StepBudgetExhausted(f"walk {done} exceeded the budget of {opts.budget} moves")
    return out


def mc_transport(U: Config, x, rng: np.random.Generator, opts: WalkOptions = WalkOptions()) -> Site:
    seed = int(rng.integers(0, 2**32))
    p = mc_transport_many(U, x, 1, seed, opts)[0]
    return Site(int(p[0]), int(p[1]))
