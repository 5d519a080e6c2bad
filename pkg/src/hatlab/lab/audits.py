"""Numerical audits of the kernel, escape and circle estimates, with pass/fail rows."""
from __future__ import annotations

import math

import numpy as np

from .. import harmonic as hm
from ..lattice import Config, Site, diameter
from ..potential import AuditItem, PotentialTable, audit_kernel_bounds, circle_sites


def random_set(rng: np.random.Generator, n_max: int = 6, box: int = 6, min_diam: float = 2.0) -> Config:
    """Random set of 2..n_max sites in a box, translated so its first site is the origin."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        pts = {tuple(int(v) for v in rng.integers(-box, box + 1, 2)) for _ in range(n)}
        if len(pts) < 2:
            continue
        pts = sorted(pts)
        ox, oy = pts[0]
        A = Config((x - ox, y - oy) for x, y in pts)
        if diameter(A) >= min_diam:
            return A


def audit_circle_escape(table: PotentialTable, count: int = 50, seed: int = 1, cap_radius: float = 120.0) -> AuditItem:
    """P_x(tau_{C(R)} < tau_A) >= H_A(x) / (4 log R) with o in A and R = k diam(A).

    k is 200 when that fits the solver cap, otherwise the largest k with
    k diam(A) <= cap_radius; the logarithm uses the radius actually solved.
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    checked = 0
    for _ in range(count):
        A = random_set(rng)
        b = diameter(A)
        k = min(200, int(cap_radius // b))
        R = k * b
        H = hm.harmonic_measure(A, table, check=False)
        C = {Site(int(p[0]), int(p[1])) for p in circle_sites(R)}
        B = Config([*A.sites, *C])
        sol = hm.solve_hitting(B, table)
        mask = np.array([s in C for s in B.sites])
        for i, x in enumerate(A.sites):
            if H[i] <= 1e-12:
                continue
            val = float(sol.first_hit(x)[mask].sum())
            worst = min(worst, val - H[i] / (4 * math.log(R)))
            checked += 1
    return AuditItem("escape to C(kb) >= H/(4 log kb)", bool(worst >= 0), worst, checked)


def audit_escape_upper(table: PotentialTable, count: int = 20, seed: int = 2) -> AuditItem:
    """P_x(tau_{∂(A\\{x})_rho} < tau_{A\\{x}}) <= (log diam A + 2)/log rho for rho >= 2 diam A.

    rho is taken near 16 diam(A) (capped at 120) so the bound is below one and
    the check is not vacuous.
    """
    rng = np.random.default_rng(seed)
    worst = math.inf
    checked = 0
    for _ in range(count):
        A = random_set(rng, n_max=5, box=4)
        b = diameter(A)
        rho = min(16 * b, 120.0)
        bound = (math.log(b) + 2) / math.log(rho)
        for x in A.sites:
            B = A.without(x)
            val = hm.escape_from(B, x, rho, table)
            worst = min(worst, bound - val)
            checked += 1
    return AuditItem("escape from A\\{x} to rho <= (log b + 2)/log rho", bool(worst >= 0), worst, checked)


def audit_circle_ratio(table: PotentialTable, r: float = 10, R: float = 1000) -> AuditItem:
    rep = hm.circle_hitting_ratio(r, R, table)
    margin = min(rep.min_ratio - rep.lower, rep.upper - rep.max_ratio)
    return AuditItem(f"C({r:g}) entrance ratios from C({R:g}) in [0.93, 1.04]", bool(rep.passed), margin, rep.ratios.size)


def audit_conditional_entrance(table: PotentialTable, eps: float = 0.01) -> AuditItem:
    res = hm.conditional_entrance(eps, 10.0 / eps**2, table)
    ok = res["fitted_c"] > 0 and res["min_hit_probability"] > 0.1
    return AuditItem(
        f"conditional entrance >= c uniform at eps={eps:g} (c={res['fitted_c']:.3f})", ok, res["fitted_c"], res["inner_sites"]
    )


def rectangle_rows(w: float = 24, lengths=(24, 48, 96), angles=(0.0, math.pi / 4)) -> list[dict]:
    rows = []
    for phi in angles:
        for l in lengths:
            P = hm.rectangle_exit(phi, w, l)
            rows.append({"phi": phi, "w": w, "l": l, "P": P, "scaled_log": math.log(P) / (l / w)})
    return rows


def audit_rectangles(w: float = 24, lengths=(24, 48, 96), angles=(0.0, math.pi / 4)) -> AuditItem:
    rows = rectangle_rows(w, lengths, angles)
    worst = math.inf
    for phi in angles:
        vals = [r["scaled_log"] for r in rows if r["phi"] == phi]
        spread = max(vals) / min(vals)  # both negative: ratio of magnitudes, >= 1
        worst = min(worst, 3 - max(spread, 1 / spread))
    return AuditItem("rectangle exit log P / (l/w) within a factor 3", bool(worst >= 0), worst, len(rows))


def run_all(table: PotentialTable, samples: int = 10000, random_sets: int = 50, seed: int = 0) -> list[AuditItem]:
    items = list(audit_kernel_bounds(table, samples=samples, rng_seed=seed))
    items.append(audit_circle_escape(table, count=random_sets, seed=seed + 1))
    items.append(audit_escape_upper(table, count=max(1, random_sets // 5), seed=seed + 2))
    items.append(audit_circle_ratio(table))
    items.append(audit_conditional_entrance(table))
    items.append(audit_rectangles())
    return items
