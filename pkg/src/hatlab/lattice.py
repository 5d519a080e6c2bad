"""Lattice geometry on Z^2: configurations, boundaries, exposure and symmetry classes."""
from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

COORD_LIMIT = 2**30

NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))
STAR_NEIGHBORS = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy)

# the eight elements of the dihedral group of the square, as integer matrices
DIHEDRAL = (
    ((1, 0), (0, 1)),
    ((0, -1), (1, 0)),
    ((-1, 0), (0, -1)),
    ((0, 1), (-1, 0)),
    ((-1, 0), (0, 1)),
    ((1, 0), (0, -1)),
    ((0, 1), (1, 0)),
    ((0, -1), (-1, 0)),
)


class CoordinateOverflow(ValueError):
    """A site left the |coordinate| <= 2**30 box."""


class Site(NamedTuple):
    x: int
    y: int

    def __add__(self, other):  # type: ignore[override]
        return Site(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Site(self.x - other[0], self.y - other[1])

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ORIGIN = Site(0, 0)


def neighbors(s) -> list[Site]:
    return [Site(s[0] + dx, s[1] + dy) for dx, dy in NEIGHBORS]


def apply_dihedral(g, s) -> Site:
    (a, b), (c, d) = DIHEDRAL[g] if isinstance(g, int) else g
    return Site(a * s[0] + b * s[1], c * s[0] + d * s[1])


@dataclass(frozen=True)
class Config:
    """A finite set of lattice sites.

    Sites are deduplicated and kept in lexicographic order, which is the order
    used everywhere a probability vector is indexed by the sites of a set.
    """

    sites: tuple[Site, ...]
    _members: frozenset = field(repr=False, compare=False, hash=False)

    def __init__(self, sites: Iterable):
        pts = sorted({Site(int(p[0]), int(p[1])) for p in sites})
        if not pts:
            raise ValueError("a configuration needs at least one site")
        for p in pts:
            if abs(p.x) > COORD_LIMIT or abs(p.y) > COORD_LIMIT:
                raise CoordinateOverflow(f"site {tuple(p)} exceeds the coordinate guard 2**30")
        object.__setattr__(self, "sites", tuple(pts))
        object.__setattr__(self, "_members", frozenset(pts))

    @property
    def n(self) -> int:
        return len(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, s) -> bool:
        return (s[0], s[1]) in self._members

    def index(self, s) -> int:
        return self.sites.index(Site(s[0], s[1]))

    def array(self) -> np.ndarray:
        return np.array(self.sites, dtype=np.int64).reshape(-1, 2)

    def diameter(self) -> float:
        return diameter(self)

    def center_of_mass(self) -> np.ndarray:
        return self.array().mean(axis=0)

    def translate(self, v) -> "Config":
        return Config(Site(p.x + v[0], p.y + v[1]) for p in self.sites)

    def transform(self, g) -> "Config":
        return Config(apply_dihedral(g, p) for p in self.sites)

    def without(self, s) -> "Config":
        return Config(p for p in self.sites if p != (s[0], s[1]))

    def with_site(self, s) -> "Config":
        return Config([*self.sites, s])

    def move(self, src, dst) -> "Config":
        """U ∪ {dst} \\ {src}."""
        pts = set(self._members)
        pts.discard(Site(*src))
        pts.add(Site(*dst))
        return Config(pts)

    # serialization -------------------------------------------------------
    def to_text(self) -> str:
        return "".join(f"{p.x} {p.y}\n" for p in self.sites)

    @classmethod
    def from_text(cls, text: str) -> "Config":
        pts = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                x, y = line.split()
                pts.append((int(x), int(y)))
        return cls(pts)

    def to_json(self) -> str:
        return json.dumps([[p.x, p.y] for p in self.sites])

    @classmethod
    def from_json(cls, text: str) -> "Config":
        return cls(tuple(p) for p in json.loads(text))


def make_line(n: int) -> Config:
    """The vertical segment {(0, 0), (0, 1), ..., (0, n-1)}."""
    if n < 1:
        raise ValueError("make_line needs n >= 1")
    return Config((0, y) for y in range(n))


def make_pair(d: int) -> Config:
    if d < 1:
        raise ValueError("pair separation must be positive")
    return Config([(0, 0), (d, 0)])


def diameter(U: Config) -> float:
    a = U.array()
    if len(a) < 2:
        return 0.0
    if len(a) > 64:
        from scipy.spatial import ConvexHull

        try:
            a = a[ConvexHull(a).vertices]
        except Exception:  # collinear inputs
            pass
    diff = a[:, None, :] - a[None, :, :]
    return float(np.sqrt((diff.astype(float) ** 2).sum(-1).max()))


def dist(A: Iterable, B: Iterable) -> float:
    """Euclidean distance between two finite sets (inf if either is empty)."""
    a = np.array(list(A), dtype=float).reshape(-1, 2)
    b = np.array(list(B), dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        return math.inf
    return float(np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1).min()))


def boundaries(U: Config) -> tuple[set[Site], set[Site]]:
    """Exterior boundary (non-members adjacent to U) and interior boundary."""
    exterior: set[Site] = set()
    interior: set[Site] = set()
    for p in U:
        for q in neighbors(p):
            if q not in U:
                exterior.add(q)
                interior.add(p)
    return exterior, interior


def exterior_boundary(sites: Iterable) -> set[Site]:
    members = {Site(*p) for p in sites}
    out = set()
    for p in members:
        for q in neighbors(p):
            if q not in members:
                out.add(q)
    return out


def _outside_component(blocked: set, pad: int = 2) -> tuple[set[Site], tuple[int, int, int, int]]:
    """Sites of the padded bounding box reachable from its rim without entering `blocked`."""
    xs = [p[0] for p in blocked]
    ys = [p[1] for p in blocked]
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    seen: set[Site] = set()
    queue: deque[Site] = deque()
    for x in range(x0, x1 + 1):
        for y in (y0, y1):
            s = Site(x, y)
            if s not in seen:
                seen.add(s)
                queue.append(s)
    for y in range(y0, y1 + 1):
        for x in (x0, x1):
            s = Site(x, y)
            if s not in seen:
                seen.add(s)
                queue.append(s)
    while queue:
        p = queue.popleft()
        for q in neighbors(p):
            if x0 <= q.x <= x1 and y0 <= q.y <= y1 and q not in seen and q not in blocked:
                seen.add(q)
                queue.append(q)
    return seen, (x0, x1, y0, y1)


def star_components(sites: Iterable) -> list[set[Site]]:
    """Connected components under the 8-neighbor adjacency."""
    pts = {Site(*p) for p in sites}
    comps = []
    while pts:
        start = pts.pop()
        comp = {start}
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for dx, dy in STAR_NEIGHBORS:
                q = Site(p.x + dx, p.y + dy)
                if q in pts:
                    pts.remove(q)
                    comp.add(q)
                    queue.append(q)
        comps.append(comp)
    return comps


def outside_test(blocked: Iterable):
    """Predicate telling whether a free site is joined to infinity avoiding ``blocked``.

    A site is cut off from infinity exactly when a single 8-connected piece of
    the blocking set encloses it, so each piece is flood-filled inside its own
    padded bounding box; sparse sets never pay for the empty space between pieces.
    """
    tests = []
    for comp in star_components(blocked):
        if len(comp) < 4:  # fewer than four sites cannot enclose anything
            continue
        outside, box = _outside_component(comp, pad=1)
        tests.append((outside, box))

    def is_outside(q) -> bool:
        for outside, (x0, x1, y0, y1) in tests:
            if x0 <= q[0] <= x1 and y0 <= q[1] <= y1 and q not in outside:
                return False
        return True

    return is_outside


def exposed_sites(U: Config) -> set[Site]:
    """Sites of U reachable from infinity by a path avoiding the rest of U.

    These are exactly the sites of positive harmonic measure.
    """
    is_outside = outside_test(U.sites)
    return {p for p in U if any(q not in U and is_outside(q) for q in neighbors(p))}


def is_iso(U: Config) -> bool:
    """True when every exposed site of U lacks nearest neighbors in U."""
    return all(not any(q in U for q in neighbors(p)) for p in exposed_sites(U))


def classify(U: Config) -> str:
    return "Iso" if is_iso(U) else "NonIso"


def star_exterior_boundary(B: Config) -> set[Site]:
    """Sites *-adjacent to B that can be reached from infinity avoiding B."""
    is_outside = outside_test(B.sites)
    out = set()
    for p in B:
        for dx, dy in STAR_NEIGHBORS:
            q = Site(p.x + dx, p.y + dy)
            if q not in B and is_outside(q):
                out.add(q)
    return out


def is_connected(sites: Iterable, star: bool = False) -> bool:
    pts = {Site(*p) for p in sites}
    if not pts:
        return True
    steps = STAR_NEIGHBORS if star else NEIGHBORS
    start = next(iter(pts))
    seen = {start}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for dx, dy in steps:
            q = Site(p.x + dx, p.y + dy)
            if q in pts and q not in seen:
                seen.add(q)
                queue.append(q)
    return len(seen) == len(pts)


@dataclass(frozen=True)
class CanonicalClass:
    representative: Config
    hash: str
    # dihedral index and translation with representative = g·U + shift
    g: int = field(default=0, compare=False)
    shift: tuple[int, int] = field(default=(0, 0), compare=False)

    def __hash__(self) -> int:
        return hash(self.hash)

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonicalClass) and self.hash == other.hash


def _normal_form(pts: list[Site]) -> tuple[tuple[Site, ...], tuple[int, int]]:
    mx = min(p.x for p in pts)
    my = min(p.y for p in pts)
    return tuple(sorted(Site(p.x - mx, p.y - my) for p in pts)), (-mx, -my)


def canonical_key(U: Config) -> tuple[tuple[Site, ...], int, tuple[int, int]]:
    """Lexicographically least translated dihedral image, with the map achieving it."""
    best = None
    for g in range(8):
        img, shift = _normal_form([apply_dihedral(g, p) for p in U.sites])
        if best is None or img < best[0]:
            best = (img, g, shift)
    return best  # type: ignore[return-value]


def canonicalize(U: Config) -> CanonicalClass:
    rep, g, shift = canonical_key(U)
    digest = hashlib.sha1(";".join(f"{p.x},{p.y}" for p in rep).encode()).hexdigest()[:16]
    return CanonicalClass(Config(rep), digest, g, shift)


def inverse_dihedral(g: int) -> int:
    (a, b), (c, d) = DIHEDRAL[g]
    inv = ((a, c), (b, d))  # orthogonal matrices: inverse is the transpose
    return DIHEDRAL.index(inv)
