"""Sound flowpipe for the sine ODE from a box of initial states.

Each node X(t_k) = Phi(t_k) X0 + psi(t_k) is computed from the initial set
directly (no step-to-step re-enclosure). A segment covers [t_k, t_k+1] with
a parallelotope enclosing the convex hull of X(t_k) and X(t_k+1), inflated
by a closed-form bound on how far trajectories bend away from that hull
within one step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..sine_builder import SineParams, StateBox
from ..sx_io import Polygon
from .dynamics import STATE_VARS, StateVector, Trajectory, affine_system, time_grid
from .expm import affine_power, step_map

SINGULAR_CONDITION = 1e12
_BASIS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Parallelotope:
    """{center + G a + e : a in [-1, 1]^n, ||e||_inf <= bloat}."""

    center: np.ndarray
    G: np.ndarray
    bloat: float = 0.0

    def __post_init__(self):
        if self.bloat < 0:
            raise ValueError("bloat must be >= 0")

    @property
    def radius(self) -> np.ndarray:
        """Half-widths of the axis-aligned interval hull."""
        return np.abs(self.G).sum(axis=1) + self.bloat

    def interval_hull(self) -> tuple[np.ndarray, np.ndarray]:
        r = self.radius
        return self.center - r, self.center + r


@dataclass(frozen=True, eq=False)
class Segment:
    t0: float
    t1: float
    set: Parallelotope


@dataclass(frozen=True, eq=False)
class Flowpipe:
    segments: tuple[Segment, ...]
    step: float
    horizon: float
    # centers of X(t_k) for every grid time, shape (len(segments) + 1, 3)
    nodes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t0 for s in self.segments] + [self.segments[-1].t1])

    def bounds(self, dim: str) -> tuple[float, float]:
        i = STATE_VARS.index(dim)
        lo = min(s.set.interval_hull()[0][i] for s in self.segments)
        hi = max(s.set.interval_hull()[1][i] for s in self.segments)
        return float(lo), float(hi)


def _enclosing_basis(candidates: Sequence[np.ndarray]) -> np.ndarray:
    """Pick n linearly independent unit directions, preferring earlier candidates."""
    n = len(candidates[0])
    chosen, ortho = [], []
    for v in list(candidates) + list(np.eye(n)):
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        u = v / norm
        resid = u.copy()
        for q in ortho:
            resid -= (q @ resid) * q
        rn = np.linalg.norm(resid)
        if rn > _BASIS_TOL:
            chosen.append(u)
            ortho.append(resid / rn)
            if len(chosen) == n:
                break
    return np.column_stack(chosen)


def enclose_zonotope(gens: np.ndarray, first: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Generator matrix of a parallelotope containing the zonotope <gens> (same center).

    The parallelotope is the box spanned by a basis B chosen from ``first``
    and then the columns of ``gens`` by decreasing norm.
    """
    cols = sorted(gens.T, key=lambda g: -np.linalg.norm(g))
    B = _enclosing_basis(list(first) + cols)
    coords = np.linalg.solve(B, gens)
    return B * np.abs(coords).sum(axis=1)


def _bend_bound(mnorm: float, bnorm: float, h: float, R: float) -> float:
    # sum_{n>=2} h^n ||M||^(n-1) (||M|| R + ||b||) / n!
    if mnorm == 0:
        return 0.0
    x = mnorm * h
    return (math.expm1(x) - x) * (R + bnorm / mnorm)


def flowpipe(init: StateBox, p: SineParams, step: float, horizon: float) -> Flowpipe:
    sys = affine_system(p)
    grid = time_grid(step, horizon)
    phi, psi = step_map(sys, step)
    squares: list = []

    lo, hi = init.lower, init.upper
    c0 = 0.5 * (lo + hi)
    G0 = np.diag(0.5 * (hi - lo))

    centers, gens = [], []
    partial = abs(grid[-1] - (len(grid) - 1) * step) > 1e-12 * horizon
    n_regular = len(grid) - 1 if partial else len(grid)
    for k in range(n_regular):
        Pk, qk = affine_power(phi, psi, k, squares)
        centers.append(Pk @ c0 + qk)
        gens.append(Pk @ G0)
    if partial:
        Pk, qk = affine_power(phi, psi, n_regular - 1, squares)
        tail_phi, tail_psi = step_map(sys, grid[-1] - grid[-2])
        centers.append(tail_phi @ (Pk @ c0 + qk) + tail_psi)
        gens.append(tail_phi @ Pk @ G0)

    mnorm = np.linalg.norm(sys.M, np.inf)
    bnorm = np.linalg.norm(sys.b, np.inf)
    segments = []
    for k in range(len(grid) - 1):
        ca, cb = centers[k], centers[k + 1]
        Ga, Gb = gens[k], gens[k + 1]
        R = max(np.max(np.abs(ca) + np.abs(Ga).sum(axis=1)),
                np.max(np.abs(cb) + np.abs(Gb).sum(axis=1)))
        bloat = _bend_bound(mnorm, bnorm, grid[k + 1] - grid[k], R)
        half_d = 0.5 * (cb - ca)
        z = np.column_stack([half_d, 0.5 * (Ga + Gb), 0.5 * (Gb - Ga)])
        G = enclose_zonotope(z, first=[half_d])
        segments.append(Segment(float(grid[k]), float(grid[k + 1]),
                                Parallelotope(0.5 * (ca + cb), G, bloat)))
    return Flowpipe(tuple(segments), float(step), float(horizon), np.array(centers))


# -- containment -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Violation:
    sample: int
    time: float
    state: StateVector
    segment: int


@dataclass(frozen=True, eq=False)
class ContainmentReport:
    violations: tuple[Violation, ...]
    margin: float
    # segments whose generator matrix was singular; interval-hull test used instead
    fallback_segments: tuple[int, ...] = ()

    @property
    def contained(self) -> bool:
        return not self.violations


def _membership_tables(fp: Flowpipe):
    n = len(fp.segments)
    centers = np.array([s.set.center for s in fp.segments])
    Gs = np.array([s.set.G for s in fp.segments])
    bloats = np.array([s.set.bloat for s in fp.segments])
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(Gs)
    fallback = ~(np.isfinite(cond) & (cond <= SINGULAR_CONDITION))
    Ginv = np.zeros_like(Gs)
    if np.any(~fallback):
        Ginv[~fallback] = np.linalg.inv(Gs[~fallback])
    # per-row inflation: |(G^-1 e)_i| <= bloat * ||row_i(G^-1)||_1 for ||e||_inf <= bloat
    allowed = 1.0 + bloats[:, None] * np.abs(Ginv).sum(axis=2)
    radius = np.abs(Gs).sum(axis=2) + bloats[:, None]
    return centers, Ginv, allowed, radius, fallback, n


def _slack(k, states, tables):
    centers, Ginv, allowed, radius, fallback, _ = tables
    diff = states - centers[k]
    alpha = np.einsum("nij,nj->ni", Ginv[k], diff)
    slack = (allowed[k] - np.abs(alpha)).min(axis=1)
    fb = fallback[k]
    if np.any(fb):
        r = radius[k][fb]
        d = np.abs(diff[fb])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d == 0, 0.0, d / r)
        slack[fb] = 1.0 - ratio.max(axis=1)
    return slack


def check_containment(fp: Flowpipe, tr: Trajectory) -> ContainmentReport:
    """Test every trajectory sample against the segment(s) covering its time."""
    tables = _membership_tables(fp)
    fallback = tables[4]
    fb_segments = tuple(int(i) for i in np.flatnonzero(fallback))
    if len(tr) == 0:
        return ContainmentReport((), math.inf, fb_segments)

    times = np.asarray(tr.times, dtype=float)
    states = np.asarray(tr.states, dtype=float)
    starts = np.array([s.t0 for s in fp.segments])
    ends = np.array([s.t1 for s in fp.segments])
    tol = 1e-12 * max(1.0, fp.horizon)
    if times[0] < -tol or times[-1] > fp.horizon + tol:
        raise ValueError("trajectory times fall outside the flowpipe horizon")

    n = len(fp.segments)
    k1 = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, n - 1)
    best = _slack(k1, states, tables)
    best_k = k1.copy()
    k0 = k1 - 1
    prev = (k0 >= 0) & (times <= ends[np.maximum(k0, 0)] + tol)
    if np.any(prev):
        s0 = _slack(k0[prev], states[prev], tables)
        better = s0 > best[prev]
        idx = np.flatnonzero(prev)[better]
        best[idx] = s0[better]
        best_k[idx] = k0[prev][better]

    violations = tuple(
        Violation(int(i), float(times[i]), StateVector.from_array(states[i]), int(best_k[i]))
        for i in np.flatnonzero(best < 0)
    )
    return ContainmentReport(violations, float(best.min()), fb_segments)


# -- 2-D projection ----------------------------------------------------------

def zonotope_polygon(center, gens) -> list[tuple[float, float]]:
    """Vertices (counter-clockwise) of a 2-D zonotope."""
    c = np.asarray(center, dtype=float)
    cols = [np.asarray(g, dtype=float) for g in np.asarray(gens, dtype=float).T]
    cols = [g for g in cols if np.any(g != 0)]
    if not cols:
        return [(float(c[0]), float(c[1]))]
    flipped = [(-g if (g[1] < 0 or (g[1] == 0 and g[0] < 0)) else g) for g in cols]
    flipped.sort(key=lambda g: math.atan2(g[1], g[0]))
    merged = [flipped[0]]
    for g in flipped[1:]:
        last = merged[-1]
        cross = last[0] * g[1] - last[1] * g[0]
        if abs(cross) <= 1e-14 * np.linalg.norm(last) * np.linalg.norm(g):
            merged[-1] = last + g
        else:
            merged.append(g)
    p = c - np.sum(merged, axis=0)
    verts = []
    for sign in (2.0, -2.0):
        for g in merged:
            verts.append((float(p[0]), float(p[1])))
            p = p + sign * g
    return verts


def project_flowpipe(fp: Flowpipe, dims: tuple[str, str]) -> list[Polygon]:
    """2-D shadow of each segment (parallelotope plus bloat box) as a polygon."""
    a, b = dims
    if a == b:
        raise ValueError(f"projection dims must differ, got {dims!r}")
    try:
        rows = [STATE_VARS.index(a), STATE_VARS.index(b)]
    except ValueError:
        raise ValueError(f"unknown dims {dims!r}; choose from {STATE_VARS}") from None
    polygons = []
    for seg in fp.segments:
        P = seg.set
        gens = np.column_stack([P.G[rows], P.bloat * np.eye(2)])
        polygons.append(Polygon(tuple(zonotope_polygon(P.center[rows], gens))))
    return polygons
