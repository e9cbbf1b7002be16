"""Location and tracing of the map's mathematical critical curves.

det J changes sign across a critical curve, so a rectangular scan of the
domain box finds crossing edges, bisection refines each edge to a point
on the zero set, and a tangent-predictor / transversal-corrector walk
extends each seed into a polyline.  The engine routines work on plain
callables in box-normalized coordinates so manufactured maps can be
traced by the same code as mixture contexts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .critical_system import CriticalContext, DomainPoint, ImagePoint, eval_detj_u, eval_F_u
from .errors import TraceLost

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    V_min: float
    V_max: float
    T_min: float
    T_max: float
    nV: int = 201
    nT: int = 201
    log_V: bool = True

    def __post_init__(self):
        if not (0.0 < self.V_min < self.V_max and self.T_min < self.T_max):
            raise ValueError("grid bounds out of order")
        if self.nV < 2 or self.nT < 2:
            raise ValueError("grid needs at least 2 nodes per axis")

    def v_nodes(self) -> np.ndarray:
        if self.log_V:
            return np.geomspace(self.V_min, self.V_max, self.nV)
        return np.linspace(self.V_min, self.V_max, self.nV)

    def t_nodes(self) -> np.ndarray:
        return np.linspace(self.T_min, self.T_max, self.nT)


@dataclass(frozen=True)
class SignGrid:
    grid: Grid
    det_j: np.ndarray  # (nV, nT)
    signs: np.ndarray  # (nV, nT) int8: +1, -1, 0 = invalid


@dataclass(frozen=True)
class CriticalCurve:
    points: tuple[DomainPoint, ...]
    closed: bool


@dataclass(frozen=True)
class CurveParams:
    curve_tol: float = 1e-8         # |det J| certificate, scaled units
    step_frac: float = 1.0 / 400.0  # predictor step as fraction of box diagonal
    max_points: int = 2000
    max_step_growth: float = 4.0
    grad_step: float = 1e-5         # finite-difference step for grad det J
    max_adapt: int = 24
    merge_cells: int = 2            # seed deduplication radius in grid cells


def sign_grid(ctx: CriticalContext, grid: Grid) -> SignGrid:
    """Signs of det J on the full grid; invalid nodes marked 0."""
    v = grid.v_nodes()
    t = grid.t_nodes()
    V, T = np.meshgrid(v, t, indexing="ij")
    u = np.stack([V / ctx.scaling.V_ref, T / ctx.scaling.T_ref], axis=-1)
    dj = eval_detj_u(ctx, u)
    signs = np.zeros(dj.shape, dtype=np.int8)
    finite = np.isfinite(dj)
    signs[finite & (dj > 0)] = 1
    signs[finite & (dj < 0)] = -1
    return SignGrid(grid=grid, det_j=dj, signs=signs)


def sign_change_edges(sg: SignGrid) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Index pairs of adjacent valid nodes with opposite det J signs."""
    s = sg.signs
    edges = []
    flip_v = (s[:-1, :] * s[1:, :]) < 0
    for i, j in zip(*np.nonzero(flip_v)):
        edges.append(((int(i), int(j)), (int(i) + 1, int(j))))
    flip_t = (s[:, :-1] * s[:, 1:]) < 0
    for i, j in zip(*np.nonzero(flip_t)):
        edges.append(((int(i), int(j)), (int(i), int(j) + 1)))
    return edges


def bracket_roots(ctx: CriticalContext, sg: SignGrid,
                  curve_tol: float = CurveParams.curve_tol,
                  merge_cells: int = CurveParams.merge_cells,
                  max_iter: int = 80) -> list[DomainPoint]:
    """One refined zero of det J per sign-change edge, deduplicated.

    Bisection runs on all edges in lockstep.  Edges whose sign change
    evaporates on refinement are logged and skipped.
    """
    edges = sign_change_edges(sg)
    if not edges:
        return []
    v = sg.grid.v_nodes()
    t = sg.grid.t_nodes()
    s = ctx.scaling

    def node_u(idx):
        return np.array([v[idx[0]] / s.V_ref, t[idx[1]] / s.T_ref])

    lo = np.array([node_u(a) for a, _ in edges])
    hi = np.array([node_u(b) for _, b in edges])
    flo = eval_detj_u(ctx, lo)
    fhi = eval_detj_u(ctx, hi)
    alive = np.isfinite(flo) & np.isfinite(fhi) & (np.sign(flo) != np.sign(fhi))

    mid = 0.5 * (lo + hi)
    fmid = eval_detj_u(ctx, mid)
    for _ in range(max_iter):
        done = alive & (np.abs(fmid) <= curve_tol)
        if np.all(done | ~alive):
            break
        take_lo = np.sign(fmid) == np.sign(flo)
        upd = alive & ~done
        lo[upd & take_lo] = mid[upd & take_lo]
        flo[upd & take_lo] = fmid[upd & take_lo]
        hi[upd & ~take_lo] = mid[upd & ~take_lo]
        fhi[upd & ~take_lo] = fmid[upd & ~take_lo]
        mid = 0.5 * (lo + hi)
        fmid = eval_detj_u(ctx, mid)
        dead = upd & ~np.isfinite(fmid)
        if np.any(dead):
            alive &= ~dead

    ok = alive & np.isfinite(fmid) & (np.abs(fmid) <= curve_tol)
    n_stalled = int(np.sum(alive & ~ok))
    if n_stalled:
        log.warning("bracket_roots: %d of %d edges stalled under refinement (skipped)",
                    n_stalled, len(edges))

    # deduplicate by grid-cell distance, greedy in edge order
    cells = np.array([(a[0], a[1]) for a, _ in edges], dtype=float)
    kept: list[int] = []
    for k in np.nonzero(ok)[0]:
        if all(max(abs(cells[k, 0] - cells[j, 0]), abs(cells[k, 1] - cells[j, 1])) > merge_cells
               for j in kept):
            kept.append(int(k))
    return [DomainPoint(V=float(mid[k, 0]) * s.V_ref, T=float(mid[k, 1]) * s.T_ref) for k in kept]


# ---------------------------------------------------------------------------
# Continuation engine on a scalar callable g(u) (vectorized over (..., 2))
# ---------------------------------------------------------------------------

def _grad(g, u, h):
    e0 = np.array([h, 0.0])
    e1 = np.array([0.0, h])
    pts = np.stack([u + e0, u - e0, u + e1, u - e1])
    vals = g(pts)
    return np.array([(vals[0] - vals[1]) / (2 * h), (vals[2] - vals[3]) / (2 * h)])


def _correct_on_segment(g, center, direction, half_len, tol):
    """Root of g on [center - h*d, center + h*d]; None if not bracketed."""
    from scipy.optimize import brentq

    a = center - half_len * direction
    b = center + half_len * direction
    vals = g(np.stack([a, b]))
    fa, fb = float(vals[0]), float(vals[1])
    if not (np.isfinite(fa) and np.isfinite(fb)) or np.sign(fa) == np.sign(fb):
        return None

    def f(s):
        return float(g((center + s * direction)[None, :])[0])

    try:
        s_root = brentq(f, -half_len, half_len, xtol=1e-14, rtol=1e-14, maxiter=80)
    except (ValueError, RuntimeError):
        return None
    root = center + s_root * direction
    return root if abs(f(s_root)) <= 10 * tol else None


def trace_zero_curve(g, seed_u, box_u, params: CurveParams = CurveParams()):
    """Polyline through the zero set of g from a seed already on it.

    Predictor steps along the tangent (perpendicular to grad g); the
    corrector does 1-D root finding on a short segment along the local
    gradient, with the segment grown and the step shrunk adaptively when
    the bracket fails.  Both directions from the seed are traced and
    stitched.  Returns (points (n,2), closed).
    """
    v0, v1, t0, t1 = box_u
    diag = float(np.hypot(v1 - v0, t1 - t0))
    step0 = params.step_frac * diag

    def inside(u, margin=0.02):
        mv = margin * (v1 - v0)
        mt = margin * (t1 - t0)
        return (v0 - mv <= u[0] <= v1 + mv) and (t0 - mt <= u[1] <= t1 + mt)

    seed = np.asarray(seed_u, dtype=float)
    if abs(float(g(seed[None, :])[0])) > params.curve_tol * 10:
        raise TraceLost("seed is not on the zero set within tolerance")

    halves = []
    for orient in (1.0, -1.0):
        pts = [seed.copy()]
        u = seed.copy()
        step = step0
        grad = _grad(g, u, params.grad_step)
        if np.linalg.norm(grad) == 0 or not np.all(np.isfinite(grad)):
            raise TraceLost("gradient of det J vanished at the seed")
        tangent = orient * np.array([-grad[1], grad[0]]) / np.linalg.norm(grad)
        closed = False
        while len(pts) < params.max_points:
            found = None
            s = step
            for _ in range(params.max_adapt):
                pred = u + s * tangent
                gr = _grad(g, pred, params.grad_step)
                nrm = np.linalg.norm(gr)
                if nrm == 0 or not np.all(np.isfinite(gr)):
                    s *= 0.5
                    continue
                ghat = gr / nrm
                half = 0.75 * s
                for _ in range(4):
                    root = _correct_on_segment(g, pred, ghat, half, params.curve_tol)
                    if root is not None:
                        break
                    half *= 2.0
                if root is not None:
                    found = (root, gr)
                    break
                s *= 0.5
            if found is None:
                break
            new_u, grad = found
            direction = new_u - u
            dn = np.linalg.norm(direction)
            if dn < 1e-14:
                break
            tangent = direction / dn
            u = new_u
            pts.append(u.copy())
            if not inside(u):
                break
            if len(pts) > 10 and np.linalg.norm(u - seed) < 1.5 * step0:
                closed = True
                break
            step = min(step * 1.3, params.max_step_growth * step0)
        halves.append((pts, closed))

    fwd, closed_f = halves[0]
    bwd, closed_b = halves[1]
    closed = closed_f or closed_b
    if closed:
        pts = fwd if len(fwd) >= len(bwd) else bwd
        return np.array(pts), True
    merged = list(reversed(bwd[1:])) + fwd
    return np.array(merged), False


def trace_critical_curve(ctx: CriticalContext, seed: DomainPoint,
                         params: CurveParams = CurveParams()) -> CriticalCurve:
    """Trace the det J = 0 curve through a seed inside the context box."""
    def g(u):
        return eval_detj_u(ctx, u)

    pts_u, closed = trace_zero_curve(g, ctx.to_u(seed), ctx.box_u(), params)
    pts = tuple(ctx.from_u(p) for p in pts_u)
    return CriticalCurve(points=pts, closed=closed)


def trace_all_curves(ctx: CriticalContext, seeds: list[DomainPoint],
                     params: CurveParams = CurveParams()) -> list[CriticalCurve]:
    """Trace from each seed, skipping seeds swallowed by earlier curves."""
    curves: list[CriticalCurve] = []
    s = ctx.scaling
    diag = np.hypot((ctx.box.V_max - ctx.box.V_min) / s.V_ref,
                    (ctx.box.T_max - ctx.box.T_min) / s.T_ref)
    absorb = 2.0 * params.step_frac * diag
    for seed in seeds:
        su = ctx.to_u(seed)
        taken = False
        for c in curves:
            pu = np.array([[p.V / s.V_ref, p.T / s.T_ref] for p in c.points])
            if np.min(np.linalg.norm(pu - su, axis=1)) < absorb:
                taken = True
                break
        if taken:
            continue
        try:
            curves.append(trace_critical_curve(ctx, seed, params))
        except TraceLost as exc:
            log.warning("trace from seed (V=%.3e, T=%.2f) lost: %s", seed.V, seed.T, exc)
    return curves


def critical_image(ctx: CriticalContext, curve: CriticalCurve) -> list[ImagePoint]:
    """F evaluated along the curve, in curve order."""
    if not curve.points:
        return []
    u = np.array([[p.V / ctx.scaling.V_ref, p.T / ctx.scaling.T_ref] for p in curve.points])
    f = eval_F_u(ctx, u)
    return [ImagePoint(F1=float(a), F2=float(b)) for a, b in f]
