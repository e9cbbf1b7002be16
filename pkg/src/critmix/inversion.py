"""Homotopy inversion of the origin: the thermodynamic critical points.

From bank entries the image is walked along an L-shaped path to (0,0)
with an Euler predictor and damped Newton corrector.  det J is recorded
at every accepted point; a sign flip means the path is about to cross a
critical curve, where pre-images appear or vanish, so the step is halved
and the walk retreats rather than silently crossing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .critical_system import (CriticalContext, DomainPoint, ImagePoint, Stability,
                              eval_F_u, eval_jacobian_u, q_matrix, stability_flag)
from .errors import EmptyBank, NoConvergence
from .mixture_model import EosState, pressure
from .newton import NewtonOptions, newton_batch, solve_2x2
from .solved_bank import Bank, SolvedPoint, nearest

log = logging.getLogger(__name__)


class PathOutcome(Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    CROSSING_DETECTED = "crossing_detected"
    CORRECTOR_FAILED = "corrector_failed"


@dataclass(frozen=True)
class InversionParams:
    steps_per_leg: int = 50
    corrector_tol: float = 1e-12       # on F1^2 + F2^2 at the final target
    intermediate_tol: float = 1e-10    # on |F - q|^2 at interior waypoints
    max_corrector_iter: int = 20
    max_total_iter: int = 10000
    min_step_fraction: float = 1.0 / 1024.0
    detj_guard: bool = True
    leg_order: str = "F1_first"        # or "F2_first"
    cluster_radius: float = 0.08       # single-linkage radius in u
    dedupe_radius: float = 5e-3        # distinct-root radius in u

    def __post_init__(self):
        if self.corrector_tol > self.intermediate_tol:
            raise ValueError("corrector_tol must not exceed the intermediate tolerance")
        if self.steps_per_leg < 1:
            raise ValueError("steps_per_leg must be at least 1")


@dataclass
class PathTrace:
    image_waypoints: list[ImagePoint] = field(default_factory=list)
    domain_points: list[DomainPoint] = field(default_factory=list)
    det_j_signs: list[int] = field(default_factory=list)
    outcome: PathOutcome = PathOutcome.CORRECTOR_FAILED
    reason: str = ""
    start_label: str = ""


@dataclass(frozen=True)
class CriticalPointResult:
    T: float
    V: float
    P: float  # kPa
    residuals: tuple[float, float]  # raw (det Q, cubic form)
    stability: Stability
    trace: PathTrace | None


def l_path(q_start: ImagePoint, q_target: ImagePoint, steps_per_leg: int = 50,
           leg_order: str = "F1_first") -> list[ImagePoint]:
    """Axis-parallel two-leg waypoint list from q_start to q_target.

    The corner moves the leading component to its target value first;
    degenerate legs collapse to nothing.
    """
    if leg_order not in ("F1_first", "F2_first"):
        raise ValueError("leg_order must be 'F1_first' or 'F2_first'")
    pts = [q_start]
    if leg_order == "F1_first":
        corner = ImagePoint(F1=q_target.F1, F2=q_start.F2)
    else:
        corner = ImagePoint(F1=q_start.F1, F2=q_target.F2)
    for a, b in ((q_start, corner), (corner, q_target)):
        if a.F1 == b.F1 and a.F2 == b.F2:
            continue
        for k in range(1, steps_per_leg + 1):
            f = k / steps_per_leg
            pts.append(ImagePoint(F1=a.F1 + f * (b.F1 - a.F1), F2=a.F2 + f * (b.F2 - a.F2)))
    return pts


def _detj_sign(ctx, u):
    j = eval_jacobian_u(ctx, u)
    dj = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    if not np.isfinite(dj):
        return 0, j
    return (1 if dj > 0 else -1 if dj < 0 else 0), j


def follow_path(ctx: CriticalContext, start: SolvedPoint, waypoints: list[ImagePoint],
                params: InversionParams = InversionParams()) -> PathTrace:
    """Euler-Newton walk through the image waypoints from a bank entry."""
    trace = PathTrace(start_label=start.source_label)
    u = np.array([start.V / ctx.scaling.V_ref, start.T / ctx.scaling.T_ref])
    sign0, _ = _detj_sign(ctx, u)
    trace.image_waypoints.append(waypoints[0])
    trace.domain_points.append(ctx.from_u(u))
    trace.det_j_signs.append(sign0)

    q_final = np.array([waypoints[-1].F1, waypoints[-1].F2])
    total_iters = 0
    # stack of (q_from, q_to, fraction) segments, front first
    segments = [(np.array([a.F1, a.F2]), np.array([b.F1, b.F2]), 1.0)
                for a, b in zip(waypoints[:-1], waypoints[1:])]
    segments.reverse()

    while segments:
        q_from, q_to, frac = segments.pop()
        if total_iters > params.max_total_iter:
            trace.outcome = PathOutcome.MAX_ITERATIONS
            trace.reason = f"iteration budget {params.max_total_iter} exhausted"
            return trace
        dq = q_to - q_from
        _, J = _detj_sign(ctx, u)
        step, detj = solve_2x2(J[None, ...], dq[None, :])
        final_leg = bool(np.allclose(q_to, q_final))
        tol = params.corrector_tol if final_leg else params.intermediate_tol

        failed = ""
        if not np.all(np.isfinite(step)):
            failed = f"singular jacobian at predictor (det J = {float(detj[0]):.2e})"
            u_new = None
        else:
            u_pred = u + step[0]
            opts = NewtonOptions(tol_sq=tol, max_iter=params.max_corrector_iter)
            u_new, res_sq, conv, it = newton_batch(ctx, u_pred, q_to, opts)
            total_iters += int(it) + 1
            if not conv:
                failed = f"corrector stalled at |r|^2 = {res_sq:.2e} (target {tol:.1e})"
                u_new = None

        flip = False
        if u_new is not None:
            s, _ = _detj_sign(ctx, u_new)
            flip = params.detj_guard and sign0 != 0 and s != 0 and s != sign0

        if u_new is None or flip:
            if frac / 2.0 < params.min_step_fraction:
                trace.outcome = (PathOutcome.CROSSING_DETECTED if flip
                                 else PathOutcome.CORRECTOR_FAILED)
                trace.reason = ("det J sign flip persisted below the minimum step; "
                                "the path would cross a critical curve — try a bank "
                                "entry from a different domain cluster") if flip else failed
                return trace
            mid = 0.5 * (q_from + q_to)
            segments.append((mid, q_to, frac / 2.0))
            segments.append((q_from, mid, frac / 2.0))
            continue

        u = u_new
        s, _ = _detj_sign(ctx, u)
        trace.image_waypoints.append(ImagePoint(F1=float(q_to[0]), F2=float(q_to[1])))
        trace.domain_points.append(ctx.from_u(u))
        trace.det_j_signs.append(s)

    # final check against the stopping rule, plus one polish step
    f = eval_F_u(ctx, u)
    res = float(np.dot(f - q_final, f - q_final))
    if res < params.corrector_tol:
        u_pol, res_pol, conv, _ = newton_batch(
            ctx, u, q_final, NewtonOptions(tol_sq=max(res * 1e-6, 1e-30), max_iter=2))
        if np.all(np.isfinite(u_pol)) and res_pol <= res:
            u = u_pol
            trace.domain_points[-1] = ctx.from_u(u)
        trace.outcome = PathOutcome.CONVERGED
    else:
        trace.outcome = PathOutcome.CORRECTOR_FAILED
        trace.reason = f"final residual {res:.2e} above stopping rule {params.corrector_tol:.1e}"
    return trace


def _clusters(points_u: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage connected components under the given radius."""
    n = len(points_u)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(points_u[i] - points_u[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def invert_origin_report(ctx: CriticalContext, bank: Bank,
                         params: InversionParams = InversionParams()):
    """All pre-images of (0,0) reachable from the bank.

    One path is followed from the entry nearest to the origin in each
    domain cluster of the bank; converged endpoints are deduplicated and
    reported with pressure, raw residuals, and the stability flag.
    Returns (results, traces); results sorted by descending temperature.
    """
    if not bank.entries:
        raise EmptyBank("bank has no entries")
    pu = np.array([[e.V / ctx.scaling.V_ref, e.T / ctx.scaling.T_ref] for e in bank.entries])
    clusters = _clusters(pu, params.cluster_radius)

    origin = ImagePoint(F1=0.0, F2=0.0)
    traces: list[PathTrace] = []
    roots_u: list[np.ndarray] = []
    results: list[CriticalPointResult] = []
    for members in clusters:
        sub = Bank(entries=tuple(bank.entries[i] for i in members),
                   provenance=bank.provenance)
        entry = nearest(sub, origin, k=1)[0]
        wps = l_path(entry.q, origin, params.steps_per_leg, params.leg_order)
        tr = follow_path(ctx, entry, wps, params)
        traces.append(tr)
        if tr.outcome is not PathOutcome.CONVERGED:
            log.info("path from %s: %s (%s)", entry.source_label, tr.outcome.value, tr.reason)
            continue
        p = tr.domain_points[-1]
        u = np.array([p.V / ctx.scaling.V_ref, p.T / ctx.scaling.T_ref])
        if any(np.linalg.norm(u - r) < params.dedupe_radius for r in roots_u):
            continue
        roots_u.append(u)
        Q = q_matrix(ctx, p)
        f = eval_F_u(ctx, u)
        raw = ctx.unscale(float(f[0]), float(f[1]))
        P = pressure(ctx.spec, EosState(T=p.T, V=p.V, n=ctx.n0))
        results.append(CriticalPointResult(T=p.T, V=p.V, P=P, residuals=raw,
                                           stability=stability_flag(Q), trace=tr))

    if not results:
        detail = "; ".join(f"{t.start_label}: {t.outcome.value} ({t.reason})" for t in traces)
        raise NoConvergence(f"no inversion path converged — {detail}")
    results.sort(key=lambda r: (-r.T, -r.V))
    return results, traces


def invert_origin(ctx: CriticalContext, bank: Bank,
                  params: InversionParams = InversionParams()) -> list[CriticalPointResult]:
    results, _ = invert_origin_report(ctx, bank, params)
    return results
