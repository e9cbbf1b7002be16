"""Damped Newton iterations on the scaled criticality map.

One batched implementation serves bank construction (thousands of
independent starts advanced in lockstep), the path corrector, and the
plain two-variable reference solver.  Steps are capped in the
dimensionless domain coordinates and halved on residual growth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critical_system import CriticalContext, eval_F_u, eval_jacobian_u

SINGULAR_DETJ = 1e-14  # |det J| below this is treated as singular


@dataclass(frozen=True)
class NewtonOptions:
    tol_sq: float = 1e-24  # on |F - q|^2, scaled image units
    max_iter: int = 50
    step_cap: float = 0.5  # max step length in u
    max_backtrack: int = 30


def solve_2x2(J, rhs):
    """Closed-form solve of stacked 2x2 systems; NaN rows where singular."""
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    ok = np.abs(det) > SINGULAR_DETJ
    safe = np.where(ok, det, 1.0)
    x0 = (J[..., 1, 1] * rhs[..., 0] - J[..., 0, 1] * rhs[..., 1]) / safe
    x1 = (-J[..., 1, 0] * rhs[..., 0] + J[..., 0, 0] * rhs[..., 1]) / safe
    sol = np.stack([x0, x1], axis=-1)
    return np.where(ok[..., None], sol, np.nan), det


def newton_batch(ctx: CriticalContext, u0, q_target, opts: NewtonOptions = NewtonOptions()):
    """Damped Newton on F(u) = q for a batch of starts.

    Returns (u, res_sq, converged, iterations).  Diverged or singular
    entries simply end up non-converged; no exceptions are raised.
    """
    u = np.array(u0, dtype=float)
    squeeze = u.ndim == 1
    if squeeze:
        u = u[None, :]
    q = np.broadcast_to(np.asarray(q_target, dtype=float), u.shape).copy()

    r = eval_F_u(ctx, u) - q
    res_sq = np.einsum("...i,...i->...", r, r)
    res_sq = np.where(np.isfinite(res_sq), res_sq, np.inf)
    iters = np.zeros(u.shape[0], dtype=int)
    active = res_sq > opts.tol_sq

    for _ in range(opts.max_iter):
        if not np.any(active):
            break
        J = eval_jacobian_u(ctx, u[active])
        step, _ = solve_2x2(J, -r[active])
        # cap overlong steps (seeds may start near singular curves)
        norm = np.linalg.norm(step, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore"):
            step = np.where(norm > opts.step_cap, step * (opts.step_cap / norm), step)
        step = np.where(np.isfinite(step), step, 0.0)

        base = u[active]
        base_sq = res_sq[active]
        t = np.ones(base.shape[0])
        best_u = base.copy()
        best_sq = base_sq.copy()
        improved = np.zeros(base.shape[0], dtype=bool)
        for _ in range(opts.max_backtrack):
            trial = base + t[:, None] * step
            rt = eval_F_u(ctx, trial) - q[active]
            sq = np.einsum("...i,...i->...", rt, rt)
            sq = np.where(np.isfinite(sq), sq, np.inf)
            better = sq < best_sq
            best_u[better] = trial[better]
            best_sq[better] = sq[better]
            improved |= better
            if np.all(improved):
                break
            t = np.where(improved, t, 0.5 * t)

        u[active] = best_u
        res_sq[active] = best_sq
        iters[active] += 1
        # entries that could not improve at all are stuck: deactivate
        still = active.copy()
        still[active] = improved & (best_sq > opts.tol_sq)
        active = still
        r = eval_F_u(ctx, u) - q

    converged = res_sq <= opts.tol_sq
    if squeeze:
        return u[0], float(res_sq[0]), bool(converged[0]), int(iters[0])
    return u, res_sq, converged, iters
