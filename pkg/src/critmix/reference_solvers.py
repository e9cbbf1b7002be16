"""Independent reference solvers used to cross-check inversion results.

The classical double-loop solver nests a scalar Newton for temperature
(driving det Q to zero at fixed volume) inside a scalar Newton for volume
(driving the cubic form to zero).  A plain damped two-variable Newton on
F is kept alongside as a second, simpler oracle.  All solvers share the
same residual evaluation path, so residual comparisons are meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critical_system import (CriticalContext, DomainPoint, eval_F_u, q_matrix,
                              stability_flag)
from .errors import InnerDivergence, NoConvergence, OuterDivergence, SingularDerivative
from .inversion import CriticalPointResult
from .mixture_model import EosState, pressure
from .newton import NewtonOptions, newton_batch

COMBINED_TOL = 1e-12  # F1^2 + F2^2 stopping rule, scaled units


@dataclass(frozen=True)
class DoubleLoopParams:
    initial: DomainPoint
    inner_tol: float = 1e-9   # |F1| target of the temperature loop
    outer_tol: float = 1e-9   # |F2| target of the volume loop
    max_inner: int = 60
    max_outer: int = 60
    rel_step: float = 1e-6
    max_backtrack: int = 25
    swap_loops: bool = False  # solve V inside, T outside instead

    def __post_init__(self):
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")


def _result_at(ctx: CriticalContext, u) -> CriticalPointResult:
    p = ctx.from_u(u)
    f = eval_F_u(ctx, u)
    raw = ctx.unscale(float(f[0]), float(f[1]))
    Q = q_matrix(ctx, p)
    return CriticalPointResult(T=p.T, V=p.V, P=pressure(ctx.spec, EosState(T=p.T, V=p.V, n=ctx.n0)),
                               residuals=raw, stability=stability_flag(Q), trace=None)


def _scalar_newton(fun, x0, tol, max_iter, rel_step, max_backtrack, who):
    """Damped scalar Newton with a central-difference derivative."""
    x = float(x0)
    fx = fun(x)
    if not np.isfinite(fx):
        raise (InnerDivergence if who == "inner" else OuterDivergence)(
            f"{who} loop: residual undefined at start x = {x:.6e}")
    for it in range(max_iter):
        if abs(fx) <= tol:
            return x, it
        h = rel_step * max(abs(x), 1e-12)
        d = (fun(x + h) - fun(x - h)) / (2.0 * h)
        if not np.isfinite(d) or abs(d) < 1e-300:
            raise SingularDerivative(f"{who} loop: derivative vanished after {it} iterations")
        step = -fx / d
        t = 1.0
        for _ in range(max_backtrack):
            fn = fun(x + t * step)
            if np.isfinite(fn) and abs(fn) < abs(fx):
                break
            t *= 0.5
        else:
            raise (InnerDivergence if who == "inner" else OuterDivergence)(
                f"{who} loop: no damped step improved the residual after {it} iterations")
        x += t * step
        fx = fun(x)
    if abs(fx) <= tol:
        return x, max_iter
    raise (InnerDivergence if who == "inner" else OuterDivergence)(
        f"{who} loop: |residual| = {abs(fx):.2e} after {max_iter} iterations (target {tol:.1e})")


def hk_double_loop(ctx: CriticalContext, params: DoubleLoopParams) -> CriticalPointResult:
    """Classical double-loop solve from the given initial point.

    Inner: det Q(T; V) = 0 for T at fixed V.  Outer: cubic form to zero
    in V along the inner solution.  (swap_loops exchanges the roles.)
    Converged results satisfy the combined residual rule.
    """
    u0 = ctx.to_u(params.initial)
    inner_idx, outer_idx = (1, 0) if not params.swap_loops else (0, 1)
    inner_guess = [u0[inner_idx]]

    def inner_solve(outer_val):
        def f1(x):
            u = np.empty(2)
            u[outer_idx] = outer_val
            u[inner_idx] = x
            return float(eval_F_u(ctx, u)[0])
        x, _ = _scalar_newton(f1, inner_guess[0], params.inner_tol, params.max_inner,
                              params.rel_step, params.max_backtrack, "inner")
        inner_guess[0] = x
        return x

    def f2(outer_val):
        x = inner_solve(outer_val)
        u = np.empty(2)
        u[outer_idx] = outer_val
        u[inner_idx] = x
        return float(eval_F_u(ctx, u)[1])

    outer_val, _ = _scalar_newton(f2, u0[outer_idx], params.outer_tol, params.max_outer,
                                  params.rel_step, params.max_backtrack, "outer")
    u = np.empty(2)
    u[outer_idx] = outer_val
    u[inner_idx] = inner_solve(outer_val)
    f = eval_F_u(ctx, u)
    combined = float(f[0] ** 2 + f[1] ** 2)
    if combined >= COMBINED_TOL:
        raise OuterDivergence(f"combined residual {combined:.2e} above the stopping rule")
    return _result_at(ctx, u)


def newton_2x2(ctx: CriticalContext, initial: DomainPoint,
               opts: NewtonOptions | None = None) -> CriticalPointResult:
    """Simultaneous damped Newton on F from the given start."""
    if opts is None:
        opts = NewtonOptions(tol_sq=COMBINED_TOL * 1e-4, max_iter=80)
    u0 = ctx.to_u(initial)
    f = eval_F_u(ctx, u0)
    if np.all(np.isfinite(f)) and float(f @ f) < COMBINED_TOL:
        return _result_at(ctx, u0)
    u, res_sq, conv, it = newton_batch(ctx, u0, np.zeros(2), opts)
    if not conv or res_sq >= COMBINED_TOL:
        raise NoConvergence(f"newton_2x2 stalled at |F|^2 = {res_sq:.2e} after {it} iterations")
    return _result_at(ctx, u)
