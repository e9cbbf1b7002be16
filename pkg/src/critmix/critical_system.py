"""The criticality map F(V, T) = (det Q, cubic form) and its Jacobian.

Binds a mixture to a domain box and evaluates the two scaled residuals
whose common zero is a thermodynamic critical point: the determinant of
the log-fugacity derivative matrix Q, and the third-order form contracted
with the null direction of Q.  All evaluators broadcast over arrays of
domain points; solvers work in the dimensionless coordinates
u = (V / V_ref, T / T_ref).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateQ, VolumeBelowCovolume
from .mixture_model import MixtureSpec, _mixing, _q_entries, _tensor_entries

JAC_REL_STEP = 1e-6  # central-difference step for d F / d u
PIVOT_FACTOR = 1e-12  # |q12| threshold factor for the null-direction pivot


@dataclass(frozen=True)
class DomainPoint:
    V: float  # m3/mol
    T: float  # K


@dataclass(frozen=True)
class ImagePoint:
    F1: float  # scaled det Q
    F2: float  # scaled cubic form

    def norm(self) -> float:
        return float(np.hypot(self.F1, self.F2))


class Stability(Enum):
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    INDEFINITE = "indefinite"


@dataclass(frozen=True)
class DomainBox:
    V_min: float
    V_max: float
    T_min: float
    T_max: float

    def __post_init__(self):
        if not (0.0 < self.V_min < self.V_max and 0.0 < self.T_min < self.T_max):
            raise ValueError("domain box must satisfy 0 < V_min < V_max and 0 < T_min < T_max")

    def contains(self, V, T, margin: float = 0.0):
        mv = margin * (self.V_max - self.V_min)
        mt = margin * (self.T_max - self.T_min)
        return (
            (V >= self.V_min - mv) & (V <= self.V_max + mv)
            & (T >= self.T_min - mt) & (T <= self.T_max + mt)
        )


@dataclass(frozen=True)
class ScalingRefs:
    V_ref: float
    T_ref: float
    F1_ref: float
    F2_ref: float

    def __post_init__(self):
        if min(self.V_ref, self.T_ref, self.F1_ref, self.F2_ref) <= 0.0:
            raise ValueError("scaling references must be positive")


@dataclass(frozen=True)
class CriticalContext:
    """A mixture bound to a domain box with fixed residual scalings.

    The scaling references are computed once at the box midpoint
    (geometric mean in V, arithmetic in T): F1_ref is the squared largest
    entry of Q there, F2_ref the largest tensor entry, so both residual
    components are O(1) across the box.
    """

    spec: MixtureSpec
    n0: tuple[float, float]
    box: DomainBox
    scaling: ScalingRefs

    @classmethod
    def create(cls, spec: MixtureSpec, box: DomainBox) -> "CriticalContext":
        n0 = spec.z
        v_ref = float(np.sqrt(box.V_min * box.V_max))
        t_ref = 0.5 * (box.T_min + box.T_max)
        mx = _mixing(spec, t_ref, n0[0], n0[1])
        if v_ref <= float(np.real(mx.B)):
            raise VolumeBelowCovolume(
                f"domain box midpoint V = {v_ref:.4e} m3/mol is below the covolume "
                f"{float(np.real(mx.B)):.4e} m3/mol"
            )
        q11, q12, q22 = _q_entries(spec, t_ref, v_ref, n0[0], n0[1])
        qmax = max(abs(float(q11)), abs(float(q12)), abs(float(q22)))
        te = _tensor_entries(spec, t_ref, v_ref, n0[0], n0[1])
        tmax = max(abs(float(v)) for v in te)
        return cls(spec=spec, n0=n0, box=box,
                   scaling=ScalingRefs(V_ref=v_ref, T_ref=t_ref, F1_ref=qmax ** 2, F2_ref=tmax))

    # -- coordinate helpers -------------------------------------------------

    def to_u(self, p: DomainPoint) -> np.ndarray:
        return np.array([p.V / self.scaling.V_ref, p.T / self.scaling.T_ref])

    def from_u(self, u) -> DomainPoint:
        return DomainPoint(V=float(u[0]) * self.scaling.V_ref, T=float(u[1]) * self.scaling.T_ref)

    def box_u(self) -> tuple[float, float, float, float]:
        s = self.scaling
        return (self.box.V_min / s.V_ref, self.box.V_max / s.V_ref,
                self.box.T_min / s.T_ref, self.box.T_max / s.T_ref)

    def unscale(self, F1, F2):
        return F1 * self.scaling.F1_ref, F2 * self.scaling.F2_ref


# ---------------------------------------------------------------------------
# Vectorized evaluators (NaN marks invalid states; no exceptions raised)
# ---------------------------------------------------------------------------

def eval_F(ctx: CriticalContext, V, T):
    """Scaled residuals (F1, F2) broadcast over arrays of (V, T).

    Invalid states (V at or below covolume, nonpositive T, degenerate
    pivot) come back as NaN.
    """
    V = np.asarray(V, dtype=float)
    T = np.asarray(T, dtype=float)
    n1, n2 = ctx.n0
    with np.errstate(all="ignore"):
        mx = _mixing(ctx.spec, T, n1, n2)
        bad = ~((T > 0.0) & (V > np.real(mx.B)))
        Ts = np.where(bad, np.maximum(T, 1.0), T)
        Vs = np.where(bad, np.real(mx.B) * 2.0 + 1e-6, V)
        q11, q12, q22 = _q_entries(ctx.spec, Ts, Vs, n1, n2)
        f1 = q11 * q22 - q12 * q12
        qmax = np.maximum(np.abs(q11), np.maximum(np.abs(q12), np.abs(q22)))
        pivot_ok = np.abs(q12) > PIVOT_FACTOR * qmax
        d2 = np.where(pivot_ok, -q11 / np.where(pivot_ok, q12, 1.0), np.nan)
        te = _tensor_entries(ctx.spec, Ts, Vs, n1, n2)
        f2 = te.t111 + 3.0 * te.t112 * d2 + 3.0 * te.t122 * d2 * d2 + te.t222 * d2 ** 3
        f1 = np.where(bad, np.nan, f1) / ctx.scaling.F1_ref
        f2 = np.where(bad, np.nan, f2) / ctx.scaling.F2_ref
    return f1, f2


def eval_F_u(ctx: CriticalContext, u):
    """Scaled residuals at stacked u coordinates of shape (..., 2)."""
    u = np.asarray(u, dtype=float)
    f1, f2 = eval_F(ctx, u[..., 0] * ctx.scaling.V_ref, u[..., 1] * ctx.scaling.T_ref)
    return np.stack([f1, f2], axis=-1)


def eval_jacobian_u(ctx: CriticalContext, u, rel_step: float = JAC_REL_STEP):
    """Jacobian dF/du of shape (..., 2, 2) by central differences."""
    u = np.asarray(u, dtype=float)
    h = rel_step
    out = np.empty(u.shape[:-1] + (2, 2))
    for j in range(2):
        up = u.copy()
        um = u.copy()
        up[..., j] += h
        um[..., j] -= h
        df = (eval_F_u(ctx, up) - eval_F_u(ctx, um)) / (2.0 * h)
        out[..., :, j] = df
    return out


def eval_detj_u(ctx: CriticalContext, u, rel_step: float = JAC_REL_STEP):
    j = eval_jacobian_u(ctx, u, rel_step)
    return j[..., 0, 0] * j[..., 1, 1] - j[..., 0, 1] * j[..., 1, 0]


# ---------------------------------------------------------------------------
# Point-based operations
# ---------------------------------------------------------------------------

def _check_point(ctx: CriticalContext, p: DomainPoint):
    mx = _mixing(ctx.spec, p.T, ctx.n0[0], ctx.n0[1])
    if p.T <= 0.0 or p.V <= float(np.real(mx.B)):
        raise VolumeBelowCovolume(
            f"point (V={p.V:.4e}, T={p.T:.2f}) lies at or below the covolume branch"
        )


def q_matrix(ctx: CriticalContext, p: DomainPoint) -> np.ndarray:
    """Symmetric log-fugacity derivative matrix Q at p (1/mol)."""
    _check_point(ctx, p)
    q11, q12, q22 = _q_entries(ctx.spec, p.T, p.V, ctx.n0[0], ctx.n0[1])
    return np.array([[float(q11), float(q12)], [float(q12), float(q22)]])


def delta_n(Q: np.ndarray, pivot_factor: float = PIVOT_FACTOR) -> tuple[float, float]:
    """Null direction of Q normalized per the first-row pivot.

    Returns (1, -q11/q12); if q12 is negligible the second row is used
    instead, giving (-q22/q21, 1).  When both off-diagonal pivots vanish
    the direction is not representable in this normalization.
    """
    Q = np.asarray(Q, dtype=float)
    qmax = np.max(np.abs(Q))
    if qmax == 0.0:
        raise DegenerateQ("zero matrix has no normalized null direction")
    if abs(Q[0, 1]) > pivot_factor * qmax:
        return (1.0, -Q[0, 0] / Q[0, 1])
    if abs(Q[1, 0]) > pivot_factor * qmax:
        return (-Q[1, 1] / Q[1, 0], 1.0)
    raise DegenerateQ("both off-diagonal pivots below threshold; Q is effectively diagonal")


def cubic_form(ctx: CriticalContext, p: DomainPoint, d) -> float:
    """Triple contraction of the third-derivative tensor with d (raw units)."""
    _check_point(ctx, p)
    te = _tensor_entries(ctx.spec, p.T, p.V, ctx.n0[0], ctx.n0[1])
    d0, d1 = float(d[0]), float(d[1])
    return float(te.t111 * d0 ** 3 + 3.0 * te.t112 * d0 * d0 * d1
                 + 3.0 * te.t122 * d0 * d1 * d1 + te.t222 * d1 ** 3)


def F(ctx: CriticalContext, p: DomainPoint) -> ImagePoint:
    """Scaled criticality residuals at p."""
    _check_point(ctx, p)
    f = eval_F_u(ctx, ctx.to_u(p))
    if not np.all(np.isfinite(f)):
        raise DegenerateQ(f"residuals undefined at (V={p.V:.4e}, T={p.T:.2f})")
    return ImagePoint(F1=float(f[0]), F2=float(f[1]))


def F_raw(ctx: CriticalContext, p: DomainPoint) -> tuple[float, float]:
    """Unscaled residuals (det Q in mol^-2, cubic form in mol^-2)."""
    img = F(ctx, p)
    return ctx.unscale(img.F1, img.F2)


def jacobian_F(ctx: CriticalContext, p: DomainPoint, rel_step: float = JAC_REL_STEP) -> np.ndarray:
    """d F / d u at p, u = (V/V_ref, T/T_ref)."""
    _check_point(ctx, p)
    return eval_jacobian_u(ctx, ctx.to_u(p), rel_step)


def stability_flag(Q: np.ndarray, tol_factor: float = 1e-8) -> Stability:
    """Positive semidefiniteness of the (symmetrized) Q matrix."""
    Q = np.asarray(Q, dtype=float)
    sym = 0.5 * (Q + Q.T)
    lmin = float(np.linalg.eigvalsh(sym)[0])
    if lmin >= -tol_factor * np.max(np.abs(sym)):
        return Stability.POSITIVE_SEMIDEFINITE
    return Stability.INDEFINITE
