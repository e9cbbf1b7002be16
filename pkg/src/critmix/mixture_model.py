"""Cubic equation of state layer for binary mixtures.

Pressure, log-fugacities and their first and second mole-number derivatives
for two model stacks: Peng-Robinson with quadratic (van der Waals) mixing,
and the Stryjek-Vera alpha variant with Wong-Sandler mixing closed by an
NRTL excess-energy model.

Everything is evaluated in (T, V, n) variables on a total-moles-of-one
basis, in SI units internally (K, m3/mol, Pa); kPa appears only at the
reporting boundary.  All evaluators broadcast over numpy arrays and accept
complex mole numbers, which is what the third-derivative extraction relies
on: log-fugacities and their first derivatives are closed-form, and the
rank-3 tensor comes from a complex-step derivative of the closed-form
first-derivative matrix, so no subtractive cancellation enters the
criticality residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DerivativeStepUnderflow, VolumeBelowCovolume

R = 8.314462618  # J / (mol K)

# Peng-Robinson constants
OMEGA_A = 0.45724
OMEGA_B = 0.07780
SQRT2 = math.sqrt(2.0)
EOS_C1 = 1.0 + SQRT2  # denominator factors (V + c * B)
EOS_C2 = 1.0 - SQRT2
WS_C = math.log(SQRT2 - 1.0) / SQRT2  # infinite-pressure packing constant, ~ -0.62323

CSTEP = 1e-20  # complex-step size for the rank-3 tensor


class MixingRule(str, Enum):
    VDW1 = "vdw1"
    WONG_SANDLER = "wong_sandler"


class AlphaVariant(str, Enum):
    PR = "pr"
    PRSV = "prsv"


@dataclass(frozen=True)
class Component:
    """Pure-substance constants.  Pc is stored in kPa, as tabulated.

    kappa1 must be present exactly when the Stryjek-Vera alpha variant is
    requested for this component; its presence is what selects the variant
    inside a mixture model.
    """

    name: str
    Tc: float
    Pc: float
    omega: float
    kappa1: float | None = None

    def __post_init__(self):
        if self.Tc <= 0.0 or self.Pc <= 0.0:
            raise ValueError(f"{self.name}: Tc and Pc must be positive")

    @property
    def Pc_pa(self) -> float:
        return self.Pc * 1e3


@dataclass(frozen=True)
class NrtlParams:
    """NRTL parameters with energies normalized by R (kelvin)."""

    alpha: float
    g12_over_R: float
    g21_over_R: float


@dataclass(frozen=True)
class MixtureSpec:
    """Immutable problem definition for a binary mixture."""

    components: tuple[Component, Component]
    z: tuple[float, float]
    k12: float = 0.0
    mixing_rule: MixingRule = MixingRule.VDW1
    nrtl: NrtlParams | None = None

    def __post_init__(self):
        z1, z2 = self.z
        if z1 <= 0.0 or z2 <= 0.0 or abs(z1 + z2 - 1.0) > 1e-12:
            raise ValueError("mole fractions must be positive and sum to 1")
        if (self.mixing_rule is MixingRule.WONG_SANDLER) != (self.nrtl is not None):
            raise ValueError("nrtl parameters are required by, and only by, Wong-Sandler mixing")

    def model_signature(self):
        """Everything defining the model stack except the composition."""
        comps = tuple((c.name, c.Tc, c.Pc, c.omega, c.kappa1) for c in self.components)
        nrtl = None
        if self.nrtl is not None:
            nrtl = (self.nrtl.alpha, self.nrtl.g12_over_R, self.nrtl.g21_over_R)
        return comps, self.k12, self.mixing_rule.value, nrtl


@dataclass(frozen=True)
class EosState:
    """A (T, V, n) state on the total-moles-of-one basis (V in m3/mol)."""

    T: float
    V: float
    n: tuple[float, float]

    def __post_init__(self):
        if self.T <= 0.0:
            raise ValueError("T must be positive")
        if min(self.n) <= 0.0:
            raise ValueError("mole numbers must be positive")


class MixtureParams(NamedTuple):
    a_m: float  # Pa m6 / mol2
    b_m: float  # m3 / mol


def variant_for(comp: Component) -> AlphaVariant:
    return AlphaVariant.PRSV if comp.kappa1 is not None else AlphaVariant.PR


def alpha_function(comp: Component, T, variant: AlphaVariant | str):
    """Temperature correction of the attraction parameter.

    The PR variant uses m(omega) = 0.37464 + 1.54226 w - 0.26992 w^2; the
    Stryjek-Vera variant augments kappa0(omega) with the kappa1 correction
    term, active at all temperatures.
    """
    variant = AlphaVariant(variant)
    tr = np.asarray(T, dtype=float) / comp.Tc
    sq = np.sqrt(tr)
    w = comp.omega
    if variant is AlphaVariant.PR:
        kap = 0.37464 + 1.54226 * w - 0.26992 * w * w
    else:
        if comp.kappa1 is None:
            raise ValueError(f"{comp.name}: kappa1 required for the PRSV alpha variant")
        kap0 = 0.378893 + 1.4897153 * w - 0.17131848 * w * w + 0.0196554 * w ** 3
        kap = kap0 + comp.kappa1 * (1.0 + sq) * (0.7 - tr)
    return (1.0 + kap * (1.0 - sq)) ** 2


def _pure_ab(comp: Component, T):
    """PR pure-component a(T) and b from critical constants."""
    pc = comp.Pc_pa
    a = OMEGA_A * (R * comp.Tc) ** 2 / pc * alpha_function(comp, T, variant_for(comp))
    b = OMEGA_B * R * comp.Tc / pc
    return a, b


class _MixDerivs(NamedTuple):
    """Extensive covolume B (m3), attraction Dg (Pa m6), and their first
    and second mole-number derivatives.  All entries broadcast and may be
    complex when the mole numbers are."""

    B: object
    B1: object
    B2: object
    B11: object
    B12: object
    B22: object
    Dg: object
    Dg1: object
    Dg2: object
    Dg11: object
    Dg12: object
    Dg22: object


def _nrtl_extensive(nrtl: NrtlParams, T, n1, n2):
    """n * gE/RT for NRTL plus ln gamma_i and d(ln gamma_i)/dx1.

    Written in extensive form so that complex mole-number perturbations
    propagate analytically.
    """
    t12 = nrtl.g12_over_R / T
    t21 = nrtl.g21_over_R / T
    g12 = np.exp(-nrtl.alpha * t12)
    g21 = np.exp(-nrtl.alpha * t21)
    n = n1 + n2
    x1 = n1 / n
    x2 = n2 / n
    s1 = x1 + x2 * g21
    s2 = x2 + x1 * g12
    w21 = t21 * g21
    w12 = t12 * g12
    nge = n1 * n2 * (w21 / (n1 + n2 * g21) + w12 / (n2 + n1 * g12))
    p1 = w21 * g21  # tau21 * G21^2
    p2 = w12 * g12
    lng1 = x2 * x2 * (p1 / s1 ** 2 + w12 / s2 ** 2)
    lng2 = x1 * x1 * (p2 / s2 ** 2 + w21 / s1 ** 2)
    ds1 = 1.0 - g21
    ds2 = g12 - 1.0
    dlng1 = -2.0 * x2 * (p1 / s1 ** 2 + w12 / s2 ** 2) + x2 * x2 * (
        -2.0 * p1 * ds1 / s1 ** 3 - 2.0 * w12 * ds2 / s2 ** 3
    )
    dlng2 = 2.0 * x1 * (p2 / s2 ** 2 + w21 / s1 ** 2) + x1 * x1 * (
        -2.0 * p2 * ds2 / s2 ** 3 - 2.0 * w21 * ds1 / s1 ** 3
    )
    return nge, lng1, lng2, dlng1, dlng2


def _mixing(spec: MixtureSpec, T, n1, n2) -> _MixDerivs:
    """Extensive mixed EOS parameters with analytic mole derivatives."""
    c1, c2 = spec.components
    a1, b1 = _pure_ab(c1, T)
    a2, b2 = _pure_ab(c2, T)

    if spec.mixing_rule is MixingRule.VDW1:
        a12 = np.sqrt(a1 * a2) * (1.0 - spec.k12)
        zero = np.zeros(np.broadcast(T, n1, n2).shape)
        return _MixDerivs(
            B=n1 * b1 + n2 * b2,
            B1=b1 + zero,
            B2=b2 + zero,
            B11=zero,
            B12=zero,
            B22=zero,
            Dg=n1 * n1 * a1 + 2.0 * n1 * n2 * a12 + n2 * n2 * a2,
            Dg1=2.0 * (n1 * a1 + n2 * a12),
            Dg2=2.0 * (n1 * a12 + n2 * a2),
            Dg11=2.0 * a1 + zero,
            Dg12=2.0 * a12 + zero,
            Dg22=2.0 * a2 + zero,
        )

    # Wong-Sandler: quadratic mixing of the second-virial-like (b - a/RT),
    # energy constraint at infinite pressure closed by NRTL.  The cross
    # term is the reformulated one (arithmetic covolume, geometric
    # attraction), which is the form the published parameter sets for
    # asymmetric polar pairs were regressed with.
    rt = R * np.asarray(T, dtype=float)
    u11 = b1 - a1 / rt
    u22 = b2 - a2 / rt
    u12 = 0.5 * (b1 + b2) - np.sqrt(a1 * a2) * (1.0 - spec.k12) / rt
    qe = n1 * n1 * u11 + 2.0 * n1 * n2 * u12 + n2 * n2 * u22
    q1 = 2.0 * (n1 * u11 + n2 * u12)
    q2 = 2.0 * (n1 * u12 + n2 * u22)

    nge, lng1, lng2, dlng1, dlng2 = _nrtl_extensive(spec.nrtl, T, n1, n2)
    n = n1 + n2
    x1 = n1 / n
    x2 = n2 / n
    dp1 = a1 / (b1 * rt)
    dp2 = a2 / (b2 * rt)
    de = n1 * dp1 + n2 * dp2 + nge / WS_C
    d1 = dp1 + lng1 / WS_C
    d2 = dp2 + lng2 / WS_C
    # Second derivatives of the extensive excess term; the two mixed routes
    # are averaged (they agree up to roundoff by Gibbs-Duhem).
    d11 = dlng1 * (x2 / n) / WS_C
    d22 = dlng2 * (-x1 / n) / WS_C
    d12 = 0.5 * (dlng1 * (-x1 / n) + dlng2 * (x2 / n)) / WS_C

    m = n - de
    m1 = 1.0 - d1
    m2 = 1.0 - d2
    B = qe / m
    B1 = (q1 - B * m1) / m
    B2 = (q2 - B * m2) / m
    B11 = (2.0 * u11 - 2.0 * B1 * m1 + B * d11) / m
    B22 = (2.0 * u22 - 2.0 * B2 * m2 + B * d22) / m
    B12 = (2.0 * u12 - B1 * m2 - B2 * m1 + B * d12) / m

    dg = rt * B * de
    return _MixDerivs(
        B=B,
        B1=B1,
        B2=B2,
        B11=B11,
        B12=B12,
        B22=B22,
        Dg=dg,
        Dg1=rt * (B1 * de + B * d1),
        Dg2=rt * (B2 * de + B * d2),
        Dg11=rt * (B11 * de + 2.0 * B1 * d1 + B * d11),
        Dg12=rt * (B12 * de + B1 * d2 + B2 * d1 + B * d12),
        Dg22=rt * (B22 * de + 2.0 * B2 * d2 + B * d22),
    )


def residual_helmholtz_over_rt(spec: MixtureSpec, T, V, n1, n2):
    """A_res / RT relative to the ideal gas at the same (T, V, n)."""
    mx = _mixing(spec, T, n1, n2)
    n = n1 + n2
    g = np.log((V - mx.B) / V)
    lterm = np.log((V + EOS_C1 * mx.B) / (V + EOS_C2 * mx.B)) / (2.0 * SQRT2 * mx.B)
    return -n * g - mx.Dg * lterm / (R * T)


def _pressure_pa(spec: MixtureSpec, T, V, n1, n2):
    mx = _mixing(spec, T, n1, n2)
    n = n1 + n2
    return n * R * T / (V - mx.B) - mx.Dg / (V * V + 2.0 * mx.B * V - mx.B * mx.B)


def _lnf(spec: MixtureSpec, T, V, n1, n2):
    """Log-fugacities of both components, closed form."""
    mx = _mixing(spec, T, n1, n2)
    n = n1 + n2
    rt = R * T
    vmb = V - mx.B
    g = np.log(vmb / V)
    e1 = 1.0 / vmb
    lterm = np.log((V + EOS_C1 * mx.B) / (V + EOS_C2 * mx.B)) / (2.0 * SQRT2 * mx.B)
    w = V * V + 2.0 * mx.B * V - mx.B * mx.B
    lterm_b = -lterm / mx.B + V / (mx.B * w)
    lnf1 = np.log(n1 * rt / V) - g + n * mx.B1 * e1 - (mx.Dg1 * lterm + mx.Dg * lterm_b * mx.B1) / rt
    lnf2 = np.log(n2 * rt / V) - g + n * mx.B2 * e1 - (mx.Dg2 * lterm + mx.Dg * lterm_b * mx.B2) / rt
    return lnf1, lnf2


def _q_entries(spec: MixtureSpec, T, V, n1, n2):
    """Independent entries (q11, q12, q22) of the compositional derivative
    matrix q_ij = d ln f_i / d n_j at fixed (T, V).

    Assembled from analytic second derivatives of the residual Helmholtz
    energy, so the matrix is symmetric by construction and exact to
    rounding.  Accepts complex mole numbers.
    """
    mx = _mixing(spec, T, n1, n2)
    n = n1 + n2
    rt = R * T
    vmb = V - mx.B
    e1 = 1.0 / vmb
    lterm = np.log((V + EOS_C1 * mx.B) / (V + EOS_C2 * mx.B)) / (2.0 * SQRT2 * mx.B)
    w = V * V + 2.0 * mx.B * V - mx.B * mx.B
    lterm_b = -lterm / mx.B + V / (mx.B * w)
    lterm_bb = -lterm_b / mx.B + lterm / mx.B ** 2 - V * (w + 2.0 * mx.B * (V - mx.B)) / (mx.B * w) ** 2

    def entry(delta, ni, Bi, Bj, Bij, Dgi, Dgj, Dgij):
        return (
            delta / ni
            + (Bi + Bj) * e1
            + n * (Bij * e1 + Bi * Bj * e1 * e1)
            - (Dgij * lterm + (Dgi * Bj + Dgj * Bi) * lterm_b + mx.Dg * (lterm_bb * Bi * Bj + lterm_b * Bij)) / rt
        )

    q11 = entry(1.0, n1, mx.B1, mx.B1, mx.B11, mx.Dg1, mx.Dg1, mx.Dg11)
    q22 = entry(1.0, n2, mx.B2, mx.B2, mx.B22, mx.Dg2, mx.Dg2, mx.Dg22)
    q12 = entry(0.0, 1.0, mx.B1, mx.B2, mx.B12, mx.Dg1, mx.Dg2, mx.Dg12)
    return q11, q12, q22


class TensorEntries(NamedTuple):
    """The four independent entries of the fully symmetric rank-3 tensor
    d2 ln f_i / dn_j dn_k (indices as multisets {111}, {112}, {122}, {222})."""

    t111: object
    t112: object
    t122: object
    t222: object


def _tensor_entries(spec: MixtureSpec, T, V, n1, n2) -> TensorEntries:
    """Third mole-number derivatives by complex step on the closed-form q.

    The two redundant routes to each mixed entry are averaged; they agree
    to machine precision because q is exact.
    """
    h = CSTEP
    qa = _q_entries(spec, T, V, n1 + 1j * h, n2)  # d q / d n1
    qb = _q_entries(spec, T, V, n1, n2 + 1j * h)  # d q / d n2
    t111 = np.imag(qa[0]) / h
    t222 = np.imag(qb[2]) / h
    t112 = 0.5 * (np.imag(qa[1]) + np.imag(qb[0])) / h
    t122 = 0.5 * (np.imag(qb[1]) + np.imag(qa[2])) / h
    return TensorEntries(t111, t112, t122, t222)


def covolume(spec: MixtureSpec, T, n) -> float:
    """Extensive covolume B(T, n) in m3 (equals b_m on the n-total-1 basis)."""
    mx = _mixing(spec, T, n[0], n[1])
    return float(np.real(mx.B))


# ---------------------------------------------------------------------------
# Public state-based operations
# ---------------------------------------------------------------------------

def _check_volume(spec: MixtureSpec, state: EosState):
    b = covolume(spec, state.T, state.n)
    if state.V <= b:
        raise VolumeBelowCovolume(f"V = {state.V:.6e} m3/mol is not above the covolume b = {b:.6e} m3/mol")


def mixture_params(spec: MixtureSpec, T: float, n) -> MixtureParams:
    """Intensive mixed parameters a_m (Pa m6/mol2) and b_m (m3/mol)."""
    if min(n) <= 0.0:
        raise ValueError("mole numbers must be positive")
    mx = _mixing(spec, T, n[0], n[1])
    ntot = n[0] + n[1]
    return MixtureParams(a_m=float(np.real(mx.Dg)) / ntot ** 2, b_m=float(np.real(mx.B)) / ntot)


def pressure(spec: MixtureSpec, state: EosState) -> float:
    """Pressure in kPa at the given state."""
    _check_volume(spec, state)
    return float(_pressure_pa(spec, state.T, state.V, state.n[0], state.n[1])) / 1e3


def ln_fugacity(spec: MixtureSpec, state: EosState) -> tuple[float, float]:
    """ln of the component fugacities (fugacities in Pa)."""
    _check_volume(spec, state)
    lnf1, lnf2 = _lnf(spec, state.T, state.V, state.n[0], state.n[1])
    return float(lnf1), float(lnf2)


def fugacity_n_derivatives(spec: MixtureSpec, state: EosState) -> np.ndarray:
    """The 2x2 matrix q_ij = d ln f_i / d n_j at fixed (T, V), in 1/mol."""
    _check_volume(spec, state)
    q11, q12, q22 = _q_entries(spec, state.T, state.V, state.n[0], state.n[1])
    return np.array([[float(q11), float(q12)], [float(q12), float(q22)]])


def fugacity_n2_derivatives(spec: MixtureSpec, state: EosState) -> np.ndarray:
    """The fully symmetric 2x2x2 tensor d2 ln f_i / dn_j dn_k, in 1/mol2."""
    _check_volume(spec, state)
    te = _tensor_entries(spec, state.T, state.V, state.n[0], state.n[1])
    t = np.empty((2, 2, 2))
    t[0, 0, 0] = te.t111
    t[1, 1, 1] = te.t222
    t[0, 0, 1] = t[0, 1, 0] = t[1, 0, 0] = te.t112
    t[0, 1, 1] = t[1, 0, 1] = t[1, 1, 0] = te.t122
    return t


# ---------------------------------------------------------------------------
# Finite-difference variants, kept as independent cross-checks
# ---------------------------------------------------------------------------

def default_fd_step(n) -> float:
    return 1e-5 * (n[0] + n[1])


def fugacity_n_derivatives_fd(spec: MixtureSpec, state: EosState, h: float | None = None) -> np.ndarray:
    """q_ij by central differences of ln_fugacity, symmetrized."""
    _check_volume(spec, state)
    if h is None:
        h = default_fd_step(state.n)
    if min(state.n) <= h:
        raise DerivativeStepUnderflow(f"mole numbers {state.n} too small for step {h:g}")
    n1, n2 = state.n
    T, V = state.T, state.V
    q = np.empty((2, 2))
    for j, (d1, d2) in enumerate([(h, 0.0), (0.0, h)]):
        fp = _lnf(spec, T, V, n1 + d1, n2 + d2)
        fm = _lnf(spec, T, V, n1 - d1, n2 - d2)
        q[0, j] = (fp[0] - fm[0]) / (2.0 * h)
        q[1, j] = (fp[1] - fm[1]) / (2.0 * h)
    return 0.5 * (q + q.T)


def fugacity_n2_derivatives_fd(spec: MixtureSpec, state: EosState, h: float | None = None) -> np.ndarray:
    """Rank-3 tensor by second central differences of ln_fugacity,
    averaged over index permutations."""
    _check_volume(spec, state)
    if h is None:
        h = default_fd_step(state.n)
    if min(state.n) <= 2.0 * h:
        raise DerivativeStepUnderflow(f"mole numbers {state.n} too small for step {h:g}")
    n1, n2 = state.n
    T, V = state.T, state.V

    def lnf_at(d1, d2):
        return np.array(_lnf(spec, T, V, n1 + d1, n2 + d2))

    f0 = lnf_at(0.0, 0.0)
    t = np.empty((2, 2, 2))
    # pure second differences in each mole number
    for j, (d1, d2) in enumerate([(h, 0.0), (0.0, h)]):
        second = (lnf_at(d1, d2) - 2.0 * f0 + lnf_at(-d1, -d2)) / h ** 2
        t[:, j, j] = second
    # mixed difference
    mixed = (lnf_at(h, h) - lnf_at(h, -h) - lnf_at(-h, h) + lnf_at(-h, -h)) / (4.0 * h ** 2)
    t[:, 0, 1] = mixed
    t[:, 1, 0] = mixed
    sym = np.zeros_like(t)
    for perm in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]:
        sym += np.transpose(t, perm)
    return sym / 6.0
