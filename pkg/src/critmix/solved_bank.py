"""The bank of solved points that seeds the inversion homotopy.

Bank entries are converged solutions of F(p) = q for a ring of nonzero
targets around the origin, started from the grid-bracketed points of the
critical set.  A bank built for one composition can be re-tagged for
another mixture of the same component pair and model stack, which is what
makes composition sweeps cheap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .critical_system import CriticalContext, DomainPoint, ImagePoint, eval_F_u
from .errors import EmptyBank, ModelMismatch
from .mixture_model import Component, MixingRule, MixtureSpec, NrtlParams
from .newton import NewtonOptions, newton_batch

NEWTON_TOL = 1e-10  # certificate: |F(p) - q| <= NEWTON_TOL in scaled units


@dataclass(frozen=True)
class SolvedPoint:
    V: float
    T: float
    F1: float  # achieved image, scaled
    F2: float
    source_label: str

    @property
    def p(self) -> DomainPoint:
        return DomainPoint(V=self.V, T=self.T)

    @property
    def q(self) -> ImagePoint:
        return ImagePoint(F1=self.F1, F2=self.F2)


@dataclass(frozen=True)
class Bank:
    entries: tuple[SolvedPoint, ...]
    provenance: dict


@dataclass(frozen=True)
class BankParams:
    ring_radius: float = 0.05   # inner ring radius in scaled image units
    outer_factor: float = 4.0
    n_angles: int = 8
    max_iter: int = 60
    merge_radius: float = 1e-4  # domain dedup radius in u
    max_seeds: int | None = None


def default_ring_targets(params: BankParams = BankParams()) -> list[ImagePoint]:
    """Two rings of targets surrounding the origin."""
    out = []
    for r in (params.ring_radius, params.ring_radius * params.outer_factor):
        for k in range(params.n_angles):
            th = 2.0 * np.pi * k / params.n_angles
            out.append(ImagePoint(F1=r * np.cos(th), F2=r * np.sin(th)))
    return out


def _model_dict(spec: MixtureSpec) -> dict:
    comps = [
        {"name": c.name, "Tc": c.Tc, "Pc": c.Pc, "omega": c.omega, "kappa1": c.kappa1}
        for c in spec.components
    ]
    nrtl = None
    if spec.nrtl is not None:
        nrtl = {"alpha": spec.nrtl.alpha, "g12_over_R": spec.nrtl.g12_over_R,
                "g21_over_R": spec.nrtl.g21_over_R}
    return {"components": comps, "k12": spec.k12,
            "mixing_rule": spec.mixing_rule.value, "nrtl": nrtl}


def _spec_from_model(model: dict, z) -> MixtureSpec:
    comps = tuple(Component(name=c["name"], Tc=c["Tc"], Pc=c["Pc"], omega=c["omega"],
                            kappa1=c.get("kappa1")) for c in model["components"])
    nrtl = None
    if model.get("nrtl") is not None:
        n = model["nrtl"]
        nrtl = NrtlParams(alpha=n["alpha"], g12_over_R=n["g12_over_R"],
                          g21_over_R=n["g21_over_R"])
    return MixtureSpec(components=comps, z=tuple(z), k12=model["k12"],
                       mixing_rule=MixingRule(model["mixing_rule"]), nrtl=nrtl)


def build_bank(ctx: CriticalContext, domain_seeds: list[DomainPoint],
               target_qs: list[ImagePoint], params: BankParams = BankParams()) -> Bank:
    """Damped Newton on F(p) = q over the (seed, target) cross product.

    Non-convergent pairs are dropped and counted; converged points are
    deduplicated within the domain merge radius, first hit wins.
    """
    if not domain_seeds:
        raise EmptyBank("no domain seeds supplied")
    for q in target_qs:
        if q.F1 == 0.0 and q.F2 == 0.0:
            raise ValueError("bank targets must be nonzero; (0,0) is the inversion target")
    for p in domain_seeds:
        if not ctx.box.contains(p.V, p.T, margin=0.01):
            raise ValueError(f"seed (V={p.V:.4e}, T={p.T:.2f}) outside the domain box")
    seeds = domain_seeds
    if params.max_seeds is not None and len(seeds) > params.max_seeds:
        idx = np.linspace(0, len(seeds) - 1, params.max_seeds).round().astype(int)
        seeds = [seeds[i] for i in idx]

    su = np.array([[p.V / ctx.scaling.V_ref, p.T / ctx.scaling.T_ref] for p in seeds])
    tq = np.array([[q.F1, q.F2] for q in target_qs])
    u0 = np.repeat(su, len(target_qs), axis=0)
    qt = np.tile(tq, (len(seeds), 1))

    opts = NewtonOptions(tol_sq=(0.5 * NEWTON_TOL) ** 2, max_iter=params.max_iter)
    u, res_sq, conv, _ = newton_batch(ctx, u0, qt, opts)

    entries: list[SolvedPoint] = []
    kept_u: list[np.ndarray] = []
    for k in np.nonzero(conv)[0]:
        uk = u[k]
        if not ctx.box.contains(uk[0] * ctx.scaling.V_ref, uk[1] * ctx.scaling.T_ref, margin=0.25):
            continue
        if any(np.linalg.norm(uk - w) < params.merge_radius for w in kept_u):
            continue
        # store q evaluated from the round-tripped coordinates so a later
        # re-evaluation from (V, T) reproduces it exactly
        V = float(uk[0]) * ctx.scaling.V_ref
        T = float(uk[1]) * ctx.scaling.T_ref
        f = eval_F_u(ctx, np.array([V / ctx.scaling.V_ref, T / ctx.scaling.T_ref]))
        si, ti = divmod(int(k), len(target_qs))
        entries.append(SolvedPoint(V=V, T=T, F1=float(f[0]), F2=float(f[1]),
                                   source_label=f"seed{si:03d}_t{ti:02d}"))
        kept_u.append(uk)

    if not entries:
        raise EmptyBank(f"no (seed, target) pair converged out of {len(u0)}")

    prov = {
        "model": _model_dict(ctx.spec),
        "composition": list(ctx.n0),
        "box": [ctx.box.V_min, ctx.box.V_max, ctx.box.T_min, ctx.box.T_max],
        "scaling": [ctx.scaling.V_ref, ctx.scaling.T_ref, ctx.scaling.F1_ref, ctx.scaling.F2_ref],
        "params": {"ring_radius": params.ring_radius, "outer_factor": params.outer_factor,
                   "n_angles": params.n_angles, "merge_radius": params.merge_radius},
        "n_attempted": int(len(u0)),
        "n_converged": int(np.sum(conv)),
        "reused_from": None,
    }
    return Bank(entries=tuple(entries), provenance=prov)


def nearest(bank: Bank, q_target: ImagePoint, k: int = 1) -> list[SolvedPoint]:
    """k entries closest to q_target in the scaled image plane.

    Stable sort: ties keep bank insertion order.
    """
    if not bank.entries:
        raise EmptyBank("bank has no entries")
    d = np.array([np.hypot(e.F1 - q_target.F1, e.F2 - q_target.F2) for e in bank.entries])
    order = np.argsort(d, kind="stable")[:k]
    return [bank.entries[i] for i in order]


def reuse_bank(bank: Bank, new_ctx: CriticalContext) -> Bank:
    """Re-tag a bank for a new composition of the same pair and model stack.

    Each entry keeps its domain point and gets q = F_new(p); entries whose
    residuals are undefined under the new context are dropped.
    """
    old_spec = _spec_from_model(bank.provenance["model"], bank.provenance["composition"])
    if old_spec.model_signature() != new_ctx.spec.model_signature():
        raise ModelMismatch("bank was built for a different component pair or model stack")

    entries = []
    dropped = 0
    for e in bank.entries:
        # single-point evaluation, matching the shape used at build time,
        # so an identical context reproduces the stored image exactly
        fi = eval_F_u(new_ctx, np.array([e.V / new_ctx.scaling.V_ref,
                                         e.T / new_ctx.scaling.T_ref]))
        if not np.all(np.isfinite(fi)):
            dropped += 1
            continue
        entries.append(SolvedPoint(V=e.V, T=e.T, F1=float(fi[0]), F2=float(fi[1]),
                                   source_label=e.source_label))
    if not entries:
        raise EmptyBank("no bank entry survived retagging under the new context")
    prov = dict(bank.provenance)
    prov["reused_from"] = bank.provenance["composition"]
    prov["composition"] = list(new_ctx.n0)
    prov["scaling"] = [new_ctx.scaling.V_ref, new_ctx.scaling.T_ref,
                       new_ctx.scaling.F1_ref, new_ctx.scaling.F2_ref]
    prov["n_dropped_on_reuse"] = dropped
    return Bank(entries=tuple(entries), provenance=prov)


# ---------------------------------------------------------------------------
# Persistence (stable key order for diffability)
# ---------------------------------------------------------------------------

def bank_to_dict(bank: Bank) -> dict:
    return {
        "provenance": bank.provenance,
        "entries": [
            {"V": e.V, "T": e.T, "F1": e.F1, "F2": e.F2, "source_label": e.source_label}
            for e in bank.entries
        ],
    }


def bank_from_dict(d: dict) -> Bank:
    entries = tuple(SolvedPoint(V=e["V"], T=e["T"], F1=e["F1"], F2=e["F2"],
                                source_label=e["source_label"]) for e in d["entries"])
    if not entries:
        raise EmptyBank("bank file contains no entries")
    return Bank(entries=entries, provenance=d["provenance"])


def save_bank(bank: Bank, path) -> None:
    Path(path).write_text(json.dumps(bank_to_dict(bank), indent=2, sort_keys=True) + "\n")


def load_bank(path) -> Bank:
    p = Path(path)
    if not p.exists():
        raise EmptyBank(f"bank file not found: {p}")
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise EmptyBank(f"bank file unreadable: {exc}") from exc
    if not d.get("entries"):
        raise EmptyBank(f"bank file has no entries: {p}")
    return bank_from_dict(d)


def spec_of_bank(bank: Bank) -> MixtureSpec:
    return _spec_from_model(bank.provenance["model"], bank.provenance["composition"])
