"""Run configuration files: strict parsing and preset resolution.

A config is one self-contained JSON document carrying the component
constants, composition, model stack, domain box, and optional overrides
for the grid, bank, and inversion parameters.  Unknown keys are rejected
so typos fail loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .critical_system import DomainBox, DomainPoint
from .critical_set import CurveParams, Grid
from .errors import ConfigInvalid
from .inversion import InversionParams
from .mixture_model import Component, MixingRule, MixtureSpec, NrtlParams
from .solved_bank import BankParams

_COMPONENT_KEYS = {"name", "Tc_K", "Pc_kPa", "omega", "kappa1"}
_NRTL_KEYS = {"alpha", "g12_over_R_K", "g21_over_R_K"}
_BOX_KEYS = {"V_min", "V_max", "T_min", "T_max"}
_GRID_KEYS = {"nV", "nT", "log_V"}
_BANK_KEYS = {"ring_radius", "outer_factor", "n_angles", "max_iter", "merge_radius", "max_seeds"}
_INV_KEYS = {"steps_per_leg", "corrector_tol", "intermediate_tol", "max_corrector_iter",
             "max_total_iter", "min_step_fraction", "detj_guard", "leg_order",
             "cluster_radius", "dedupe_radius"}
_CURVE_KEYS = {"curve_tol", "step_frac", "max_points", "max_step_growth", "grad_step",
               "max_adapt", "merge_cells"}
_TOP_KEYS = {"name", "components", "z", "k12", "mixing_rule", "nrtl", "box", "grid",
             "bank", "inversion", "curves", "seeds", "sweep"}


@dataclass(frozen=True)
class MixtureConfig:
    name: str
    spec: MixtureSpec
    box: DomainBox
    grid: Grid
    bank_params: BankParams
    inversion_params: InversionParams
    curve_params: CurveParams
    seeds: tuple[DomainPoint, ...] = ()
    sweep_z1: tuple[float, ...] = ()


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigInvalid(f"unknown keys in {where}: {sorted(unknown)}")


def _component(d: dict, idx: int) -> Component:
    _reject_unknown(d, _COMPONENT_KEYS, f"components[{idx}]")
    try:
        return Component(name=str(d["name"]), Tc=float(d["Tc_K"]), Pc=float(d["Pc_kPa"]),
                         omega=float(d["omega"]),
                         kappa1=None if d.get("kappa1") is None else float(d["kappa1"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"components[{idx}]: {exc}") from exc


def parse_config(doc: dict, name_hint: str = "config") -> MixtureConfig:
    if not isinstance(doc, dict):
        raise ConfigInvalid("top level must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "top level")
    try:
        comps = doc["components"]
        if len(comps) != 2:
            raise ConfigInvalid("exactly two components are required")
        components = (_component(comps[0], 0), _component(comps[1], 1))
        z = tuple(float(v) for v in doc["z"])
        if len(z) != 2:
            raise ConfigInvalid("z must have two entries")
        rule = MixingRule(doc.get("mixing_rule", "vdw1"))
        nrtl = None
        if doc.get("nrtl") is not None:
            _reject_unknown(doc["nrtl"], _NRTL_KEYS, "nrtl")
            n = doc["nrtl"]
            nrtl = NrtlParams(alpha=float(n["alpha"]), g12_over_R=float(n["g12_over_R_K"]),
                              g21_over_R=float(n["g21_over_R_K"]))
        spec = MixtureSpec(components=components, z=z, k12=float(doc.get("k12", 0.0)),
                           mixing_rule=rule, nrtl=nrtl)

        b = doc["box"]
        _reject_unknown(b, _BOX_KEYS, "box")
        box = DomainBox(V_min=float(b["V_min"]), V_max=float(b["V_max"]),
                        T_min=float(b["T_min"]), T_max=float(b["T_max"]))

        gd = dict(doc.get("grid", {}))
        _reject_unknown(gd, _GRID_KEYS, "grid")
        grid = Grid(V_min=box.V_min, V_max=box.V_max, T_min=box.T_min, T_max=box.T_max,
                    nV=int(gd.get("nV", 201)), nT=int(gd.get("nT", 201)),
                    log_V=bool(gd.get("log_V", True)))

        bd = dict(doc.get("bank", {}))
        _reject_unknown(bd, _BANK_KEYS, "bank")
        bank_params = BankParams(**{k: (int(v) if k in ("n_angles", "max_iter", "max_seeds")
                                        and v is not None else v) for k, v in bd.items()})

        idd = dict(doc.get("inversion", {}))
        _reject_unknown(idd, _INV_KEYS, "inversion")
        inv_params = InversionParams(**idd)

        cd = dict(doc.get("curves", {}))
        _reject_unknown(cd, _CURVE_KEYS, "curves")
        curve_params = CurveParams(**cd)

        seeds = tuple(DomainPoint(V=float(s["V"]), T=float(s["T"]))
                      for s in doc.get("seeds", []))
        sweep = tuple(float(v) for v in doc.get("sweep", {}).get("z1", [])) if doc.get("sweep") else ()
        if doc.get("sweep"):
            _reject_unknown(doc["sweep"], {"z1"}, "sweep")
    except ConfigInvalid:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"invalid config: {exc}") from exc

    return MixtureConfig(name=str(doc.get("name", name_hint)), spec=spec, box=box, grid=grid,
                         bank_params=bank_params, inversion_params=inv_params,
                         curve_params=curve_params, seeds=seeds, sweep_z1=sweep)


def builtin_config_names() -> list[str]:
    base = resources.files("critmix") / "data"
    return sorted(p.name.removesuffix(".json") for p in base.iterdir() if p.name.endswith(".json"))


def load_config(path_or_name: str) -> MixtureConfig:
    """Load a config from a file path or a bundled preset name."""
    p = Path(path_or_name)
    if p.exists():
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{p}: not valid JSON ({exc})") from exc
        return parse_config(doc, name_hint=p.stem)
    builtin = resources.files("critmix") / "data" / f"{path_or_name}.json"
    if builtin.is_file():
        return parse_config(json.loads(builtin.read_text()), name_hint=path_or_name)
    raise ConfigInvalid(
        f"config not found: {path_or_name!r} is neither a file nor one of the bundled "
        f"configs {builtin_config_names()}")


def config_digest(*paths_or_texts: str) -> str:
    """Stable digest of the run inputs for the report."""
    h = hashlib.sha256()
    for item in paths_or_texts:
        p = Path(item)
        h.update(p.read_bytes() if p.exists() else str(item).encode())
    return h.hexdigest()
