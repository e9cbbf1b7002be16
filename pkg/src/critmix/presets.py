"""Bundled mixture definitions used by the example configs and tests.

Pure-component constants follow the tabulated values the worked examples
were defined with (Pc in kPa).  Stryjek-Vera kappa1 values are attached
only where that alpha variant is part of the model stack.
"""

from __future__ import annotations

from .critical_system import DomainBox
from .mixture_model import Component, MixingRule, MixtureSpec, NrtlParams

ETHANE = Component("ethane", Tc=305.32, Pc=4872.0, omega=0.099)
METHANE = Component("methane", Tc=190.56, Pc=4599.0, omega=0.011)
HYDROGEN_SULFIDE = Component("hydrogen sulfide", Tc=373.10, Pc=9000.0, omega=0.081)
CYCLOHEXANE = Component("cyclohexane", Tc=553.64, Pc=4075.0, omega=0.208)
CARBON_DIOXIDE = Component("carbon dioxide", Tc=304.21, Pc=7382.0, omega=0.225)
METHANE_SV = Component("methane", Tc=190.56, Pc=4599.0, omega=0.011, kappa1=-0.00159)
ETHANOL_SV = Component("ethanol", Tc=513.92, Pc=6148.0, omega=0.644, kappa1=-0.03374)

METHANE_ETHANOL_NRTL = NrtlParams(alpha=0.9, g12_over_R=165.8, g21_over_R=238.4)


def ethane_methane(z_ethane: float = 0.90) -> MixtureSpec:
    return MixtureSpec(components=(ETHANE, METHANE), z=(z_ethane, 1.0 - z_ethane), k12=0.0026)


def methane_h2s(z_methane: float = 0.51) -> MixtureSpec:
    return MixtureSpec(components=(METHANE, HYDROGEN_SULFIDE),
                       z=(z_methane, 1.0 - z_methane), k12=0.08)


def methane_ethanol(z_methane: float = 0.20) -> MixtureSpec:
    return MixtureSpec(components=(METHANE_SV, ETHANOL_SV),
                       z=(z_methane, 1.0 - z_methane), k12=0.0,
                       mixing_rule=MixingRule.WONG_SANDLER, nrtl=METHANE_ETHANOL_NRTL)


def cyclohexane_co2(z_cyclohexane: float = 0.60) -> MixtureSpec:
    return MixtureSpec(components=(CYCLOHEXANE, CARBON_DIOXIDE),
                       z=(z_cyclohexane, 1.0 - z_cyclohexane), k12=0.0627)


DEFAULT_BOXES = {
    "ethane_methane": DomainBox(V_min=5.0e-5, V_max=5.0e-4, T_min=150.0, T_max=350.0),
    "methane_h2s": DomainBox(V_min=3.0e-5, V_max=4.0e-4, T_min=160.0, T_max=400.0),
    "methane_ethanol": DomainBox(V_min=6.0e-5, V_max=5.0e-4, T_min=350.0, T_max=600.0),
    "cyclohexane_co2": DomainBox(V_min=8.0e-5, V_max=8.0e-4, T_min=280.0, T_max=650.0),
}
