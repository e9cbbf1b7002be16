"""critmix: critical points of binary mixtures by plane-map inversion.

The criticality conditions of a binary mixture reduce to a map
F(V, T) = (det Q, cubic form) from the plane to the plane whose
pre-images of the origin are the thermodynamic critical points.  This
package locates the map's mathematical critical curves, builds a bank of
solved points around the origin, and follows Euler-Newton homotopy paths
to every reachable pre-image, with a classical double-loop solver as an
independent cross-check.
"""

from . import errors
from .critical_set import CriticalCurve, CurveParams, Grid, SignGrid, bracket_roots, \
    critical_image, sign_grid, trace_all_curves, trace_critical_curve
from .critical_system import (CriticalContext, DomainBox, DomainPoint, ImagePoint,
                              Stability, F, F_raw, cubic_form, delta_n, jacobian_F,
                              q_matrix, stability_flag)
from .inversion import (CriticalPointResult, InversionParams, PathOutcome, PathTrace,
                        follow_path, invert_origin, invert_origin_report, l_path)
from .mixture_model import (Component, EosState, MixingRule, MixtureSpec, NrtlParams,
                            alpha_function, fugacity_n_derivatives,
                            fugacity_n2_derivatives, ln_fugacity, mixture_params,
                            pressure)
from .reference_solvers import DoubleLoopParams, hk_double_loop, newton_2x2
from .solved_bank import (Bank, BankParams, SolvedPoint, build_bank,
                          default_ring_targets, load_bank, nearest, reuse_bank,
                          save_bank)

__version__ = "0.1.0"

__all__ = [
    "Bank", "BankParams", "Component", "CriticalContext", "CriticalCurve",
    "CriticalPointResult", "CurveParams", "DomainBox", "DomainPoint",
    "DoubleLoopParams", "EosState", "F", "F_raw", "Grid", "ImagePoint",
    "InversionParams", "MixingRule", "MixtureSpec", "NrtlParams", "PathOutcome",
    "PathTrace", "SignGrid", "SolvedPoint", "Stability", "alpha_function",
    "bracket_roots", "build_bank", "critical_image", "cubic_form",
    "default_ring_targets", "delta_n", "errors", "follow_path",
    "fugacity_n_derivatives", "fugacity_n2_derivatives", "hk_double_loop",
    "invert_origin", "invert_origin_report", "jacobian_F", "l_path",
    "ln_fugacity", "load_bank", "mixture_params", "nearest", "newton_2x2",
    "pressure", "q_matrix", "reuse_bank", "save_bank", "sign_grid",
    "stability_flag", "trace_all_curves", "trace_critical_curve",
]
