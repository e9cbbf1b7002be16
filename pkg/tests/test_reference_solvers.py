import numpy as np
import pytest

from critmix.critical_system import DomainPoint, eval_F_u
from critmix.errors import InnerDivergence, NoConvergence, OuterDivergence
from critmix.reference_solvers import DoubleLoopParams, hk_double_loop, newton_2x2


def test_double_loop_fixed_point(pipeline_ethane_methane, ctx_ethane_methane):
    # seeded exactly at a converged inversion result
    root = pipeline_ethane_methane["results"][0]
    r = hk_double_loop(ctx_ethane_methane,
                       DoubleLoopParams(initial=DomainPoint(V=root.V, T=root.T)))
    assert r.T == pytest.approx(root.T, rel=1e-8)
    assert r.V == pytest.approx(root.V, rel=1e-8)


def test_double_loop_satisfies_combined_rule(pipeline_methane_h2s, ctx_methane_h2s):
    ctx = ctx_methane_h2s
    for root in pipeline_methane_h2s["results"]:
        r = hk_double_loop(ctx, DoubleLoopParams(initial=DomainPoint(V=root.V, T=root.T)))
        f = eval_F_u(ctx, np.array([r.V / ctx.scaling.V_ref, r.T / ctx.scaling.T_ref]))
        assert float(f[0] ** 2 + f[1] ** 2) < 1e-12


def test_double_loop_agrees_with_inversion_both_roots(pipeline_methane_h2s,
                                                      ctx_methane_h2s):
    for root in pipeline_methane_h2s["results"]:
        r = hk_double_loop(ctx_methane_h2s,
                           DoubleLoopParams(initial=DomainPoint(V=root.V * 1.01,
                                                                T=root.T + 0.5)))
        assert r.T == pytest.approx(root.T, rel=1e-6)
        assert r.V == pytest.approx(root.V, rel=1e-6)


def test_double_loop_swap_flag(pipeline_ethane_methane, ctx_ethane_methane):
    root = pipeline_ethane_methane["results"][0]
    r = hk_double_loop(ctx_ethane_methane,
                       DoubleLoopParams(initial=DomainPoint(V=root.V, T=root.T),
                                        swap_loops=True))
    assert r.T == pytest.approx(root.T, rel=1e-6)


def test_double_loop_reports_iteration_counts_on_failure(ctx_ethane_methane):
    params = DoubleLoopParams(initial=DomainPoint(V=1.6e-4, T=300.0),
                              inner_tol=1e-16, max_inner=2)
    with pytest.raises((InnerDivergence, OuterDivergence)) as exc:
        hk_double_loop(ctx_ethane_methane, params)
    assert "2 iterations" in str(exc.value) or "iterations" in str(exc.value)


def test_newton_from_converged_root_is_immediate(pipeline_ethane_methane,
                                                 ctx_ethane_methane):
    root = pipeline_ethane_methane["results"][0]
    r = newton_2x2(ctx_ethane_methane, DomainPoint(V=root.V, T=root.T))
    assert r.T == pytest.approx(root.T, rel=1e-10)


def test_newton_matches_double_loop_from_same_neighborhood(ctx_ethane_methane):
    seed = DomainPoint(V=1.7e-4, T=302.0)
    rn = newton_2x2(ctx_ethane_methane, seed)
    rh = hk_double_loop(ctx_ethane_methane, DoubleLoopParams(initial=seed))
    # agreement bounded by the double loop's scalar tolerances
    assert rn.T == pytest.approx(rh.T, rel=1e-6)
    assert rn.V == pytest.approx(rh.V, rel=1e-6)
    assert rn.P == pytest.approx(rh.P, rel=1e-5)


def test_newton_divergence_is_reported_not_fatal(ctx_ethane_methane):
    # a start across the critical curve falls into a dead basin
    outcomes = {}
    for seed in (DomainPoint(V=2.0e-4, T=310.0), DomainPoint(V=1.7e-4, T=302.0)):
        try:
            r = newton_2x2(ctx_ethane_methane, seed)
            outcomes[(seed.V, seed.T)] = f"converged @ {r.T:.3f}"
        except NoConvergence as exc:
            outcomes[(seed.V, seed.T)] = f"diverged: {exc}"
    assert any(v.startswith("converged") for v in outcomes.values())
    assert any(v.startswith("diverged") for v in outcomes.values())


def test_solvers_share_residual_definitions(pipeline_methane_h2s, ctx_methane_h2s):
    # raw residuals reported by both solvers refer to the same evaluation
    root = pipeline_methane_h2s["results"][0]
    rh = hk_double_loop(ctx_methane_h2s,
                        DoubleLoopParams(initial=DomainPoint(V=root.V, T=root.T)))
    rn = newton_2x2(ctx_methane_h2s, DomainPoint(V=rh.V, T=rh.T))
    assert rn.residuals[0] == pytest.approx(rh.residuals[0], abs=1e-8)
    assert rn.residuals[1] == pytest.approx(rh.residuals[1], abs=1e-7)
