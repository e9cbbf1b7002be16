import numpy as np
import pytest

from critmix.critical_system import CriticalContext
from critmix.critical_set import Grid, bracket_roots, sign_grid
from critmix.inversion import invert_origin_report
from critmix.presets import (DEFAULT_BOXES, cyclohexane_co2, ethane_methane,
                             methane_ethanol, methane_h2s)
from critmix.solved_bank import build_bank, default_ring_targets


def make_context(name, spec=None):
    box = DEFAULT_BOXES[name]
    if spec is None:
        spec = {
            "ethane_methane": ethane_methane,
            "methane_h2s": methane_h2s,
            "methane_ethanol": methane_ethanol,
            "cyclohexane_co2": cyclohexane_co2,
        }[name]()
    return CriticalContext.create(spec, box)


@pytest.fixture(scope="session")
def ctx_ethane_methane():
    return make_context("ethane_methane")


@pytest.fixture(scope="session")
def ctx_methane_h2s():
    return make_context("methane_h2s")


@pytest.fixture(scope="session")
def ctx_methane_ethanol():
    return make_context("methane_ethanol")


@pytest.fixture(scope="session")
def ctx_cyclohexane_co2():
    return make_context("cyclohexane_co2")


def run_pipeline(ctx, nv=201, nt=201):
    """Grid scan -> seeds -> bank -> inversion, as the CLI wires it."""
    grid = Grid(V_min=ctx.box.V_min, V_max=ctx.box.V_max,
                T_min=ctx.box.T_min, T_max=ctx.box.T_max, nV=nv, nT=nt)
    sg = sign_grid(ctx, grid)
    seeds = bracket_roots(ctx, sg)
    bank = build_bank(ctx, seeds, default_ring_targets())
    results, traces = invert_origin_report(ctx, bank)
    return {"grid": grid, "sign_grid": sg, "seeds": seeds, "bank": bank,
            "results": results, "traces": traces}


@pytest.fixture(scope="session")
def pipeline_ethane_methane(ctx_ethane_methane):
    return run_pipeline(ctx_ethane_methane)


@pytest.fixture(scope="session")
def pipeline_methane_h2s(ctx_methane_h2s):
    return run_pipeline(ctx_methane_h2s)


@pytest.fixture(scope="session")
def pipeline_methane_ethanol(ctx_methane_ethanol):
    return run_pipeline(ctx_methane_ethanol)


@pytest.fixture(scope="session")
def pipeline_cyclohexane_co2(ctx_cyclohexane_co2):
    return run_pipeline(ctx_cyclohexane_co2)


def random_valid_states(spec, n, seed=0):
    """Seeded (T, V, n1, n2) samples with V safely above the covolume."""
    from critmix.mixture_model import _lnf, _mixing

    rng = np.random.RandomState(seed)
    tcs = [c.Tc for c in spec.components]
    out = []
    while len(out) < n:
        T = rng.uniform(0.6 * min(tcs), 2.0 * max(tcs))
        n1 = rng.uniform(0.05, 0.95)
        n2 = 1.0 - n1
        b = float(np.real(_mixing(spec, T, n1, n2).B))
        if not np.isfinite(b) or b <= 0:
            continue
        V = b * rng.uniform(1.3, 60.0)
        lnf = _lnf(spec, T, V, n1, n2)
        if all(np.isfinite(v) for v in lnf):
            out.append((T, V, n1, n2))
    return out
