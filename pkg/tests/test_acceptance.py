"""Acceptance suite: runs every registered experiment at its default scale.

Each criterion gets one PASS/FAIL line in the terminal summary.  The
nonlinear experiment dominates the runtime (a few minutes on one core).
"""

import numpy as np
import pytest

from kpburgers.evolution import SolveConfig, nonlinear_evolve
from kpburgers.experiments import ALL_CRITERIA, REGISTRY, default_config, run_experiment
from kpburgers.initial_data import GaussianBump
from kpburgers.kernels import ModelParams
from kpburgers.spectral import make_grid

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def rows(tmp_path_factory):
    mp = pytest.MonkeyPatch()
    mp.setenv("KPB_OUTPUT_ROOT", str(tmp_path_factory.mktemp("acceptance")))
    try:
        reports = [run_experiment(default_config(name)) for name in REGISTRY]
    finally:
        mp.undo()
    return {r.criterion: r for rep in reports for r in rep.rows}


def test_registry_covers_all_criteria():
    covered = {c for exp in REGISTRY.values() for c in exp.criteria}
    assert covered == set(ALL_CRITERIA)


@pytest.mark.parametrize("criterion", ALL_CRITERIA)
def test_criterion(rows, criterion, acceptance_log):
    row = rows[criterion]
    acceptance_log.append(row.line())
    assert row.passed, row.line()


def test_dt_halving_changes_final_sup_below_1e6(acceptance_log):
    # acceptance grid and data, ETDRK4 at dt 0.1 and 0.05 up to t = 8
    g = make_grid(256, 384, 80.0, 120.0)
    b = GaussianBump(0.05)
    u0 = b.sample(g)
    sups = []
    for dt in (0.1, 0.05):
        cfg = SolveConfig(dt=dt, T=8.0, snapshot_stride=10**6, scheme="ETDRK4",
                          background="free", boundary_tol=None, record_flux=False)
        traj = nonlinear_evolve(u0, ModelParams(), cfg, free_background=b)
        sups.append(np.abs(traj.u_snapshots[-1].values).max())
    rel = abs(sups[0] - sups[1]) / sups[1]
    ok = rel < 1e-6
    acceptance_log.append(f"  dt {'PASS' if ok else 'FAIL'}  target halving dt changes final sup by < 1e-6; "
                          f"measured {rel:.2e}")
    assert ok
