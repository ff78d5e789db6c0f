import csv
import math

import numpy as np
import pytest

from chemoblowup import solver
from chemoblowup.errors import (AbortedRunError, InvalidParameterError, NotRepresentableError,
                                PreconditionError)
from chemoblowup.harness import random_ordered_pairs
from chemoblowup.model import MassState, ModelParams, RadialProfile, make_params
from chemoblowup.solver import (SERIES_COLUMNS, SNAPSHOT_COLUMNS, SimConfig, cell_densities,
                                dominance_experiment, graded_grid, ordering_experiment, run,
                                subsolution_mass_state, write_series, write_snapshots)


def constant_state(N, mu1=1.0, mu2=1.0, gamma=2.0):
    s = graded_grid(1.0, N, gamma)
    return MassState(s, mu1 * s / 3, mu2 * s / 3)


def smooth_state(N):
    s = graded_grid(1.0, N, 2.0)
    U = s / 3 + 0.05 * s * (1 - s)
    return MassState(s, U, U)


def test_graded_grid():
    s = graded_grid(2.0, 8, 2.0)
    assert s[0] == 0 and s[-1] == 2.0
    np.testing.assert_allclose(s, 2.0 * (np.arange(9) / 8) ** 2)


def test_config_validation(p0):
    st = constant_state(32)
    for kw in (dict(N=8), dict(gamma=0.5), dict(t_end=0.0), dict(cfl=1.5), dict(dt_min=-1.0),
               dict(cadence=0.0), dict(capacity_fraction=0.0)):
        with pytest.raises(InvalidParameterError):
            SimConfig(p0, st, **{"N": 32, **kw})


def test_steady_state_is_preserved(p0):
    st = constant_state(256)
    res = run(SimConfig(p0, st, 256, t_end=1.0, max_steps=10_000))
    assert res.steps == 10_000
    assert res.blowup.trigger == "horizon" and not res.blowup.fired
    scale = st.U[-1]
    assert np.max(np.abs(res.final.U - st.U)) < 1e-10 * scale
    assert np.max(np.abs(res.final.W - st.W)) < 1e-10 * scale
    assert np.ptp(res.sup_u) < 1e-10 * res.sup_u[0]


def test_unequal_means_keep_linear_profiles(p0):
    # u = mu1 and w = mu2 make every advection factor vanish
    params = p0.with_masses(2.0, 0.5)
    st = constant_state(64, 2.0, 0.5)
    res = run(SimConfig(params, st, 64, t_end=0.01))
    assert res.mu == pytest.approx((2.0, 0.5))
    assert np.max(np.abs(res.final.U - st.U)) < 1e-12


def test_conservation_monotonicity_positivity(p0, p0_toy):
    s = graded_grid(1.0, 128, 2.0)
    res = run(SimConfig(p0, subsolution_mass_state(p0_toy, s), 128, t_end=0.05))
    for m in (res.mass_u, res.mass_w):
        assert np.max(np.abs(m - m[0])) < 1e-6 * m[0]
    for snap in res.snapshots:
        assert snap.U[-1] == res.snapshots[0].U[-1]
        assert snap.is_monotone(1e-10)
        assert np.all(cell_densities(snap.U, s, 3) >= -1e-10 * res.sup_u[0])
    assert res.mass_u[0] == pytest.approx(4 * math.pi * res.snapshots[0].U[-1], rel=1e-12)


def test_compiled_and_reference_paths_agree(p0, p0_toy, monkeypatch):
    s = graded_grid(1.0, 64, 2.0)
    cfg = SimConfig(p0, subsolution_mass_state(p0_toy, s), 64, t_end=0.01, cadence=0.005)
    fast = run(cfg)
    monkeypatch.setattr(solver, "_compiled_ok", lambda cfg: False)
    slow = run(cfg)
    assert fast.steps == slow.steps
    for a, b in zip(fast.snapshots, slow.snapshots):
        np.testing.assert_allclose(a.U, b.U, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(a.W, b.W, rtol=1e-12, atol=1e-15)


def test_second_order_convergence():
    params = make_params()
    finals = {}
    for N in (64, 128, 256):
        st = smooth_state(N)
        res = run(SimConfig(params, st, N, t_end=0.01))
        finals[N] = res.final.U
    e1 = np.max(np.abs(finals[64] - finals[128][::2]))
    e2 = np.max(np.abs(finals[128] - finals[256][::2]))
    assert math.log2(e1 / e2) >= 1.5


def test_initial_data_forms(p0):
    N = 32
    s = graded_grid(1.0, N, 2.0)
    r = np.linspace(0, 1, 101)
    prof = RadialProfile(r, np.ones_like(r))
    a = run(SimConfig(p0, (prof, prof), N, t_end=1e-4))
    b = run(SimConfig(p0, (s / 3, s / 3), N, t_end=1e-4))
    np.testing.assert_allclose(a.final.U, b.final.U, atol=1e-14)


def test_initial_data_errors(p0):
    s = graded_grid(1.0, 32, 2.0)
    bad = s / 3
    bad[5] = bad[6] + 0.1
    with pytest.raises(InvalidParameterError):
        run(SimConfig(p0, MassState(s, bad, s / 3), 32, t_end=1e-3))
    with pytest.raises(InvalidParameterError):
        run(SimConfig(p0, MassState(s, s / 3 + 0.1, s / 3), 32, t_end=1e-3))
    with pytest.raises(InvalidParameterError):
        run(SimConfig(p0, constant_state(64), 32, t_end=1e-3))


def test_nonfinite_state_aborts_with_last_good_state(p0_toy):
    D = lambda x: np.where(np.asarray(x) < 150.0, 1.0, np.nan)
    params = ModelParams(3, 1.0, 1.1, 1.1, 1.0, 1.0, D, D, 1.0, 1.0)
    s = graded_grid(1.0, 64, 2.0)
    init = subsolution_mass_state(p0_toy, s)
    with pytest.raises(AbortedRunError) as info:
        run(SimConfig(params, init, 64, t_end=0.1))
    assert isinstance(info.value.last_state, MassState)
    assert np.all(np.isfinite(info.value.last_state.U))


def test_output_files(p0, tmp_path):
    res = run(SimConfig(p0, constant_state(32), 32, t_end=1e-3, cadence=5e-4))
    write_series(res, tmp_path / "series.csv")
    write_snapshots(res, tmp_path / "snap.csv")
    with open(tmp_path / "series.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SERIES_COLUMNS and len(rows) == len(res.t) + 1
    with open(tmp_path / "snap.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SNAPSHOT_COLUMNS
    assert len(rows) == 1 + 33 * len(res.snapshots)
    assert float(rows[-1][6]) == pytest.approx(1.0)


# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small(p0, p0_toy):
    s = graded_grid(1.0, 64, 2.0)
    base = subsolution_mass_state(p0_toy, s)
    return SimConfig(p0, base, 64, t_end=0.02, cadence=0.002), base


def test_ordering_on_random_pairs(small):
    cfg, base = small
    pairs = random_ordered_pairs(base, 20, seed=0)
    reps = [ordering_experiment(cfg, pr) for pr in pairs]
    assert all(r.ok for r in reps)
    assert all(min(r.min_gap_U, r.min_gap_W) >= -r.tol for r in reps)


def test_ordering_with_bump_and_identical_pair(small):
    cfg, base = small
    s = base.s_grid
    bump = 1e-3 * s * (1 - s)
    rep = ordering_experiment(cfg, (base, MassState(s, base.U + bump, base.W + bump)))
    assert rep.ok and rep.min_gap_U > 0
    same = ordering_experiment(cfg, (base, base))
    assert same.ok and same.min_gap_U == 0.0 and same.min_gap_W == 0.0


def test_ordering_rejects_unordered_pair(small):
    cfg, base = small
    s = base.s_grid
    hi = MassState(s, base.U + 1e-3 * s * (1 - s), base.W)
    with pytest.raises(PreconditionError):
        ordering_experiment(cfg, (hi, base))


def test_dominance(p0, p0_toy, p0_theory):
    cfg = SimConfig(p0, None, 32, t_end=0.01)
    rep = dominance_experiment(cfg, p0_toy)
    assert rep.label.startswith("empirical")
    assert rep.min_diff_U[0] == 0.0 and rep.min_diff_W[0] == 0.0
    assert rep.notes == []
    with pytest.raises(NotRepresentableError):
        dominance_experiment(cfg, p0_theory)


def test_dominance_horizon_is_truncated(p0, p0_toy):
    rep = dominance_experiment(SimConfig(p0, None, 32, t_end=5.0), p0_toy)
    assert rep.horizon == pytest.approx(0.99 * p0_toy.T)
    assert "0.99T" in rep.notes[0]
    assert rep.times[-1] == pytest.approx(rep.horizon)


# ---------------------------------------------------------------------------


@pytest.mark.slow
def test_blowup_anchor(anchors):
    res = anchors(1.1, 1.1)
    b = res.blowup
    assert b.fired and b.trigger == "density"
    assert np.all(np.diff(res.sup_u) >= 0)
    assert res.sup_u[-1] > 50 * res.sup_u[0]
    assert np.ptp(res.mass_u) < 1e-6 * res.mass_u[0]
    assert b.ratio_to_T == pytest.approx(b.t_detect / b.T_ref)


@pytest.mark.slow
def test_bounded_anchor(anchors):
    res = anchors(2.0, 2.0)
    assert not res.blowup.fired
    assert res.t[-1] == pytest.approx(1.0)
    assert np.max(res.sup_u) < 2 * res.sup_u[0]
    assert np.ptp(res.mass_u) < 1e-6 * res.mass_u[0]
