import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdmc.core import (
    Constant,
    FieldState,
    GridSpec,
    InitialData,
    Reversible,
    SeededRandom,
    SpeciesParams,
)
from rdmc.fixtures import FIXTURES, fixture
from rdmc.reactions import make_system, regularized_reaction
from rdmc.solver import (
    SolverAbort,
    StabilityError,
    discrete_laplacian_neumann,
    run,
    stable_dt,
    step,
)
from rdmc.verify import weighted_mass

REV = Reversible((2, 1), (1, 2), 1.0, 1.0)


def _zero_reaction(n=1, d=1.0, m=1.0):
    fam = Reversible((1,) * n, (1,) * n, 1.0, 1.0)
    return make_system(fam, [SpeciesParams(d, m)] * n)


# -- Laplacian -------------------------------------------------------------


@pytest.mark.parametrize("values, expected", [
    ([0.0, 1.0, 0.0], [1.0, -2.0, 1.0]),
    ([1.0, 2.0, 3.0], [1.0, 0.0, -1.0]),
    ([4.0, 4.0, 4.0, 4.0], [0.0, 0.0, 0.0, 0.0]),
])
def test_laplacian_hand_stencils(values, expected):
    g = GridSpec(1, (float(len(values)),), (len(values),))
    out = discrete_laplacian_neumann(np.array(values), g)
    np.testing.assert_array_equal(out, expected)


def test_laplacian_2d_constant_and_species_axis():
    g = GridSpec(2, (1.0, 1.0), (5, 7))
    assert np.all(discrete_laplacian_neumann(np.full((2, 5, 7), 3.0), g) == 0.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), dim=st.sampled_from([1, 2]))
def test_laplacian_sums_to_zero(seed, dim):
    g = GridSpec(dim, (1.0,) * dim, (9,) * dim)
    f = np.random.default_rng(seed).uniform(0, 10, size=g.shape)
    lap = discrete_laplacian_neumann(f, g)
    assert abs(lap.sum()) <= 1e-12 * np.abs(lap).sum() + 1e-12


# -- stable_dt ---------------------------------------------------------------


def test_stable_dt_pure_diffusion_example():
    sysm = _zero_reaction()
    g = GridSpec(1, (1.0,), (10,))
    state = FieldState(0.0, 0.0, np.ones((1, 10)))
    assert stable_dt(state, sysm, g, safety=0.5) == pytest.approx(0.0025, rel=1e-14)


def test_stable_dt_zero_state_no_reaction_restriction():
    sysm = make_system(REV, [SpeciesParams(1.0, 1.0)] * 2)
    g = GridSpec(1, (1.0,), (10,))
    zero = FieldState(0.0, 0.0, np.zeros((2, 10)))
    assert stable_dt(zero, sysm, g, safety=0.5) == pytest.approx(0.0025)


def test_stable_dt_min_over_species():
    sysm = make_system(Reversible((1, 1), (1, 1), 1, 1), [SpeciesParams(1.0, 1.0), SpeciesParams(4.0, 1.0)])
    g = GridSpec(1, (1.0,), (10,))
    state = FieldState(0.0, 0.0, np.ones((2, 10)))
    assert stable_dt(state, sysm, g, safety=0.5) == pytest.approx(0.0025 / 4)


def test_stable_dt_respects_cap():
    sysm = _zero_reaction()
    g = GridSpec(1, (1.0,), (10,))
    state = FieldState(0.0, 0.0, np.ones((1, 10)))
    assert stable_dt(state, sysm, g, dt_max=1e-4) == 1e-4


# -- step --------------------------------------------------------------------


def test_step_steady_state_unchanged():
    sysm = _zero_reaction(2)
    g = GridSpec(1, (1.0,), (8,))
    state = FieldState(0.0, 0.1, np.full((2, 8), 0.7))
    new = step(state, sysm, g, 0.001)
    np.testing.assert_array_equal(new.u, state.u)
    assert new.t == 0.001


def test_step_single_cell_hand_euler():
    sysm = make_system(REV, [SpeciesParams(1.0, 1.0)] * 2)
    g = GridSpec(1, (1.0,), (1,))
    state = FieldState(0.0, 0.25, np.array([[2.0], [1.0]]))
    new = step(state, sysm, g, 0.1)
    np.testing.assert_allclose(new.u[:, 0], [1.9, 1.1], rtol=0, atol=1e-15)


def test_step_refuses_oversized_dt():
    sysm = _zero_reaction()
    g = GridSpec(1, (1.0,), (10,))
    state = FieldState(0.0, 0.0, np.ones((1, 10)))
    with pytest.raises(StabilityError):
        step(state, sysm, g, 0.01)


def test_pure_diffusion_mass_per_step():
    sysm = _zero_reaction(1, d=0.5, m=2.0)
    g = GridSpec(1, (1.0,), (32,))
    init = InitialData(((SeededRandom(5, 0.0, 3.0),),))
    traj = run(sysm, g, init, 0.05, 0.05, keep_history=True)
    totals = np.array([s.u.sum() for s in traj.history])
    assert np.all(np.abs(np.diff(totals)) <= 1e-12 * totals[0])


# -- run ---------------------------------------------------------------------


def test_run_T_zero_gives_initial_snapshot_only():
    cfg = fixture("reversible")
    traj = run(cfg.system, cfg.grid, cfg.init, 0.1, 0.0)
    assert len(traj.snapshots) == 1 and traj.n_steps == 0


def test_run_zero_data_stays_zero():
    cfg = fixture("cross_absorb_exp")
    zero = np.zeros((2,) + cfg.grid.shape)
    traj = run(cfg.system, cfg.grid, zero, 0.1, 0.2)
    assert all(np.all(s.u == 0.0) for s in traj.snapshots)


def test_run_reaches_T_exactly_and_snapshots_increase():
    cfg = fixture("power_law")
    traj = run(cfg.system, cfg.grid, cfg.init, 0.1, 0.3, snapshot_every=37)
    assert traj.T == 0.3
    assert np.all(np.diff(traj.times) > 0)


def test_reversible_run_conserves_weighted_mass():
    cfg = fixture("reversible")
    traj = run(cfg.system, cfg.grid, cfg.init, 0.1, 0.5, snapshot_every=10)
    m0 = weighted_mass(traj.initial, cfg.system.a, cfg.grid)
    for s in traj.snapshots:
        assert abs(weighted_mass(s, cfg.system.a, cfg.grid) - m0) <= 1e-10 * m0


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_runs_stay_nonnegative(name):
    cfg = fixture(name)
    traj = run(cfg.system, cfg.grid, cfg.init, cfg.eps, 0.5, snapshot_every=5)
    assert min(float(s.u.min()) for s in traj.snapshots) >= 0.0
    assert traj.clamp_max <= 1e-14


def test_single_cell_matches_euler_ode():
    sysm = make_system(REV, [SpeciesParams(1.0, 1.0)] * 2)
    g = GridSpec(1, (1.0,), (1,))
    eps, dt = 0.1, 0.01
    u = np.array([[2.0], [0.5]])
    schedule = [dt] * 40
    traj = run(sysm, g, u, eps, 0.4, dt_schedule=schedule, keep_history=True)
    ref = u.copy()
    assert traj.n_steps == 40
    for st_, h in zip(traj.history[1:], traj.dts):
        f = regularized_reaction(sysm, ref, eps)
        ref = ref + h * f
        np.testing.assert_array_equal(st_.u, ref)


def test_run_aborts_when_schedule_is_unstable():
    sysm = _zero_reaction()
    g = GridSpec(1, (1.0,), (10,))
    init = InitialData(((Constant(1.0),),))
    with pytest.raises(SolverAbort) as info:
        run(sysm, g, init, 0.0, 1.0, dt_schedule=[0.001, 0.5])
    assert info.value.trajectory.n_steps == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_run_aborts_on_non_finite_growth():
    # exp(50 s) overflows at s = 20, so the very first reaction evaluation is non-finite
    from rdmc.core import CrossAbsorb2, GFunction
    fam = CrossAbsorb2(GFunction("expm1", 1.0, 50.0), GFunction("expm1", 1.0, 50.0), 1.0, 1.0, 1.0)
    sysm = make_system(fam, [SpeciesParams(1.0, 1.0)] * 2, K=0.0)
    g = GridSpec(1, (1.0,), (1,))
    with pytest.raises(SolverAbort) as info:
        run(sysm, g, np.array([[20.0], [20.0]]), 0.0, 10.0, dt_schedule=[1.0] * 5)
    assert info.value.trajectory.aborted
