import numpy as np
import pytest
from hypothesis import given, strategies as st

from grpburgers.errors import BlowUpError, ConfigError
from grpburgers.mesh import Field, Mesh
from grpburgers.profiles import ConstantProfile, RiemannProfile, SineProfile
from grpburgers.stepper import RunConfig, choose_dt, run, step, step_count, update


def test_dt_power_branch():
    cfg = RunConfig(dim=1, n=16, c2=0.1, p=1.5)
    dt, binds = choose_dt(cfg, 1e-3)
    assert dt == pytest.approx(0.1 * (1 / 16) ** 1.5) and not binds


def test_dt_zero_field():
    cfg = RunConfig(dim=2, n=16, c2=0.1, p=1.5)
    assert choose_dt(cfg, 0.0) == (0.1 * (1 / 16) ** 1.5, False)


def test_dt_cfl_branch():
    cfg = RunConfig(dim=2, n=32, c2=10.0, p=1.5, cfl=0.4)
    dt, binds = choose_dt(cfg, 2.0)
    assert binds and dt == pytest.approx(1 / 320)


@given(st.integers(1, 3), st.integers(1, 512), st.floats(4 / 3, 3),
       st.floats(0, 10), st.floats(1e-3, 1.0))
def test_dt_never_exceeds_power_law(dim, n, p, umax, c2):
    cfg = RunConfig(dim=dim, n=n, p=p, c2=c2)
    dt, _ = choose_dt(cfg, umax)
    assert 0 < dt <= c2 * (1 / n) ** (4 / 3) * (1 + 1e-12)


@pytest.mark.parametrize("changes", [
    {"c1": 0.1}, {"c1": 0.0}, {"p": 1.2}, {"cfl": 0.0}, {"cfl": 1.5}, {"dim": 4},
    {"n": 0}, {"scheme": "upwind"}, {"c2": -1.0}, {"t_end": -1.0},
    {"p": 4 / 3, "entropy_inequality": True},
])
def test_config_rejections(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes)


def test_step_count_truncation():
    assert step_count(1.0, 0.25) == 4
    assert step_count(1.0, 0.3) == 4
    assert step_count(0.0, 0.1) == 0
    assert step_count(0.3, 0.1) == 3  # 0.3/0.1 is not exactly 3 in floating point


def test_constant_field_unchanged():
    cfg = RunConfig(dim=3, n=4, initial=ConstantProfile(0.7))
    f = Field(cfg.mesh, np.full(cfg.mesh.shape, 0.7))
    assert np.array_equal(step(f, cfg).values, f.values)


def test_two_cell_hand_step():
    m = Mesh(1, 2)
    new, fluxes = update(np.array([0.0, 2.0]), m, 0.1 * m.h)
    # wrap face: shock with f_new = 7/3; interior face: sonic with f = 0
    assert fluxes[0].f_new[1] == pytest.approx(7 / 3)
    assert fluxes[0].f_new[0] == 0.0
    assert new == pytest.approx([7 / 30, 2 - 7 / 30])
    assert new.sum() == pytest.approx(2.0)


def test_variants_differ_only_on_compressive_faces(rng):
    m = Mesh(2, 8)
    u = rng.uniform(-1, 1, m.shape)
    a, fa = update(u, m, 0.01)
    b, fb = update(u, m, 0.01, stabilized=False)
    for x, y in zip(fa, fb):
        expanding = x.jump >= 0
        assert np.array_equal(x.f_new[expanding], y.f_new[expanding])
        assert np.all(x.f_new[~expanding] > y.f_new[~expanding])


def test_variants_agree_on_constant_state():
    m = Mesh(1, 8)
    u = np.full(8, 0.3)
    assert np.array_equal(update(u, m, 0.01)[0], update(u, m, 0.01, stabilized=False)[0])


def test_run_zero_horizon():
    tr = run(RunConfig(n=8, t_end=0.0))
    assert len(tr.snapshots) == 1 and tr.steps == []


def test_run_constant_stays_constant():
    tr = run(RunConfig(dim=2, n=8, t_end=0.05, initial=ConstantProfile(-0.4),
                       output_every=1))
    assert all(np.all(s.values == -0.4) for s in tr.snapshots)


def test_run_deterministic_and_lands_on_t_end():
    cfg = RunConfig(dim=2, n=16, t_end=0.1, output_every=3)
    a, b = run(cfg), run(cfg)
    assert a.final.time == 0.1
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.snapshots, b.snapshots))
    assert a.times == sorted(a.times)
    assert len(a.snapshots) == 1 + len(a.steps) // 3 + (len(a.steps) % 3 != 0)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_mass_conserved(dim):
    tr = run(RunConfig(dim=dim, n=8, t_end=0.1, initial=RiemannProfile()))
    assert tr.mass_drift() <= 1e-12


def test_shock_stays_bounded():
    tr = run(RunConfig(dim=2, n=16, t_end=0.2, initial=RiemannProfile()))
    # the scheme is not exactly monotone; overshoot stays small
    assert tr.max_abs_u() < 1.1


def test_blowup_reports_last_field():
    cfg = RunConfig(dim=1, n=8, c2=1e6, cfl=1.0, t_end=50.0,
                    initial=SineProfile(0.0, 1.0, 1))
    with pytest.raises(BlowUpError) as err:
        run(cfg, initial=Field(cfg.mesh, np.array([1e200, -1e200] * 4)))
    assert err.value.last_field is not None
