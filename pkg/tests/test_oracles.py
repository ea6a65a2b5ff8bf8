import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from grpburgers.errors import InputError
from grpburgers.mesh import Field, Mesh, project
from grpburgers.oracles import (
    ExactSolution, convergence_study, eoc, error_norms, fine_grid_reference,
    godunov_flux, planar_riemann_exact, restrict, riemann_interaction_time, smooth_exact,
)
from grpburgers.profiles import ConstantProfile, RiemannProfile, SineProfile, make_profile
from grpburgers.stepper import RunConfig

# bisection to 1e-15 on u - g(0.3 - 0.5 u) for g = 0.25 + 0.1 sin(2 pi s)
SMOOTH_ROOT = 0.3258640287482063


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_godunov_against_sampled_extremum(a, b):
    # brute force: min / max of u^2/2 over a dense sample of the interval
    # (plus the sonic point), independent of the closed form
    s = np.linspace(min(a, b), max(a, b), 2001)
    if min(a, b) <= 0 <= max(a, b):
        s = np.append(s, 0.0)
    f = 0.5 * s * s
    expected = f.min() if a <= b else f.max()
    assert godunov_flux(a, b) == pytest.approx(expected, abs=1e-15)


def test_smooth_exact_regression():
    u = smooth_exact(SineProfile(), [np.array(0.3)], 0.5)
    assert float(u) == pytest.approx(SMOOTH_ROOT, abs=1e-13)


def test_smooth_exact_trivial_cases():
    x = [np.linspace(0, 1, 7)]
    assert np.allclose(smooth_exact(ConstantProfile(0.2), x, 0.3), 0.2, rtol=0, atol=1e-16)
    assert np.array_equal(smooth_exact(SineProfile(), x, 0.0), SineProfile().g(x[0]))
    ex = ExactSolution(ConstantProfile(0.2), 2)
    assert np.all(ex(0.4, np.zeros(3), np.ones(3)) == 0.2)


def test_smooth_exact_satisfies_characteristics():
    prof = SineProfile(0.25, 0.1, 1)
    x, y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9), indexing="ij")
    t = 0.3
    u = smooth_exact(prof, [x, y], t)
    assert np.allclose(u, prof.g(x + y - 2 * u * t), atol=1e-13)


def test_smooth_exact_rejects_breaking():
    prof = SineProfile()
    t_star = prof.breaking_time(1)
    assert t_star == pytest.approx(1 / (2 * math.pi * 0.1))
    with pytest.raises(InputError):
        smooth_exact(prof, [np.array(0.1)], t_star)
    assert SineProfile().breaking_time(2) == pytest.approx(t_star / 2)


def test_planar_riemann_examples():
    x = np.array([0.4, 0.6, 0.8])
    u = planar_riemann_exact(1.0, 0.0, [x], 0.5)
    # shock from 0.5 has reached 0.75; the fan from 0 covers [0, 0.5]
    assert u[1] == 1.0 and u[2] == 0.0
    assert u[0] == pytest.approx(0.8)
    c = planar_riemann_exact(0.3, 0.3, [x], 0.5)
    assert np.all(c == 0.3)


def test_planar_riemann_conserves_mass():
    s = (np.arange(4000) + 0.5) / 4000
    for t in (0.0, 0.2, 0.45):
        assert planar_riemann_exact(1.0, 0.0, [s], t).mean() == pytest.approx(0.5, abs=1e-3)


def test_riemann_interaction_horizon():
    assert riemann_interaction_time(1.0, 0.0, 0.5, 1) == pytest.approx(1.0)
    assert riemann_interaction_time(1.0, 0.0, 0.5, 2) == pytest.approx(0.5)
    with pytest.raises(InputError):
        planar_riemann_exact(1.0, 0.0, [np.array([0.1])], 1.2)
    assert ExactSolution(RiemannProfile(), 2).valid_until() == pytest.approx(0.5)


def test_error_norms_examples():
    m = Mesh(2, 8)
    f = project(lambda x, y: np.sin(2 * np.pi * x), m)
    assert error_norms(f, f) == 0.0
    c = project(0.25, m)
    assert error_norms(c, 0.25) == 0.0
    # through quadrature only rounding is left
    assert error_norms(c, lambda x, y: np.full(np.shape(x), 0.25)) < 1e-15
    delta = 1e-3
    v = c.values.copy()
    v[3, 4] += delta
    pert = Field(m, v)
    assert error_norms(pert, c, 1) == pytest.approx(delta * m.cell_volume)
    assert error_norms(pert, c, "inf") == pytest.approx(delta)
    assert error_norms(pert, c, 2) == pytest.approx(delta * m.h)
    with pytest.raises(InputError):
        error_norms(pert, c, 3)


def test_pointwise_error_includes_projection_error():
    m = Mesh(1, 16)
    phi = lambda x: np.sin(2 * np.pi * x)
    f = project(phi, m)
    assert error_norms(f, phi, 1, mode="average") < 1e-12
    assert error_norms(f, phi, 1, mode="pointwise") > 1e-3


def test_eoc():
    assert eoc(0.4, 0.1) == pytest.approx(2.0)
    assert math.isnan(eoc(0.0, 0.0)) and math.isnan(eoc(1.0, math.nan))


def test_restrict_averages():
    fine = project(lambda x: x, Mesh(1, 8))
    coarse = restrict(fine, Mesh(1, 4))
    assert np.allclose(coarse.values, project(lambda x: x, Mesh(1, 4)).values)
    with pytest.raises(InputError):
        restrict(fine, Mesh(1, 3))


def test_convergence_constant_data():
    cfg = RunConfig(dim=2, n=8, t_end=0.05, initial=ConstantProfile(0.5))
    table = convergence_study(cfg, [8, 16])
    assert table.column("L1") == [0.0, 0.0]
    buf = io.StringIO()
    table.write_csv(buf)
    row = buf.getvalue().splitlines()[2].split(",")
    assert row[7:10] == ["", "", ""]


def test_convergence_single_level_and_determinism():
    cfg = RunConfig(dim=1, n=16, t_end=0.1)
    bufs = []
    for _ in range(2):
        buf = io.StringIO()
        convergence_study(cfg, [16]).write_csv(buf)
        bufs.append(buf.getvalue())
    assert bufs[0] == bufs[1]
    lines = bufs[0].splitlines()
    assert lines[0] == "level,n,h,dt,L1,L2,Linf,EOC1,EOC2,EOCinf,runtime_seconds"
    assert len(lines) == 2 and lines[1].endswith(",,,,")


def test_convergence_smooth_1d_decreasing():
    cfg = RunConfig(dim=1, n=16, t_end=0.3)
    table = convergence_study(cfg, [16, 32, 64])
    l1 = table.column("L1")
    assert l1[0] > l1[1] > l1[2]
    assert table.rows[-1].eoc["L1"] > 1.5


def test_convergence_rejects_invalid_exact_horizon():
    cfg = RunConfig(dim=2, n=8, t_end=0.6, initial=RiemannProfile())
    with pytest.raises(InputError):
        convergence_study(cfg, [8])


def test_fine_grid_reference_close_to_exact():
    cfg = RunConfig(dim=1, n=8, t_end=0.2)
    ref = fine_grid_reference(cfg, factor=4)
    exact = ExactSolution(cfg.initial, 1)
    from grpburgers.stepper import run
    coarse = run(cfg).final
    e_ref = error_norms(ref, lambda x: exact(0.2, x))
    assert e_ref < error_norms(coarse, lambda x: exact(0.2, x)) / 4


def test_make_profile():
    assert make_profile("riemann", u_left=2.0).u_left == 2.0
    with pytest.raises(InputError):
        make_profile("gauss")
    with pytest.raises(InputError):
        make_profile("sine", slope=1.0)
    with pytest.raises(InputError):
        SineProfile(wavenumber=0.5)


def test_smooth_exact_pde_residual(rng):
    prof = SineProfile(0.25, 0.1, 1)
    dim, eps = 2, 1e-5
    x, y = rng.random(50), rng.random(50)
    t = rng.uniform(0.05, 0.7)

    def u(xx, tt):
        return smooth_exact(prof, [xx, y], tt)

    u_t = (u(x, t + eps) - u(x, t - eps)) / (2 * eps)
    # along s = x + y, moving x alone moves s by the same amount
    u_s = (u(x + eps, t) - u(x - eps, t)) / (2 * eps)
    assert np.max(np.abs(u_t + dim * u(x, t) * u_s)) <= 1e-6


def test_exact_shock_dissipates_entropy():
    s = (np.arange(20000) + 0.5) / 20000
    energies = [np.mean(0.5 * planar_riemann_exact(1.0, 0.0, [s], t) ** 2)
                for t in (0.0, 0.2, 0.4, 0.8)]
    assert all(b < a for a, b in zip(energies, energies[1:]))
