import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subcelldg.dg import DGSolver, ssp_rk3_step
from subcelldg.mesh import generate_square_mesh
from subcelldg.physics import Burgers, Euler, KPP, LinearAdvection
from subcelldg.presets import crenel
from subcelldg.space import build_space
from subcelldg.subcell_fv import check_compatibility

SCHEMES = ["structured_uniform", "structured_gauss_lobatto", "voronoi_uniform", "voronoi_lagrange_mid"]


@pytest.fixture(scope="module")
def periodic_mesh():
    return generate_square_mesh(3, periodic=True)


def _solver(mesh, k, model, scheme="structured_uniform", volume_flux="exact", boundary=None):
    return DGSolver(build_space(mesh, k, scheme, boundary), model, volume_flux)


@pytest.mark.parametrize("k", [0, 2, 4])
def test_constant_initial_data(square36, outflow, k):
    s = _solver(square36, k, Burgers(), boundary=outflow)
    m = s.project(lambda x: np.full(x.shape[:-1], 0.7))
    assert np.allclose(s.submeans(m), 0.7, rtol=0, atol=1e-14)
    # only the constant mode (sqrt 2 on the reference triangle) survives
    assert np.allclose(m[:, 0], 0.7 / np.sqrt(2.0), rtol=0, atol=1e-14)
    assert np.allclose(m[:, 1:], 0.0, rtol=0, atol=1e-13)


def test_crenel_submeans_in_range(square36, outflow):
    s = _solver(square36, 3, LinearAdvection(), boundary=outflow)
    ub = s.submeans(s.project(crenel))
    assert ub.min() >= -1e-13 and ub.max() <= 1 + 1e-13


@pytest.mark.parametrize("j", [1, 2, 5])
def test_basis_function_roundtrip(square36, outflow, j):
    s = _solver(square36, 2, LinearAdvection(), boundary=outflow)
    sp = s.space
    basis = sp.ops.basis

    def sigma(x):
        # pull each physical point back to its cell's reference coordinates
        ref = np.einsum("cab,cqb->cqa", sp.jac_inv, x - sp.v0[:, None, :])
        return basis.eval(ref.reshape(-1, 2))[:, j].reshape(ref.shape[:2])

    m = s.project(sigma)
    expected = np.zeros_like(m)
    expected[:, j] = 1.0
    assert np.allclose(m, expected, rtol=0, atol=1e-12)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize(
    "model,state",
    [(LinearAdvection(), [0.3]), (Burgers(), [-1.2]), (KPP(), [2.0]), (Euler(), [1.0, 0.4, -0.2, 2.7])],
)
def test_free_stream(periodic_mesh, scheme, model, state):
    s = _solver(periodic_mesh, 2, model, scheme)
    sp = s.space
    m = s.moments_from_submeans(np.tile(state, (sp.n_subcells, 1)))
    res = s.residual(m)
    assert np.abs(res.phi).max() < 1e-13
    new = m + 0.01 * s.rhs(m)
    assert np.allclose(s.submeans(new), state, rtol=0, atol=1e-14)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(0, 4), vf=st.sampled_from(["exact", "projected"]))
def test_conservation_and_compatibility(periodic_mesh, seed, k, vf):
    rng = np.random.default_rng(seed)
    s = _solver(periodic_mesh, k, Burgers(), volume_flux=vf)
    sp = s.space
    m = rng.normal(size=(sp.n_cells, sp.ops.n, 1))
    res = s.residual(m)
    # total mass rate: sum_c |c| * d(mean)/dt, with the constant mode carrying the mean
    total = np.sum(res.phi[:, 0, 0]) * np.sqrt(2.0) / 2
    assert abs(total) < 1e-12 * np.abs(res.phi).max()
    check_compatibility(s, res)


def test_projected_flux_equals_exact_for_linear_model(square36, outflow, rng):
    a = _solver(square36, 3, LinearAdvection(), volume_flux="exact", boundary=outflow)
    b = _solver(square36, 3, LinearAdvection(), volume_flux="projected", boundary=outflow)
    m = rng.normal(size=(a.space.n_cells, a.space.ops.n, 1))
    assert np.allclose(a.residual(m).phi, b.residual(m).phi, rtol=0, atol=1e-12)


def test_cfl_timestep_degree_zero(square36, outflow):
    s = _solver(square36, 0, LinearAdvection((1.0, 1.0)), boundary=outflow)
    sp = s.space
    m = s.project(lambda x: np.zeros(x.shape[:-1]))
    # one subcell per cell, so d_1 = d_c = |c| / perimeter
    v = square36.cell_vertices()
    perim = np.linalg.norm(np.roll(v, -1, axis=1) - v, axis=2).sum(axis=1)
    dc = square36.areas() / perim
    assert s.cfl_timestep(m, safety=0.5) == pytest.approx(0.5 * dc.min() / np.sqrt(2.0), rel=1e-14)
    assert np.allclose(sp.cell_length, dc)


def test_cfl_timestep_uses_subcell_lengths(square36, outflow):
    s = _solver(square36, 3, Burgers(), boundary=outflow)
    sp = s.space
    m = s.project(lambda x: np.full(x.shape[:-1], -2.0))
    dm = sp.sub_length.reshape(sp.n_cells, sp.n_sub).min(axis=1)
    expected = min(np.min(sp.cell_length / 7), np.min(dm)) / (2.0 * np.sqrt(2.0))
    assert s.cfl_timestep(m, safety=1.0) == pytest.approx(expected, rel=1e-14)


def test_ssp_rk3_third_order():
    # u' = u^2 with u(0) = 1 has u(t) = 1 / (1 - t)
    def euler(u, dt):
        return u + dt * u * u

    errs = []
    for n in (20, 40, 80):
        u, dt = np.array(1.0), 0.5 / n
        for _ in range(n):
            u = ssp_rk3_step(euler, u, dt)
        errs.append(abs(u - 2.0))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 3.0) < 0.15)


def test_ssp_rk3_is_convex_combination_of_euler_steps():
    calls = []

    def euler(u, dt):
        calls.append(u.copy())
        return u + dt

    out = ssp_rk3_step(euler, np.array([0.0]), 1.0)
    assert len(calls) == 3
    # stages: 1, 0.75*0 + 0.25*2 = 0.5, 1/3*0 + 2/3*1.5 = 1
    assert np.allclose([c[0] for c in calls], [0.0, 1.0, 0.5])
    assert out[0] == pytest.approx(1.0)


def test_smooth_advection_converges():
    errs = []
    for n in (4, 8):
        mesh = generate_square_mesh(n, periodic=True)
        s = _solver(mesh, 2, LinearAdvection())
        f = lambda x, t=0.0: np.sin(2 * np.pi * (x[..., 0] + x[..., 1] - 2 * t))
        m = s.project(f)
        t, t_end = 0.0, 0.1
        while t < t_end - 1e-14:
            dt = min(0.5 * s.cfl_timestep(m), t_end - t)
            m = ssp_rk3_step(lambda u, h: u + h * s.rhs(u), m, dt)
            t += dt
        exact = s.exact_submeans(lambda x: f(x, t_end))
        errs.append(np.abs(s.submeans(m) - exact).max())
    assert np.log2(errs[0] / errs[1]) > 2.5
