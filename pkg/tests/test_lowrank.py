import numpy as np
import pytest

from dlrflow.grids import SpatialGrid, VelocityGrid
from dlrflow.lowrank import (
    LowRankState,
    evaluate_f,
    init_equilibrium,
    moments,
    qr_orthonormalize,
    total_mass,
    total_momentum,
)


@pytest.fixture
def grids():
    return SpatialGrid(32), VelocityGrid(16, 6.0)


def uniform_state(grids, rank=6, seed=0):
    xg, vg = grids
    rng = np.random.default_rng(seed)
    rho0 = np.ones(xg.shape)
    u0 = (np.zeros(xg.shape), np.zeros(xg.shape))
    return init_equilibrium(rho0, u0, rank, xg, vg, rng)


# --- qr_orthonormalize ------------------------------------------------------

def test_qr_on_orthonormal_input_is_identity(grids):
    xg, _ = grids
    rng = np.random.default_rng(1)
    F = rng.standard_normal((4,) + xg.shape)
    Q, _ = qr_orthonormalize(F, xg.weight, rng)
    Q2, R2 = qr_orthonormalize(Q, xg.weight, rng)
    assert np.max(np.abs(R2 - np.eye(4))) < 1e-10
    assert np.max(np.abs(Q2 - Q)) < 1e-10


def test_qr_duplicate_column_goes_random(grids):
    xg, _ = grids
    rng = np.random.default_rng(2)
    f = rng.standard_normal(xg.shape)
    F = np.stack([f, 2.0 * f])
    Q, R = qr_orthonormalize(F, xg.weight, rng)
    assert R[1, 1] == 0.0
    assert R[0, 1] == pytest.approx(2.0 * R[0, 0], rel=1e-12)
    # replacement column is orthonormal to the first
    assert abs(xg.inner(Q[0], Q[1])) < 1e-10
    assert xg.inner(Q[1], Q[1]) == pytest.approx(1.0, abs=1e-10)


def test_qr_reconstruction(grids):
    xg, _ = grids
    rng = np.random.default_rng(3)
    F = rng.standard_normal((6,) + xg.shape)
    Q, R = qr_orthonormalize(F, xg.weight, rng)
    recon = np.tensordot(R, Q, axes=(0, 0))
    assert np.max(np.abs(recon - F)) < 1e-10
    gram = xg.weight * (Q.reshape(6, -1) @ Q.reshape(6, -1).T)
    assert np.max(np.abs(gram - np.eye(6))) < 1e-10
    assert np.all(np.diag(R) >= 0.0)


def test_qr_rejects_empty(grids):
    xg, _ = grids
    with pytest.raises(ValueError):
        qr_orthonormalize(np.zeros((0, 32, 32)), xg.weight)


# --- init_equilibrium / moments ---------------------------------------------

def test_pure_maxwellian_moments(grids):
    st = uniform_state(grids)
    m = moments(st)
    assert np.max(np.abs(m.rho - 1.0)) < 1e-10
    assert np.max(np.abs(m.mom[0])) < 1e-10
    assert np.max(np.abs(m.mom[1])) < 1e-10


def test_init_orthonormality_residuals(grids):
    xg, vg = grids
    rng = np.random.default_rng(9)
    rho0 = 1.0 + 0.05 * np.sin(2.0 * np.pi * xg.x1)
    u0 = (0.02 * np.cos(2.0 * np.pi * xg.x2), 0.01 * np.sin(2.0 * np.pi * xg.x1))
    st = init_equilibrium(rho0, u0, 10, xg, vg, rng)
    ox, ov = st.orthonormality_residuals()
    assert ox < 1e-10
    assert ov < 1e-10


def test_init_small_amplitude_moments_reproduced(grids):
    xg, vg = grids
    rng = np.random.default_rng(4)
    delta = 1e-3
    rho0 = 1.0 + delta * np.sin(2.0 * np.pi * xg.x2)
    u0 = (np.zeros(xg.shape), delta * np.sin(2.0 * np.pi * xg.x2))
    st = init_equilibrium(rho0, u0, 6, xg, vg, rng)
    m = moments(st)
    assert np.max(np.abs(m.rho - rho0)) < 1e-8
    assert np.max(np.abs(m.mom[0] - rho0 * u0[0])) < 1e-8
    assert np.max(np.abs(m.mom[1] - rho0 * u0[1])) < 1e-8


def test_init_rejects_bad_input(grids):
    xg, vg = grids
    with pytest.raises(ValueError):
        init_equilibrium(np.ones(xg.shape), (np.zeros(xg.shape),) * 2, 5, xg, vg)
    with pytest.raises(ValueError):
        init_equilibrium(-np.ones(xg.shape), (np.zeros(xg.shape),) * 2, 6, xg, vg)


def test_moments_scale_linearly(grids):
    st = uniform_state(grids)
    st2 = st.copy()
    st2.S = 2.0 * st2.S
    m, m2 = moments(st), moments(st2)
    assert np.allclose(m2.rho, 2.0 * m.rho, atol=1e-14)
    assert np.allclose(m2.mom[0], 2.0 * m.mom[0], atol=1e-14)


def test_shear_flow_init_velocity_amplitude():
    xg, vg = SpatialGrid(64), VelocityGrid(16, 6.0)
    rng = np.random.default_rng(0)
    y = xg.x2
    v0, width, delta = 0.1, 1.0 / 30.0, 5e-3
    u1 = np.where(y <= 0.5, v0 * np.tanh((y - 0.25) / width),
                  v0 * np.tanh((0.75 - y) / width))
    u2 = delta * np.sin(2.0 * np.pi * xg.x1)
    st = init_equilibrium(np.ones(xg.shape), (u1, u2), 10, xg, vg, rng)
    m = moments(st)
    assert np.max(np.abs(m.u[0])) == pytest.approx(0.1, abs=1e-3)


def test_total_mass_and_momentum(grids):
    xg, vg = grids
    rng = np.random.default_rng(6)
    delta = 1e-3
    rho0 = 1.0 + delta * np.sin(2.0 * np.pi * xg.x2)
    u0 = (np.zeros(xg.shape), delta * np.sin(2.0 * np.pi * xg.x2))
    st = init_equilibrium(rho0, u0, 6, xg, vg, rng)
    assert total_mass(st) == pytest.approx(1.0, abs=1e-12)
    assert total_momentum(st)[0] == pytest.approx(0.0, abs=1e-12)
    st_u = uniform_state(grids)
    assert total_mass(st_u) == pytest.approx(1.0, abs=1e-12)


# --- evaluate_f ---------------------------------------------------------------

def test_evaluate_rank_one(grids):
    xg, vg = grids
    X = np.ones((1,) + xg.shape)
    S = np.array([[1.0]])
    Vf = vg.maxwellian[None]
    st = LowRankState(X, S, Vf, xg, vg)
    assert evaluate_f(st, (3, 5), (2, 7)) == pytest.approx(vg.maxwellian[2, 7])


def test_evaluate_maxwellian_peak():
    # odd velocity grid puts a node exactly at v = 0
    xg, vg = SpatialGrid(16), VelocityGrid(65, 6.0)
    i0 = 32
    assert abs(vg.v[i0]) < 1e-14
    rng = np.random.default_rng(0)
    st = init_equilibrium(np.ones(xg.shape), (np.zeros(xg.shape),) * 2, 6,
                          xg, vg, rng)
    val = evaluate_f(st, (0, 0), (i0, i0))
    assert val == pytest.approx(1.0 / (2.0 * np.pi), abs=1e-8)


def test_evaluate_matches_dense_reconstruction():
    xg, vg = SpatialGrid(8), VelocityGrid(8, 6.0)
    rng = np.random.default_rng(12)
    rho0 = 1.0 + 0.01 * np.sin(2.0 * np.pi * xg.x1)
    u0 = (0.05 * np.cos(2.0 * np.pi * xg.x2), np.zeros(xg.shape))
    st = init_equilibrium(rho0, u0, 6, xg, vg, rng)
    dense = np.einsum("ixy,ij,jab->xyab", st.X, st.S, st.V)
    for a in range(8):
        for b in range(8):
            for c in range(8):
                for e in range(8):
                    assert abs(evaluate_f(st, (a, b), (c, e))
                               - dense[a, b, c, e]) < 1e-12


def test_init_expansion_matches_svd_of_dense_maxwellian():
    # cross-check of the expansion initializer against an SVD of the exact
    # discretized equilibrium; they agree to the cubic truncation error
    xg, vg = SpatialGrid(16, ), VelocityGrid(16, 6.0)
    rng = np.random.default_rng(1)
    u_amp = 1e-2
    rho0 = 1.0 + 0.1 * np.sin(2.0 * np.pi * xg.x1)
    u0 = (u_amp * np.sin(2.0 * np.pi * xg.x2), u_amp * np.cos(2.0 * np.pi * xg.x1))
    st = init_equilibrium(rho0, u0, 6, xg, vg, rng)
    recon = np.einsum("ixy,ij,jab->xyab", st.X, st.S, st.V)

    dv1 = vg.v1[None, None] - u0[0][..., None, None]
    dv2 = vg.v2[None, None] - u0[1][..., None, None]
    dense = rho0[..., None, None] * np.exp(-0.5 * (dv1 ** 2 + dv2 ** 2)) / (2 * np.pi)
    mat = dense.reshape(xg.n ** 2, vg.n ** 2)
    U, s, Vt = np.linalg.svd(mat, full_matrices=False)
    trunc = (U[:, :6] * s[:6]) @ Vt[:6]
    err = np.max(np.abs(recon.reshape(mat.shape) - trunc))
    assert err < 50.0 * u_amp ** 3
