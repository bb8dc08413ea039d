"""Low-rank representation f(x,v) = sum_ij X_i(x) S_ij V_j(v) with weighted
orthonormalization, initialization from fluid data, moments and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid, VelocityGrid

# Columns whose residual after orthogonalization falls below this fraction of
# the largest input column norm are treated as rank deficient.
RANK_DEFICIENCY_TOL = 1e-12


@dataclass
class LowRankState:
    """Factored kinetic state: r spatial fields X (r,n,n), coupling matrix
    S (r,r), r velocity fields V (r,m,m).

    X rows are orthonormal in the spatial quadrature inner product and V rows
    in the velocity one; S is unconstrained (its smallest singular value is
    monitored, not enforced).
    """

    X: np.ndarray
    S: np.ndarray
    V: np.ndarray
    xgrid: SpatialGrid
    vgrid: VelocityGrid

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    def copy(self) -> "LowRankState":
        return LowRankState(self.X.copy(), self.S.copy(), self.V.copy(),
                            self.xgrid, self.vgrid)

    def orthonormality_residuals(self) -> tuple[float, float]:
        """max |X^T W X - I| and max |V^T W V - I|."""
        r = self.rank
        gx = self.xgrid.weight * (self.X.reshape(r, -1) @ self.X.reshape(r, -1).T)
        gv = self.vgrid.weight * (self.V.reshape(r, -1) @ self.V.reshape(r, -1).T)
        eye = np.eye(r)
        return (float(np.max(np.abs(gx - eye))), float(np.max(np.abs(gv - eye))))


@dataclass
class MomentFields:
    """Density and momentum of a kinetic state; u is derived as mom/rho."""

    rho: np.ndarray
    mom: tuple[np.ndarray, np.ndarray]
    u: tuple[np.ndarray, np.ndarray]


def qr_orthonormalize(fields: np.ndarray, weight: float,
                      rng: np.random.Generator | None = None):
    """Weighted QR of a stack of fields via modified Gram-Schmidt.

    fields[j] plays the role of the j-th column; returns (Q, R) with
    fields[j] = sum_i Q[i] * R[i, j], Q orthonormal under the weighted inner
    product. One re-orthogonalization pass. Rank-deficient columns are
    replaced by normalized random fields orthogonal to the previous ones,
    with R[j, j] = 0. Diagonal of R is non-negative, which makes the
    factorization deterministic.
    """
    if fields.shape[0] == 0:
        raise ValueError("qr_orthonormalize needs at least one field")
    if rng is None:
        rng = np.random.default_rng(0)
    r = fields.shape[0]
    shape = fields.shape[1:]
    F = fields.reshape(r, -1).astype(float)
    Q = np.zeros_like(F)
    R = np.zeros((r, r))
    col_norms = np.sqrt(weight * np.sum(F * F, axis=1))
    scale = float(np.max(col_norms)) if np.max(col_norms) > 0 else 1.0
    for j in range(r):
        v = F[j].copy()
        for _ in range(2):  # MGS + one re-orthogonalization pass
            for i in range(j):
                c = weight * float(Q[i] @ v)
                v -= c * Q[i]
                R[i, j] += c
        nrm = np.sqrt(weight * float(v @ v))
        if nrm <= RANK_DEFICIENCY_TOL * scale:
            R[j, j] = 0.0
            Q[j] = _random_orthonormal_field(Q[:j], weight, F.shape[1], rng)
        else:
            R[j, j] = nrm
            Q[j] = v / nrm
    return Q.reshape(r, *shape), R


def _random_orthonormal_field(Qprev: np.ndarray, weight: float, npts: int,
                              rng: np.random.Generator) -> np.ndarray:
    for _ in range(20):
        v = rng.standard_normal(npts)
        for _ in range(2):
            for q in Qprev:
                v -= (weight * float(q @ v)) * q
        nrm = np.sqrt(weight * float(v @ v))
        if nrm > 1e-8:
            return v / nrm
    raise RuntimeError("failed to draw a field independent of the basis")


def extend_basis(Q: np.ndarray, rank: int, weight: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Pad an orthonormal stack with random orthonormal complement fields."""
    r0 = Q.shape[0]
    if rank < r0:
        raise ValueError("target rank smaller than current basis")
    if rank == r0:
        return Q
    shape = Q.shape[1:]
    Qf = Q.reshape(r0, -1)
    out = np.zeros((rank, Qf.shape[1]))
    out[:r0] = Qf
    for j in range(r0, rank):
        out[j] = _random_orthonormal_field(out[:j], weight, Qf.shape[1], rng)
    return out.reshape(rank, *shape)


def equilibrium_factors(rho0: np.ndarray, u0, xgrid: SpatialGrid,
                        vgrid: VelocityGrid):
    """The six separated factor pairs of the small-velocity Maxwellian
    expansion: spatial {rho(1-u^2/2), rho*u1, rho*u2, rho*u1^2/2,
    rho*u1*u2, rho*u2^2/2} against velocity M(v)*{1, v1, v2, v1^2,
    v1*v2, v2^2}."""
    u1, u2 = u0
    usq = u1 * u1 + u2 * u2
    fx = np.stack([
        rho0 * (1.0 - 0.5 * usq),
        rho0 * u1,
        rho0 * u2,
        rho0 * 0.5 * u1 * u1,
        rho0 * u1 * u2,
        rho0 * 0.5 * u2 * u2,
    ])
    m = vgrid.maxwellian
    v1, v2 = vgrid.v1, vgrid.v2
    fv = np.stack([m, m * v1, m * v2, m * v1 * v1, m * v1 * v2, m * v2 * v2])
    return fx, fv


def init_equilibrium(rho0: np.ndarray, u0, rank: int, xgrid: SpatialGrid,
                     vgrid: VelocityGrid,
                     rng: np.random.Generator | None = None) -> LowRankState:
    """Low-rank state for the local equilibrium with moments (rho0, rho0*u0).

    Builds the six expansion factor pairs, orthonormalizes both sides, and
    pads with random orthonormal complements (zero S rows/columns) up to the
    requested rank.
    """
    if rank < 6:
        raise ValueError(f"rank must be at least 6, got {rank}")
    if np.any(rho0 <= 0.0):
        raise ValueError("density must be positive")
    xgrid.check(rho0)
    if rng is None:
        rng = np.random.default_rng(0)
    fx, fv = equilibrium_factors(rho0, u0, xgrid, vgrid)
    Qx, Rx = qr_orthonormalize(fx, xgrid.weight, rng)
    Qv, Rv = qr_orthonormalize(fv, vgrid.weight, rng)
    S = np.zeros((rank, rank))
    S[:6, :6] = Rx @ Rv.T
    X = extend_basis(Qx, rank, xgrid.weight, rng)
    V = extend_basis(Qv, rank, vgrid.weight, rng)
    return LowRankState(X, S, V, xgrid, vgrid)


def velocity_moment_weights(V: np.ndarray, vgrid: VelocityGrid):
    """(V_j, 1), (V_j, v1), (V_j, v2) for every velocity basis field."""
    w = vgrid.weight
    kappa = w * np.sum(V, axis=(-2, -1))
    mu1 = w * np.tensordot(V, vgrid.v1, axes=([-2, -1], [0, 1]))
    mu2 = w * np.tensordot(V, vgrid.v2, axes=([-2, -1], [0, 1]))
    return kappa, mu1, mu2


def moments(state: LowRankState) -> MomentFields:
    """Density rho = int f dv and momentum rho*u = int v f dv."""
    kappa, mu1, mu2 = velocity_moment_weights(state.V, state.vgrid)
    rho = np.tensordot(state.S @ kappa, state.X, axes=(0, 0))
    m1 = np.tensordot(state.S @ mu1, state.X, axes=(0, 0))
    m2 = np.tensordot(state.S @ mu2, state.X, axes=(0, 0))
    if np.any(rho <= 0.0):
        raise FloatingPointError("non-positive density; cannot derive velocity")
    return MomentFields(rho, (m1, m2), (m1 / rho, m2 / rho))


def total_mass(state: LowRankState) -> float:
    return state.xgrid.integral(moments(state).rho)


def total_momentum(state: LowRankState) -> tuple[float, float]:
    mom = moments(state).mom
    return (state.xgrid.integral(mom[0]), state.xgrid.integral(mom[1]))


def evaluate_f(state: LowRankState, ix: tuple[int, int],
               iv: tuple[int, int]) -> float:
    """Reconstruct f at one (spatial node, velocity node) pair."""
    xcol = state.X[:, ix[0], ix[1]]
    vcol = state.V[:, iv[0], iv[1]]
    return float(xcol @ state.S @ vcol)
