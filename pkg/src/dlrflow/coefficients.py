"""Projector-splitting coefficients.

Fast paths build the collision-related quantities c3, d3, e from the
separated monomial expansion of the local equilibrium (cost O(r^2 n^2));
the *_direct functions are deliberately slow quadrature references used by
the test suite and are kept independent of the fast paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid, VelocityGrid, gradient_x


@dataclass
class MaxwellianPairs:
    """Separated factors of h(x,v) = f_eq/rho truncated at third order in u:
    h = prefactor(v) * sum_k hX_k(x) hV_k(v)."""

    hX: np.ndarray  # (6, n, n)
    hV: np.ndarray  # (6, m, m)
    prefactor: np.ndarray  # (m, m) normalized Gaussian weight


@dataclass
class CoefficientSet:
    """Substep coefficients for one splitting phase."""

    c1: np.ndarray  # (2, r, r) symmetric, per spatial direction
    d1: np.ndarray  # (2, r, r) antisymmetric, per spatial direction
    I1: np.ndarray  # (r, 6)
    I2: np.ndarray | None = None  # (r, 6), moment dependent
    c3: np.ndarray | None = None  # (r, n, n), moment dependent
    d3: np.ndarray | None = None  # (r, m, m), moment dependent
    e: np.ndarray | None = None  # (r, r), moment dependent


def velocity_monomials(vgrid: VelocityGrid) -> np.ndarray:
    """The six velocity monomials {1, v1, v2, v1^2, v1 v2, v2^2}."""
    v1, v2 = vgrid.v1, vgrid.v2
    one = np.ones_like(v1)
    return np.stack([one, v1, v2, v1 * v1, v1 * v2, v2 * v2])


def spatial_monomials(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """The matching spatial factors {1-u^2/2, u1, u2, u1^2/2, u1 u2, u2^2/2}."""
    usq = u1 * u1 + u2 * u2
    return np.stack([
        1.0 - 0.5 * usq,
        u1,
        u2,
        0.5 * u1 * u1,
        u1 * u2,
        0.5 * u2 * u2,
    ])


def maxwellian_pairs(u1: np.ndarray, u2: np.ndarray,
                     vgrid: VelocityGrid) -> MaxwellianPairs:
    if u1.shape != u2.shape:
        raise ValueError("velocity components have mismatched shapes")
    return MaxwellianPairs(spatial_monomials(u1, u2), velocity_monomials(vgrid),
                           vgrid.maxwellian)


def compute_c1(V: np.ndarray, vgrid: VelocityGrid) -> np.ndarray:
    """c1[a][j,l] = (v_a V_j, V_l); symmetrized after quadrature."""
    r = V.shape[0]
    Vf = V.reshape(r, -1)
    out = np.empty((2, r, r))
    for a, va in enumerate((vgrid.v1, vgrid.v2)):
        c = vgrid.weight * ((V * va).reshape(r, -1) @ Vf.T)
        out[a] = 0.5 * (c + c.T)
    return out


def compute_d1(X: np.ndarray, xgrid: SpatialGrid, method: str) -> np.ndarray:
    """d1[a][i,l] = (X_i, d/dx_a X_l); antisymmetrized to restore the exact
    skew-adjointness of the periodic derivative."""
    r = X.shape[0]
    Xf = X.reshape(r, -1)
    g1, g2 = gradient_x(X, xgrid, method)
    out = np.empty((2, r, r))
    for a, g in enumerate((g1, g2)):
        d = xgrid.weight * (Xf @ g.reshape(r, -1).T)
        out[a] = 0.5 * (d - d.T)
    return out


def compute_I1(V: np.ndarray, vgrid: VelocityGrid) -> np.ndarray:
    """I1[j,k] = (V_j, prefactor * hV_k)."""
    r = V.shape[0]
    weighted = (velocity_monomials(vgrid) * vgrid.maxwellian).reshape(6, -1)
    return vgrid.weight * (V.reshape(r, -1) @ weighted.T)


def compute_c3(pairs: MaxwellianPairs, I1: np.ndarray) -> np.ndarray:
    """c3_j(x) = sum_k hX_k(x) I1[j,k]."""
    return np.tensordot(I1, pairs.hX, axes=(1, 0))


def compute_I2(X: np.ndarray, rho: np.ndarray,
               pairs: MaxwellianPairs, xgrid: SpatialGrid) -> np.ndarray:
    """I2[i,k] = (X_i, rho * hX_k)."""
    r = X.shape[0]
    weighted = (pairs.hX * rho).reshape(6, -1)
    return xgrid.weight * (X.reshape(r, -1) @ weighted.T)


def compute_d3(pairs: MaxwellianPairs, I2: np.ndarray) -> np.ndarray:
    """d3_i(v) = prefactor(v) * sum_k hV_k(v) I2[i,k]."""
    return np.tensordot(I2, pairs.hV * pairs.prefactor, axes=(1, 0))


def compute_e(X: np.ndarray, rho: np.ndarray, c3: np.ndarray,
              xgrid: SpatialGrid) -> np.ndarray:
    """e[i,j] = (X_i, rho * c3_j)."""
    r = X.shape[0]
    return xgrid.weight * (X.reshape(r, -1) @ (c3 * rho).reshape(r, -1).T)


# ----------------------------------------------------------------------------
# Direct quadrature references (test oracles). Slow on purpose: explicit
# loops over nodes, no reuse of the monomial decomposition.
# ----------------------------------------------------------------------------

def truncated_equilibrium_column(u1: float, u2: float,
                                 vgrid: VelocityGrid) -> np.ndarray:
    """h(x, .) on the velocity grid for one spatial node, third-order form."""
    vu = vgrid.v1 * u1 + vgrid.v2 * u2
    usq = u1 * u1 + u2 * u2
    return vgrid.maxwellian * (1.0 + vu + 0.5 * vu * vu - 0.5 * usq)


def exact_equilibrium_column(u1: float, u2: float,
                             vgrid: VelocityGrid) -> np.ndarray:
    """Shifted Maxwellian exp(-(v-u)^2/2)/(2 pi) without truncation."""
    dv1 = vgrid.v1 - u1
    dv2 = vgrid.v2 - u2
    return np.exp(-0.5 * (dv1 * dv1 + dv2 * dv2)) / (2.0 * np.pi)


def c1_direct(V: np.ndarray, vgrid: VelocityGrid) -> np.ndarray:
    r = V.shape[0]
    out = np.zeros((2, r, r))
    for a, va in enumerate((vgrid.v1, vgrid.v2)):
        for j in range(r):
            for l in range(r):
                out[a, j, l] = vgrid.weight * float(np.sum(va * V[j] * V[l]))
    return out


def d1_direct(X: np.ndarray, xgrid: SpatialGrid, method: str) -> np.ndarray:
    r = X.shape[0]
    out = np.zeros((2, r, r))
    for i in range(r):
        for l in range(r):
            g1, g2 = gradient_x(X[l], xgrid, method)
            out[0, i, l] = xgrid.weight * float(np.sum(X[i] * g1))
            out[1, i, l] = xgrid.weight * float(np.sum(X[i] * g2))
    return out


def c3_direct(V: np.ndarray, u1: np.ndarray, u2: np.ndarray,
              xgrid: SpatialGrid, vgrid: VelocityGrid,
              exact_maxwellian: bool = False) -> np.ndarray:
    """c3_j(x) = int V_j h(x,v) dv by per-node quadrature."""
    r = V.shape[0]
    n = xgrid.n
    column = exact_equilibrium_column if exact_maxwellian else truncated_equilibrium_column
    out = np.zeros((r, n, n))
    for a in range(n):
        for b in range(n):
            h = column(float(u1[a, b]), float(u2[a, b]), vgrid)
            for j in range(r):
                out[j, a, b] = vgrid.weight * float(np.sum(V[j] * h))
    return out


def d3_direct(X: np.ndarray, rho: np.ndarray, u1: np.ndarray, u2: np.ndarray,
              xgrid: SpatialGrid, vgrid: VelocityGrid,
              exact_maxwellian: bool = False) -> np.ndarray:
    """d3_i(v) = int X_i rho h(x,v) dx by per-node quadrature."""
    r = X.shape[0]
    m = vgrid.n
    column = exact_equilibrium_column if exact_maxwellian else truncated_equilibrium_column
    out = np.zeros((r, m, m))
    n = xgrid.n
    for a in range(n):
        for b in range(n):
            h = column(float(u1[a, b]), float(u2[a, b]), vgrid)
            contrib = xgrid.weight * rho[a, b]
            for i in range(r):
                out[i] += (X[i, a, b] * contrib) * h
    return out


def e_direct(X: np.ndarray, V: np.ndarray, rho: np.ndarray,
             u1: np.ndarray, u2: np.ndarray,
             xgrid: SpatialGrid, vgrid: VelocityGrid,
             exact_maxwellian: bool = False) -> np.ndarray:
    """e[i,j] = int X_i rho V_j h d(x,v) by full phase-space quadrature."""
    r = X.shape[0]
    column = exact_equilibrium_column if exact_maxwellian else truncated_equilibrium_column
    out = np.zeros((r, r))
    n = xgrid.n
    for a in range(n):
        for b in range(n):
            h = column(float(u1[a, b]), float(u2[a, b]), vgrid)
            proj = vgrid.weight * np.array([float(np.sum(V[j] * h)) for j in range(r)])
            out += np.outer(X[:, a, b] * (xgrid.weight * rho[a, b]), proj)
    return out
