"""Finite-element assembly of the discrete operators on P1 triangles.

All bilinear forms are integrated element by element with a six-point
triangle rule that is exact through polynomial degree four, so the mass,
advection and density-weighted forms (products of up to three P1 factors
plus one constant gradient) are integrated exactly; only the power-law
pressure terms are approximate. Nonlinear coefficients are evaluated at
quadrature points from the P1 interpolants. Accumulation runs in ascending
element order, which makes every matrix bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .eos import BarotropicEOS
from .mesh import StructuredTriMesh


def _degree4_rule() -> tuple[np.ndarray, np.ndarray]:
    # two three-fold symmetric orbits (Cowper's closed form)
    s10 = math.sqrt(10.0)
    sb = math.sqrt(38.0 - 44.0 * math.sqrt(2.0 / 5.0))
    b1 = (8.0 - s10 + sb) / 18.0
    b2 = (8.0 - s10 - sb) / 18.0
    sw = math.sqrt(213125.0 - 53320.0 * s10)
    w1 = (620.0 + sw) / 3720.0
    w2 = (620.0 - sw) / 3720.0
    points = np.array([
        [1 - 2 * b1, b1, b1], [b1, 1 - 2 * b1, b1], [b1, b1, 1 - 2 * b1],
        [1 - 2 * b2, b2, b2], [b2, 1 - 2 * b2, b2], [b2, b2, 1 - 2 * b2],
    ])
    weights = np.array([w1, w1, w1, w2, w2, w2])
    return points, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Symmetric triangle rule in barycentric coordinates.

    Weights are normalized to sum to one and get scaled by the element area
    on use.
    """

    points: np.ndarray   # (n_q, 3) barycentric coordinates
    weights: np.ndarray  # (n_q,) positive, summing to 1
    degree: int

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")


_POINTS, _WEIGHTS = _degree4_rule()
DEFAULT_RULE = QuadratureRule(points=_POINTS, weights=_WEIGHTS, degree=4)

# contraction tables reused by every assembly call; _WBB is built from the
# commutative pair product so it is bitwise symmetric in (i, k)
_WB = _WEIGHTS[:, None] * _POINTS                                  # (q, i)
_WBB = (_WEIGHTS[:, None, None]
        * (_POINTS[:, :, None] * _POINTS[:, None, :])).transpose(1, 2, 0)  # (i, k, q)
_WB_T = np.ascontiguousarray(_WB.T)                                # (i, q)

# 3-point Gauss rule on [0, 1], exact through degree 5 (boundary edges)
_EDGE_OFF = math.sqrt(15.0) / 10.0
EDGE_POINTS = np.array([0.5 - _EDGE_OFF, 0.5, 0.5 + _EDGE_OFF])
EDGE_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


def at_quadrature_points(mesh: StructuredTriMesh, nodal: np.ndarray) -> np.ndarray:
    """Values of a P1 nodal field at the quadrature points, shape (n_el, n_q)."""
    return nodal[mesh.elements] @ _POINTS.T


def element_gradients(mesh: StructuredTriMesh, nodal: np.ndarray) -> np.ndarray:
    """Constant per-element gradient of a P1 nodal field, shape (n_el, 2)."""
    vals = nodal[mesh.elements]  # (n_el, 3)
    return np.einsum("ek,ekc->ec", vals, mesh.basis_gradients)


def quadrature_coords(mesh: StructuredTriMesh) -> np.ndarray:
    """Physical coordinates of all quadrature points, shape (n_el, n_q, 2)."""
    corners = mesh.nodes[mesh.elements]  # (n_el, 3, 2)
    return np.einsum("qk,ekc->eqc", _POINTS, corners)


def _check_field(mesh: StructuredTriMesh, nodal: np.ndarray, name: str):
    if nodal.shape != (mesh.n_nodes,):
        raise ValueError(f"{name} has shape {nodal.shape}, expected ({mesh.n_nodes},)")


def _assemble_bilinear(mesh: StructuredTriMesh,
                       grad_coeff: np.ndarray | None,
                       val_coeff: np.ndarray | None) -> sp.csr_array:
    """Matrix with entries int [sum_c G_c dphi_k/dx_c + V phi_k] psi_i dx.

    grad_coeff: (2, n_el, n_q) or None; val_coeff: (n_el, n_q) or None.
    """
    grads = mesh.basis_gradients
    data = None
    if grad_coeff is not None:
        # s[e, q, k] = sum_c G_c(e, q) dphi_k/dx_c
        s = grad_coeff[0][:, :, None] * grads[:, None, :, 0] \
            + grad_coeff[1][:, :, None] * grads[:, None, :, 1]
        data = np.matmul(_WB_T[None, :, :], s)
    if val_coeff is not None:
        contrib = np.tensordot(val_coeff, _WBB, axes=([1], [2]))
        data = contrib if data is None else data + contrib
    data *= mesh.areas[:, None, None]
    mat = sp.coo_array((data.ravel(), (mesh.coo_rows, mesh.coo_cols)),
                       shape=(mesh.n_nodes, mesh.n_nodes))
    return mat.tocsr()


def _assemble_linear(mesh: StructuredTriMesh, val_coeff: np.ndarray) -> np.ndarray:
    """Vector with entries int V psi_i dx; val_coeff has shape (n_el, n_q)."""
    cell = (val_coeff @ _WB) * mesh.areas[:, None]
    return np.bincount(mesh.elements.ravel(), weights=cell.ravel(),
                       minlength=mesh.n_nodes)


def assemble_mass(mesh: StructuredTriMesh) -> sp.csr_array:
    """Mass matrix: entry (i, j) = int phi_j psi_i dx. Symmetric positive definite."""
    return assemble_weighted_mass(mesh, np.ones(mesh.n_nodes))


@lru_cache(maxsize=8)
def mass_matrix(mesh: StructuredTriMesh) -> sp.csr_array:
    """Cached mass matrix; meshes are immutable so reuse is safe."""
    return assemble_mass(mesh)


def assemble_weighted_mass(mesh: StructuredTriMesh, weight: np.ndarray) -> sp.csr_array:
    """Density-weighted mass matrix: entry (i, j) = int w phi_j psi_i dx.

    The weight is interpolated to quadrature points; positive definite
    whenever the weight is positive.
    """
    _check_field(mesh, weight, "weight")
    return _assemble_bilinear(mesh, None, at_quadrature_points(mesh, weight))


def assemble_advection(mesh: StructuredTriMesh, u: np.ndarray) -> sp.csr_array:
    """Divergence-form advection: entry (i, j) = int div(u phi_j) psi_i dx.

    When the nodal normal velocity vanishes on the boundary, every column
    sums to zero, which is what makes the density update conservative.
    """
    return assemble_weighted_advection(mesh, u, np.ones(mesh.n_nodes))


def assemble_weighted_advection(mesh: StructuredTriMesh, u: np.ndarray,
                                weight: np.ndarray) -> sp.csr_array:
    """Advection of a weighted unknown: entry (i, j) = int div(u w phi_j) psi_i dx."""
    if u.shape != (2, mesh.n_nodes):
        raise ValueError(f"velocity has shape {u.shape}, expected (2, {mesh.n_nodes})")
    _check_field(mesh, weight, "weight")
    w_q = at_quadrature_points(mesh, weight)
    grad_w = element_gradients(mesh, weight)
    u_q = np.stack([at_quadrature_points(mesh, u[0]), at_quadrature_points(mesh, u[1])])
    div_u = element_gradients(mesh, u[0])[:, 0] + element_gradients(mesh, u[1])[:, 1]
    # div(u w phi_k) = w u . grad phi_k + phi_k (u . grad w + w div u)
    grad_coeff = u_q * w_q[None, :, :]
    val_coeff = (u_q[0] * grad_w[:, 0, None] + u_q[1] * grad_w[:, 1, None]
                 + w_q * div_u[:, None])
    return _assemble_bilinear(mesh, grad_coeff, val_coeff)


def assemble_product_derivative(mesh: StructuredTriMesh, w_q: np.ndarray,
                                grad_w: np.ndarray, component: int) -> sp.csr_array:
    """Sensitivity block: entry (i, k) = int d(phi_k w)/dx_c psi_i dx.

    The product field w is supplied by its quadrature-point values (n_el, n_q)
    and per-element, per-point derivative along x_c (n_el, n_q); the latter is
    not constant when w is itself a product of P1 factors.
    """
    grad_coeff = np.zeros((2, mesh.n_elements, w_q.shape[1]))
    grad_coeff[component] = w_q
    return _assemble_bilinear(mesh, grad_coeff, grad_w)


def assemble_pressure_gradient(mesh: StructuredTriMesh, rho: np.ndarray,
                               eos: BarotropicEOS) -> tuple[np.ndarray, np.ndarray]:
    """Load vectors g_c with entries int p'(rho) drho/dx_c psi_i dx, c = 1, 2.

    Uses the chain-rule volume form (no integration by parts), so no boundary
    pressure term appears in the discrete momentum residual.
    """
    _check_field(mesh, rho, "rho")
    rho_q = at_quadrature_points(mesh, rho)
    dp, _ = eos.pressure_derivatives(rho_q, where="quadrature point")
    grad_rho = element_gradients(mesh, rho)
    g1 = _assemble_linear(mesh, dp * grad_rho[:, 0, None])
    g2 = _assemble_linear(mesh, dp * grad_rho[:, 1, None])
    return g1, g2


def assemble_pressure_jacobian(mesh: StructuredTriMesh, rho: np.ndarray,
                               eos: BarotropicEOS, component: int) -> sp.csr_array:
    """Derivative of the pressure load with respect to nodal density:
    entry (i, k) = int [p''(rho) phi_k drho/dx_c + p'(rho) dphi_k/dx_c] psi_i dx.
    """
    _check_field(mesh, rho, "rho")
    rho_q = at_quadrature_points(mesh, rho)
    dp, d2p = eos.pressure_derivatives(rho_q, where="quadrature point")
    grad_rho = element_gradients(mesh, rho)
    grad_coeff = np.zeros((2, mesh.n_elements, rho_q.shape[1]))
    grad_coeff[component] = dp
    val_coeff = d2p * grad_rho[:, component, None]
    return _assemble_bilinear(mesh, grad_coeff, val_coeff)


def project_rhs(mesh: StructuredTriMesh, f) -> np.ndarray:
    """Load vector with entries int f psi_i dx for a pointwise-evaluable f."""
    pts = quadrature_coords(mesh)
    vals = np.asarray(f(pts.reshape(-1, 2)), dtype=float).reshape(mesh.n_elements, -1)
    return _assemble_linear(mesh, vals)


def l2_project(mesh: StructuredTriMesh, f) -> np.ndarray:
    """L2 projection of a scalar function onto the P1 space.

    Solves (mass matrix) c = [int f psi_i dx]; reproduces any function already
    in the space and preserves the integral of f up to quadrature error.
    """
    from .linsolve import solve

    x, _ = solve(mass_matrix(mesh), project_rhs(mesh, f))
    return x
