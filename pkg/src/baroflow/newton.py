"""Newton's method for the backward-Euler step of the coupled system.

The unknown vector stacks the nodal density and the two velocity components.
The Jacobian is assembled analytically by differentiating the quadrature-point
residual with respect to the nodal unknowns; wall rows carry the velocity
constraints as identity rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import assembly
from .eos import BarotropicEOS, PositivityError
from .linsolve import solve
from .mesh import StructuredTriMesh
from .state import State, state_from_stacked


class NewtonDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12          # relative-increment stopping threshold
    max_iter: int = 10
    divergence_factor: float = 1e6  # abort if the residual grows past this

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class NewtonHistory:
    """Per-iteration record of one nonlinear solve.

    increment_errors[k-1] is ||delta_k|| / ||x_k|| over the stacked unknowns
    and drives the stopping test. residual_norms[k] is ||R(x_k)||, starting
    from the initial iterate, so it has one more entry than there were
    iterations. The reported relative error of iteration k is the residual
    reduction ||R(x_k)|| / ||R(x_0)||; its first-step decay under time-step
    refinement is what the convergence table in the run outputs shows.
    """

    increment_errors: list[float] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.increment_errors)

    @property
    def final_residual(self) -> float:
        return self.residual_norms[-1]

    @property
    def relative_errors(self) -> list[float]:
        r0 = self.residual_norms[0]
        return [r / r0 for r in self.residual_norms[1:]]


def _dirichlet_masks(mesh: StructuredTriMesh) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    for c in range(2):
        pinned = mesh.dirichlet_nodes(c)
        free = np.ones(mesh.n_nodes)
        free[pinned] = 0.0
        out.append((pinned, free))
    return out


def _check_rho_positive(mesh: StructuredTriMesh, rho: np.ndarray, label: str):
    rho_q = assembly.at_quadrature_points(mesh, rho)
    m = float(rho_q.min())
    if m <= 0.0:
        raise PositivityError("density lost positivity during nonlinear solve",
                              value=m, where=label)


def residual(x_new: State, x_old: State, tau: float, mesh: StructuredTriMesh,
             eos: BarotropicEOS) -> np.ndarray:
    """Stacked residual of the backward-Euler system at the trial state."""
    parts = _residual_parts(x_new, x_old, tau, mesh, eos)
    return parts[0]


def _residual_parts(x_new: State, x_old: State, tau: float, mesh: StructuredTriMesh,
                    eos: BarotropicEOS):
    _check_rho_positive(mesh, x_new.rho, "residual evaluation")
    mass = assembly.mass_matrix(mesh)
    adv = assembly.assemble_advection(mesh, x_new.u)
    wmass_new = assembly.assemble_weighted_mass(mesh, x_new.rho)
    wmass_old = assembly.assemble_weighted_mass(mesh, x_old.rho)
    wadv = assembly.assemble_weighted_advection(mesh, x_new.u, x_new.rho)
    g1, g2 = assembly.assemble_pressure_gradient(mesh, x_new.rho, eos)

    r_rho = mass @ (x_new.rho - x_old.rho) / tau + adv @ x_new.rho
    blocks = [r_rho]
    for c, g in enumerate((g1, g2)):
        r = (wmass_new @ x_new.u[c] - wmass_old @ x_old.u[c]) / tau \
            + wadv @ x_new.u[c] + g
        pinned = mesh.dirichlet_nodes(c)
        r[pinned] = x_new.u[c][pinned]
        blocks.append(r)
    return np.concatenate(blocks), adv, wmass_new, wadv


def jacobian(x_new: State, x_old: State, tau: float, mesh: StructuredTriMesh,
             eos: BarotropicEOS) -> sp.csr_array:
    """Analytic Jacobian of the stacked residual, ordered (rho, u1, u2)."""
    _check_rho_positive(mesh, x_new.rho, "jacobian evaluation")
    adv = assembly.assemble_advection(mesh, x_new.u)
    wmass_new = assembly.assemble_weighted_mass(mesh, x_new.rho)
    wadv = assembly.assemble_weighted_advection(mesh, x_new.u, x_new.rho)
    return _jacobian_from_parts(x_new, tau, mesh, eos, adv, wmass_new, wadv)


def _jacobian_from_parts(x_new: State, tau: float, mesh: StructuredTriMesh,
                         eos: BarotropicEOS, adv, wmass_new, wadv) -> sp.csr_array:
    mass = assembly.mass_matrix(mesh)
    rho_q = assembly.at_quadrature_points(mesh, x_new.rho)
    grad_rho = assembly.element_gradients(mesh, x_new.rho)
    u_q = [assembly.at_quadrature_points(mesh, x_new.u[c]) for c in range(2)]
    grad_u = [assembly.element_gradients(mesh, x_new.u[c]) for c in range(2)]

    j00 = mass / tau + adv
    # d(density row)/d(u_c): advect the basis function against the density
    j0c = [assembly.assemble_product_derivative(
        mesh, rho_q, np.broadcast_to(grad_rho[:, c, None], rho_q.shape), c)
        for c in range(2)]

    blocks = [[j00, j0c[0], j0c[1]], [None] * 3, [None] * 3]
    masks = _dirichlet_masks(mesh)
    for c in range(2):
        _, free = masks[c]
        scale = sp.diags_array(free)
        ident = sp.diags_array(1.0 - free)

        # momentum sensitivity to density: time-derivative weight, advected
        # product weight, and the pressure load
        j_rho = assembly.assemble_weighted_mass(mesh, x_new.u[c]) / tau \
            + assembly.assemble_weighted_advection(mesh, x_new.u, x_new.u[c]) \
            + assembly.assemble_pressure_jacobian(mesh, x_new.rho, eos, c)
        # sensitivity to the advecting velocity components
        prod_q = rho_q * u_q[c]
        diag = wmass_new / tau + wadv
        for d in range(2):
            grad_prod = rho_q * grad_u[c][:, d, None] + u_q[c] * grad_rho[:, d, None]
            sens = assembly.assemble_product_derivative(mesh, prod_q, grad_prod, d)
            j_ud = scale @ (diag + sens) + ident if d == c else scale @ sens
            blocks[c + 1][d + 1] = j_ud
        blocks[c + 1][0] = scale @ j_rho

    out = sp.block_array(blocks, format="csr")
    out.eliminate_zeros()
    return out


def _residual_scale(x_old: State, tau: float, mesh: StructuredTriMesh) -> float:
    mass = assembly.mass_matrix(mesh)
    wmass = assembly.assemble_weighted_mass(mesh, x_old.rho)
    v = np.concatenate([mass @ x_old.rho, wmass @ x_old.u[0], wmass @ x_old.u[1]])
    return float(np.linalg.norm(v)) / tau


def newton_solve(x_old: State, tau: float, mesh: StructuredTriMesh, eos: BarotropicEOS,
                 config: NewtonConfig = NewtonConfig()) -> tuple[State, NewtonHistory]:
    """Advance one backward-Euler step, starting from the previous time level."""
    if tau <= 0:
        raise ValueError(f"time step must be positive, got {tau}")
    history = NewtonHistory()
    t_new = x_old.t + tau
    x = x_old.stacked()
    norm_scale = _residual_scale(x_old, tau, mesh)

    state = state_from_stacked(x, t_new)
    r, adv, wmass, wadv = _residual_parts(state, x_old, tau, mesh, eos)
    r_norm = float(np.linalg.norm(r))
    history.residual_norms.append(r_norm)
    if r_norm <= config.tol * norm_scale:
        history.converged = True
        return State(rho=x_old.rho, u=x_old.u, t=t_new), history

    r0_norm = r_norm
    for _ in range(config.max_iter):
        jac = _jacobian_from_parts(state, tau, mesh, eos, adv, wmass, wadv)
        delta, _ = solve(jac, -r)
        x = x + delta
        state = state_from_stacked(x, t_new)
        history.increment_errors.append(
            float(np.linalg.norm(delta)) / max(float(np.linalg.norm(x)), 1e-300))

        try:
            r, adv, wmass, wadv = _residual_parts(state, x_old, tau, mesh, eos)
        except PositivityError as exc:
            raise PositivityError(
                "step rejected: density lost positivity inside Newton iteration "
                f"{history.iterations}", value=exc.value, t=t_new) from exc
        r_norm = float(np.linalg.norm(r))
        history.residual_norms.append(r_norm)
        if r_norm > config.divergence_factor * max(r0_norm, norm_scale * 1e-16):
            raise NewtonDivergenceError(
                f"residual grew from {r0_norm:.3e} to {r_norm:.3e} "
                f"after iteration {history.iterations} (t={t_new:.6g})")
        if history.increment_errors[-1] <= config.tol:
            history.converged = True
            break

    if not history.converged:
        raise NewtonDivergenceError(
            f"no convergence in {config.max_iter} iterations "
            f"(last increment {history.increment_errors[-1]:.3e}, t={t_new:.6g})")
    return state, history
