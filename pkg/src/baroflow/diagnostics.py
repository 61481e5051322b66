"""Monitored quantities: mass, momentum and boundary pressure flux, total
mechanical energy, density extrema, section profiles, symmetry error."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import assembly
from .eos import BarotropicEOS
from .mesh import StructuredTriMesh
from .state import State


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: np.ndarray        # (2,)
    boundary_flux: np.ndarray   # (2,) outward pressure flux integral
    energy: float
    rho_center: float
    rho_max: float
    rho_min: float
    rho_min_quad: float
    symmetry_err: float
    iterations: int = 0


def total_mass(state: State, mesh: StructuredTriMesh) -> float:
    """Integral of the density, via mass-matrix row sums (exact for P1)."""
    mass = assembly.mass_matrix(mesh)
    return float((mass @ state.rho).sum())


def _boundary_edges(mesh: StructuredTriMesh):
    """Per side: (start nodes, end nodes, outward normal)."""
    m = mesh.segments
    sides = mesh.boundary_sides
    def ordered(ids):
        key = np.lexsort((mesh.nodes[ids, 0], mesh.nodes[ids, 1]))
        return ids[key]
    left = ordered(sides["left"])
    right = ordered(sides["right"])
    bottom = np.sort(sides["bottom"])
    top = np.sort(sides["top"])
    return [
        (left[:-1], left[1:], np.array([-1.0, 0.0])),
        (right[:-1], right[1:], np.array([1.0, 0.0])),
        (bottom[:-1], bottom[1:], np.array([0.0, -1.0])),
        (top[:-1], top[1:], np.array([0.0, 1.0])),
    ]


def boundary_pressure_flux(state: State, mesh: StructuredTriMesh,
                           eos: BarotropicEOS) -> np.ndarray:
    """Outward flux integral of p(rho) n over the walls, 3-point Gauss per edge."""
    flux = np.zeros(2)
    for start, end, normal in _boundary_edges(mesh):
        ra = state.rho[start]
        rb = state.rho[end]
        total = 0.0
        for s, w in zip(assembly.EDGE_POINTS, assembly.EDGE_WEIGHTS):
            rho_s = (1.0 - s) * ra + s * rb
            total += w * float(eos.pressure(rho_s, where="boundary edge").sum())
        flux += normal * (total * mesh.h)
    return flux


def total_momentum_and_flux(state: State, mesh: StructuredTriMesh,
                            eos: BarotropicEOS) -> tuple[np.ndarray, np.ndarray]:
    """(integral of rho u, outward boundary pressure flux)."""
    rho_q = assembly.at_quadrature_points(mesh, state.rho)
    mom = np.empty(2)
    for c in range(2):
        u_q = assembly.at_quadrature_points(mesh, state.u[c])
        cell = np.einsum("q,eq->e", assembly.DEFAULT_RULE.weights, rho_q * u_q)
        mom[c] = float(np.dot(cell, mesh.areas))
    return mom, boundary_pressure_flux(state, mesh, eos)


def total_energy(state: State, mesh: StructuredTriMesh, eos: BarotropicEOS) -> float:
    """Integral of 0.5 rho |u|^2 + Pi(rho), with the assembly quadrature rule."""
    rho_q = assembly.at_quadrature_points(mesh, state.rho)
    u1_q = assembly.at_quadrature_points(mesh, state.u[0])
    u2_q = assembly.at_quadrature_points(mesh, state.u[1])
    dens = 0.5 * rho_q * (u1_q ** 2 + u2_q ** 2) \
        + eos.potential(rho_q, where="quadrature point")
    cell = np.einsum("q,eq->e", assembly.DEFAULT_RULE.weights, dens)
    return float(np.dot(cell, mesh.areas))


def min_quadrature_density(state: State, mesh: StructuredTriMesh) -> float:
    return float(assembly.at_quadrature_points(mesh, state.rho).min())


def evaluate_p1(mesh: StructuredTriMesh, nodal: np.ndarray,
                points: np.ndarray) -> np.ndarray:
    """P1 interpolation of a nodal field at arbitrary points inside the domain."""
    xmin, _, ymin, _ = mesh.bounds
    m = mesh.segments
    pts = np.atleast_2d(points)
    fx = (pts[:, 0] - xmin) / mesh.h
    fy = (pts[:, 1] - ymin) / mesh.h
    i = np.clip(np.floor(fx).astype(int), 0, m - 1)
    j = np.clip(np.floor(fy).astype(int), 0, m - 1)
    xi = fx - i
    eta = fy - j
    ll = j * (m + 1) + i
    lower = eta <= xi  # below the lower-left to upper-right diagonal
    out = np.empty(len(pts))
    # lower triangle (ll, lr, ur): value = v_ll (1 - xi) + v_lr (xi - eta) + v_ur eta
    v_ll, v_lr = nodal[ll], nodal[ll + 1]
    v_ul, v_ur = nodal[ll + m + 1], nodal[ll + m + 2]
    out[lower] = (v_ll * (1 - xi) + v_lr * (xi - eta) + v_ur * eta)[lower]
    # upper triangle (ll, ur, ul): value = v_ll (1 - eta) + v_ur xi + v_ul (eta - xi)
    out[~lower] = (v_ll * (1 - eta) + v_ur * xi + v_ul * (eta - xi))[~lower]
    return out if points.ndim > 1 else out[:1]


def section_profile(state: State, mesh: StructuredTriMesh, y: float = 0.0,
                    n_samples: int | None = None) -> np.ndarray:
    """Density along the horizontal line x2 = y, returned as (n, 2) of (x1, rho).

    Default sampling puts one sample at every point where the line crosses a
    mesh edge, so the piecewise-linear restriction is captured exactly.
    """
    xmin, xmax, ymin, ymax = mesh.bounds
    if not ymin <= y <= ymax:
        raise ValueError(f"section line x2={y} outside domain [{ymin}, {ymax}]")
    if n_samples is not None:
        xs = np.linspace(xmin, xmax, n_samples)
    else:
        grid = xmin + mesh.h * np.arange(mesh.segments + 1)
        fy = (y - ymin) / mesh.h
        j = int(np.clip(np.floor(fy), 0, mesh.segments - 1))
        off = y - (ymin + j * mesh.h)
        if off > 1e-12 * mesh.h and off < mesh.h * (1 - 1e-12):
            diag = grid[:-1] + off  # diagonal crossings in row j
            xs = np.unique(np.concatenate([grid, diag]))
        else:
            xs = grid
    pts = np.column_stack([xs, np.full_like(xs, y)])
    vals = evaluate_p1(mesh, state.rho, pts)
    return np.column_stack([xs, vals])


def symmetry_error(state: State, mesh: StructuredTriMesh) -> float:
    """Max density mismatch over node pairs mapped by x -> -x about the center."""
    perm = mesh.reflected_nodes()
    return float(np.max(np.abs(state.rho - state.rho[perm])))


def density_center(state: State, mesh: StructuredTriMesh) -> float:
    return float(evaluate_p1(mesh, state.rho, mesh.center[None, :])[0])


def compute_record(state: State, mesh: StructuredTriMesh, eos: BarotropicEOS,
                   iterations: int = 0) -> DiagnosticsRecord:
    mom, flux = total_momentum_and_flux(state, mesh, eos)
    return DiagnosticsRecord(
        t=state.t,
        mass=total_mass(state, mesh),
        momentum=mom,
        boundary_flux=flux,
        energy=total_energy(state, mesh, eos),
        rho_center=density_center(state, mesh),
        rho_max=float(state.rho.max()),
        rho_min=float(state.rho.min()),
        rho_min_quad=min_quadrature_density(state, mesh),
        symmetry_err=symmetry_error(state, mesh),
        iterations=iterations,
    )
