"""Uniform triangulation of an axis-aligned rectangle.

Every grid cell is split by the diagonal running from its lower-left to its
upper-right corner, which keeps the triangulation invariant under point
reflection through the domain center. Node numbering is row-major with the
x1 index running fastest, so outputs are byte-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Rect = tuple[float, float, float, float]  # (xmin, xmax, ymin, ymax)


@dataclass(frozen=True, eq=False)
class StructuredTriMesh:
    """Immutable triangle mesh on a rectangle with M square cells per direction.

    Attributes:
        bounds: (xmin, xmax, ymin, ymax).
        segments: cells per direction.
        nodes: (n_nodes, 2) coordinates, n_nodes = (M+1)**2.
        elements: (n_elements, 3) node triples, counter-clockwise,
            n_elements = 2*M**2.
        boundary_sides: node index arrays for the left, right, bottom and
            top sides; corner nodes appear in both adjacent sides.
    """

    bounds: Rect
    segments: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_sides: dict[str, np.ndarray]
    h: float
    # per-element geometry, precomputed once (read-only)
    areas: np.ndarray = field(repr=False)          # (n_elements,)
    basis_gradients: np.ndarray = field(repr=False)  # (n_elements, 3, 2)
    # COO index template shared by all stiffness-style assemblies
    coo_rows: np.ndarray = field(repr=False)
    coo_cols: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def center(self) -> np.ndarray:
        xmin, xmax, ymin, ymax = self.bounds
        return np.array([0.5 * (xmin + xmax), 0.5 * (ymin + ymax)])

    def dirichlet_nodes(self, component: int) -> np.ndarray:
        """Nodes where velocity component `component` is pinned to zero.

        The wall-normal component vanishes on walls orthogonal to it:
        u1 on the left/right sides, u2 on the bottom/top sides. Corners
        belong to two walls and so constrain both components.
        """
        if component == 0:
            ids = np.concatenate([self.boundary_sides["left"], self.boundary_sides["right"]])
        elif component == 1:
            ids = np.concatenate([self.boundary_sides["bottom"], self.boundary_sides["top"]])
        else:
            raise IndexError(f"component must be 0 or 1, got {component}")
        return np.unique(ids)

    def reflected_nodes(self) -> np.ndarray:
        """Index permutation mapping each node to its point reflection x -> -x
        about the domain center."""
        m1 = self.segments + 1
        i = np.arange(self.n_nodes) % m1
        j = np.arange(self.n_nodes) // m1
        return (self.segments - j) * m1 + (self.segments - i)


def triangle_geometry(coords: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed area and the three constant P1 basis gradients of one triangle.

    coords: (3, 2) vertex coordinates. The gradients sum to the zero vector.
    """
    (x0, y0), (x1, y1), (x2, y2) = coords
    twice_area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    grads = np.array([
        [y1 - y2, x2 - x1],
        [y2 - y0, x0 - x2],
        [y0 - y1, x1 - x0],
    ]) / twice_area
    return 0.5 * twice_area, grads


def build_mesh(bounds: Rect, segments: int) -> StructuredTriMesh:
    """Build the uniform triangulation with `segments` square cells per direction."""
    xmin, xmax, ymin, ymax = (float(v) for v in bounds)
    m = int(segments)
    if m < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate rectangle {bounds}")
    hx = (xmax - xmin) / m
    hy = (ymax - ymin) / m
    if abs(hx - hy) > 1e-12 * max(hx, hy):
        raise ValueError(f"cells must be square: hx={hx} != hy={hy}")

    m1 = m + 1
    # convex-combination form: endpoints exact, and for a centered domain the
    # coordinates are bitwise antisymmetric, which keeps every operator
    # exactly reflection-equivariant on the symmetric test problem
    idx = np.arange(m1)
    xs = ((m - idx) * xmin + idx * xmax) / m
    ys = ((m - idx) * ymin + idx * ymax) / m
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    ll = (jj * m1 + ii).ravel()
    lr, ul = ll + 1, ll + m1
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    elements = np.empty((2 * m * m, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper

    node_idx = np.arange(m1 * m1)
    col = node_idx % m1
    row = node_idx // m1
    boundary_sides = {
        "left": node_idx[col == 0],
        "right": node_idx[col == m],
        "bottom": node_idx[row == 0],
        "top": node_idx[row == m],
    }

    p0 = nodes[elements[:, 0]]
    p1 = nodes[elements[:, 1]]
    p2 = nodes[elements[:, 2]]
    twice_area = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) \
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    areas = 0.5 * twice_area
    grads = np.empty((elements.shape[0], 3, 2))
    grads[:, 0, 0] = p1[:, 1] - p2[:, 1]
    grads[:, 0, 1] = p2[:, 0] - p1[:, 0]
    grads[:, 1, 0] = p2[:, 1] - p0[:, 1]
    grads[:, 1, 1] = p0[:, 0] - p2[:, 0]
    grads[:, 2, 0] = p0[:, 1] - p1[:, 1]
    grads[:, 2, 1] = p1[:, 0] - p0[:, 0]
    grads /= twice_area[:, None, None]

    rows = np.repeat(elements, 3, axis=1).ravel()
    cols = np.tile(elements, (1, 3)).ravel()

    mesh = StructuredTriMesh(
        bounds=(xmin, xmax, ymin, ymax),
        segments=m,
        nodes=nodes,
        elements=elements,
        boundary_sides=boundary_sides,
        h=hx,
        areas=areas,
        basis_gradients=grads,
        coo_rows=rows,
        coo_cols=cols,
    )
    for arr in (nodes, elements, areas, grads, rows, cols):
        arr.setflags(write=False)
    return mesh


def element_geometry(mesh: StructuredTriMesh, e: int) -> tuple[float, np.ndarray]:
    """Area and P1 basis gradients of element `e`."""
    if not 0 <= e < mesh.n_elements:
        raise IndexError(f"element index {e} out of range [0, {mesh.n_elements})")
    return float(mesh.areas[e]), mesh.basis_gradients[e]
