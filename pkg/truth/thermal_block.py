"""
P1 finite element truth problems.

- Thermal block: -div(mu_q grad u) = f on the unit square split into
  blocks_x x blocks_y regions, homogeneous Dirichlet boundary
- 1D Poisson analogue on (0, 1)

Matrices are assembled element-wise into COO triplets and summed on
conversion to CSR.
"""

import logging

import numpy as np
import scipy.sparse as sp

from affine.coefficients import CoefficientFunction
from affine.operator import AffineOperator
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected
from truth.problem import MeshInfo, TruthProblem

logger = logging.getLogger(__name__)


def _structured_triangles(cells: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Structured triangulation of the unit square.

    Returns:
        Tuple of (node coordinates (n_nodes, 2), triangles (n_tri, 3), cell
        index (i, j) of each triangle as an (n_tri, 2) array)
    """
    h = 1.0 / cells
    ticks = np.arange(cells + 1) * h
    xx, yy = np.meshgrid(ticks, ticks)
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    i, j = np.meshgrid(np.arange(cells), np.arange(cells))
    i, j = i.ravel(), j.ravel()
    a = j * (cells + 1) + i
    b = a + 1
    c = a + cells + 2
    d = a + cells + 1
    # Each square is split along its lower-left / upper-right diagonal.
    triangles = np.vstack([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    cell_index = np.vstack([np.column_stack([i, j]), np.column_stack([i, j])])
    return nodes, triangles, cell_index


def _p1_element_matrices(nodes: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Local P1 stiffness, mass and load (f = 1) on every triangle.

    Returns:
        Tuple of stiffness (n_tri, 3, 3), mass (n_tri, 3, 3), load (n_tri, 3)
    """
    p = nodes[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)

    # Gradients of the barycentric coordinates lambda_1, lambda_2: rows of B^{-1}.
    inv_t = np.empty((len(triangles), 2, 2))
    inv_t[:, 0, 0] = e2[:, 1] / det
    inv_t[:, 0, 1] = -e2[:, 0] / det
    inv_t[:, 1, 0] = -e1[:, 1] / det
    inv_t[:, 1, 1] = e1[:, 0] / det
    grads = np.empty((len(triangles), 3, 2))
    grads[:, 1:, :] = inv_t
    grads[:, 0, :] = -inv_t.sum(axis=1)

    stiffness = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    mass = area[:, None, None] / 12.0 * (np.ones((3, 3)) + np.eye(3))[None, :, :]
    load = np.repeat(area[:, None] / 3.0, 3, axis=1)
    return stiffness, mass, load


def _assemble(local: np.ndarray, triangles: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    rows = np.repeat(triangles, 3, axis=1).ravel()
    cols = np.tile(triangles, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()


def _restrict(matrix: sp.csr_matrix, free: np.ndarray) -> sp.csr_matrix:
    return matrix[free][:, free].tocsr()


def build_thermal_block(
    blocks_x: int,
    blocks_y: int,
    cells_per_axis: int,
    mu_bounds: tuple[float, float],
    source: float = 1.0,
) -> TruthProblem:
    """
    Build the thermal block truth problem.

    Coefficient q (row-major from the lower-left block, q = iy * blocks_x + ix)
    multiplies the stiffness contribution of block q, theta_q(mu) = mu_q.
    X = A(mu_bar) with mu_bar = (1, ..., 1), so C_ref = 1.

    Args:
        blocks_x: Number of blocks along x
        blocks_y: Number of blocks along y
        cells_per_axis: Mesh cells per axis, divisible by both block counts
        mu_bounds: (mu_min, mu_max), 0 < mu_min < mu_max
        source: Constant source value f (1 by default)

    Returns:
        TruthProblem with the P1 mass matrix stored in its MeshInfo

    Raises:
        InputRejected: On invalid block layout, resolution or bounds
    """
    if blocks_x < 1 or blocks_y < 1:
        raise InputRejected("block counts must be at least 1", field="blocks")
    if cells_per_axis < 1 or cells_per_axis % blocks_x or cells_per_axis % blocks_y:
        raise InputRejected(
            f"cells_per_axis={cells_per_axis} must be divisible by {blocks_x} and {blocks_y}",
            field="cells_per_axis",
        )
    mu_min, mu_max = mu_bounds
    if not 0.0 < mu_min < mu_max:
        raise InputRejected(f"need 0 < mu_min < mu_max, got {mu_bounds}", field="mu_bounds")

    nodes, triangles, cell_index = _structured_triangles(cells_per_axis)
    n_nodes = len(nodes)
    stiffness, mass, load = _p1_element_matrices(nodes, triangles)

    on_boundary = (
        np.isclose(nodes[:, 0], 0.0) | np.isclose(nodes[:, 0], 1.0)
        | np.isclose(nodes[:, 1], 0.0) | np.isclose(nodes[:, 1], 1.0)
    )
    free = np.flatnonzero(~on_boundary)

    block_x = cell_index[:, 0] // (cells_per_axis // blocks_x)
    block_y = cell_index[:, 1] // (cells_per_axis // blocks_y)
    block_of = block_y * blocks_x + block_x

    num_blocks = blocks_x * blocks_y
    terms = []
    for q in range(num_blocks):
        mask = block_of == q
        a_q = _restrict(_assemble(stiffness[mask], triangles[mask], n_nodes), free)
        terms.append((CoefficientFunction.component(q), a_q))

    domain = ParameterDomain.uniform(num_blocks, (mu_min, mu_max))
    operator = AffineOperator.from_terms(terms, domain)

    load_full = np.zeros(n_nodes)
    np.add.at(load_full, triangles.ravel(), load.ravel())
    f = load_full[free]
    mass_matrix = _restrict(_assemble(mass, triangles, n_nodes), free)

    mu_bar = Parameter((1.0,) * num_blocks)
    x = operator.combine(operator.evaluate_coefficients(mu_bar))

    logger.info(
        f"[thermal_block] {blocks_x}x{blocks_y} blocks, {cells_per_axis} cells/axis, "
        f"n_h={len(free)}, Q={num_blocks}"
    )
    return TruthProblem(
        operator=operator,
        load=source * f,
        # Domain mean of u: integral of u over the unit square.
        outputs=f[None, :],
        inner_product=x,
        mesh=MeshInfo(
            kind="thermal_block",
            cells_per_axis=cells_per_axis,
            blocks=(blocks_x, blocks_y),
            dof_coordinates=nodes[free],
            mass_matrix=mass_matrix,
        ),
        reference_parameter=mu_bar,
        reference_coercivity=1.0,
        name=f"thermal_block_{blocks_x}x{blocks_y}",
    )


def build_poisson_1d(cells: int, mu_bounds: tuple[float, float] = (0.1, 10.0)) -> TruthProblem:
    """
    -mu u'' = 1 on (0, 1) with u(0) = u(1) = 0, P1 elements.

    With exact load integration the nodal values equal x(1 - x) / (2 mu).
    """
    if cells < 2:
        raise InputRejected("1D mesh needs at least 2 cells", field="cells")
    mu_min, mu_max = mu_bounds
    if not 0.0 < mu_min <= mu_max:
        raise InputRejected(f"need 0 < mu_min <= mu_max, got {mu_bounds}", field="mu_bounds")

    h = 1.0 / cells
    n = cells - 1
    main = np.full(n, 2.0 / h)
    off = np.full(n - 1, -1.0 / h)
    stiffness = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    mass = sp.diags(
        [np.full(n - 1, h / 6.0), np.full(n, 4.0 * h / 6.0), np.full(n - 1, h / 6.0)],
        [-1, 0, 1], format="csr",
    )
    f = np.full(n, h)

    domain = ParameterDomain.uniform(1, (mu_min, mu_max))
    operator = AffineOperator.from_terms([(CoefficientFunction.component(0), stiffness)], domain)
    mu_bar = Parameter((1.0,))

    return TruthProblem(
        operator=operator,
        load=f,
        outputs=f[None, :],
        inner_product=operator.combine(np.ones(1)),
        mesh=MeshInfo(
            kind="poisson_1d",
            cells_per_axis=cells,
            dof_coordinates=(np.arange(1, cells) * h)[:, None],
            mass_matrix=mass,
        ),
        reference_parameter=mu_bar,
        reference_coercivity=1.0,
        name="poisson_1d",
    )
