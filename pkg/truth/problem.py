"""
Truth problem container: the high-dimensional discrete problem a reduced
model is built from.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from affine.operator import AffineOperator
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected
from truth.linalg import SPDFactor


@dataclass(frozen=True)
class MeshInfo:
    """
    Descriptor of the discretization behind a TruthProblem.

    Attributes:
        kind: 'thermal_block', 'poisson_1d' or 'custom'
        cells_per_axis: Structured mesh resolution
        blocks: (blocks_x, blocks_y) layout of the coefficient regions
        dof_coordinates: (n_h, dim) coordinates of the free nodes
        mass_matrix: P1 mass matrix on the free nodes (parabolic problems)
    """
    kind: str
    cells_per_axis: int = 0
    blocks: tuple[int, int] = (1, 1)
    dof_coordinates: Optional[np.ndarray] = None
    mass_matrix: Optional[sp.csr_matrix] = None


@dataclass(frozen=True)
class TruthProblem:
    """
    Affine operator, load, outputs and inner product of a truth discretization.

    Attributes:
        operator: A(mu) = sum_q theta_q(mu) A_q, n_h x n_h
        load: Load vector f of length n_h
        outputs: (S, n_h) output functional rows
        inner_product: SPD matrix X defining the state norm
        mesh: Discretization descriptor
        reference_parameter: mu_bar of the min-theta bound
        reference_coercivity: C_ref, coercivity of a_mu_bar in the X-norm
        name: Short label used in logs and artifacts
    """
    operator: AffineOperator
    load: np.ndarray
    outputs: np.ndarray
    inner_product: sp.csr_matrix
    mesh: MeshInfo
    reference_parameter: Parameter
    reference_coercivity: float
    name: str = "truth"

    def __post_init__(self):
        n = self.operator.size
        load = np.asarray(self.load, dtype=float).reshape(-1)
        outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        x = sp.csr_matrix(self.inner_product, dtype=float)
        if load.shape != (n,):
            raise InputRejected(f"load has length {load.size}, expected {n}", field="load")
        if outputs.shape[1] != n:
            raise InputRejected(f"outputs have {outputs.shape[1]} columns, expected {n}", field="outputs")
        if x.shape != (n, n):
            raise InputRejected(f"inner product has shape {x.shape}, expected {(n, n)}", field="inner_product")
        if self.mesh.mass_matrix is not None and self.mesh.mass_matrix.shape != (n, n):
            raise InputRejected("mass matrix dimension mismatch", field="mass_matrix")
        if not self.reference_coercivity > 0.0:
            raise InputRejected("reference coercivity must be positive", field="reference_coercivity")
        if self.reference_parameter.dimension != self.operator.domain.dimension:
            raise InputRejected("reference parameter dimension mismatch", field="reference_parameter")
        # Raises CoercivityLoss when X is not SPD.
        SPDFactor(x, context="inner product")
        self.operator.check_positivity_flags()
        object.__setattr__(self, "load", load)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "inner_product", x)

    @property
    def size(self) -> int:
        return self.operator.size

    @property
    def domain(self) -> ParameterDomain:
        return self.operator.domain

    @property
    def num_outputs(self) -> int:
        return self.outputs.shape[0]

    @property
    def is_parabolic(self) -> bool:
        return self.mesh.mass_matrix is not None

    def with_load(self, load: np.ndarray) -> "TruthProblem":
        """Copy of this problem with a different load vector."""
        return TruthProblem(
            operator=self.operator,
            load=load,
            outputs=self.outputs,
            inner_product=self.inner_product,
            mesh=self.mesh,
            reference_parameter=self.reference_parameter,
            reference_coercivity=self.reference_coercivity,
            name=self.name,
        )
