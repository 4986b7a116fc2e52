"""
JSON documents for reduced models and bases.

A model file is truth-dimension free; the basis matrix goes to a sibling
file referenced by name. Floats are written in shortest round-trip form,
so reloading reproduces every numeric payload bit for bit.
"""

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from affine.coefficients import CoefficientFunction
from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected
from reduced.model import ReducedBasis, ReducedModel, ResidualGram

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ArrayPayload(_Strict):
    """Dense array in row-major order with explicit shape."""
    shape: List[int]
    data: List[float]

    @model_validator(mode="after")
    def _check_size(self) -> "ArrayPayload":
        expected = int(np.prod(self.shape)) if self.shape else 1
        if any(s < 0 for s in self.shape) or expected != len(self.data):
            raise ValueError(f"shape {self.shape} does not match {len(self.data)} values")
        return self

    @classmethod
    def of(cls, array: np.ndarray) -> "ArrayPayload":
        array = np.asarray(array, dtype=float)
        return cls(shape=list(array.shape), data=array.reshape(-1).tolist())

    def to_array(self) -> np.ndarray:
        return np.asarray(self.data, dtype=float).reshape(self.shape)


class CoefficientPayload(_Strict):
    kind: Literal["component", "constant", "affine", "product"]
    indices: List[int] = []
    weights: List[float] = []
    offset: float = 0.0
    scale: float = 1.0
    positive: bool = False


class TermPayload(_Strict):
    """One affine term; the list position is the term index used by every reduced block."""
    index: int
    coefficient: CoefficientPayload


class ModelDocument(_Strict):
    format_version: Literal[1] = FORMAT_VERSION
    kind: Literal["reduced_model"] = "reduced_model"
    name: str
    complete: bool
    truth_size: int
    basis_size: int
    num_terms: int
    num_outputs: int
    domain_lower: List[float]
    domain_upper: List[float]
    terms: List[TermPayload]
    reduced_terms: ArrayPayload
    reduced_load: ArrayPayload
    reduced_outputs: ArrayPayload
    residual_c_ff: float
    residual_c_fA: ArrayPayload
    residual_c_AA: ArrayPayload
    residual_range_load: Optional[ArrayPayload] = None
    residual_range_blocks: Optional[ArrayPayload] = None
    reference_parameter: List[float]
    reference_coercivity: float
    continuity_constants: ArrayPayload
    output_dual_norms: ArrayPayload
    snapshot_parameters: List[List[float]] = []
    reduced_mass: Optional[ArrayPayload] = None
    initial_coordinates: Optional[ArrayPayload] = None
    initial_defect_mass_sq: float = 0.0
    basis_file: Optional[str] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelDocument":
        n, q, s = self.basis_size, self.num_terms, self.num_outputs
        if [t.index for t in self.terms] != list(range(q)):
            raise ValueError("terms must be listed in index order 0..Q-1")
        checks = {
            "reduced_terms": (self.reduced_terms.shape, [q, n, n]),
            "reduced_load": (self.reduced_load.shape, [n]),
            "reduced_outputs": (self.reduced_outputs.shape, [s, n]),
            "continuity_constants": (self.continuity_constants.shape, [q]),
            "output_dual_norms": (self.output_dual_norms.shape, [s]),
        }
        blocks = self.residual_c_fA.shape[0] if self.residual_c_fA.shape else -1
        checks["residual_c_fA"] = (self.residual_c_fA.shape, [blocks, n])
        checks["residual_c_AA"] = (self.residual_c_AA.shape, [blocks, blocks, n, n])
        if self.reduced_mass is not None:
            checks["reduced_mass"] = (self.reduced_mass.shape, [n, n])
        if (self.residual_range_load is None) != (self.residual_range_blocks is None):
            raise ValueError("residual range data needs both load and block coordinates")
        if self.residual_range_load is not None:
            r = self.residual_range_load.shape[0] if self.residual_range_load.shape else -1
            checks["residual_range_load"] = (self.residual_range_load.shape, [r])
            checks["residual_range_blocks"] = (self.residual_range_blocks.shape, [blocks, r, n])
        for name, (actual, expected) in checks.items():
            if actual != expected:
                raise ValueError(f"{name} has shape {actual}, expected {expected}")
        if blocks not in (q, q + 1):
            raise ValueError(f"residual data has {blocks} blocks for {q} terms")
        return self


class BasisDocument(_Strict):
    format_version: Literal[1] = FORMAT_VERSION
    kind: Literal["reduced_basis"] = "reduced_basis"
    matrix: ArrayPayload
    snapshot_parameters: List[List[float]] = []


def model_to_document(model: ReducedModel, basis_file: Optional[str] = None) -> ModelDocument:
    gram = model.residual_gram
    return ModelDocument(
        name=model.name,
        complete=model.complete,
        truth_size=model.truth_size,
        basis_size=model.basis_size,
        num_terms=model.num_terms,
        num_outputs=model.num_outputs,
        domain_lower=list(model.domain.lower),
        domain_upper=list(model.domain.upper),
        terms=[
            TermPayload(index=q, coefficient=CoefficientPayload(**theta.to_dict()))
            for q, theta in enumerate(model.coefficients)
        ],
        reduced_terms=ArrayPayload.of(model.reduced_terms),
        reduced_load=ArrayPayload.of(model.reduced_load),
        reduced_outputs=ArrayPayload.of(model.reduced_outputs),
        residual_c_ff=gram.c_ff,
        residual_c_fA=ArrayPayload.of(gram.c_fA),
        residual_c_AA=ArrayPayload.of(gram.c_AA),
        residual_range_load=None if gram.range_load is None else ArrayPayload.of(gram.range_load),
        residual_range_blocks=None if gram.range_blocks is None else ArrayPayload.of(gram.range_blocks),
        reference_parameter=list(model.reference_parameter.values),
        reference_coercivity=model.reference_coercivity,
        continuity_constants=ArrayPayload.of(model.continuity_constants),
        output_dual_norms=ArrayPayload.of(model.output_dual_norms),
        snapshot_parameters=[list(mu.values) for mu in model.snapshot_parameters],
        reduced_mass=None if model.reduced_mass is None else ArrayPayload.of(model.reduced_mass),
        initial_coordinates=(
            None if model.initial_coordinates is None else ArrayPayload.of(model.initial_coordinates)
        ),
        initial_defect_mass_sq=model.initial_defect_mass_sq,
        basis_file=basis_file,
    )


def model_from_document(doc: ModelDocument) -> ReducedModel:
    return ReducedModel(
        coefficients=tuple(
            CoefficientFunction.from_dict(term.coefficient.model_dump()) for term in doc.terms
        ),
        domain=ParameterDomain(tuple(doc.domain_lower), tuple(doc.domain_upper)),
        reduced_terms=doc.reduced_terms.to_array(),
        reduced_load=doc.reduced_load.to_array(),
        reduced_outputs=doc.reduced_outputs.to_array(),
        residual_gram=ResidualGram(
            c_ff=doc.residual_c_ff,
            c_fA=doc.residual_c_fA.to_array(),
            c_AA=doc.residual_c_AA.to_array(),
            range_load=None if doc.residual_range_load is None else doc.residual_range_load.to_array(),
            range_blocks=None if doc.residual_range_blocks is None else doc.residual_range_blocks.to_array(),
        ),
        reference_parameter=Parameter(tuple(doc.reference_parameter)),
        reference_coercivity=doc.reference_coercivity,
        continuity_constants=doc.continuity_constants.to_array(),
        output_dual_norms=doc.output_dual_norms.to_array(),
        truth_size=doc.truth_size,
        snapshot_parameters=tuple(Parameter(tuple(v)) for v in doc.snapshot_parameters),
        reduced_mass=None if doc.reduced_mass is None else doc.reduced_mass.to_array(),
        initial_coordinates=(
            None if doc.initial_coordinates is None else doc.initial_coordinates.to_array()
        ),
        initial_defect_mass_sq=doc.initial_defect_mass_sq,
        complete=doc.complete,
        name=doc.name,
    )


def _read(path: Path, document_type):
    try:
        return document_type.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InputRejected(f"file not found: {path}", field="path") from e
    except ValidationError as e:
        raise InputRejected(f"invalid {document_type.__name__} in {path}: {e}", field="path") from e


def save_model(model: ReducedModel, path: str | Path, basis_file: Optional[str] = None) -> Path:
    """
    Write the reduced model document.

    Args:
        model: Reduced model
        path: Target JSON file
        basis_file: Name of the sibling basis file, if one is written

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_to_document(model, basis_file).model_dump_json(indent=1), encoding="utf-8")
    logger.info(f"[serialization] model N={model.basis_size} written to {path} (complete={model.complete})")
    return path


def load_model(path: str | Path) -> ReducedModel:
    """
    Read a reduced model document.

    Raises:
        InputRejected: If the file is missing or fails schema/shape validation
    """
    return model_from_document(_read(Path(path), ModelDocument))


def basis_path_for(model_path: str | Path) -> Optional[Path]:
    """Sibling basis file referenced by a model document, if any."""
    model_path = Path(model_path)
    reference = json.loads(model_path.read_text(encoding="utf-8")).get("basis_file")
    return model_path.parent / reference if reference else None


def save_basis(basis: ReducedBasis, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = BasisDocument(
        matrix=ArrayPayload.of(basis.matrix),
        snapshot_parameters=[list(mu.values) for mu in basis.snapshot_parameters],
    )
    path.write_text(doc.model_dump_json(), encoding="utf-8")
    return path


def load_basis(path: str | Path) -> ReducedBasis:
    doc = _read(Path(path), BasisDocument)
    matrix = doc.matrix.to_array()
    if matrix.ndim != 2:
        raise InputRejected(f"basis matrix must be 2-D, got shape {doc.matrix.shape}", field="matrix")
    return ReducedBasis(matrix, tuple(Parameter(tuple(v)) for v in doc.snapshot_parameters))
