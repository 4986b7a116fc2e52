"""
Coefficient functions theta_q: P -> R of an affine decomposition.

The set of supported functions is closed so that reduced models serialize
exactly; every kind below is multilinear in mu, hence attains its extrema
over a box at the box corners.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Sequence

import numpy as np

from affine.parameters import Parameter, ParameterDomain
from errors import InputRejected


class CoefficientKind(Enum):
    """Supported coefficient function families."""
    COMPONENT = "component"  # scale * mu_i
    CONSTANT = "constant"    # offset
    AFFINE = "affine"        # offset + sum_j weights_j * mu_{indices_j}
    PRODUCT = "product"      # scale * prod_j mu_{indices_j}


@dataclass(frozen=True)
class CoefficientFunction:
    """
    One theta_q of an affine decomposition.

    Attributes:
        kind: Function family
        indices: Parameter components the function reads
        weights: Per-index weights (AFFINE only)
        offset: Constant part (CONSTANT, AFFINE)
        scale: Multiplier (COMPONENT, PRODUCT)
        positive: Declares theta_q(mu) > 0 on the whole domain (min-theta eligibility)
    """
    kind: CoefficientKind
    indices: tuple[int, ...] = ()
    weights: tuple[float, ...] = ()
    offset: float = 0.0
    scale: float = 1.0
    positive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(i < 0 for i in self.indices):
            raise InputRejected("coefficient indices must be non-negative", field="indices")
        if self.kind is CoefficientKind.COMPONENT and len(self.indices) != 1:
            raise InputRejected("component coefficient reads exactly one index", field="indices")
        if self.kind is CoefficientKind.AFFINE and len(self.weights) != len(self.indices):
            raise InputRejected("affine coefficient needs one weight per index", field="weights")
        if self.kind is CoefficientKind.PRODUCT and not self.indices:
            raise InputRejected("product coefficient needs at least one index", field="indices")
        if self.kind is CoefficientKind.PRODUCT and len(set(self.indices)) != len(self.indices):
            raise InputRejected("product coefficient must not repeat an index", field="indices")

    @classmethod
    def component(cls, index: int, scale: float = 1.0, positive: bool = True) -> "CoefficientFunction":
        return cls(CoefficientKind.COMPONENT, indices=(index,), scale=scale, positive=positive)

    @classmethod
    def constant(cls, value: float) -> "CoefficientFunction":
        return cls(CoefficientKind.CONSTANT, offset=value, positive=value > 0)

    @classmethod
    def affine(
        cls, offset: float, weights: Dict[int, float], positive: bool = False
    ) -> "CoefficientFunction":
        items = sorted(weights.items())
        return cls(
            CoefficientKind.AFFINE,
            indices=tuple(i for i, _ in items),
            weights=tuple(w for _, w in items),
            offset=offset,
            positive=positive,
        )

    @classmethod
    def product(cls, indices: Sequence[int], scale: float = 1.0, positive: bool = False) -> "CoefficientFunction":
        return cls(CoefficientKind.PRODUCT, indices=tuple(indices), scale=scale, positive=positive)

    @property
    def required_dimension(self) -> int:
        """Smallest parameter dimension this function can be evaluated on."""
        return max(self.indices) + 1 if self.indices else 0

    def __call__(self, mu: Parameter) -> float:
        return self.evaluate(mu)

    def evaluate(self, mu: Parameter) -> float:
        values = mu.values
        if self.required_dimension > len(values):
            raise InputRejected(
                f"coefficient reads component {self.required_dimension - 1} of a "
                f"{len(values)}-dimensional parameter",
                field="mu",
            )
        if self.kind is CoefficientKind.COMPONENT:
            return self.scale * values[self.indices[0]]
        if self.kind is CoefficientKind.CONSTANT:
            return self.offset
        if self.kind is CoefficientKind.AFFINE:
            return self.offset + sum(w * values[i] for i, w in zip(self.indices, self.weights))
        return self.scale * float(np.prod([values[i] for i in self.indices]))

    def minimum_on(self, domain: ParameterDomain) -> float:
        """Exact minimum over the box (multilinear, so a corner attains it)."""
        return min(self.evaluate(c) for c in domain.corners())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "indices": list(self.indices),
            "weights": list(self.weights),
            "offset": self.offset,
            "scale": self.scale,
            "positive": self.positive,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CoefficientFunction":
        return cls(
            kind=CoefficientKind(data["kind"]),
            indices=tuple(data.get("indices", ())),
            weights=tuple(data.get("weights", ())),
            offset=float(data.get("offset", 0.0)),
            scale=float(data.get("scale", 1.0)),
            positive=bool(data.get("positive", False)),
        )
