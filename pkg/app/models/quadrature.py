# ===========================================================================
# File: app/models/quadrature.py
# ===========================================================================
from pydantic import BaseModel, Field
from typing import Literal, NamedTuple
import numpy as np

FacetIntegrand = Literal["value-value", "value-normal", "normal-value", "normal-normal"]


class SegmentRule(BaseModel):
    """Gauss-Legendre rule mapped onto a segment; weights sum to its length."""
    nodes: np.ndarray
    weights: np.ndarray
    order: int = Field(..., ge=0)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.dot(self.weights, values))


class TriangleRule(BaseModel):
    """Duffy-collapsed tensor Gauss rule; weights sum to the triangle area."""
    nodes: np.ndarray
    weights: np.ndarray
    order: int = Field(..., ge=0)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.dot(self.weights, values))


class FacetBlocks(NamedTuple):
    """Trial x test facet integrals of one element pair, indexed [test, trial].

    vv = int w conj(v), vn = int w conj(dv), nv = int dw conj(v),
    nn = int dw conj(dv), with d the derivative along the facet normal.
    """
    vv: np.ndarray
    vn: np.ndarray
    nv: np.ndarray
    nn: np.ndarray


class ModalMoments(NamedTuple):
    """Per-direction modal moments of the trace on a truncation facet, shape (n_p, J)."""
    value: np.ndarray
    normal: np.ndarray
