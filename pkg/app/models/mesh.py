# ===========================================================================
# File: app/models/mesh.py
# ===========================================================================
from enum import IntEnum
from pydantic import BaseModel, Field, model_validator
from typing import Tuple
import numpy as np


class FacetClass(IntEnum):
    INTERIOR = 0
    WALL = 1
    TRUNCATION_LEFT = 2
    TRUNCATION_RIGHT = 3


class Box(BaseModel):
    x0: float
    x1: float
    y0: float
    y1: float

    @model_validator(mode='after')
    def check_order(self) -> 'Box':
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"box corners out of order: {self}")
        return self

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return (
            (points[:, 0] > self.x0) & (points[:, 0] < self.x1)
            & (points[:, 1] > self.y0) & (points[:, 1] < self.y1)
        )


class Mesh(BaseModel):
    """Conforming triangulation of (-R, R) x (0, H).

    Facet e is stored with facet_elements[e] = (K, K') where K' is -1 on the
    boundary; facet_normals[e] is the unit normal pointing out of K.
    """
    R: float = Field(..., gt=0)
    H: float = Field(..., gt=0)
    vertices: np.ndarray
    triangles: np.ndarray
    n: np.ndarray
    facets: np.ndarray
    facet_class: np.ndarray
    facet_elements: np.ndarray
    facet_normals: np.ndarray
    facet_lengths: np.ndarray
    element_facets: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def corners(self) -> np.ndarray:
        return self.vertices[self.triangles]

    @property
    def areas(self) -> np.ndarray:
        p = self.corners
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @property
    def edge_lengths(self) -> np.ndarray:
        p = self.corners
        return np.linalg.norm(p[:, [1, 2, 0]] - p, axis=2)

    @property
    def diameters(self) -> np.ndarray:
        return self.edge_lengths.max(axis=1)

    @property
    def inscribed_diameters(self) -> np.ndarray:
        return 4.0 * self.areas / self.edge_lengths.sum(axis=1)

    @property
    def chunkiness(self) -> np.ndarray:
        return self.inscribed_diameters / self.diameters

    @property
    def h(self) -> float:
        return float(self.diameters.max())

    @property
    def l_max(self) -> float:
        return float(self.facet_lengths.max())

    @property
    def l_min(self) -> float:
        return float(self.facet_lengths.min())

    @property
    def edge_ratio(self) -> float:
        return self.l_max / self.l_min

    def facets_of(self, facet_class: FacetClass) -> np.ndarray:
        return np.flatnonzero(self.facet_class == facet_class)

    def facet_endpoints(self, facet: int) -> Tuple[np.ndarray, np.ndarray]:
        i, j = self.facets[facet]
        return self.vertices[i], self.vertices[j]
