# ===========================================================================
# File: app/services/quadrature_service.py
# ===========================================================================
from functools import lru_cache
from typing import Callable, Optional, Tuple
import numpy as np

from app.core.config import settings
from app.core.exceptions import DimensionMismatch, FacetNotOnTruncation
from app.models.basis import PlaneWaveSpace
from app.models.mesh import FacetClass, Mesh
from app.models.modal import ModalBasis
from app.models.quadrature import (
    FacetBlocks, FacetIntegrand, ModalMoments, SegmentRule, TriangleRule,
)


@lru_cache(maxsize=None)
def _gauss_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    t, w = 0.5 * (x + 1.0), 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def _duffy_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Collapsed rule on the unit triangle (0,0), (1,0), (0,1); weights sum to 1/2."""
    t, w = _gauss_unit(n)
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    nodes = np.column_stack([u.ravel(), (v * (1.0 - u)).ravel()])
    weights = (wu * wv * (1.0 - u)).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class QuadratureService:
    # -----------------------------------------------------------------
    # rules
    # -----------------------------------------------------------------
    def gauss_legendre(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """n-point Gauss-Legendre nodes and weights on [0, 1]."""
        if n < 1:
            raise ValueError(f"Gauss-Legendre rule needs at least one node, got {n}")
        return _gauss_unit(n)

    def segment_rule(self, a: np.ndarray, b: np.ndarray, n: Optional[int] = None) -> SegmentRule:
        n = settings.ORACLE_NODES if n is None else n
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        t, w = self.gauss_legendre(n)
        return SegmentRule(
            nodes=a + np.outer(t, b - a), weights=w * np.linalg.norm(b - a), order=2 * n - 1,
        )

    def triangle_rule(self, vertices: np.ndarray, n: int) -> TriangleRule:
        if n < 1:
            raise ValueError(f"triangle rule needs at least one node per direction, got {n}")
        p = np.asarray(vertices, dtype=float)
        ref_nodes, ref_weights = _duffy_unit(n)
        e1, e2 = p[1] - p[0], p[2] - p[0]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        nodes = p[0] + np.outer(ref_nodes[:, 0], e1) + np.outer(ref_nodes[:, 1], e2)
        return TriangleRule(nodes=nodes, weights=ref_weights * 2.0 * area, order=2 * n - 2)

    def quad_nodes(self, kappa: complex, h: float) -> int:
        """Gauss points per direction resolving |kappa| h oscillations plus a margin."""
        return int(np.ceil(abs(kappa) * h)) + settings.QUAD_ORDER_MARGIN

    def segment_quadrature(
        self, f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray, n: Optional[int] = None
    ) -> complex:
        rule = self.segment_rule(a, b, n)
        return rule.integrate(f(rule.nodes))

    def triangle_quadrature(
        self, f: Callable[[np.ndarray], np.ndarray], vertices: np.ndarray, n: Optional[int] = None
    ) -> complex:
        rule = self.triangle_rule(vertices, settings.ORACLE_NODES if n is None else n)
        return rule.integrate(f(rule.nodes))

    # -----------------------------------------------------------------
    # exponential kernels
    # -----------------------------------------------------------------
    def segment_exp_integral(self, c: np.ndarray, a: np.ndarray, b: np.ndarray):
        """Integral of exp(c.x) over the segment [a, b] (broadcast over leading axes of c)."""
        c = np.asarray(c, dtype=complex)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        edge = b - a
        length = np.linalg.norm(edge, axis=-1)
        w = np.sum(c * edge, axis=-1)
        small = np.abs(w) < settings.SERIES_THRESHOLD
        w_safe = np.where(small, 1.0, w)
        ratio = np.where(small, 1.0 + w / 2.0 + w ** 2 / 6.0 + w ** 3 / 24.0, np.expm1(w_safe) / w_safe)
        result = length * np.exp(np.sum(c * a, axis=-1)) * ratio
        return result if np.ndim(result) else complex(result)

    def exp_triangle_integral(
        self, c: np.ndarray, vertices: np.ndarray, origin: Optional[np.ndarray] = None
    ):
        """Integral of exp(c.(x - origin)) over a triangle.

        Uses the divergence theorem on the largest component of c, so that the
        triangle integral becomes three segment integrals. Exponents with
        |c| h below CLOSED_FORM_MIN_EXPONENT go through the Duffy rule instead.
        """
        c = np.asarray(c, dtype=complex)
        shape = c.shape[:-1]
        c = c.reshape(-1, 2)
        p = np.asarray(vertices, dtype=float)
        origin = p.mean(axis=0) if origin is None else np.asarray(origin, dtype=float)
        rel = p - origin
        e1, e2 = rel[1] - rel[0], rel[2] - rel[0]
        if e1[0] * e2[1] - e1[1] * e2[0] < 0:
            rel = rel[[0, 2, 1]]
        h = max(np.linalg.norm(rel[i] - rel[i - 1]) for i in range(3))

        out = np.empty(len(c), dtype=complex)
        small = np.linalg.norm(c, axis=1) * h < settings.CLOSED_FORM_MIN_EXPONENT
        if small.any():
            rule = self.triangle_rule(rel, settings.QUAD_ORDER_MARGIN)
            out[small] = np.exp(c[small] @ rule.nodes.T) @ rule.weights
        big = ~small
        if big.any():
            cb = c[big]
            m = np.argmax(np.abs(cb), axis=1)
            cm = cb[np.arange(len(cb)), m]
            total = np.zeros(len(cb), dtype=complex)
            for i in range(3):
                a, b = rel[i], rel[(i + 1) % 3]
                t = b - a
                outward = np.array([t[1], -t[0]]) / np.linalg.norm(t)
                total += outward[m] * self.segment_exp_integral(cb, a, b)
            out[big] = total / cm
        return out.reshape(shape) if shape else complex(out[0])

    # -----------------------------------------------------------------
    # plane-wave pair integrals
    # -----------------------------------------------------------------
    def _trace_at(self, space: PlaneWaveSpace, element: int, point: np.ndarray) -> np.ndarray:
        kappa = space.kappa[element]
        return np.exp(1j * kappa * (space.directions @ (point - space.centroids[element])))

    def facet_pair_matrices(
        self,
        space: PlaneWaveSpace,
        trial: int,
        test: int,
        a: np.ndarray,
        b: np.ndarray,
        normal: np.ndarray,
    ) -> FacetBlocks:
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        normal = np.asarray(normal, dtype=float)
        D = space.directions
        k_trial, k_test = space.kappa[trial], space.kappa[test]
        # combined exponent c[q, p] = i kappa_trial d_p - i conj(kappa_test) d_q
        c = 1j * k_trial * D[None, :, :] - 1j * np.conj(k_test) * D[:, None, :]
        # shifted to the facet start so that each factor stays bounded
        shift = np.conj(self._trace_at(space, test, a))[:, None] * self._trace_at(space, trial, a)[None, :]
        vv = shift * self.segment_exp_integral(c, np.zeros(2), b - a)
        dn_trial = 1j * k_trial * (D @ normal)
        dn_test = np.conj(1j * k_test * (D @ normal))
        return FacetBlocks(
            vv=vv,
            vn=dn_test[:, None] * vv,
            nv=vv * dn_trial[None, :],
            nn=dn_test[:, None] * vv * dn_trial[None, :],
        )

    def facet_pair_integral(
        self,
        space: PlaneWaveSpace,
        trial: Tuple[int, int],
        test: Tuple[int, int],
        a: np.ndarray,
        b: np.ndarray,
        normal: np.ndarray,
        integrand: FacetIntegrand = "value-value",
    ) -> complex:
        """One facet integral between basis function trial=(element, j) and test=(element, j)."""
        blocks = self.facet_pair_matrices(space, trial[0], test[0], a, b, normal)
        block = {
            "value-value": blocks.vv,
            "value-normal": blocks.vn,
            "normal-value": blocks.nv,
            "normal-normal": blocks.nn,
        }[integrand]
        return complex(block[test[1], trial[1]])

    def triangle_pair_matrix(self, space: PlaneWaveSpace, element: int, vertices: np.ndarray) -> np.ndarray:
        """[q, p] = integral over K of phi_p conj(phi_q)."""
        D = space.directions
        kappa = space.kappa[element]
        c = 1j * kappa * D[None, :, :] - 1j * np.conj(kappa) * D[:, None, :]
        return self.exp_triangle_integral(c, vertices, space.centroids[element])

    def triangle_pair_integral(
        self, space: PlaneWaveSpace, element: int, trial: int, test: int, vertices: np.ndarray
    ) -> complex:
        return complex(self.triangle_pair_matrix(space, element, vertices)[test, trial])

    # -----------------------------------------------------------------
    # modal moments on the truncation walls
    # -----------------------------------------------------------------
    def modal_moments(
        self, space: PlaneWaveSpace, mesh: Mesh, facet: int, basis: ModalBasis, count: int
    ) -> ModalMoments:
        """Moments int phi_p theta_j and int d_n phi_p theta_j over a truncation facet, j < count."""
        facet_class = mesh.facet_class[facet]
        if facet_class not in (FacetClass.TRUNCATION_LEFT, FacetClass.TRUNCATION_RIGHT):
            raise FacetNotOnTruncation(f"facet {facet} is {FacetClass(facet_class).name}, not on x1 = +/-R")
        if count > basis.count:
            raise DimensionMismatch(f"{count} modal moments requested, modal basis has {basis.count}")

        element = mesh.facet_elements[facet, 0]
        a, b = mesh.facet_endpoints(facet)
        kappa = space.kappa[element]
        D = space.directions
        omega = basis.k_j[:count]
        c = 1j * kappa * D

        # cos(w y) = (exp(i w y) + exp(-i w y)) / 2
        moments = np.zeros((space.n_p, count), dtype=complex)
        for sign in (1.0, -1.0):
            shift = np.zeros((count, 2), dtype=complex)
            shift[:, 1] = sign * 1j * omega
            exponents = c[:, None, :] + shift[None, :, :]
            moments += np.exp(sign * 1j * omega * a[1])[None, :] * self.segment_exp_integral(
                exponents, np.zeros(2), b - a
            )
        value = 0.5 * basis.amplitudes[:count][None, :] * self._trace_at(space, element, a)[:, None] * moments
        normal = (1j * kappa * (D @ mesh.facet_normals[facet]))[:, None] * value
        return ModalMoments(value=value, normal=normal)

    def modal_moment(
        self,
        space: PlaneWaveSpace,
        mesh: Mesh,
        facet: int,
        direction: int,
        mode: int,
        basis: ModalBasis,
        quantity: str = "value",
    ) -> complex:
        moments = self.modal_moments(space, mesh, facet, basis, mode + 1)
        table = moments.value if quantity == "value" else moments.normal
        return complex(table[direction, mode])


quadrature_service = QuadratureService()
