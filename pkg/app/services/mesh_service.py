# ===========================================================================
# File: app/services/mesh_service.py
# ===========================================================================
from typing import Callable, Optional, Tuple
import numpy as np
from scipy.spatial import cKDTree

from app.core.config import settings, logger
from app.core.exceptions import (
    BoxTouchesBoundary, DegenerateRequest, EmptyMesh, MeshFormatError, NonConformingMesh,
)
from app.models.mesh import Box, FacetClass, Mesh

# local edge numbering used by refinement: 0:(0,1) 1:(1,2) 2:(0,2)
_REFINE_EDGES = np.array([[0, 1], [1, 2], [0, 2]])
_CCW_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


class MeshService:
    # -----------------------------------------------------------------
    # construction and classification
    # -----------------------------------------------------------------
    def build_mesh(
        self,
        vertices: np.ndarray,
        triangles: np.ndarray,
        n: Optional[np.ndarray],
        R: float,
        H: float,
    ) -> Mesh:
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if len(triangles) == 0:
            raise EmptyMesh("mesh has no triangles")
        n = np.ones(len(triangles), dtype=complex) if n is None else np.asarray(n, dtype=complex)
        if n.shape != (len(triangles),):
            raise MeshFormatError(f"{len(n)} refractive indices for {len(triangles)} triangles")
        if np.any(n.real <= 0) or np.any(n.imag < 0):
            raise MeshFormatError("refractive index needs Re(n) > 0 and Im(n) >= 0 on every triangle")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshFormatError("triangle references a vertex index out of range")

        scale = max(R, H)
        tol = settings.GEOMETRY_TOL * scale

        p = vertices[triangles]
        signed = _cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        if np.any(np.abs(signed) <= tol * scale):
            raise NonConformingMesh("mesh contains degenerate triangles")
        flip = signed < 0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]

        keys = np.sort(triangles[:, _CCW_EDGES].reshape(-1, 2), axis=1)
        facets, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            raise NonConformingMesh("a facet is shared by more than two triangles")

        owners = np.repeat(np.arange(len(triangles)), 3)
        order = np.argsort(inverse, kind="stable")
        sorted_facets = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_facets[1:] != sorted_facets[:-1]
        facet_elements = np.full((len(facets), 2), -1, dtype=np.int64)
        facet_elements[sorted_facets[first], 0] = owners[order[first]]
        facet_elements[sorted_facets[~first], 1] = owners[order[~first]]

        a = vertices[facets[:, 0]]
        b = vertices[facets[:, 1]]
        tangent = b - a
        lengths = np.linalg.norm(tangent, axis=1)
        normals = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / lengths[:, None]
        centroids = p.mean(axis=1)
        inward = np.einsum("ij,ij->i", normals, centroids[facet_elements[:, 0]] - a) > 0
        normals[inward] *= -1.0

        facet_class = np.full(len(facets), FacetClass.INTERIOR, dtype=np.int8)
        boundary = facet_elements[:, 1] < 0
        xa, xb, ya, yb = a[:, 0], b[:, 0], a[:, 1], b[:, 1]
        left = boundary & (np.abs(xa + R) < tol) & (np.abs(xb + R) < tol)
        right = boundary & (np.abs(xa - R) < tol) & (np.abs(xb - R) < tol)
        wall = boundary & (
            ((np.abs(ya) < tol) & (np.abs(yb) < tol))
            | ((np.abs(ya - H) < tol) & (np.abs(yb - H) < tol))
        )
        facet_class[left] = FacetClass.TRUNCATION_LEFT
        facet_class[right] = FacetClass.TRUNCATION_RIGHT
        facet_class[wall] = FacetClass.WALL
        stray = boundary & ~(left | right | wall)
        if np.any(stray):
            raise NonConformingMesh(
                f"{int(stray.sum())} boundary facets do not lie on the boundary of the guide "
                "(hanging node or wrong R/H)"
            )

        mesh = Mesh(
            R=R, H=H, vertices=vertices, triangles=triangles, n=n, facets=facets,
            facet_class=facet_class, facet_elements=facet_elements, facet_normals=normals,
            facet_lengths=lengths, element_facets=inverse.reshape(-1, 3),
        )
        worst = float(mesh.chunkiness.min())
        if worst < settings.CHUNKINESS_MIN:
            logger.warning(f"Mesh chunkiness {worst:.3g} is below {settings.CHUNKINESS_MIN}")
        logger.debug(
            f"Mesh built: {mesh.n_triangles} triangles, {mesh.n_facets} facets, h={mesh.h:.4g}, "
            f"l_max/l_min={mesh.edge_ratio:.4g}"
        )
        return mesh

    def _tensor_mesh(
        self,
        xs: np.ndarray,
        ys: np.ndarray,
        R: float,
        H: float,
        n_of: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> Mesh:
        nx, ny = len(xs) - 1, len(ys) - 1
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vertices = np.column_stack([X.ravel(), Y.ravel()])
        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        I, J = I.ravel(), J.ravel()
        v00 = I * (ny + 1) + J
        v10 = (I + 1) * (ny + 1) + J
        v11 = v10 + 1
        v01 = v00 + 1
        triangles = np.stack(
            [np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])], axis=1
        ).reshape(-1, 3)
        n = None
        if n_of is not None:
            n = n_of(vertices[triangles].mean(axis=1))
        return self.build_mesh(vertices, triangles, n, R, H)

    def structured_rectangle(self, R: float, H: float, nx: int, ny: int) -> Mesh:
        if R <= 0 or H <= 0 or nx < 1 or ny < 1:
            raise DegenerateRequest(f"invalid structured grid request R={R}, H={H}, nx={nx}, ny={ny}")
        return self._tensor_mesh(np.linspace(-R, R, nx + 1), np.linspace(0.0, H, ny + 1), R, H)

    def generate_uniform(self, R: float, H: float, h_target: float) -> Mesh:
        if R <= 0 or H <= 0 or h_target <= 0:
            raise DegenerateRequest(f"R, H and h_target must be positive (got {R}, {H}, {h_target})")
        if h_target >= min(2 * R, H):
            raise DegenerateRequest(f"h_target={h_target} is not smaller than min(2R, H)={min(2 * R, H)}")
        # cell diagonal sqrt(dx^2 + dy^2) <= h_target
        nx = int(np.ceil(2 * R * np.sqrt(2.0) / h_target - 1e-9))
        ny = int(np.ceil(H * np.sqrt(2.0) / h_target - 1e-9))
        mesh = self.structured_rectangle(R, H, nx, ny)
        logger.info(f"Uniform mesh: {nx}x{ny} cells, {mesh.n_triangles} triangles, h={mesh.h:.4g}")
        return mesh

    # -----------------------------------------------------------------
    # scatterer-conforming mesh
    # -----------------------------------------------------------------
    def _graded_spacings(self, length: float, fine: float, coarse: float) -> np.ndarray:
        steps = []
        total, step = 0.0, fine
        while total < length * (1 - 1e-12):
            step = min(step * settings.GRADING_RATIO, coarse)
            steps.append(step)
            total += step
        return np.asarray(steps) * (length / total)

    def _graded_axis(
        self, lo: float, hi: float, box_lo: float, box_hi: float, fine: float, coarse: float
    ) -> np.ndarray:
        inner_n = max(1, int(np.ceil((box_hi - box_lo) / fine - 1e-9)))
        inner = np.linspace(box_lo, box_hi, inner_n + 1)
        left = box_lo - np.cumsum(self._graded_spacings(box_lo - lo, fine, coarse))
        right = box_hi + np.cumsum(self._graded_spacings(hi - box_hi, fine, coarse))
        left[-1], right[-1] = lo, hi
        return np.concatenate([left[::-1], inner, right])

    def generate_scatterer_mesh(
        self,
        R: float,
        H: float,
        h_target: float,
        box: Box,
        n_inside: complex,
        interior_factor: float,
    ) -> Mesh:
        if not 0 < interior_factor <= 1:
            raise DegenerateRequest(f"interior_factor must lie in (0, 1], got {interior_factor}")
        if h_target <= 0 or h_target >= min(2 * R, H):
            raise DegenerateRequest(f"h_target={h_target} is not in (0, min(2R, H))")
        if not (-R < box.x0 and box.x1 < R and 0 < box.y0 and box.y1 < H):
            raise BoxTouchesBoundary(f"scatterer box {box.model_dump()} must lie strictly inside the guide")

        coarse = h_target / np.sqrt(2.0)
        fine = interior_factor * coarse
        xs = self._graded_axis(-R, R, box.x0, box.x1, fine, coarse)
        ys = self._graded_axis(0.0, H, box.y0, box.y1, fine, coarse)

        def n_of(centroids: np.ndarray) -> np.ndarray:
            return np.where(box.contains(centroids), complex(n_inside), 1.0 + 0j)

        mesh = self._tensor_mesh(xs, ys, R, H, n_of)
        logger.info(
            f"Scatterer mesh: {mesh.n_triangles} triangles ({int((mesh.n != 1).sum())} inside the box), "
            f"h={mesh.h:.4g}"
        )
        return mesh

    # -----------------------------------------------------------------
    # red-blue-green refinement with longest-edge closure
    # -----------------------------------------------------------------
    def _longest_edge_last(self, vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
        """Reorder vertices so that local edge (0, 2) is the longest one."""
        p = vertices[triangles]
        l01 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        l12 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
        l02 = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
        longest = np.argmax(np.column_stack([l01, l12, l02]), axis=1)
        out = triangles.copy()
        out[longest == 0] = triangles[longest == 0][:, [1, 2, 0]]
        out[longest == 1] = triangles[longest == 1][:, [2, 0, 1]]
        return out

    def refine_marked(self, mesh: Mesh, marked: np.ndarray) -> Mesh:
        marked = np.asarray(marked)
        if marked.dtype == bool:
            marked = np.flatnonzero(marked)
        if marked.size == 0:
            return mesh

        vertices = mesh.vertices
        tri = self._longest_edge_last(vertices, mesh.triangles)
        keys = np.sort(tri[:, _REFINE_EDGES].reshape(-1, 2), axis=1)
        edges, inverse = np.unique(keys, axis=0, return_inverse=True)
        tri_edges = inverse.reshape(-1, 3)

        split = np.zeros(len(edges), dtype=bool)
        split[tri_edges[marked].ravel()] = True
        # closure: a triangle with any split edge also splits its longest edge
        while True:
            pending = split[tri_edges].any(axis=1) & ~split[tri_edges[:, 2]]
            if not pending.any():
                break
            split[tri_edges[pending, 2]] = True

        mid = np.full(len(edges), -1, dtype=np.int64)
        mid[split] = len(vertices) + np.arange(int(split.sum()))
        midpoints = 0.5 * (vertices[edges[split, 0]] + vertices[edges[split, 1]])
        new_vertices = np.vstack([vertices, midpoints])

        m01, m12, m02 = mid[tri_edges].T
        v0, v1, v2 = tri.T
        has = mid[tri_edges] >= 0
        red = has.all(axis=1)
        blue_right = has[:, 1] & has[:, 2] & ~has[:, 0]
        blue_left = has[:, 0] & has[:, 2] & ~has[:, 1]
        green = has[:, 2] & ~has[:, 0] & ~has[:, 1]
        rest = ~has.any(axis=1)

        children, parents = [], []

        def emit(mask: np.ndarray, *corners: np.ndarray) -> None:
            children.append(np.column_stack([c[mask] for c in corners]))
            parents.append(np.flatnonzero(mask))

        emit(rest, v0, v1, v2)
        emit(red, v0, m01, m02)
        emit(red, m01, v1, m12)
        emit(red, m02, m12, v2)
        emit(red, m01, m12, m02)
        emit(blue_right, v0, v1, m02)
        emit(blue_right, v1, m12, m02)
        emit(blue_right, m12, v2, m02)
        emit(blue_left, v1, v2, m02)
        emit(blue_left, v0, m01, m02)
        emit(blue_left, m01, v1, m02)
        emit(green, v0, v1, m02)
        emit(green, v1, v2, m02)

        new_triangles = np.vstack(children)
        new_n = mesh.n[np.concatenate(parents)]
        logger.debug(
            f"Refinement: {int(red.sum())} red, {int((blue_left | blue_right).sum())} blue, "
            f"{int(green.sum())} green, {int(rest.sum())} untouched"
        )
        return self.build_mesh(new_vertices, new_triangles, new_n, mesh.R, mesh.H)

    def generate_layer_refined(
        self,
        R: float,
        H: float,
        h_coarse: float,
        layer: Tuple[float, float],
        refine_levels: int,
    ) -> Mesh:
        xa, xb = layer
        if refine_levels < 1:
            raise DegenerateRequest(f"refine_levels must be at least 1, got {refine_levels}")
        if not (-R < xa <= xb < R):
            raise DegenerateRequest(f"layer {layer} must lie strictly inside (-{R}, {R})")
        mesh = self.generate_uniform(R, H, h_coarse)
        for level in range(refine_levels):
            x = mesh.corners[:, :, 0]
            marked = (x.min(axis=1) < xb) & (x.max(axis=1) > xa)
            if not marked.any():
                break
            mesh = self.refine_marked(mesh, marked)
        logger.info(
            f"Layer-refined mesh: {mesh.n_triangles} triangles after {refine_levels} levels, "
            f"l_max/l_min={mesh.edge_ratio:.4g}"
        )
        return mesh

    def levels_for_ratio(
        self,
        R: float,
        H: float,
        h_coarse: float,
        layer: Tuple[float, float],
        target_ratio: float,
    ) -> Tuple[int, Mesh]:
        best: Optional[Tuple[float, int, Mesh]] = None
        for levels in range(1, settings.MAX_REFINE_LEVELS + 1):
            mesh = self.generate_layer_refined(R, H, h_coarse, layer, levels)
            miss = abs(mesh.edge_ratio - target_ratio)
            if best is None or miss < best[0]:
                best = (miss, levels, mesh)
            if mesh.edge_ratio > target_ratio:
                break
        _, levels, mesh = best
        logger.info(f"Chose {levels} refinement levels: l_max/l_min={mesh.edge_ratio:.4g} (target {target_ratio})")
        return levels, mesh

    # -----------------------------------------------------------------
    # point location
    # -----------------------------------------------------------------
    def barycentric(self, mesh: Mesh, points: np.ndarray, elements: np.ndarray) -> np.ndarray:
        p = mesh.vertices[mesh.triangles[elements]]
        e1 = p[..., 1, :] - p[..., 0, :]
        e2 = p[..., 2, :] - p[..., 0, :]
        rel = points - p[..., 0, :]
        det = _cross(e1, e2)
        l1 = _cross(rel, e2) / det
        l2 = _cross(e1, rel) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)

    def locate(self, mesh: Mesh, points: np.ndarray, candidates: int = 12) -> np.ndarray:
        """Element index containing each point, -1 where no element does."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tol = 1e-10
        found = np.full(len(points), -1, dtype=np.int64)
        if len(points) == 0:
            return found
        kq = min(candidates, mesh.n_triangles)
        _, cand = cKDTree(mesh.centroids).query(points, k=kq)
        cand = np.asarray(cand).reshape(len(points), kq)
        lam = self.barycentric(mesh, points[:, None, :], cand)
        inside = (lam >= -tol).all(axis=-1)
        hit = inside.any(axis=1)
        found[hit] = cand[hit, inside[hit].argmax(axis=1)]

        everything = np.arange(mesh.n_triangles)
        for i in np.flatnonzero(~hit):
            lam = self.barycentric(mesh, points[i][None, :], everything)
            inside = np.flatnonzero((lam >= -tol).all(axis=-1))
            if inside.size:
                found[i] = inside[0]
        return found


mesh_service = MeshService()
