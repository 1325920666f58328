"""recondg: sub-triangulation and quadrature"""

import dataclasses as _dataclasses
import functools as _functools
import numpy as _np
import scipy.special as _special
import recondg.mesh as _mesh


AREA_RTOL = 1e-9


@_dataclasses.dataclass(frozen=True)
class QuadratureRule():
    """Points and weights, weights sum to the measure of the domain"""
    points: _np.ndarray
    weights: _np.ndarray
    degree: int

    @property
    def measure(self):
        return float(self.weights.sum())

    def integrate(self, values):
        """Integrate sampled values, leading axis runs over points"""
        return _np.tensordot(self.weights, values, axes=(0, 0))


@_dataclasses.dataclass(frozen=True)
class RegularityReport():
    n_max: int
    sigma: float
    rho1: float
    h: float
    sigma_threshold: float
    irregular_cells: tuple

    @property
    def regular(self):
        return not self.irregular_cells


class SubTriangulation():
    """Compatible sub-decomposition of every cell into triangles

    Arguments:
        triangles: per cell (nt, 3, 2) array of counter-clockwise triangles
    """
    def __init__(self, triangles):
        self._triangles = tuple(triangles)
        self._h_t = []
        self._rho_t = []
        for tris in self._triangles:
            tris.flags.writeable = False
            sides = _np.linalg.norm(
                tris - _np.roll(tris, -1, axis=1), axis=2)
            area = _triangle_areas(tris)
            self._h_t.append(sides.max(axis=1))
            self._rho_t.append(2.0 * area / sides.sum(axis=1))

    @property
    def triangles(self):
        return self._triangles

    @property
    def h_t(self):
        """per cell triangle diameters"""
        return tuple(self._h_t)

    @property
    def rho_t(self):
        """per cell triangle inradii"""
        return tuple(self._rho_t)

    @property
    def counts(self):
        return _np.array([len(tris) for tris in self._triangles])

    @property
    def n_max(self):
        return int(self.counts.max())

    @property
    def shape_ratios(self):
        """per cell worst h_T / rho_T"""
        return _np.array([
            float((h / rho).max()) for h, rho in zip(self._h_t, self._rho_t)])

    def cell_triangles(self, cell):
        return self._triangles[cell]


def _triangle_areas(tris):
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _is_convex(polygon):
    edges = _np.roll(polygon, -1, axis=0) - polygon
    turns = edges[:, 0] * _np.roll(edges[:, 1], -1) \
        - edges[:, 1] * _np.roll(edges[:, 0], -1)
    scale = _np.abs(edges).max() ** 2
    return bool((turns >= -1e-14 * scale).all())


def _inside_triangle(point, a, b, c):
    d1 = _mesh.cross(a, b, point)
    d2 = _mesh.cross(b, c, point)
    d3 = _mesh.cross(c, a, point)
    return d1 >= 0 and d2 >= 0 and d3 >= 0


def _ear_clip(cell, polygon):
    remaining = list(range(len(polygon)))
    triangles = []
    while len(remaining) > 3:
        count = len(remaining)
        for pos in range(count):
            a = remaining[pos - 1]
            b = remaining[pos]
            c = remaining[(pos + 1) % count]
            if _mesh.cross(polygon[a], polygon[b], polygon[c]) <= 0:
                continue
            if any(
                    _inside_triangle(polygon[p], polygon[a], polygon[b], polygon[c])
                    for p in remaining if p not in (a, b, c)):
                continue
            triangles.append(polygon[[a, b, c]])
            del remaining[pos]
            break
        else:
            raise _mesh.DegenerateCellError(cell, "no ear found")
    triangles.append(polygon[remaining])
    return triangles


def subtriangulate(mesh):
    """Split every cell into triangles

    Triangles stay as they are, convex cells use a fan around the
    barycenter, other cells are ear clipped.

    Arguments:
        mesh: PolyMesh

    Returns:
        SubTriangulation

    Raises:
        DegenerateCellError when triangles do not reproduce the cell area
    """
    result = []
    for cell in range(mesh.n_cells):
        polygon = mesh.cell_polygon(cell)
        if len(polygon) == 3:
            tris = [polygon]
        elif _is_convex(polygon):
            center = mesh.cell_barycenter[cell]
            tris = [
                _np.array([center, polygon[i], polygon[(i + 1) % len(polygon)]])
                for i in range(len(polygon))]
        else:
            tris = _ear_clip(cell, polygon)
        tris = _np.array(tris, dtype=float)
        areas = _triangle_areas(tris)
        cell_area = mesh.cell_area[cell]
        tol = AREA_RTOL * max(cell_area, mesh.cell_diameter[cell] ** 2)
        if cell_area <= 0 or (areas <= 0).any() or (
                len(tris) > 1 and abs(areas.sum() - cell_area) > tol):
            raise _mesh.DegenerateCellError(cell, "cannot be triangulated")
        result.append(tris)
    return SubTriangulation(result)


@_functools.lru_cache(maxsize=None)
def triangle_rule(degree):
    """Collapsed Gauss rule on the triangle (0,0)-(1,0)-(0,1)

    Gauss-Jacobi in the collapsed direction absorbs the Jacobian, so
    degree // 2 + 1 points per direction integrate total degree exactly.
    """
    count = degree // 2 + 1
    x_leg, w_leg = _special.roots_legendre(count)
    x_jac, w_jac = _special.roots_jacobi(count, 1, 0)
    s = (x_jac + 1) / 2
    t = (x_leg + 1) / 2
    points = _np.column_stack([
        _np.outer(s, _np.ones(count)).ravel(),
        _np.outer(1 - s, t).ravel()])
    weights = _np.outer(w_jac, w_leg).ravel() / 8
    points.flags.writeable = False
    weights.flags.writeable = False
    return points, weights


def triangles_quadrature(tris, degree):
    """Composite rule on (nt, 3, 2) triangles"""
    ref_points, ref_weights = triangle_rule(degree)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    jacobian = _np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    points = tris[:, None, 0] \
        + ref_points[None, :, 0, None] * e1[:, None] \
        + ref_points[None, :, 1, None] * e2[:, None]
    weights = jacobian[:, None] * ref_weights[None, :]
    return QuadratureRule(points.reshape(-1, 2), weights.ravel(), degree)


def cell_quadrature(mesh, sub, cell, degree):
    """Composite Gauss rule over the sub-triangles of a cell

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation of mesh
        cell: cell index
        degree: total polynomial degree integrated exactly

    Returns:
        QuadratureRule with weights summing to |K|
    """
    if degree < 0:
        raise ValueError(f"Quadrature degree must be >= 0, got {degree}")
    return triangles_quadrature(sub.cell_triangles(cell), degree)


def segment_quadrature(start, end, degree):
    count = degree // 2 + 1
    x, w = _special.roots_legendre(count)
    start = _np.asarray(start, dtype=float)
    end = _np.asarray(end, dtype=float)
    length = float(_np.linalg.norm(end - start))
    points = start + ((x + 1) / 2)[:, None] * (end - start)
    return QuadratureRule(points, w * length / 2, degree)


def edge_quadrature(mesh, edge, degree):
    """Gauss-Legendre rule on a mesh edge

    Arguments:
        mesh: PolyMesh
        edge: edge index
        degree: polynomial degree integrated exactly

    Returns:
        QuadratureRule with weights summing to |e|
    """
    if degree < 0:
        raise ValueError(f"Quadrature degree must be >= 0, got {degree}")
    a, b = mesh.edges[edge]
    return segment_quadrature(mesh.vertices[a], mesh.vertices[b], degree)


def validate_regularity(mesh, sub, sigma_threshold=20.0, log=None):
    """Shape regularity of the sub-triangulation

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation
        sigma_threshold: warn for cells with h_T / rho_T above
        log: logger

    Returns:
        RegularityReport with N, sigma, rho_1 and h
    """
    ratios = sub.shape_ratios
    rho1 = max(
        float(mesh.cell_diameter[cell] / sub.h_t[cell].min())
        for cell in range(mesh.n_cells))
    irregular = tuple(int(c) for c in _np.flatnonzero(ratios > sigma_threshold))
    if irregular and log:
        log.warning(
            "%d cells exceed shape ratio %g (worst %.3g in cell %d)",
            len(irregular), sigma_threshold, ratios.max(), int(ratios.argmax()))
    return RegularityReport(
        n_max=sub.n_max,
        sigma=float(ratios.max()),
        rho1=rho1,
        h=mesh.h,
        sigma_threshold=sigma_threshold,
        irregular_cells=irregular)
