"""recondg: polygonal mesh"""

import numpy as _np
import scipy.spatial.distance as _distance
import matplotlib.path as _mpath


class MeshError(Exception):
    """General mesh error"""


class ParseError(MeshError):
    """Mesh file syntax error"""
    def __init__(self, line_no, message):
        self._line_no = line_no
        self._message = message
        super().__init__(self.__str__())

    def __str__(self):
        return f"line {self._line_no}: {self._message}"

    @property
    def line_no(self):
        return self._line_no


class TopologyError(MeshError):
    """Invalid edge topology"""


class UnsupportedFormatError(MeshError):
    """Unsupported mesh format or element"""


class MeshFileNotFound(MeshError):
    """Mesh file not found"""
    def __init__(self, path):
        self._path = path
        super().__init__(self.__str__())

    def __str__(self):
        return f"file not found: {self._path}"


class CellError(MeshError):
    """Invalid cell"""
    def __init__(self, cell, reason):
        self._cell = cell
        self._reason = reason
        super().__init__(self.__str__())

    def __str__(self):
        return f"Cell {self._cell}: {self._reason}"

    @property
    def cell(self):
        return self._cell


class OrientationError(CellError):
    """Clockwise cell"""
    def __init__(self, cell):
        super().__init__(cell, "vertices are listed clockwise")


class DegenerateCellError(CellError):
    """Zero area or self-intersecting cell"""


def signed_area(polygon):
    """Shoelace area, positive for counter-clockwise polygon"""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(_np.dot(x, _np.roll(y, -1)) - _np.dot(_np.roll(x, -1), y))


def polygon_centroid(polygon):
    x, y = polygon[:, 0], polygon[:, 1]
    x1, y1 = _np.roll(x, -1), _np.roll(y, -1)
    cross = x * y1 - x1 * y
    area = 0.5 * cross.sum()
    return _np.array([
        ((x + x1) * cross).sum() / (6 * area),
        ((y + y1) * cross).sum() / (6 * area)])


def segment_distance(points, start, end):
    """Distance of points to segment

    Arguments:
        points: (n, 2) array
        start, end: segment end points

    Returns:
        (n,) distances
    """
    points = _np.atleast_2d(points)
    direction = end - start
    length2 = float(direction @ direction)
    t = ((points - start) @ direction) / length2
    t = _np.clip(t, 0.0, 1.0)
    nearest = start + t[:, None] * direction
    return _np.linalg.norm(points - nearest, axis=1)


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_intersect(p1, p2, q1, q2):
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) \
            and d1 and d2 and d3 and d4:
        return True

    def on_segment(a, b, p, d):
        return d == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) \
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    return on_segment(q1, q2, p1, d1) or on_segment(q1, q2, p2, d2) \
        or on_segment(p1, p2, q1, d3) or on_segment(p1, p2, q2, d4)


class PolyMesh():
    """Polygonal mesh with derived edge topology

    Arguments:
        vertices: (nv, 2) vertex coordinates
        cells: vertex index cycles, counter-clockwise
        boundary_markers: {(i, j): marker} for boundary edges,
            undeclared boundary edges get marker 0
        fix_orientation: reverse clockwise cells instead of raising
        log: logger

    Raises:
        CellError, TopologyError when the mesh is invalid
    """
    AREA_TOL = 1e-10

    def __init__(
            self, vertices, cells, boundary_markers=None,
            fix_orientation=False, log=None):
        self._log = log
        self._vertices = _np.array(vertices, dtype=float).reshape(-1, 2)
        self._vertices.flags.writeable = False
        self._cells = tuple(
            self._check_cell(index, cell, fix_orientation)
            for index, cell in enumerate(cells))
        if not self._cells:
            raise TopologyError("Mesh has no cells")
        self._build_geometry()
        self._build_edges()
        self._assign_markers(boundary_markers or {})
        self._check_coverage()

    def _check_cell(self, index, cell, fix_orientation):
        cell = tuple(int(i) for i in cell)
        if len(cell) < 3:
            raise DegenerateCellError(index, "less than 3 vertices")
        for i in cell:
            if not 0 <= i < len(self._vertices):
                raise TopologyError(
                    f"Cell {index} references missing vertex {i}")
        if len(set(cell)) != len(cell):
            raise DegenerateCellError(index, "repeated vertex")
        polygon = self._vertices[list(cell)]
        area = signed_area(polygon)
        extent = _np.ptp(polygon, axis=0).max()
        if abs(area) <= 1e-14 * extent * extent:
            raise DegenerateCellError(index, "zero area")
        if area < 0:
            if not fix_orientation:
                raise OrientationError(index)
            if self._log:
                self._log.warning("Cell %d is clockwise, reversed", index)
            cell = cell[::-1]
            polygon = polygon[::-1]
        count = len(cell)
        for i in range(count):
            for j in range(i + 2, count):
                if i == 0 and j == count - 1:
                    continue
                if _segments_intersect(
                        polygon[i], polygon[(i + 1) % count],
                        polygon[j], polygon[(j + 1) % count]):
                    raise DegenerateCellError(index, "self-intersecting")
        return cell

    def _build_geometry(self):
        polygons = [self._vertices[list(cell)] for cell in self._cells]
        self._cell_area = _np.array([signed_area(p) for p in polygons])
        self._cell_barycenter = _np.array(
            [polygon_centroid(p) for p in polygons])
        self._cell_diameter = _np.array(
            [_distance.pdist(p).max() for p in polygons])
        for array in (
                self._cell_area, self._cell_barycenter, self._cell_diameter):
            array.flags.writeable = False

    def _build_edges(self):
        edge_index = {}
        edges = []
        edge_cells = []
        edge_direction = []
        cell_edges = []
        vertex_cells = [set() for _ in range(len(self._vertices))]
        for index, cell in enumerate(self._cells):
            local = []
            for a, b in zip(cell, cell[1:] + cell[:1]):
                vertex_cells[a].add(index)
                key = (min(a, b), max(a, b))
                edge = edge_index.get(key)
                if edge is None:
                    edge = len(edges)
                    edge_index[key] = edge
                    edges.append(key)
                    edge_cells.append([])
                    edge_direction.append([])
                edge_cells[edge].append(index)
                edge_direction[edge].append(a < b)
                if len(edge_cells[edge]) > 2:
                    raise TopologyError(
                        f"Edge {key} is shared by more than two cells: "
                        f"{edge_cells[edge]}")
                local.append(edge)
            cell_edges.append(tuple(local))
        for edge, directions in enumerate(edge_direction):
            if len(directions) == 2 and directions[0] == directions[1]:
                raise TopologyError(
                    f"Cells {edge_cells[edge]} overlap along edge "
                    f"{edges[edge]}")
        self._edge_index = edge_index
        self._edges = _np.array(edges, dtype=int)
        self._edges.flags.writeable = False
        self._edge_cells = tuple(tuple(cells) for cells in edge_cells)
        self._cell_edges = tuple(cell_edges)
        self._vertex_cells = tuple(frozenset(c) for c in vertex_cells)
        self._boundary_edges = tuple(
            e for e, cells in enumerate(self._edge_cells) if len(cells) == 1)
        self._interior_edges = tuple(
            e for e, cells in enumerate(self._edge_cells) if len(cells) == 2)
        vectors = self._vertices[self._edges[:, 1]] \
            - self._vertices[self._edges[:, 0]]
        self._edge_length = _np.linalg.norm(vectors, axis=1)
        self._edge_midpoint = 0.5 * (
            self._vertices[self._edges[:, 0]]
            + self._vertices[self._edges[:, 1]])
        self._edge_length.flags.writeable = False
        self._edge_midpoint.flags.writeable = False

    def _assign_markers(self, boundary_markers):
        self._markers = {edge: 0 for edge in self._boundary_edges}
        for (i, j), marker in boundary_markers.items():
            edge = self._edge_index.get((min(i, j), max(i, j)))
            if edge is None or len(self._edge_cells[edge]) != 1:
                raise TopologyError(f"Edge ({i}, {j}) is not a boundary edge")
            self._markers[edge] = int(marker)

    def _check_coverage(self):
        total = float(self._cell_area.sum())
        enclosed = 0.0
        for edge in self._boundary_edges:
            a, b = self.oriented_edge(edge, self._edge_cells[edge][0])
            pa, pb = self._vertices[a], self._vertices[b]
            enclosed += 0.5 * (pa[0] * pb[1] - pb[0] * pa[1])
        if abs(total - enclosed) > self.AREA_TOL * total:
            raise TopologyError(
                f"Cell areas {total} do not match domain area {enclosed}")
        self._area = enclosed

    @property
    def vertices(self):
        return self._vertices

    @property
    def cells(self):
        return self._cells

    @property
    def n_vertices(self):
        return len(self._vertices)

    @property
    def n_cells(self):
        return len(self._cells)

    @property
    def n_edges(self):
        return len(self._edges)

    @property
    def edges(self):
        """(ne, 2) vertex indices, smaller index first"""
        return self._edges

    @property
    def edge_cells(self):
        """incident cells per edge, 1 on boundary, 2 inside"""
        return self._edge_cells

    @property
    def cell_edges(self):
        """edges per cell, edge k joins local vertices k and k + 1"""
        return self._cell_edges

    @property
    def vertex_cells(self):
        return self._vertex_cells

    @property
    def boundary_edges(self):
        return self._boundary_edges

    @property
    def interior_edges(self):
        return self._interior_edges

    @property
    def markers(self):
        """boundary marker per boundary edge"""
        return dict(self._markers)

    @property
    def cell_area(self):
        return self._cell_area

    @property
    def cell_barycenter(self):
        return self._cell_barycenter

    @property
    def cell_diameter(self):
        """h_K, largest vertex distance"""
        return self._cell_diameter

    @property
    def edge_length(self):
        return self._edge_length

    @property
    def edge_midpoint(self):
        return self._edge_midpoint

    @property
    def h(self):
        return float(self._cell_diameter.max())

    @property
    def area(self):
        return self._area

    def boundary_marker(self, edge):
        return self._markers[edge]

    def is_boundary(self, edge):
        return len(self._edge_cells[edge]) == 1

    def cell_polygon(self, cell):
        return self._vertices[list(self._cells[cell])]

    def edge_index(self, i, j):
        """Edge id joining vertices i and j or None"""
        return self._edge_index.get((min(i, j), max(i, j)))

    def oriented_edge(self, edge, cell):
        """Edge end points in counter-clockwise order of cell"""
        local = self._cell_edges[cell].index(edge)
        vertices = self._cells[cell]
        return vertices[local], vertices[(local + 1) % len(vertices)]

    def edge_normal(self, edge, cell):
        """Outward unit normal of edge with respect to cell"""
        a, b = self.oriented_edge(edge, cell)
        tangent = (self._vertices[b] - self._vertices[a]) \
            / self._edge_length[edge]
        return _np.array([tangent[1], -tangent[0]])

    def other_cell(self, edge, cell):
        cells = self._edge_cells[edge]
        if len(cells) == 1:
            return None
        return cells[1] if cells[0] == cell else cells[0]

    def edge_neighbors(self, cell):
        """Von Neumann neighbors: cells sharing an edge"""
        result = set()
        for edge in self._cell_edges[cell]:
            other = self.other_cell(edge, cell)
            if other is not None:
                result.add(other)
        return result

    def touching_neighbors(self, cell):
        """Moore neighbors: cells whose closure meets the cell closure"""
        result = set()
        for vertex in self._cells[cell]:
            result.update(self._vertex_cells[vertex])
        result.discard(cell)
        return result

    def distance_to_boundary(self, cell, point):
        """Distance of point to the boundary of cell"""
        polygon = self.cell_polygon(cell)
        point = _np.asarray(point, dtype=float)
        return min(
            float(segment_distance(point, polygon[i], polygon[i - 1])[0])
            for i in range(len(polygon)))

    def contains(self, cell, point, strict=True):
        """Point in polygon test

        Arguments:
            cell: cell index
            point: 2D point
            strict: points on the cell boundary are outside
        """
        polygon = self.cell_polygon(cell)
        if not _mpath.Path(polygon).contains_point(point):
            if strict:
                return False
            return self.distance_to_boundary(cell, point) \
                <= 1e-12 * self._cell_diameter[cell]
        if strict:
            return self.distance_to_boundary(cell, point) \
                > 1e-12 * self._cell_diameter[cell]
        return True
