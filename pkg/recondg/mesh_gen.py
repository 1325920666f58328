"""recondg: structured test meshes of the unit square

Boundary markers: 1 bottom, 2 right, 3 top, 4 left.
"""

import numpy as _np
import scipy.sparse as _sparse
import scipy.sparse.csgraph as _csgraph
import scipy.spatial as _spatial
import recondg.mesh as _mesh


def _square_markers(vertices, cells, tol=1e-12):
    vertices = _np.asarray(vertices)
    count = {}
    for cell in cells:
        for a, b in zip(cell, list(cell[1:]) + [cell[0]]):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    markers = {}
    for (a, b), uses in count.items():
        if uses != 1:
            continue
        mid = 0.5 * (vertices[a] + vertices[b])
        if abs(mid[1]) < tol:
            markers[(a, b)] = 1
        elif abs(mid[0] - 1) < tol:
            markers[(a, b)] = 2
        elif abs(mid[1] - 1) < tol:
            markers[(a, b)] = 3
        elif abs(mid[0]) < tol:
            markers[(a, b)] = 4
    return markers


def _grid(n):
    if n < 1:
        raise _mesh.MeshError(f"Grid size must be positive, got {n}")
    coords = _np.linspace(0.0, 1.0, n + 1)
    x, y = _np.meshgrid(coords, coords)
    return _np.column_stack([x.ravel(), y.ravel()])


def _square(n, i, j):
    a = j * (n + 1) + i
    return a, a + 1, a + n + 2, a + n + 1


def structured_triangles(n):
    """n x n squares, each split along its rising diagonal"""
    vertices = _grid(n)
    cells = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = _square(n, i, j)
            cells.append((a, b, c))
            cells.append((a, c, d))
    return _mesh.PolyMesh(vertices, cells, _square_markers(vertices, cells))


def structured_quads(n):
    """n x n squares"""
    vertices = _grid(n)
    cells = [_square(n, i, j) for j in range(n) for i in range(n)]
    return _mesh.PolyMesh(vertices, cells, _square_markers(vertices, cells))


def structured_mixed(n):
    """n x n squares, every second column split into triangles"""
    vertices = _grid(n)
    cells = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = _square(n, i, j)
            if i % 2:
                cells.append((a, b, c))
                cells.append((a, c, d))
            else:
                cells.append((a, b, c, d))
    return _mesh.PolyMesh(vertices, cells, _square_markers(vertices, cells))


def _hexagonal_seeds(n, jitter, seed):
    dx = 1.0 / n
    rows = max(1, int(round(1.0 / (dx * _np.sqrt(3.0) / 2.0))))
    seeds = []
    for j in range(rows):
        y = (j + 0.5) / rows
        if j % 2:
            seeds.extend((i * dx, y) for i in range(1, n))
        else:
            seeds.extend(((i + 0.5) * dx, y) for i in range(n))
    seeds = _np.array(seeds)
    if jitter:
        rng = _np.random.default_rng(seed)
        seeds += rng.uniform(-jitter * dx, jitter * dx, seeds.shape)
    return seeds


def voronoi_hexagons(n, jitter=0.1, seed=0):
    """Voronoi cells of a hexagonal lattice clipped to the unit square

    Arguments:
        n: seeds per lattice row
        jitter: seed displacement, fraction of the lattice spacing
        seed: random seed of the displacement

    Returns:
        PolyMesh with hexagons inside and clipped cells on the boundary
    """
    seeds = _hexagonal_seeds(n, jitter, seed)
    count = len(seeds)
    mirrored = [seeds]
    for axis, value in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
        reflection = seeds.copy()
        reflection[:, axis] = 2 * value - reflection[:, axis]
        mirrored.append(reflection)
    voronoi = _spatial.Voronoi(_np.vstack(mirrored))
    points = voronoi.vertices
    # coincident vertices from cocircular mirror pairs
    tol = 1e-9 / n
    pairs = _np.array(
        sorted(_spatial.cKDTree(points).query_pairs(tol)), dtype=int)
    pairs = pairs.reshape(-1, 2)
    graph = _sparse.coo_matrix(
        (_np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
        shape=(len(points), len(points)))
    _count, alias = _csgraph.connected_components(graph, directed=False)
    _labels, first = _np.unique(alias, return_index=True)
    points = points[first]
    cells = []
    for index in range(count):
        region = voronoi.regions[voronoi.point_region[index]]
        if -1 in region or not region:
            raise _mesh.TopologyError(f"Voronoi cell {index} is unbounded")
        ring = []
        for vertex in region:
            vertex = int(alias[vertex])
            if vertex not in ring:
                ring.append(vertex)
        angles = _np.arctan2(
            points[ring, 1] - seeds[index, 1], points[ring, 0] - seeds[index, 0])
        cells.append([ring[k] for k in _np.argsort(angles)])
    used = sorted({v for cell in cells for v in cell})
    renumber = {v: i for i, v in enumerate(used)}
    vertices = points[used].copy()
    for axis in (0, 1):
        for value in (0.0, 1.0):
            near = _np.abs(vertices[:, axis] - value) < tol
            vertices[near, axis] = value
    cells = [[renumber[v] for v in cell] for cell in cells]
    return _mesh.PolyMesh(vertices, cells, _square_markers(vertices, cells))


GENERATORS = {
    'tri': structured_triangles,
    'quad': structured_quads,
    'mixed': structured_mixed,
    'hex': voronoi_hexagons,
}
