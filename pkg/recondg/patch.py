"""recondg: element patches and sampling nodes"""

import dataclasses as _dataclasses
import numpy as _np
import scipy.spatial as _spatial
import scipy.spatial.distance as _distance
import recondg.mesh as _mesh
import recondg.recon as _recon
import recondg.quadrature as _quadrature


MOORE = 'moore'
VON_NEUMANN = 'von_neumann'
RULES = (MOORE, VON_NEUMANN)

PERTURB_TRIES = 100
CONVEX_RTOL = 1e-9


class PatchError(Exception):
    """General patch error"""


class UnknownRule(PatchError):
    def __init__(self, rule):
        self._rule = rule
        super().__init__(self.__str__())

    def __str__(self):
        return f"Unknown neighbor rule '{self._rule}', use one of {RULES}"


class MeshTooCoarse(PatchError):
    """Patch cannot grow to the required size"""
    def __init__(self, cell, degree, members, needed):
        self._cell = cell
        self._degree = degree
        self._members = members
        self._needed = needed
        super().__init__(self.__str__())

    def __str__(self):
        return (
            f"Cell {self._cell}: mesh too coarse for order {self._degree} "
            f"(patch covers {self._members} cells, needs {self._needed})")

    @property
    def cell(self):
        return self._cell


class Patch():
    """Element patch S(K) with one sampling node per member

    Arguments:
        owner: cell K
        members: cell ids, owner first
        nodes: (#members, 2) sampling nodes
        depth: recursion depth t
        rule: MOORE or VON_NEUMANN
        center: basis center, default owner node
        diameter: patch diameter d_K, default node diameter
    """
    def __init__(
            self, owner, members, nodes, depth=0, rule=VON_NEUMANN,
            center=None, diameter=None):
        members = tuple(int(m) for m in members)
        nodes = _np.array(nodes, dtype=float).reshape(-1, 2)
        if not members or members[0] != owner:
            raise PatchError(f"Patch of cell {owner} must start with its owner")
        if len(set(members)) != len(members):
            raise PatchError(f"Patch of cell {owner} has repeated members")
        if len(nodes) != len(members):
            raise PatchError(
                f"Patch of cell {owner}: {len(nodes)} nodes "
                f"for {len(members)} members")
        if rule not in RULES:
            raise UnknownRule(rule)
        if center is None:
            center = nodes[0]
        if diameter is None:
            diameter = float(_distance.pdist(nodes).max()) \
                if len(nodes) > 1 else 1.0
        nodes.flags.writeable = False
        self._owner = int(owner)
        self._members = members
        self._nodes = nodes
        self._depth = int(depth)
        self._rule = rule
        self._center = _np.array(center, dtype=float)
        self._diameter = float(diameter)

    def __len__(self):
        return len(self._members)

    def __repr__(self):
        return (
            f"Patch(owner={self._owner}, depth={self._depth}, "
            f"rule={self._rule}, members={len(self._members)})")

    @property
    def owner(self):
        return self._owner

    @property
    def members(self):
        return self._members

    @property
    def nodes(self):
        return self._nodes

    @property
    def depth(self):
        return self._depth

    @property
    def rule(self):
        return self._rule

    @property
    def center(self):
        return self._center

    @property
    def diameter(self):
        return self._diameter

    def with_nodes(self, nodes):
        return Patch(
            self._owner, self._members, nodes, depth=self._depth,
            rule=self._rule, center=self._center, diameter=self._diameter)


def _neighbors(mesh, cell, rule):
    if rule == MOORE:
        return mesh.touching_neighbors(cell)
    if rule == VON_NEUMANN:
        return mesh.edge_neighbors(cell)
    raise UnknownRule(rule)


def _patch_vertices(mesh, members):
    used = sorted({v for cell in members for v in mesh.cells[cell]})
    return mesh.vertices[used]


def build_patch(mesh, cell, depth, rule=VON_NEUMANN, nodes=None):
    """Recursive neighbor closure of a cell

    Arguments:
        mesh: PolyMesh
        cell: owner cell
        depth: recursion depth t >= 0
        rule: MOORE or VON_NEUMANN
        nodes: (n_cells, 2) sampling nodes, default cell barycenters

    Returns:
        Patch, members ordered by layer and by id inside a layer, depth
        is the last level that added cells
    """
    if depth < 0:
        raise PatchError(f"Patch depth must be >= 0, got {depth}")
    if rule not in RULES:
        raise UnknownRule(rule)
    members = [cell]
    seen = {cell}
    frontier = [cell]
    reached = 0
    while reached < depth:
        layer = set()
        for current in frontier:
            layer.update(_neighbors(mesh, current, rule))
        layer -= seen
        if not layer:
            break
        frontier = sorted(layer)
        members.extend(frontier)
        seen.update(layer)
        reached += 1
    if nodes is None:
        nodes = mesh.cell_barycenter
    diameter = float(_distance.pdist(_patch_vertices(mesh, members)).max())
    return Patch(
        cell, members, nodes[members], depth=reached, rule=rule,
        center=mesh.cell_barycenter[cell], diameter=diameter)


def fit_auto(
        mesh, cell, m, rule=VON_NEUMANN, safety=2.0, nodes=None,
        rank_tol=1e-10):
    """Smallest patch with enough unisolvent nodes and its operator

    Returns:
        (Patch, ReconOp)

    Raises:
        MeshTooCoarse when the patch stops growing first
    """
    if m < 0:
        raise PatchError(f"Order must be >= 0, got {m}")
    if safety < 1:
        raise PatchError(f"Safety factor must be >= 1, got {safety}")
    needed = int(_np.ceil(safety * _recon.poly_dim(m)))
    depth = 0
    previous = 0
    while True:
        patch = build_patch(mesh, cell, depth, rule=rule, nodes=nodes)
        if len(patch) >= needed:
            try:
                return patch, _recon.fit_operator(patch, m, rank_tol=rank_tol)
            except _recon.AssumptionBViolation:
                pass
        if len(patch) == previous:
            raise MeshTooCoarse(cell, m, len(patch), needed)
        previous = len(patch)
        depth += 1


def auto_depth(mesh, cell, m, rule=VON_NEUMANN, safety=2.0, nodes=None):
    """Patch of the smallest depth t with #I(K) >= safety * dim P_m
    and a full rank design matrix

    Raises:
        MeshTooCoarse
    """
    patch, _op = fit_auto(mesh, cell, m, rule=rule, safety=safety, nodes=nodes)
    return patch


def _perturbed_node(mesh, cell, magnitude, seed):
    center = mesh.cell_barycenter[cell]
    if not magnitude:
        return center.copy()
    rng = _np.random.default_rng([seed, cell])
    radius = magnitude * mesh.cell_diameter[cell]
    offset = None
    for _ in range(PERTURB_TRIES):
        angle = rng.uniform(0.0, 2.0 * _np.pi)
        offset = radius * _np.array([_np.cos(angle), _np.sin(angle)])
        if mesh.contains(cell, center + offset):
            return center + offset
    for _ in range(60):
        offset = 0.5 * offset
        if mesh.contains(cell, center + offset):
            return center + offset
    return center.copy()


def sampling_nodes(mesh, magnitude=0.0, seed=0, log=None):
    """One sampling node per cell

    Arguments:
        mesh: PolyMesh
        magnitude: node offset as a fraction of h_K, 0 <= magnitude < 1
        seed: random seed, the offset of cell K depends on (seed, K) only
        log: logger

    Returns:
        (n_cells, 2) nodes, barycenters moved by a random vector of
        norm magnitude * h_K kept inside the cell
    """
    if not 0.0 <= magnitude < 1.0:
        raise PatchError(f"Perturbation must be in [0, 1), got {magnitude}")
    nodes = _np.array([
        _perturbed_node(mesh, cell, magnitude, seed)
        for cell in range(mesh.n_cells)])
    if magnitude and log:
        shift = _np.linalg.norm(nodes - mesh.cell_barycenter, axis=1)
        short = int((shift < 0.999 * magnitude * mesh.cell_diameter).sum())
        log.info(
            "Perturbed sampling nodes by %g h_K (seed %d), %d clamped",
            magnitude, seed, short)
    return nodes


def perturb_nodes(mesh, patch, magnitude, seed):
    """Patch with perturbed sampling nodes, same members"""
    if not 0.0 <= magnitude < 1.0:
        raise PatchError(f"Perturbation must be in [0, 1), got {magnitude}")
    return patch.with_nodes([
        _perturbed_node(mesh, cell, magnitude, seed)
        for cell in patch.members])


@_dataclasses.dataclass(frozen=True)
class PatchGeometry():
    d_K: float
    R: float
    r: float
    gamma: float
    theta: float
    width: float
    convex: bool = False

    @property
    def star_ratio_ok(self):
        """R >= 2r as required for the whole mesh"""
        return self.R >= 2.0 * self.r


def _hull_width(points):
    """Width of the convex hull and its area"""
    try:
        hull = _spatial.ConvexHull(points)
    except _spatial.QhullError:
        return 0.0, 0.0
    ring = points[hull.vertices]
    width = _np.inf
    for i in range(len(ring)):
        start, end = ring[i], ring[(i + 1) % len(ring)]
        direction = end - start
        length = _np.hypot(*direction)
        offsets = ring - start
        heights = _np.abs(
            direction[0] * offsets[:, 1] - direction[1] * offsets[:, 0])
        width = min(width, float(heights.max() / length))
    return width, float(hull.volume)


def cone_aperture(r, radius):
    """Aperture 2 arcsin(r / 2R) of the interior cone"""
    return float(2.0 * _np.arcsin(min(1.0, r / (2.0 * radius))))


def geometry_report(mesh, patch):
    """Geometric diagnostics of a patch

    R is measured from the area weighted patch centroid, r is the
    distance of the owner barycenter to the patch boundary.

    Returns:
        PatchGeometry
    """
    members = list(patch.members)
    points = _patch_vertices(mesh, members)
    areas = mesh.cell_area[members]
    centroid = (areas[:, None] * mesh.cell_barycenter[members]).sum(axis=0) \
        / areas.sum()
    radius_out = float(_np.linalg.norm(points - centroid, axis=1).max())
    uses = {}
    for cell in members:
        for edge in mesh.cell_edges[cell]:
            uses[edge] = uses.get(edge, 0) + 1
    owner = mesh.cell_barycenter[patch.owner]
    radius_in = min(
        float(_mesh.segment_distance(
            owner, mesh.vertices[mesh.edges[edge, 0]],
            mesh.vertices[mesh.edges[edge, 1]])[0])
        for edge, count in uses.items() if count == 1)
    d_k = float(_distance.pdist(points).max())
    width, hull_area = _hull_width(points)
    # union of the members fills its hull
    convex = hull_area > 0 and \
        abs(hull_area - float(areas.sum())) <= CONVEX_RTOL * hull_area
    return PatchGeometry(
        d_K=d_k,
        R=radius_out,
        r=radius_in,
        gamma=d_k / radius_in,
        theta=cone_aperture(radius_in, radius_out),
        width=width,
        convex=bool(convex))


def lambda_bound_check(geom, m, h_k, eps=None):
    """Certified bound of the reconstruction stability constant

    Arguments:
        geom: PatchGeometry
        m: polynomial degree
        h_k: owner cell diameter
        eps: optional epsilon of the 1 + eps bound

    Returns:
        smallest certified value or None when no condition holds
    """
    certified = []
    if geom.r > 2.0 * m * _np.sqrt(geom.R * h_k):
        certified.append(2.0)
    if eps is not None and eps > 0 \
            and geom.r > m * _np.sqrt(2.0 * geom.R * h_k * (1.0 + 1.0 / eps)):
        certified.append(1.0 + eps)
    return min(certified) if certified else None


@_dataclasses.dataclass(frozen=True)
class MarkovConstants():
    alpha: float
    beta: float
    convex_alpha: float = None
    convex_beta: float = None


def markov_constants(geom, m, eps=1.0):
    """Markov type constants of the patch cone, beta = 2 m^2 / (r sin theta)

    A convex patch also gets alpha = 2 and beta = 4 m^2 / w from the
    Markov inequality on convex sets of width w.
    """
    convex_alpha = convex_beta = None
    if geom.convex and geom.width > 0:
        convex_alpha = 2.0
        convex_beta = float(4.0 * m * m / geom.width)
    return MarkovConstants(
        alpha=1.0 + eps,
        beta=float(2.0 * m * m / (geom.r * _np.sin(geom.theta))),
        convex_alpha=convex_alpha,
        convex_beta=convex_beta)


def _lattice(tris, density):
    steps = _np.arange(density + 1) / density
    bary = _np.array([
        (1.0 - a - b, a, b) for a in steps for b in steps if a + b <= 1 + 1e-12])
    return _np.einsum('pk,tkd->tpd', bary, tris).reshape(-1, 2)


def lebesgue_estimate(mesh, sub, patch, m, sample_density=8, rank_tol=1e-10):
    """Largest l1 norm of the node to value map over the patch

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation
        patch: Patch
        m: polynomial degree
        sample_density: lattice subdivisions per sub-triangle

    Returns:
        float >= 1

    Raises:
        AssumptionBViolation for rank deficient design matrix
    """
    op = _recon.fit_operator(patch, m, rank_tol=rank_tol)
    points = _np.vstack([
        _lattice(sub.cell_triangles(cell), sample_density)
        for cell in patch.members])
    return float(_np.abs(op.shape_values(points)).sum(axis=1).max())


@_dataclasses.dataclass(frozen=True)
class CardinalityCheck():
    bound: float
    actual: int
    satisfied: bool


def cardinality_bound_check(mesh, sub, patch, geom, regularity=None):
    """Compare #I(K) with sigma^2 rho_1^2 / N * R^2 / h_K^2"""
    if regularity is None:
        regularity = _quadrature.validate_regularity(mesh, sub)
    h_k = mesh.cell_diameter[patch.owner]
    bound = regularity.sigma ** 2 * regularity.rho1 ** 2 / regularity.n_max \
        * geom.R ** 2 / h_k ** 2
    return CardinalityCheck(
        bound=float(bound), actual=len(patch), satisfied=len(patch) <= bound)
