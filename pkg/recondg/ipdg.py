"""recondg: interior penalty assembly in the reconstructed space"""

import csv as _csv
import dataclasses as _dataclasses
import numpy as _np
import scipy.io as _io
import scipy.sparse as _sparse
import recondg.quadrature as _quadrature
import recondg.workers as _workers


DIRICHLET = 'dirichlet'
NEUMANN = 'neumann'

NORMAL_TOL = 1e-12
BLOCK_CHUNK = 256


class AssemblyError(Exception):
    """General assembly error"""


class BoundaryConfigError(AssemblyError):
    """Boundary marker without condition"""
    def __init__(self, marker):
        self._marker = marker
        super().__init__(self.__str__())

    def __str__(self):
        return f"No boundary condition for marker {self._marker}"

    @property
    def marker(self):
        return self._marker


class NormalError(AssemblyError):
    """Normals are not unit or not opposite"""


class CoefficientError(AssemblyError):
    """Coefficient is not symmetric positive definite"""


def _zero_data(points, normal):
    return _np.zeros(len(points))


@_dataclasses.dataclass(frozen=True)
class BoundaryCondition():
    """Boundary condition of one marker

    data(points, normal) returns g_D or g_N at (n, 2) points, normal is
    the outward unit normal of the edge.
    """
    kind: str
    data: object = _zero_data

    def __post_init__(self):
        if self.kind not in (DIRICHLET, NEUMANN):
            raise AssemblyError(f"Unknown boundary condition '{self.kind}'")

    @classmethod
    def dirichlet(cls, data=None):
        return cls(DIRICHLET, data or _zero_data)

    @classmethod
    def neumann(cls, data=None):
        return cls(NEUMANN, data or _zero_data)

    def values(self, points, normal):
        return _np.broadcast_to(
            _np.asarray(self.data(points, normal), dtype=float),
            (len(points),))


def laplace_coefficient(points):
    points = _np.atleast_2d(points)
    return _np.broadcast_to(_np.eye(2), (len(points), 2, 2))


@_dataclasses.dataclass(frozen=True)
class EllipticProblem():
    """-div(A grad u) = f with per marker boundary conditions

    Functions take (n, 2) points: coefficient returns (n, 2, 2), source
    and exact return (n,), exact_gradient returns (n, 2). The boundary
    key None is the default condition.
    """
    coefficient: object
    source: object
    boundary: dict
    c1: float = 1.0
    c2: float = 1.0
    exact: object = None
    exact_gradient: object = None
    name: str = 'custom'

    def condition(self, marker):
        if marker in self.boundary:
            return self.boundary[marker]
        if None in self.boundary:
            return self.boundary[None]
        raise BoundaryConfigError(marker)

    def edge_condition(self, mesh, edge):
        return self.condition(mesh.boundary_marker(edge))

    def is_pure_neumann(self, mesh):
        return all(
            self.edge_condition(mesh, edge).kind == NEUMANN
            for edge in mesh.boundary_edges)

    @property
    def has_exact(self):
        return self.exact is not None and self.exact_gradient is not None

    def probe_ellipticity(self, points, tol=1e-12):
        """Measured ellipticity bounds at points

        Returns:
            (c1, c2) smallest and largest eigenvalue of A

        Raises:
            CoefficientError when A is not symmetric positive definite
        """
        points = _np.atleast_2d(_np.asarray(points, dtype=float))
        values = _np.asarray(self.coefficient(points), dtype=float)
        scale = max(float(_np.abs(values).max()), 1.0)
        asymmetry = float(_np.abs(values - values.transpose(0, 2, 1)).max())
        if asymmetry > tol * scale:
            raise CoefficientError(
                f"Coefficient is not symmetric (deviation {asymmetry:.3g})")
        eigenvalues = _np.linalg.eigvalsh(values)
        low = float(eigenvalues[:, 0].min())
        if low <= 0:
            raise CoefficientError(
                f"Coefficient is not positive definite (eigenvalue {low:.3g})")
        return low, float(eigenvalues[:, 1].max())


@_dataclasses.dataclass(frozen=True)
class JumpAverage():
    average: object
    jump: object


def _check_normals(n1, n2):
    n1 = _np.asarray(n1, dtype=float)
    if abs(_np.linalg.norm(n1) - 1.0) > NORMAL_TOL:
        raise NormalError(f"Normal {n1.tolist()} is not a unit vector")
    if n2 is None:
        return n1, None
    n2 = _np.asarray(n2, dtype=float)
    if abs(_np.linalg.norm(n2) - 1.0) > NORMAL_TOL:
        raise NormalError(f"Normal {n2.tolist()} is not a unit vector")
    if _np.abs(n1 + n2).max() > NORMAL_TOL:
        raise NormalError(f"Normals {n1.tolist()} and {n2.tolist()} differ")
    return n1, n2


def jump_average(v1, v2, n1, n2=None):
    """Average and vector jump of a scalar trace

    Arguments:
        v1, v2: traces from both sides, v2 None on a boundary edge
        n1, n2: outward unit normals, n2 defaults to -n1

    Returns:
        JumpAverage, on the boundary average = v and jump = v n
    """
    if v2 is not None and n2 is None:
        n2 = -_np.asarray(n1, dtype=float)
    n1, n2 = _check_normals(n1, n2)
    if v2 is None:
        return JumpAverage(average=v1, jump=v1 * n1)
    return JumpAverage(average=0.5 * (v1 + v2), jump=v1 * n1 + v2 * n2)


def flux_jump_average(phi1, phi2, n1, n2=None):
    """Average and scalar normal jump of a vector trace"""
    if phi2 is not None and n2 is None:
        n2 = -_np.asarray(n1, dtype=float)
    n1, n2 = _check_normals(n1, n2)
    phi1 = _np.asarray(phi1, dtype=float)
    if phi2 is None:
        return JumpAverage(average=phi1, jump=float(phi1 @ n1))
    phi2 = _np.asarray(phi2, dtype=float)
    return JumpAverage(
        average=0.5 * (phi1 + phi2), jump=float(phi1 @ n1 + phi2 @ n2))


def penalty_for_edge(mesh, edge, problem, m, k_boundary=10.0):
    """Penalty eta_e of one edge

    Interior edges take max(3 c2, k m^2 c2), boundary edges k m^2 c2
    with m counted at least 1.
    """
    if mesh.is_boundary(edge):
        return k_boundary * max(m, 1) ** 2 * problem.c2
    return max(3.0 * problem.c2, k_boundary * m * m * problem.c2)


def compute_penalties(mesh, problem, m, k_boundary=10.0):
    if k_boundary <= 0:
        raise AssemblyError(f"Penalty factor must be positive, got {k_boundary}")
    return _np.array([
        penalty_for_edge(mesh, edge, problem, m, k_boundary)
        for edge in range(mesh.n_edges)])


@_dataclasses.dataclass(frozen=True)
class DgSystem():
    """One unknown per cell: matrix u = rhs"""
    matrix: object
    rhs: _np.ndarray
    recon: object
    penalties: _np.ndarray
    pure_neumann: bool
    mean_functional: _np.ndarray
    source_integral: float
    source_abs: float
    flux_integral: float = 0.0
    flux_abs: float = 0.0
    cell_degree: int = 0
    edge_degree: int = 0

    @property
    def n_dofs(self):
        return self.matrix.shape[0]

    @property
    def dof_map(self):
        """dof index of every cell"""
        return _np.arange(self.n_dofs)

    def with_rhs(self, rhs, **changes):
        return _dataclasses.replace(self, rhs=rhs, **changes)


def default_degrees(m, cell_degree=None, edge_degree=None):
    return (
        2 * m + 2 if cell_degree is None else cell_degree,
        2 * m + 3 if edge_degree is None else edge_degree)


def _cell_block(mesh, sub, glob, problem, cell, degree):
    op = glob.operator(cell)
    rule = _quadrature.cell_quadrature(mesh, sub, cell, degree)
    values = op.shape_values(rule.points)
    grads = op.shape_gradients(rule.points)
    fluxes = _np.einsum(
        'nij,nmj->nmi', problem.coefficient(rule.points), grads)
    block = _np.einsum('n,nmi,nki->mk', rule.weights, fluxes, grads)
    source = _np.asarray(problem.source(rule.points), dtype=float)
    load = (rule.weights * source) @ values
    mean = rule.weights @ values
    return op.members, block, load, mean, \
        float(rule.weights @ source), float(rule.weights @ _np.abs(source))


def _side_traces(glob, problem, cell, rule, normal):
    op = glob.operator(cell)
    values = op.shape_values(rule.points)
    fluxes = _np.einsum(
        'nij,nmj,i->nm', problem.coefficient(rule.points),
        op.shape_gradients(rule.points), normal)
    return op.members, values, fluxes


def _edge_block(mesh, glob, problem, penalties, edge, degree):
    cells = mesh.edge_cells[edge]
    if len(cells) == 1:
        condition = problem.edge_condition(mesh, edge)
        if condition.kind == NEUMANN:
            return None
    rule = _quadrature.edge_quadrature(mesh, edge, degree)
    normal = mesh.edge_normal(edge, cells[0])
    sides = [_side_traces(glob, problem, cell, rule, normal) for cell in cells]
    dofs = sorted(set().union(*(members for members, _v, _f in sides)))
    position = {dof: i for i, dof in enumerate(dofs)}
    jump = _np.zeros((len(rule.weights), len(dofs)))
    flux = _np.zeros_like(jump)
    weight = 1.0 / len(sides)
    for sign, (members, values, fluxes) in zip((1.0, -1.0), sides):
        index = [position[m] for m in members]
        jump[:, index] += sign * values
        flux[:, index] += weight * fluxes
    weighted_jump = rule.weights[:, None] * jump
    consistency = weighted_jump.T @ flux
    block = penalties[edge] / mesh.edge_length[edge] * (weighted_jump.T @ jump) \
        - consistency - consistency.T
    return tuple(dofs), block


def _accumulate(blocks, size):
    matrix = _sparse.csr_matrix((size, size))
    for start in range(0, len(blocks), BLOCK_CHUNK):
        rows = []
        cols = []
        vals = []
        for dofs, block in blocks[start:start + BLOCK_CHUNK]:
            dofs = _np.asarray(dofs)
            rows.append(_np.repeat(dofs, len(dofs)))
            cols.append(_np.tile(dofs, len(dofs)))
            vals.append(block.ravel())
        matrix = matrix + _sparse.coo_matrix(
            (_np.concatenate(vals),
             (_np.concatenate(rows), _np.concatenate(cols))),
            shape=(size, size)).tocsr()
    return matrix


def assemble(
        mesh, sub, glob, problem, penalties, cell_degree=None,
        edge_degree=None, threads=1, log=None):
    """Stiffness matrix a_h(R e_j, R e_i) and load (f, R e_i)

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation
        glob: GlobalRecon
        problem: EllipticProblem
        penalties: per edge eta_e
        cell_degree: cell quadrature degree, default 2m + 2
        edge_degree: edge quadrature degree, default 2m + 3
        threads: worker threads for local blocks
        log: logger

    Returns:
        DgSystem without boundary data on the right side

    Raises:
        BoundaryConfigError for a boundary marker without condition
    """
    cell_degree, edge_degree = default_degrees(
        glob.degree, cell_degree, edge_degree)
    for edge in mesh.boundary_edges:
        problem.edge_condition(mesh, edge)
    size = mesh.n_cells
    cell_results = _workers.parallel_map(
        lambda cell: _cell_block(mesh, sub, glob, problem, cell, cell_degree),
        range(size), threads)
    edge_results = _workers.parallel_map(
        lambda edge: _edge_block(
            mesh, glob, problem, penalties, edge, edge_degree),
        range(mesh.n_edges), threads)
    rhs = _np.zeros(size)
    mean = _np.zeros(size)
    source_integral = 0.0
    source_abs = 0.0
    blocks = []
    for members, block, load, cell_mean, integral, absolute in cell_results:
        index = list(members)
        rhs[index] += load
        mean[index] += cell_mean
        source_integral += integral
        source_abs += absolute
        blocks.append((members, block))
    blocks.extend(result for result in edge_results if result is not None)
    matrix = _accumulate(blocks, size)
    matrix = (0.5 * (matrix + matrix.T)).tocsr()
    matrix.eliminate_zeros()
    pure_neumann = problem.is_pure_neumann(mesh)
    if log:
        log.info(
            "Assembled %d x %d system, %d nonzeros, %s",
            size, size, matrix.nnz,
            "pure Neumann" if pure_neumann else "with Dirichlet edges")
    return DgSystem(
        matrix=matrix, rhs=rhs, recon=glob, penalties=_np.asarray(penalties),
        pure_neumann=pure_neumann, mean_functional=mean,
        source_integral=source_integral, source_abs=source_abs,
        cell_degree=cell_degree, edge_degree=edge_degree)


def apply_dirichlet_rhs(mesh, glob, problem, penalties, system):
    """Add int g_D (eta / h_e R e_i - A grad R e_i . n) over Dirichlet edges"""
    rhs = system.rhs.copy()
    for edge in mesh.boundary_edges:
        condition = problem.edge_condition(mesh, edge)
        if condition.kind != DIRICHLET:
            continue
        cell = mesh.edge_cells[edge][0]
        rule = _quadrature.edge_quadrature(mesh, edge, system.edge_degree)
        normal = mesh.edge_normal(edge, cell)
        members, values, fluxes = _side_traces(
            glob, problem, cell, rule, normal)
        data = rule.weights * condition.values(rule.points, normal)
        rhs[list(members)] += data @ (
            penalties[edge] / mesh.edge_length[edge] * values - fluxes)
    return system.with_rhs(rhs)


def apply_neumann_rhs(mesh, glob, problem, system):
    """Add int g_N R e_i over Neumann edges"""
    rhs = system.rhs.copy()
    flux_integral = 0.0
    flux_abs = 0.0
    for edge in mesh.boundary_edges:
        condition = problem.edge_condition(mesh, edge)
        if condition.kind != NEUMANN:
            continue
        cell = mesh.edge_cells[edge][0]
        op = glob.operator(cell)
        rule = _quadrature.edge_quadrature(mesh, edge, system.edge_degree)
        data = condition.values(rule.points, mesh.edge_normal(edge, cell))
        rhs[list(op.members)] += (rule.weights * data) @ \
            op.shape_values(rule.points)
        flux_integral += float(rule.weights @ data)
        flux_abs += float(rule.weights @ _np.abs(data))
    return system.with_rhs(
        rhs, flux_integral=flux_integral, flux_abs=flux_abs)


def build_system(
        mesh, sub, glob, problem, k_boundary=10.0, cell_degree=None,
        edge_degree=None, threads=1, log=None):
    """Penalties, assembly and both boundary right sides"""
    penalties = compute_penalties(mesh, problem, glob.degree, k_boundary)
    system = assemble(
        mesh, sub, glob, problem, penalties, cell_degree=cell_degree,
        edge_degree=edge_degree, threads=threads, log=log)
    system = apply_dirichlet_rhs(mesh, glob, problem, penalties, system)
    return apply_neumann_rhs(mesh, glob, problem, system)


def export_matrix(system, file_name):
    """Write the stiffness matrix in MatrixMarket coordinate format"""
    _io.mmwrite(
        file_name, system.matrix.tocoo(),
        comment=' recondg stiffness matrix, one row per cell')


def write_penalty_csv(mesh, penalties, file_name):
    with open(file_name, 'w', newline='', encoding='utf-8') as csv_file:
        writer = _csv.writer(csv_file)
        writer.writerow(['edge', 'v0', 'v1', 'boundary', 'length', 'eta'])
        for edge, (v0, v1) in enumerate(mesh.edges.tolist()):
            writer.writerow([
                edge, v0, v1, int(mesh.is_boundary(edge)),
                repr(float(mesh.edge_length[edge])),
                repr(float(penalties[edge]))])
