"""recondg: sparse direct solver"""

import csv as _csv
import dataclasses as _dataclasses
import numpy as _np
import scipy.sparse as _sparse
import scipy.sparse.csgraph as _csgraph
import scipy.sparse.linalg as _splinalg
import matplotlib.path as _mpath


RESIDUAL_TOL = 1e-10
PIVOT_TOL = 1e-12
COMPATIBILITY_TOL = 1e-8
REFINEMENT_STEPS = 3


class SolveError(Exception):
    """General solver error"""


class FactorizationError(SolveError):
    """Pivot breakdown in the symmetric factorization"""
    def __init__(self, pivot, cell, value):
        self._pivot = pivot
        self._cell = cell
        self._value = value
        super().__init__(self.__str__())

    def __str__(self):
        return (
            f"Factorization breakdown at pivot {self._pivot} (cell "
            f"{self._cell}): value {self._value:.3g}, matrix is not "
            "positive definite, increase the penalty")

    @property
    def cell(self):
        return self._cell


class SingularSystemError(SolveError):
    """Singular matrix"""
    def __init__(self, cell=None):
        self._cell = cell
        super().__init__(self.__str__())

    def __str__(self):
        where = f" at cell {self._cell}" if self._cell is not None else ""
        return (
            f"Singular system{where}, for Neumann boundary on the whole "
            "domain use the pure Neumann solver")


@_dataclasses.dataclass(frozen=True)
class SolverStats():
    method: str
    fill: float
    residual: float
    refinement_steps: int
    multiplier: float = None


@_dataclasses.dataclass(frozen=True)
class Solution():
    """Cell values u_h and the reconstruction that lifts them"""
    dof_values: _np.ndarray
    recon: object
    stats: SolverStats

    @property
    def residual(self):
        return self.stats.residual

    def evaluate(self, cell, points):
        return self.recon.evaluate(cell, points, self.dof_values)

    def gradient(self, cell, points):
        return self.recon.gradient(cell, points, self.dof_values)


def _relative_residual(matrix, x, rhs):
    norm = _np.linalg.norm(rhs)
    residual = _np.linalg.norm(rhs - matrix @ x)
    return residual / norm if norm else residual


def _refine(matrix, rhs, solve_fn, x, log):
    steps = 0
    residual = _relative_residual(matrix, x, rhs)
    while residual > RESIDUAL_TOL and steps < REFINEMENT_STEPS:
        x = x + solve_fn(rhs - matrix @ x)
        residual = _relative_residual(matrix, x, rhs)
        steps += 1
    if residual > RESIDUAL_TOL and log:
        log.warning(
            "Relative residual %.3g above %g after %d refinement steps",
            residual, RESIDUAL_TOL, steps)
    return x, float(residual), steps


def direct_solve(system, log=None):
    """SuperLU factorization without pivoting in reverse Cuthill-McKee order

    The diagonal of an unpivoted LU of a symmetric matrix is D of its
    LDL^T factorization, a negative pivot means the matrix is not
    positive definite.

    Arguments:
        system: DgSystem with symmetric positive definite matrix
        log: logger

    Returns:
        Solution

    Raises:
        SingularSystemError, FactorizationError
    """
    matrix = _sparse.csr_matrix(system.matrix)
    rhs = _np.asarray(system.rhs, dtype=float)
    size = matrix.shape[0]
    perm = _csgraph.reverse_cuthill_mckee(matrix, symmetric_mode=True)
    permuted = matrix[perm][:, perm].tocsc()
    try:
        factor = _splinalg.splu(
            permuted, permc_spec='NATURAL', diag_pivot_thresh=0.0,
            options={'SymmetricMode': True})
    except RuntimeError as err:
        raise SingularSystemError() from err
    pivots = factor.U.diagonal()
    scale = float(_np.abs(permuted.diagonal()).max()) if size else 0.0
    tiny = _np.flatnonzero(_np.abs(pivots) <= PIVOT_TOL * scale)
    if tiny.size:
        raise SingularSystemError(int(perm[tiny[0]]))
    negative = _np.flatnonzero(pivots < 0)
    if negative.size:
        k = int(negative[0])
        raise FactorizationError(k, int(perm[k]), float(pivots[k]))

    def solve_fn(vector):
        result = _np.empty(size)
        result[perm] = factor.solve(vector[perm])
        return result

    x, residual, steps = _refine(matrix, rhs, solve_fn, solve_fn(rhs), log)
    fill = (factor.L.nnz + factor.U.nnz) / max(matrix.nnz, 1)
    if log:
        log.info(
            "Direct solve of %d unknowns, fill %.2f, residual %.3g",
            size, fill, residual)
    return Solution(
        dof_values=x, recon=system.recon,
        stats=SolverStats(
            method='lu-rcm-nopivot', fill=float(fill), residual=residual,
            refinement_steps=steps))


def check_compatibility(system, log=None):
    """Relative size of int f + int g_N, the data must integrate to zero"""
    total = system.source_integral + system.flux_integral
    scale = system.source_abs + system.flux_abs
    mismatch = abs(total) / scale if scale else 0.0
    if mismatch > COMPATIBILITY_TOL and log:
        log.warning(
            "Incompatible Neumann data: int f + int g_N = %.3g "
            "(relative %.3g), solving the compatible projection",
            total, mismatch)
    return mismatch


def solve_pure_neumann(system, log=None):
    """Mean zero solution of a pure Neumann system

    The constraint int R u_h = 0 enters through a Lagrange multiplier.

    Returns:
        Solution with stats.multiplier set
    """
    matrix = _sparse.csr_matrix(system.matrix)
    size = matrix.shape[0]
    ones = _np.ones(size)
    scale = float(abs(matrix).sum(axis=1).max()) if size else 0.0
    annihilated = float(_np.abs(matrix @ ones).max()) if size else 0.0
    if annihilated > 1e-8 * max(scale, 1.0) and log:
        log.warning(
            "Matrix does not annihilate constants (%.3g)", annihilated)
    check_compatibility(system, log=log)
    mean = _np.asarray(system.mean_functional, dtype=float)
    bordered = _sparse.bmat([
        [matrix, _sparse.csr_matrix(mean[:, None])],
        [_sparse.csr_matrix(mean[None, :]), None]], format='csc')
    rhs = _np.append(_np.asarray(system.rhs, dtype=float), 0.0)
    try:
        factor = _splinalg.splu(bordered)
    except RuntimeError as err:
        raise SingularSystemError() from err
    x, residual, steps = _refine(
        bordered, rhs, factor.solve, factor.solve(rhs), log)
    fill = (factor.L.nnz + factor.U.nnz) / max(bordered.nnz, 1)
    if log:
        log.info(
            "Pure Neumann solve of %d unknowns, multiplier %.3g, "
            "residual %.3g", size, x[-1], residual)
    return Solution(
        dof_values=x[:-1], recon=system.recon,
        stats=SolverStats(
            method='bordered-lu', fill=float(fill), residual=residual,
            refinement_steps=steps, multiplier=float(x[-1])))


def solve(system, log=None):
    if system.pure_neumann:
        return solve_pure_neumann(system, log=log)
    return direct_solve(system, log=log)


def write_solution_csv(mesh, solution, file_name):
    with open(file_name, 'w', newline='', encoding='utf-8') as csv_file:
        writer = _csv.writer(csv_file)
        writer.writerow(['cell_id', 'centroid_x', 'centroid_y', 'dof_value'])
        for cell, ((x, y), value) in enumerate(zip(
                mesh.cell_barycenter.tolist(), solution.dof_values.tolist())):
            writer.writerow([cell, repr(x), repr(y), repr(value)])


def probe_grid(mesh, resolution):
    """Centers of a resolution x resolution grid over the mesh bounding box
    with the cell containing each of them, -1 outside the mesh"""
    low = mesh.vertices.min(axis=0)
    high = mesh.vertices.max(axis=0)
    steps = (_np.arange(resolution) + 0.5) / resolution
    x, y = _np.meshgrid(
        low[0] + steps * (high[0] - low[0]), low[1] + steps * (high[1] - low[1]))
    points = _np.column_stack([x.ravel(), y.ravel()])
    owner = _np.full(len(points), -1)
    for cell in range(mesh.n_cells):
        free = owner < 0
        inside = _mpath.Path(mesh.cell_polygon(cell)).contains_points(
            points[free])
        owner[_np.flatnonzero(free)[inside]] = cell
    return points, owner


def write_field_csv(mesh, solution, file_name, resolution=50):
    """Sample R u_h on a uniform probe grid"""
    points, owner = probe_grid(mesh, resolution)
    values = _np.full(len(points), _np.nan)
    for cell in _np.unique(owner[owner >= 0]):
        index = _np.flatnonzero(owner == cell)
        values[index] = solution.evaluate(int(cell), points[index])
    with open(file_name, 'w', newline='', encoding='utf-8') as csv_file:
        writer = _csv.writer(csv_file)
        writer.writerow(['x', 'y', 'cell_id', 'value'])
        for (x, y), cell, value in zip(
                points.tolist(), owner.tolist(), values.tolist()):
            if cell >= 0:
                writer.writerow([repr(x), repr(y), cell, repr(value)])
