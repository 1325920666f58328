"""recondg: least-squares patch reconstruction"""

import json as _json
import logging as _logging
import dataclasses as _dataclasses
import numpy as _np
import scipy.linalg as _linalg
import recondg.quadrature as _quadrature


class ReconError(Exception):
    """General reconstruction error"""


class AssumptionBViolation(ReconError):
    """Sampling nodes are not unisolvent for the polynomial space"""
    def __init__(self, cell, rank, dim, degree):
        self._cell = cell
        self._rank = rank
        self._dim = dim
        self._degree = degree
        super().__init__(self.__str__())

    def __str__(self):
        return (
            f"Cell {self._cell}: design matrix rank {self._rank} is below "
            f"{self._dim} = dim P_{self._degree}, increase patch depth")

    @property
    def cell(self):
        return self._cell

    @property
    def rank(self):
        return self._rank


class DofMismatch(ReconError):
    """Wrong number of patch values"""
    def __init__(self, cell, expected, got):
        self._cell = cell
        self._expected = expected
        self._got = got
        super().__init__(self.__str__())

    def __str__(self):
        return (
            f"Cell {self._cell}: expected {self._expected} patch values, "
            f"got {self._got}")


def poly_dim(degree):
    return (degree + 1) * (degree + 2) // 2


def exponents(degree):
    """Graded lexicographic exponents: 1, x, y, x^2, xy, y^2, ..."""
    return tuple(
        (total - j, j) for total in range(degree + 1) for j in range(total + 1))


class PolyBasis():
    """Scaled monomials ((x - cx) / s)^a ((y - cy) / s)^b, a + b <= degree

    Arguments:
        degree: polynomial degree m
        center: 2D point, the owner cell barycenter
        scale: length scale, the patch diameter
    """
    def __init__(self, degree, center, scale):
        if degree < 0:
            raise ValueError(f"Degree must be >= 0, got {degree}")
        if scale <= 0:
            raise ValueError(f"Scale must be positive, got {scale}")
        self._degree = int(degree)
        self._center = _np.array(center, dtype=float)
        self._scale = float(scale)
        powers = _np.array(exponents(self._degree), dtype=int)
        self._ax = powers[:, 0]
        self._ay = powers[:, 1]

    @property
    def degree(self):
        return self._degree

    @property
    def center(self):
        return self._center

    @property
    def scale(self):
        return self._scale

    @property
    def dim(self):
        return len(self._ax)

    @property
    def exponents(self):
        return tuple(zip(self._ax.tolist(), self._ay.tolist()))

    def _local(self, points):
        points = _np.atleast_2d(_np.asarray(points, dtype=float))
        xi = (points - self._center) / self._scale
        return xi[:, 0, None], xi[:, 1, None]

    def evaluate(self, points):
        """(n, 2) points -> (n, dim) basis values"""
        x, y = self._local(points)
        return x ** self._ax * y ** self._ay

    def gradient(self, points):
        """(n, 2) points -> (n, dim, 2) basis gradients"""
        x, y = self._local(points)
        dx = self._ax * x ** _np.maximum(self._ax - 1, 0) * y ** self._ay
        dy = self._ay * x ** self._ax * y ** _np.maximum(self._ay - 1, 0)
        return _np.stack([dx, dy], axis=-1) / self._scale


class ReconOp():
    """Reconstruction operator of one cell

    Maps the values at the patch sampling nodes to the coefficients of
    the least-squares polynomial.
    """
    def __init__(self, patch, basis, coeff_map, singular_values):
        self._patch = patch
        self._basis = basis
        self._coeff_map = coeff_map
        self._coeff_map.flags.writeable = False
        self._singular_values = singular_values

    @property
    def owner(self):
        return self._patch.owner

    @property
    def patch(self):
        return self._patch

    @property
    def members(self):
        return self._patch.members

    @property
    def basis(self):
        return self._basis

    @property
    def degree(self):
        return self._basis.degree

    @property
    def coeff_map(self):
        """(dim P_m, #members) matrix"""
        return self._coeff_map

    @property
    def singular_values(self):
        return self._singular_values

    @property
    def rank(self):
        return len(self._singular_values)

    @property
    def condition(self):
        return float(self._singular_values[0] / self._singular_values[-1])

    def coefficients(self, dof_values):
        dof_values = _np.asarray(dof_values, dtype=float)
        if dof_values.shape != (len(self.members),):
            raise DofMismatch(self.owner, len(self.members), dof_values.shape)
        return self._coeff_map @ dof_values

    def shape_values(self, points):
        """(n, #members) values of the reconstructed patch shape functions"""
        return self._basis.evaluate(points) @ self._coeff_map

    def shape_gradients(self, points):
        """(n, #members, 2) gradients of the patch shape functions"""
        return _np.einsum(
            'nda,dm->nma', self._basis.gradient(points), self._coeff_map)

    def evaluate(self, points, dof_values):
        return self._basis.evaluate(points) @ self.coefficients(dof_values)

    def gradient(self, points, dof_values):
        return _np.einsum(
            'nda,d->na', self._basis.gradient(points),
            self.coefficients(dof_values))


def fit_operator(patch, m, rank_tol=1e-10):
    """Least-squares reconstruction operator of a patch

    Arguments:
        patch: Patch with owner, nodes, center and diameter
        m: polynomial degree
        rank_tol: singular values below rank_tol * largest are zero

    Returns:
        ReconOp

    Raises:
        AssumptionBViolation when the design matrix is rank deficient
    """
    basis = PolyBasis(m, patch.center, patch.diameter)
    design = basis.evaluate(patch.nodes)
    u_mat, singular, vt_mat = _linalg.svd(design, full_matrices=False)
    rank = int((singular > rank_tol * singular[0]).sum()) if singular.size else 0
    if rank < basis.dim:
        raise AssumptionBViolation(patch.owner, rank, basis.dim, m)
    coeff_map = (vt_mat.T / singular) @ u_mat.T
    return ReconOp(patch, basis, coeff_map, singular)


def evaluate(op, dof_values, point):
    """Reconstructed polynomial of op at one point"""
    return float(op.evaluate(point, dof_values)[0])


def evaluate_gradient(op, dof_values, point):
    return op.gradient(point, dof_values)[0]


def basis_columns(op):
    """(#members, dim) polynomial coefficients of the reconstructed e_j"""
    return op.coeff_map.T.copy()


@_dataclasses.dataclass(frozen=True)
class ApproximationError():
    l2: float
    h1: float


class GlobalRecon():
    """Reconstruction operators of all cells

    Arguments:
        mesh: PolyMesh
        operators: one ReconOp per cell, in cell order
        log: logger
    """
    def __init__(self, mesh, operators, log=None):
        self._mesh = mesh
        self._log = log
        self._operators = tuple(operators)
        if len(self._operators) != mesh.n_cells:
            raise ReconError(
                f"Expected {mesh.n_cells} operators, "
                f"got {len(self._operators)}")
        degrees = {op.degree for op in self._operators}
        if len(degrees) != 1:
            raise ReconError(f"Mixed reconstruction degrees {sorted(degrees)}")
        self._degree = degrees.pop()
        nodes = _np.full((mesh.n_cells, 2), _np.nan)
        covering = [[] for _ in range(mesh.n_cells)]
        for cell, op in enumerate(self._operators):
            if op.owner != cell:
                raise ReconError(f"Operator {cell} belongs to cell {op.owner}")
            for member, node in zip(op.members, op.patch.nodes):
                covering[member].append(cell)
                nodes[member] = node
        if _np.isnan(nodes).any():
            missing = int(_np.flatnonzero(_np.isnan(nodes[:, 0]))[0])
            raise ReconError(f"Cell {missing} is in no patch")
        nodes.flags.writeable = False
        self._nodes = nodes
        self._covering = tuple(tuple(cells) for cells in covering)

    @property
    def mesh(self):
        return self._mesh

    @property
    def degree(self):
        return self._degree

    @property
    def n_dofs(self):
        return self._mesh.n_cells

    @property
    def operators(self):
        return self._operators

    @property
    def nodes(self):
        """sampling node of every cell"""
        return self._nodes

    @property
    def max_condition(self):
        return max(op.condition for op in self._operators)

    def operator(self, cell):
        return self._operators[cell]

    def covering(self, cell):
        """Cells whose patch contains cell, the support of R e_cell"""
        return self._covering[cell]

    def sample(self, func):
        """Cell values of func at the sampling nodes"""
        return _np.asarray(func(self._nodes), dtype=float).reshape(-1)

    def _check_inside(self, cell, points):
        if not self._log or not self._log.isEnabledFor(_logging.DEBUG):
            return
        for point in points:
            if not self._mesh.contains(cell, point, strict=False):
                self._log.debug(
                    "Evaluating cell %d outside of it at %s", cell, point)

    def evaluate(self, cell, points, dof_values):
        """R u_h restricted to cell at (n, 2) points"""
        points = _np.atleast_2d(points)
        self._check_inside(cell, points)
        op = self._operators[cell]
        return op.evaluate(points, _np.asarray(dof_values)[list(op.members)])

    def gradient(self, cell, points, dof_values):
        points = _np.atleast_2d(points)
        self._check_inside(cell, points)
        op = self._operators[cell]
        return op.gradient(points, _np.asarray(dof_values)[list(op.members)])

    def to_dict(self):
        return {
            'degree': self._degree,
            'cells': [{
                'cell': op.owner,
                'members': list(op.members),
                'nodes': op.patch.nodes.tolist(),
                'center': op.basis.center.tolist(),
                'scale': op.basis.scale,
                'condition': op.condition,
                'coeff_map': op.coeff_map.tolist(),
            } for op in self._operators],
        }

    def dump(self, file_name):
        """Write coefficient maps of all cells as JSON"""
        with open(file_name, 'w', encoding='utf-8') as dump_file:
            _json.dump(self.to_dict(), dump_file, indent=1)
        if self._log:
            self._log.info("Reconstruction dump written to %s", file_name)


def approximation_error_probe(mesh, sub, glob, g, grad_g, degree=None):
    """Errors of reconstructing the node samples of g

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation
        glob: GlobalRecon
        g: function of (n, 2) points
        grad_g: gradient of g, (n, 2) points -> (n, 2)
        degree: cell quadrature degree, default 2m + 2

    Returns:
        ApproximationError with L2 error and broken H1 seminorm error
    """
    if degree is None:
        degree = 2 * glob.degree + 2
    values = glob.sample(g)
    l2 = 0.0
    h1 = 0.0
    for cell in range(mesh.n_cells):
        rule = _quadrature.cell_quadrature(mesh, sub, cell, degree)
        diff = g(rule.points) - glob.evaluate(cell, rule.points, values)
        grad_diff = grad_g(rule.points) \
            - glob.gradient(cell, rule.points, values)
        l2 += float(rule.integrate(diff ** 2))
        h1 += float(rule.integrate((grad_diff ** 2).sum(axis=1)))
    return ApproximationError(l2=l2 ** 0.5, h1=h1 ** 0.5)
