"""recondg: error norms and convergence rates"""

import csv as _csv
import dataclasses as _dataclasses
import numpy as _np
import matplotlib.figure as _figure
import recondg.ipdg as _ipdg
import recondg.quadrature as _quadrature


BOUNDARY_JUMPS = ('dirichlet', 'all', 'none')
ABSCISSAE = ('h', 'dofs')


class AnalyzeError(Exception):
    """Error norm or rate failure"""


def l2_norm(mesh, sub, field, degree):
    """L2 norm of a broken field

    Arguments:
        mesh: PolyMesh
        sub: SubTriangulation
        field: field(cell, points) -> (n,) values on cell
        degree: cell quadrature degree
    """
    total = 0.0
    for cell in range(mesh.n_cells):
        rule = _quadrature.cell_quadrature(mesh, sub, cell, degree)
        total += float(rule.integrate(_np.asarray(field(cell, rule.points)) ** 2))
    return total ** 0.5


def energy_norm(
        mesh, sub, field, gradient, degree, edge_degree, boundary_edges=None):
    """DG energy norm: broken gradient plus |e|^-1 weighted jumps

    Arguments:
        field: field(cell, points) -> (n,) values on cell
        gradient: gradient(cell, points) -> (n, 2) values on cell
        degree, edge_degree: cell and edge quadrature degrees
        boundary_edges: boundary edges whose jump v n counts, default all
    """
    total = 0.0
    for cell in range(mesh.n_cells):
        rule = _quadrature.cell_quadrature(mesh, sub, cell, degree)
        grads = _np.asarray(gradient(cell, rule.points))
        total += float(rule.integrate((grads ** 2).sum(axis=1)))
    if boundary_edges is None:
        boundary_edges = mesh.boundary_edges
    edges = list(mesh.interior_edges) + sorted(boundary_edges)
    for edge in edges:
        rule = _quadrature.edge_quadrature(mesh, edge, edge_degree)
        cells = mesh.edge_cells[edge]
        jump = _np.asarray(field(cells[0], rule.points), dtype=float)
        if len(cells) == 2:
            jump = jump - field(cells[1], rule.points)
        total += float(rule.integrate(jump ** 2)) / mesh.edge_length[edge]
    return total ** 0.5


def dirichlet_edges(mesh, problem):
    return tuple(
        edge for edge in mesh.boundary_edges
        if problem.edge_condition(mesh, edge).kind == _ipdg.DIRICHLET)


def boundary_jump_edges(mesh, problem, mode='dirichlet'):
    """Boundary edges counted in the energy norm: 'dirichlet', 'all', 'none'"""
    if mode == 'dirichlet':
        return dirichlet_edges(mesh, problem)
    if mode == 'all':
        return mesh.boundary_edges
    if mode == 'none':
        return ()
    raise AnalyzeError(f"Unknown boundary jump mode '{mode}'")


def exact_mean(mesh, sub, exact, degree):
    total = 0.0
    for cell in range(mesh.n_cells):
        rule = _quadrature.cell_quadrature(mesh, sub, cell, degree)
        total += float(rule.integrate(exact(rule.points)))
    return total / mesh.area


def _degrees(solution, degree, edge_degree):
    return _ipdg.default_degrees(solution.recon.degree, degree, edge_degree)


def l2_error(mesh, sub, solution, exact, degree=None, shift=0.0):
    """||u - shift - R u_h|| in L2, degree defaults to 2m + 2"""
    degree, _edge = _degrees(solution, degree, None)

    def error(cell, points):
        return exact(points) - shift - solution.evaluate(cell, points)
    return l2_norm(mesh, sub, error, degree)


def energy_error(
        mesh, sub, solution, exact, exact_gradient, boundary_edges=None,
        degree=None, edge_degree=None, shift=0.0):
    """DG energy norm of u - shift - R u_h"""
    degree, edge_degree = _degrees(solution, degree, edge_degree)

    def error(cell, points):
        return exact(points) - shift - solution.evaluate(cell, points)

    def error_gradient(cell, points):
        return exact_gradient(points) - solution.gradient(cell, points)
    return energy_norm(
        mesh, sub, error, error_gradient, degree, edge_degree,
        boundary_edges=boundary_edges)


@_dataclasses.dataclass(frozen=True)
class ErrorReport():
    mesh: str
    m: int
    h: float
    n_dofs: int
    l2_error: float
    energy_error: float

    def abscissa(self, against='h'):
        """effective mesh size, N^-1/2 when measured against dofs"""
        if against == 'h':
            return self.h
        return self.n_dofs ** -0.5


def error_report(
        mesh, sub, problem, solution, name='', boundary_jumps='dirichlet',
        degree=None, edge_degree=None):
    """Both errors of a solution, pure Neumann problems compare with the
    mean zero exact solution"""
    if not problem.has_exact:
        raise AnalyzeError(f"Problem '{problem.name}' has no exact solution")
    degree, edge_degree = _degrees(solution, degree, edge_degree)
    shift = 0.0
    if problem.is_pure_neumann(mesh):
        shift = exact_mean(mesh, sub, problem.exact, degree)
    return ErrorReport(
        mesh=name,
        m=solution.recon.degree,
        h=mesh.h,
        n_dofs=mesh.n_cells,
        l2_error=l2_error(
            mesh, sub, solution, problem.exact, degree=degree, shift=shift),
        energy_error=energy_error(
            mesh, sub, solution, problem.exact, problem.exact_gradient,
            boundary_edges=boundary_jump_edges(mesh, problem, boundary_jumps),
            degree=degree, edge_degree=edge_degree, shift=shift))


@_dataclasses.dataclass(frozen=True)
class RateFit():
    l2_rates: tuple
    energy_rates: tuple
    l2_tail: float
    energy_tail: float
    l2_slope: float
    energy_slope: float
    monotone: bool


class ConvergenceStudy():
    """Error reports of one order over a mesh family, coarse to fine

    Arguments:
        m: polynomial degree
        reports: ErrorReport list
        against: 'h' or 'dofs'
    """
    def __init__(self, m, reports, against='h'):
        if against not in ABSCISSAE:
            raise AnalyzeError(f"Unknown rate abscissa '{against}'")
        self._m = m
        self._against = against
        self._reports = tuple(sorted(
            reports, key=lambda report: -report.abscissa(against)))
        sizes = [report.abscissa(against) for report in self._reports]
        if len(set(sizes)) != len(sizes):
            raise AnalyzeError(
                f"Mesh family for m={m} repeats a mesh size")

    @property
    def m(self):
        return self._m

    @property
    def against(self):
        return self._against

    @property
    def reports(self):
        return self._reports

    def sizes(self):
        return _np.array([r.abscissa(self._against) for r in self._reports])

    def errors(self, which):
        return _np.array([getattr(r, which) for r in self._reports])


def _rates(sizes, errors):
    with _np.errstate(divide='ignore', invalid='ignore'):
        return tuple(
            _np.log(errors[:-1] / errors[1:]) / _np.log(sizes[:-1] / sizes[1:]))


def _slope(sizes, errors):
    if (errors <= 0).any():
        return float('nan')
    return float(_np.polyfit(_np.log(sizes), _np.log(errors), 1)[0])


def fit_rates(study, log=None):
    """Step rates, tail rate of the two finest meshes and global slope

    Raises:
        AnalyzeError for less than two reports
    """
    if len(study.reports) < 2:
        raise AnalyzeError(
            f"Rates for m={study.m} need at least 2 meshes, "
            f"got {len(study.reports)}")
    sizes = study.sizes()
    l2 = study.errors('l2_error')
    energy = study.errors('energy_error')
    monotone = bool((_np.diff(l2) < 0).all() and (_np.diff(energy) < 0).all())
    if not monotone and log:
        log.warning("Errors for m=%d do not decrease monotonically", study.m)
    l2_rates = _rates(sizes, l2)
    energy_rates = _rates(sizes, energy)
    return RateFit(
        l2_rates=tuple(float(r) for r in l2_rates),
        energy_rates=tuple(float(r) for r in energy_rates),
        l2_tail=float(l2_rates[-1]),
        energy_tail=float(energy_rates[-1]),
        l2_slope=_slope(sizes, l2),
        energy_slope=_slope(sizes, energy),
        monotone=monotone)


def _format(value):
    return '' if value is None or _np.isnan(value) else f'{value:.2f}'


def write_study_csv(studies, file_name):
    """Error table: m, h_or_N, l2_error, energy_error, l2_rate, energy_rate"""
    with open(file_name, 'w', newline='', encoding='utf-8') as csv_file:
        writer = _csv.writer(csv_file)
        writer.writerow([
            'm', 'h_or_N', 'l2_error', 'energy_error', 'l2_rate',
            'energy_rate'])
        for study in studies:
            rates = fit_rates(study) if len(study.reports) > 1 else None
            for index, report in enumerate(study.reports):
                l2_rate = energy_rate = None
                if rates and index:
                    l2_rate = rates.l2_rates[index - 1]
                    energy_rate = rates.energy_rates[index - 1]
                size = report.h if study.against == 'h' else report.n_dofs
                writer.writerow([
                    study.m, f'{size:.4g}', f'{report.l2_error:.3e}',
                    f'{report.energy_error:.3e}', _format(l2_rate),
                    _format(energy_rate)])


def plot_study(studies, file_name, title=None):
    """Log-log error plots, L2 left and energy norm right, as SVG"""
    fig = _figure.Figure(figsize=(10, 4.2))
    axes = fig.subplots(1, 2)
    against = studies[0].against if studies else 'h'
    for ax, which, label in (
            (axes[0], 'l2_error', 'L2 error'),
            (axes[1], 'energy_error', 'energy error')):
        for study in studies:
            if against == 'h':
                xs = study.sizes()
            else:
                xs = _np.array([r.n_dofs for r in study.reports])
            errors = study.errors(which)
            legend = f'm={study.m}'
            if len(study.reports) > 1:
                rates = fit_rates(study)
                tail = rates.l2_tail if which == 'l2_error' \
                    else rates.energy_tail
                legend += f' (rate {_format(tail)})'
            ax.loglog(xs, errors, 'o-', label=legend)
        ax.set_xlabel('h' if against == 'h' else 'N')
        ax.set_ylabel(label)
        ax.grid(True, which='both', alpha=0.3)
        ax.legend()
        if against == 'h':
            ax.invert_xaxis()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(file_name, format='svg')
