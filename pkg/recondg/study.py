"""recondg: solve pipeline and convergence studies"""

import dataclasses as _dataclasses
import recondg.mesh as _mesh
import recondg.mesh_io as _mesh_io
import recondg.quadrature as _quadrature
import recondg.patch as _patch
import recondg.recon as _recon
import recondg.space as _space
import recondg.ipdg as _ipdg
import recondg.solve as _solve
import recondg.analyze as _analyze


STRUCTURED_FAMILIES = ('tri:', 'quad:', 'mixed:')
UNKNOWN_STAGE = 'unknown'

_STAGES = (
    (_mesh.MeshError, 'mesh'),
    (_patch.PatchError, 'patch'),
    (_recon.ReconError, 'recon'),
    (_ipdg.AssemblyError, 'assemble'),
    (_solve.SolveError, 'solve'),
    (_analyze.AnalyzeError, 'analyze'),
)


class PipelineError(Exception):
    """Pipeline stage failure"""
    def __init__(self, stage, error):
        self._stage = stage
        self._error = error
        super().__init__(self.__str__())

    def __str__(self):
        return f"{self._stage}: {self._error}"

    @property
    def stage(self):
        return self._stage

    @property
    def error(self):
        return self._error


@_dataclasses.dataclass(frozen=True)
class StudyOptions():
    rule: str = _patch.VON_NEUMANN
    depth: object = 'auto'
    safety: float = 2.0
    k_boundary: float = 10.0
    perturb: float = 0.0
    seed: int = 0
    cell_degree: int = None
    edge_degree: int = None
    threads: int = 1
    boundary_jumps: str = 'dirichlet'
    rate_against: str = 'auto'
    fix_orientation: bool = False
    sigma_threshold: float = 20.0


@_dataclasses.dataclass(frozen=True)
class PipelineResult():
    mesh: object
    sub: object
    regularity: object
    recon: object
    system: object
    solution: object
    report: object


def _stage_of(error):
    for error_class, stage in _STAGES:
        if isinstance(error, error_class):
            return stage
    return UNKNOWN_STAGE


def prepare_mesh(source, options, log=None):
    """Load mesh, sub-triangulation and regularity report"""
    try:
        mesh = _mesh_io.load_mesh(
            source, fix_orientation=options.fix_orientation, log=log)
        sub = _quadrature.subtriangulate(mesh)
        regularity = _quadrature.validate_regularity(
            mesh, sub, sigma_threshold=options.sigma_threshold, log=log)
    except _mesh.MeshError as err:
        raise PipelineError('mesh', err) from err
    return mesh, sub, regularity


def run_pipeline(mesh_data, problem, m, options, name='', log=None):
    """Patches, reconstruction, assembly, solve and errors of one pair

    Arguments:
        mesh_data: (mesh, sub, regularity) from prepare_mesh
        problem: EllipticProblem
        m: polynomial degree
        options: StudyOptions
        name: mesh label in the report
        log: logger

    Returns:
        PipelineResult, report is None without exact solution

    Raises:
        PipelineError naming the failed stage
    """
    mesh, sub, regularity = mesh_data
    try:
        nodes = _patch.sampling_nodes(
            mesh, options.perturb, options.seed, log=log)
        glob = _space.build_global_recon(
            mesh, m, rule=options.rule, depth=options.depth,
            safety=options.safety, nodes=nodes, threads=options.threads,
            log=log)
        system = _ipdg.build_system(
            mesh, sub, glob, problem, k_boundary=options.k_boundary,
            cell_degree=options.cell_degree, edge_degree=options.edge_degree,
            threads=options.threads, log=log)
        solution = _solve.solve(system, log=log)
        report = None
        if problem.has_exact:
            report = _analyze.error_report(
                mesh, sub, problem, solution, name=name,
                boundary_jumps=options.boundary_jumps,
                degree=options.cell_degree, edge_degree=options.edge_degree)
    except PipelineError:
        raise
    except Exception as err:
        raise PipelineError(_stage_of(err), err) from err
    if log and report:
        log.info(
            "%s m=%d: L2 %.3e, energy %.3e",
            name, m, report.l2_error, report.energy_error)
    return PipelineResult(
        mesh=mesh, sub=sub, regularity=regularity, recon=glob,
        system=system, solution=solution, report=report)


@_dataclasses.dataclass(frozen=True)
class StudyFailure():
    mesh: str
    m: int
    stage: str
    message: str


@_dataclasses.dataclass(frozen=True)
class StudyResult():
    studies: tuple
    failures: tuple

    @property
    def ok(self):
        return not self.failures


def rate_abscissa(mesh_family, rate_against='auto'):
    """'h' for structured built-in families, 'dofs' otherwise"""
    if rate_against != 'auto':
        return rate_against
    if all(source.startswith(STRUCTURED_FAMILIES) and _mesh_io.is_builtin(source)
           for source in mesh_family):
        return 'h'
    return 'dofs'


def run_study(problem, mesh_family, m_range, options, log=None, progress=None):
    """Pipeline over every (mesh, m) pair

    A failed pair is recorded and the remaining pairs proceed.

    Arguments:
        problem: EllipticProblem with exact solution
        mesh_family: mesh sources, see load_mesh
        m_range: polynomial degrees
        options: StudyOptions
        log: logger
        progress: optional callable receiving progress messages

    Returns:
        StudyResult with one ConvergenceStudy per m
    """
    if not problem.has_exact:
        raise PipelineError('analyze', _analyze.AnalyzeError(
            f"Problem '{problem.name}' has no exact solution"))
    against = rate_abscissa(mesh_family, options.rate_against)
    reports = {m: [] for m in m_range}
    failures = []
    for source in mesh_family:
        try:
            mesh_data = prepare_mesh(source, options, log=log)
        except PipelineError as err:
            for m in m_range:
                failures.append(StudyFailure(source, m, err.stage, str(err.error)))
            continue
        for m in m_range:
            if progress:
                progress(f"{source} m={m}")
            try:
                result = run_pipeline(
                    mesh_data, problem, m, options, name=source, log=log)
            except PipelineError as err:
                if log:
                    log.warning("%s m=%d failed: %s", source, m, err)
                failures.append(StudyFailure(source, m, err.stage, str(err.error)))
                continue
            reports[m].append(result.report)
    studies = []
    for m in m_range:
        if reports[m]:
            studies.append(_analyze.ConvergenceStudy(m, reports[m], against))
    return StudyResult(studies=tuple(studies), failures=tuple(failures))
