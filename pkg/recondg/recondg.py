"""DG solver with one unknown per element"""

import os as _os
import sys as _sys
import csv as _csv
import json as _json
import argparse as _argparse
import logging as _logging
import dataclasses as _dataclasses
import recondg.__about__ as _about
import recondg.mesh as _mesh
import recondg.mesh_io as _mesh_io
import recondg.patch as _patch
import recondg.recon as _recon
import recondg.space as _space
import recondg.ipdg as _ipdg
import recondg.problems as _problems
import recondg.solve as _solve
import recondg.analyze as _analyze
import recondg.study as _study


COMMANDS = ('solve', 'study', 'patch-report')
MAX_ORDER = 6

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CONFIG_STAGES = ('mesh', 'problem')


class ParamsError(Exception):
    """Invalid command line parameters"""


@_dataclasses.dataclass(frozen=True)
class RunConfig():
    command: str
    meshes: tuple
    problem: str = 'example1'
    orders: tuple = (1,)
    rule: str = _patch.VON_NEUMANN
    depth: object = 'auto'
    safety: float = 2.0
    penalty_k: float = 10.0
    perturb: float = 0.0
    seed: int = 0
    output: str = 'out'
    quad_degree: int = None
    edge_quad_degree: int = None
    threads: int = 1
    boundary_jumps: str = 'dirichlet'
    rate_against: str = 'auto'
    epsilon: float = 1.0
    sample_density: int = 8
    field_resolution: int = 50
    sigma_threshold: float = 20.0
    export_matrix: bool = False
    dump_recon: bool = False
    fix_orientation: bool = False

    @classmethod
    def from_args(cls, args):
        depth = args.depth
        if depth != 'auto':
            try:
                depth = int(depth)
            except ValueError as err:
                raise ParamsError(
                    f"depth must be 'auto' or an integer, got '{depth}'") from err
        return cls(
            command=args.command,
            meshes=tuple(args.mesh or ()),
            problem=args.problem,
            orders=tuple(args.order or (1,)),
            rule=args.rule,
            depth=depth,
            safety=args.safety,
            penalty_k=args.penalty_k,
            perturb=args.perturb,
            seed=args.seed,
            output=args.output,
            quad_degree=args.quad_degree,
            edge_quad_degree=args.edge_quad_degree,
            threads=args.threads,
            boundary_jumps=args.boundary_jumps,
            rate_against=args.rate_against,
            epsilon=args.epsilon,
            sample_density=args.sample_density,
            field_resolution=args.field_resolution,
            sigma_threshold=args.sigma_threshold,
            export_matrix=args.export_matrix,
            dump_recon=args.dump_recon,
            fix_orientation=args.fix_orientation)

    def validate(self):
        """Check all values before any computation

        Raises:
            ParamsError
        """
        if self.command not in COMMANDS:
            raise ParamsError(f"unknown command: '{self.command}'")
        if not self.meshes:
            raise ParamsError("no mesh given, use --mesh")
        if self.command != 'study' and len(self.meshes) != 1:
            raise ParamsError(f"{self.command} takes exactly one --mesh")
        if self.command != 'study' and len(self.orders) != 1:
            raise ParamsError(f"{self.command} takes exactly one --order")
        for source in self.meshes:
            if not _mesh_io.is_builtin(source) and not _os.path.isfile(source):
                raise ParamsError(f"mesh: file not found: {source}")
        for order in self.orders:
            if not 1 <= order <= MAX_ORDER:
                raise ParamsError(
                    f"order {order} out of supported range 1..{MAX_ORDER}")
        if len(set(self.orders)) != len(self.orders):
            raise ParamsError("repeated --order")
        if self.rule not in _patch.RULES:
            raise ParamsError(f"unknown neighbor rule '{self.rule}'")
        if self.depth != 'auto' and self.depth < 0:
            raise ParamsError(f"depth must be >= 0, got {self.depth}")
        if self.safety < 1:
            raise ParamsError(f"safety must be >= 1, got {self.safety}")
        if self.penalty_k <= 0:
            raise ParamsError(f"penalty k must be positive, got {self.penalty_k}")
        if not 0 <= self.perturb < 1:
            raise ParamsError(f"perturbation must be in [0, 1), got {self.perturb}")
        if self.seed < 0:
            raise ParamsError(f"seed must be >= 0, got {self.seed}")
        if self.threads < 1:
            raise ParamsError(f"threads must be >= 1, got {self.threads}")
        for name in ('quad_degree', 'edge_quad_degree'):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ParamsError(f"{name.replace('_', ' ')} must be >= 0")
        if self.boundary_jumps not in _analyze.BOUNDARY_JUMPS:
            raise ParamsError(f"unknown boundary jumps '{self.boundary_jumps}'")
        if self.rate_against not in ('auto',) + _analyze.ABSCISSAE:
            raise ParamsError(f"unknown rate abscissa '{self.rate_against}'")
        if self.epsilon <= 0:
            raise ParamsError(f"epsilon must be positive, got {self.epsilon}")
        if self.sample_density < 1 or self.field_resolution < 1:
            raise ParamsError("sample density and field resolution must be >= 1")
        return self

    def study_options(self):
        return _study.StudyOptions(
            rule=self.rule,
            depth=self.depth,
            safety=self.safety,
            k_boundary=self.penalty_k,
            perturb=self.perturb,
            seed=self.seed,
            cell_degree=self.quad_degree,
            edge_degree=self.edge_quad_degree,
            threads=self.threads,
            boundary_jumps=self.boundary_jumps,
            rate_against=self.rate_against,
            fix_orientation=self.fix_orientation,
            sigma_threshold=self.sigma_threshold)

    def load_problem(self):
        name = self.problem
        if name in _problems.NAMES or name.startswith('polynomial:') \
                or ':' not in name:
            return _problems.builtin_problem(name)
        return _problems.builtin_problem('custom', custom=name)


def _regularity_dict(regularity):
    return {
        'n_max': regularity.n_max,
        'sigma': regularity.sigma,
        'rho1': regularity.rho1,
        'h': regularity.h,
        'irregular_cells': len(regularity.irregular_cells),
    }


class RecondgTool():
    def __init__(self, config, log=None, verbose=0):
        self._config = config
        self._log = log
        self._verbose = verbose

    def verbose(self, msg, level=1):
        if self._verbose >= level:
            print(msg, file=_sys.stderr)

    def _path(self, file_name):
        return _os.path.join(self._config.output, file_name)

    def _write_manifest(self, diagnostics):
        manifest = {
            'app': _about.APP_NAME,
            'version': _about.VERSION,
            'config': _dataclasses.asdict(self._config),
            'diagnostics': diagnostics,
        }
        with open(self._path('manifest.json'), 'w', encoding='utf-8') as out:
            _json.dump(manifest, out, indent=2, default=str)
        self.verbose(f"manifest: {self._path('manifest.json')}", 2)

    def cmd_solve(self, problem):
        config = self._config
        options = config.study_options()
        source = config.meshes[0]
        m = config.orders[0]
        self.verbose(f"loading mesh {source}")
        mesh_data = _study.prepare_mesh(source, options, log=self._log)
        self.verbose(f"solving {problem.name} m={m}")
        result = _study.run_pipeline(
            mesh_data, problem, m, options, name=source, log=self._log)
        _solve.write_solution_csv(
            result.mesh, result.solution, self._path('solution.csv'))
        _solve.write_field_csv(
            result.mesh, result.solution, self._path('field.csv'),
            resolution=config.field_resolution)
        if config.export_matrix:
            _ipdg.export_matrix(result.system, self._path('matrix.mtx'))
            _ipdg.write_penalty_csv(
                result.mesh, result.system.penalties,
                self._path('penalties.csv'))
        if config.dump_recon:
            result.recon.dump(self._path('recon.json'))
        stats = result.solution.stats
        diagnostics = {
            'n_cells': result.mesh.n_cells,
            'h': result.mesh.h,
            'regularity': _regularity_dict(result.regularity),
            'patch_sizes': [len(op.members) for op in result.recon.operators],
            'max_condition': result.recon.max_condition,
            'nnz': int(result.system.matrix.nnz),
            'pure_neumann': result.system.pure_neumann,
            'solver': _dataclasses.asdict(stats),
        }
        if result.report:
            diagnostics['l2_error'] = result.report.l2_error
            diagnostics['energy_error'] = result.report.energy_error
            print(
                f"{source} m={m} N={result.mesh.n_cells}: "
                f"L2 {result.report.l2_error:.3e} "
                f"energy {result.report.energy_error:.3e}")
        self._write_manifest(diagnostics)
        return EXIT_OK

    def cmd_study(self, problem):
        config = self._config
        result = _study.run_study(
            problem, config.meshes, config.orders, config.study_options(),
            log=self._log, progress=self.verbose)
        if result.studies:
            _analyze.write_study_csv(result.studies, self._path('study.csv'))
            _analyze.plot_study(
                result.studies, self._path('study.svg'), title=problem.name)
        rates = {}
        for study in result.studies:
            if len(study.reports) < 2:
                continue
            fit = _analyze.fit_rates(study, log=self._log)
            rates[study.m] = _dataclasses.asdict(fit)
            print(
                f"m={study.m}: L2 rate {fit.l2_tail:.2f}, "
                f"energy rate {fit.energy_tail:.2f}")
        for failure in result.failures:
            print(
                f"FAILED {failure.mesh} m={failure.m}: "
                f"{failure.stage}: {failure.message}", file=_sys.stderr)
        self._write_manifest({
            'rates': rates,
            'reports': [
                _dataclasses.asdict(report)
                for study in result.studies for report in study.reports],
            'failures': [_dataclasses.asdict(f) for f in result.failures],
        })
        return EXIT_OK if result.ok else EXIT_PARTIAL

    def cmd_patch_report(self):
        config = self._config
        options = config.study_options()
        m = config.orders[0]
        mesh, sub, regularity = _study.prepare_mesh(
            config.meshes[0], options, log=self._log)
        try:
            nodes = _patch.sampling_nodes(
                mesh, config.perturb, config.seed, log=self._log)
            glob = _space.build_global_recon(
                mesh, m, rule=config.rule, depth=config.depth,
                safety=config.safety, nodes=nodes, threads=config.threads,
                log=self._log)
            rows = [
                self._patch_row(mesh, sub, regularity, op, m)
                for op in glob.operators]
        except (_patch.PatchError, _recon.ReconError) as err:
            stage = 'patch' if isinstance(err, _patch.PatchError) else 'recon'
            raise _study.PipelineError(stage, err) from err
        with open(self._path('patch_report.csv'), 'w', newline='',
                  encoding='utf-8') as csv_file:
            writer = _csv.writer(csv_file)
            writer.writerow([
                'cell_id', 'depth', 'members', 'R', 'r', 'gamma', 'theta',
                'lambda_certified', 'lebesgue_estimate', 'cardinality_bound',
                'cardinality_ok', 'markov_beta', 'markov_beta_convex',
                'condition'])
            writer.writerows(rows)
        uncertified = sum(1 for row in rows if row[7] == 'not_certified')
        print(
            f"{mesh.n_cells} cells, {uncertified} without certified "
            "stability bound")
        self._write_manifest({
            'n_cells': mesh.n_cells,
            'regularity': _regularity_dict(regularity),
            'uncertified_cells': uncertified,
        })
        return EXIT_OK

    def _patch_row(self, mesh, sub, regularity, op, m):
        patch = op.patch
        geom = _patch.geometry_report(mesh, patch)
        h_k = float(mesh.cell_diameter[patch.owner])
        certified = _patch.lambda_bound_check(
            geom, m, h_k, eps=self._config.epsilon)
        cardinality = _patch.cardinality_bound_check(
            mesh, sub, patch, geom, regularity=regularity)
        lebesgue = _patch.lebesgue_estimate(
            mesh, sub, patch, m, sample_density=self._config.sample_density)
        markov = _patch.markov_constants(geom, m, eps=self._config.epsilon)
        return [
            patch.owner, patch.depth, len(patch), f'{geom.R:.6g}',
            f'{geom.r:.6g}', f'{geom.gamma:.6g}', f'{geom.theta:.6g}',
            'not_certified' if certified is None else f'{certified:.6g}',
            f'{lebesgue:.6g}', f'{cardinality.bound:.6g}',
            int(cardinality.satisfied), f'{markov.beta:.6g}',
            '' if markov.convex_beta is None else f'{markov.convex_beta:.6g}',
            f'{op.condition:.6g}']

    def run(self):
        """Run configured command

        Returns:
            exit code
        """
        config = self._config
        try:
            config.validate()
            problem = None
            if config.command != 'patch-report':
                problem = config.load_problem()
            _os.makedirs(config.output, exist_ok=True)
            if config.command == 'solve':
                return self.cmd_solve(problem)
            if config.command == 'study':
                return self.cmd_study(problem)
            return self.cmd_patch_report()
        except (ParamsError, _problems.ProblemError, _mesh.MeshError) as err:
            self._report(err)
            return EXIT_CONFIG
        except _study.PipelineError as err:
            self._report(err)
            if err.stage == _study.UNKNOWN_STAGE:
                return EXIT_FAILURE
            return EXIT_CONFIG if err.stage in _CONFIG_STAGES else EXIT_NUMERIC
        except (_analyze.AnalyzeError, _solve.SolveError) as err:
            self._report(err)
            return EXIT_NUMERIC
        except Exception as err:
            self._report(_study.PipelineError(_study.UNKNOWN_STAGE, err))
            return EXIT_FAILURE

    def _report(self, err):
        if self._log:
            self._log.error(err)
        else:
            print(err, file=_sys.stderr)


_VERSION_STR = "%s %s (%s <%s>)" % (
    _about.APP_NAME,
    _about.VERSION,
    _about.AUTHOR,
    _about.AUTHOR_EMAIL)
_COMMANDS_HELP_STR = """
List of available commands:
  solve                 solve one problem on one mesh, writes solution.csv,
                        field.csv and manifest.json
  study                 convergence study over meshes and orders, writes
                        study.csv and study.svg
  patch-report          patch diagnostics per cell, writes patch_report.csv
Meshes:
  {file}.poly           POLYMESH text file
  {file}.msh            Gmsh MSH 2.2 ASCII
  tri:N quad:N mixed:N  structured meshes of the unit square
  hex:N                 Voronoi hexagons of the unit square
Problems:
  example1 example2 example3 polynomial:M {module}:{factory} {file}.py:{factory}
Exit codes:
  0 success, 1 study with failed pairs or unexpected error,
  2 configuration error, 3 numerical failure
"""


def main(argv=None):
    """Main"""
    parser = _argparse.ArgumentParser(
        prog=_about.APP_NAME,
        formatter_class=_argparse.RawTextHelpFormatter,
        epilog=_COMMANDS_HELP_STR)
    parser.add_argument(
        "-V", "--version", action='version', version=_VERSION_STR)
    parser.add_argument(
        '-d', '--debug', default=0, action='count', help='set debug level')
    parser.add_argument(
        '-v', '--verbose', default=0, action='count', help='verbose output')
    parser.add_argument(
        '-m', '--mesh', action='append', help="mesh file or generator, repeat for study")
    parser.add_argument(
        '-p', '--problem', default='example1', help="problem (default: example1)")
    parser.add_argument(
        '-o', '--order', type=int, action='append',
        help=f"polynomial order 1..{MAX_ORDER}, repeat for study (default: 1)")
    parser.add_argument(
        '--rule', default=_patch.VON_NEUMANN, choices=_patch.RULES,
        help="patch neighbor rule (default: von_neumann)")
    parser.add_argument(
        '--depth', default='auto', help="patch depth or auto (default: auto)")
    parser.add_argument(
        '--safety', type=float, default=2.0,
        help="auto depth wants safety * dim P_m nodes (default: 2)")
    parser.add_argument(
        '-k', '--penalty-k', type=float, default=10.0,
        help="penalty factor k (default: 10)")
    parser.add_argument(
        '--perturb', type=float, default=0.0,
        help="sampling node offset as fraction of h_K (default: 0)")
    parser.add_argument(
        '--seed', type=int, default=0, help="perturbation seed (default: 0)")
    parser.add_argument(
        '--output', default='out', help="output directory (default: out)")
    parser.add_argument(
        '--quad-degree', type=int, help="cell quadrature degree (default: 2m+2)")
    parser.add_argument(
        '--edge-quad-degree', type=int,
        help="edge quadrature degree (default: 2m+3)")
    parser.add_argument(
        '-t', '--threads', type=int, default=1,
        help="worker threads (default: 1)")
    parser.add_argument(
        '--boundary-jumps', default='dirichlet', choices=_analyze.BOUNDARY_JUMPS,
        help="boundary edges in the energy norm (default: dirichlet)")
    parser.add_argument(
        '--rate-against', default='auto', choices=('auto',) + _analyze.ABSCISSAE,
        help="rates against h or N^-1/2 (default: auto)")
    parser.add_argument(
        '--epsilon', type=float, default=1.0,
        help="epsilon of the 1+eps stability bound (default: 1)")
    parser.add_argument(
        '--sample-density', type=int, default=8,
        help="lattice density of the stability estimate (default: 8)")
    parser.add_argument(
        '--field-resolution', type=int, default=50,
        help="probe grid size of field.csv (default: 50)")
    parser.add_argument(
        '--sigma-threshold', type=float, default=20.0,
        help="warn for sub-triangles with h_T/rho_T above (default: 20)")
    parser.add_argument(
        '--export-matrix', action='store_true',
        help="write matrix.mtx and penalties.csv")
    parser.add_argument(
        '--dump-recon', action='store_true',
        help="write reconstruction operators to recon.json")
    parser.add_argument(
        '--fix-orientation', action='store_true',
        help="reverse clockwise cells instead of failing")
    parser.add_argument('command', help='command, see below')
    args = parser.parse_args(argv)

    _logging.basicConfig(format='%(levelname).1s: %(message)s (%(filename)s:%(lineno)s)')
    log = _logging.getLogger(_about.APP_NAME)
    log.setLevel((30, 20, 10)[min(2, args.debug)])
    try:
        config = RunConfig.from_args(args)
    except ParamsError as err:
        log.error(err)
        return EXIT_CONFIG
    tool = RecondgTool(config, log=log, verbose=args.verbose)
    return tool.run()


if __name__ == '__main__':
    _sys.exit(main())
