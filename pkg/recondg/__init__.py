"""recondg"""

from recondg.mesh import (
    MeshError, ParseError, TopologyError, UnsupportedFormatError,
    MeshFileNotFound, CellError, OrientationError, DegenerateCellError,
    PolyMesh)
from recondg.mesh_io import load_polymesh, load_msh2, load_mesh, write_polymesh
from recondg.quadrature import (
    QuadratureRule, SubTriangulation, subtriangulate, cell_quadrature,
    edge_quadrature, validate_regularity)
from recondg.recon import (
    ReconError, AssumptionBViolation, PolyBasis, ReconOp, GlobalRecon,
    fit_operator, approximation_error_probe)
from recondg.patch import (
    PatchError, MeshTooCoarse, Patch, MOORE, VON_NEUMANN, build_patch,
    auto_depth, perturb_nodes, sampling_nodes, geometry_report)
from recondg.space import build_global_recon
from recondg.ipdg import (
    AssemblyError, BoundaryConfigError, NormalError, BoundaryCondition,
    EllipticProblem, DgSystem, DIRICHLET, NEUMANN, assemble, build_system)
from recondg.problems import ProblemError, builtin_problem, polynomial_problem
from recondg.solve import (
    SolveError, FactorizationError, SingularSystemError, Solution, direct_solve,
    solve_pure_neumann)
from recondg.solve import solve as solve_system
from recondg.analyze import (
    AnalyzeError, ErrorReport, ConvergenceStudy, fit_rates, l2_error,
    energy_error)
from recondg.study import PipelineError, StudyOptions, run_pipeline, run_study
