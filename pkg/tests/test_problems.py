import numpy as np
import pytest

import recondg.ipdg as ipdg
import recondg.problems as problems


POINTS = np.array([[0.3, 0.7], [0.55, 0.2], [0.9, 0.85], [0.12, 0.41]])


def fd_residual(problem, points, step=1e-5):
    """-div(A grad u) by central differences of the exact flux"""
    def flux(p):
        return np.einsum(
            'nij,nj->ni', problem.coefficient(p), problem.exact_gradient(p))
    dx = np.array([step, 0.0])
    dy = np.array([0.0, step])
    div = (flux(points + dx)[:, 0] - flux(points - dx)[:, 0]) / (2 * step) \
        + (flux(points + dy)[:, 1] - flux(points - dy)[:, 1]) / (2 * step)
    return -div


def fd_gradient(problem, points, step=1e-6):
    dx = np.array([step, 0.0])
    dy = np.array([0.0, step])
    return np.column_stack([
        (problem.exact(points + dx) - problem.exact(points - dx)) / (2 * step),
        (problem.exact(points + dy) - problem.exact(points - dy)) / (2 * step)])


@pytest.mark.parametrize("factory", [
    problems.example1, problems.example2, problems.example3])
def test_source_matches_exact_solution(factory):
    problem = factory()
    assert problem.has_exact
    assert problem.source(POINTS) == pytest.approx(
        fd_residual(problem, POINTS), rel=1e-5, abs=1e-4)
    assert problem.exact_gradient(POINTS) == pytest.approx(
        fd_gradient(problem, POINTS), rel=1e-6, abs=1e-6)


def test_example1_values():
    problem = problems.example1()
    point = np.array([[0.25, 0.25]])
    assert problem.exact(point) == pytest.approx([1.0])
    assert problem.source(point) == pytest.approx([8 * np.pi ** 2])
    data = problem.condition(1).values(np.array([[0.25, 0.0]]), np.array([0.0, -1.0]))
    assert data == pytest.approx([-2 * np.pi])


def test_example2_coefficient():
    problem = problems.example2()
    value = problem.coefficient(np.array([[1.0, 1.0]]))[0]
    np.testing.assert_allclose(value, [[5.0, -1.0], [-1.0, 4.0]])
    assert problem.c2 == 5.62
    assert problem.condition(None).kind == ipdg.DIRICHLET


def test_example3_coefficient():
    problem = problems.example3()
    value = problem.coefficient(np.array([[0.0, 0.25]]))[0]
    np.testing.assert_allclose(value, [[4.0, -0.25], [-0.25, 2.0]])
    assert problem.condition(2).kind == ipdg.NEUMANN
    c1, c2 = problem.probe_ellipticity(POINTS)
    assert 0 < c1 and c2 <= problem.c2


@pytest.mark.parametrize("m", [0, 1, 2, 4])
@pytest.mark.parametrize("coefficient", ['identity', 'example2'])
def test_polynomial_problem(m, coefficient):
    problem = problems.polynomial_problem(m, coefficient=coefficient, seed=m)
    assert problem.name == f'polynomial:{m}'
    assert problem.source(POINTS) == pytest.approx(
        fd_residual(problem, POINTS), rel=1e-5, abs=1e-5)
    assert problem.exact_gradient(POINTS) == pytest.approx(
        fd_gradient(problem, POINTS), abs=1e-6)


def test_polynomial_problem_degree():
    problem = problems.polynomial_problem(2, seed=3)
    line = np.column_stack([np.linspace(-2, 2, 7), np.linspace(1, -1, 7)])
    values = problem.exact(line)
    fit = np.polyfit(np.linspace(-2, 2, 7), values, 3)
    assert fit[0] == pytest.approx(0.0, abs=1e-10)


def test_polynomial_problem_arguments():
    with pytest.raises(problems.ProblemError):
        problems.polynomial_problem(1, coefficient='random')
    with pytest.raises(problems.ProblemError):
        problems.polynomial_problem(1, boundary='robin')
    neumann = problems.polynomial_problem(1, boundary=ipdg.NEUMANN)
    assert neumann.condition(4).kind == ipdg.NEUMANN


def test_builtin_names():
    assert problems.builtin_problem('example1').name == 'example1'
    assert problems.builtin_problem('polynomial:3').name == 'polynomial:3'
    with pytest.raises(problems.ProblemError, match="Unknown problem"):
        problems.builtin_problem('example9')
    with pytest.raises(problems.ProblemError):
        problems.builtin_problem('custom')


CUSTOM_MODULE = """\
import numpy as np
import recondg.ipdg as ipdg


def build():
    return ipdg.EllipticProblem(
        coefficient=ipdg.laplace_coefficient,
        source=lambda points: np.ones(len(points)),
        boundary={None: ipdg.BoundaryCondition.dirichlet()},
        name='plate')


INSTANCE = build()
NOT_A_PROBLEM = 42
"""


def test_custom_problem_from_file(tmp_path):
    path = tmp_path / "my_problem.py"
    path.write_text(CUSTOM_MODULE)
    problem = problems.builtin_problem('custom', f"{path}:build")
    assert problem.name == 'plate'
    assert not problem.has_exact
    assert problems.load_custom_problem(f"{path}:INSTANCE").name == 'plate'
    with pytest.raises(problems.ProblemError):
        problems.load_custom_problem(f"{path}:NOT_A_PROBLEM")
    with pytest.raises(problems.ProblemError):
        problems.load_custom_problem(f"{path}:missing")


def test_custom_problem_errors(tmp_path):
    with pytest.raises(problems.ProblemError):
        problems.load_custom_problem("no_colon")
    with pytest.raises(problems.ProblemError, match="file not found"):
        problems.load_custom_problem(f"{tmp_path / 'absent.py'}:build")
    with pytest.raises(problems.ProblemError):
        problems.load_custom_problem("recondg_no_such_module:build")
