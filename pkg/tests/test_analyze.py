import csv

import numpy as np
import pytest

import recondg.analyze as analyze
import recondg.ipdg as ipdg
import recondg.mesh as mesh_mod
import recondg.mesh_gen as mesh_gen
import recondg.problems as problems
import recondg.quadrature as quadrature
import recondg.solve as solve_mod
import recondg.space as space


SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


def unit_square(cells):
    mesh = mesh_mod.PolyMesh(SQUARE, cells)
    return mesh, quadrature.subtriangulate(mesh)


def linear(cell, points):
    return points[:, 0]


def linear_gradient(cell, points):
    return np.column_stack([np.ones(len(points)), np.zeros(len(points))])


def report(size, n_dofs, l2, energy, m=1):
    return analyze.ErrorReport(
        mesh=f'h={size}', m=m, h=size, n_dofs=n_dofs, l2_error=l2,
        energy_error=energy)


def test_l2_norm_of_constant():
    mesh, sub = unit_square([[0, 1, 2, 3]])
    value = analyze.l2_norm(
        mesh, sub, lambda cell, points: np.ones(len(points)), 0)
    assert value == pytest.approx(1.0)


def test_energy_norm_of_linear_field():
    mesh, sub = unit_square([[0, 1, 2, 3]])
    value = analyze.energy_norm(mesh, sub, linear, linear_gradient, 2, 3)
    assert value == pytest.approx(np.sqrt(8.0 / 3.0))
    inner = analyze.energy_norm(
        mesh, sub, linear, linear_gradient, 2, 3, boundary_edges=())
    assert inner == pytest.approx(1.0)


def test_continuous_field_has_no_interior_jump():
    mesh, sub = unit_square([[0, 1, 2], [0, 2, 3]])
    value = analyze.energy_norm(mesh, sub, linear, linear_gradient, 2, 3)
    assert value == pytest.approx(np.sqrt(8.0 / 3.0))


def test_interior_jump():
    mesh, sub = unit_square([[0, 1, 2], [0, 2, 3]])

    def indicator(cell, points):
        return np.full(len(points), 1.0 if cell == 0 else 0.0)

    def flat(cell, points):
        return np.zeros((len(points), 2))
    value = analyze.energy_norm(mesh, sub, indicator, flat, 0, 1, boundary_edges=())
    assert value == pytest.approx(1.0)


def test_norm_homogeneity():
    mesh = mesh_gen.voronoi_hexagons(4)
    sub = quadrature.subtriangulate(mesh)

    def field(cell, points):
        return np.sin(3 * points[:, 0]) + cell

    def gradient(cell, points):
        return np.column_stack([
            3 * np.cos(3 * points[:, 0]), np.zeros(len(points))])

    def doubled(cell, points):
        return 2 * field(cell, points)

    def doubled_gradient(cell, points):
        return 2 * gradient(cell, points)
    single = analyze.energy_norm(mesh, sub, field, gradient, 4, 5)
    double = analyze.energy_norm(mesh, sub, doubled, doubled_gradient, 4, 5)
    assert double == pytest.approx(2 * single)
    assert analyze.l2_norm(mesh, sub, doubled, 4) == pytest.approx(
        2 * analyze.l2_norm(mesh, sub, field, 4))


def test_boundary_jump_modes():
    mesh = mesh_gen.structured_quads(2)
    problem = ipdg.EllipticProblem(
        coefficient=ipdg.laplace_coefficient,
        source=lambda points: np.zeros(len(points)),
        boundary={
            1: ipdg.BoundaryCondition.dirichlet(),
            None: ipdg.BoundaryCondition.neumann()})
    dirichlet = analyze.boundary_jump_edges(mesh, problem, 'dirichlet')
    assert len(dirichlet) == 2
    assert all(mesh.boundary_marker(edge) == 1 for edge in dirichlet)
    assert len(analyze.boundary_jump_edges(mesh, problem, 'all')) == 8
    assert analyze.boundary_jump_edges(mesh, problem, 'none') == ()
    with pytest.raises(analyze.AnalyzeError):
        analyze.boundary_jump_edges(mesh, problem, 'some')


def test_rates_against_h():
    sizes = [0.5, 0.25, 0.125]
    reports = [report(h, 1, h ** 2, h) for h in sizes]
    rates = analyze.fit_rates(analyze.ConvergenceStudy(1, reports[::-1]))
    assert rates.l2_rates == pytest.approx((2.0, 2.0))
    assert rates.energy_rates == pytest.approx((1.0, 1.0))
    assert rates.l2_tail == pytest.approx(2.0)
    assert rates.l2_slope == pytest.approx(2.0)
    assert rates.energy_slope == pytest.approx(1.0)
    assert rates.monotone


def test_rates_against_dofs():
    reports = [report(0.1, n, 1.0 / n, n ** -0.5) for n in (16, 64, 256)]
    convergence = analyze.ConvergenceStudy(2, reports, against='dofs')
    assert convergence.sizes() == pytest.approx([0.25, 0.125, 0.0625])
    rates = analyze.fit_rates(convergence)
    assert rates.l2_tail == pytest.approx(2.0)
    assert rates.energy_tail == pytest.approx(1.0)


def test_rates_need_two_reports():
    convergence = analyze.ConvergenceStudy(1, [report(0.5, 4, 1.0, 1.0)])
    with pytest.raises(analyze.AnalyzeError):
        analyze.fit_rates(convergence)


def test_repeated_mesh_size():
    with pytest.raises(analyze.AnalyzeError):
        analyze.ConvergenceStudy(
            1, [report(0.5, 4, 1.0, 1.0), report(0.5, 8, 0.5, 0.5)])
    with pytest.raises(analyze.AnalyzeError):
        analyze.ConvergenceStudy(1, [report(0.5, 4, 1.0, 1.0)], against='n')


def test_non_monotone_errors():
    reports = [
        report(0.5, 4, 1.0, 1.0), report(0.25, 16, 2.0, 0.5),
        report(0.125, 64, 0.5, 0.25)]
    rates = analyze.fit_rates(analyze.ConvergenceStudy(1, reports))
    assert not rates.monotone
    assert rates.l2_rates[0] == pytest.approx(-1.0)


def test_study_outputs(tmp_path):
    studies = [
        analyze.ConvergenceStudy(
            m, [report(h, 1, h ** (m + 1), h ** m, m) for h in (0.5, 0.25)])
        for m in (1, 2)]
    csv_path = tmp_path / "study.csv"
    analyze.write_study_csv(studies, str(csv_path))
    with open(csv_path, newline='', encoding='utf-8') as csv_file:
        rows = list(csv.DictReader(csv_file))
    assert list(rows[0]) == [
        'm', 'h_or_N', 'l2_error', 'energy_error', 'l2_rate', 'energy_rate']
    assert len(rows) == 4
    assert rows[0]['l2_rate'] == ''
    assert rows[1]['l2_rate'] == '2.00'
    assert rows[3]['l2_rate'] == '3.00'
    assert rows[3]['energy_rate'] == '2.00'
    svg_path = tmp_path / "study.svg"
    analyze.plot_study(studies, str(svg_path), title='test')
    assert svg_path.read_text().lstrip().startswith('<?xml')


def solve_problem(mesh, problem, m):
    sub = quadrature.subtriangulate(mesh)
    glob = space.build_global_recon(mesh, m)
    system = ipdg.build_system(mesh, sub, glob, problem)
    solution = solve_mod.solve(system)
    return analyze.error_report(mesh, sub, problem, solution)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("coefficient", ['identity', 'example2'])
def test_polynomial_solutions_are_exact(m, coefficient):
    mesh = mesh_gen.structured_quads(6)
    problem = problems.polynomial_problem(m, coefficient=coefficient, seed=m)
    result = solve_problem(mesh, problem, m)
    assert result.l2_error < 1e-8
    assert result.energy_error < 1e-7
    assert result.n_dofs == 36


def test_quartic_solution_on_hundred_cells():
    mesh = mesh_gen.structured_quads(10)
    problem = problems.polynomial_problem(4, coefficient='example2', seed=11)
    result = solve_problem(mesh, problem, 4)
    assert result.n_dofs == 100
    assert result.l2_error < 1e-8


def test_polynomial_neumann_solution_is_exact():
    mesh = mesh_gen.structured_mixed(6)
    problem = problems.polynomial_problem(2, boundary=ipdg.NEUMANN, seed=4)
    result = solve_problem(mesh, problem, 2)
    assert result.l2_error < 1e-8
    assert result.energy_error < 1e-7


def test_error_report_needs_exact_solution():
    mesh = mesh_gen.structured_quads(4)
    problem = ipdg.EllipticProblem(
        coefficient=ipdg.laplace_coefficient,
        source=lambda points: np.ones(len(points)),
        boundary={None: ipdg.BoundaryCondition.dirichlet()})
    with pytest.raises(analyze.AnalyzeError):
        solve_problem(mesh, problem, 1)
