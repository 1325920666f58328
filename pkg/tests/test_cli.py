import csv
import json

import pytest

import recondg.recondg as cli


def run(tmp_path, *argv):
    return cli.main(['--output', str(tmp_path), *argv])


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as csv_file:
        return list(csv.DictReader(csv_file))


def test_solve(tmp_path, capsys):
    code = run(
        tmp_path, '-m', 'quad:4', '-p', 'example2', '-o', '1', '--seed', '3',
        '--field-resolution', '4', 'solve')
    assert code == cli.EXIT_OK
    assert len(read_rows(tmp_path / 'solution.csv')) == 16
    assert len(read_rows(tmp_path / 'field.csv')) == 16
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    assert manifest['app'] == 'recondg'
    assert manifest['config']['seed'] == 3
    assert manifest['config']['meshes'] == ['quad:4']
    assert manifest['diagnostics']['n_cells'] == 16
    assert not manifest['diagnostics']['pure_neumann']
    assert 'l2_error' in manifest['diagnostics']
    assert 'quad:4 m=1' in capsys.readouterr().out


def test_solve_exports(tmp_path):
    code = run(
        tmp_path, '-m', 'quad:3', '--field-resolution', '2',
        '--export-matrix', '--dump-recon', 'solve')
    assert code == cli.EXIT_OK
    assert (tmp_path / 'matrix.mtx').is_file()
    assert (tmp_path / 'penalties.csv').is_file()
    recon = json.loads((tmp_path / 'recon.json').read_text())
    assert recon


def test_missing_mesh_file(tmp_path, caplog):
    code = run(tmp_path, '-m', str(tmp_path / 'absent.poly'), 'solve')
    assert code == cli.EXIT_CONFIG
    assert "mesh: file not found" in caplog.text
    assert not (tmp_path / 'manifest.json').exists()


@pytest.mark.parametrize("argv", [
    ['-m', 'quad:4', '-o', '9', 'solve'],
    ['-m', 'quad:4', '-o', '0', 'solve'],
    ['solve'],
    ['-m', 'quad:4', '--depth', 'deep', 'solve'],
    ['-m', 'quad:4', '--depth', '-1', 'solve'],
    ['-m', 'quad:4', '--seed', '-2', 'solve'],
    ['-m', 'quad:4', '--perturb', '1.5', 'solve'],
    ['-m', 'quad:4', '-k', '0', 'solve'],
    ['-m', 'quad:4', '-m', 'quad:8', 'solve'],
    ['-m', 'quad:4', '-o', '1', '-o', '1', 'study'],
    ['-m', 'quad:4', 'simulate'],
    ['-m', 'quad:4', '-p', 'example9', 'solve'],
])
def test_configuration_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == cli.EXIT_CONFIG


def test_order_message(tmp_path, caplog):
    run(tmp_path, '-m', 'quad:4', '-o', '9', 'solve')
    assert "order 9 out of supported range 1..6" in caplog.text


def test_study(tmp_path, capsys):
    code = run(
        tmp_path, '-m', 'quad:4', '-m', 'quad:8', '-p', 'example2', 'study')
    assert code == cli.EXIT_OK
    rows = read_rows(tmp_path / 'study.csv')
    assert len(rows) == 2
    assert rows[0]['m'] == '1'
    assert rows[1]['l2_rate'] != ''
    assert (tmp_path / 'study.svg').read_text().lstrip().startswith('<?xml')
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    assert '1' in manifest['diagnostics']['rates']
    assert manifest['diagnostics']['failures'] == []
    assert 'm=1: L2 rate' in capsys.readouterr().out


def test_study_with_failed_pair(tmp_path, capsys):
    code = run(
        tmp_path, '-m', 'quad:2', '-m', 'quad:4', '-m', 'quad:8',
        '-p', 'example2', 'study')
    assert code == cli.EXIT_PARTIAL
    assert len(read_rows(tmp_path / 'study.csv')) == 2
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    failures = manifest['diagnostics']['failures']
    assert len(failures) == 1
    assert failures[0]['mesh'] == 'quad:2'
    assert failures[0]['stage'] == 'patch'
    assert 'FAILED quad:2 m=1' in capsys.readouterr().err


def test_study_needs_exact_solution(tmp_path, caplog):
    module = tmp_path / 'plate.py'
    module.write_text(
        "import numpy as np\n"
        "import recondg.ipdg as ipdg\n"
        "\n"
        "\n"
        "def build():\n"
        "    return ipdg.EllipticProblem(\n"
        "        coefficient=ipdg.laplace_coefficient,\n"
        "        source=lambda points: np.ones(len(points)),\n"
        "        boundary={None: ipdg.BoundaryCondition.dirichlet()})\n")
    code = run(
        tmp_path, '-m', 'quad:4', '-m', 'quad:8', '-p', f'{module}:build',
        'study')
    assert code == cli.EXIT_NUMERIC


BROKEN_SOURCE = (
    "import numpy as np\n"
    "import recondg.ipdg as ipdg\n"
    "\n"
    "\n"
    "def source(points):\n"
    "    raise ValueError('source table missing')\n"
    "\n"
    "\n"
    "def build():\n"
    "    return ipdg.EllipticProblem(\n"
    "        coefficient=ipdg.laplace_coefficient,\n"
    "        source=source,\n"
    "        boundary={None: ipdg.BoundaryCondition.dirichlet()},\n"
    "        exact=lambda points: np.zeros(len(points)),\n"
    "        exact_gradient=lambda points: np.zeros((len(points), 2)))\n")


def test_unexpected_error_in_custom_problem(tmp_path, caplog):
    module = tmp_path / 'broken.py'
    module.write_text(BROKEN_SOURCE)
    code = run(tmp_path, '-m', 'quad:4', '-p', f'{module}:build', 'solve')
    assert code == cli.EXIT_FAILURE == 1
    assert "unknown: source table missing" in caplog.text


def test_study_records_unexpected_error(tmp_path, capsys):
    module = tmp_path / 'broken.py'
    module.write_text(BROKEN_SOURCE)
    code = run(
        tmp_path, '-m', 'quad:4', '-m', 'quad:8', '-p', f'{module}:build',
        'study')
    assert code == cli.EXIT_PARTIAL
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    failures = manifest['diagnostics']['failures']
    assert [f['stage'] for f in failures] == ['unknown', 'unknown']
    assert failures[0]['message'] == 'source table missing'
    assert 'FAILED quad:4 m=1: unknown' in capsys.readouterr().err


def test_patch_report(tmp_path, capsys):
    code = run(tmp_path, '-m', 'hex:4', '-o', '1', 'patch-report')
    assert code == cli.EXIT_OK
    rows = read_rows(tmp_path / 'patch_report.csv')
    assert len(rows) == 18
    assert [int(row['cell_id']) for row in rows] == list(range(18))
    for row in rows:
        assert int(row['members']) >= 6
        assert float(row['lebesgue_estimate']) >= 1.0
    assert '18 cells' in capsys.readouterr().out


def test_patch_report_convex_markov_bound(tmp_path):
    code = run(
        tmp_path, '-m', 'quad:6', '-o', '1', '--rule', 'moore',
        'patch-report')
    assert code == cli.EXIT_OK
    row = read_rows(tmp_path / 'patch_report.csv')[14]
    assert row['depth'] == '1'
    assert row['members'] == '9'
    assert float(row['markov_beta_convex']) == pytest.approx(8.0)


def test_version(capsys):
    with pytest.raises(SystemExit):
        cli.main(['--version'])
    assert 'recondg' in capsys.readouterr().out
