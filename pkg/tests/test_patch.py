import numpy as np
import pytest

import recondg.mesh as mesh_mod
import recondg.mesh_gen as mesh_gen
import recondg.patch as patch_mod
import recondg.quadrature as quadrature
import recondg.recon as recon


def rotated(mesh, angle):
    c, s = np.cos(angle), np.sin(angle)
    vertices = mesh.vertices @ np.array([[c, s], [-s, c]])
    return mesh_mod.PolyMesh(vertices, mesh.cells)


def test_depth_zero():
    mesh = mesh_gen.structured_quads(3)
    patch = patch_mod.build_patch(mesh, 4, 0)
    assert patch.members == (4,)
    assert len(patch) == 1
    assert patch.nodes == pytest.approx(mesh.cell_barycenter[[4]])


def test_von_neumann_triangles():
    mesh = mesh_gen.structured_triangles(4)
    patch = patch_mod.build_patch(mesh, 10, 1, patch_mod.VON_NEUMANN)
    assert patch.members == (10, 3, 11, 13)
    assert patch.depth == 1
    assert patch.rule == patch_mod.VON_NEUMANN


def test_moore_quads():
    mesh = mesh_gen.structured_quads(3)
    patch = patch_mod.build_patch(mesh, 4, 1, patch_mod.MOORE)
    assert len(patch) == 9
    assert patch.members[0] == 4
    assert patch.diameter == pytest.approx(np.sqrt(2))
    assert patch.center == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("rule", patch_mod.RULES)
def test_patches_grow_monotonically(rule):
    mesh = mesh_gen.voronoi_hexagons(6)
    for cell in (0, 7, 20):
        previous = set()
        for depth in range(5):
            members = set(patch_mod.build_patch(mesh, cell, depth, rule).members)
            assert previous <= members
            previous = members


def test_von_neumann_inside_moore():
    mesh = mesh_gen.structured_mixed(6)
    for depth in range(4):
        vn = patch_mod.build_patch(mesh, 17, depth, patch_mod.VON_NEUMANN)
        moore = patch_mod.build_patch(mesh, 17, depth, patch_mod.MOORE)
        assert set(vn.members) <= set(moore.members)


def test_depth_stops_when_mesh_is_covered():
    mesh = mesh_gen.structured_quads(2)
    moore = patch_mod.build_patch(mesh, 0, 5, patch_mod.MOORE)
    assert len(moore) == 4
    assert moore.depth == 1
    vn = patch_mod.build_patch(mesh, 0, 5, patch_mod.VON_NEUMANN)
    assert len(vn) == 4
    assert vn.depth == 2


def test_patch_arguments():
    mesh = mesh_gen.structured_quads(2)
    with pytest.raises(patch_mod.UnknownRule):
        patch_mod.build_patch(mesh, 0, 1, 'diagonal')
    with pytest.raises(patch_mod.PatchError):
        patch_mod.build_patch(mesh, 0, -1)
    with pytest.raises(patch_mod.PatchError):
        patch_mod.Patch(0, [1, 0], [[0, 0], [1, 1]])
    with pytest.raises(patch_mod.PatchError):
        patch_mod.Patch(0, [0, 1, 1], [[0, 0], [1, 1], [1, 1]])
    with pytest.raises(patch_mod.PatchError):
        patch_mod.Patch(0, [0, 1], [[0, 0]])


@pytest.mark.parametrize("rule, m, depth", [
    (patch_mod.VON_NEUMANN, 0, 1),
    (patch_mod.VON_NEUMANN, 1, 2),
    (patch_mod.MOORE, 1, 1),
    (patch_mod.MOORE, 2, 2),
])
def test_auto_depth(rule, m, depth):
    mesh = mesh_gen.structured_quads(6)
    patch = patch_mod.auto_depth(mesh, 14, m, rule=rule)
    assert patch.depth == depth
    assert len(patch) >= 2 * recon.poly_dim(m)


def test_auto_depth_safety():
    mesh = mesh_gen.structured_quads(6)
    patch = patch_mod.auto_depth(mesh, 14, 1, safety=1.0)
    assert patch.depth == 1
    with pytest.raises(patch_mod.PatchError):
        patch_mod.auto_depth(mesh, 14, 1, safety=0.5)


def test_mesh_too_coarse():
    mesh = mesh_gen.structured_quads(2)
    with pytest.raises(patch_mod.MeshTooCoarse) as err:
        patch_mod.auto_depth(mesh, 0, 6)
    assert err.value.cell == 0
    assert "mesh too coarse for order 6" in str(err.value)


def test_unperturbed_nodes():
    mesh = mesh_gen.voronoi_hexagons(4)
    nodes = patch_mod.sampling_nodes(mesh)
    assert nodes == pytest.approx(mesh.cell_barycenter)


def test_perturbed_nodes():
    mesh = mesh_gen.structured_quads(5)
    nodes = patch_mod.sampling_nodes(mesh, 0.1, seed=4)
    shift = np.linalg.norm(nodes - mesh.cell_barycenter, axis=1)
    assert shift == pytest.approx(0.1 * mesh.cell_diameter)
    for cell, node in enumerate(nodes):
        assert mesh.contains(cell, node)


def test_perturbation_is_deterministic():
    mesh = mesh_gen.voronoi_hexagons(4)
    first = patch_mod.sampling_nodes(mesh, 0.2, seed=1)
    second = patch_mod.sampling_nodes(mesh, 0.2, seed=1)
    other = patch_mod.sampling_nodes(mesh, 0.2, seed=2)
    assert np.array_equal(first, second)
    assert not np.allclose(first, other)
    for cell, node in enumerate(first):
        assert mesh.contains(cell, node)


def test_perturb_patch_matches_global_nodes():
    mesh = mesh_gen.structured_triangles(4)
    nodes = patch_mod.sampling_nodes(mesh, 0.15, seed=9)
    patch = patch_mod.build_patch(mesh, 10, 2)
    moved = patch_mod.perturb_nodes(mesh, patch, 0.15, seed=9)
    assert moved.members == patch.members
    assert moved.nodes == pytest.approx(nodes[list(patch.members)])
    assert moved.center == pytest.approx(patch.center)


def test_perturbation_range():
    mesh = mesh_gen.structured_quads(2)
    with pytest.raises(patch_mod.PatchError):
        patch_mod.sampling_nodes(mesh, 1.0)
    with pytest.raises(patch_mod.PatchError):
        patch_mod.sampling_nodes(mesh, -0.1)


def test_geometry_single_square():
    mesh = mesh_gen.structured_quads(1)
    geom = patch_mod.geometry_report(mesh, patch_mod.build_patch(mesh, 0, 0))
    assert geom.d_K == pytest.approx(np.sqrt(2))
    assert geom.R == pytest.approx(np.sqrt(2) / 2)
    assert geom.r == pytest.approx(0.5)
    assert geom.gamma == pytest.approx(2 * np.sqrt(2))
    assert geom.width == pytest.approx(1.0)
    assert geom.theta == pytest.approx(2 * np.arcsin(0.5 / np.sqrt(2)))
    assert geom.convex
    assert not geom.star_ratio_ok


def test_geometry_moore_patch():
    mesh = mesh_gen.structured_quads(3)
    geom = patch_mod.geometry_report(
        mesh, patch_mod.build_patch(mesh, 4, 1, patch_mod.MOORE))
    assert geom.R == pytest.approx(np.sqrt(2) / 2)
    assert geom.r == pytest.approx(0.5)
    assert geom.d_K == pytest.approx(np.sqrt(2))


def test_geometry_collinear_patch_width():
    mesh = mesh_gen.structured_quads(3)
    patch = patch_mod.Patch(4, [4, 3, 5], mesh.cell_barycenter[[4, 3, 5]])
    geom = patch_mod.geometry_report(mesh, patch)
    assert geom.width == pytest.approx(1.0 / 3.0)
    assert geom.r == pytest.approx(1.0 / 6.0)


def test_cone_aperture():
    assert patch_mod.cone_aperture(1.0, 2.0) == pytest.approx(0.505361, abs=1e-6)
    assert patch_mod.cone_aperture(4.0, 1.0) == pytest.approx(np.pi)


def geometry(R, r):
    return patch_mod.PatchGeometry(
        d_K=2 * R, R=R, r=r, gamma=2 * R / r,
        theta=patch_mod.cone_aperture(r, R), width=r)


def test_lambda_bound():
    geom = geometry(1.0, 1.0)
    assert patch_mod.lambda_bound_check(geom, 1, 0.01) == 2.0
    assert patch_mod.lambda_bound_check(geom, 1, 0.01, eps=0.5) == 1.5
    assert patch_mod.lambda_bound_check(geom, 1, 1.0) is None
    assert patch_mod.lambda_bound_check(geom, 1, 1.0, eps=1.0) is None


def test_markov_constants():
    geom = geometry(1.0, 1.0)
    constants = patch_mod.markov_constants(geom, 2, eps=0.5)
    assert constants.alpha == 1.5
    assert constants.beta == pytest.approx(8.0 / np.sin(geom.theta))
    assert constants.convex_beta is None


def test_markov_constants_of_convex_patch():
    mesh = mesh_gen.structured_quads(1)
    geom = patch_mod.geometry_report(mesh, patch_mod.build_patch(mesh, 0, 0))
    constants = patch_mod.markov_constants(geom, 2)
    assert constants.convex_alpha == 2.0
    assert constants.convex_beta == pytest.approx(16.0)


def test_l_shaped_patch_is_not_convex():
    mesh = mesh_gen.structured_quads(2)
    patch = patch_mod.Patch(0, [0, 1, 2], mesh.cell_barycenter[[0, 1, 2]])
    geom = patch_mod.geometry_report(mesh, patch)
    assert not geom.convex
    assert patch_mod.markov_constants(geom, 1).convex_beta is None


def test_lebesgue_constant_fit():
    mesh = mesh_gen.voronoi_hexagons(5)
    sub = quadrature.subtriangulate(mesh)
    patch = patch_mod.build_patch(mesh, 12, 1)
    assert patch_mod.lebesgue_estimate(mesh, sub, patch, 0) == pytest.approx(1.0)


def test_lebesgue_rotation_invariant():
    mesh = mesh_gen.structured_mixed(6)
    turned = rotated(mesh, 0.7)
    estimates = []
    for current in (mesh, turned):
        sub = quadrature.subtriangulate(current)
        patch = patch_mod.build_patch(current, 20, 2)
        estimates.append(patch_mod.lebesgue_estimate(current, sub, patch, 2))
    assert estimates[0] >= 1.0
    assert estimates[1] == pytest.approx(estimates[0], rel=1e-8)


def test_lebesgue_collinear_nodes():
    mesh = mesh_gen.structured_quads(3)
    sub = quadrature.subtriangulate(mesh)
    patch = patch_mod.Patch(4, [4, 3, 5], mesh.cell_barycenter[[4, 3, 5]])
    with pytest.raises(recon.AssumptionBViolation):
        patch_mod.lebesgue_estimate(mesh, sub, patch, 1)


def test_cardinality_bound_grows():
    mesh = mesh_gen.structured_quads(12)
    sub = quadrature.subtriangulate(mesh)
    regularity = quadrature.validate_regularity(mesh, sub)
    bounds = []
    for depth in range(1, 5):
        patch = patch_mod.build_patch(mesh, 78, depth)
        geom = patch_mod.geometry_report(mesh, patch)
        check = patch_mod.cardinality_bound_check(
            mesh, sub, patch, geom, regularity)
        assert check.actual == 2 * depth * depth + 2 * depth + 1
        assert check.satisfied
        bounds.append(check.bound)
    assert bounds == sorted(bounds)
