"""recondg: reconstructed approximation space"""

import numpy as _np
import recondg.patch as _patch
import recondg.recon as _recon
import recondg.workers as _workers


def build_global_recon(
        mesh, m, rule=_patch.VON_NEUMANN, depth='auto', safety=2.0,
        nodes=None, threads=1, rank_tol=1e-10, log=None):
    """Patches and reconstruction operators of every cell

    Arguments:
        mesh: PolyMesh
        m: polynomial degree
        rule: MOORE or VON_NEUMANN
        depth: patch depth t or 'auto'
        safety: auto depth wants #I(K) >= safety * dim P_m
        nodes: (n_cells, 2) sampling nodes, default barycenters
        threads: worker threads for the per-cell fits
        log: logger

    Returns:
        GlobalRecon

    Raises:
        MeshTooCoarse, AssumptionBViolation
    """
    if depth == 'auto':
        def fit(cell):
            _patch_obj, op = _patch.fit_auto(
                mesh, cell, m, rule=rule, safety=safety, nodes=nodes,
                rank_tol=rank_tol)
            return op
    else:
        def fit(cell):
            patch = _patch.build_patch(
                mesh, cell, int(depth), rule=rule, nodes=nodes)
            return _recon.fit_operator(patch, m, rank_tol=rank_tol)
    operators = _workers.parallel_map(fit, range(mesh.n_cells), threads)
    glob = _recon.GlobalRecon(mesh, operators, log=log)
    if log:
        sizes = _np.array([len(op.members) for op in operators])
        depths = _np.array([op.patch.depth for op in operators])
        log.info(
            "Reconstruction m=%d: patch size %d..%d, depth %d..%d, "
            "max condition %.3g",
            m, sizes.min(), sizes.max(), depths.min(), depths.max(),
            glob.max_condition)
    return glob
