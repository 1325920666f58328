"""recondg: manufactured elliptic problems"""

import os as _os
import re as _re
import importlib as _importlib
import importlib.util as _importlib_util
import numpy as _np
import numpy.polynomial.polynomial as _poly
import recondg.ipdg as _ipdg


K = 2.0 * _np.pi

NAMES = ('example1', 'example2', 'example3', 'custom')
_POLYNOMIAL_RE = _re.compile(r'^polynomial:(\d+)$')


class ProblemError(Exception):
    """Unknown or invalid problem"""


def _split(points):
    points = _np.atleast_2d(_np.asarray(points, dtype=float))
    return points[:, 0], points[:, 1]


def _matrix(a11, a12, a22):
    return _np.stack([
        _np.stack([a11, a12], axis=-1),
        _np.stack([a12, a22], axis=-1)], axis=-2)


def _source(coefficient, derivatives, gradient, hessian):
    """-div(A grad u) from A, (dx A11, dx A12, dy A12, dy A22),
    grad u and (u_xx, u_xy, u_yy)"""
    a_mat = coefficient
    dx_a11, dx_a12, dy_a12, dy_a22 = derivatives
    u_x, u_y = gradient[:, 0], gradient[:, 1]
    u_xx, u_xy, u_yy = hessian
    return -(
        dx_a11 * u_x + dx_a12 * u_y + dy_a12 * u_x + dy_a22 * u_y
        + a_mat[:, 0, 0] * u_xx + 2.0 * a_mat[:, 0, 1] * u_xy
        + a_mat[:, 1, 1] * u_yy)


def _neumann_data(coefficient, exact_gradient):
    def data(points, normal):
        flux = _np.einsum(
            'nij,nj->ni', coefficient(points), exact_gradient(points))
        return flux @ normal
    return data


def _dirichlet_data(exact):
    def data(points, normal):
        return exact(points)
    return data


def example1():
    """Laplace, u = sin(2 pi x) sin(2 pi y), Neumann data from u"""
    def exact(points):
        x, y = _split(points)
        return _np.sin(K * x) * _np.sin(K * y)

    def exact_gradient(points):
        x, y = _split(points)
        return K * _np.column_stack([
            _np.cos(K * x) * _np.sin(K * y),
            _np.sin(K * x) * _np.cos(K * y)])

    def source(points):
        return 2.0 * K * K * exact(points)

    coefficient = _ipdg.laplace_coefficient
    return _ipdg.EllipticProblem(
        coefficient=coefficient, source=source,
        boundary={None: _ipdg.BoundaryCondition.neumann(
            _neumann_data(coefficient, exact_gradient))},
        c1=1.0, c2=1.0, exact=exact, exact_gradient=exact_gradient,
        name='example1')


def _example2_coefficient(points):
    x, y = _split(points)
    return _matrix((x + 1) ** 2 + y ** 2, -x * y, (x + 1) ** 2)


def _example2_derivatives(points):
    x, y = _split(points)
    return 2.0 * (x + 1), -y, -x, _np.zeros_like(x)


def example2():
    """A = [[(x+1)^2 + y^2, -xy], [-xy, (x+1)^2]],
    u = x^3 y^2 + x sin(2 pi x y) sin(2 pi y), Dirichlet data from u"""
    def parts(points):
        x, y = _split(points)
        s1, c1 = _np.sin(K * x * y), _np.cos(K * x * y)
        s2, c2 = _np.sin(K * y), _np.cos(K * y)
        return x, y, s1, c1, s2, c2

    def exact(points):
        x, y, s1, _c1, s2, _c2 = parts(points)
        return x ** 3 * y ** 2 + x * s1 * s2

    def exact_gradient(points):
        x, y, s1, c1, s2, c2 = parts(points)
        return _np.column_stack([
            3 * x ** 2 * y ** 2 + s1 * s2 + K * x * y * c1 * s2,
            2 * x ** 3 * y + K * x ** 2 * c1 * s2 + K * x * s1 * c2])

    def source(points):
        x, y, s1, c1, s2, c2 = parts(points)
        u_xx = 6 * x * y ** 2 + 2 * K * y * c1 * s2 \
            - K * K * x * y ** 2 * s1 * s2
        u_yy = 2 * x ** 3 - K * K * x ** 3 * s1 * s2 \
            + 2 * K * K * x ** 2 * c1 * c2 - K * K * x * s1 * s2
        u_xy = 6 * x ** 2 * y + 2 * K * x * c1 * s2 + K * s1 * c2 \
            - K * K * x ** 2 * y * s1 * s2 + K * K * x * y * c1 * c2
        return _source(
            _example2_coefficient(points), _example2_derivatives(points),
            exact_gradient(points), (u_xx, u_xy, u_yy))

    return _ipdg.EllipticProblem(
        coefficient=_example2_coefficient, source=source,
        boundary={None: _ipdg.BoundaryCondition.dirichlet(
            _dirichlet_data(exact))},
        c1=1.0, c2=5.62, exact=exact, exact_gradient=exact_gradient,
        name='example2')


def example3():
    """A = [[3 + cos(2 pi x), x - y], [x - y, 3 - sin(2 pi y)]],
    u = exp((x^2 + y^2) / 2) + sin(2 pi (x + y)) sin(2 pi y),
    Neumann data from u"""
    def parts(points):
        x, y = _split(points)
        exp = _np.exp((x ** 2 + y ** 2) / 2)
        sa, ca = _np.sin(K * (x + y)), _np.cos(K * (x + y))
        s2, c2 = _np.sin(K * y), _np.cos(K * y)
        return x, y, exp, sa, ca, s2, c2

    def coefficient(points):
        x, y = _split(points)
        return _matrix(3 + _np.cos(K * x), x - y, 3 - _np.sin(K * y))

    def exact(points):
        _x, _y, exp, sa, _ca, s2, _c2 = parts(points)
        return exp + sa * s2

    def exact_gradient(points):
        x, y, exp, sa, ca, s2, c2 = parts(points)
        return _np.column_stack([
            x * exp + K * ca * s2,
            y * exp + K * ca * s2 + K * sa * c2])

    def source(points):
        x, y, exp, sa, ca, s2, c2 = parts(points)
        u_xx = (1 + x ** 2) * exp - K * K * sa * s2
        u_xy = x * y * exp - K * K * sa * s2 + K * K * ca * c2
        u_yy = (1 + y ** 2) * exp - 2 * K * K * sa * s2 \
            + 2 * K * K * ca * c2
        derivatives = (
            -K * _np.sin(K * x), _np.ones_like(x), -_np.ones_like(x),
            -K * _np.cos(K * y))
        return _source(
            coefficient(points), derivatives, exact_gradient(points),
            (u_xx, u_xy, u_yy))

    return _ipdg.EllipticProblem(
        coefficient=coefficient, source=source,
        boundary={None: _ipdg.BoundaryCondition.neumann(
            _neumann_data(coefficient, exact_gradient))},
        c1=1.0, c2=5.0, exact=exact, exact_gradient=exact_gradient,
        name='example3')


def _identity_derivatives(points):
    x, _y = _split(points)
    zero = _np.zeros_like(x)
    return zero, zero, zero, zero


_COEFFICIENTS = {
    'identity': (_ipdg.laplace_coefficient, _identity_derivatives, 1.0, 1.0),
    'example2': (_example2_coefficient, _example2_derivatives, 1.0, 5.62),
}


def polynomial_problem(
        m, coefficient='identity', boundary=_ipdg.DIRICHLET, seed=0):
    """Random u of total degree m with matching f and boundary data

    Arguments:
        m: total degree of u
        coefficient: 'identity' or 'example2'
        boundary: DIRICHLET or NEUMANN on the whole boundary
        seed: random seed of the coefficients of u
    """
    if coefficient not in _COEFFICIENTS:
        raise ProblemError(f"Unknown coefficient '{coefficient}'")
    a_func, da_func, c1, c2 = _COEFFICIENTS[coefficient]
    rng = _np.random.default_rng(seed)
    coef = rng.uniform(-1.0, 1.0, (m + 1, m + 1))
    coef[_np.add.outer(_np.arange(m + 1), _np.arange(m + 1)) > m] = 0.0
    c_x = _poly.polyder(coef, axis=0)
    c_y = _poly.polyder(coef, axis=1)
    c_xx = _poly.polyder(c_x, axis=0)
    c_xy = _poly.polyder(c_x, axis=1)
    c_yy = _poly.polyder(c_y, axis=1)

    def exact(points):
        x, y = _split(points)
        return _poly.polyval2d(x, y, coef)

    def exact_gradient(points):
        x, y = _split(points)
        return _np.column_stack([
            _poly.polyval2d(x, y, c_x), _poly.polyval2d(x, y, c_y)])

    def source(points):
        x, y = _split(points)
        return _source(
            a_func(points), da_func(points), exact_gradient(points),
            tuple(_poly.polyval2d(x, y, c) for c in (c_xx, c_xy, c_yy)))

    if boundary == _ipdg.DIRICHLET:
        condition = _ipdg.BoundaryCondition.dirichlet(_dirichlet_data(exact))
    elif boundary == _ipdg.NEUMANN:
        condition = _ipdg.BoundaryCondition.neumann(
            _neumann_data(a_func, exact_gradient))
    else:
        raise ProblemError(f"Unknown boundary condition '{boundary}'")
    return _ipdg.EllipticProblem(
        coefficient=a_func, source=source, boundary={None: condition},
        c1=c1, c2=c2, exact=exact, exact_gradient=exact_gradient,
        name=f'polynomial:{m}')


def _load_module(path):
    name = _os.path.splitext(_os.path.basename(path))[0]
    spec = _importlib_util.spec_from_file_location(name, path)
    if spec is None or spec.loader is None:
        raise ProblemError(f"Cannot import '{path}'")
    module = _importlib_util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def load_custom_problem(reference):
    """Problem from 'package.module:factory' or 'file.py:factory'

    The attribute is an EllipticProblem or a callable returning one.
    """
    module_name, sep, attr = reference.rpartition(':')
    if not sep or not module_name or not attr:
        raise ProblemError(
            f"Custom problem '{reference}' must look like 'module:attribute'")
    try:
        if module_name.endswith('.py'):
            if not _os.path.isfile(module_name):
                raise ProblemError(f"file not found: {module_name}")
            module = _load_module(module_name)
        else:
            module = _importlib.import_module(module_name)
    except ImportError as err:
        raise ProblemError(f"Cannot import '{module_name}': {err}") from err
    try:
        problem = getattr(module, attr)
    except AttributeError as err:
        raise ProblemError(f"'{module_name}' has no attribute '{attr}'") from err
    if callable(problem) and not isinstance(problem, _ipdg.EllipticProblem):
        problem = problem()
    if not isinstance(problem, _ipdg.EllipticProblem):
        raise ProblemError(f"'{reference}' is not an EllipticProblem")
    return problem


_BUILTINS = {
    'example1': example1,
    'example2': example2,
    'example3': example3,
}


def builtin_problem(name, custom=None):
    """Manufactured problem by name

    Arguments:
        name: 'example1', 'example2', 'example3', 'polynomial:M'
            or 'custom'
        custom: 'module:attribute' reference for 'custom'

    Raises:
        ProblemError for unknown names
    """
    if name in _BUILTINS:
        return _BUILTINS[name]()
    match = _POLYNOMIAL_RE.match(name)
    if match:
        return polynomial_problem(int(match.group(1)))
    if name == 'custom':
        if not custom:
            raise ProblemError("Custom problem needs a 'module:attribute'")
        return load_custom_problem(custom)
    raise ProblemError(
        f"Unknown problem '{name}', use one of {', '.join(NAMES)} "
        "or polynomial:M")
