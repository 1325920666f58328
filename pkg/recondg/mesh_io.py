"""recondg: mesh file formats"""

import os as _os
import re as _re
import collections as _collections
import recondg.mesh as _mesh
import recondg.mesh_gen as _mesh_gen


_BUILTIN_RE = _re.compile(r'^(tri|quad|mixed|hex):(\d+)$')
_MSH_CELL_TYPES = {2: 3, 3: 4}
_MSH_IGNORED_TYPES = {15}


def _significant_lines(text):
    result = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if line:
            result.append((line_no, line.split()))
    return result


class _Lines():
    def __init__(self, lines):
        self._lines = lines
        self._pos = 0

    @property
    def exhausted(self):
        return self._pos >= len(self._lines)

    def take(self, what):
        if self.exhausted:
            line_no = self._lines[-1][0] + 1 if self._lines else 1
            raise _mesh.ParseError(line_no, f"unexpected end of file, expected {what}")
        line = self._lines[self._pos]
        self._pos += 1
        return line

    def take_count(self, what):
        line_no, tokens = self.take(what)
        if len(tokens) != 1:
            raise _mesh.ParseError(line_no, f"expected {what}")
        return _parse_int(line_no, tokens[0], minimum=0)


def _parse_int(line_no, token, minimum=None):
    try:
        value = int(token)
    except ValueError as err:
        raise _mesh.ParseError(line_no, f"invalid integer '{token}'") from err
    if minimum is not None and value < minimum:
        raise _mesh.ParseError(line_no, f"value {value} is below {minimum}")
    return value


def _parse_float(line_no, token):
    try:
        return float(token)
    except ValueError as err:
        raise _mesh.ParseError(line_no, f"invalid number '{token}'") from err


def load_polymesh(text, fix_orientation=False, log=None):
    """Load mesh in POLYMESH format

    Arguments:
        text: file content
        fix_orientation: reverse clockwise cells instead of raising
        log: logger

    Returns:
        PolyMesh

    Raises:
        ParseError with line number, TopologyError, CellError
    """
    lines = _Lines(_significant_lines(text))
    line_no, tokens = lines.take("header")
    if tokens != ['polymesh', '1']:
        raise _mesh.ParseError(line_no, "expected header 'polymesh 1'")
    vertices = []
    for _ in range(lines.take_count("vertex count")):
        line_no, tokens = lines.take("vertex")
        if len(tokens) != 2:
            raise _mesh.ParseError(line_no, "vertex needs 2 coordinates")
        vertices.append([_parse_float(line_no, t) for t in tokens])
    cells = []
    for _ in range(lines.take_count("cell count")):
        line_no, tokens = lines.take("cell")
        count = _parse_int(line_no, tokens[0], minimum=3)
        if len(tokens) != count + 1:
            raise _mesh.ParseError(
                line_no, f"cell declares {count} vertices, "
                f"found {len(tokens) - 1}")
        indices = [_parse_int(line_no, t, minimum=0) for t in tokens[1:]]
        for index in indices:
            if index >= len(vertices):
                raise _mesh.ParseError(line_no, f"vertex {index} not defined")
        cells.append(indices)
    markers = {}
    if not lines.exhausted:
        for _ in range(lines.take_count("boundary marker count")):
            line_no, tokens = lines.take("boundary marker")
            if len(tokens) != 3:
                raise _mesh.ParseError(line_no, "expected 'i j marker'")
            i, j, marker = (_parse_int(line_no, t) for t in tokens)
            markers[(i, j)] = marker
    if not lines.exhausted:
        line_no, _tokens = lines.take("end of file")
        raise _mesh.ParseError(line_no, "unexpected data after mesh")
    mesh = _mesh.PolyMesh(
        vertices, cells, boundary_markers=markers,
        fix_orientation=fix_orientation, log=log)
    if log:
        log.info(
            "POLYMESH: %d vertices, %d cells, %d edges",
            mesh.n_vertices, mesh.n_cells, mesh.n_edges)
    return mesh


def write_polymesh(mesh):
    """Serialize mesh to POLYMESH text, non-zero markers included"""
    out = ['polymesh 1', str(mesh.n_vertices)]
    out.extend(f'{x!r} {y!r}' for x, y in mesh.vertices.tolist())
    out.append(str(mesh.n_cells))
    out.extend(
        ' '.join(str(i) for i in (len(cell),) + cell) for cell in mesh.cells)
    markers = [
        (edge, marker) for edge, marker in sorted(mesh.markers.items())
        if marker]
    if markers:
        out.append(str(len(markers)))
        for edge, marker in markers:
            a, b = mesh.oriented_edge(edge, mesh.edge_cells[edge][0])
            out.append(f'{a} {b} {marker}')
    return '\n'.join(out) + '\n'


def _msh_sections(text):
    sections = {}
    name = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith('$End'):
            name = None
        elif line.startswith('$'):
            name = line[1:]
            sections[name] = []
        elif name is not None:
            sections[name].append((line_no, line.split()))
    return sections


def load_msh2(text, fix_orientation=False, log=None):
    """Load ASCII Gmsh MSH 2.2 mesh with triangles and quadrangles

    Arguments:
        text: file content
        fix_orientation: reverse clockwise cells instead of raising
        log: logger

    Returns:
        PolyMesh, line elements become boundary markers (physical tag)

    Raises:
        UnsupportedFormatError for other versions and element types
    """
    sections = _msh_sections(text)
    if 'MeshFormat' not in sections or not sections['MeshFormat']:
        raise _mesh.ParseError(1, "missing $MeshFormat section")
    line_no, tokens = sections['MeshFormat'][0]
    if tokens[0] != '2.2':
        raise _mesh.UnsupportedFormatError(f"MSH version {tokens[0]}")
    if len(tokens) > 1 and tokens[1] != '0':
        raise _mesh.UnsupportedFormatError("binary MSH files")
    for required in ('Nodes', 'Elements'):
        if required not in sections:
            raise _mesh.ParseError(line_no, f"missing ${required} section")
    nodes = {}
    for line_no, tokens in sections['Nodes'][1:]:
        if len(tokens) != 4:
            raise _mesh.ParseError(line_no, "node needs id and 3 coordinates")
        nodes[_parse_int(line_no, tokens[0])] = (
            _parse_float(line_no, tokens[1]), _parse_float(line_no, tokens[2]))
    raw_cells = []
    lines = []
    for line_no, tokens in sections['Elements'][1:]:
        if len(tokens) < 3:
            raise _mesh.ParseError(line_no, "element needs id, type and tags")
        element_type = _parse_int(line_no, tokens[1])
        tag_count = _parse_int(line_no, tokens[2], minimum=0)
        tags = tokens[3:3 + tag_count]
        node_ids = [_parse_int(line_no, t) for t in tokens[3 + tag_count:]]
        for node_id in node_ids:
            if node_id not in nodes:
                raise _mesh.ParseError(line_no, f"node {node_id} not defined")
        if element_type in _MSH_CELL_TYPES:
            if len(node_ids) != _MSH_CELL_TYPES[element_type]:
                raise _mesh.ParseError(line_no, "wrong number of nodes")
            raw_cells.append(node_ids)
        elif element_type == 1:
            marker = _parse_int(line_no, tags[0]) if tags else 0
            lines.append((node_ids[0], node_ids[1], marker))
        elif element_type not in _MSH_IGNORED_TYPES:
            raise _mesh.UnsupportedFormatError(
                f"MSH element type {element_type} (line {line_no})")
    used = sorted({node_id for cell in raw_cells for node_id in cell})
    index = {node_id: i for i, node_id in enumerate(used)}
    vertices = [nodes[node_id] for node_id in used]
    cells = [[index[node_id] for node_id in cell] for cell in raw_cells]
    edge_use = _collections.Counter(
        (min(a, b), max(a, b))
        for cell in cells for a, b in zip(cell, cell[1:] + cell[:1]))
    markers = {}
    for a, b, marker in lines:
        if a not in index or b not in index:
            continue
        i, j = index[a], index[b]
        if edge_use[(min(i, j), max(i, j))] != 1:
            if log:
                log.warning("MSH line element %d-%d is not on boundary", a, b)
            continue
        markers[(i, j)] = marker
    mesh = _mesh.PolyMesh(
        vertices, cells, boundary_markers=markers,
        fix_orientation=fix_orientation, log=log)
    if log:
        log.info(
            "MSH: %d vertices, %d cells, %d marked boundary edges",
            mesh.n_vertices, mesh.n_cells, len(markers))
    return mesh


def is_builtin(source):
    return bool(_BUILTIN_RE.match(source))


def load_mesh(source, fix_orientation=False, log=None):
    """Load mesh from file or built-in generator

    Arguments:
        source: path to .poly / .msh file or 'tri:N', 'quad:N',
            'mixed:N', 'hex:N'
        fix_orientation: reverse clockwise cells instead of raising
        log: logger

    Returns:
        PolyMesh
    """
    match = _BUILTIN_RE.match(source)
    if match:
        kind, size = match.group(1), int(match.group(2))
        return _mesh_gen.GENERATORS[kind](size)
    if not _os.path.isfile(source):
        raise _mesh.MeshFileNotFound(source)
    with open(source, 'r', encoding='utf-8') as mesh_file:
        text = mesh_file.read()
    if source.endswith('.msh') or text.lstrip().startswith('$MeshFormat'):
        return load_msh2(text, fix_orientation=fix_orientation, log=log)
    return load_polymesh(text, fix_orientation=fix_orientation, log=log)
