"""P1 triangulations of rectangles and trace-zero nodal fields."""
import csv
from dataclasses import dataclass

import numpy as np


class MeshError(ValueError):
    pass


class InvalidDimensions(MeshError):
    pass


class MeshMismatch(MeshError):
    pass


class BoundaryViolation(MeshError):
    pass


class Mesh:
    """Triangle mesh with per-element areas and P1 gradient operators.

    ``gradient_operators[k]`` is the 2x3 matrix sending the three nodal
    values of triangle ``k`` to its (constant) gradient.
    """

    def __init__(self, vertices, triangles, boundary_mask):
        self.vertices = np.asarray(vertices, dtype=float)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        self.boundary_mask = np.asarray(boundary_mask, dtype=bool)
        if self.boundary_mask.shape != (len(self.vertices),):
            raise MeshError("boundary mask must have one flag per vertex")
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(det <= 0):
            raise MeshError("triangles must be counter-clockwise with positive area")
        self.element_areas = 0.5 * det
        # gradients of the barycentric coordinates: rows are x/y, columns vertices
        grads = np.empty((len(det), 2, 3))
        grads[:, 0, 1] = e2[:, 1] / det
        grads[:, 1, 1] = -e2[:, 0] / det
        grads[:, 0, 2] = -e1[:, 1] / det
        grads[:, 1, 2] = e1[:, 0] / det
        grads[:, :, 0] = -grads[:, :, 1] - grads[:, :, 2]
        self.gradient_operators = grads
        self.centroids = p.mean(axis=1)
        self.interior = np.flatnonzero(~self.boundary_mask)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def area(self):
        return float(self.element_areas.sum())

    @property
    def h(self):
        """Longest edge length."""
        p = self.vertices[self.triangles]
        edges = p - np.roll(p, 1, axis=1)
        return float(np.sqrt((edges ** 2).sum(axis=2)).max())

    def gradients(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.n_vertices:
            raise MeshMismatch(f"expected {self.n_vertices} nodal values, got {values.shape[0]}")
        return np.einsum("kij,kj->ki", self.gradient_operators, values[self.triangles])

    def centroid_values(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.n_vertices:
            raise MeshMismatch(f"expected {self.n_vertices} nodal values, got {values.shape[0]}")
        return values[self.triangles].mean(axis=1)

    def scatter(self, per_element):
        """Sum a (n_triangles, 3) array of local contributions onto vertices."""
        return np.bincount(self.triangles.ravel(), np.asarray(per_element).ravel(), minlength=self.n_vertices)

    def expand(self, interior_values):
        """Full nodal vector with zeros on the boundary."""
        out = np.zeros(self.n_vertices)
        out[self.interior] = interior_values
        return out

    def interpolate(self, fn):
        """Nodal interpolant of fn(x, y)."""
        x, y = self.vertices.T
        return np.asarray(fn(x, y), dtype=float) * np.ones(self.n_vertices)


def make_rect_mesh(nx, ny, width=1.0, height=1.0):
    """Structured mesh of [0, width] x [0, height] with 2*nx*ny triangles.

    Cell diagonals alternate in a checkerboard pattern.
    """
    if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
        raise InvalidDimensions("nx and ny must be integers >= 2")
    if not (width > 0 and height > 0):
        raise InvalidDimensions("width and height must be positive")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    a = idx[j, i]            # bottom-left
    b = idx[j, i + 1]        # bottom-right
    c = idx[j + 1, i + 1]    # top-right
    d = idx[j + 1, i]        # top-left
    flip = (i + j) % 2 == 1
    # even cells split along a-c, odd cells along b-d
    t1 = np.where(flip[:, None], np.column_stack([a, b, d]), np.column_stack([a, b, c]))
    t2 = np.where(flip[:, None], np.column_stack([b, c, d]), np.column_stack([a, c, d]))
    triangles = np.vstack([t1, t2])

    on_edge = (np.isclose(vertices[:, 0], 0.0) | np.isclose(vertices[:, 0], width)
               | np.isclose(vertices[:, 1], 0.0) | np.isclose(vertices[:, 1], height))
    return Mesh(vertices, triangles, on_edge)


@dataclass(frozen=True, eq=False)
class DiscreteField:
    mesh: Mesh
    values: np.ndarray
    trace_zero: bool = True

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n_vertices,):
            raise MeshMismatch(f"field has shape {values.shape}, mesh has {self.mesh.n_vertices} vertices")
        if self.trace_zero and np.any(values[self.mesh.boundary_mask] != 0):
            raise BoundaryViolation("trace-zero field has nonzero boundary values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_interior(cls, mesh, interior_values):
        return cls(mesh, mesh.expand(interior_values))

    def with_values(self, values):
        return DiscreteField(self.mesh, values, self.trace_zero)

    def __mul__(self, alpha):
        return self.with_values(alpha * self.values)

    __rmul__ = __mul__

    def __add__(self, other):
        check_same_mesh(self, other)
        return DiscreteField(self.mesh, self.values + other.values, self.trace_zero and other.trace_zero)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self.with_values(-self.values)


def check_same_mesh(*fields):
    meshes = {id(f.mesh) for f in fields}
    if len(meshes) > 1:
        raise MeshMismatch("fields live on different meshes")


def _values_and_mesh(field, mesh=None):
    if isinstance(field, DiscreteField):
        if mesh is not None and field.mesh is not mesh:
            raise MeshMismatch("field does not live on the given mesh")
        return field.values, field.mesh
    if mesh is None:
        raise MeshMismatch("raw nodal arrays need an explicit mesh")
    return np.asarray(field, dtype=float), mesh


def gradient_norms(field, mesh=None):
    """Per-element |grad u| of a P1 field."""
    values, mesh = _values_and_mesh(field, mesh)
    g = mesh.gradients(values)
    return np.hypot(g[:, 0], g[:, 1])


def integrate_nodal(g, field, mesh=None):
    """One-point barycentric quadrature of ``g(xy, u)`` over the mesh.

    ``xy`` is the (n_triangles, 2) array of centroids and ``u`` the field's
    centroid values.
    """
    values, mesh = _values_and_mesh(field, mesh)
    u = mesh.centroid_values(values)
    return float(np.dot(np.asarray(g(mesh.centroids, u), dtype=float) * np.ones_like(u), mesh.element_areas))


def write_field_csv(field, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "u"])
        for (x, y), u in zip(field.mesh.vertices, field.values):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(u))])


def read_field_csv(path, mesh, trace_zero=True):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xy = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    if xy.shape != mesh.vertices.shape or not np.allclose(xy, mesh.vertices):
        raise MeshMismatch("CSV coordinates do not match the mesh vertices")
    return DiscreteField(mesh, np.array([float(r["u"]) for r in rows]), trace_zero)


def write_mesh_csv(mesh, triangles_path, vertices_path):
    with open(triangles_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v0", "v1", "v2"])
        w.writerows(mesh.triangles.tolist())
    with open(vertices_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "boundary"])
        for (x, y), b in zip(mesh.vertices, mesh.boundary_mask):
            w.writerow([repr(float(x)), repr(float(y)), int(b)])
