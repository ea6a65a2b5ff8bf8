"""Periodic uniform Cartesian meshes on the unit torus and cellwise-constant fields.

Cells are addressed by row-major index tuples ``(k_0, ..., k_{d-1})``.  A face
of direction ``i`` is identified by the index of the cell on its "-" side;
the "+" side is the neighbour at ``k_i + 1`` (mod ``n``).  All face arrays of a
direction therefore have the same shape as the cell array.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np

from grpburgers.errors import InputError

#: Default number of Gauss-Legendre points per axis for cell quadrature.
QUADRATURE_POINTS = 4

PointFunction = Callable[..., np.ndarray]


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh with ``n`` cells per axis on ``[0, 1)^dim``."""

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise InputError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def face_area(self) -> float:
        return self.h ** (self.dim - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def num_cells(self) -> int:
        return self.n**self.dim

    def faces_per_direction(self) -> int:
        return self.num_cells

    def centers(self) -> tuple[np.ndarray, ...]:
        """Cell-centre coordinates, one broadcast-ready array per axis."""
        c = (np.arange(self.n) + 0.5) * self.h
        return tuple(np.meshgrid(*([c] * self.dim), indexing="ij"))

    def plus_neighbor(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Values of the cell at ``k_axis + 1``, with wraparound."""
        return np.roll(values, -1, axis=axis)

    def minus_neighbor(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Values of the cell at ``k_axis - 1``, with wraparound."""
        return np.roll(values, 1, axis=axis)

    def plus_cell(self, index: Sequence[int], axis: int) -> tuple[int, ...]:
        idx = list(index)
        idx[axis] = (idx[axis] + 1) % self.n
        return tuple(idx)


@dataclass(frozen=True)
class Face:
    """Face of direction ``axis`` whose "-" side is cell ``index``."""

    axis: int
    index: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Field:
    """Cell averages on a mesh at one time level."""

    mesh: Mesh
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.mesh.shape:
            raise InputError(
                f"field shape {values.shape} does not match mesh {self.mesh.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def mass(self) -> float:
        """Total mass, summed with correct rounding so it is order independent."""
        return self.mesh.cell_volume * math.fsum(self.values.ravel().tolist())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values: np.ndarray, time: float) -> Field:
        return Field(self.mesh, values, time)


def gauss_nodes(points: int = QUADRATURE_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to the reference interval ``[0, 1]``."""
    xi, w = np.polynomial.legendre.leggauss(points)
    return 0.5 * (xi + 1.0), 0.5 * w


def cell_average(phi: PointFunction, mesh: Mesh,
                 points: int = QUADRATURE_POINTS) -> np.ndarray:
    """Tensor-product Gauss average of ``phi(x_0, ..., x_{d-1})`` over every cell."""
    nodes, weights = gauss_nodes(points)
    corner = np.arange(mesh.n) * mesh.h
    lower = np.meshgrid(*([corner] * mesh.dim), indexing="ij")
    total = np.zeros(mesh.shape)
    for combo in np.ndindex(*([points] * mesh.dim)):
        x = tuple(lower[a] + nodes[q] * mesh.h for a, q in enumerate(combo))
        w = math.prod(weights[q] for q in combo)
        total += w * np.broadcast_to(phi(*x), mesh.shape)
    return total


def project(phi: PointFunction | float, mesh: Mesh, *, time: float = 0.0,
            points: int = QUADRATURE_POINTS) -> Field:
    """Cell averages of ``phi`` by ``points``-per-axis Gauss-Legendre quadrature.

    ``phi`` may be a constant or a vectorised callable of the ``dim``
    coordinate arrays.  Constants are reproduced bit for bit.
    """
    if not callable(phi):
        values = np.full(mesh.shape, float(phi))
    else:
        values = cell_average(phi, mesh, points)
    if not np.all(np.isfinite(values)):
        raise InputError("projection produced non-finite cell averages")
    return Field(mesh, values, time)


def face_states(values: np.ndarray, mesh: Mesh, axis: int):
    """Jump, average and one-sided values on every face of direction ``axis``.

    Returns ``(jump, avg, minus, plus)`` arrays indexed by the "-" cell.
    """
    minus = values
    plus = mesh.plus_neighbor(values, axis)
    return plus - minus, 0.5 * (minus + plus), minus, plus


def face_jump_avg(field_: Field, face: Face) -> tuple[float, float, float, float]:
    """``([u], <u>, u^-, u^+)`` on a single face."""
    mesh = field_.mesh
    if not 0 <= face.axis < mesh.dim or len(face.index) != mesh.dim:
        raise InputError(f"invalid face {face} for a {mesh.dim}-d mesh")
    minus = float(field_.values[tuple(k % mesh.n for k in face.index)])
    plus = float(field_.values[mesh.plus_cell(face.index, face.axis)])
    return plus - minus, 0.5 * (minus + plus), minus, plus


def fmt(x: float) -> str:
    """17 significant digits, enough for an exact round trip."""
    return format(float(x), ".17g")


def write_field_csv(field_: Field, stream: IO[str]) -> None:
    """One row per cell: axis indices, cell-centre coordinates, value."""
    mesh = field_.mesh
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"i{a}" for a in range(mesh.dim)]
                    + [f"x{a}" for a in range(mesh.dim)] + ["value"])
    for idx in np.ndindex(*mesh.shape):
        centre = [(k + 0.5) * mesh.h for k in idx]
        writer.writerow([*idx, *map(fmt, centre), fmt(field_.values[idx])])


def read_field_csv(stream: IO[str], *, time: float = 0.0) -> Field:
    rows = list(csv.reader(stream))
    header, body = rows[0], rows[1:]
    dim = sum(1 for c in header if c.startswith("i"))
    n = round(len(body) ** (1.0 / dim))
    mesh = Mesh(dim, n)
    values = np.empty(mesh.shape)
    for row in body:
        values[tuple(int(k) for k in row[:dim])] = float(row[-1])
    return Field(mesh, values, time)
