"""Piecewise-constant functions and finite function sequences on a grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, GridMismatchError
from .exponent import Grid


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.cells,):
            raise ValueError(
                f"function has shape {values.shape}, grid has {self.grid.cells} cells"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.cells))

    def _other_values(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other_values(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other_values(other))

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return GridFunction(self.grid, self.values / scalar)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    def integral(self) -> float:
        return float(self.grid.width * self.values.sum())

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True, eq=False)
class FunctionSequence:
    """Finite sequence ``(f_1, ..., f_N)`` followed by an implicit zero tail."""

    grid: Grid
    members: tuple[GridFunction, ...] = ()

    def __post_init__(self):
        members = tuple(self.members)
        for k, m in enumerate(members):
            if m.grid != self.grid:
                raise GridMismatchError(f"member {k} lives on {m.grid}, sequence on {self.grid}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_array(cls, grid: Grid, array) -> "FunctionSequence":
        array = np.asarray(array, dtype=float).reshape(-1, grid.cells)
        return cls(grid, tuple(GridFunction(grid, row) for row in array))

    def __len__(self):
        return len(self.members)

    def __getitem__(self, k):
        return self.members[k]

    def __iter__(self):
        return iter(self.members)

    def as_array(self, length: int | None = None) -> np.ndarray:
        """Members stacked row-wise, zero-padded (or truncated) to ``length`` rows."""
        n = len(self) if length is None else length
        out = np.zeros((n, self.grid.cells))
        for k, m in enumerate(self.members[:n]):
            out[k] = m.values
        return out

    def _combine(self, other, op):
        if not isinstance(other, FunctionSequence):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")
        n = max(len(self), len(other))
        return FunctionSequence.from_array(self.grid, op(self.as_array(n), other.as_array(n)))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return FunctionSequence(self.grid, tuple(m * scalar for m in self.members))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FunctionSequence(self.grid, tuple(m / scalar for m in self.members))

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        if not isinstance(other, FunctionSequence):
            return NotImplemented
        if other.grid != self.grid:
            return False
        n = max(len(self), len(other))
        return np.array_equal(self.as_array(n), other.as_array(n))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.members)


def project(F: FunctionSequence, N: int) -> FunctionSequence:
    """Keep the first ``N`` members and drop the rest."""
    if N < 0:
        raise ValueError("projection index must be nonnegative")
    return FunctionSequence(F.grid, F.members[:N])


def pointwise_magnitude(F: FunctionSequence, N: int) -> GridFunction:
    """Cellwise Euclidean norm of ``(f_1(x), ..., f_N(x))``; missing members count as zero."""
    arr = F.as_array(max(N, 0))
    return GridFunction(F.grid, np.sqrt(np.sum(arr * arr, axis=0)))


# -- descriptors -----------------------------------------------------------


def _support(desc: Mapping, grid: Grid) -> tuple[float, float]:
    lo, hi = desc.get("support", (grid.start, grid.end))
    lo, hi = float(lo), float(hi)
    if lo > hi:
        raise DomainError(f"support ({lo}, {hi}) is reversed")
    if lo < grid.start or hi > grid.end:
        raise DomainError(f"support ({lo}, {hi}) leaves the grid window [{grid.start}, {grid.end}]")
    return lo, hi


def build_function(desc: Mapping, grid: Grid) -> GridFunction:
    """Sample a function descriptor at the cell midpoints.

    Recognised kinds (``desc["kind"]``):

    ``indicator``  ``a``, ``b``, optional ``height``; 1 on the open interval ``(a, b)``
    ``polynomial`` ``coeffs`` (ascending powers), optional ``support``
    ``gaussian``   ``center``, ``width``, optional ``support``, ``height``:
                   ``height * exp(-((x-center)/width)**2)``
    ``constant``   ``value``, optional ``support``
    ``samples``    ``values``, one per cell
    """
    kind = desc.get("kind")
    x = grid.midpoints
    scale = float(desc.get("height", 1.0))
    if kind == "indicator":
        a, b = float(desc["a"]), float(desc["b"])
        if not a < b:
            raise DomainError(f"indicator interval ({a}, {b}) is empty")
        if a < grid.start or b > grid.end:
            raise DomainError(f"indicator ({a}, {b}) leaves the grid window [{grid.start}, {grid.end}]")
        vals = scale * ((x > a) & (x < b))
    elif kind == "polynomial":
        lo, hi = _support(desc, grid)
        coeffs = [float(c) for c in desc["coeffs"]]
        vals = np.polynomial.polynomial.polyval(x, coeffs) * ((x >= lo) & (x <= hi))
    elif kind == "gaussian":
        lo, hi = _support(desc, grid)
        center, width = float(desc["center"]), float(desc["width"])
        if width <= 0:
            raise DomainError("gaussian width must be positive")
        vals = scale * np.exp(-(((x - center) / width) ** 2)) * ((x >= lo) & (x <= hi))
    elif kind == "constant":
        lo, hi = _support(desc, grid)
        vals = float(desc["value"]) * ((x >= lo) & (x <= hi))
    elif kind == "samples":
        vals = np.asarray(desc["values"], dtype=float)
        if vals.shape != (grid.cells,):
            raise DomainError(f"samples has {vals.size} values, grid has {grid.cells} cells")
    else:
        raise ValueError(f"unknown function descriptor kind {kind!r}")
    return GridFunction(grid, vals)


def build_sequence(descs: Iterable[Mapping], grid: Grid) -> FunctionSequence:
    return FunctionSequence(grid, tuple(build_function(d, grid) for d in descs))


def indicator(grid: Grid, a: float, b: float, height: float = 1.0) -> GridFunction:
    return build_function({"kind": "indicator", "a": a, "b": b, "height": height}, grid)


def jump_positions(F: FunctionSequence | Sequence[GridFunction]) -> np.ndarray:
    """Cell edges where some member jumps, including window edges with nonzero value."""
    members = list(F)
    if not members:
        return np.empty(0)
    grid = members[0].grid
    arr = np.array([m.values for m in members])
    padded = np.pad(arr, ((0, 0), (1, 1)))
    jumps = np.any(np.diff(padded, axis=1) != 0, axis=0)
    return grid.edges[jumps]


def distance_to(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest target (INF if there are none)."""
    if targets.size == 0:
        return np.full(points.shape, math.inf)
    return np.min(np.abs(points[:, None] - targets[None, :]), axis=1)
