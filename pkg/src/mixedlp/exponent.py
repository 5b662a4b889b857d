"""Variable exponents on a uniform one-dimensional grid.

An exponent is piecewise constant on the cells of a :class:`Grid`. The value
``INF`` (``math.inf``) marks cells belonging to the infinite-exponent region;
it is treated as a distinct value everywhere, never approximated by a large
finite number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import EstimateUndefinedError, ExponentClassError, GridMismatchError

INF = math.inf


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[start, end]`` into ``cells`` cells."""

    start: float
    end: float
    cells: int

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"grid end {self.end} must exceed start {self.start}")
        if int(self.cells) != self.cells or self.cells < 1:
            raise ValueError(f"cell count must be a positive integer, got {self.cells}")
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def width(self) -> float:
        return (self.end - self.start) / self.cells

    @property
    def edges(self) -> np.ndarray:
        return self.start + self.width * np.arange(self.cells + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.start + self.width * (np.arange(self.cells) + 0.5)

    @property
    def length(self) -> float:
        return self.end - self.start

    def refine(self, cells: int) -> "Grid":
        return Grid(self.start, self.end, cells)


def check_same_grid(*objects) -> Grid:
    grid = objects[0].grid
    for obj in objects[1:]:
        if obj.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {obj.grid}")
    return grid


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Exponent:
    """A piecewise-constant exponent p(.) with values in ``(0, INF]``."""

    grid: Grid
    values: np.ndarray
    # set by conjugate() so that conjugating twice returns the original object
    dual: "Exponent | None" = field(default=None, repr=False)

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.cells,):
            raise ValueError(
                f"exponent has {values.size} values for a grid of {self.grid.cells} cells"
            )
        bad = np.flatnonzero(~(values > 0))
        if bad.size:
            i = int(bad[0])
            raise ExponentClassError(
                f"exponent value at cell {i} is {values[i]}; values must be positive"
            )
        object.__setattr__(self, "values", values)

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Exponent":
        return cls(grid, np.full(grid.cells, float(value)))

    @classmethod
    def piecewise(cls, grid: Grid, breakpoints: Sequence[float], values: Sequence[float]) -> "Exponent":
        """Value ``values[k]`` on ``[breakpoints[k-1], breakpoints[k])``, sampled at midpoints."""
        if len(values) != len(breakpoints) + 1:
            raise ValueError("piecewise exponent needs one more value than breakpoints")
        if list(breakpoints) != sorted(breakpoints):
            raise ValueError("breakpoints must be sorted")
        idx = np.searchsorted(np.asarray(breakpoints, dtype=float), grid.midpoints, side="right")
        return cls(grid, np.asarray(values, dtype=float)[idx])

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Exponent":
        return cls(grid, np.broadcast_to(fn(grid.midpoints), (grid.cells,)))

    @classmethod
    def log_perturbation(cls, grid: Grid, p_inf: float, amplitude: float) -> "Exponent":
        """p(x) = p_inf + amplitude / log(e + |x|)."""
        return cls.from_function(grid, lambda x: p_inf + amplitude / np.log(np.e + np.abs(x)))

    # -- structure --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Exponent):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def inf_mask(self) -> np.ndarray:
        """Cells of the infinite-exponent region."""
        return np.isinf(self.values)

    @property
    def finite_mask(self) -> np.ndarray:
        return ~self.inf_mask

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    @property
    def in_class_p(self) -> bool:
        return bool(np.all(self.values >= 1))

    def require_class_p(self, name: str = "p") -> None:
        bad = np.flatnonzero(self.values < 1)
        if bad.size:
            i = int(bad[0])
            raise ExponentClassError(
                f"{name}: value {self.values[i]} at cell {i} is below 1 (class P requires >= 1)"
            )

    def restricted_to_finite(self) -> np.ndarray:
        return self.values[self.finite_mask]


def ess_bounds(p: Exponent) -> tuple[float, float]:
    """Return ``(p_minus, p_plus)``; ``p_plus`` is ``INF`` if any cell is infinite."""
    return float(p.values.min()), float(p.values.max())


class LogHolderEstimate(NamedTuple):
    c0_hat: float
    c_inf_hat: float
    p_inf_hat: float
    lh0: bool
    lh_inf: bool
    excluded_cells: int


def log_holder_estimate(p: Exponent, p_inf: float | None = None) -> LogHolderEstimate:
    """Empirical log-Hoelder constants of ``p`` over midpoint pairs.

    ``c0_hat`` is the sup of ``|p(x)-p(y)| * (-log|x-y|)`` over midpoints with
    ``|x-y| < 1/2``; ``c_inf_hat`` is the sup of ``|p(x)-p_inf| * log(e+|x|)``.
    When ``p_inf`` is not given, the value at the midpoint farthest from the
    origin stands in for the limit at infinity.

    Both suprema are finite on any fixed grid; failure of the condition shows
    up as growth of ``c0_hat`` under refinement. Infinite cells are excluded
    and counted in ``excluded_cells``.
    """
    grid = p.grid
    if grid.cells < 2:
        raise EstimateUndefinedError("log-Hoelder estimate needs at least two cells")
    keep = p.finite_mask
    x = grid.midpoints
    vals = np.where(keep, p.values, np.nan)
    h = grid.width

    c0 = 0.0
    max_offset = int(math.ceil(0.5 / h))
    for k in range(1, min(max_offset, grid.cells - 1) + 1):
        dist = k * h
        if not dist < 0.5:
            break
        diff = np.abs(vals[k:] - vals[:-k])
        if np.any(np.isfinite(diff)):
            c0 = max(c0, float(np.nanmax(diff)) * -math.log(dist))

    finite_x = x[keep]
    finite_p = p.values[keep]
    if finite_p.size == 0:
        raise EstimateUndefinedError("exponent has no finite cells")
    if p_inf is None:
        p_inf = float(finite_p[np.argmax(np.abs(finite_x))])
    c_inf = float(np.max(np.abs(finite_p - p_inf) * np.log(np.e + np.abs(finite_x))))
    return LogHolderEstimate(
        c0_hat=c0,
        c_inf_hat=c_inf,
        p_inf_hat=float(p_inf),
        lh0=math.isfinite(c0),
        lh_inf=math.isfinite(c_inf),
        excluded_cells=int(np.count_nonzero(~keep)),
    )


def conjugate(p: Exponent) -> Exponent:
    """Pointwise conjugate exponent, with 1 <-> INF."""
    if p.dual is not None:
        return p.dual
    p.require_class_p()
    v = p.values
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v == 1, INF, np.where(np.isinf(v), 1.0, v / (v - 1.0)))
    return Exponent(p.grid, out, dual=p)


def quotient(p: Exponent, q: Exponent, require_class_p: bool = False) -> Exponent:
    """Pointwise ratio ``p/q`` (INF/finite = INF). ``q`` must be finite."""
    check_same_grid(p, q)
    if np.any(q.inf_mask):
        raise ExponentClassError("quotient: q must be finite on every cell")
    r = Exponent(p.grid, p.values / q.values)
    if require_class_p:
        r.require_class_p("p/q")
    return r


class NormConditions(NamedTuple):
    cond1: bool  # q <= p everywhere
    cond2: bool  # q constant and >= 1
    cond3: bool  # 1/p + 1/q <= 1 everywhere
    is_norm: bool


def norm_condition_classify(p: Exponent, q: Exponent, tol: float = 1e-12) -> NormConditions:
    """Which of the three sufficient conditions for the mixed quasi-norm to be a norm hold."""
    check_same_grid(p, q)
    p.require_class_p("p")
    q.require_class_p("q")
    cond1 = bool(np.all(q.values <= p.values))
    cond2 = q.is_constant
    cond3 = bool(np.all(1.0 / p.values + 1.0 / q.values <= 1.0 + tol))
    return NormConditions(cond1, cond2, cond3, cond1 or cond2 or cond3)
