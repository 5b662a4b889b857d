"""Maximal operator, mollifier families and convolution on piecewise-constant data.

The centred maximal function of a piecewise-constant function is computed
exactly. For a midpoint ``x`` the ball average ``A(r)`` is ``I(r) / 2r`` with
``I`` linear in ``r`` between consecutive radii at which ``x - r`` or ``x + r``
crosses a cell edge, so ``A`` is monotone on each such interval and the
supremum is attained at one of those radii. On a uniform grid they are the
radii ``(k + 1/2) h``, where the average is a plain mean of ``2k + 1``
neighbouring cell values (cells beyond the window count as zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, GridMismatchError, HypothesisError
from .exponent import Exponent, Grid, check_same_grid, ess_bounds
from .gridfn import GridFunction
from .modular import luxemburg_rows


def maximal_rows(rows: np.ndarray) -> np.ndarray:
    """Exact centred maximal function of every row of a ``(R, cells)`` array."""
    a = np.abs(np.atleast_2d(np.asarray(rows, dtype=float)))
    r, n = a.shape
    prefix = np.zeros((r, n + 1))
    np.cumsum(a, axis=1, out=prefix[:, 1:])
    i = np.arange(n)
    out = a.copy()
    for k in range(1, n):
        right = np.minimum(i + k + 1, n)
        left = np.maximum(i - k, 0)
        avg = (prefix[:, right] - prefix[:, left]) / (2 * k + 1)
        np.maximum(out, avg, out=out)
    return out


def maximal_function(f: GridFunction) -> GridFunction:
    return GridFunction(f.grid, maximal_rows(f.values[None, :])[0])


def maximal_boundedness_estimate(p: Exponent, family: Iterable[GridFunction]) -> tuple[float, list[float]]:
    """Largest observed ratio ``||Mf||_p / ||f||_p`` over a test family."""
    family = list(family)
    if not family:
        raise ValueError("test family is empty")
    p.require_class_p()
    if not ess_bounds(p)[0] > 1:
        raise HypothesisError("maximal boundedness needs p_minus > 1")
    for k, f in enumerate(family):
        check_same_grid(f, p)
        if f.is_zero():
            raise ValueError(f"test function {k} is zero")
    rows = np.array([f.values for f in family])
    num = luxemburg_rows(maximal_rows(rows), p).value
    den = luxemburg_rows(rows, p).value
    ratios = [float(x) for x in num / den]
    return max(ratios), ratios


# -- mollifiers --------------------------------------------------------------


@dataclass(frozen=True)
class MollifierSpec:
    """A kernel sampled on a grid symmetric about the origin."""

    base: GridFunction

    def __post_init__(self):
        g = self.base.grid
        if not math.isclose(g.start, -g.end, rel_tol=0, abs_tol=1e-12 * g.length):
            raise DomainError(f"mollifier grid [{g.start}, {g.end}] is not symmetric about 0")

    @property
    def l1_norm(self) -> float:
        return float(self.base.grid.width * np.abs(self.base.values).sum())

    @property
    def integral(self) -> float:
        return self.base.integral()

    @property
    def is_approx_identity(self) -> bool:
        return abs(self.integral - 1.0) <= 1e-12

    @property
    def support_radius(self) -> float:
        """Smallest R with the kernel vanishing outside ``[-R, R]``."""
        nz = np.flatnonzero(self.base.values)
        if not nz.size:
            return 0.0
        edges = self.base.grid.edges
        return float(max(abs(edges[nz[0]]), abs(edges[nz[-1] + 1])))

    @property
    def radially_decreasing(self) -> bool:
        """Nonnegative, even, and nonincreasing in ``|x|``."""
        v = self.base.values
        if np.any(v < 0) or not np.allclose(v, v[::-1], rtol=0, atol=1e-14):
            return False
        half = v[v.size // 2:]
        return bool(np.all(np.diff(half) <= 1e-14))


def build_mollifier(desc: Mapping) -> MollifierSpec:
    """Kernel from a descriptor.

    ``box``: ``1/(2R)`` on ``(-R, R)``; ``triangle``: ``(1 - |x|/R)/R``;
    ``truncated-gaussian``: ``exp(-(x/width)^2)`` on ``[-R, R]`` rescaled to unit
    mass; ``samples``: explicit ``values`` on ``[-R, R]``. ``R`` is ``radius``
    (default 1); ``cells`` sets the reference resolution (default 64).
    """
    kind = desc.get("kind")
    radius = float(desc.get("radius", 1.0))
    if kind == "samples":
        values = np.asarray(desc["values"], dtype=float)
        grid = Grid(-radius, radius, values.size)
        return MollifierSpec(GridFunction(grid, values))
    cells = int(desc.get("cells", 64))
    if cells % 2:
        raise DomainError("mollifier reference grid needs an even cell count")
    grid = Grid(-radius, radius, cells)
    x = grid.midpoints
    if kind == "box":
        values = np.full(cells, 0.5 / radius)
    elif kind == "triangle":
        # midpoint sampling integrates each linear piece exactly
        values = (1 - np.abs(x) / radius) / radius
    elif kind == "truncated-gaussian":
        width = float(desc.get("width", 0.5 * radius))
        values = np.exp(-((x / width) ** 2))
        values = values / (grid.width * values.sum())
    else:
        raise ValueError(f"unknown mollifier kind {kind!r}")
    return MollifierSpec(GridFunction(grid, values))


def _cumulative(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    edges = f.grid.edges
    cum = np.concatenate([[0.0], np.cumsum(f.values) * f.grid.width])
    return edges, cum


def mollifier_scale(m: MollifierSpec, t: float, grid: Grid | None = None) -> GridFunction:
    """``phi_t(x) = phi(x/t)/t`` represented on ``grid`` (default: the kernel's own grid).

    Each target cell receives the exact average of ``phi_t`` over the cell.
    When ``t`` times the reference width is a multiple of the target width
    this is the value of ``phi_t`` at the target midpoint; in general it keeps
    the integral of ``phi_t`` equal to that of ``phi``.
    """
    if not t > 0:
        raise ValueError(f"scale t must be positive, got {t}")
    grid = grid or m.base.grid
    reach = t * m.support_radius
    slack = 1e-12 * grid.length
    if -reach < grid.start - slack or reach > grid.end + slack:
        raise DomainError(
            f"scaled support [-{reach}, {reach}] leaves the window [{grid.start}, {grid.end}]"
        )
    ref_edges, cum = _cumulative(m.base)
    prim = np.interp(grid.edges / t, ref_edges, cum)
    return GridFunction(grid, np.diff(prim) / grid.width)


def convolve(k: GridFunction, f: GridFunction) -> GridFunction:
    """Exact ``(k * f)`` at the midpoints of ``f``'s grid; ``f`` is zero outside its window.

    Both factors are piecewise constant, so the convolution is piecewise linear
    and its midpoint values follow from the primitive of ``f``.
    """
    hk, hf = k.grid.width, f.grid.width
    if not math.isclose(hk, hf, rel_tol=1e-12):
        raise GridMismatchError(f"cell widths differ: {hk} vs {hf}")
    x = f.grid.midpoints
    edges, cum = _cumulative(f)
    support = np.flatnonzero(k.values)
    left = k.grid.edges[support]
    weights = k.values[support]
    out = np.zeros(x.size)
    for s in range(0, support.size, 256):
        a = left[s:s + 256]
        upper = np.interp(x[:, None] - a[None, :], edges, cum)
        lower = np.interp(x[:, None] - a[None, :] - hk, edges, cum)
        out += (upper - lower) @ weights[s:s + 256]
    return GridFunction(f.grid, out)


def radial_majorant(m: MollifierSpec, absolute: bool = False) -> GridFunction:
    """``Phi(x) = sup_{|y| > |x|} phi(y)`` for the piecewise-constant kernel.

    A cell takes part in the sup for ``x`` when it contains points farther from
    the origin than ``|x|``; the kernel vanishes outside its window, so the sup
    is never negative. ``absolute=True`` uses ``|phi|`` instead.
    """
    grid = m.base.grid
    phi = np.abs(m.base.values) if absolute else m.base.values
    edges = grid.edges
    outer = np.maximum(np.abs(edges[:-1]), np.abs(edges[1:]))
    r = np.abs(grid.midpoints)
    reach = outer[None, :] > r[:, None]
    vals = np.where(reach, phi[None, :], 0.0).max(axis=1)
    return GridFunction(grid, np.maximum(vals, 0.0))
