"""The variable-exponent modular and the Luxemburg norm.

For piecewise-constant data the modular is a finite sum over cells plus a max
over the infinite-exponent cells, so it is evaluated exactly. The norm is the
level-1 crossing of a nonincreasing function of the scale, located by
bracketing and bisection. Everything is vectorised over rows so that many
norms sharing one exponent are solved together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SolverError
from .exponent import Exponent, check_same_grid
from .gridfn import GridFunction

DEFAULT_RTOL = 1e-10
MAX_ITER = 200
_MAX_BRACKET_STEPS = 2100


@dataclass(frozen=True)
class NormResult:
    value: float
    iterations: int
    residual: float
    bracket: tuple[float, float]

    def __float__(self):
        return self.value


def _power(a: np.ndarray, exps: np.ndarray) -> np.ndarray:
    # scalar exponent lets numpy use its fast paths (square, sqrt, ...)
    if exps.size and np.all(exps == exps[0]):
        return a ** exps[0]
    return a**exps


def modular_rows(rows: np.ndarray, p: Exponent, lam) -> np.ndarray:
    """Modular of each row of ``rows / lam``; ``lam`` is a scalar or one value per row."""
    rows = np.atleast_2d(rows)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), rows.shape[:1])
    a = np.abs(rows) / lam[:, None]
    fin = p.finite_mask
    out = np.zeros(rows.shape[0])
    with np.errstate(over="ignore"):
        if fin.any():
            out += p.grid.width * _power(a[:, fin], p.values[fin]).sum(axis=1)
        if not fin.all():
            out += a[:, ~fin].max(axis=1)
    return out


def modular_value(f: GridFunction, p: Exponent, lam: float = 1.0) -> float:
    """Modular of ``f / lam`` for exponent ``p`` (may be ``inf``)."""
    check_same_grid(f, p)
    if not lam > 0:
        raise ValueError(f"scale must be positive, got {lam}")
    return float(modular_rows(f.values[None, :], p, lam)[0])


@dataclass
class LevelSolution:
    value: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def bisect_level(
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray],
    start: np.ndarray,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = MAX_ITER,
    check_residual: bool = True,
) -> LevelSolution:
    """Row-wise ``inf{s > 0 : evaluate(s) <= 1}`` for nonincreasing ``evaluate``.

    ``evaluate(s, idx)`` returns the function values of rows ``idx`` at scales
    ``s``. Each row must actually cross level 1: the function exceeds 1 for
    small scales and drops to at most 1 for large ones. The bracket is grown
    geometrically from ``start`` until it straddles the crossing and then
    bisected until its relative width is below ``rtol`` and, with
    ``check_residual``, also ``1 - evaluate(hi) <= rtol``.
    """
    start = np.asarray(start, dtype=float)
    n = start.size
    idx_all = np.arange(n)
    lo = np.empty(n)
    hi = np.empty(n)
    v_hi = np.empty(n)
    iters = np.zeros(n, dtype=int)

    v0 = evaluate(start, idx_all)
    feas = v0 <= 1
    # infeasible start: double until feasible
    lo[~feas] = start[~feas]
    hi[~feas] = 2 * start[~feas]
    hi[feas] = start[feas]
    v_hi[feas] = v0[feas]
    lo[feas] = start[feas] / 2

    pending = np.flatnonzero(~feas)
    steps = 0
    while pending.size:
        v = evaluate(hi[pending], pending)
        iters[pending] += 1
        ok = v <= 1
        v_hi[pending[ok]] = v[ok]
        grow = pending[~ok]
        lo[grow] = hi[grow]
        with np.errstate(over="ignore"):
            hi[grow] *= 2
        pending = grow
        steps += 1
        if steps > _MAX_BRACKET_STEPS or not np.all(np.isfinite(hi[grow])):
            raise SolverError("could not bracket the level crossing from above",
                              bracket=(float(lo[grow][0]), float(hi[grow][0])))

    pending = np.flatnonzero(feas)
    steps = 0
    while pending.size:
        v = evaluate(lo[pending], pending)
        iters[pending] += 1
        still = v <= 1
        shrink = pending[still]
        hi[shrink] = lo[shrink]
        v_hi[shrink] = v[still]
        lo[shrink] /= 2
        pending = shrink
        steps += 1
        if steps > _MAX_BRACKET_STEPS or np.any(lo[shrink] == 0):
            raise SolverError("could not bracket the level crossing from below",
                              bracket=(float(lo[shrink][0]), float(hi[shrink][0])))

    def converged(rows):
        done = hi[rows] - lo[rows] <= rtol * hi[rows]
        if check_residual:
            done &= 1 - v_hi[rows] <= rtol
        return done

    active = idx_all[~converged(idx_all)]
    for _ in range(max_iter):
        if not active.size:
            break
        mid = 0.5 * (lo[active] + hi[active])
        stalled = (mid <= lo[active]) | (mid >= hi[active])
        v = evaluate(mid, active)
        iters[active] += 1
        below = v <= 1
        hi[active[below]] = mid[below]
        v_hi[active[below]] = v[below]
        lo[active[~below]] = mid[~below]
        active = active[~converged(active) & ~stalled]
    else:
        if active.size:
            k = int(active[0])
            raise SolverError(
                f"bisection did not converge within {max_iter} iterations",
                bracket=(float(lo[k]), float(hi[k])),
                iterations=int(iters[k]),
            )
    return LevelSolution(hi.copy(), iters, np.abs(1 - v_hi), lo, hi)


def luxemburg_rows(rows: np.ndarray, p: Exponent, rtol: float = DEFAULT_RTOL,
                   max_iter: int = MAX_ITER) -> LevelSolution:
    """Luxemburg norm of every row of ``rows``; zero rows get norm 0."""
    rows = np.abs(np.atleast_2d(np.asarray(rows, dtype=float)))
    n = rows.shape[0]
    scale = rows.max(axis=1) if rows.shape[1] else np.zeros(n)
    nz = np.flatnonzero(scale > 0)
    value = np.zeros(n)
    iters = np.zeros(n, dtype=int)
    residual = np.zeros(n)
    lo = np.zeros(n)
    hi = np.zeros(n)
    if nz.size:
        sub = rows[nz]
        res = bisect_level(lambda s, idx: modular_rows(sub[idx], p, s), scale[nz], rtol, max_iter)
        value[nz], iters[nz], residual[nz] = res.value, res.iterations, res.residual
        lo[nz], hi[nz] = res.lo, res.hi
    return LevelSolution(value, iters, residual, lo, hi)


def luxemburg_norm(f: GridFunction, p: Exponent, rtol: float = DEFAULT_RTOL,
                   max_iter: int = MAX_ITER) -> NormResult:
    """``inf{lam > 0 : modular(f/lam) <= 1}``."""
    check_same_grid(f, p)
    res = luxemburg_rows(f.values[None, :], p, rtol, max_iter)
    return NormResult(
        value=float(res.value[0]),
        iterations=int(res.iterations[0]),
        residual=float(res.residual[0]),
        bracket=(float(res.lo[0]), float(res.hi[0])),
    )


def lp_norm(f: GridFunction, p: float) -> float:
    """Constant-exponent norm ``(sum w |f|^p)^(1/p)``; ``p = inf`` gives the max."""
    if math.isinf(p):
        return float(np.max(np.abs(f.values)))
    return float((f.grid.width * np.sum(np.abs(f.values) ** p)) ** (1.0 / p))
