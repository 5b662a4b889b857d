"""Mixed Lebesgue-sequence spaces l^{q(.)}(L^{p(.)}).

Two evaluations of the mixed modular are provided:

* the nested-infimum form, summing over members
  ``inf{lam > 0 : rho_p(f_nu * lam^(-1/q)) <= 1}`` with ``lam^(1/INF) = 1``;
* the closed form ``sum_nu || |f_nu|^q ||_{p/q}``, valid when ``q`` is finite.

For exponents ``p`` with infinite cells the two forms differ on those cells
(the sup term scales as ``lam^(-1/q)`` in one and ``lam^(-1)`` in the other);
they agree whenever ``p`` is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .exponent import Exponent, Grid, NormConditions, check_same_grid, norm_condition_classify, quotient
from .gridfn import FunctionSequence
from .modular import (
    DEFAULT_RTOL,
    MAX_ITER,
    LevelSolution,
    NormResult,
    bisect_level,
    luxemburg_rows,
    modular_rows,
)

INF = math.inf


@dataclass(frozen=True)
class MixedSpaceSpec:
    p: Exponent
    q: Exponent
    flags: NormConditions | None = field(init=False, default=None)

    def __post_init__(self):
        check_same_grid(self.p, self.q)
        if self.p.in_class_p and self.q.in_class_p:
            object.__setattr__(self, "flags", norm_condition_classify(self.p, self.q))

    @property
    def grid(self) -> Grid:
        return self.p.grid

    @property
    def q_finite(self) -> bool:
        return not bool(np.any(self.q.inf_mask))

    @property
    def is_norm(self) -> bool:
        return bool(self.flags and self.flags.is_norm)


def _inner_rtol(rtol: float) -> float:
    return max(rtol * 1e-2, 4e-16)


def inner_inf_form(rows: np.ndarray, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Per-row ``inf{lam : rho_p(row * lam^(-1/q)) <= 1}``, INF when nothing is feasible."""
    rows = np.abs(np.atleast_2d(rows))
    qfin = spec.q.finite_mask
    inv_q = np.where(qfin, 1.0 / np.where(qfin, spec.q.values, 1.0), 0.0)
    p = spec.p

    # as lam -> inf only the q = INF cells survive
    limit = modular_rows(rows * ~qfin, p, 1.0)
    moving = np.any(rows[:, qfin] != 0, axis=1)
    out = np.where(limit <= 1, 0.0, INF)
    out[moving & (limit >= 1)] = INF

    solve = np.flatnonzero(moving & (limit < 1))
    if solve.size:
        sub = rows[solve]

        def evaluate(lam, idx):
            return modular_rows(sub[idx] * lam[:, None] ** -inv_q, p, 1.0)

        out[solve] = bisect_level(evaluate, np.ones(solve.size), rtol).value
    return out


def inner_closed_form(rows: np.ndarray, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Per-row ``|| |row|^q ||_{p/q}``."""
    if not spec.q_finite:
        raise PreconditionError("closed-form mixed modular requires q to be finite everywhere")
    r = quotient(spec.p, spec.q)
    powered = np.abs(np.atleast_2d(rows)) ** spec.q.values
    return luxemburg_rows(powered, r, rtol).value


def _check(F: FunctionSequence, spec: MixedSpaceSpec) -> None:
    if F.grid != spec.grid:
        check_same_grid(F, spec.p)


def mixed_modular_inf(F: FunctionSequence, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> float:
    """Nested-infimum mixed modular; INF if some member has an empty feasible set."""
    _check(F, spec)
    if not len(F):
        return 0.0
    return float(np.sum(inner_inf_form(F.as_array(), spec, rtol)))


def mixed_modular_closed(F: FunctionSequence, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> float:
    """Closed-form mixed modular ``sum_nu || |f_nu|^q ||_{p/q}`` (requires finite q)."""
    _check(F, spec)
    if not spec.q_finite:
        raise PreconditionError("closed-form mixed modular requires q to be finite everywhere")
    if not len(F):
        return 0.0
    return float(np.sum(inner_closed_form(F.as_array(), spec, rtol)))


def mixed_modular(F: FunctionSequence, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> float:
    if spec.q_finite:
        return mixed_modular_closed(F, spec, rtol)
    return mixed_modular_inf(F, spec, rtol)


def mixed_norms(arrays: np.ndarray, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL,
                max_iter: int = MAX_ITER):
    """Mixed norms of a stack of sequences, shape ``(samples, members, cells)``.

    Returns the bisection record (``value``, ``iterations``, ``residual``,
    ``lo``, ``hi``), one entry per sample. Zero sequences get norm 0.
    """
    arrays = np.abs(np.asarray(arrays, dtype=float))
    if arrays.ndim == 2:
        arrays = arrays[None]
    s, m, n = arrays.shape
    inner = inner_closed_form if spec.q_finite else inner_inf_form
    inner_rtol = _inner_rtol(rtol)
    scale = arrays.reshape(s, -1).max(axis=1) if m * n else np.zeros(s)
    nz = np.flatnonzero(scale > 0)

    value = np.zeros(s)
    iters = np.zeros(s, dtype=int)
    residual = np.zeros(s)
    lo = np.zeros(s)
    hi = np.zeros(s)
    if nz.size:
        sub = arrays[nz]

        def evaluate(mu, idx):
            rows = (sub[idx] / mu[:, None, None]).reshape(-1, n)
            return inner(rows, spec, inner_rtol).reshape(idx.size, m).sum(axis=1)

        # with INF cells in q the modular of F/mu is a step function near the
        # crossing, so only the bracket width is meaningful
        res = bisect_level(evaluate, scale[nz], rtol, max_iter, check_residual=spec.q_finite)
        value[nz], iters[nz], residual[nz], lo[nz], hi[nz] = (
            res.value, res.iterations, res.residual, res.lo, res.hi)
    return LevelSolution(value, iters, residual, lo, hi)


def mixed_norm(F: FunctionSequence, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL,
               max_iter: int = MAX_ITER) -> NormResult:
    """``inf{mu > 0 : mixed_modular(F/mu) <= 1}``."""
    _check(F, spec)
    if not len(F) or F.is_zero():
        return NormResult(0.0, 0, 0.0, (0.0, 0.0))
    res = mixed_norms(F.as_array()[None], spec, rtol, max_iter)
    return NormResult(float(res.value[0]), int(res.iterations[0]), float(res.residual[0]),
                      (float(res.lo[0]), float(res.hi[0])))


def kothe_pairing(dual: FunctionSequence, F: FunctionSequence, N: int) -> float:
    """``sum_{nu <= N} integral f'_nu g_nu``."""
    if dual.grid != F.grid:
        check_same_grid(dual, F)
    a = dual.as_array(N)
    b = F.as_array(N)
    return float(F.grid.width * np.sum(a * b))
