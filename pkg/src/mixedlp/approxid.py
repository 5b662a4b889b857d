"""The space V of powered sequences and approximate-identity experiments.

An element of V is a sequence ``g_nu = f_nu^q`` of powers of nonnegative
functions, normed by ``sum_nu ||g_nu||_{p/q}``. The checks here compare
mollified sequences against sums of maximal functions, test the weak-type
distribution bound, and measure pointwise convergence of ``phi_t * g`` away
from jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, HypothesisError
from .exponent import INF, ess_bounds, log_holder_estimate, quotient
from .gridfn import FunctionSequence, GridFunction, distance_to, jump_positions
from .mixed import MixedSpaceSpec
from .modular import DEFAULT_RTOL, luxemburg_rows
from .operators import (
    MollifierSpec,
    convolve,
    maximal_boundedness_estimate,
    maximal_rows,
    mollifier_scale,
)
from .report import ProbeReport

SLACK = 1e-8


def _require_finite(spec: MixedSpaceSpec) -> None:
    if not (ess_bounds(spec.p)[1] < INF and ess_bounds(spec.q)[1] < INF):
        raise HypothesisError("the space V needs p_plus < inf and q_plus < inf")


@dataclass(frozen=True)
class VElement:
    """Base sequence ``f >= 0`` together with its powers ``g = f^q``."""

    base: FunctionSequence
    spec: MixedSpaceSpec
    powered: FunctionSequence = field(init=False)
    v_norm: float = field(init=False)

    def __post_init__(self):
        _require_finite(self.spec)
        arr = self.base.as_array()
        if np.any(arr < 0):
            raise DomainError("base sequence of a V element must be nonnegative")
        g = arr ** self.spec.q.values if arr.size else arr
        object.__setattr__(self, "powered", FunctionSequence.from_array(self.base.grid, g))
        object.__setattr__(self, "v_norm", _v_norm_rows(g, self.spec))

    @classmethod
    def from_powered(cls, powered: FunctionSequence, spec: MixedSpaceSpec) -> "VElement":
        arr = powered.as_array()
        if np.any(arr < 0):
            raise DomainError("powered sequence must be nonnegative")
        return cls(FunctionSequence.from_array(powered.grid, arr ** (1.0 / spec.q.values)), spec)

    def scaled(self, c: float) -> "VElement":
        """The element whose powered sequence is ``c * g``."""
        return VElement.from_powered(self.powered * c, self.spec)


def _v_norm_rows(g: np.ndarray, spec: MixedSpaceSpec, rtol: float = DEFAULT_RTOL) -> float:
    if not g.size:
        return 0.0
    return float(luxemburg_rows(g, quotient(spec.p, spec.q), rtol).value.sum())


def v_norm(g: VElement, spec: MixedSpaceSpec | None = None, rtol: float = DEFAULT_RTOL) -> float:
    """``sum_nu ||g_nu||_{p/q}``."""
    spec = spec or g.spec
    _require_finite(spec)
    return _v_norm_rows(g.powered.as_array(), spec, rtol)


def _mollified(rows: np.ndarray, grid, m: MollifierSpec, t: float) -> np.ndarray:
    phi = mollifier_scale(m, t, grid)
    return np.array([convolve(phi, GridFunction(grid, r)).values for r in rows])


def maximal_sum_bound_check(g: VElement, m: MollifierSpec, t_grid: Iterable[float],
                            slack: float = SLACK) -> ProbeReport:
    """Pointwise ``|(phi_t * g_nu)_nu|_2 <= ||phi||_1 sum_nu M g_nu`` for each ``t``.

    The sup over ``t`` is bounded iff every ``t`` is, so rows are per ``t``
    with the worst midpoint recorded.
    """
    grid = g.base.grid
    rows = g.powered.as_array()
    ts = sorted((float(t) for t in t_grid), reverse=True)
    decreasing = m.radially_decreasing
    report = ProbeReport("maximal-sum-bound", {"t_grid": ts, "slack": slack,
                                               "kernel_l1": m.l1_norm,
                                               "radially_decreasing": decreasing})
    rhs = m.l1_norm * maximal_rows(rows).sum(axis=0) if rows.size else np.zeros(grid.cells)
    sup = np.zeros(grid.cells)
    x = grid.midpoints
    for t in ts:
        if rows.size:
            lhs = np.sqrt(np.sum(_mollified(rows, grid, m, t) ** 2, axis=0))
        else:
            lhs = np.zeros(grid.cells)
        np.maximum(sup, lhs, out=sup)
        gap = rhs - lhs
        k = int(np.argmin(gap))
        violations = int(np.count_nonzero(lhs > rhs + slack))
        report.add(violations == 0, t=t, worst_x=float(x[k]), lhs=float(lhs[k]), rhs=float(rhs[k]),
                   min_slack=float(gap[k]), violations=violations)
    report.summary.update(
        min_slack=float(np.min(rhs - sup)),
        violations=int(np.count_nonzero(sup > rhs + slack)),
        hypothesis_ok=bool(decreasing and np.all(m.base.values >= 0)),
    )
    return report


def weak_type_check(g: VElement, spec: MixedSpaceSpec, lambdas: Iterable[float],
                    c_hat: float | None = None, slack: float = SLACK) -> ProbeReport:
    """``|{sum_nu M g_nu > lam}| <= c^r ||g||_V / lam^r`` with ``r = (p/q)_plus``.

    ``c_hat`` defaults to the empirical maximal-operator ratio over the members
    of ``g``. ``g`` is rescaled to unit V-norm when larger. Rows with
    ``lam >= 1`` are reported without a verdict.
    """
    r_exp = quotient(spec.p, spec.q)
    r_lo, r_hi = ess_bounds(r_exp)
    if not r_lo > 1:
        raise HypothesisError(f"weak-type bound needs (p/q)_minus > 1, got {r_lo}")
    lh = log_holder_estimate(r_exp) if r_exp.grid.cells >= 2 else None
    rows = g.powered.as_array()
    norm = _v_norm_rows(rows, spec)
    scale = 1.0 / norm if norm > 1 else 1.0
    rows = rows * scale
    norm *= scale
    members = [GridFunction(g.base.grid, r) for r in rows if np.any(r)]
    if c_hat is None:
        c_hat = maximal_boundedness_estimate(r_exp, members)[0] if members else 1.0
    total = maximal_rows(rows).sum(axis=0) if rows.size else np.zeros(g.base.grid.cells)
    h = g.base.grid.width

    report = ProbeReport("weak-type", {
        "lambdas": sorted(float(x) for x in lambdas), "c_hat": c_hat, "r_plus": r_hi,
        "r_minus": r_lo, "rescale": scale, "slack": slack,
        "log_holder": None if lh is None else {"c0_hat": lh.c0_hat, "c_inf_hat": lh.c_inf_hat},
    })
    for lam in report.parameters["lambdas"]:
        if not lam > 0:
            raise ValueError("lambda must be positive")
        lhs = float(h * np.count_nonzero(total > lam))
        rhs = float(c_hat**r_hi * norm / lam**r_hi)
        verdict = lhs <= rhs + slack if lam < 1 else None
        report.add(verdict, lam=lam, measure=lhs, bound=rhs, margin=rhs - lhs)
    judged = [r for r in report.rows if r["pass"] is not None]
    report.summary.update(v_norm=norm, min_margin=min((r["margin"] for r in judged), default=None))
    return report


def approx_identity_probe(g: VElement, m: MollifierSpec, t_seq: Iterable[float], eta: float,
                          margin: float, cell_multiple: float = 4.0,
                          max_error_tol: float = 1e-6) -> ProbeReport:
    """Exceedance ``|{x away from jumps : |phi_t * g - g|_2(x) > eta}|`` along ``t_seq``.

    Points within ``margin`` of a jump of any member (window edges included
    when the member is nonzero there) are excluded. Along decreasing ``t`` the
    exceedance may grow by at most one cell and the max error by at most
    ``max_error_tol``; once ``t <= cell_multiple * h`` the exceedance must be 0.
    """
    if not m.is_approx_identity:
        raise HypothesisError("mollifier must have unit integral")
    if not eta > 0 or not margin >= 0:
        raise ValueError("eta must be positive and margin nonnegative")
    grid = g.base.grid
    h = grid.width
    rows = g.powered.as_array()
    ts = sorted((float(t) for t in t_seq), reverse=True)
    jumps = jump_positions(g.powered) if rows.size else np.zeros(0)
    region = distance_to(grid.midpoints, jumps) >= margin if jumps.size else np.ones(grid.cells, bool)

    report = ProbeReport("probe-approxid", {
        "t_seq": ts, "eta": eta, "margin": margin, "cell_width": h,
        "cell_multiple": cell_multiple, "jumps": jumps, "max_error_tol": max_error_tol,
    })
    prev_measure = prev_err = None
    for t in ts:
        if rows.size:
            err = np.sqrt(np.sum((_mollified(rows, grid, m, t) - rows) ** 2, axis=0))
        else:
            err = np.zeros(grid.cells)
        err = err[region]
        measure = float(h * np.count_nonzero(err > eta))
        max_err = float(err.max()) if err.size else 0.0
        measure_ok = prev_measure is None or measure <= prev_measure + h * (1 + 1e-9)
        err_ok = prev_err is None or max_err <= prev_err + max_error_tol
        fine_ok = t > cell_multiple * h * (1 + 1e-12) or measure == 0
        report.add(measure_ok and err_ok and fine_ok, t=t, exceedance=measure, max_error=max_err,
                   measure_monotone=bool(measure_ok), error_monotone=bool(err_ok),
                   zero_required=bool(t <= cell_multiple * h * (1 + 1e-12)))
        prev_measure, prev_err = measure, max_err

    # t0: largest t from which the exceedance stays 0 for every smaller tested t
    t0 = None
    for row in reversed(report.rows):
        if row["exceedance"] != 0:
            break
        t0 = row["t"]
    report.summary.update(
        t0=t0,
        excluded_measure=float(h * np.count_nonzero(~region)),
        excluded_bound=float(2 * margin * jumps.size),
    )
    return report
