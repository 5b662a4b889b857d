"""Numerical probes of convexity, smoothness and norm-to-measure convergence.

Sampled quantities are one-sided: ``delta_hat`` only ever bounds the modulus of
convexity from above. Spaces that fail uniform convexity are certified by
explicit witness pairs rather than by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, HypothesisError
from .exponent import INF, Exponent, ess_bounds
from .gridfn import FunctionSequence, indicator, pointwise_magnitude
from .mixed import MixedSpaceSpec, mixed_norms
from .report import ProbeReport
from .sampling import random_function_array

SLACK = 1e-8
MONOTONE_TOL = 1e-9
PROBE_RTOL = 1e-13
STRICT_SEPARATION = 0.1


def _norms(arrays: np.ndarray, spec: MixedSpaceSpec, rtol: float) -> np.ndarray:
    return mixed_norms(arrays, spec, rtol).value


def _stack(seqs: Sequence[FunctionSequence], length: int | None = None) -> np.ndarray:
    length = length if length is not None else max((len(s) for s in seqs), default=0)
    return np.array([s.as_array(length) for s in seqs])


def _strictly_convex_regime(spec: MixedSpaceSpec) -> bool:
    (p_lo, p_hi), (q_lo, q_hi) = ess_bounds(spec.p), ess_bounds(spec.q)
    return 1 < p_lo and p_hi < INF and 1 < q_lo and q_hi < INF


# -- convexity -----------------------------------------------------------------


@dataclass(frozen=True)
class UnitPairs:
    """Unit-norm pairs ``(f_k, g_k)`` as arrays of shape ``(pairs, members, cells)``."""

    f: np.ndarray
    g: np.ndarray
    separation: np.ndarray
    midpoint: np.ndarray
    labels: tuple[str, ...]


def _unit_pairs(f: np.ndarray, g: np.ndarray, spec: MixedSpaceSpec, rtol: float,
                labels: Sequence[str]) -> UnitPairs:
    nf = _norms(f, spec, rtol)
    ng = _norms(g, spec, rtol)
    if np.any(nf == 0) or np.any(ng == 0):
        raise DomainError("cannot normalize a zero sequence")
    f = f / nf[:, None, None]
    g = g / ng[:, None, None]
    sep = _norms(f - g, spec, rtol)
    mid = _norms(0.5 * (f + g), spec, rtol)
    return UnitPairs(f, g, sep, mid, tuple(labels))


def sample_unit_pairs(spec: MixedSpaceSpec, samples: int, seed: int, members: tuple[int, int] = (1, 4),
                      rtol: float = PROBE_RTOL) -> UnitPairs:
    """Random unit pairs spread evenly over separations.

    Pair ``k`` lies on the great circle through random ``f`` and a random
    direction ``h`` made Euclidean-orthogonal to ``f``, at angle
    ``pi (k + U) / samples``; both points are then divided by their mixed norm.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    grid = spec.grid
    width = members[1]
    f = np.zeros((samples, width, grid.cells))
    h = np.zeros_like(f)
    for k in range(samples):
        m = int(rng.integers(members[0], members[1] + 1))
        f[k, :m] = random_function_array(grid, rng, m)
        h[k, :m] = random_function_array(grid, rng, m)
    theta = math.pi * (np.arange(samples) + rng.uniform(size=samples)) / samples

    def unit(a):
        n = np.sqrt(np.einsum("kij,kij->k", a, a))
        return a / np.where(n > 0, n, 1.0)[:, None, None]

    f = unit(f)
    h = h - np.einsum("kij,kij->k", h, f)[:, None, None] * f
    h = unit(h)
    g = np.cos(theta)[:, None, None] * f + np.sin(theta)[:, None, None] * h
    return _unit_pairs(f, g, spec, rtol, [f"sample-{k}" for k in range(samples)])


def witness_pair(case: str, grid, N: int) -> tuple[FunctionSequence, FunctionSequence]:
    """Pairs built from the indicator of (0, 1) that defeat uniform convexity.

    ``"linf"``: ``f = (chi, chi, ...)``, ``g = (0, chi, 0, chi, ...)``.
    ``"l1"``: ``f = (chi, 0, ...)``, ``g = (0, chi, 0, ...)``. Both truncated at ``N``.
    """
    if N < 2:
        raise ValueError("truncation N must be >= 2")
    chi = indicator(grid, 0.0, 1.0).values
    zero = np.zeros_like(chi)
    if case == "linf":
        f = [chi] * N
        g = [chi if k % 2 else zero for k in range(N)]
    elif case == "l1":
        f = [chi] + [zero] * (N - 1)
        g = [zero, chi] + [zero] * (N - 2)
    else:
        raise ValueError(f"unknown witness case {case!r}")
    return FunctionSequence.from_array(grid, np.array(f)), FunctionSequence.from_array(grid, np.array(g))


def convexity_modulus_probe(spec: MixedSpaceSpec, epsilon: float, samples: int, seed: int,
                            witnesses: Iterable[tuple[str, FunctionSequence, FunctionSequence]] = (),
                            pairs: UnitPairs | None = None, members: tuple[int, int] = (1, 4),
                            rtol: float = PROBE_RTOL, slack: float = SLACK) -> tuple[float, ProbeReport]:
    """Sampled upper bound ``1 - max ||(f+g)/2||`` over unit pairs with ``||f-g|| >= epsilon``.

    ``pairs`` reuses a previous draw (for sweeping ``epsilon``); ``witnesses``
    are ``(label, f, g)`` triples normalized and judged with the samples.
    Returns ``nan`` when no pair passes the separation filter.
    """
    if not 0 < epsilon <= 2:
        raise ValueError(f"epsilon must lie in (0, 2], got {epsilon}")
    pairs = pairs if pairs is not None else sample_unit_pairs(spec, samples, seed, members, rtol)
    witnesses = list(witnesses)
    strict = _strictly_convex_regime(spec)
    report = ProbeReport("probe-convexity", {
        "epsilon": epsilon, "samples": int(pairs.f.shape[0]), "seed": seed,
        "members": list(members), "rtol": rtol, "slack": slack,
        "strict_check": strict, "strict_separation": STRICT_SEPARATION,
    })

    def judge(unit: UnitPairs, source: str) -> list[float]:
        kept = []
        for k, label in enumerate(unit.labels):
            sep, mid = float(unit.separation[k]), float(unit.midpoint[k])
            keep = sep >= epsilon
            if keep:
                kept.append(mid)
            ok = mid <= 1 + slack
            sum_norm = 2 * mid
            if strict and sep >= STRICT_SEPARATION:
                ok = ok and sum_norm <= 2 - slack
            report.add(ok, source=source, label=label, separation=sep, midpoint_norm=mid,
                       sum_norm=sum_norm, kept=keep)
        return kept

    kept_samples = judge(pairs, "sample")
    kept_witness: list[float] = []
    if witnesses:
        length = max(max(len(f), len(g)) for _, f, g in witnesses)
        wf = _stack([f for _, f, _ in witnesses], length)
        wg = _stack([g for _, _, g in witnesses], length)
        kept_witness = judge(_unit_pairs(wf, wg, spec, rtol, [w[0] for w in witnesses]), "witness")

    def delta(values):
        return 1 - max(values) if values else math.nan

    kept = kept_samples + kept_witness
    result = delta(kept)
    report.summary.update(
        delta_hat=result,
        delta_hat_sampled=delta(kept_samples),
        delta_hat_witness=delta(kept_witness),
        kept=len(kept),
        max_midpoint=max((r["midpoint_norm"] for r in report.rows), default=math.nan),
        max_violation=max((r["midpoint_norm"] - 1 for r in report.rows), default=math.nan),
    )
    if spec.p.is_constant and spec.q.is_constant and spec.p.values[0] == 2 and spec.q.values[0] == 2:
        report.summary["hilbert_modulus"] = 1 - math.sqrt(1 - epsilon**2 / 4)
    return result, report


def counterexample_suite(p: Exponent, N: int, rtol: float = 1e-12, tol: float = 1e-8) -> ProbeReport:
    """Norms of the witness pairs in the endpoint spaces ``q = INF`` and ``q = 1``."""
    grid = p.grid
    report = ProbeReport("counterexamples", {"N": N, "rtol": rtol, "tol": tol})
    expected = {"linf": (1.0, 1.0, 1.0, 1.0), "l1": (1.0, 1.0, 2.0, 1.0)}
    outer = {"linf": INF, "l1": 1.0}
    for case in ("linf", "l1"):
        spec = MixedSpaceSpec(p, Exponent.constant(grid, outer[case]))
        f, g = witness_pair(case, grid, N)
        a, b = f.as_array(), g.as_array()
        values = _norms(np.array([a, b, a - b, 0.5 * (a + b)]), spec, rtol)
        for name, got, want in zip(("f", "g", "f-g", "(f+g)/2"), values, expected[case]):
            report.add(abs(got - want) <= tol, case=case, N=N, quantity=name,
                       value=float(got), expected=want, error=float(abs(got - want)))
    report.summary["max_error"] = max(r["error"] for r in report.rows)
    return report


# -- smoothness ----------------------------------------------------------------


def geometric_t_grid(points: int = 12, ratio: float = 0.5, largest: float = 0.5) -> list[float]:
    """``+-largest * ratio^k`` for ``k < points``, sorted ascending."""
    pos = [largest * ratio**k for k in range(points)]
    return sorted([-t for t in pos] + pos)


def smoothness_quotient_probe(spec: MixedSpaceSpec, f: FunctionSequence, g: FunctionSequence,
                              t_grid: Iterable[float], rtol: float = PROBE_RTOL,
                              tol: float = MONOTONE_TOL,
                              reference: Callable[[float], float] | None = None,
                              reference_tol: float = 1e-6) -> ProbeReport:
    """``Phi(t) = (||f + t g|| - ||f||)/t`` with ``f`` normalized to unit norm.

    Checks that ``Phi`` is nondecreasing on each side of 0 and that
    ``|Phi(t)| <= ||g||``. ``reference`` optionally supplies exact values.
    """
    ts = sorted(float(t) for t in t_grid)
    if any(t == 0 for t in ts):
        raise ValueError("t grid must not contain 0")
    length = max(len(f), len(g))
    a, b = f.as_array(length), g.as_array(length)
    base = _norms(a[None], spec, rtol)[0]
    if base == 0:
        raise DomainError("f must be nonzero")
    a = a / base
    stack = np.array([a, b] + [a + t * b for t in ts])
    norms = _norms(stack, spec, rtol)
    nf, ng, nt = norms[0], norms[1], norms[2:]
    phi = (nt - nf) / np.array(ts)

    report = ProbeReport("probe-smoothness", {"t_grid": ts, "rtol": rtol, "tol": tol})
    for k, t in enumerate(ts):
        nxt = k + 1 if k + 1 < len(ts) and (ts[k + 1] > 0) == (t > 0) else None
        mono = phi[k] <= phi[nxt] + tol if nxt is not None else True
        bounded = abs(phi[k]) <= ng + tol
        row = dict(t=t, norm=float(nt[k]), phi=float(phi[k]),
                   phi_next=float(phi[nxt]) if nxt is not None else None,
                   g_norm=float(ng), monotone=bool(mono), bounded=bool(bounded))
        ok = mono and bounded
        if reference is not None:
            want = float(reference(t))
            row.update(reference=want, reference_error=float(abs(phi[k] - want)))
            ok = ok and abs(phi[k] - want) <= reference_tol
        report.add(ok, **row)
    pos = [k for k, t in enumerate(ts) if t > 0]
    neg = [k for k, t in enumerate(ts) if t < 0]
    if pos and neg:
        kp = min(pos, key=lambda k: ts[k])
        kn = max(neg, key=lambda k: ts[k])
        report.summary.update(right_limit=float(phi[kp]), left_limit=float(phi[kn]),
                              two_sided_gap=float(abs(phi[kp] - phi[kn])))
    report.summary["f_norm"] = float(nf)
    return report


# -- norm to measure -----------------------------------------------------------


def measure_convergence_probe(spec: MixedSpaceSpec, F: FunctionSequence, H: FunctionSequence,
                              lambdas: Iterable[float], ns: Iterable[int], N: int | Iterable[int],
                              rtol: float = 1e-12) -> ProbeReport:
    """Exceedance measure of ``P_N(F_n - F)`` for ``F_n = F + H/n`` against the norm bound.

    The difference ``F_n - F`` is formed explicitly. ``H`` is rescaled so that
    ``||H/n|| <= 1`` for every tested ``n``.
    """
    p_hi = ess_bounds(spec.p)[1]
    if not p_hi < INF:
        raise HypothesisError("the norm-to-measure bound needs p_plus < inf")
    lambdas = sorted(float(x) for x in lambdas)
    ns = sorted(int(n) for n in ns)
    Ns = sorted({int(N)} if isinstance(N, (int, np.integer)) else {int(x) for x in N})
    if not lambdas or not ns or not Ns:
        raise ValueError("lambda, n and N grids must be nonempty")
    if ns[0] < 1 or Ns[0] < 1:
        raise ValueError("n and N must be positive integers")
    if any(not 0 < lam < 1 for lam in lambdas):
        raise ValueError("lambda grid must lie in (0, 1)")

    length = max(len(F), len(H), max(Ns))
    base = F.as_array(length)
    direction = H.as_array(length)
    h_norm = _norms(direction[None], spec, rtol)[0]
    if h_norm == 0:
        raise DomainError("direction H must be nonzero")
    scale = min(1.0, ns[0] / h_norm)
    direction = direction * scale

    diffs = np.array([(base + direction / n) - base for n in ns])
    norms = _norms(diffs, spec, rtol)
    grid = F.grid if len(F) else H.grid

    report = ProbeReport("probe-measure", {
        "lambdas": lambdas, "ns": ns, "N": Ns, "p_plus": p_hi,
        "direction_scale": scale, "rtol": rtol,
    })
    finals = {}
    for N_ in Ns:
        for lam in lambdas:
            prev = None
            for k, n in enumerate(ns):
                mag = np.sqrt(np.sum(diffs[k, :N_] ** 2, axis=0))
                measure = float(grid.width * np.count_nonzero(mag > lam))
                bound = float((N_ / lam) ** p_hi * norms[k])
                within = measure <= bound
                monotone = prev is None or measure <= prev
                report.add(within and monotone, n=n, lam=lam, N=N_, measure=measure,
                           diff_norm=float(norms[k]), bound=bound, margin=bound - measure,
                           within_bound=bool(within), monotone=bool(monotone))
                prev = measure
            finals[f"N={N_},lam={lam!r}"] = prev
    report.summary.update(
        final_measure=finals,
        all_reach_zero=all(v == 0 for v in finals.values()),
        min_margin=min(r["margin"] for r in report.rows),
    )
    return report


def exceedance_measure(D: FunctionSequence, N: int, lam: float) -> float:
    """``|{x : |P_N D(x)| > lam}|`` with the Euclidean magnitude."""
    mag = pointwise_magnitude(D, N).values
    return float(D.grid.width * np.count_nonzero(mag > lam))
