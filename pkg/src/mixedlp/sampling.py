"""Seeded generators for randomized exponents, functions and sequences.

Exponents are piecewise constant with 2-8 pieces and values in [1.1, 6];
functions are piecewise constant with values in [-2, 2]; sequences have
1-8 members. Pieces always break at cell edges.
"""

from __future__ import annotations

import numpy as np

from .exponent import Exponent, Grid
from .gridfn import FunctionSequence
from .mixed import MixedSpaceSpec

EXPONENT_RANGE = (1.1, 6.0)
PIECES = (2, 8)
AMPLITUDE = 2.0
MEMBERS = (1, 8)

REGIMES = ("q<=p", "q-constant", "conjugate")


def piecewise_values(rng: np.random.Generator, cells: int, low: float, high: float,
                     pieces: tuple[int, int] = PIECES) -> np.ndarray:
    k = int(rng.integers(pieces[0], pieces[1] + 1))
    k = min(k, cells)
    cuts = np.sort(rng.choice(np.arange(1, cells), size=k - 1, replace=False)) if k > 1 else []
    levels = rng.uniform(low, high, size=k)
    return np.repeat(levels, np.diff(np.concatenate([[0], cuts, [cells]])).astype(int))


def random_exponent(grid: Grid, rng: np.random.Generator, low: float = EXPONENT_RANGE[0],
                    high: float = EXPONENT_RANGE[1]) -> Exponent:
    return Exponent(grid, piecewise_values(rng, grid.cells, low, high))


def random_function_array(grid: Grid, rng: np.random.Generator, members: int,
                          amplitude: float = AMPLITUDE) -> np.ndarray:
    return np.array([piecewise_values(rng, grid.cells, -amplitude, amplitude) for _ in range(members)])


def random_sequence(grid: Grid, rng: np.random.Generator, members: tuple[int, int] = MEMBERS,
                    amplitude: float = AMPLITUDE) -> FunctionSequence:
    n = int(rng.integers(members[0], members[1] + 1))
    return FunctionSequence.from_array(grid, random_function_array(grid, rng, n, amplitude))


def random_spec(grid: Grid, rng: np.random.Generator, regime: str | None = None) -> MixedSpaceSpec:
    """Random (p, q); ``regime`` forces one of the norm conditions.

    ``"q<=p"``: q is capped cellwise by p. ``"q-constant"``: q is a constant
    in [1, 6]. ``"conjugate"``: q is raised cellwise to at least p/(p-1).
    ``None``: p and q independent.
    """
    p = random_exponent(grid, rng)
    if regime == "q-constant":
        q = Exponent.constant(grid, float(rng.uniform(1.0, EXPONENT_RANGE[1])))
    else:
        qv = piecewise_values(rng, grid.cells, 1.0, EXPONENT_RANGE[1])
        if regime == "q<=p":
            qv = np.minimum(qv, p.values)
        elif regime == "conjugate":
            qv = np.maximum(qv, p.values / (p.values - 1.0))
        elif regime is not None:
            raise ValueError(f"unknown regime {regime!r}")
        q = Exponent(grid, qv)
    return MixedSpaceSpec(p, q)
