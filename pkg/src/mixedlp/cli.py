"""Command-line runner: JSON config in, JSON + CSV reports out.

Config layout (all keys except ``grid``, ``p`` and ``q`` optional)::

    {
      "grid": {"start": -2, "end": 4, "cells": 1024},
      "p": 2 | "inf" | {"kind": "piecewise", "breakpoints": [1], "values": [2, "inf"]}
           | {"kind": "log-perturbation", "p_inf": 2, "amplitude": 1}
           | {"kind": "samples", "values": [...]},
      "q": <same as p>,
      "exponent_class": "P" | "P0",
      "function": <function descriptor>,
      "sequence": [<function descriptor>, ...],
      "second": [...],          # direction g of the smoothness probe
      "direction": [...],       # perturbation H of the measure probe
      "mollifier": {"kind": "box", "radius": 1},
      "probe": {"seed": 0, "samples": 1000, "epsilons": [0.5], "lambdas": [...],
                "pairs": 50, "ns": [...], "N": [2, 4], "t_grid": [...], "t_seq": [...],
                "eta": 0.01, "margin": 0.05},
      "tolerances": {"norm": 1e-10, "equivalence": 1e-6, "slack": 1e-8, "expected": 1e-8},
      "expected": {"norm": 1.618...},
      "output": "out"
    }
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import __version__
from .approxid import VElement, approx_identity_probe, maximal_sum_bound_check, weak_type_check
from .errors import ConfigError, ExponentClassError, HypothesisError, SolverError
from .exponent import INF, Exponent, Grid, ess_bounds, quotient
from .gridfn import FunctionSequence, GridFunction, build_function
from .mixed import MixedSpaceSpec, inner_closed_form, inner_inf_form, mixed_modular, mixed_norm
from .modular import luxemburg_norm, modular_value
from .operators import MollifierSpec, build_mollifier, convolve, maximal_function, mollifier_scale
from .probes import (
    convexity_modulus_probe,
    counterexample_suite,
    geometric_t_grid,
    measure_convergence_probe,
    sample_unit_pairs,
    smoothness_quotient_probe,
    witness_pair,
)
from .report import ProbeReport, emit_report
from .sampling import random_function_array

COMMANDS = (
    "norm", "modular", "mixed-norm", "maximal", "mollify", "probe-convexity",
    "probe-smoothness", "probe-measure", "probe-approxid", "counterexamples", "all",
)
RANDOMIZED = {"probe-convexity", "probe-smoothness"}


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10
    equivalence: float = 1e-6
    slack: float = 1e-8
    expected: float = 1e-8


@dataclass(frozen=True)
class ProbeParams:
    seed: int | None = None
    samples: int = 1000
    pairs: int = 50
    members: tuple[int, int] = (1, 4)
    epsilons: tuple[float, ...] = (0.5, 1.0, 1.5)
    lambdas: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 10))
    ns: tuple[int, ...] = tuple(2**k for k in range(7))
    N: tuple[int, ...] = (2, 4, 8, 16)
    t_grid: tuple[float, ...] = tuple(geometric_t_grid())
    t_seq: tuple[float, ...] = tuple(2.0**-k for k in range(1, 9))
    eta: float = 0.01
    margin: float = 0.05
    lam: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    p: Exponent
    q: Exponent
    function: GridFunction | None = None
    sequence: FunctionSequence | None = None
    second: FunctionSequence | None = None
    direction: FunctionSequence | None = None
    mollifier: MollifierSpec | None = None
    probe: ProbeParams = field(default_factory=ProbeParams)
    tolerances: Tolerances = field(default_factory=Tolerances)
    expected: Mapping[str, float] = field(default_factory=dict)
    output: str = "out"
    source: Mapping[str, Any] = field(default_factory=dict)

    @property
    def spec(self) -> MixedSpaceSpec:
        return MixedSpaceSpec(self.p, self.q)


# -- parsing -------------------------------------------------------------------


def _number(value, name: str, allow_inf: bool = False) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        if allow_inf:
            return INF
        raise ConfigError(f"{name}: infinity not allowed here")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    x = float(value)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise ConfigError(f"{name}: expected a finite number, got {value!r}")
    return x


def _numbers(value, name: str, allow_inf: bool = False) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{name}: expected a list")
    return [_number(v, f"{name}[{k}]", allow_inf) for k, v in enumerate(value)]


def _parse_grid(raw, cells_override: int | None) -> Grid:
    if not isinstance(raw, Mapping):
        raise ConfigError("grid: expected an object with start, end, cells")
    for key in ("start", "end", "cells"):
        if key not in raw:
            raise ConfigError(f"grid.{key}: missing")
    cells = raw["cells"] if cells_override is None else cells_override
    if isinstance(cells, bool) or not isinstance(cells, int) or cells < 1:
        raise ConfigError(f"grid.cells: expected a positive integer, got {cells!r}")
    start, end = _number(raw["start"], "grid.start"), _number(raw["end"], "grid.end")
    if not start < end:
        raise ConfigError("grid: start must be below end")
    return Grid(start, end, cells)


def parse_exponent(raw, grid: Grid, name: str) -> Exponent:
    """Exponent from a number, ``"inf"``, or a descriptor object."""
    try:
        if not isinstance(raw, Mapping):
            return Exponent.constant(grid, _number(raw, name, allow_inf=True))
        kind = raw.get("kind")
        if kind == "constant":
            return Exponent.constant(grid, _number(raw.get("value"), f"{name}.value", True))
        if kind == "piecewise":
            bps = _numbers(raw.get("breakpoints"), f"{name}.breakpoints")
            vals = _numbers(raw.get("values"), f"{name}.values", allow_inf=True)
            return Exponent.piecewise(grid, bps, vals)
        if kind == "log-perturbation":
            return Exponent.log_perturbation(grid, _number(raw.get("p_inf"), f"{name}.p_inf"),
                                             _number(raw.get("amplitude"), f"{name}.amplitude"))
        if kind == "samples":
            vals = _numbers(raw.get("values"), f"{name}.values", allow_inf=True)
            if len(vals) != grid.cells:
                raise ConfigError(f"{name}.values: {len(vals)} values for {grid.cells} cells")
            return Exponent(grid, np.array(vals))
        raise ConfigError(f"{name}.kind: unknown exponent kind {kind!r}")
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _parse_function(raw, grid: Grid, name: str) -> GridFunction:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{name}: expected a function descriptor object")
    try:
        return build_function(raw, grid)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _parse_sequence(raw, grid: Grid, name: str) -> FunctionSequence:
    if not isinstance(raw, list):
        raise ConfigError(f"{name}: expected a list of function descriptors")
    return FunctionSequence(grid, tuple(_parse_function(d, grid, f"{name}[{k}]") for k, d in enumerate(raw)))


def _parse_probe(raw) -> ProbeParams:
    if raw is None:
        return ProbeParams()
    if not isinstance(raw, Mapping):
        raise ConfigError("probe: expected an object")
    defaults = ProbeParams()
    kw: dict[str, Any] = {}
    for key, value in raw.items():
        name = f"probe.{key}"
        if key == "seed":
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name}: expected a nonnegative integer")
            kw[key] = value
        elif key in ("samples", "pairs"):
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name}: expected a positive integer")
            kw[key] = value
        elif key in ("ns", "N"):
            values = [value] if isinstance(value, int) and not isinstance(value, bool) else value
            if not isinstance(values, list) or not values or any(
                    isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in values):
                raise ConfigError(f"{name}: expected positive integers")
            kw[key] = tuple(values)
        elif key == "members":
            if (not isinstance(value, list) or len(value) != 2
                    or any(not isinstance(v, int) or v < 1 for v in value) or value[0] > value[1]):
                raise ConfigError(f"{name}: expected [min, max] positive integers")
            kw[key] = tuple(value)
        elif key in ("epsilons", "lambdas", "t_grid", "t_seq"):
            kw[key] = tuple(_numbers(value, name))
        elif key in ("eta", "margin", "lam"):
            kw[key] = _number(value, name)
        else:
            raise ConfigError(f"{name}: unknown probe parameter")
    params = ProbeParams(**{**defaults.__dict__, **kw})
    if any(not 0 < e <= 2 for e in params.epsilons):
        raise ConfigError("probe.epsilons: values must lie in (0, 2]")
    if any(not 0 < x < 1 for x in params.lambdas):
        raise ConfigError("probe.lambdas: values must lie in (0, 1)")
    if any(t == 0 for t in params.t_grid):
        raise ConfigError("probe.t_grid: 0 is not allowed")
    if any(t <= 0 for t in params.t_seq):
        raise ConfigError("probe.t_seq: values must be positive")
    return params


def _parse_tolerances(raw) -> Tolerances:
    if raw is None:
        return Tolerances()
    if not isinstance(raw, Mapping):
        raise ConfigError("tolerances: expected an object")
    known = Tolerances().__dict__
    kw = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"tolerances.{key}: unknown tolerance")
        x = _number(value, f"tolerances.{key}")
        if not x > 0:
            raise ConfigError(f"tolerances.{key}: must be positive")
        kw[key] = x
    return Tolerances(**{**known, **kw})


def parse_config(path, cells: int | None = None, seed: int | None = None) -> RunConfig:
    """Read and validate a JSON config; ``cells``/``seed`` override the file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON: {exc}") from exc
    return config_from_dict(raw, cells, seed)


def config_from_dict(raw: Mapping, cells: int | None = None, seed: int | None = None) -> RunConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("config: top level must be an object")
    known = {"grid", "p", "q", "exponent_class", "function", "sequence", "second", "direction",
             "mollifier", "probe", "tolerances", "expected", "output"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{key}: unknown config field")
    if "grid" not in raw:
        raise ConfigError("grid: missing")
    grid = _parse_grid(raw["grid"], cells)
    for key in ("p", "q"):
        if key not in raw:
            raise ConfigError(f"{key}: missing")
    p = parse_exponent(raw["p"], grid, "p")
    q = parse_exponent(raw["q"], grid, "q")
    cls = raw.get("exponent_class", "P")
    if cls not in ("P", "P0"):
        raise ConfigError(f"exponent_class: expected 'P' or 'P0', got {cls!r}")
    if cls == "P":
        for name, e in (("p", p), ("q", q)):
            try:
                e.require_class_p(name)
            except ExponentClassError as exc:
                raise ConfigError(str(exc)) from exc

    def optional(key, parser):
        return parser(raw[key], grid, key) if key in raw else None

    mollifier = None
    if "mollifier" in raw:
        try:
            mollifier = build_mollifier(raw["mollifier"])
        except (ValueError, TypeError, KeyError, AttributeError) as exc:
            raise ConfigError(f"mollifier: {exc}") from exc
    probe = _parse_probe(raw.get("probe"))
    if seed is not None:
        probe = ProbeParams(**{**probe.__dict__, "seed": seed})
    expected = raw.get("expected", {})
    if not isinstance(expected, Mapping):
        raise ConfigError("expected: expected an object")
    expected = {k: _number(v, f"expected.{k}") for k, v in expected.items()}
    output = raw.get("output", "out")
    if not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    return RunConfig(
        grid=grid, p=p, q=q,
        function=optional("function", _parse_function),
        sequence=optional("sequence", _parse_sequence),
        second=optional("second", _parse_sequence),
        direction=optional("direction", _parse_sequence),
        mollifier=mollifier, probe=probe, tolerances=_parse_tolerances(raw.get("tolerances")),
        expected=expected, output=output, source=dict(raw),
    )


# -- commands ------------------------------------------------------------------


def _need(cfg: RunConfig, attr: str, command: str):
    value = getattr(cfg, attr)
    if value is None:
        raise ConfigError(f"{attr}: required by command {command!r}")
    return value


def _check_expected(report: ProbeReport, cfg: RunConfig, key: str, value: float) -> None:
    if key in cfg.expected:
        want = cfg.expected[key]
        err = abs(value - want)
        report.add(err <= cfg.tolerances.expected, check=f"expected-{key}", value=value,
                   expected=want, error=err)


def cmd_norm(cfg: RunConfig) -> ProbeReport:
    f = _need(cfg, "function", "norm")
    res = luxemburg_norm(f, cfg.p, cfg.tolerances.norm)
    report = ProbeReport("norm", {"rtol": cfg.tolerances.norm})
    report.add(res.residual <= cfg.tolerances.norm, check="luxemburg", value=res.value,
               iterations=res.iterations, residual=res.residual,
               bracket_lo=res.bracket[0], bracket_hi=res.bracket[1])
    _check_expected(report, cfg, "norm", res.value)
    return report


def cmd_modular(cfg: RunConfig) -> ProbeReport:
    f = _need(cfg, "function", "modular")
    lam = cfg.probe.lam
    value = modular_value(f, cfg.p, lam)
    report = ProbeReport("modular", {"lam": lam})
    report.add(None, check="modular", lam=lam, value=value)
    _check_expected(report, cfg, "modular", value)
    return report


def cmd_mixed_norm(cfg: RunConfig) -> ProbeReport:
    F = _need(cfg, "sequence", "mixed-norm")
    spec = cfg.spec
    tol = cfg.tolerances
    res = mixed_norm(F, spec, tol.norm)
    form = "closed" if spec.q_finite else "inf"
    report = ProbeReport("mixed-norm", {"rtol": tol.norm, "modular_form": form,
                                        "conditions": None if spec.flags is None else spec.flags._asdict()})
    report.add(res.residual <= tol.norm or not spec.q_finite, check="mixed-norm", value=res.value,
               iterations=res.iterations, residual=res.residual,
               bracket_lo=res.bracket[0], bracket_hi=res.bracket[1])
    modular = mixed_modular(F, spec, tol.norm)
    report.add(None, check=f"mixed-modular-{form}", value=modular)
    if spec.q_finite and spec.p.finite_mask.all() and len(F):
        a = F.as_array()
        closed = float(inner_closed_form(a, spec, tol.norm).sum())
        nested = float(inner_inf_form(a, spec, tol.norm).sum())
        err = abs(closed - nested) / max(abs(closed), 1e-300)
        report.add(err <= tol.equivalence, check="form-equivalence", closed=closed, nested=nested,
                   relative_error=err)
    _check_expected(report, cfg, "mixed-norm", res.value)
    return report


def cmd_maximal(cfg: RunConfig) -> ProbeReport:
    f = _need(cfg, "function", "maximal")
    mf = maximal_function(f)
    report = ProbeReport("maximal", {"cells": cfg.grid.cells})
    for x, v, m in zip(cfg.grid.midpoints, f.values, mf.values):
        report.add(m >= abs(v) - 1e-15, x=float(x), f=float(v), maximal=float(m))
    return report


def cmd_mollify(cfg: RunConfig) -> ProbeReport:
    f = _need(cfg, "function", "mollify")
    m = _need(cfg, "mollifier", "mollify")
    report = ProbeReport("mollify", {"t_seq": list(cfg.probe.t_seq), "kernel_l1": m.l1_norm,
                                     "kernel_integral": m.integral})
    f_l1 = float(cfg.grid.width * np.abs(f.values).sum())
    for t in cfg.probe.t_seq:
        phi = mollifier_scale(m, t, cfg.grid)
        out = convolve(phi, f)
        out_l1 = float(cfg.grid.width * np.abs(out.values).sum())
        bound = phi.grid.width * float(np.abs(phi.values).sum()) * f_l1
        report.add(out_l1 <= bound * (1 + 1e-12) + cfg.tolerances.slack, t=t,
                   kernel_integral=phi.integral(), l1=out_l1, young_bound=bound)
    return report


def _merge(name: str, parts: list[tuple[str, ProbeReport]], parameters=None) -> ProbeReport:
    report = ProbeReport(name, dict(parameters or {}))
    for label, part in parts:
        report.parameters[label] = part.parameters
        report.summary[label] = dict(part.summary, passed=part.passed)
        for row in part.rows:
            report.rows.append({"check": label, **row})
    return report


def _require_seed(cfg: RunConfig, command: str) -> int:
    if cfg.probe.seed is None:
        raise ConfigError(f"probe.seed: required by randomized command {command!r}")
    return cfg.probe.seed


def cmd_probe_convexity(cfg: RunConfig) -> ProbeReport:
    seed = _require_seed(cfg, "probe-convexity")
    spec = cfg.spec
    pr = cfg.probe
    pairs = sample_unit_pairs(spec, pr.samples, seed, pr.members)
    witnesses = []
    if spec.q.is_constant and spec.q.values[0] in (1.0, INF):
        case = "l1" if spec.q.values[0] == 1 else "linf"
        witnesses = [(f"{case}-N{N}", *witness_pair(case, cfg.grid, N)) for N in pr.N if N >= 2]
    parts = []
    for eps in pr.epsilons:
        _, rep = convexity_modulus_probe(spec, eps, pr.samples, seed, witnesses, pairs, pr.members,
                                         slack=cfg.tolerances.slack)
        parts.append((f"epsilon={eps!r}", rep))
    return _merge("probe-convexity", parts, {"seed": seed, "samples": pr.samples})


def cmd_probe_smoothness(cfg: RunConfig) -> ProbeReport:
    spec = cfg.spec
    pr = cfg.probe
    if cfg.sequence is not None and cfg.second is not None:
        pairs = [(cfg.sequence, cfg.second)]
        seed = pr.seed
    else:
        seed = _require_seed(cfg, "probe-smoothness")
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(pr.pairs):
            m = int(rng.integers(pr.members[0], pr.members[1] + 1))
            pairs.append(tuple(FunctionSequence.from_array(cfg.grid, random_function_array(cfg.grid, rng, m))
                               for _ in range(2)))
    parts = [(f"pair-{k}", smoothness_quotient_probe(spec, f, g, pr.t_grid)) for k, (f, g) in enumerate(pairs)]
    return _merge("probe-smoothness", parts, {"seed": seed, "pairs": len(pairs)})


def cmd_probe_measure(cfg: RunConfig) -> ProbeReport:
    F = _need(cfg, "sequence", "probe-measure")
    H = _need(cfg, "direction", "probe-measure")
    pr = cfg.probe
    return measure_convergence_probe(cfg.spec, F, H, pr.lambdas, pr.ns, pr.N)


def cmd_probe_approxid(cfg: RunConfig) -> ProbeReport:
    F = _need(cfg, "sequence", "probe-approxid")
    m = _need(cfg, "mollifier", "probe-approxid")
    spec = cfg.spec
    pr = cfg.probe
    g = VElement(FunctionSequence.from_array(cfg.grid, np.abs(F.as_array())), spec)
    parts = [("maximal-sum-bound", maximal_sum_bound_check(g, m, pr.t_seq, cfg.tolerances.slack))]
    if ess_bounds(quotient(spec.p, spec.q))[0] > 1:
        parts.append(("weak-type", weak_type_check(g, spec, pr.lambdas, slack=cfg.tolerances.slack)))
    parts.append(("approx-identity", approx_identity_probe(g, m, pr.t_seq, pr.eta, pr.margin)))
    report = _merge("probe-approxid", parts, {"v_norm": g.v_norm})
    if len(parts) == 2:
        report.summary["weak-type"] = "skipped: (p/q)_minus <= 1"
    return report


def cmd_counterexamples(cfg: RunConfig) -> ProbeReport:
    parts = [(f"N={N}", counterexample_suite(cfg.p, N)) for N in cfg.probe.N if N >= 2]
    return _merge("counterexamples", parts)


HANDLERS: dict[str, Callable[[RunConfig], ProbeReport]] = {
    "norm": cmd_norm,
    "modular": cmd_modular,
    "mixed-norm": cmd_mixed_norm,
    "maximal": cmd_maximal,
    "mollify": cmd_mollify,
    "probe-convexity": cmd_probe_convexity,
    "probe-smoothness": cmd_probe_smoothness,
    "probe-measure": cmd_probe_measure,
    "probe-approxid": cmd_probe_approxid,
    "counterexamples": cmd_counterexamples,
}

# inputs each command needs; "all" runs the commands whose inputs are present
_INPUTS = {
    "norm": ("function",), "modular": ("function",), "maximal": ("function",),
    "mollify": ("function", "mollifier"), "mixed-norm": ("sequence",),
    "probe-measure": ("sequence", "direction"), "probe-approxid": ("sequence", "mollifier"),
    "probe-convexity": (), "probe-smoothness": (), "counterexamples": (),
}


def header(cfg: RunConfig, command: str) -> dict[str, Any]:
    g = cfg.grid
    return {
        "command": command,
        "grid": {"start": g.start, "end": g.end, "cells": g.cells},
        "p": cfg.source.get("p"),
        "q": cfg.source.get("q"),
        "seed": cfg.probe.seed,
        "tolerances": cfg.tolerances.__dict__,
        "version": __version__,
    }


def run_command(command: str, cfg: RunConfig) -> ProbeReport:
    """Run one command; solver and hypothesis failures become a failing diagnostic row."""
    try:
        return HANDLERS[command](cfg)
    except (SolverError, HypothesisError) as exc:
        report = ProbeReport(command)
        report.summary["error"] = f"{type(exc).__name__}: {exc}"
        bracket = getattr(exc, "bracket", None)
        report.add(False, check="error", message=str(exc),
                   bracket=None if bracket is None else list(bracket))
        return report


def run(command: str, cfg: RunConfig, out_dir=None) -> tuple[int, dict[str, ProbeReport]]:
    """Execute ``command`` and write ``<command>.json`` / ``<command>.csv`` under ``out_dir``."""
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}")
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    if command == "all":
        names = [c for c in HANDLERS if all(getattr(cfg, a) is not None for a in _INPUTS[c])
                 and (c not in RANDOMIZED or cfg.probe.seed is not None)]
    else:
        names = [command]
    reports = {}
    for name in names:
        report = run_command(name, cfg)
        emit_report(report, out / f"{name}.json", out / f"{name}.csv", header(cfg, name))
        reports[name] = report
    status = 0 if all(r.passed for r in reports.values()) else 1
    return status, reports


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mixedlp", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--seed", type=int, help="override probe.seed")
    parser.add_argument("--out", help="output directory (default: config 'output')")
    parser.add_argument("--cells", type=int, help="override grid.cells")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, cells=args.cells, seed=args.seed)
        status, reports = run(args.command, cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for name, report in reports.items():
        print(f"{name}: {'pass' if report.passed else 'FAIL'} ({len(report.rows)} rows)")
    return status


if __name__ == "__main__":
    sys.exit(main())
