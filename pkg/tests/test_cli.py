import json
import math
from pathlib import Path

import pytest

from mixedlp import __version__
from mixedlp.cli import config_from_dict, main, parse_config, run
from mixedlp.errors import ConfigError
from mixedlp.report import ProbeReport, emit_report

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
GOLDEN = (1 + math.sqrt(5)) / 2
MINIMAL = {
    "grid": {"start": 0, "end": 2, "cells": 8},
    "p": 2,
    "q": 2,
    "function": {"kind": "indicator", "a": 0, "b": 1},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestParseConfig:
    def test_minimal(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL))
        assert cfg.grid.cells == 8 and cfg.function.integral() == 1.0

    def test_inf_routes_to_nested_form(self, tmp_path):
        raw = dict(MINIMAL, q={"kind": "piecewise", "breakpoints": [1], "values": [2, "inf"]},
                   sequence=[{"kind": "indicator", "a": 0, "b": 2}])
        cfg = parse_config(write(tmp_path, raw))
        assert not cfg.spec.q_finite
        status, reports = run("mixed-norm", cfg, tmp_path / "out")
        assert reports["mixed-norm"].parameters["modular_form"] == "inf"
        assert status == 0

    def test_class_violation_names_cell(self, tmp_path):
        raw = dict(MINIMAL, p={"kind": "samples", "values": [2, 2, 2, 0.5, 2, 2, 2, 2]})
        with pytest.raises(ConfigError, match="p: value 0.5 at cell 3"):
            parse_config(write(tmp_path, raw))

    def test_class_p0_accepts(self, tmp_path):
        raw = dict(MINIMAL, p=0.5, exponent_class="P0")
        assert parse_config(write(tmp_path, raw)).p.values[0] == 0.5

    @pytest.mark.parametrize("patch, field", [
        ({"grid": {"start": 0, "end": 2}}, "grid.cells"),
        ({"p": "two"}, "p"),
        ({"q": {"kind": "weird"}}, "q.kind"),
        ({"function": {"kind": "indicator", "a": -5, "b": 1}}, "function"),
        ({"sequence": [{"kind": "indicator", "a": 0, "b": 1}, {"kind": "nope"}]}, r"sequence\[1\]"),
        ({"probe": {"lambdas": [0.5, 1.5]}}, "probe.lambdas"),
        ({"probe": {"seed": -1}}, "probe.seed"),
        ({"probe": {"speed": 1}}, "probe.speed"),
        ({"tolerances": {"norm": 0}}, "tolerances.norm"),
        ({"extra": 1}, "extra"),
        ({"mollifier": {"kind": "box", "cells": 63}}, "mollifier"),
    ])
    def test_errors_name_field(self, tmp_path, patch, field):
        with pytest.raises(ConfigError, match=field):
            parse_config(write(tmp_path, {**MINIMAL, **patch}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "absent.json")

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="malformed"):
            parse_config(path)

    def test_overrides(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL), cells=16, seed=9)
        assert cfg.grid.cells == 16 and cfg.probe.seed == 9

    def test_samples_break_under_cell_override(self, tmp_path):
        raw = dict(MINIMAL, p={"kind": "samples", "values": [2] * 8})
        with pytest.raises(ConfigError, match="p.values"):
            parse_config(write(tmp_path, raw), cells=16)


class TestRun:
    def test_golden_ratio_fixture(self, tmp_path):
        assert main(["--config", str(CONFIGS / "golden_ratio.json"), "--command", "norm",
                     "--out", str(tmp_path)]) == 0
        data = json.loads((tmp_path / "norm.json").read_text())
        assert abs(data["rows"][0]["value"] - GOLDEN) <= 1e-8
        assert data["header"]["version"] == __version__

    def test_counterexamples(self, tmp_path):
        cfg = config_from_dict({"grid": {"start": -1, "end": 3, "cells": 32}, "p": 2, "q": 2,
                                "probe": {"N": [4]}})
        status, reports = run("counterexamples", cfg, tmp_path)
        assert status == 0
        values = [(r["case"], r["value"]) for r in reports["counterexamples"].rows]
        assert [v for c, v in values if c == "linf"] == pytest.approx([1, 1, 1, 1], abs=1e-8)
        assert [v for c, v in values if c == "l1"] == pytest.approx([1, 1, 2, 1], abs=1e-8)
        assert "linf" in (tmp_path / "counterexamples.csv").read_text()

    def test_convexity_byte_identical(self, tmp_path):
        cfg = config_from_dict({"grid": {"start": -1, "end": 3, "cells": 8}, "p": 2, "q": 2,
                                "probe": {"seed": 5, "samples": 40, "epsilons": [1.0]}})
        run("probe-convexity", cfg, tmp_path / "a")
        run("probe-convexity", cfg, tmp_path / "b")
        for ext in ("json", "csv"):
            assert (tmp_path / "a" / f"probe-convexity.{ext}").read_bytes() == \
                   (tmp_path / "b" / f"probe-convexity.{ext}").read_bytes()

    def test_randomized_needs_seed(self, tmp_path):
        cfg = config_from_dict({"grid": {"start": -1, "end": 3, "cells": 8}, "p": 2, "q": 2})
        with pytest.raises(ConfigError, match="probe.seed"):
            run("probe-convexity", cfg, tmp_path)

    def test_missing_input(self, tmp_path):
        cfg = config_from_dict({"grid": {"start": -1, "end": 3, "cells": 8}, "p": 2, "q": 2})
        with pytest.raises(ConfigError, match="function"):
            run("norm", cfg, tmp_path)

    def test_failure_exit_status(self, tmp_path):
        raw = dict(MINIMAL, expected={"norm": 2.0})
        assert main(["--config", str(write(tmp_path, raw)), "--command", "norm",
                     "--out", str(tmp_path / "o")]) == 1

    def test_config_error_exit_status(self, tmp_path, capsys):
        assert main(["--config", str(tmp_path / "none.json"), "--command", "norm"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_hypothesis_failure_is_diagnostic_row(self, tmp_path):
        raw = {"grid": {"start": -1, "end": 3, "cells": 8}, "p": {"kind": "piecewise",
               "breakpoints": [1], "values": [2, "inf"]}, "q": 2,
               "sequence": [{"kind": "indicator", "a": 0, "b": 1}],
               "direction": [{"kind": "indicator", "a": 0, "b": 1}]}
        status, reports = run("probe-measure", config_from_dict(raw), tmp_path)
        assert status == 1
        assert reports["probe-measure"].rows[0]["check"] == "error"

    def test_all_config_files(self, tmp_path):
        for path in sorted(CONFIGS.glob("*.json")):
            cfg = parse_config(path)
            status, reports = run("all", cfg, tmp_path / path.stem)
            assert status == 0, (path.name, [n for n, r in reports.items() if not r.passed])

    def test_mixed_norm_equivalence_row(self, tmp_path):
        raw = dict(MINIMAL, p=3, q=1.5, sequence=[{"kind": "indicator", "a": 0, "b": 1, "height": 2}])
        status, reports = run("mixed-norm", config_from_dict(raw), tmp_path)
        rows = {r["check"]: r for r in reports["mixed-norm"].rows}
        assert rows["form-equivalence"]["relative_error"] <= 1e-6 and status == 0


class TestEmit:
    def test_empty_report_header_only(self, tmp_path):
        emit_report(ProbeReport("empty"), tmp_path / "e.json", tmp_path / "e.csv", {"seed": 1})
        csv = (tmp_path / "e.csv").read_text()
        assert all(line.startswith("#") for line in csv.splitlines())
        assert json.loads((tmp_path / "e.json").read_text())["rows"] == []

    def test_ascii_and_pure(self, tmp_path):
        report = ProbeReport("r", {"label": "ε-grid"})
        report.add(True, value=math.inf, other=math.nan, name="λ")
        for k in range(2):
            emit_report(report, tmp_path / f"{k}.json", tmp_path / f"{k}.csv", {"seed": 3})
        for ext in ("json", "csv"):
            a = (tmp_path / f"0.{ext}").read_bytes()
            assert a == (tmp_path / f"1.{ext}").read_bytes()
            a.decode("ascii")

    def test_pass_flags(self):
        report = ProbeReport("r")
        report.add(True, x=1)
        report.add(None, x=2)
        assert report.passed
        report.add(False, x=3)
        assert not report.passed and len(report.failures) == 1
