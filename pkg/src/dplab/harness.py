"""Experiment harness: JSON configs in, CSV/JSON artifacts out.

A run is deterministic given (config, seed): one master seed covers the whole
run, each experiment family owns a disjoint stream-index namespace, and
within a family replication r uses stream index base + r.  Output writing is
single-threaded after reduction, so artifacts are byte-identical for any
value of DPLAB_THREADS.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .dp_core import (
    BaseMeasure,
    BorelSet,
    TruncationPolicy,
    exponential_base,
    normal_base,
    uniform_base,
)
from .errors import ConfigError
from .processes import Grid, QuadratureSpec, bivariate_density_integral, limit_bivariate_density, BivariateGaussianSpec

SCHEMA_VERSION = 1

FAMILIES = ("moments", "fidi", "modulus", "gc", "quantile", "density", "posterior")

# Disjoint stream-index namespaces per family; inside a family, replication r
# (of leg l, where applicable) uses index base + l*replications + r.
FAMILY_STREAM_BASE = {name: i << 40 for i, name in enumerate(FAMILIES)}

# Experiment-level acceptance window for the fitted sup-norm decay rate.
GC_RATE_WINDOW = (-0.6, -0.4)

_DEFAULT_TOLERANCES = {
    "mean": verify.DEFAULT_MEAN_TOL,
    "moment": verify.DEFAULT_MOMENT_TOL,
    "variance": verify.DEFAULT_VARIANCE_TOL,
    "ks_level": verify.DEFAULT_KS_LEVEL,
}

_THIRD = 1.0 / 3.0

_FAMILY_DEFAULTS: dict[str, dict] = {
    "moments": {
        "base_measure": {"label": "uniform"},
        "a": 10.0,
        "sets": [[[0.0, 0.3]], [[0.3, 0.5]]],
        "replications": 100000,
    },
    "fidi": {
        "a": 10000.0,
        "sets": [[[0.0, 0.25]], [[0.25, 0.5]], [[0.5, 1.0]]],
        "replications": 10000,
    },
    "modulus": {
        "a": 1.0,
        "modulus": {"t1": 0.1, "t": 0.4, "t2": 0.9},
        "replications": 100000,
    },
    "gc": {
        "base_measure": {"label": "uniform"},
        "a_values": [10.0, 100.0, 1000.0, 10000.0],
        "replications": 1000,
        "gc_grid_resolution": 512,
        "truncation": {"epsilon": 1e-10, "max_atoms": None},
    },
    "quantile": {
        "base_measure": {"label": "uniform"},
        "a_values": [10000.0],
        "u_points": [0.25, 0.5, 0.75],
        "replications": 10000,
        "truncation": {"epsilon": 1e-10, "max_atoms": None},
    },
    "density": {
        "density": {
            "l1": _THIRD,
            "l2": _THIRD,
            "grid_lo": -2.5,
            "grid_hi": 2.5,
            "grid_points": 11,
        },
        "a_values": [100.0, 1000.0, 10000.0],
        "quadrature": {"half_width": 8.0, "n_start": 65, "n_max": 1025, "tol": 1e-4},
    },
    "posterior": {
        "base_measure": {"label": "uniform"},
        "a": 2.0,
        "data": [0.2, 0.4, 0.6],
        "data_file": None,
        "sets": [[[0.0, 0.3]], [[0.3, 0.6]], [[0.6, 1.0]]],
        "replications": 20000,
    },
}

_COMMON_KEYS = {"tolerance_overrides"}
_FAMILY_KEYS = {name: set(params) | _COMMON_KEYS for name, params in _FAMILY_DEFAULTS.items()}
_TOP_KEYS = {"schema_version", "experiment", "seed", "output_dir", "families"}


# ---------------------------------------------------------------------------
# Config validation
# ---------------------------------------------------------------------------


def _fail(path: str, message: str):
    raise ConfigError(path, message)


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        _fail(path, "must be finite")
    return value


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    for key in d:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown field")


def _validate_base_measure(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, "expected an object with a 'label'")
    label = value.get("label")
    if label == "uniform":
        _check_keys(value, {"label"}, path)
        return {"label": "uniform"}
    if label == "exponential":
        _check_keys(value, {"label", "rate"}, path)
        rate = _as_number(value.get("rate", 1.0), f"{path}.rate")
        if rate <= 0:
            _fail(f"{path}.rate", "must be positive")
        return {"label": "exponential", "rate": rate}
    if label == "normal":
        _check_keys(value, {"label", "mu", "sigma"}, path)
        mu = _as_number(value.get("mu", 0.0), f"{path}.mu")
        sigma = _as_number(value.get("sigma", 1.0), f"{path}.sigma")
        if sigma <= 0:
            _fail(f"{path}.sigma", "must be positive")
        return {"label": "normal", "mu": mu, "sigma": sigma}
    _fail(f"{path}.label", "must be one of uniform | exponential | normal")


def _validate_sets(value, path: str) -> list:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a non-empty list of Borel sets")
    out = []
    for i, s in enumerate(value):
        if not isinstance(s, list) or not s:
            _fail(f"{path}[{i}]", "expected a non-empty list of [lo, hi] intervals")
        intervals = []
        for j, pair in enumerate(s):
            if not isinstance(pair, list) or len(pair) != 2:
                _fail(f"{path}[{i}][{j}]", "expected an interval [lo, hi]")
            lo = _as_number(pair[0], f"{path}[{i}][{j}][0]")
            hi = _as_number(pair[1], f"{path}[{i}][{j}][1]")
            if not lo < hi:
                _fail(f"{path}[{i}][{j}]", "needs lo < hi")
            intervals.append([lo, hi])
        out.append(intervals)
    return out


def _validate_family_params(family: str, raw: dict, path: str) -> dict:
    allowed = _FAMILY_KEYS[family]
    _check_keys(raw, allowed, path)
    params = json.loads(json.dumps(_FAMILY_DEFAULTS[family]))  # deep copy
    params["tolerance_overrides"] = dict(_DEFAULT_TOLERANCES)

    def sub(key: str) -> str:
        return f"{path}.{key}" if path else key

    for key, value in raw.items():
        if key == "base_measure":
            params[key] = _validate_base_measure(value, sub(key))
        elif key == "sets":
            params[key] = _validate_sets(value, sub(key))
        elif key == "a":
            a = _as_number(value, sub(key))
            if a <= 0:
                _fail(sub(key), "must be positive")
            params[key] = a
        elif key == "a_values":
            if not isinstance(value, list) or len(value) < 1:
                _fail(sub(key), "expected a non-empty list")
            vals = [_as_number(v, f"{sub(key)}[{i}]") for i, v in enumerate(value)]
            if any(v <= 0 for v in vals) or any(
                b <= a for a, b in zip(vals, vals[1:])
            ):
                _fail(sub(key), "must be positive and strictly increasing")
            params[key] = vals
        elif key == "replications":
            r = _as_int(value, sub(key))
            if r < 2:
                _fail(sub(key), "must be at least 2")
            params[key] = r
        elif key == "gc_grid_resolution":
            r = _as_int(value, sub(key))
            if r < 2:
                _fail(sub(key), "must be at least 2")
            params[key] = r
        elif key == "modulus":
            if not isinstance(value, dict):
                _fail(sub(key), "expected an object {t1, t, t2}")
            _check_keys(value, {"t1", "t", "t2"}, sub(key))
            pts = {k: _as_number(value.get(k), f"{sub(key)}.{k}") for k in ("t1", "t", "t2")}
            if not 0.0 <= pts["t1"] <= pts["t"] <= pts["t2"] <= 1.0:
                _fail(sub(key), "needs 0 <= t1 <= t <= t2 <= 1")
            params[key] = pts
        elif key == "u_points":
            if not isinstance(value, list) or not value:
                _fail(sub(key), "expected a non-empty list")
            us = [_as_number(u, f"{sub(key)}[{i}]") for i, u in enumerate(value)]
            if any(not 0.0 < u < 1.0 for u in us):
                _fail(sub(key), "levels must lie strictly inside (0, 1)")
            params[key] = us
        elif key == "truncation":
            if not isinstance(value, dict):
                _fail(sub(key), "expected an object {epsilon, max_atoms}")
            _check_keys(value, {"epsilon", "max_atoms"}, sub(key))
            eps = _as_number(value.get("epsilon", 1e-10), f"{sub(key)}.epsilon")
            cap = value.get("max_atoms")
            if cap is not None:
                cap = _as_int(cap, f"{sub(key)}.max_atoms")
                if cap < 1:
                    _fail(f"{sub(key)}.max_atoms", "must be at least 1")
            if eps <= 0 and cap is None:
                _fail(f"{sub(key)}.epsilon", "epsilon <= 0 requires max_atoms")
            params[key] = {"epsilon": eps, "max_atoms": cap}
        elif key == "density":
            if not isinstance(value, dict):
                _fail(sub(key), "expected an object")
            _check_keys(value, {"l1", "l2", "grid_lo", "grid_hi", "grid_points"}, sub(key))
            merged = dict(_FAMILY_DEFAULTS["density"]["density"])
            for k, v in value.items():
                merged[k] = (
                    _as_int(v, f"{sub(key)}.{k}")
                    if k == "grid_points"
                    else _as_number(v, f"{sub(key)}.{k}")
                )
            if not (0 < merged["l1"] and 0 < merged["l2"] and merged["l1"] + merged["l2"] < 1):
                _fail(sub(key), "needs l1 > 0, l2 > 0, l1 + l2 < 1")
            if merged["grid_points"] < 2 or not merged["grid_lo"] < merged["grid_hi"]:
                _fail(sub(key), "grid needs grid_lo < grid_hi and at least 2 points")
            params[key] = merged
        elif key == "quadrature":
            if not isinstance(value, dict):
                _fail(sub(key), "expected an object")
            _check_keys(value, {"half_width", "n_start", "n_max", "tol"}, sub(key))
            merged = dict(_FAMILY_DEFAULTS["density"]["quadrature"])
            for k, v in value.items():
                merged[k] = (
                    _as_int(v, f"{sub(key)}.{k}")
                    if k in ("n_start", "n_max")
                    else _as_number(v, f"{sub(key)}.{k}")
                )
            try:
                QuadratureSpec(**merged)
            except Exception as exc:
                _fail(sub(key), str(exc))
            params[key] = merged
        elif key == "data":
            if value is None:
                params[key] = None
                continue
            if not isinstance(value, list):
                _fail(sub(key), "expected a list of numbers or null")
            params[key] = [_as_number(v, f"{sub(key)}[{i}]") for i, v in enumerate(value)]
        elif key == "data_file":
            if value is not None and not isinstance(value, str):
                _fail(sub(key), "expected a path string or null")
            params[key] = value
        elif key == "tolerance_overrides":
            if not isinstance(value, dict):
                _fail(sub(key), "expected an object")
            _check_keys(value, set(_DEFAULT_TOLERANCES), sub(key))
            for k, v in value.items():
                v = _as_number(v, f"{sub(key)}.{k}")
                if v <= 0:
                    _fail(f"{sub(key)}.{k}", "must be positive")
                params["tolerance_overrides"][k] = v
    if family == "posterior" and params.get("data_file"):
        if raw.get("data") is not None:
            _fail(sub("data_file"), "give either data or data_file, not both")
        params["data"] = None  # the file is the single source
    return params


@dataclass
class ExperimentConfig:
    """A fully resolved, validated experiment configuration."""

    experiment: str
    seed: int
    output_dir: str
    family_params: dict[str, dict]

    def echo(self) -> dict:
        """The effective config: re-validates to an identical run."""
        out = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }
        if self.experiment == "all":
            out["families"] = json.loads(json.dumps(self.family_params))
        else:
            out.update(json.loads(json.dumps(self.family_params[self.experiment])))
        return out

    @property
    def families(self) -> list[str]:
        return list(self.family_params)


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config dict; raises ConfigError with the field path."""
    if not isinstance(raw, dict):
        _fail("", "config must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"must be {SCHEMA_VERSION}")
    experiment = raw.get("experiment")
    if experiment not in FAMILIES + ("all",):
        _fail("experiment", f"must be one of {', '.join(FAMILIES + ('all',))}")
    if "seed" not in raw:
        _fail("seed", "required")
    seed = _as_int(raw["seed"], "seed")
    output_dir = raw.get("output_dir", "dplab-out")
    if not isinstance(output_dir, str) or not output_dir:
        _fail("output_dir", "expected a non-empty string")

    if experiment == "all":
        _check_keys(raw, _TOP_KEYS, "")
        families_raw = raw.get("families", {})
        if not isinstance(families_raw, dict):
            _fail("families", "expected an object keyed by family name")
        for name in families_raw:
            if name not in FAMILIES:
                _fail(f"families.{name}", "unknown experiment family")
        family_params = {
            name: _validate_family_params(name, families_raw.get(name, {}), f"families.{name}")
            for name in FAMILIES
        }
    else:
        if "families" in raw:
            _fail("families", "only valid when experiment is 'all'")
        _check_keys(raw, (_TOP_KEYS - {"families"}) | _FAMILY_KEYS[experiment], "")
        flat = {k: v for k, v in raw.items() if k in _FAMILY_KEYS[experiment]}
        family_params = {experiment: _validate_family_params(experiment, flat, "")}
    return ExperimentConfig(experiment, seed, output_dir, family_params)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"not valid JSON: {exc}") from exc
    return validate_config(raw)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _build_base(spec: dict) -> BaseMeasure:
    if spec["label"] == "uniform":
        return uniform_base()
    if spec["label"] == "exponential":
        return exponential_base(spec["rate"])
    return normal_base(spec["mu"], spec["sigma"])


def _build_sets(spec: list) -> list[BorelSet]:
    return [BorelSet(tuple(tuple(p) for p in s)) for s in spec]


def _build_trunc(spec: dict) -> TruncationPolicy:
    return TruncationPolicy(spec["epsilon"], spec["max_atoms"])


def _load_data(params: dict, config_dir: Path | None) -> list[float]:
    if params.get("data_file"):
        path = Path(params["data_file"])
        if config_dir is not None and not path.is_absolute():
            path = config_dir / path
        values = [float(line) for line in path.read_text().split()]
        return values
    return list(params.get("data") or [])


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DensityFamilyResult:
    """Density-convergence table plus the record-keeping extras: the limit
    density at the origin and the quadrature of the exact density per a."""

    table: verify.DensityTable
    limit_at_origin: float
    integrals: dict[str, tuple[float, float]]

    @property
    def passed(self) -> bool:
        ok = all(abs(v - 1.0) <= 1e-3 for v, _ in self.integrals.values())
        return self.table.passed and ok


@dataclass(eq=False)
class RunReport:
    """Everything one run produced, ready for emission."""

    config_echo: dict
    results: dict[str, object]
    family_passed: dict[str, bool]
    overall_pass: bool
    wall_clock_seconds: float
    manifest: list[str] = field(default_factory=list)


def _run_family(family: str, params: dict, seed: int, config_dir: Path | None):
    base_stream = FAMILY_STREAM_BASE[family]
    tol = params.get("tolerance_overrides", _DEFAULT_TOLERANCES)
    if family == "moments":
        return verify.moment_check(
            params["a"],
            _build_base(params["base_measure"]),
            _build_sets(params["sets"]),
            params["replications"],
            seed,
            base_stream=base_stream,
            mean_tol=tol["mean"],
            moment_tol=tol["moment"],
        )
    if family == "fidi":
        return verify.fidi_normality_check(
            params["a"],
            _build_sets(params["sets"]),
            params["replications"],
            seed,
            base_stream=base_stream,
            tol=tol["moment"],
            ks_level=tol["ks_level"],
        )
    if family == "modulus":
        pts = params["modulus"]
        return verify.modulus_check(
            params["a"],
            pts["t1"],
            pts["t"],
            pts["t2"],
            params["replications"],
            seed,
            base_stream=base_stream,
            tol=tol["moment"],
        )
    if family == "gc":
        return verify.gc_study(
            params["a_values"],
            _build_base(params["base_measure"]),
            params["replications"],
            params["gc_grid_resolution"],
            seed,
            trunc=_build_trunc(params["truncation"]),
            base_stream=base_stream,
        )
    if family == "quantile":
        return verify.quantile_limit_study(
            params["a_values"],
            _build_base(params["base_measure"]),
            params["u_points"],
            params["replications"],
            seed,
            trunc=_build_trunc(params["truncation"]),
            tol=tol["variance"],
            ks_level=tol["ks_level"],
            base_stream=base_stream,
        )
    if family == "density":
        d = params["density"]
        quad = QuadratureSpec(**params["quadrature"])
        grid = Grid(np.linspace(d["grid_lo"], d["grid_hi"], d["grid_points"]))
        table = verify.density_convergence_study(
            d["l1"], d["l2"], params["a_values"], grid, quad
        )
        spec = BivariateGaussianSpec.from_cell_measures(d["l1"], d["l2"])
        integrals = {}
        for a in params["a_values"]:
            est = bivariate_density_integral(d["l1"], d["l2"], a, quad)
            integrals[f"a={a:g}"] = (est.value, est.quad_error)
        return DensityFamilyResult(
            table, float(limit_bivariate_density(0.0, 0.0, spec)), integrals
        )
    if family == "posterior":
        return verify.posterior_check(
            params["a"],
            _build_base(params["base_measure"]),
            _load_data(params, config_dir),
            _build_sets(params["sets"]),
            params["replications"],
            seed,
            base_stream=base_stream,
            tol=tol["moment"],
        )
    raise ConfigError("experiment", f"unknown family {family!r}")


def _family_passed(family: str, result) -> bool:
    if isinstance(result, verify.McSummary):
        return result.passed
    if isinstance(result, verify.GcCurve):
        decreasing = bool(np.all(np.diff(result.mean_sup) < 0.0))
        rate_ok = GC_RATE_WINDOW[0] <= result.fitted_rate <= GC_RATE_WINDOW[1]
        return decreasing and rate_ok and result.dl_violations == 0
    if isinstance(result, DensityFamilyResult):
        return result.passed
    raise TypeError(f"no pass rule for {type(result)!r}")


def run_experiment(config: ExperimentConfig, config_dir: Path | None = None) -> RunReport:
    """Dispatch every configured family and collect results (no files written)."""
    start = time.perf_counter()
    results: dict[str, object] = {}
    family_passed: dict[str, bool] = {}
    for family in config.families:
        result = _run_family(family, config.family_params[family], config.seed, config_dir)
        results[family] = result
        family_passed[family] = _family_passed(family, result)
    return RunReport(
        config_echo=config.echo(),
        results=results,
        family_passed=family_passed,
        overall_pass=all(family_passed.values()),
        wall_clock_seconds=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _summary_rows(summary: verify.McSummary) -> list[list]:
    rows = []
    for name, (value, se) in summary.estimates.items():
        rows.append(["estimate", name, value, se, None, None, None, None])
    for c in summary.comparisons:
        rows.append(
            ["comparison", c.name, c.estimate, c.standard_error, c.target, c.tolerance_se, c.one_sided, c.passed]
        )
    for c in summary.level_checks:
        rows.append(["level_check", c.name, c.statistic, None, c.level, None, None, c.passed])
    return rows

_SUMMARY_HEADER = ["kind", "name", "estimate", "se", "target", "tolerance_se", "one_sided", "passed"]


def emit_report(report: RunReport, out_dir: str | Path, formats=("csv", "json-summary")) -> list[str]:
    """Write one CSV per result table plus the JSON summary; returns the
    manifest of files written (also recorded in the report)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: list[str] = []

    def emit_csv(name: str, header, rows) -> None:
        _write_csv(out / name, header, rows)
        manifest.append(name)

    if "csv" in formats:
        for family, result in report.results.items():
            if isinstance(result, verify.McSummary):
                emit_csv(f"{family}_summary.csv", _SUMMARY_HEADER, _summary_rows(result))
            elif isinstance(result, verify.GcCurve):
                emit_csv(
                    "gc_curve.csv",
                    ["a", "mean_sup", "se_sup", "mean_cvm", "se_cvm"],
                    [
                        [result.a_values[i], result.mean_sup[i], result.se_sup[i], result.mean_cvm[i], result.se_cvm[i]]
                        for i in range(len(result.a_values))
                    ],
                )
                emit_csv(
                    "gc_summary.csv",
                    ["name", "value"],
                    [
                        ["fitted_rate", result.fitted_rate],
                        ["dl_checked", result.dl_checked],
                        ["dl_violations", result.dl_violations],
                        ["passed", report.family_passed[family]],
                    ],
                )
            elif isinstance(result, DensityFamilyResult):
                emit_csv(
                    "density_gap.csv",
                    ["a", "max_gap", "tv_distance", "quad_error"],
                    [[r.a, r.max_gap, r.tv_distance, r.quad_error] for r in result.table.rows],
                )
                rows = [
                    ["limit_density_at_origin", result.limit_at_origin],
                    ["gap_nonincreasing", result.table.gap_nonincreasing],
                    ["tv_nonincreasing", result.table.tv_nonincreasing],
                ]
                rows += [
                    [f"integral[{tag}]", value] for tag, (value, _) in result.integrals.items()
                ]
                rows.append(["passed", report.family_passed[family]])
                emit_csv("density_summary.csv", ["name", "value"], rows)

    if "json-summary" in formats:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": report.config_echo,
            "results": {f: _serialize_result(r) for f, r in report.results.items()},
            "family_passed": report.family_passed,
            "pass": report.overall_pass,
            "wall_clock_seconds": report.wall_clock_seconds,
            "manifest": manifest + ["report.json"],
        }
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest.append("report.json")

    report.manifest = manifest
    return manifest


def _serialize_result(result) -> dict:
    if isinstance(result, verify.McSummary):
        return {
            "type": "mc_summary",
            "replications": result.replications,
            "seed_info": {
                "master_seed": result.seed_info[0],
                "stream_range": list(result.seed_info[1]),
            },
            "estimates": {k: [v, se] for k, (v, se) in result.estimates.items()},
            "comparisons": [
                {
                    "name": c.name,
                    "estimate": c.estimate,
                    "se": c.standard_error,
                    "target": c.target,
                    "tolerance_se": c.tolerance_se,
                    "one_sided": c.one_sided,
                    "pass": c.passed,
                }
                for c in result.comparisons
            ],
            "level_checks": [
                {
                    "name": c.name,
                    "statistic": c.statistic,
                    "p_value": c.p_value,
                    "level": c.level,
                    "pass": c.passed,
                }
                for c in result.level_checks
            ],
            "pass": result.passed,
        }
    if isinstance(result, verify.GcCurve):
        return {
            "type": "gc_curve",
            "a_values": result.a_values.tolist(),
            "mean_sup": result.mean_sup.tolist(),
            "se_sup": result.se_sup.tolist(),
            "mean_cvm": result.mean_cvm.tolist(),
            "se_cvm": result.se_cvm.tolist(),
            "fitted_rate": result.fitted_rate,
            "dl_checked": result.dl_checked,
            "dl_violations": result.dl_violations,
        }
    if isinstance(result, DensityFamilyResult):
        return {
            "type": "density_table",
            "rows": [
                {
                    "a": r.a,
                    "max_gap": r.max_gap,
                    "tv_distance": r.tv_distance,
                    "quad_error": r.quad_error,
                }
                for r in result.table.rows
            ],
            "gap_nonincreasing": result.table.gap_nonincreasing,
            "tv_nonincreasing": result.table.tv_nonincreasing,
            "limit_density_at_origin": result.limit_at_origin,
            "integrals": {k: list(v) for k, v in result.integrals.items()},
        }
    raise TypeError(f"cannot serialize {type(result)!r}")
