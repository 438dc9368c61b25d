"""Configuration-driven runner: parse a sectioned config, execute the task,
write machine-readable results.

The config document is INI-style (see README for the full grammar): a
``[task]`` section picks the operation, ``[geometry]`` + ``[medium.NAME]``
sections declare the arrangement, ``[spectrum]`` the discretization, and
optional ``[sweep]``/``[planar]``/``[output]`` sections steer batch runs.

Outputs are an RFC-4180 CSV with one row per sweep point (fixed column
order) plus a JSON diagnostics sidecar per run; outputs are byte-identical
for identical configs.  Exit codes: 0 success, 1 config error, 2 undefined
sign class without override, 3 convergence failure (diagnostics still
written).  ``CASIMIR_THREADS`` caps the sweep worker count.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .energetics import (
    Geometry,
    SpectrumSpec,
    interaction_energy,
    interaction_pressure,
    matsubara_free_energy,
    planar_limit_force,
    total_pressure,
)
from .errors import (
    ConfigError,
    ContractionError,
    ConvergenceError,
    UndefinedSignError,
)
from .harness import THEOREM_IDS, run_sign_suite
from .media import ResponseModel

__all__ = ["RunConfig", "MediumSpec", "parse_config", "run", "main"]

_TASKS = ("energy", "pressure", "total_pressure", "free_energy", "planar_limit", "check")
_METHODS = ("calogero_analytic", "finite_difference")

_CSV_COLUMNS = [
    "task", "r1", "r2",
    "eps1_kind", "eps1_params", "eps2_kind", "eps2_params",
    "epsM_kind", "epsM_params", "mu2", "temperature",
    "value", "unit", "sign_class", "l_max_used", "n_kappa_used", "converged",
]

_MEDIUM_KINDS = {
    "constant": ("eps",),
    "drude": ("omega_p", "gamma"),
    "lorentz_oscillator": ("eps_static", "omega_0"),
    "two_layer": ("eps_core", "eps_shell", "r_break"),
    "linear": ("eps_center", "eps_surface"),
}

_SECTION_KEYS = {
    "task": {"kind", "method", "allow_undefined_sign", "theorems", "trials", "seed"},
    "geometry": {"r1", "r2", "sphere", "wall", "gap"},
    "spectrum": {"temperature", "n_kappa", "l_max", "l_tail_tol", "quad_tol"},
    "planar": {"gap_width", "radius_factors"},
    "sweep": {"parameter", "start", "stop", "count",
              "parameter2", "start2", "stop2", "count2"},
    "output": {"directory", "format"},
}


@dataclass(frozen=True)
class MediumSpec:
    """Declarative response-model description from a [medium.NAME] section."""

    name: str
    kind: str
    params: dict
    mu: float = 1.0

    def build(self, r1: float) -> ResponseModel:
        p = self.params
        mu = None if self.mu == 1.0 else self.mu
        if self.kind == "constant":
            return ResponseModel.constant(p["eps"], mu=mu, label=self.name)
        if self.kind == "drude":
            return ResponseModel.drude(p["omega_p"], p["gamma"], mu=mu, label=self.name)
        if self.kind == "lorentz_oscillator":
            return ResponseModel.lorentz(p["eps_static"], p["omega_0"], mu=mu,
                                         label=self.name)
        if self.kind == "two_layer":
            return ResponseModel.two_layer(p["eps_core"], p["eps_shell"],
                                           p["r_break"], r_max=r1, mu=mu,
                                           label=self.name)
        if self.kind == "linear":
            return ResponseModel.linear(p["eps_center"], p["eps_surface"],
                                        r_max=r1, mu=mu, label=self.name)
        raise ConfigError([f"unknown medium kind {self.kind!r}"])

    def describe(self):
        params = ";".join(f"{k}={v!r}" for k, v in self.params.items())
        return self.kind, params


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description."""

    task: str
    method: str = "calogero_analytic"
    allow_undefined_sign: bool = False
    r1: float = 1.0
    r2: float = 2.0
    sphere: str = ""
    wall: str = ""
    gap: str = ""
    media: dict = field(default_factory=dict)
    temperature: float = 0.0
    n_kappa: int = 64
    l_max: int = 200
    l_tail_tol: float = 1e-9
    quad_tol: float = 1e-8
    planar_gap: float = 0.0
    planar_factors: tuple = (10.0, 30.0, 100.0)
    sweep: tuple = ()
    output_dir: str = "."
    output_format: str = "csv"
    theorems: tuple = ()
    trials: int = 100
    seed: int = 0


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document.

    Raises ConfigError carrying the complete list of validation problems
    (not just the first) when anything is wrong.
    """
    errors = []
    cfg = configparser.ConfigParser(interpolation=None)
    try:
        cfg.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax error: {exc}"]) from exc

    def get(section, key, conv, default=None, required=False):
        if not cfg.has_option(section, key):
            if required:
                errors.append(f"missing required key {section}.{key}")
            return default
        raw = cfg.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError):
            errors.append(f"invalid value for {section}.{key}: {raw!r}")
            return default

    for section in cfg.sections():
        base = section.split(".", 1)[0]
        if base == "medium":
            if "." not in section:
                errors.append("medium sections must be named [medium.NAME]")
            continue
        if section not in _SECTION_KEYS:
            errors.append(f"unknown section [{section}]")
            continue
        for key in cfg.options(section):
            if key not in _SECTION_KEYS[section]:
                errors.append(f"unknown key {section}.{key}")

    task = get("task", "kind", str, required=True) if cfg.has_section("task") else None
    if task is None and not cfg.has_section("task"):
        errors.append("missing [task] section")
    if task is not None and task not in _TASKS:
        errors.append(f"unknown task {task!r}; expected one of {', '.join(_TASKS)}")
    method = get("task", "method", str, default="calogero_analytic")
    if method not in _METHODS:
        errors.append(f"unknown method {method!r}")
    allow_undef = get("task", "allow_undefined_sign", _parse_bool, default=False)
    trials = get("task", "trials", int, default=100)
    seed = get("task", "seed", int, default=0)
    theorems = ()
    if cfg.has_option("task", "theorems"):
        raw = [t.strip() for t in cfg.get("task", "theorems").split(",") if t.strip()]
        for t in raw:
            if t not in THEOREM_IDS:
                errors.append(f"unknown theorem id {t!r}")
        theorems = tuple(raw)

    media = {}
    for section in cfg.sections():
        if not section.startswith("medium."):
            continue
        name = section.split(".", 1)[1]
        kind = get(section, "kind", str, required=True)
        if kind is not None and kind not in _MEDIUM_KINDS:
            errors.append(f"unknown medium kind {kind!r} in [{section}]")
            continue
        params = {}
        if kind is not None:
            for pname in _MEDIUM_KINDS[kind]:
                value = get(section, pname, float, required=True)
                if value is not None:
                    params[pname] = value
            for key in cfg.options(section):
                if key not in ("kind", "mu") + _MEDIUM_KINDS[kind]:
                    errors.append(f"unknown key {section}.{key}")
        mu = get(section, "mu", float, default=1.0)
        media[name] = MediumSpec(name, kind or "constant", params, mu)

    needs_geometry = task not in ("check", "planar_limit", None)
    r1 = get("geometry", "r1", float, default=1.0, required=needs_geometry)
    r2 = get("geometry", "r2", float, default=2.0, required=needs_geometry)
    sphere = get("geometry", "sphere", str, default="", required=needs_geometry)
    wall = get("geometry", "wall", str, default="", required=needs_geometry)
    gap = get("geometry", "gap", str, default="", required=needs_geometry)
    if needs_geometry or task == "planar_limit":
        for role, name in (("sphere", sphere), ("wall", wall), ("gap", gap)):
            if name and name not in media:
                errors.append(f"geometry.{role} references undeclared medium {name!r}")
    if needs_geometry and r1 is not None and r2 is not None and r1 >= r2:
        errors.append(f"geometry invariant violated: need r1 < r2, got r1={r1}, r2={r2}")

    temperature = get("spectrum", "temperature", float, default=0.0)
    n_kappa = get("spectrum", "n_kappa", int, default=64)
    l_max = get("spectrum", "l_max", int, default=200)
    l_tail_tol = get("spectrum", "l_tail_tol", float, default=1e-9)
    quad_tol = get("spectrum", "quad_tol", float, default=1e-8)
    if temperature is not None and temperature < 0.0:
        errors.append("spectrum.temperature must be >= 0")
    if n_kappa is not None and n_kappa < 8:
        errors.append("spectrum.n_kappa must be >= 8")
    if task == "free_energy" and temperature == 0.0:
        errors.append("free_energy task requires spectrum.temperature > 0")
    if task == "energy" and temperature and temperature > 0.0:
        errors.append("energy task is the zero-temperature path; "
                      "use free_energy for temperature > 0")

    if task == "total_pressure" and gap in media:
        gspec = media[gap]
        if gspec.kind != "constant" or gspec.params.get("eps") != 1.0 or gspec.mu != 1.0:
            errors.append("total_pressure requires a vacuum gap medium (constant eps=1)")

    planar_gap = get("planar", "gap_width", float, default=0.0)
    planar_factors = (10.0, 30.0, 100.0)
    if cfg.has_option("planar", "radius_factors"):
        try:
            planar_factors = tuple(
                float(v) for v in cfg.get("planar", "radius_factors").split(",")
            )
        except ValueError:
            errors.append("planar.radius_factors must be a comma-separated float list")
    if task == "planar_limit":
        if not cfg.has_section("planar") or not planar_gap or planar_gap <= 0.0:
            errors.append("planar_limit task requires [planar] gap_width > 0")
        for role, name in (("sphere", sphere), ("wall", wall), ("gap", gap)):
            if name in media and media[name].kind != "constant":
                errors.append(f"planar_limit requires constant media ({role} is not)")

    sweep = []
    if cfg.has_section("sweep"):
        for suffix in ("", "2"):
            if not cfg.has_option("sweep", f"parameter{suffix}"):
                if suffix == "":
                    errors.append("sweep section needs a 'parameter' key")
                continue
            path = cfg.get("sweep", f"parameter{suffix}").strip()
            start = get("sweep", f"start{suffix}", float, required=True)
            stop = get("sweep", f"stop{suffix}", float, required=True)
            count = get("sweep", f"count{suffix}", int, required=True)
            if count is not None and count < 1:
                errors.append(f"sweep.count{suffix} must be >= 1")
            if not _sweep_path_ok(path, media):
                errors.append(f"sweep parameter {path!r} does not name a numeric field")
            if None not in (start, stop, count) and count >= 1:
                sweep.append((path, _linspace(start, stop, count)))

    output_dir = get("output", "directory", str, default=".")
    output_format = get("output", "format", str, default="csv")
    if output_format not in ("csv",):
        errors.append(f"unsupported output format {output_format!r}")

    if errors:
        raise ConfigError(errors)
    return RunConfig(
        task=task, method=method, allow_undefined_sign=allow_undef,
        r1=r1, r2=r2, sphere=sphere, wall=wall, gap=gap, media=media,
        temperature=temperature, n_kappa=n_kappa, l_max=l_max,
        l_tail_tol=l_tail_tol, quad_tol=quad_tol,
        planar_gap=planar_gap or 0.0, planar_factors=planar_factors,
        sweep=tuple(sweep), output_dir=output_dir, output_format=output_format,
        theorems=theorems or THEOREM_IDS[:2], trials=trials, seed=seed,
    )


def _linspace(start, stop, count):
    if count == 1:
        return (float(start),)
    step = (stop - start) / (count - 1)
    return tuple(float(start + i * step) for i in range(count))


def _sweep_path_ok(path, media):
    if path in ("r1", "r2", "temperature"):
        return True
    parts = path.split(".")
    if len(parts) == 3 and parts[0] == "medium":
        _, name, param = parts
        return name in media and (param in media[name].params or param == "mu")
    return False


def _apply_sweep(config: RunConfig, assignments):
    cfg = config
    for path, value in assignments:
        if path == "r1":
            cfg = replace(cfg, r1=value)
        elif path == "r2":
            cfg = replace(cfg, r2=value)
        elif path == "temperature":
            cfg = replace(cfg, temperature=value)
        else:
            _, name, param = path.split(".")
            spec = cfg.media[name]
            if param == "mu":
                spec = replace(spec, mu=value)
            else:
                spec = replace(spec, params={**spec.params, param: value})
            cfg = replace(cfg, media={**cfg.media, name: spec})
    return cfg


def _spectrum_for(config: RunConfig) -> SpectrumSpec:
    common = dict(
        n_kappa=config.n_kappa, l_max=config.l_max,
        l_tail_tol=config.l_tail_tol, quad_tol=config.quad_tol,
        keep_ledger=False,
    )
    if config.temperature and config.temperature > 0.0:
        return SpectrumSpec.matsubara(config.temperature, **common)
    return SpectrumSpec.zero_temperature(**common)


def _geometry_for(config: RunConfig) -> Geometry:
    return Geometry(
        config.r1, config.r2,
        config.media[config.sphere].build(config.r1),
        config.media[config.wall].build(config.r1),
        config.media[config.gap].build(config.r1),
    )


def _row_skeleton(config: RunConfig):
    row = dict.fromkeys(_CSV_COLUMNS, "")
    row["task"] = config.task
    if config.task in ("check",):
        return row
    s_kind, s_params = config.media[config.sphere].describe()
    w_kind, w_params = config.media[config.wall].describe()
    g_kind, g_params = config.media[config.gap].describe()
    row.update({
        "r1": repr(config.r1), "r2": repr(config.r2),
        "eps1_kind": s_kind, "eps1_params": s_params,
        "eps2_kind": w_kind, "eps2_params": w_params,
        "epsM_kind": g_kind, "epsM_params": g_params,
        "mu2": repr(config.media[config.wall].mu),
        "temperature": repr(config.temperature),
    })
    return row


def _execute_point(config: RunConfig):
    """Run one sweep point; returns (row dict, diagnostics dict)."""
    row = _row_skeleton(config)
    spectrum = _spectrum_for(config)
    geometry = _geometry_for(config)
    if config.task == "energy":
        report = interaction_energy(geometry, spectrum, config.allow_undefined_sign)
    elif config.task == "free_energy":
        report = matsubara_free_energy(geometry, spectrum, config.allow_undefined_sign)
    elif config.task == "pressure":
        report = interaction_pressure(geometry, spectrum, config.method,
                                      config.allow_undefined_sign)
    elif config.task == "total_pressure":
        report = total_pressure(geometry, spectrum, config.allow_undefined_sign)
    else:
        raise ConfigError([f"task {config.task!r} is not a sweep task"])
    row.update({
        "value": repr(report.value),
        "unit": report.unit,
        "sign_class": repr(report.sign_class.s),
        "l_max_used": repr(report.l_max_used),
        "n_kappa_used": repr(report.n_kappa_used),
        "converged": "true" if report.converged else "false",
    })
    return row, dict(report.diagnostics)


def _run_planar(config: RunConfig):
    eps1 = config.media[config.sphere].params["eps"]
    eps2 = config.media[config.wall].params["eps"]
    eps_m = config.media[config.gap].params["eps"]
    d = config.planar_gap
    ladder = [f * d for f in config.planar_factors]
    report = planar_limit_force(
        d, eps1, eps2, eps_m, ladder,
        n_kappa=config.n_kappa, l_max=config.l_max, l_tail_tol=config.l_tail_tol,
    )
    row = _row_skeleton(config)
    biggest = max(ladder)
    s = (eps1 - eps_m) * (eps2 - eps_m)
    row.update({
        "r1": repr(biggest), "r2": repr(biggest + d),
        "value": repr(report.force), "unit": "inverse_length^4",
        "sign_class": repr(int(math.copysign(1.0, s)) if s != 0.0 else 0),
        "l_max_used": repr(config.l_max),
        "n_kappa_used": repr(config.n_kappa),
        "converged": "true" if report.converged else "false",
    })
    diag = {
        "extrapolated_force": report.force,
        "extrapolated_sign": report.sign,
        "gap_width": d,
        "table": list(report.table),
    }
    return row, diag


def _run_check(config: RunConfig, out_dir, quiet):
    rows = []
    diagnostics = {"task": "check", "seed": config.seed, "trials": config.trials,
                   "reports": {}}
    worst = 0
    for theorem in config.theorems:
        if not quiet:
            print(f"running {theorem} suite ({config.trials} trials)", file=sys.stderr)
        report = run_sign_suite(theorem, config.trials, config.seed)
        diagnostics["reports"][theorem] = {
            "trials": report.trials,
            "failures": list(report.failures),
            "passed": report.passed,
        }
        row = dict.fromkeys(_CSV_COLUMNS, "")
        row.update({
            "task": "check",
            "value": repr(len(report.failures)),
            "unit": "failures",
            "n_kappa_used": repr(report.trials),
            "converged": "true" if report.passed else "false",
        })
        rows.append(row)
        for i, failure in enumerate(report.failures):
            worst = max(worst, 1)
            path = os.path.join(out_dir, f"counterexample_{theorem}_{i}.json")
            with open(path, "w") as handle:
                json.dump(failure, handle, sort_keys=True, indent=2, default=repr)
    return rows, diagnostics, worst


def _threads():
    raw = os.environ.get("CASIMIR_THREADS", "")
    try:
        n = int(raw)
        if n >= 1:
            return n
    except ValueError:
        pass
    return min(4, os.cpu_count() or 1)


def _sweep_points(config: RunConfig):
    if not config.sweep:
        return [()]
    if len(config.sweep) == 1:
        path, values = config.sweep[0]
        return [((path, v),) for v in values]
    (p1, v1), (p2, v2) = config.sweep
    return [((p1, a), (p2, b)) for a in v1 for b in v2]


def run(config: RunConfig, output_dir=None, quiet=False) -> int:
    """Execute a validated RunConfig; writes results.csv + diagnostics.json.

    Returns the process exit code (0 ok, 2 undefined sign class, 3
    convergence/contraction failure).  Sweep points run concurrently but the
    output order is fixed by the sweep grid, so files are deterministic.
    """
    out_dir = output_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    diagnostics = {"task": config.task, "points": [], "errors": []}
    exit_code = 0

    if config.task == "check":
        rows, diag, worst = _run_check(config, out_dir, quiet)
        diagnostics.update(diag)
        exit_code = 0 if worst == 0 else 3
    elif config.task == "planar_limit":
        try:
            row, diag = _run_planar(config)
            rows.append(row)
            diagnostics["points"].append(diag)
        except (ConvergenceError, ContractionError) as exc:
            diagnostics["errors"].append(str(exc))
            exit_code = 3
        except UndefinedSignError as exc:
            diagnostics["errors"].append(str(exc))
            exit_code = 2
    else:
        assignments = _sweep_points(config)
        configs = [_apply_sweep(config, a) for a in assignments]

        def job(point_config):
            try:
                return _execute_point(point_config), None
            except UndefinedSignError as exc:
                return None, (2, str(exc))
            except (ConvergenceError, ContractionError) as exc:
                return None, (3, str(exc))

        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            outcomes = list(pool.map(job, configs))
        for index, (outcome, failure) in enumerate(outcomes):
            if failure is None:
                row, diag = outcome
                rows.append(row)
                diagnostics["points"].append(
                    {"index": index, "sweep": list(assignments[index]), **diag}
                )
            else:
                code, message = failure
                exit_code = max(exit_code, code)
                row = _row_skeleton(configs[index])
                row["converged"] = "false"
                rows.append(row)
                diagnostics["errors"].append({"index": index, "error": message})
            if not quiet and len(configs) > 1:
                print(f"point {index + 1}/{len(configs)} done", file=sys.stderr)

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_CSV_COLUMNS, lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as handle:
        handle.write(buffer.getvalue())
    with open(os.path.join(out_dir, "diagnostics.json"), "w") as handle:
        json.dump(diagnostics, handle, sort_keys=True, indent=2, default=repr)
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="casimir-cavity",
        description="Casimir-Lifshitz energies and pressures for a sphere in "
                    "a spherical cavity",
    )
    parser.add_argument("--config", required=True, help="path to the run config")
    parser.add_argument("--output", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="check-task seed override")
    parser.add_argument("--lmax", type=int, default=None, help="multipole cap override")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="override the multipole tail and quadrature tolerances")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as handle:
            text = handle.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text)
    except ConfigError as exc:
        for problem in exc.errors:
            print(f"config error: {problem}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.lmax is not None:
        config = replace(config, l_max=args.lmax)
    if args.tolerance is not None:
        config = replace(config, l_tail_tol=args.tolerance, quad_tol=args.tolerance)
    return run(config, output_dir=args.output, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
