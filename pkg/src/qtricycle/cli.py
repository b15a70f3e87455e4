"""Command-line front end: config ingestion, sweeps, CSV/JSON emission.

Configuration is flat ``key = value`` text (one pair per line, ``#``
comments); every key has a default, so the empty config runs each
subcommand at the standard operating point.  Each subcommand writes one
plot-ready report file (CSV rows or a JSON object with a ``meta`` block)
and prints its headline numbers as ``name = value`` lines on stdout.

Exit codes: 0 success, 2 configuration problem, 3 solver non-convergence
(a ``*.diagnostic.txt`` file enumerating the failed grid points is written
alongside the report path in that case).

``TRICYCLE_THREADS`` caps the worker count used for the alpha sweeps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__, cycle, optimize, oracle, protocol, thermo
from .errors import ConfigError, ConvergenceError
from .protocol import TricycleConfig

__all__ = ["RunConfig", "parse_config", "run", "emit_report", "main"]

SUBCOMMANDS = (
    "branch", "cycle", "ts-diagram", "sweep-times", "optimal-curve",
    "alpha-sweep", "envelope", "time-allocation", "reversible-delta",
    "oracle-check",
)

# key -> (kind, default); kind in {"float", "int", "str", "float?", "floats"}
_KEYS = {
    "T_c": ("float", 0.2),
    "T_h": ("float", 1.0),
    "T_p": ("float", 0.5),
    "zeta_c": ("float", 2.0),
    "zeta_h": ("float", 2.0),
    "delta_c": ("float", 0.5333),
    "gamma0": ("float", 1.0),
    "alpha": ("float", 0.0),
    "tau_c": ("float", 9.0),
    "tau_p": ("float", 11.0),
    "tau_h": ("float?", None),          # derived from energy balance when unset
    "tau_c_min": ("float", 0.3),
    "tau_c_max": ("float", 3000.0),
    "tau_c_points": ("int", 120),
    "sweep_tau_c_min": ("float", 1.0),
    "sweep_tau_c_max": ("float", 60.0),
    "sweep_tau_c_points": ("int", 60),
    "sweep_tau_p_min": ("float", 1.0),
    "sweep_tau_p_max": ("float", 60.0),
    "sweep_tau_p_points": ("int", 60),
    "alpha_min": ("float", -0.5),
    "alpha_max": ("float", 1.5),
    "alpha_points": ("int", 101),
    "envelope_alpha_points": ("int", 61),
    "psi_points": ("int", 40),
    "psi_min": ("float?", None),
    "psi_max": ("float?", None),
    "alpha_chi": ("float?", None),      # skip the alpha sweep when both given
    "alpha_r": ("float?", None),
    "delta_min": ("float", 0.01),
    "delta_max": ("float", 2.0),
    "delta_points": ("int", 400),
    "samples_per_branch": ("int", 201),
    "oracle_branch": ("str", "c"),
    "oracle_taus": ("floats", (100.0, 200.0, 400.0)),
    "quad_rtol": ("float", 1e-9),
    "out": ("str?", None),
    "format": ("str", "csv"),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one CLI invocation."""

    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    def tricycle(self):
        v = self.values
        return TricycleConfig(
            T_c=v["T_c"], T_h=v["T_h"], T_p=v["T_p"],
            zeta_c=v["zeta_c"], zeta_h=v["zeta_h"], delta_c=v["delta_c"],
            gamma0=v["gamma0"], alpha=v["alpha"],
        )


def _parse_value(key, raw):
    kind = _KEYS[key][0]
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "float?":
            return None if raw == "" else float(raw)
        if kind == "floats":
            return tuple(float(part) for part in raw.split(",") if part.strip())
        return raw  # "str", "str?"
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for key {key!r} as {kind}") from None


def parse_config(text, overrides=()):
    """Parse flat key=value text into a :class:`RunConfig`.

    ``overrides`` are extra ``key=value`` strings (from ``--set``) applied
    after the file.  Unknown keys and invariant violations are errors.
    """
    values = {key: default for key, (_, default) in _KEYS.items()}
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        pairs.append((key.strip(), raw))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        pairs.append((key.strip(), raw))

    for key, raw in pairs:
        if key not in _KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = _parse_value(key, raw)

    rc = RunConfig(values=values)
    rc.tricycle()  # surface invariant violations at parse time
    if values["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {values['format']!r}")
    for key in ("tau_c", "tau_p"):
        if values[key] <= 0.0:
            raise ConfigError(f"{key} must be > 0")
    if values["tau_h"] is not None and values["tau_h"] <= 0.0:
        raise ConfigError("tau_h must be > 0 when given")
    for key in ("tau_c_points", "sweep_tau_c_points", "sweep_tau_p_points",
                "alpha_points", "envelope_alpha_points", "psi_points",
                "delta_points", "samples_per_branch"):
        if values[key] < 2:
            raise ConfigError(f"{key} must be >= 2")
    if values["oracle_branch"] not in ("c", "h", "p"):
        raise ConfigError("oracle_branch must be one of c, h, p")
    return rc


@dataclass(frozen=True)
class ReportPayload:
    columns: list
    rows: list
    meta: dict
    summary: dict


def _fmt_cell(value):
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17e}"
    return str(value)


def _json_safe(value):
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if (np.isnan(v) or np.isinf(v)) else v
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    return value


def emit_report(payload, fmt):
    """Render a payload as CSV rows or a single JSON object (byte-stable)."""
    if fmt == "csv":
        lines = [",".join(payload.columns)]
        lines.extend(",".join(_fmt_cell(v) for v in row) for row in payload.rows)
        return "\n".join(lines) + "\n"
    doc = {
        "meta": _json_safe({**payload.meta, "summary": payload.summary}),
        "columns": list(payload.columns),
        "rows": [[_json_safe(v) for v in row] for row in payload.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qtricycle-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers():
    raw = os.environ.get("TRICYCLE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"TRICYCLE_THREADS must be an integer, got {raw!r}") from None


def _resolved_taus(rc, config, coeffs=None):
    """(tau_c, tau_h, tau_p) with tau_h from the energy balance when unset."""
    tau_c, tau_p = rc.tau_c, rc.tau_p
    tau_h = rc.tau_h
    if tau_h is None:
        tau_h = optimize.balanced_tau_h(config, tau_c, tau_p, coeffs=coeffs)
    return tau_c, tau_h, tau_p


def _run_branch(rc, config):
    coeffs = cycle.cycle_coefficients(config, rtol=rc.quad_rtol)
    tau_c, tau_h, tau_p = _resolved_taus(rc, config, coeffs)
    metrics = cycle.evaluate_cycle(config, tau_c, tau_h, tau_p, coeffs=coeffs)
    rows = [
        (b.reservoir, b.tau, b.dS_eq, b.Sigma, b.Q0, b.Q1, b.Q)
        for b in (metrics.cold, metrics.hot, metrics.pump)
    ]
    columns = ["reservoir", "tau", "dS_eq", "Sigma", "Q0", "Q1", "Q"]
    return columns, rows, {"tau_h_used": tau_h}


def _run_cycle(rc, config):
    coeffs = cycle.cycle_coefficients(config, rtol=rc.quad_rtol)
    tau_c, tau_h, tau_p = _resolved_taus(rc, config, coeffs)
    m = cycle.evaluate_cycle(config, tau_c, tau_h, tau_p, coeffs=coeffs)
    psi_r = cycle.reversible_cop(config.T_c, config.T_h, config.T_p)
    columns = ["tau_c", "tau_h", "tau_p", "Q_c", "Q_h", "Q_p", "psi", "R",
               "chi", "work_residual", "entropy_production", "psi_r", "valid"]
    rows = [(tau_c, tau_h, tau_p, m.cold.Q, m.hot.Q, m.pump.Q, m.psi, m.R,
             m.chi, m.work_residual, m.entropy_production, psi_r, m.valid)]
    summary = {"psi": m.psi, "R": m.R, "chi": m.chi,
               "work_residual": m.work_residual}
    return columns, rows, summary


def _run_ts_diagram(rc, config):
    coeffs = cycle.cycle_coefficients(config, rtol=rc.quad_rtol)
    taus = _resolved_taus(rc, config, coeffs)
    points = thermo.ts_trajectory(config, taus, rc.samples_per_branch)
    columns = ["reservoir", "s", "omega", "T_eff", "S"]
    rows = [(p.reservoir, p.s, p.omega, p.T_eff, p.S) for p in points]
    return columns, rows, {"tau_h_used": taus[1]}


def _run_sweep_times(rc, config):
    coeffs = cycle.cycle_coefficients(config, rtol=rc.quad_rtol)
    tc = np.linspace(rc.sweep_tau_c_min, rc.sweep_tau_c_max, rc.sweep_tau_c_points)
    tp = np.linspace(rc.sweep_tau_p_min, rc.sweep_tau_p_max, rc.sweep_tau_p_points)
    sweep = optimize.free_time_sweep(config, tc, tp, coeffs=coeffs)
    columns = ["tau_c", "tau_p", "tau_h", "R"]
    rows = []
    for i, tau_c in enumerate(tc):
        for j, tau_p in enumerate(tp):
            th = sweep.tau_h[i, j]
            rows.append((tau_c, tau_p,
                         None if np.isnan(th) else th,
                         None if np.isnan(sweep.R[i, j]) else sweep.R[i, j]))
    present = sweep.R[~np.isnan(sweep.R)]
    summary = {"R_max_on_grid": float(present.max()) if present.size else float("nan")}
    return columns, rows, summary


def _tau_c_grid(rc):
    return np.geomspace(rc.tau_c_min, rc.tau_c_max, rc.tau_c_points)


def _run_optimal_curve(rc, config):
    coeffs = cycle.cycle_coefficients(config, rtol=rc.quad_rtol)
    grid = _tau_c_grid(rc)
    curve = optimize.optimal_curve(config, tau_c_grid=grid, coeffs=coeffs)
    psi_R, R_max, _ = optimize.max_cooling_rate(config, tau_c_grid=grid, coeffs=coeffs)
    psi_chi, chi_max, _ = optimize.max_figure_of_merit(config, tau_c_grid=grid, coeffs=coeffs)
    columns = list(optimize.SweepRecord._fields)
    rows = [tuple(r) for r in curve.records]
    summary = {"psi_at_R_max": psi_R, "R_max": R_max,
               "psi_at_chi_max": psi_chi, "chi_max": chi_max,
               "skipped_points": len(curve.skipped)}
    return columns, rows, summary


def _run_alpha_sweep(rc, config):
    grid = np.linspace(rc.alpha_min, rc.alpha_max, rc.alpha_points)
    result = optimize.alpha_sweep(config, alpha_grid=grid,
                                  tau_c_grid=_tau_c_grid(rc), workers=_workers())
    columns = list(optimize.AlphaRecord._fields)
    rows = [tuple(r) for r in result.rows]
    summary = {"alpha_chi": result.alpha_chi, "alpha_r": result.alpha_R,
               "chi_max": result.chi_max, "R_max": result.R_max,
               "skipped_points": len(result.skipped)}
    return columns, rows, summary


def _psi_grid(rc, lo, hi):
    lo = rc.psi_min if rc.psi_min is not None else lo
    hi = rc.psi_max if rc.psi_max is not None else hi
    return np.linspace(lo, hi, rc.psi_points)


def _run_envelope(rc, config):
    psi_grid = None
    if rc.psi_min is not None and rc.psi_max is not None:
        psi_grid = np.linspace(rc.psi_min, rc.psi_max, rc.psi_points)
    result = optimize.envelope_curve(
        config, psi_grid=psi_grid,
        alpha_window=(rc.alpha_min, rc.alpha_max),
        alpha_points=rc.envelope_alpha_points,
        tau_c_grid=_tau_c_grid(rc), workers=_workers(),
    )
    columns = ["curve"] + list(optimize.SweepRecord._fields)
    rows = [("R",) + tuple(r) for r in result.r_curve]
    rows += [("chi",) + tuple(r) for r in result.chi_curve]
    summary = {"psi_R": result.psi_R, "psi_chi": result.psi_chi,
               "skipped_points": len(result.skipped)}
    return columns, rows, summary


def _run_time_allocation(rc, config):
    alpha_chi, alpha_r = rc.alpha_chi, rc.alpha_r
    if alpha_chi is None or alpha_r is None:
        sweep = optimize.alpha_sweep(
            config, alpha_grid=np.linspace(rc.alpha_min, rc.alpha_max, rc.alpha_points),
            tau_c_grid=_tau_c_grid(rc), workers=_workers(),
        )
        alpha_chi = alpha_chi if alpha_chi is not None else sweep.alpha_chi
        alpha_r = alpha_r if alpha_r is not None else sweep.alpha_R
    grid_tc = _tau_c_grid(rc)
    psi_R, _, _ = optimize.max_cooling_rate(
        replace(config, alpha=alpha_r), tau_c_grid=grid_tc)
    psi_chi, _, _ = optimize.max_figure_of_merit(
        replace(config, alpha=alpha_chi), tau_c_grid=grid_tc)
    lo, hi = sorted((psi_R, psi_chi))
    psi_grid = _psi_grid(rc, lo, hi)
    columns = ["alpha_label", "alpha", "psi", "tau_total", "ratio_hp",
               "ratio_cp", "tau_c", "tau_h", "tau_p"]
    rows = []
    for label, alpha in (("alpha_chi", alpha_chi), ("alpha_R", alpha_r)):
        for p in optimize.time_allocation_profile(config, psi_grid, alpha,
                                                  tau_c_grid=grid_tc):
            rows.append((label, alpha) + tuple(p))
    summary = {"alpha_chi": alpha_chi, "alpha_r": alpha_r,
               "psi_R": psi_R, "psi_chi": psi_chi}
    return columns, rows, summary


def _run_reversible_delta(rc, config):
    grid = np.linspace(rc.delta_min, rc.delta_max, rc.delta_points)
    points = cycle.zeroth_heat_sum_curve(config, grid)
    delta_c_r = cycle.reversible_amplitude(config, lo=rc.delta_min, hi=rc.delta_max,
                                           scan_points=rc.delta_points)
    columns = ["delta_c", "q0_sum"]
    rows = [tuple(p) for p in points]
    return columns, rows, {"delta_c_r": delta_c_r}


def _run_oracle_check(rc, config):
    columns = ["reservoir", "tau", "steps", "Q_oracle", "Q0", "Q1",
               "Q_total", "abs_err", "rel_err"]
    rows = []
    worst = 0.0
    for tau in rc.oracle_taus:
        branch = config.branch(rc.oracle_branch, tau)
        bt = thermo.branch_heat(branch, tau, rtol=rc.quad_rtol)
        traj = oracle.propagate(branch, tau)
        q = oracle.heat_via_trajectory(traj)
        abs_err = abs(q - bt.Q)
        rel_err = abs_err / abs(q)
        worst = max(worst, rel_err)
        rows.append((rc.oracle_branch, tau, len(traj.times) - 1,
                     q, bt.Q0, bt.Q1, bt.Q, abs_err, rel_err))
    return columns, rows, {"max_rel_err": worst}


_RUNNERS = {
    "branch": _run_branch,
    "cycle": _run_cycle,
    "ts-diagram": _run_ts_diagram,
    "sweep-times": _run_sweep_times,
    "optimal-curve": _run_optimal_curve,
    "alpha-sweep": _run_alpha_sweep,
    "envelope": _run_envelope,
    "time-allocation": _run_time_allocation,
    "reversible-delta": _run_reversible_delta,
    "oracle-check": _run_oracle_check,
}


def run(subcommand, rc, stdout=None):
    """Execute one subcommand; write the report; print summary lines.

    Returns the exit code.  On solver non-convergence the diagnostic file is
    written next to the report path and 3 is returned.
    """
    stdout = stdout if stdout is not None else sys.stdout
    out_path = rc.out or f"{subcommand.replace('-', '_')}.{rc.format}"
    config = rc.tricycle()
    try:
        columns, rows, summary = _RUNNERS[subcommand](rc, config)
    except ConvergenceError as exc:
        diagnostic = out_path + ".diagnostic.txt"
        lines = [f"subcommand: {subcommand}", f"error: {exc}"]
        if exc.failed_points:
            lines.append("failed grid points:")
            lines.extend(f"  {point}" for point in exc.failed_points)
        _write_atomic(diagnostic, "\n".join(lines) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        print(f"diagnostic written to {diagnostic}", file=sys.stderr)
        return 3
    meta = {
        "tool": "qtricycle",
        "version": __version__,
        "subcommand": subcommand,
        "config": dict(sorted(rc.values.items())),
    }
    payload = ReportPayload(columns=columns, rows=rows, meta=meta, summary=summary)
    _write_atomic(out_path, emit_report(payload, rc.format))
    print(f"wrote {out_path} ({len(rows)} rows)", file=stdout)
    for key, value in summary.items():
        print(f"{key} = {_fmt_cell(value)}", file=stdout)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qtricycle",
        description="Finite-time quantum tricycle performance sweeps.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="path to key=value config file")
    parser.add_argument("--out", default=None, help="report output path")
    parser.add_argument("--format", default=None, choices=("csv", "json"))
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    args = parser.parse_args(argv)

    try:
        text = ""
        if args.config is not None:
            try:
                with open(args.config) as handle:
                    text = handle.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from None
        rc = parse_config(text, overrides=args.overrides)
        if args.out is not None:
            rc.values["out"] = args.out
        if args.format is not None:
            rc.values["format"] = args.format
        return run(args.subcommand, rc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
