"""Command-line entry point.

Usage::

    grpburgers [run|convergence|audit|entropy-report] --config FILE
               [--out DIR] [--seed N] [--levels K]

The config file is INI-style with flat sections; every key is optional and
unknown sections or keys are rejected::

    [experiment]
    command = run            ; used when no subcommand is given
    out = results

    [run]
    dim = 2
    n = 64
    t_end = 0.2
    c1 = 0.041666666666666664
    c2 = 0.5
    p = 1.5
    cfl = 0.5
    scheme = stabilized      ; or grp (unstabilized, for demonstrations)
    output_every = 0         ; 0 keeps first and last snapshot only
    entropy_inequality = false

    [initial]
    kind = sine              ; sine | riemann | constant
    mean = 0.25
    amplitude = 0.1
    wavenumber = 1
    ; riemann: u_left, u_right, position    constant: value

    [convergence]
    levels = 32, 64, 128     ; or use --levels K for K doublings of run.n
    reference = exact        ; exact | fine-grid
    mode = average           ; average | pointwise
    timing = false           ; true adds runtimes (breaks byte determinism)

    [audit]
    samples = 1000000
    u_bar = 2.0
    dt_over_h = 0.01, 0.1, 0.5
    seed = 20240601
    c1 = 0.041666666666666664

Exit codes: 0 success, 2 configuration or input error (including a missing
config file), 3 numerical blow-up, 4 a check reported failures (audit
violations, entropy-inequality failures).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import math
import sys
from pathlib import Path

from grpburgers.diagnostics import (
    EntropyInequality, EntropyReport, audit_bounds,
)
from grpburgers.errors import BlowUpError, ConfigError, InputError
from grpburgers.flux import C1_DEFAULT, check_c1
from grpburgers.mesh import fmt, write_field_csv
from grpburgers.oracles import convergence_study
from grpburgers.profiles import PROFILES, make_profile
from grpburgers.stepper import RunConfig, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_CHECK = 4

COMMANDS = ("run", "convergence", "audit", "entropy-report")
DEFAULT_SEED = 20240601

_RUN_KEYS = {
    "dim": int, "n": int, "t_end": float, "c1": float, "c2": float, "p": float,
    "cfl": float, "scheme": str, "output_every": int, "entropy_inequality": bool,
}
_INITIAL_KEYS = {
    "sine": {"mean": float, "amplitude": float, "wavenumber": int},
    "riemann": {"u_left": float, "u_right": float, "position": float},
    "constant": {"value": float},
}
SCHEMA = {
    "experiment": {"command": str, "out": str},
    "run": _RUN_KEYS,
    "initial": None,  # depends on kind
    "convergence": {"levels": "int-list", "reference": str, "mode": str, "timing": bool},
    "audit": {"samples": int, "u_bar": float, "dt_over_h": "float-list", "seed": int,
              "c1": float},
}

logger = logging.getLogger("grpburgers")


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int-list":
            return [int(v) for v in raw.replace(",", " ").split()]
        if kind == "float-list":
            return [float(v) for v in raw.replace(",", " ").split()]
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
        return raw.strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as "
                          f"{getattr(kind, '__name__', kind)}") from None


def load_config(path: str | Path) -> dict[str, dict]:
    """Parse and type-check a config file; returns ``{section: {key: value}}``."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if parser.defaults():
        raise ConfigError(f"{path}: keys outside a section are not allowed")
    out: dict[str, dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]; "
                              f"expected one of {sorted(SCHEMA)}")
        items = dict(parser.items(section))
        if section == "initial":
            kind = items.pop("kind", "sine").strip()
            if kind not in PROFILES:
                raise ConfigError(f"[initial] kind must be one of {sorted(PROFILES)}, "
                                  f"got {kind!r}")
            schema = _INITIAL_KEYS[kind]
            values = {"kind": kind}
        else:
            schema = SCHEMA[section]
            values = {}
        for key, raw in items.items():
            if key not in schema:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]; "
                                  f"allowed: {sorted(schema)}")
            values[key] = _convert(section, key, raw, schema[key])
        out[section] = values
    return out


def build_run_config(cfg: dict[str, dict]) -> RunConfig:
    params = dict(cfg.get("run", {}))
    initial = dict(cfg.get("initial", {"kind": "sine"}))
    kind = initial.pop("kind", "sine")
    try:
        params["initial"] = make_profile(kind, **initial)
    except InputError as exc:
        raise ConfigError(f"[initial] {exc}") from None
    return RunConfig(**params)


def _levels(cfg: dict, base: RunConfig, k: int | None) -> list[int]:
    conv = cfg.get("convergence", {})
    if k is not None:
        if k < 1:
            raise ConfigError("--levels must be >= 1")
        return [base.n * 2**i for i in range(k)]
    levels = conv.get("levels") or [base.n * 2**i for i in range(3)]
    if any(n < 1 for n in levels):
        raise ConfigError("[convergence] levels must be positive integers")
    return levels


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return fmt(x)
    return str(x)


def cmd_run(cfg: dict, out: Path, snapshots: bool = True) -> int:
    config = build_run_config(cfg)
    report = EntropyReport()
    observers = [report]
    ineq = EntropyInequality() if config.entropy_inequality else None
    if ineq is not None:
        observers.append(ineq)
    traj = run(config, observers)
    out.mkdir(parents=True, exist_ok=True)
    if snapshots:
        for i, snap in enumerate(traj.snapshots):
            with (out / f"snapshot_{i:05d}.csv").open("w", newline="",
                                                      encoding="utf-8") as fh:
                write_field_csv(snap, fh)
    with (out / "entropy_report.csv").open("w", newline="", encoding="utf-8") as fh:
        report.write_csv(fh)
    increments = report.entropy_increments()
    summary = [
        ("steps", len(traj.steps)),
        ("dt", traj.dt),
        ("cfl_binds", traj.cfl_binds),
        ("t_final", traj.final.time),
        ("mass_drift", traj.mass_drift()),
        ("max_abs_u", traj.max_abs_u()),
        ("max_entropy_increment", float(increments.max()) if increments.size else 0.0),
        ("max_relative_balance_residual", report.max_relative_residual()),
        ("weak_bv", report.weak_bv),
        ("stability_violations", report.total_violations()),
    ]
    status = EXIT_OK
    if ineq is not None:
        res = ineq.result(config.mesh.h)
        summary += [("entropy_defect_max", res.max_defect),
                    ("entropy_defect_normalized", res.normalized),
                    ("entropy_inequality_passed", res.passed)]
        if not res.passed:
            status = EXIT_CHECK
    name = "run_summary.csv" if snapshots else "entropy_summary.csv"
    _write_rows(out / name, ("key", "value"), [(k, _value(v)) for k, v in summary])
    print(f"{len(traj.steps)} steps, dt={fmt(traj.dt)}, "
          f"mass drift {fmt(traj.mass_drift())}; wrote {out}")
    return status


def cmd_entropy_report(cfg: dict, out: Path) -> int:
    return cmd_run(cfg, out, snapshots=False)


def cmd_convergence(cfg: dict, out: Path, levels_k: int | None) -> int:
    template = build_run_config(cfg)
    conv = cfg.get("convergence", {})
    levels = _levels(cfg, template, levels_k)
    reference = conv.get("reference", "exact")
    checks: list[tuple] = []

    def on_level(level_cfg, traj, obs):
        report = obs[0]
        inc = report.entropy_increments()
        worst = float(inc.max()) if inc.size else 0.0
        # entropy increases beyond rounding are failures of the inequality
        failed = int((inc > 1e-10).sum())
        checks.append((level_cfg.n, worst, failed, report.total_violations()))

    table = convergence_study(template, levels, reference=reference,
                              mode=conv.get("mode", "average"),
                              timing=conv.get("timing", False),
                              observers=lambda c: [EntropyReport()], on_level=on_level)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "convergence.csv").open("w", newline="", encoding="utf-8") as fh:
        table.write_csv(fh)
    _write_rows(out / "entropy_check.csv",
                ("n", "max_entropy_increment", "increasing_steps", "stability_violations"),
                [(n, fmt(w), f, v) for n, w, f, v in checks])
    failures = sum(c[2] for c in checks)
    local = sum(c[3] for c in checks)
    blown = [r for r in table.rows if r.failed]
    for r in blown:
        print(f"level {r.level} (n={r.n}) failed: {r.failed}", file=sys.stderr)
    if failures:
        print(f"entropy inequality failed on {failures} steps", file=sys.stderr)
    if local:
        print(f"local dissipation bound violated on {local} faces", file=sys.stderr)
    print(f"{len(table.rows)} levels; wrote {out / 'convergence.csv'}")
    if blown and len(blown) == len(table.rows):
        return EXIT_BLOWUP
    return EXIT_CHECK if failures or local or blown else EXIT_OK


def cmd_audit(cfg: dict, out: Path, seed: int | None) -> int:
    section = cfg.get("audit", {})
    samples = section.get("samples", 1_000_000)
    u_bar = section.get("u_bar", 2.0)
    ratios = section.get("dt_over_h", [0.01, 0.1, 0.5])
    c1 = check_c1(section.get("c1", C1_DEFAULT))
    seed = seed if seed is not None else section.get("seed", DEFAULT_SEED)
    if samples < 0:
        raise ConfigError("[audit] samples must be >= 0")
    if not u_bar > 0:
        raise ConfigError("[audit] u_bar must be positive")
    if not ratios or any(not r > 0 for r in ratios):
        raise ConfigError("[audit] dt_over_h must list positive ratios")
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out.mkdir(parents=True, exist_ok=True)
    total = 0
    with (out / "audit.csv").open("w", newline="", encoding="utf-8") as fh:
        for i, ratio in enumerate(ratios):
            # each ratio re-draws the same stencils
            report = audit_bounds(samples, u_bar, ratio, c1=c1, seed=seed)
            report.write_csv(fh, header=i == 0)
            total += report.total_violations
    print(f"{samples} stencils x {len(ratios)} ratios: {total} violations; "
          f"wrote {out / 'audit.csv'}")
    return EXIT_CHECK if total else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grpburgers",
        description="Stabilized GRP scheme for Burgers' equation on the periodic torus.",
        epilog="exit codes: 0 ok, 2 config error, 3 blow-up, 4 check failed")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="experiment (default: [experiment] command)")
    parser.add_argument("--config", required=True, help="INI config file")
    parser.add_argument("--out", help="output directory (default: [experiment] out or ./out)")
    parser.add_argument("--seed", type=int, help="audit sampler seed")
    parser.add_argument("--levels", type=int, help="number of refinement levels")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        experiment = cfg.get("experiment", {})
        command = args.command or experiment.get("command", "run")
        if command not in COMMANDS:
            raise ConfigError(f"[experiment] command must be one of {COMMANDS}")
        out = Path(args.out or experiment.get("out", "out"))
        if command == "run":
            return cmd_run(cfg, out)
        if command == "entropy-report":
            return cmd_entropy_report(cfg, out)
        if command == "convergence":
            return cmd_convergence(cfg, out, args.levels)
        return cmd_audit(cfg, out, args.seed)
    except (ConfigError, InputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
