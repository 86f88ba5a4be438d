"""Command-line front end: seeded path generation, integration, experiments.

Subcommands
-----------
sample-path   Draw a multi-channel fractional Brownian path, write it as CSV.
integrate     Integrate one seeded path with a chosen scheme.
convergence   Pathwise error vs step size over a dyadic level range.
area          Phase-area evolution of a square boundary under several schemes.
invariant     Euclidean-norm drift along a single trajectory.

Configs are flat ``key = value`` text files; command-line flags override file
keys, and anything still unset falls back to the built-in default. Every run
writes the experiment CSV(s) plus a manifest that echoes the fully resolved
config followed by ``resolved.*`` informational lines (ignored on load), so a
manifest doubles as a config file that reproduces the run bit-exactly.

Output filenames embed the first 12 hex digits of the SHA-256 of the canonical
config text, so distinct configs never collide and identical configs map to
identical filenames. The output directory and worker count are deliberately
not part of the hash or the config: they change where and how fast results
appear, never what they contain.

Seeding is a documented counter scheme: the convergence experiment gives path
``i`` the seed ``seed + i``, and within one path each noise channel draws from
``SeedSequence(entropy=seed, spawn_key=(channel,))``. Adding paths or workers
never reshuffles earlier draws.

Exit codes: 0 success, 2 configuration error, 3 stage-solver failure,
4 output I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .experiments import (
    ConvergenceConfig,
    area_evolution,
    convergence_experiment,
    invariant_drift,
    write_area_csv,
    write_convergence_csv,
    write_drift_csv,
)
from .integrators import (
    SCHEME_NAMES,
    NonConvergence,
    SolverConfig,
    integrate,
    scheme_from_name,
    write_trajectory_csv,
)
from .paths import _CHOLESKY_MAX_STEPS, FbmConfig, sample_fbm, write_path_csv
from .systems import SYSTEM_NAMES, system_from_name
from .tableaus import method2_coefficient

COMMANDS = ("sample-path", "integrate", "convergence", "area", "invariant")
SAMPLER_METHODS = ("auto", "cholesky", "circulant")
REFERENCE_KINDS = ("exact", "fine-grid")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4


class ConfigError(ValueError):
    """Raised for any invalid, unknown, or inconsistent configuration input."""


# ---------------------------------------------------------------------------
# Field specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Field:
    """One config key: its type tag, default, and optional CLI spelling."""

    key: str
    kind: str  # int | float | str | bool | floats | strs | pairs
    default: object
    flag: str | None = None  # CLI flag if different from the key
    choices: tuple[str, ...] | None = None
    help: str = ""


_SQUARE = ((1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0))

_SOLVER_FIELDS = (
    Field("tolerance", "float", 1e-12, help="stage fixed-point tolerance"),
    Field("max_iterations", "int", 100, help="stage iteration cap"),
)

FIELDS: dict[str, tuple[Field, ...]] = {
    "sample-path": (
        Field("hurst", "float", 0.4, help="Hurst index"),
        Field("dims", "int", 3, help="number of noise channels"),
        Field("horizon", "float", 1.0, flag="T", help="time horizon T"),
        Field("steps", "int", 1024, flag="N", help="number of grid steps"),
        Field("seed", "int", 2025, help="base RNG seed"),
        Field("method", "str", "auto", choices=SAMPLER_METHODS,
              help="factorization backend"),
        Field("strict_range", "bool", False,
              help="restrict hurst to (1/4, 1/2]"),
    ),
    "integrate": (
        Field("system", "str", "kubo", choices=SYSTEM_NAMES),
        Field("scheme", "str", "midpoint", choices=SCHEME_NAMES),
        Field("hurst", "float", 0.4),
        Field("epsilon", "float", 1.0, help="noise amplitude (kubo only)"),
        Field("dims", "int", 3, help="noise channels (kubo only)"),
        Field("horizon", "float", 1.0, flag="T"),
        Field("steps", "int", 1024, flag="N"),
        Field("z", "floats", (1.0, 1.0), help="initial state, comma-separated"),
        Field("seed", "int", 2025),
        Field("with_jacobian", "bool", False,
              help="propagate and emit the state Jacobian"),
        *_SOLVER_FIELDS,
        Field("strict_range", "bool", False),
    ),
    "convergence": (
        Field("system", "str", "kubo", choices=SYSTEM_NAMES),
        Field("schemes", "strs", ("midpoint",),
              help="comma-separated scheme names"),
        Field("hurst", "float", 0.4),
        Field("epsilon", "float", 1.0),
        Field("dims", "int", 3),
        Field("horizon", "float", 1.0, flag="T"),
        Field("z", "floats", (1.0, 1.0)),
        Field("coarsest_level", "int", 4, help="coarsest dyadic level"),
        Field("finest_level", "int", 10, help="finest dyadic level"),
        Field("paths", "int", 10, help="number of sample paths"),
        Field("seed", "int", 2025),
        Field("reference", "str", "exact", choices=REFERENCE_KINDS,
              help="error reference: closed form or fine grid"),
        Field("reference_scheme", "str", "method-1", choices=SCHEME_NAMES,
              help="scheme for the fine-grid reference"),
        Field("reference_level", "int", 0,
              help="fine-grid reference level; 0 = finest_level + 2"),
        Field("zero_noise", "bool", False,
              help="drive with the deterministic zero path"),
        *_SOLVER_FIELDS,
        Field("strict_range", "bool", False),
    ),
    "area": (
        Field("system", "str", "kubo", choices=SYSTEM_NAMES),
        Field("schemes", "strs", ("midpoint", "euler2", "euler3")),
        Field("hurst", "float", 0.4),
        Field("epsilon", "float", 1.5),
        Field("dims", "int", 3),
        Field("horizon", "float", 10.0, flag="T"),
        Field("steps", "int", 5000, flag="N"),
        Field("corners", "pairs", _SQUARE,
              help="square corners as 'p,q;p,q;p,q;p,q'"),
        Field("snapshots", "floats", (0.4, 1.6, 8.0),
              help="grid times at which areas are reported"),
        Field("points_per_edge", "int", 16),
        Field("seed", "int", 2025),
        *_SOLVER_FIELDS,
        Field("strict_range", "bool", False),
    ),
    "invariant": (
        Field("system", "str", "kubo", choices=SYSTEM_NAMES),
        Field("scheme", "str", "midpoint", choices=SCHEME_NAMES),
        Field("hurst", "float", 0.4),
        Field("epsilon", "float", 1.0),
        Field("dims", "int", 3),
        Field("horizon", "float", 10.0, flag="T"),
        Field("steps", "int", 5000, flag="N"),
        Field("z", "floats", (1.0, 1.0)),
        Field("seed", "int", 2025),
        *_SOLVER_FIELDS,
        Field("strict_range", "bool", False),
    ),
}

# Commands whose grid is T/N; these accept the -h-style convenience flag.
_STEPPED = ("sample-path", "integrate", "area", "invariant")


# ---------------------------------------------------------------------------
# Value (de)serialization
# ---------------------------------------------------------------------------

def format_value(field: Field, value: object) -> str:
    """Canonical text for one value; float repr round-trips exactly."""
    kind = field.kind
    if kind == "bool":
        return "true" if value else "false"
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return repr(float(value))
    if kind == "str":
        return str(value)
    if kind == "floats":
        return ",".join(repr(float(v)) for v in value)
    if kind == "strs":
        return ",".join(str(v) for v in value)
    if kind == "pairs":
        return ";".join(f"{float(a)!r},{float(b)!r}" for a, b in value)
    raise AssertionError(f"unhandled field kind {kind!r}")


def parse_value(field: Field, text: str) -> object:
    """Inverse of format_value; raises ConfigError with the key named."""
    kind = field.kind
    text = text.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            value = text
        elif kind == "floats":
            value = tuple(float(part) for part in text.split(","))
        elif kind == "strs":
            value = tuple(part.strip() for part in text.split(",") if part.strip())
            if not value:
                raise ValueError("empty list")
        elif kind == "pairs":
            pairs = []
            for chunk in text.split(";"):
                parts = chunk.split(",")
                if len(parts) != 2:
                    raise ValueError(f"expected 'a,b' pair, got {chunk!r}")
                pairs.append((float(parts[0]), float(parts[1])))
            value = tuple(pairs)
        else:
            raise AssertionError(f"unhandled field kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"config key {field.key!r}: {exc}") from None
    if field.choices is not None:
        items = value if kind == "strs" else (value,)
        for item in items:
            if item not in field.choices:
                raise ConfigError(
                    f"config key {field.key!r}: {item!r} is not one of "
                    f"{', '.join(field.choices)}"
                )
    return value


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat 'key = value' lines; '#' comments and resolved.* ignored."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        if key.startswith("resolved."):
            continue  # informational echo from a manifest
        if key in entries:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def canonical_config_text(command: str, config: dict[str, object]) -> str:
    """One canonical serialization: command first, then keys sorted."""
    by_key = {field.key: field for field in FIELDS[command]}
    lines = [f"command = {command}"]
    for key in sorted(config):
        lines.append(f"{key} = {format_value(by_key[key], config[key])}")
    return "\n".join(lines) + "\n"


def config_hash(command: str, config: dict[str, object]) -> str:
    digest = hashlib.sha256(canonical_config_text(command, config).encode())
    return digest.hexdigest()[:12]


# ---------------------------------------------------------------------------
# Config resolution: defaults <- file <- flags
# ---------------------------------------------------------------------------

def resolve_config(command: str, args: argparse.Namespace) -> dict[str, object]:
    fields = FIELDS[command]
    by_key = {field.key: field for field in fields}

    file_entries: dict[str, str] = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_entries = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        stored = file_entries.pop("command", None)
        if stored is not None and stored != command:
            raise ConfigError(
                f"config file is for command {stored!r}, not {command!r}"
            )
        for key in file_entries:
            if key not in by_key:
                raise ConfigError(f"unknown config key {key!r} for {command}")

    config: dict[str, object] = {}
    for field in fields:
        flag_value = getattr(args, field.key, None)
        if flag_value is not None:
            config[field.key] = (
                parse_value(field, flag_value)
                if isinstance(flag_value, str)
                else flag_value
            )
        elif field.key in file_entries:
            config[field.key] = parse_value(field, file_entries[field.key])
        else:
            config[field.key] = field.default

    # -h-style step-size convenience: N = T / h, which must be an integer.
    if getattr(args, "step_size", None) is not None:
        if getattr(args, "steps", None) is not None:
            raise ConfigError("give either --N or --h, not both")
        horizon = float(config["horizon"])
        h = float(args.step_size)
        if h <= 0.0:
            raise ConfigError(f"step size must be positive, got {h}")
        steps = round(horizon / h)
        if steps < 1 or abs(steps * h - horizon) > 1e-9 * max(1.0, horizon):
            raise ConfigError(f"step size {h} does not divide horizon {horizon}")
        config["steps"] = steps

    validate_config(command, config)
    return config


def validate_config(command: str, config: dict[str, object]) -> None:
    hurst = float(config["hurst"])
    if config["strict_range"]:
        if not 0.25 < hurst <= 0.5:
            raise ConfigError(
                f"hurst {hurst} outside (1/4, 1/2] (strict_range is on)"
            )
    elif not 0.0 < hurst < 1.0:
        raise ConfigError(f"hurst must lie in (0, 1), got {hurst}")

    def positive(key: str) -> None:
        if float(config[key]) <= 0.0:
            raise ConfigError(f"{key} must be positive, got {config[key]}")

    def at_least(key: str, lower: int) -> None:
        if int(config[key]) < lower:
            raise ConfigError(f"{key} must be >= {lower}, got {config[key]}")

    positive("horizon")
    if "epsilon" in config:
        positive("epsilon")
    if "dims" in config:
        at_least("dims", 1)
    if "steps" in config:
        at_least("steps", 1)
    if "tolerance" in config:
        positive("tolerance")
    if "max_iterations" in config:
        at_least("max_iterations", 1)

    if command == "convergence":
        at_least("coarsest_level", 1)
        at_least("paths", 1)
        if int(config["coarsest_level"]) >= int(config["finest_level"]):
            raise ConfigError(
                "coarsest_level must be strictly below finest_level"
            )
        ref_level = int(config["reference_level"])
        if ref_level and ref_level <= int(config["finest_level"]):
            raise ConfigError("reference_level must exceed finest_level")
    if command == "area":
        at_least("points_per_edge", 2)
        if len(config["corners"]) != 4:
            raise ConfigError("corners must list exactly 4 'p,q' pairs")
        horizon = float(config["horizon"])
        for t in config["snapshots"]:
            if not 0.0 <= float(t) <= horizon:
                raise ConfigError(f"snapshot time {t} outside [0, {horizon}]")
    if "z" in config and len(config["z"]) % 2 != 0:
        raise ConfigError("initial state z needs an even number of entries")


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _solver(config: dict[str, object]) -> SolverConfig:
    return SolverConfig(
        tolerance=float(config["tolerance"]),
        max_iterations=int(config["max_iterations"]),
    )


def _fbm_config(config: dict[str, object], dims: int) -> FbmConfig:
    return FbmConfig(
        hurst=float(config["hurst"]),
        dims=dims,
        horizon=float(config["horizon"]),
        steps=int(config["steps"]),
        seed=int(config["seed"]),
    )


def run_sample_path(config, outdir, tag, workers):
    del workers
    method = str(config["method"])
    path = sample_fbm(_fbm_config(config, int(config["dims"])), method=method)
    name = f"path-{tag}.csv"
    with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
        write_path_csv(path, fh)
    chosen = method
    if chosen == "auto":
        chosen = (
            "cholesky" if int(config["steps"]) <= _CHOLESKY_MAX_STEPS
            else "circulant"
        )
    return [name], [("resolved.sampler", chosen)]


def run_integrate(config, outdir, tag, workers):
    del workers
    system = system_from_name(
        str(config["system"]), float(config["epsilon"]), int(config["dims"])
    )
    path = sample_fbm(_fbm_config(config, system.noise_dim))
    scheme = scheme_from_name(str(config["scheme"]), _solver(config))
    z = np.asarray(config["z"], dtype=float)
    trajectory = integrate(
        system, scheme, path, z, with_jacobian=bool(config["with_jacobian"])
    )
    name = f"trajectory-{tag}.csv"
    with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
        write_trajectory_csv(trajectory, fh)
    extra = []
    if trajectory.stage_iterations is not None:
        extra.append(
            ("resolved.max_stage_iterations",
             str(int(trajectory.stage_iterations.max(initial=0))))
        )
    return [name], extra


def run_convergence(config, outdir, tag, workers):
    ref_level = int(config["reference_level"])
    cfg = ConvergenceConfig(
        system=str(config["system"]),
        schemes=tuple(config["schemes"]),
        hurst=float(config["hurst"]),
        horizon=float(config["horizon"]),
        initial=tuple(config["z"]),
        coarsest_level=int(config["coarsest_level"]),
        finest_level=int(config["finest_level"]),
        paths=int(config["paths"]),
        seed=int(config["seed"]),
        reference=str(config["reference"]),
        reference_scheme=str(config["reference_scheme"]),
        reference_level=ref_level if ref_level else None,
        epsilon=float(config["epsilon"]),
        dims=int(config["dims"]),
        zero_noise=bool(config["zero_noise"]),
        solver_tolerance=float(config["tolerance"]),
        solver_max_iterations=int(config["max_iterations"]),
    )
    report = convergence_experiment(cfg, workers=workers)
    outputs, extra = [], []
    extra.append(
        ("resolved.reference_level", str(cfg.resolved_reference_level))
    )
    for scheme_report in report.schemes:
        name = f"convergence-{scheme_report.scheme}-{tag}.csv"
        with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
            write_convergence_csv(scheme_report, fh)
        outputs.append(name)
        extra.append(
            (f"resolved.median_slope.{scheme_report.scheme}",
             repr(scheme_report.median_slope))
        )
        for result in scheme_report.paths:
            for h, reason in result.excluded:
                extra.append(
                    (f"resolved.excluded.{scheme_report.scheme}."
                     f"{result.path_index}",
                     f"h={h!r} {reason}")
                )
    return outputs, extra


def run_area(config, outdir, tag, workers):
    del workers
    system = system_from_name(
        str(config["system"]), float(config["epsilon"]), int(config["dims"])
    )
    path = sample_fbm(_fbm_config(config, system.noise_dim))
    series = area_evolution(
        system,
        tuple(config["schemes"]),
        tuple(config["corners"]),
        path,
        tuple(config["snapshots"]),
        points_per_edge=int(config["points_per_edge"]),
        solver=_solver(config),
    )
    name = f"area-{tag}.csv"
    with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
        write_area_csv(series, fh)
    return [name], []


def run_invariant(config, outdir, tag, workers):
    del workers
    system = system_from_name(
        str(config["system"]), float(config["epsilon"]), int(config["dims"])
    )
    path = sample_fbm(_fbm_config(config, system.noise_dim))
    scheme = scheme_from_name(str(config["scheme"]), _solver(config))
    z = np.asarray(config["z"], dtype=float)
    trajectory = integrate(system, scheme, path, z)
    drift = invariant_drift(trajectory, z)
    name = f"drift-{tag}.csv"
    with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
        write_drift_csv(trajectory.times, drift, fh)
    return [name], [("resolved.max_abs_drift", repr(float(abs(drift).max())))]


RUNNERS: dict[str, Callable] = {
    "sample-path": run_sample_path,
    "integrate": run_integrate,
    "convergence": run_convergence,
    "area": run_area,
    "invariant": run_invariant,
}


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def write_manifest(
    command: str,
    config: dict[str, object],
    outdir: str,
    tag: str,
    outputs: Sequence[str],
    extra: Sequence[tuple[str, str]],
    workers: int,
) -> str:
    name = f"manifest-{command}-{tag}.txt"
    lines = [
        "# rough-symplectic run manifest; reproduce with:",
        f"#   rough-symplectic {command} --config {name}",
        "# 'resolved.*' lines are informational and ignored on load.",
        canonical_config_text(command, config).rstrip("\n"),
        f"resolved.config_hash = {tag}",
        f"resolved.method_2_root = {method2_coefficient()!r}",
        f"resolved.output_dir = {outdir}",
        f"resolved.workers = {workers}",
    ]
    lines.extend(f"resolved.output.{i} = {out}" for i, out in enumerate(outputs))
    lines.extend(f"{key} = {value}" for key, value in extra)
    with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return name


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rough-symplectic",
        description=(
            "Symplectic integration of Hamiltonian systems driven by "
            "fractional Brownian motion: path sampling, integration, and "
            "convergence / area / invariant experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, fields in FIELDS.items():
        cmd = sub.add_parser(command, help=f"run the {command} operation")
        cmd.add_argument("--config", help="flat key = value config file")
        cmd.add_argument(
            "--output-dir", "-o",
            help="output directory (default: $ROUGH_SYMPLECTIC_OUT or cwd)",
        )
        if command == "convergence":
            cmd.add_argument(
                "--workers", type=int, default=1,
                help="parallel workers over paths; never affects outputs",
            )
        if command in _STEPPED:
            cmd.add_argument(
                "--h", dest="step_size", metavar="H",
                help="grid step size; shorthand for --N = T/H",
            )
        for field in fields:
            flag = "--" + (field.flag or field.key.replace("_", "-"))
            kwargs: dict[str, object] = {
                "dest": field.key,
                "help": field.help or field.key.replace("_", " "),
            }
            if field.kind == "bool":
                kwargs["action"] = argparse.BooleanOptionalAction
                kwargs["default"] = None
            else:
                kwargs["metavar"] = field.kind.upper()
            cmd.add_argument(flag, **kwargs)
            if field.key == "schemes":
                cmd.add_argument(
                    "--scheme", dest="schemes", metavar="STRS",
                    help="alias for --schemes",
                )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command

    try:
        config = resolve_config(command, args)
    except ConfigError as exc:
        print(f"rough-symplectic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = (
        args.output_dir
        or os.environ.get("ROUGH_SYMPLECTIC_OUT")
        or os.getcwd()
    )
    workers = getattr(args, "workers", 1)
    tag = config_hash(command, config)

    try:
        os.makedirs(outdir, exist_ok=True)
        outputs, extra = RUNNERS[command](config, outdir, tag, workers)
        manifest = write_manifest(
            command, config, outdir, tag, outputs, extra, workers
        )
    except ConfigError as exc:
        print(f"rough-symplectic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # Library-level precondition failures are configuration mistakes.
        print(f"rough-symplectic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"rough-symplectic: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"rough-symplectic: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    for out in [*outputs, manifest]:
        print(os.path.join(outdir, out))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
