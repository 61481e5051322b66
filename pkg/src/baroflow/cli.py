"""Run configuration, orchestration and CSV serialization.

Config files are flat `key = value` lines with `#` comments and dotted,
case-sensitive keys; the same keys work as command-line flags (`--mesh.M 50`),
and flags win over file values. All floats are written with 17 significant
digits so every emitted value parses back to the identical double.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__, diagnostics, schemes
from .eos import BarotropicEOS
from .mesh import build_mesh
from .newton import NewtonConfig
from .schemes import SCHEME_KINDS, RunResult, SchemeConfig


class ConfigError(ValueError):
    pass


def _parse_times(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _format_times(times: tuple[float, ...]) -> str:
    return ",".join(_fmt(v) for v in times)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


@dataclass(frozen=True)
class RunConfig:
    xmin: float = -5.0
    xmax: float = 5.0
    ymin: float = -5.0
    ymax: float = 5.0
    M: int | None = None
    tau: float = 0.005
    T: float = 5.0
    a: float = 1.0
    gamma: float = 1.4
    alpha: float = 2.0
    beta: float = 20.0
    kind: str = "fully_implicit"
    K: int = 2
    newton_tol: float = 1e-12
    newton_max_iter: int = 10
    output_dir: str = ""
    snapshot_times: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    diag_every: int = 1
    section_y: float = 0.0

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(kind=self.kind, tau=self.tau, T=self.T, K=self.K,
                            newton=NewtonConfig(tol=self.newton_tol,
                                                max_iter=self.newton_max_iter))


# key -> (field name, parser, serializer)
_KEYS: dict[str, tuple[str, callable, callable]] = {
    "domain.xmin": ("xmin", float, _fmt),
    "domain.xmax": ("xmax", float, _fmt),
    "domain.ymin": ("ymin", float, _fmt),
    "domain.ymax": ("ymax", float, _fmt),
    "mesh.M": ("M", int, _fmt),
    "time.tau": ("tau", float, _fmt),
    "time.T": ("T", float, _fmt),
    "eos.a": ("a", float, _fmt),
    "eos.gamma": ("gamma", float, _fmt),
    "init.alpha": ("alpha", float, _fmt),
    "init.beta": ("beta", float, _fmt),
    "scheme.kind": ("kind", str, _fmt),
    "scheme.K": ("K", int, _fmt),
    "newton.tol": ("newton_tol", float, _fmt),
    "newton.max_iter": ("newton_max_iter", int, _fmt),
    "output.dir": ("output_dir", str, _fmt),
    "output.snapshot_times": ("snapshot_times", _parse_times, _format_times),
    "output.diag_every": ("diag_every", int, _fmt),
    "output.section_y": ("section_y", float, _fmt),
}


def serialize_config(config: RunConfig) -> str:
    lines = []
    for key, (name, _, fmt) in _KEYS.items():
        value = getattr(config, name)
        if value is None:
            continue
        lines.append(f"{key} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def _validate(config: RunConfig) -> RunConfig:
    if config.M is None:
        raise ConfigError("mesh.M missing")
    if config.M < 1:
        raise ConfigError(f"mesh.M must be >= 1, got {config.M}")
    if not (config.xmax > config.xmin and config.ymax > config.ymin):
        raise ConfigError("domain.* must describe a non-degenerate rectangle")
    if config.tau <= 0:
        raise ConfigError(f"time.tau must be positive, got {config.tau}")
    if config.T < 0:
        raise ConfigError(f"time.T must be non-negative, got {config.T}")
    if config.a <= 0:
        raise ConfigError(f"eos.a must be positive, got {config.a}")
    if config.gamma <= 1:
        raise ConfigError(f"eos.gamma must exceed 1, got {config.gamma}")
    if config.kind not in SCHEME_KINDS:
        raise ConfigError(f"scheme.kind must be one of {SCHEME_KINDS}, got {config.kind!r}")
    if config.K < 1:
        raise ConfigError(f"scheme.K must be >= 1, got {config.K}")
    if config.newton_tol <= 0:
        raise ConfigError(f"newton.tol must be positive, got {config.newton_tol}")
    if config.newton_max_iter < 1:
        raise ConfigError(f"newton.max_iter must be >= 1, got {config.newton_max_iter}")
    if config.diag_every < 1:
        raise ConfigError(f"output.diag_every must be >= 1, got {config.diag_every}")
    try:
        config.scheme_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not config.output_dir:
        default = os.environ.get("BAROFLOW_OUTPUT_DIR", "out")
        config = replace(config, output_dir=default)
    return config


def parse_config(text: str = "", overrides: dict[str, str] | None = None) -> RunConfig:
    """Build a validated RunConfig from config text plus flag overrides."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = value

    kwargs = {}
    for key, value in values.items():
        name, parse, _ = _KEYS[key]
        try:
            kwargs[name] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r}: {exc}") from exc
    return _validate(RunConfig(**kwargs))


def _time_tag(t: float) -> str:
    return f"{t:g}"


def _write_csv(path: Path, header: str, rows) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except Exception:
        path.unlink(missing_ok=True)
        raise


def write_outputs(result: RunResult, config: RunConfig, mesh) -> list[Path]:
    """Emit diagnostics, iteration logs, sections and snapshots under output.dir."""
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, header: str, rows):
        path = outdir / name
        try:
            _write_csv(path, header, rows)
        except Exception:
            for p in written:
                p.unlink(missing_ok=True)
            raise
        written.append(path)

    emit("diagnostics.csv",
         "t,mass,momentum_x,momentum_y,energy,rho_center,rho_max,rho_min,"
         "rho_min_quad,symmetry_err",
         ((r.t, r.mass, r.momentum[0], r.momentum[1], r.energy, r.rho_center,
           r.rho_max, r.rho_min, r.rho_min_quad, r.symmetry_err)
          for r in result.records))

    if config.kind == "fully_implicit":
        emit("newton.csv", "step,iteration,relative_error,residual_norm",
             ((step, k + 1, hist.relative_errors[k], hist.residual_norms[k])
              for step, hist in result.newton_log
              for k in range(hist.iterations)))
    if config.kind == "decoupled":
        emit("decouple.csv", "step,k,change_norm",
             ((step, k + 1, change)
              for step, changes in result.decouple_log
              for k, change in enumerate(changes)))

    for snap in result.snapshots:
        tag = _time_tag(snap.t)
        profile = diagnostics.section_profile(snap, mesh, y=config.section_y)
        emit(f"section_t{tag}.csv", "x1,rho",
             ((x, v) for x, v in profile))
        emit(f"snapshot_t{tag}.csv", "x1,x2,rho,u1,u2",
             ((mesh.nodes[i, 0], mesh.nodes[i, 1], snap.rho[i],
               snap.u[0, i], snap.u[1, i]) for i in range(mesh.n_nodes)))
    return written


def _build_problem(config: RunConfig):
    mesh = build_mesh((config.xmin, config.xmax, config.ymin, config.ymax), config.M)
    eos = BarotropicEOS(a=config.a, gamma=config.gamma)
    state0 = schemes.initial_state(mesh, schemes.gaussian_bump(config.alpha, config.beta))
    return mesh, eos, state0


def _add_config_args(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, default=None,
                        help="path to a key = value config file")
    for key in _KEYS:
        parser.add_argument(f"--{key}", dest=key, default=None, metavar="V",
                            help=argparse.SUPPRESS)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    text = ""
    if args.config is not None:
        text = Path(args.config).read_text()
    overrides = {key: getattr(args, key) for key in _KEYS
                 if getattr(args, key, None) is not None}
    return parse_config(text, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="baroflow",
        description="2D barotropic flow solver with implicit and decoupled time stepping")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a simulation and write CSV outputs")
    _add_config_args(run_p)
    check_p = sub.add_parser("check", help="validate a config and print derived sizes")
    _add_config_args(check_p)
    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0

    try:
        config = _config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    scheme = config.scheme_config()
    if args.command == "check":
        n_nodes = (config.M + 1) ** 2
        print("config OK")
        print(f"steps: {scheme.n_steps}")
        print(f"nodes: {n_nodes}")
        print(f"unknowns: {3 * n_nodes}")
        return 0

    try:
        mesh, eos, state0 = _build_problem(config)
        result = schemes.run(scheme, state0, mesh, eos,
                             diag_every=config.diag_every,
                             snapshot_times=config.snapshot_times)
        written = write_outputs(result, config, mesh)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(written)} files to {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
