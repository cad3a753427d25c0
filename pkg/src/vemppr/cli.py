"""Command-line driver: ``mesh``, ``solve`` and ``study`` subcommands.

Settings come from three layers, later ones winning: built-in defaults, an
optional ``key = value`` config file (``--config``), and command-line flags.
The merged settings are validated into a :class:`RunConfig` and echoed to
``run_config.txt`` in the output directory; that file can be fed back with
``--config`` to repeat the run.
"""

import argparse
import csv
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, bench, estimator, norms, recovery, vem
from .mesh import MeshFamily, UNIT_SQUARE_FAMILIES, generate, load_json, save_json, write_svg
from .solver import SolverConfig, SolverError

COMMANDS = ("mesh", "solve", "study")
FORMATS = ("csv", "svg", "json")
ECHO_NAME = "run_config.txt"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str = "auto"  # auto: picked from the case (see resolve_mesh_choice)
    n: int = 0  # 0: picked from the case
    seed: int = 0
    mesh: str = ""  # mesh JSON path; overrides family/n/seed when set
    case: str = "1"
    theta: float = estimator.DEFAULT_THETA
    levels: tuple = bench.LEVELS
    adaptive: bool = False
    max_iters: int = 25
    dof_budget: int = 30000
    check_rates: bool = False
    rel_tol: float = 1e-12
    max_iter: int = 20000
    preconditioner: str = "jacobi"
    out: str = "out"
    formats: tuple = ("csv",)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        try:
            case = bench.get_case(self.case)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        family, n = resolve_mesh_choice(case, self.family, self.n, self.adaptive)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "n", n)
        fams = [m.value for m in MeshFamily] + ["all"]
        if self.family not in fams:
            raise ConfigError(f"family must be one of {', '.join(fams)}")
        if self.family == "all" and self.command == "mesh":
            raise ConfigError("family 'all' is only valid for study")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise ConfigError("theta must lie in (0, 1]")
        if not self.levels or any(k < 1 for k in self.levels):
            raise ConfigError("levels must be positive integers")
        if self.max_iters < 1 or self.dof_budget < 1:
            raise ConfigError("max_iters and dof_budget must be positive")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown formats {sorted(bad)}; choose from {FORMATS}")
        if not self.mesh and self.command != "mesh":
            lshape = self.family == MeshFamily.LSHAPE.value
            if lshape != (case.domain == "lshape"):
                raise ConfigError(f"family {self.family} does not cover the {case.domain} "
                                  f"domain of {case.name}")
        self.solver_config()  # validates the solver settings

    def solver_config(self):
        try:
            return SolverConfig(self.rel_tol, self.max_iter, self.preconditioner)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self):
        # comment lines are ignored when the echo is read back with --config
        lines = [f"# vemppr {__version__}", f"# stabilization: {vem.STABILIZATION}"]
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def resolve_mesh_choice(case, family, n, adaptive):
    """Fill in ``auto`` family / ``n = 0`` from the case's default starting mesh."""
    start = bench.ADAPTIVE_START[case.name]
    if family == "auto":
        family = start[0] if adaptive or case.domain == "lshape" else "t1"
    if n == 0:
        n = start[1] if adaptive else 8
    return family, n


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(key, raw):
    default = _FIELDS[key].default
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if isinstance(default, bool):
            if isinstance(raw, bool):
                return raw
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = raw.split(",") if isinstance(raw, str) else list(raw)
            items = [str(x).strip() for x in items if str(x).strip()]
            return tuple(int(x) for x in items) if key == "levels" else tuple(items)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return str(raw)


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def make_config(command, file_values=None, flag_values=None):
    merged = {"command": command}
    for source in (file_values or {}, flag_values or {}):
        for key, val in source.items():
            if key not in _FIELDS:
                raise ConfigError(f"unknown key {key!r}")
            if key == "command":
                continue
            merged[key] = _convert(key, val)
    return RunConfig(**merged)


def build_parser():
    p = argparse.ArgumentParser(prog="vemppr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS  # absent flags do not override the config file

    def common(sp):
        sp.add_argument("--config", default=None, help="key = value settings file")
        sp.add_argument("--out", default=S, help="output directory")
        sp.add_argument("--family", default=S, help="t1..t6, lshape (study: also 'all')")
        sp.add_argument("--n", type=int, default=S, help="mesh level")
        sp.add_argument("--seed", type=int, default=S)
        sp.add_argument("--svg", action="store_true", default=S, help="also write SVG")

    sp = sub.add_parser("mesh", help="generate a mesh and write it as JSON")
    common(sp)

    for name, help_ in (("solve", "solve one problem on one mesh"),
                        ("study", "convergence or adaptive study")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--case", default=S, help="1, 2, 3, 4 or linear")
        sp.add_argument("--mesh", default=S, help="mesh JSON instead of a generated family")
        sp.add_argument("--theta", type=float, default=S, help="bulk marking fraction")
        sp.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)
        sp.add_argument("--max-iter", dest="max_iter", type=int, default=S,
                        help="CG iteration cap")
        sp.add_argument("--preconditioner", choices=("none", "jacobi"), default=S)
        if name == "study":
            sp.add_argument("--levels", default=S, help="comma separated, e.g. 4,8,16")
            sp.add_argument("--adaptive", action="store_true", default=S)
            sp.add_argument("--check-rates", dest="check_rates", action="store_true",
                            default=S, help="exit 1 if a fitted slope is out of tolerance")
            sp.add_argument("--max-iters", dest="max_iters", type=int, default=S)
            sp.add_argument("--dof-budget", dest="dof_budget", type=int, default=S)
    return p


def _formats(cfg, args):
    if getattr(args, "svg", False) and "svg" not in cfg.formats:
        return dataclasses.replace(cfg, formats=cfg.formats + ("svg",))
    return cfg


def _prepare_out(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / ECHO_NAME).write_text(cfg.echo())
    return out


def _mesh_for(cfg):
    if cfg.mesh:
        return load_json(cfg.mesh)
    return generate(cfg.family, cfg.n, cfg.seed)


def _tag(cfg):
    return Path(cfg.mesh).stem if cfg.mesh else f"{cfg.family}_n{cfg.n}_s{cfg.seed}"


def cmd_mesh(cfg):
    out = _prepare_out(cfg)
    m = generate(cfg.family, cfg.n, cfg.seed)
    path = save_json(m, out / f"mesh_{_tag(cfg)}.json")
    print(f"wrote {path} ({m.n_cells} cells, {m.n_vertices} vertices)")
    if "svg" in cfg.formats:
        print(f"wrote {write_svg(m, out / f'mesh_{_tag(cfg)}.svg')}")
    return 0


def cmd_solve(cfg):
    out = _prepare_out(cfg)
    case = bench.get_case(cfg.case)
    m = _mesh_for(cfg)
    sol = bench.solve(m, case, cfg.solver_config())
    rec = recovery.recover_field(m, sol.u)
    eta = estimator.indicators(m, sol.u, rec)
    tag = f"{case.name}_{_tag(cfg)}"
    dof_path = out / f"solution_{tag}.csv"
    with dof_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex_id", "x", "y", "u", "gx", "gy"])
        for i, ((x, y), u, gx, gy) in enumerate(zip(m.vertices, sol.u, rec.gx, rec.gy)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(u)),
                        repr(float(gx)), repr(float(gy))])
    report = {"dof": m.n_vertices, "cells": m.n_cells, "cg_iterations": sol.iterations,
              "cg_residual": sol.residual, "eta_global": estimator.global_indicator(eta)}
    if case.grad is not None:
        report["h1_error"] = norms.grad_error_projected(m, case.grad, sol.u)
        report["recovered_error"] = norms.recovered_error(m, case.grad, rec)
        report["supercloseness"] = norms.supercloseness(
            sol.system.matrix, sol.u, vem.interpolate(case.u, m))
    err_path = out / f"errors_{tag}.csv"
    with err_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "value"])
        for k, v in report.items():
            w.writerow([k, repr(float(v)) if isinstance(v, float) else v])
    for k, v in report.items():
        print(f"{k:16s} {v:.6e}" if isinstance(v, float) else f"{k:16s} {v}")
    if "svg" in cfg.formats:
        write_svg(m, out / f"indicator_{tag}.svg", values=eta, log_scale=True)
    print(f"wrote {dof_path} and {err_path}")
    return 0


def cmd_study(cfg):
    out = _prepare_out(cfg)
    case = bench.get_case(cfg.case)
    if cfg.adaptive:
        if cfg.mesh:
            m0, tag = load_json(cfg.mesh), Path(cfg.mesh).stem
        elif cfg.family in ("all",):
            raise ConfigError("adaptive studies need a single family or --mesh")
        else:
            m0, tag = generate(cfg.family, cfg.n, cfg.seed), f"{cfg.family}_n{cfg.n}"
        name = f"adaptive_{case.name}_{tag}"
        svg_every = 5 if "svg" in cfg.formats else cfg.max_iters + 1
        res = bench.adaptive_study(case, m0, cfg.theta, cfg.max_iters, cfg.dof_budget,
                                   out_dir=out, svg_every=svg_every, name=name,
                                   cfg=cfg.solver_config())
        last = res.rows[-1]
        print(f"{len(res.rows)} iterations, final dof {last['dof']}, eta {last['eta']:.4e}"
              + (f", kappa {last['kappa']:.4f}" if "kappa" in last else ""))
        print(f"wrote {out / (name + '.csv')}")
        return 0

    families = [f.value for f in UNIT_SQUARE_FAMILIES] if cfg.family == "all" else [cfg.family]
    status = 0
    for fam in families:
        rows = bench.convergence_study(case, fam, cfg.levels, cfg.seed, cfg.solver_config())
        path = bench.write_csv(rows, out / f"convergence_{case.name}_{fam}.csv",
                               bench.CONVERGENCE_COLUMNS)
        print(f"wrote {path}")
        if cfg.check_rates:
            if len(rows) < 2:
                raise ConfigError("rate checks need at least two levels")
            for key, slope, target, tol, ok in bench.check_rates(rows, fam):
                print(f"  {fam} {key:16s} slope {slope:+.3f} target {target:+.2f}"
                      f" +- {tol:.2f}  {'ok' if ok else 'FAIL'}")
                status |= 0 if ok else 1
    return status


HANDLERS = {"mesh": cmd_mesh, "solve": cmd_solve, "study": cmd_study}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "svg")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = _formats(make_config(args.command, file_values, flags), args)
        print(cfg.echo(), end="")
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error on {exc.filename or '?'}: {exc.strerror or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
