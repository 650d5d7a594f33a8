"""Command-line interface: metric curves over an SNR grid, Monte-Carlo runs
and the three-way validation.

Commands
--------
curve-outage / curve-ber   analytic curves over ``--snr-db start:stop:step``
mc-outage / mc-ber         the same sweep estimated by Monte Carlo
validate                   the canned closed-form/quadrature/Monte-Carlo grid

Pointing is given either directly (``--g`` together with ``--a0``) or as the
receiver geometry triple (``--r --omega-z --sigma-s``), never both.  dB
values are converted to linear exactly once, at parse time.  CSV output uses
the fixed header ``snr_db,value,stderr,method`` with an empty stderr column
for analytic methods.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical convergence failure (rows carry ``nan``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import channel, dualhop, montecarlo, validate as _validate
from .special import ConvergenceError, DomainError

__all__ = ["RunConfig", "parse_config", "run_curve", "run_validate", "main"]


class ConfigError(Exception):
    pass


COMMANDS = ("curve-outage", "curve-ber", "mc-outage", "mc-ber", "validate")
METHODS = ("closed-form", "quadrature", "mc")
_FILE_KEYS = {
    "alpha1", "alpha2", "g", "a0", "r", "omega_z", "sigma_s", "snr_db",
    "mu_db", "gamma_th_db", "modulation", "method", "samples", "seed",
    "out", "cf_tol", "jobs",
}


@dataclass
class RunConfig:
    """Fully resolved run parameters; dB fields keep their as-given values
    for output, linear fields are derived once at parse time."""

    command: str
    alpha1: float
    alpha2: float
    g: float
    a0: float
    r: float | None
    omega_z: float | None
    sigma_s: float | None
    snr_grid_db: list[float]
    mu_values: list[float]
    gamma_th_db: float
    gamma_th: float
    modulation: str
    method: str
    n_samples: int
    seed: int
    output_path: str | None
    cf_tol: float = 1e-4
    jobs: int = 1
    corrupt_closed_form: bool = False
    derived_pointing: channel.PointingParams | None = None


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="fsolink", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--alpha1", type=float, default=None)
        p.add_argument("--alpha2", type=float, default=None)
        p.add_argument("--g", type=float, default=None)
        p.add_argument("--a0", type=float, default=None)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--omega-z", dest="omega_z", type=float, default=None)
        p.add_argument("--sigma-s", dest="sigma_s", type=float, default=None)
        p.add_argument("--snr-db", dest="snr_db", type=str, default=None,
                       metavar="START:STOP:STEP")
        p.add_argument("--mu-db", dest="mu_db", type=float, default=None)
        p.add_argument("--gamma-th-db", dest="gamma_th_db", type=float, default=None)
        p.add_argument("--modulation", choices=("cbpsk", "nbfsk"), default=None)
        p.add_argument("--method", choices=METHODS, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--cf-tol", dest="cf_tol", type=float, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--corrupt-closed-form", dest="corrupt_closed_form",
                       action="store_true", help=argparse.SUPPRESS)
    return top


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"malformed grid {text!r}; expected START:STOP:STEP")
    try:
        start, stop, step = (float(v) for v in parts)
    except ValueError as exc:
        raise ConfigError(f"malformed grid {text!r}: {exc}") from None
    if step <= 0.0:
        raise ConfigError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def _merge_file(args: argparse.Namespace, path: str) -> None:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _FILE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    for key, value in data.items():
        if getattr(args, key, None) is None:  # flags override file values
            setattr(args, key, value)


def _resolve_pointing(args) -> tuple[float, float, channel.PointingParams | None]:
    triple = (args.r, args.omega_z, args.sigma_s)
    have_triple = [v is not None for v in triple]
    if any(have_triple):
        if not all(have_triple):
            raise ConfigError(
                "geometry requires all of --r, --omega-z and --sigma-s"
            )
        if args.g is not None or args.a0 is not None:
            raise ConfigError(
                "give either the geometry triple (--r --omega-z --sigma-s) or "
                "the direct pair (--g --a0), not both"
            )
        try:
            pt = channel.pointing_geometry(args.r, args.omega_z, args.sigma_s)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        return pt.g, pt.a0, pt
    if args.g is None or args.a0 is None:
        raise ConfigError(
            "pointing is underdetermined: give both --g and --a0, or the "
            "geometry triple --r --omega-z --sigma-s"
        )
    return args.g, args.a0, None


def parse_config(argv: list[str]) -> RunConfig:
    """Parse flags (and an optional ``--config`` JSON file; flags win) into a
    validated RunConfig.  Raises ConfigError on any invalid combination."""
    args = _build_parser().parse_args(argv)
    if args.config is not None:
        _merge_file(args, args.config)

    defaults = {
        "alpha1": 2.0, "alpha2": 2.0, "gamma_th_db": 0.0, "modulation": "cbpsk",
        "method": "closed-form", "samples": 200_000, "seed": 20170607,
        "cf_tol": 1e-4, "jobs": 1,
    }
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)

    command = args.command
    g, a0, derived = _resolve_pointing(args)

    for name, value in (("alpha1", args.alpha1), ("alpha2", args.alpha2), ("g", g)):
        if not value > 0.0:
            raise ConfigError(f"{name} must be positive, got {value}")
    if not 0.0 < a0 <= 1.0:
        raise ConfigError(f"a0 must lie in (0, 1], got {a0}")
    if args.samples < 1:
        raise ConfigError(f"samples must be >= 1, got {args.samples}")
    if args.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {args.jobs}")

    if command == "validate":
        grid_db = _parse_grid(args.snr_db) if args.snr_db is not None else [10.0, 20.0, 30.0]
    else:
        if args.snr_db is not None and args.mu_db is not None:
            raise ConfigError("give either --snr-db or --mu-db, not both")
        if args.snr_db is not None:
            grid_db = _parse_grid(args.snr_db)
        elif args.mu_db is not None:
            grid_db = [float(args.mu_db)]
        else:
            raise ConfigError("an SNR grid is required: --snr-db START:STOP:STEP or --mu-db X")
    if not grid_db:
        raise ConfigError("empty SNR grid")

    method = "mc" if command in ("mc-outage", "mc-ber") else args.method
    # the one and only dB -> linear conversion
    mu_values = [10.0 ** (db / 10.0) for db in grid_db]
    gamma_th = 10.0 ** (args.gamma_th_db / 10.0)

    return RunConfig(
        command=command,
        alpha1=float(args.alpha1),
        alpha2=float(args.alpha2),
        g=float(g),
        a0=float(a0),
        r=args.r,
        omega_z=args.omega_z,
        sigma_s=args.sigma_s,
        snr_grid_db=grid_db,
        mu_values=mu_values,
        gamma_th_db=float(args.gamma_th_db),
        gamma_th=gamma_th,
        modulation=str(args.modulation).lower(),
        method=method,
        n_samples=int(args.samples),
        seed=int(args.seed),
        output_path=args.out,
        cf_tol=float(args.cf_tol),
        jobs=int(args.jobs),
        corrupt_closed_form=bool(getattr(args, "corrupt_closed_form", False)),
        derived_pointing=derived,
    )


def _echo_parameters(cfg: RunConfig) -> None:
    bits = [
        f"command={cfg.command}", f"alpha1={cfg.alpha1:g}", f"alpha2={cfg.alpha2:g}",
        f"g={cfg.g:.9g}", f"a0={cfg.a0:.9g}",
    ]
    if cfg.derived_pointing is not None:
        pt = cfg.derived_pointing
        bits += [f"theta={pt.theta:.9g}", f"omega_zeq={pt.omega_zeq:.9g}"]
    bits += [
        f"gamma_th_db={cfg.gamma_th_db:g}", f"modulation={cfg.modulation}",
        f"method={cfg.method}", f"samples={cfg.n_samples}", f"seed={cfg.seed}",
        f"grid_points={len(cfg.snr_grid_db)}",
    ]
    print("# " + " ".join(bits), file=sys.stderr)


def _link_for(cfg: RunConfig, mu: float) -> dualhop.LinkConfig:
    pt = channel.PointingParams.from_ratio(cfg.g, cfg.a0)
    hop1 = channel.HopParams(alpha=cfg.alpha1, mu=mu, pointing=pt)
    hop2 = channel.HopParams(alpha=cfg.alpha2, mu=mu, pointing=pt)
    return dualhop.LinkConfig(hop1, hop2)


def _format_row(snr_db: float, value: float, stderr: float | None, method: str) -> str:
    se = "" if stderr is None else f"{stderr:.6e}"
    return f"{snr_db:.12g},{value:.12e},{se},{method}"


def _write_rows(cfg: RunConfig, rows: list[str]) -> None:
    text = "snr_db,value,stderr,method\n" + "\n".join(rows) + "\n"
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run_curve(cfg: RunConfig) -> int:
    """Evaluate the metric over the grid and emit CSV; one row per point,
    ascending snr_db.  A point that fails to converge is emitted as nan and
    turns the exit code into 3."""
    _echo_parameters(cfg)
    want_ber = cfg.command in ("curve-ber", "mc-ber")
    mod = dualhop.modulation_params(cfg.modulation)
    req = dualhop.OutageRequest(cfg.gamma_th)
    rows = []
    failed = False
    for idx, (db, mu) in enumerate(zip(cfg.snr_grid_db, cfg.mu_values)):
        link = _link_for(cfg, mu)
        stderr: float | None = None
        try:
            if cfg.method == "mc":
                plan = montecarlo.SimPlan(cfg.n_samples, master_seed=cfg.seed + idx)
                rep = (montecarlo.estimate_ber(link, mod, plan, n_jobs=cfg.jobs)
                       if want_ber else
                       montecarlo.estimate_outage(link, req, plan, n_jobs=cfg.jobs))
                value, stderr = rep.value, rep.stderr
            else:
                method = cfg.method.replace("-", "_")
                value = (dualhop.avg_ber(link, mod, method) if want_ber
                         else dualhop.outage_probability(link, req, method))
        except ConvergenceError as exc:
            print(f"# convergence failure at snr_db={db:g}: {exc}", file=sys.stderr)
            value = float("nan")
            failed = True
        rows.append(_format_row(db, value, stderr, cfg.method))
    _write_rows(cfg, rows)
    return 3 if failed else 0


def run_validate(cfg: RunConfig) -> int:
    """Run the three-way validation grid; writes the report and returns 0
    only if every case passed."""
    _echo_parameters(cfg)
    report = _validate.run_validation(
        a0=cfg.a0,
        mu_dbs=tuple(cfg.snr_grid_db),
        n_samples=cfg.n_samples,
        seed=cfg.seed,
        cf_tol=cfg.cf_tol,
        n_jobs=cfg.jobs,
        corrupt_closed_form=cfg.corrupt_closed_form,
    )
    text = report.render()
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    for case in report.failing_cases:
        print(f"# FAILED case: {case.kind} {case.params} ({case.note})", file=sys.stderr)
    print(f"# validation {'passed' if report.passed else 'FAILED'} "
          f"({len(report.cases)} cases)", file=sys.stderr)
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse's own exit (bad flag, --help)
        return int(exc.code or 0)
    try:
        if cfg.command == "validate":
            return run_validate(cfg)
        return run_curve(cfg)
    except (DomainError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
