"""``fracinv`` command-line interface.

Subcommands::

    fracinv forward  --config run.yaml --out DIR
    fracinv noise    --config run.yaml --out DIR [--seed N]
    fracinv invert   --config run.yaml --out DIR --method NAME [--ell N|sweep] [--epsilon E]
    fracinv battery  NAME --out DIR [--config run.yaml]

Exit codes: 0 success, 1 battery failure, 2 configuration or input error,
3 solver error, 4 inversion did not converge (the report is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from fracinv import __version__
from fracinv import io as fio
from fracinv.batteries import BATTERIES, run_battery
from fracinv.config import ConfigError, RunConfig, load_config
from fracinv.forward import (
    CompatibilityWarning,
    ObservationSeries,
    SolverError,
    TimeGrid,
    solve_distributed_modal,
    solve_multi_modal,
    solve_single_modal,
    solve_spacetime_modal,
)
from fracinv.mittag_leffler import MLAccuracyError, MLDomainError
from fracinv.order_recovery import (
    MultitermOptions,
    RecoveryError,
    recover_alpha_long_time,
    recover_alpha_short_time,
    recover_multiterm,
    recover_spacetime,
)
from fracinv.weight_recovery import recover_weight

log = logging.getLogger("fracinv")

EXIT_OK = 0
EXIT_BATTERY_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NOT_CONVERGED = 4

OBSERVATION = "observation.csv"
NOISY_OBSERVATION = "observation_noisy.csv"
SOLUTION = "solution.csv"


class InputError(ValueError):
    pass


def add_noise(series: ObservationSeries, level: float, seed: int) -> ObservationSeries:
    """Multiplicative Gaussian noise ``h_j (1 + level xi_j)``; ``level = 0`` is the identity."""
    if level < 0.0:
        raise ValueError("noise level must be nonnegative")
    if level == 0.0:
        return series
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(series.h.shape)
    return ObservationSeries(series.x0, series.t, series.h * (1.0 + level * xi))


# {{{ forward


def simulate(config: RunConfig):
    """Solve the configured model; returns ``(field, grid)`` on the configured grid.

    Data generation uses ``grid.data_mode_factor`` times more modes and, for
    the time-stepping models, a grid refined ``grid.data_refine`` times, so
    that inversions with the configured resolution never see their own
    discretization (inverse-crime guard).
    """
    m = config.model
    grid = config.grid.build()
    eig = config.eigensystem(config.grid.data_mode_factor)
    a = config.initial.coefficients_for(eig)
    xs = np.linspace(0.0, config.domain.length, config.grid.nx)
    xs = np.union1d(xs, [config.sensor.x0])

    if m.kind == "single":
        return solve_single_modal(m.alpha, a, eig, grid, xs), grid
    if m.kind == "spacetime":
        return solve_spacetime_modal(m.alpha, m.gamma, a, eig, grid, xs), grid

    refine = config.grid.data_refine
    fine = grid.refine(refine)
    boundary = config.boundary.build(config.grid.horizon)
    if m.kind == "multiterm":
        field = solve_multi_modal(m.spectrum(), a, eig, fine, xs, boundary)
    else:
        field = solve_distributed_modal(m.mu.build(), m.quad_order, a, eig, fine, xs, boundary)

    # restrict to the configured grid (the refined grid keeps the coarse nodes)
    field.modal = field.modal[:, ::refine]
    field.values = field.values[:, ::refine]
    if field.lift is not None:
        lift = field.lift
        lift.left, lift.right = lift.left[::refine], lift.right[::refine]
        lift.modal, lift.source = lift.modal[:, ::refine], lift.source[:, ::refine]
    field.grid = grid
    field.provenance.update(data_refine=refine)
    return field, grid


def cmd_forward(config: RunConfig, out: Path, header_extra: dict) -> int:
    field, grid = simulate(config)
    digest = config.digest()
    extra = dict(header_extra, model=config.model.kind, solver=field.provenance.get("path"))
    h = field.at(config.sensor.x0)
    fio.write_observation(out / OBSERVATION, grid.t, h, fio.header_lines(digest, "observation", extra))
    fio.write_solution(out / SOLUTION, field, fio.header_lines(digest, "solution", extra))
    print(f"wrote {out / OBSERVATION} and {out / SOLUTION}")
    return EXIT_OK


# }}}


def _observation_path(config: RunConfig, out: Path, default: str = OBSERVATION) -> Path:
    path = Path(config.inversion.input) if config.inversion.input else out / default
    if not path.is_file():
        raise InputError(f"observation file not found: {path}")
    return path


def cmd_noise(config: RunConfig, out: Path, seed: int, header_extra: dict) -> int:
    path = _observation_path(config, out)
    h0, series = fio.read_observation(path, config.sensor.x0)
    noisy = add_noise(series, config.noise.level, seed)
    t, h = noisy.t, noisy.h
    if h0 is not None:
        t, h = np.concatenate([[0.0], t]), np.concatenate([[h0], h])
    extra = dict(header_extra, noise_level=config.noise.level, seed=seed)
    fio.write_observation(out / NOISY_OBSERVATION, t, h,
                          fio.header_lines(config.digest(), "observation", extra))
    print(f"wrote {out / NOISY_OBSERVATION}")
    return EXIT_OK


# {{{ invert


def _invert(config: RunConfig, series: ObservationSeries, method: str, ell: int,
            epsilon: float, seed: int):
    """Returns ``(status, report entries, diagnostics table)``."""
    eig = config.eigensystem()
    a = config.initial.coefficients_for(eig)

    if method == "short-time":
        a_x0 = float(config.initial.values_at([config.sensor.x0], config.eigensystem(
            config.grid.data_mode_factor))[0])
        rep = recover_alpha_short_time(series, a_x0)
        d = rep.diagnostics
        table = (["t", "ratio"], list(zip(d["ratio_t"], d["ratio"])))
        entries = {"alpha": rep.estimates["alpha"], "conditioning": d["conditioning"],
                   "decade_alphas": [x["alpha"] for x in d["decades"]]}
        return rep.status, entries, table

    if method == "long-time":
        rep = recover_alpha_long_time(series)
        d = rep.diagnostics
        table = (["t", "ratio"], list(zip(d["ratio_t"], d["ratio"])))
        return rep.status, {"alpha": rep.estimates["alpha"]}, table

    if method == "spacetime":
        rep = recover_spacetime(series, eig, a)
        table = (["gamma", "misfit"], [list(p) for p in rep.diagnostics.get("golden", [])])
        entries = dict(rep.estimates, misfit=rep.diagnostics.get("misfit", float("nan")))
        return rep.status, entries, table

    if method == "multiterm":
        opts = MultitermOptions(starts=config.inversion.starts, seed=seed, epsilon=epsilon)
        ells = [1, 2, 3] if ell == 0 else [ell]
        rows, entries, status = [], {}, "converged"
        for n in ells:
            rep = recover_multiterm(series, n, eig, a, opts)
            for c in rep.diagnostics["candidates"]:
                rows.append([n, c["start"], c["misfit"], " ".join(map(repr, c["alphas"])),
                             " ".join(map(repr, c["p"]))])
            prefix = "" if ell else f"ell{n}_"
            entries.update({f"{prefix}alphas": rep.estimates["alphas"],
                            f"{prefix}p": rep.estimates["p"],
                            f"{prefix}misfit": rep.diagnostics["misfit"],
                            f"{prefix}status": rep.status})
            if not rep.converged:
                status = rep.status
        table = (["ell", "start", "misfit", "alphas", "p"], rows)
        return status, entries, table

    # weight
    boundary = config.boundary.build(config.grid.horizon)
    est = recover_weight(series, config.inversion.nodes, epsilon, eig, a,
                         quad_order=config.model.quad_order, boundary=boundary)
    values = est.values if est.weight is not None else np.zeros(config.inversion.nodes)
    nodes = np.linspace(0.0, 1.0, values.size)
    table = (["node", "value"], list(zip(nodes, values)))
    entries = {"nodes": nodes, "values": values, "epsilon": epsilon, "misfit": est.misfit,
               "objective": est.objective}
    return est.status, entries, table


def cmd_invert(config: RunConfig, out: Path, method: str, ell: int, epsilon: float,
               seed: int, header_extra: dict) -> int:
    path = _observation_path(config, out)
    _, series = fio.read_observation(path, config.sensor.x0)
    extra = dict(header_extra, method=method, input=path.name, seed=seed)
    header = fio.header_lines(config.digest(), "report", extra)
    try:
        status, entries, table = _invert(config, series, method, ell, epsilon, seed)
    except RecoveryError as exc:
        status, entries, table = "failed", {"reason": str(exc)}, None

    fio.write_report(out / f"report_{method}.txt", dict({"status": status}, **entries), header)
    if table is not None:
        fio.write_table(out / f"diagnostics_{method}.csv", table[0], table[1],
                        fio.header_lines(config.digest(), "diagnostics", extra))
    print(f"{method}: status {status}")
    for key, value in entries.items():
        print(f"  {key}: {fio._format_value(value)}")
    return EXIT_OK if status == "converged" else EXIT_NOT_CONVERGED


# }}}


def cmd_battery(name: str, config: RunConfig | None, out: Path, header_extra: dict) -> int:
    result = run_battery(name, config)
    digest = config.digest() if config is not None else "none"
    extra = dict(header_extra, battery=name)
    rows = [[c.name, c.value, c.threshold, "pass" if c.passed else "FAIL", c.note]
            for c in result.checks]
    fio.write_table(out / f"battery_{name}.csv", ["check", "value", "threshold", "result", "note"],
                    rows, fio.header_lines(digest, "battery", extra))
    for table_name, (columns, trows) in result.tables.items():
        fio.write_table(out / f"battery_{name}_{table_name}.csv", columns, trows,
                        fio.header_lines(digest, "battery-table", extra))
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6g} (threshold {c.threshold:.6g})"
              + (f"  [{c.note}]" if c.note else ""))
    return EXIT_OK if result.passed else EXIT_BATTERY_FAILED


def _ell(value: str) -> int:
    if value == "sweep":
        return 0
    n = int(value)
    if not 1 <= n <= 3:
        raise argparse.ArgumentTypeError("ell must be 1, 2, 3 or 'sweep'")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracinv", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"fracinv {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="YAML run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")

    common(sub.add_parser("forward", help="solve the configured model and write CSVs"))
    common(sub.add_parser("noise", help="add seeded multiplicative noise to an observation"))
    p = sub.add_parser("invert", help="recover orders or the weight function")
    common(p)
    p.add_argument("--method", choices=["short-time", "long-time", "spacetime", "multiterm", "weight"])
    p.add_argument("--ell", type=_ell, default=None, help="term count (1-3) or 'sweep'")
    p.add_argument("--epsilon", type=float, default=None, help="Tikhonov weight")
    p = sub.add_parser("battery", help="run a named experiment battery")
    p.add_argument("name", choices=sorted(BATTERIES))
    common(p, config_required=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)

    try:
        config = load_config(args.config) if args.config else None
        if args.command != "battery" and config is None:
            raise ConfigError("--config is required")
        extra = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CompatibilityWarning)
            if args.command == "forward":
                return cmd_forward(config, out, extra)
            if args.command == "noise":
                seed = config.noise.seed if args.seed is None else args.seed
                return cmd_noise(config, out, seed, extra)
            if args.command == "invert":
                inv = config.inversion
                method = args.method or inv.method
                ell = inv.ell if args.ell is None else args.ell
                epsilon = inv.epsilon if args.epsilon is None else args.epsilon
                if epsilon < 0.0:
                    raise ConfigError("epsilon must be nonnegative")
                seed = inv.seed if args.seed is None else args.seed
                return cmd_invert(config, out, method, ell, epsilon, seed, extra)
            return cmd_battery(args.name, config, out, extra)
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MLAccuracyError, MLDomainError, SolverError, FloatingPointError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # remaining validation errors come from inconsistent inputs
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
