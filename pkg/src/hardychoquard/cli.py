"""Command line entry point: ground-state, simulate, classify, verify.

Exit codes: 0 success, 1 numerical failure (non-convergence, step failure,
failed verification), 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import platform
import sys
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__, analytic, dynamics, groundstate
from .config import ConfigError, RunConfig, config_hash, dump_config, load_config
from .core import RadialField, make_grid, make_params
from .io import FieldFormatError, format_scalar, read_field, write_document, write_field, write_rows
from .riesz import build_riesz
from .verify import SUITES, run_suite

log = logging.getLogger("hardychoquard")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


class _Run:
    """Shared state for one invocation: config, output directory, format."""

    def __init__(self, cfg: RunConfig, out: Path, fmt: str, command: str):
        self.cfg = cfg
        self.out = out
        self.fmt = fmt
        self.command = command
        self.ext = "csv" if fmt == "csv" else "jsonl"
        out.mkdir(parents=True, exist_ok=True)
        try:
            self.params = make_params(cfg.model.d, cfg.model.alpha, cfg.model.p)
            self.grid = make_grid(cfg.grid.N, cfg.grid.r_max, cfg.grid.grading)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def manifest(self, extra: dict | None = None) -> None:
        rec = {
            "command": self.command,
            "config_hash": config_hash(self.cfg),
            "seed": self.cfg.seed,
            "package_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pyyaml": yaml.__version__,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        rec.update(extra or {})
        write_document(self.out / "manifest.txt", rec)
        (self.out / "config.yaml").write_text(dump_config(self.cfg))

    def doc(self, name: str, record: dict) -> Path:
        path = self.out / (f"{name}.txt" if self.fmt == "csv" else f"{name}.jsonl")
        return write_document(path, record, self.fmt)


def _print_record(record: dict) -> None:
    for k, v in record.items():
        print(f"{k}: {format_scalar(v)}")


def _ground_state(run: _Run):
    prm = run.params
    if prm.regime.name != "GROUND_STATE_RANGE":
        lo, hi = prm.p_low, prm.p_high
        raise ConfigError(
            f"p = {prm.p} is excluded by Pohožaev identities: nontrivial solutions need {lo:.6g} < p < {hi:.6g}"
        )
    op = build_riesz(prm, run.grid)
    s = run.cfg.solver
    init = groundstate.gaussian_init(run.grid) if s.init == "gaussian" else None
    gs = groundstate.compute_ground_state(prm, run.grid, op, init=init, tol=s.tol, max_iter=s.max_iter)
    return gs, op


def cmd_ground_state(run: _Run) -> int:
    gs, op = _ground_state(run)
    prm = run.params
    profile = write_field(run.out / "ground_state_profile.txt", gs.Q, prm)
    ratio_n, ratio_h = groundstate.pohozaev_ratios(prm)
    rec = gs.scalars()
    rec.update({
        "choquard_over_mass": gs.N_gs / gs.M_gs**2,
        "choquard_over_mass_exact": ratio_n,
        "hardy_over_mass": gs.H_gs**2 / gs.M_gs**2,
        "hardy_over_mass_exact": ratio_h,
        "profile_file": str(profile),
    })
    asym = groundstate.asymptotics_report(gs.Q, prm)
    rec.update({f"asymptotics_{k}": v for k, v in asym.as_dict().items()})
    run.doc("ground_state", rec)
    run.manifest()
    _print_record(rec)
    if not gs.converged:
        print("error: Weinstein descent did not converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _datum(run: _Run, datum_path: str | None):
    """Build the initial datum; returns (field, ground-state result or None, riesz)."""
    prm, grid, d = run.params, run.grid, run.cfg.datum
    path = datum_path or (d.path if d.kind == "file" else None)
    gs = None
    op = build_riesz(prm, grid)
    if path is not None:
        f, fprm = read_field(path)
        if (fprm.d, fprm.alpha, fprm.p) != (prm.d, prm.alpha, prm.p):
            raise ConfigError(f"datum file parameters (d={fprm.d}, alpha={fprm.alpha}, p={fprm.p}) differ from the config")
        if not f.grid.same_as(grid):
            raise ConfigError(f"datum file grid {f.grid.key()} differs from the config grid {grid.key()}")
        return f, gs, op
    r = grid.nodes
    if d.kind == "gaussian":
        return RadialField(grid, d.amplitude * np.exp(-0.5 * (r / d.width) ** 2) * np.exp(1j * d.chirp * r**2)), gs, op
    gs, op = _ground_state(run)
    if d.kind == "ground_state":
        return gs.Q * d.amplitude, gs, op
    sol = analytic.PseudoconformalSolution(gs.Q, d.T, d.lam, d.gamma, prm)
    return analytic.evaluate_pseudoconformal(sol, 0.0, grid), gs, op


def _gs_for_classification(run: _Run, gs):
    prm = run.params
    if gs is not None or prm.regime.name != "GROUND_STATE_RANGE":
        return gs
    needs = not (prm.d - 2 < prm.alpha and 2 < prm.p < prm.p_mass_critical)
    return _ground_state(run)[0] if needs else None


def cmd_simulate(run: _Run, datum_path: str | None) -> int:
    prm = run.params
    if not prm.dynamics_ok:
        raise ConfigError(f"(d, alpha, p) = ({prm.d}, {prm.alpha}, {prm.p}) is outside the dynamics range")
    u0, gs, op = _datum(run, datum_path)
    dyn = run.cfg.dynamics
    ctl = dynamics.SimControls(blowup_factor=dyn.blowup_factor, snapshot_interval=dyn.snapshot_interval,
                               adaptive=dyn.adaptive)
    traj = dynamics.simulate(u0, prm, op, dyn.dt0, dyn.t_end, ctl)
    write_rows(run.out / f"trajectory.{run.ext}", traj.rows(), dynamics.TRAJECTORY_COLUMNS, run.fmt)
    write_field(run.out / "final_field.txt", traj.states[-1].field, prm)
    rec = {
        "status": traj.status.value,
        "t_final": traj.states[-1].t,
        "t_blowup_est": traj.t_blowup_est if traj.t_blowup_est is not None else float("nan"),
        "steps": traj.steps,
        "boundary_contaminated": traj.boundary_contaminated,
        "message": traj.message,
    }
    rec.update(traj.conservation_drift)
    gs = _gs_for_classification(run, gs)
    if prm.dynamics_ok:
        try:
            verdict = dynamics.classify(u0, prm, gs, op)
            rec["verdict"] = verdict.kind.value
        except ValueError as exc:
            rec["verdict"] = f"unavailable ({exc})"
    run.doc("simulate", rec)
    run.manifest()
    _print_record(rec)
    return EXIT_NUMERICAL if traj.status is dynamics.Status.STEP_FAILURE else EXIT_OK


def cmd_classify(run: _Run, datum_path: str | None) -> int:
    prm = run.params
    if not prm.dynamics_ok:
        raise ConfigError(f"(d, alpha, p) = ({prm.d}, {prm.alpha}, {prm.p}) is outside the dynamics range")
    u0, gs, op = _datum(run, datum_path)
    gs = _gs_for_classification(run, gs)
    verdict = dynamics.classify(u0, prm, gs, op)
    rec = {"verdict": verdict.kind.value, **verdict.witnesses}
    run.doc("verdict", rec)
    run.manifest()
    _print_record(rec)
    return EXIT_OK


def cmd_verify(run: _Run, suite: str) -> int:
    try:
        checks, rows = run_suite(suite, run.cfg, run.params, run.grid, run.cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if rows:
        write_rows(run.out / f"verify_{suite}.{run.ext}", rows, list(rows[0]), run.fmt)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  value={c.value:.17g}  threshold={c.threshold:.17g}")
    run.doc(f"verify_{suite}_summary", {c.name: c.value for c in checks} | {"all_passed": all(c.passed for c in checks)})
    run.manifest({"suite": suite})
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    common.add_argument("--out", default=None, help="output directory (overrides outputs.directory)")
    common.add_argument("--format", choices=("csv", "json-lines"), default=None,
                        help="table/document format (default: first entry of outputs.formats)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="hardychoquard", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("ground-state", parents=[common], help="compute the ground state and threshold constants")
    sp = sub.add_parser("simulate", parents=[common], help="integrate the Cauchy problem")
    sp.add_argument("--datum", default=None, help="initial datum field file (overrides the datum block)")
    cp = sub.add_parser("classify", parents=[common], help="apply the global-existence / blow-up criteria")
    cp.add_argument("--datum", default=None, help="initial datum field file")
    vp = sub.add_parser("verify", parents=[common], help="run a property suite")
    vp.add_argument("suite", choices=sorted(SUITES))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
        fmt = args.format or cfg.outputs.formats[0]
        out = Path(args.out or cfg.outputs.directory)
        run = _Run(cfg, out, fmt, args.command)
        if args.command == "ground-state":
            return cmd_ground_state(run)
        if args.command == "simulate":
            return cmd_simulate(run, args.datum)
        if args.command == "classify":
            return cmd_classify(run, args.datum)
        return cmd_verify(run, args.suite)
    except (ConfigError, FieldFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (groundstate.NonConvergence, dynamics.StepFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
