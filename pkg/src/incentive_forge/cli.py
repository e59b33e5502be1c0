"""Scenario-driven command line interface.

Subcommands read a strict JSON scenario, run one analysis, and write
deterministic JSON/CSV files for external plotting or inspection.

Exit codes: 0 success, 2 invalid scenario, 3 instability/overflow where
stability is required, 4 failed gradient self-check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import scalar as sc
from .cost import expected_cost, monte_carlo_cost
from .dynamics import propagate_moments, sample_initial_state, simulate, steady_state_error
from .errors import IncentiveForgeError, NonFinite, Unstable
from .gradient import analytic_gradient, finite_difference_gradient
from .model import GameInstance, IncentiveMatrix, build_closed_loop, validate
from .optimizer import OptimizerConfig, optimize, sweep_cost

GRADCHECK_TOL = 1e-5

_TOP_KEYS = {"n", "m", "A", "B", "Q", "R", "xref", "N", "mu0", "Sigma0",
             "theta", "optimizer", "monte_carlo", "sweep", "output_dir"}
_OPT_KEYS = {"max_iters", "grad_tol", "initial_step", "backtrack_factor",
             "armijo_c"}
_MC_KEYS = {"samples", "seed"}
_SWEEP_KEYS = {"variable", "grid", "values"}
_GRID_KEYS = {"start", "stop", "step"}


class ScenarioError(Exception):
    """Scenario file failed validation."""


def worker_cap() -> int:
    """Worker count cap from INCENTIVE_FORGE_THREADS (results never depend on it)."""
    try:
        return max(1, int(os.environ.get("INCENTIVE_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ScenarioError(f"unknown keys in {where}: {sorted(unknown)}")


class Scenario:
    """Parsed and validated scenario file."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ScenarioError("scenario must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "scenario")
        for key in ("n", "m", "A", "B", "Q", "R", "xref", "N", "mu0", "Sigma0"):
            if key not in raw:
                raise ScenarioError(f"missing required field '{key}'")
        n, m = raw["n"], raw["m"]
        try:
            instance = validate(GameInstance(
                A=np.array(raw["A"], dtype=float),
                B=np.array(raw["B"], dtype=float).reshape(n, m),
                Q=np.array(raw["Q"], dtype=float),
                R=np.array(raw["R"], dtype=float),
                xref=np.array(raw["xref"], dtype=float),
                N=int(raw["N"]),
                mu0=np.array(raw["mu0"], dtype=float),
                Sigma0=np.array(raw["Sigma0"], dtype=float),
            ))
        except (IncentiveForgeError, ValueError) as exc:
            raise ScenarioError(str(exc)) from exc
        if instance.n != n or instance.m != m:
            raise ScenarioError(
                f"declared n={n}, m={m} but matrices imply "
                f"n={instance.n}, m={instance.m}")
        self.instance = instance

        self.theta = None
        if raw.get("theta") is not None:
            Th = np.array(raw["theta"], dtype=float)
            if Th.shape != (n, m):
                raise ScenarioError(
                    f"theta must be {n}x{m} row-major, got shape {Th.shape}")
            self.theta = IncentiveMatrix(Th)

        opt = raw.get("optimizer", {})
        _reject_unknown(opt, _OPT_KEYS, "optimizer")
        try:
            self.optimizer_config = OptimizerConfig(
                max_iters=int(opt.get("max_iters", 10_000)),
                grad_tol=float(opt.get("grad_tol", 1e-8)),
                initial_step=float(opt.get("initial_step", 1.0)),
                backtrack_factor=float(opt.get("backtrack_factor", 0.5)),
                armijo_c=float(opt.get("armijo_c", 1e-4)),
                theta_init=self.theta,
            )
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

        mc = raw.get("monte_carlo", {})
        _reject_unknown(mc, _MC_KEYS, "monte_carlo")
        self.samples = int(mc.get("samples", 1))
        self.seed = int(mc.get("seed", 0))
        if self.samples < 1:
            raise ScenarioError("monte_carlo.samples must be positive")

        self.sweep = raw.get("sweep")
        if self.sweep is not None:
            _reject_unknown(self.sweep, _SWEEP_KEYS, "sweep")
            if self.sweep.get("variable") not in ("theta", "N", "R"):
                raise ScenarioError("sweep.variable must be one of theta, N, R")
            if ("grid" in self.sweep) == ("values" in self.sweep):
                raise ScenarioError("sweep needs exactly one of grid or values")
            if "grid" in self.sweep:
                _reject_unknown(self.sweep["grid"], _GRID_KEYS, "sweep.grid")

        self.output_dir = raw.get("output_dir")

    def require_theta(self) -> IncentiveMatrix:
        if self.theta is None:
            raise ScenarioError("scenario field 'theta' is required for this command")
        return self.theta

    def scalar_instance(self) -> sc.ScalarInstance:
        inst = self.instance
        if inst.n != 1 or inst.m != 1:
            raise ScenarioError("scalar analysis requires n = m = 1")
        try:
            return sc.ScalarInstance(
                A=float(inst.A[0, 0]), B=float(inst.B[0, 0]),
                Q=float(inst.Q[0, 0]), R=float(inst.R[0, 0]),
                xref=float(inst.xref[0]), N=inst.N,
                mu0=float(inst.mu0[0]), var0=float(inst.Sigma0[0, 0]))
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return Scenario(raw)


def _fmt(v) -> str:
    """Shortest round-trip decimal for floats, plain str otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_, bool)):  # before int: bool is an int subclass
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _stability_block(cl) -> dict:
    return {"spectral_radius": cl.spectral_radius, "is_schur": cl.is_schur}


def cmd_evaluate(scn: Scenario, out: Path) -> int:
    theta = scn.require_theta()
    cb = expected_cost(scn.instance, theta)
    cl = build_closed_loop(scn.instance, theta)
    ss = steady_state_error(scn.instance, theta) if cl.is_schur else None
    write_json(out / "result.json", {
        "cost": {"total": cb.total, "tracking": cb.tracking,
                 "payment": cb.payment, "per_stage": cb.per_stage},
        "stability": _stability_block(cl),
        "steady_state_error": ss,
        "theta": theta.Theta,
    })
    return 0


def cmd_gradcheck(scn: Scenario, out: Path, corrupt: bool = False) -> int:
    theta = scn.require_theta()
    g_analytic = analytic_gradient(scn.instance, theta)
    if corrupt:  # negative-control hook for the test suite
        g_analytic = g_analytic + 1.0
    g_fd = finite_difference_gradient(scn.instance, theta)
    denom = max(1.0, float(np.linalg.norm(g_analytic)))
    disc = float(np.linalg.norm(g_analytic - g_fd)) / denom
    write_json(out / "gradcheck.json", {
        "analytic": g_analytic,
        "finite_difference": g_fd,
        "max_relative_discrepancy": disc,
        "tolerance": GRADCHECK_TOL,
        "passed": disc <= GRADCHECK_TOL,
    })
    return 0 if disc <= GRADCHECK_TOL else 4


def cmd_optimize(scn: Scenario, out: Path) -> int:
    report = optimize(scn.instance, scn.optimizer_config)
    n, m = scn.instance.n, scn.instance.m
    header = ["iter", "cost", "grad_norm"] + [
        f"theta_{i}_{j}" for i in range(n) for j in range(m)]
    rows = []
    for t, (c, gn, th) in enumerate(zip(report.cost_trace,
                                        report.grad_norm_trace,
                                        report.theta_trace)):
        rows.append([t, c, gn] + list(np.asarray(th).ravel()))
    write_csv(out / "trace.csv", header, rows)
    write_json(out / "result.json", {
        "theta_final": report.theta_final.Theta,
        "converged": report.converged,
        "iterations": len(report.cost_trace),
        "final_cost": report.cost_trace[-1],
        "stability": _stability_block(report.final_stability),
        "steady_state_error_norm": report.steady_state_error_norm,
    })
    return 0


def cmd_simulate(scn: Scenario, out: Path) -> int:
    theta = scn.require_theta()
    inst = scn.instance
    n, m = inst.n, inst.m
    header = (["k"] + [f"x_{i}" for i in range(n)] + [f"u_{j}" for j in range(m)]
              + ["payment", "leader_stage_cost", "follower_stage_cost"])

    def rows_of(traj):
        for k in range(inst.N):
            yield ([k] + list(traj.x[k]) + list(traj.u[k])
                   + [traj.payment[k], traj.leader_stage_cost[k],
                      traj.follower_stage_cost[k]])

    if scn.samples == 1:
        x0 = sample_initial_state(inst, scn.seed, 0)
        traj = simulate(inst, theta, x0)
        write_csv(out / "trajectory.csv", header, rows_of(traj))
        return 0

    errors = np.empty((scn.samples, inst.N, n))
    for i in range(scn.samples):
        x0 = sample_initial_state(inst, scn.seed, i)
        traj = simulate(inst, theta, x0)
        write_csv(out / f"trajectory_{i:04d}.csv", header, rows_of(traj))
        errors[i] = traj.x - inst.xref
    sum_header = (["k"] + [f"mean_e_{i}" for i in range(n)]
                  + [f"var_e_{i}" for i in range(n)])
    mean = errors.mean(axis=0)
    var = errors.var(axis=0, ddof=1)
    write_csv(out / "summary.csv", sum_header,
              ([k] + list(mean[k]) + list(var[k]) for k in range(inst.N)))
    return 0


def cmd_scalar(scn: Scenario, out: Path) -> int:
    s = scn.scalar_instance()
    result = {
        "stability_interval": list(sc.stability_interval(s)),
    }
    if scn.theta is not None:
        theta = float(scn.theta.Theta[0, 0])
        result["closed_form_cost"] = sc.closed_form_cost(s, theta)
    try:
        inf = sc.theta_opt_infinite_horizon(s)
        result["theta_opt_infinite_horizon"] = {
            "value": inf.theta_star, "regime": inf.regime}
    except IncentiveForgeError as exc:
        result["theta_opt_infinite_horizon"] = {"error": str(exc)}
    try:
        gamma, gamma_prime = sc.gamma_diagnostics(s)
        rlim = sc.theta_opt_R_infinity(s)
        result["theta_opt_R_infinity"] = {"value": rlim.theta_star,
                                          "regime": rlim.regime}
        result["gamma"] = gamma
        result["gamma_prime"] = gamma_prime
    except IncentiveForgeError as exc:
        result["theta_opt_R_infinity"] = {"error": str(exc)}
    write_json(out / "scalar.json", result)
    return 0


def _grid_values(sweep: dict):
    if "values" in sweep:
        return list(sweep["values"])
    g = sweep["grid"]
    start, stop, step = float(g["start"]), float(g["stop"]), float(g["step"])
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _argmin_theta(s: sc.ScalarInstance, cost_fn) -> float:
    """Deterministic refined grid search over the stability interval."""
    lo, hi = sc.stability_interval(s)
    span = hi - lo
    lo, hi = lo + 1e-9 * span, hi - 1e-9 * span
    for _ in range(4):
        grid = np.linspace(lo, hi, 2001)
        vals = np.array([cost_fn(t) for t in grid])
        i = int(np.argmin(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
    return float(grid[i])


def cmd_sweep(scn: Scenario, out: Path) -> int:
    if scn.sweep is None:
        raise ScenarioError("scenario field 'sweep' is required for this command")
    variable = scn.sweep["variable"]
    values = _grid_values(scn.sweep)
    inst = scn.instance

    if variable == "theta":
        if inst.n == 1 and inst.m == 1 and np.isscalar(values[0]):
            pairs = sweep_cost(inst, [np.array([[float(v)]]) for v in values])
            rows = [[float(v), c] for v, (_, c) in zip(values, pairs)]
            write_csv(out / "sweep.csv", ["theta", "cost"], rows)
        else:
            pairs = sweep_cost(inst, values)
            header = [f"theta_{i}_{j}" for i in range(inst.n)
                      for j in range(inst.m)] + ["cost"]
            rows = [list(th.ravel()) + [c] for th, c in pairs]
            write_csv(out / "sweep.csv", header, rows)
        return 0

    s = scn.scalar_instance()
    if variable == "N":
        rows = []
        for v in values:
            sN = sc.ScalarInstance(A=s.A, B=s.B, Q=s.Q, R=s.R, xref=s.xref,
                                   N=int(v), mu0=s.mu0, var0=s.var0)
            rows.append([int(v), _argmin_theta(
                sN, lambda t: sc.closed_form_cost(sN, t))])
        write_csv(out / "sweep.csv", ["N", "argmin_theta"], rows)
    else:  # variable == "R"
        rows = []
        for v in values:
            sR = sc.ScalarInstance(A=s.A, B=s.B, Q=s.Q, R=float(v), xref=s.xref,
                                   N=s.N, mu0=s.mu0, var0=s.var0)
            rows.append([float(v), _argmin_theta(
                sR, lambda t: sc.closed_form_cost(sR, t))])
        write_csv(out / "sweep.csv", ["R", "argmin_theta"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incentive-forge",
        description="Design and analysis of fixed bilinear incentive mechanisms "
                    "for linear systems with a myopic follower.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("evaluate", "gradcheck", "optimize", "simulate", "scalar", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="path to scenario JSON")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override monte_carlo.seed")
        if name == "gradcheck":
            p.add_argument("--corrupt", action="store_true",
                           help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    worker_cap()  # parsed for the contract; execution is sequential
    try:
        scn = load_scenario(args.scenario)
        if args.seed is not None:
            scn.seed = args.seed
        out = Path(args.out or scn.output_dir or ".")
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "evaluate":
            return cmd_evaluate(scn, out)
        if args.command == "gradcheck":
            return cmd_gradcheck(scn, out, corrupt=args.corrupt)
        if args.command == "optimize":
            return cmd_optimize(scn, out)
        if args.command == "simulate":
            return cmd_simulate(scn, out)
        if args.command == "scalar":
            return cmd_scalar(scn, out)
        return cmd_sweep(scn, out)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except NonFinite as exc:
        print(f"numeric overflow: {exc}", file=sys.stderr)
        return 3
    except Unstable as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
