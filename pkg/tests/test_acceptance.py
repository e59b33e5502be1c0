"""Acceptance suite: one test per exit criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass/fail lines.
"""

import json
import time

import numpy as np
import pytest

from incentive_forge import (GameInstance, IncentiveMatrix, ScalarInstance,
                             analytic_gradient, build_closed_loop,
                             closed_form_cost, expected_cost,
                             finite_difference_gradient, monte_carlo_cost,
                             optimize, sample_initial_state, simulate,
                             social_cost, steady_state_avg_cost,
                             theta_opt_R_infinity, theta_opt_infinite_horizon,
                             validate)
from incentive_forge.cli import main as cli_main
from conftest import random_instance, random_theta

THETA_INF = 1.0 / (0.4 - 1.0)  # -1.6667, long-horizon optimum of the fixture


def scalar_fixture(N=10, R=1.0, Q=1.0, var0=0.09):
    return validate(GameInstance(A=[[0.4]], B=[[1.0]], Q=[[Q]], R=[[R]],
                                 xref=[1.0], N=N, mu0=[-1.0],
                                 Sigma0=[[var0]]))


def scalar_closed(N=10, R=1.0, Q=1.0, var0=0.09):
    return ScalarInstance(A=0.4, B=1.0, Q=Q, R=R, xref=1.0, N=N,
                          mu0=-1.0, var0=var0)


def twodim_fixture():
    return validate(GameInstance(
        A=[[1.0, 0.3], [0.0, 1.0]], B=[[0.5], [1.0]],
        Q=np.eye(2), R=[[2.0]], xref=[1.0, 0.0], N=20,
        mu0=[-1.0, 0.0], Sigma0=np.zeros((2, 2))))


def grid_argmin(cost_fn, lo, hi, step):
    grid = np.arange(lo, hi + step * 1e-9, step)
    vals = np.array([cost_fn(t) for t in grid])
    return float(grid[int(np.argmin(vals))])


def refined_argmin(cost_fn, lo, hi, rounds=5, points=2001):
    for _ in range(rounds):
        grid = np.linspace(lo, hi, points)
        vals = np.array([cost_fn(t) for t in grid])
        i = int(np.argmin(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    return float(grid[i])


def verdict(num, ok, detail):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_gradient_correctness():
    start = time.time()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(200):
        inst = random_instance(rng, n_max=4, m_max=4, n_horizon=30)
        th = random_theta(rng, inst)
        g = analytic_gradient(inst, th)
        g_fd = finite_difference_gradient(inst, th, 1e-5)
        worst = max(worst, np.linalg.norm(g - g_fd)
                    / max(1.0, np.linalg.norm(g)))
    elapsed = time.time() - start
    verdict(1, worst <= 1e-5 and elapsed <= 60.0,
            f"max rel err {worst:.3g} over 200 instances in {elapsed:.1f}s")


def test_criterion_2_scalar_generic_equivalence():
    rng = np.random.default_rng(1002)
    worst = 0.0
    checked = 0
    while checked < 500:
        A = float(rng.uniform(-1.5, 1.5))
        B = float(rng.uniform(0.1, 2.0))
        Q = float(rng.uniform(0.1, 3.0))
        R = float(rng.uniform(0.1, 3.0))
        s = ScalarInstance(A=A, B=B, Q=Q, R=R,
                           xref=float(rng.uniform(-2, 2)),
                           N=int(rng.integers(1, 31)),
                           mu0=float(rng.uniform(-2, 2)),
                           var0=float(rng.uniform(0, 1)))
        kind = checked % 5
        if kind == 0:
            theta = float(rng.uniform(-4, 4))  # includes |A_Theta| > 1
        else:
            # force A_Theta near +/-1 with offsets down to 1e-8
            target = (1.0, -1.0)[kind % 2]
            delta = 10.0**float(rng.uniform(-8, -2)) * rng.choice([-1, 1])
            theta = 2 * R * (target + delta - A) / B
        inst = validate(GameInstance(A=[[s.A]], B=[[s.B]], Q=[[s.Q]],
                                     R=[[s.R]], xref=[s.xref], N=s.N,
                                     mu0=[s.mu0], Sigma0=[[s.var0]]))
        J = closed_form_cost(s, theta)
        J_ref = expected_cost(inst, IncentiveMatrix([[theta]])).total
        worst = max(worst, abs(J - J_ref) / max(1.0, abs(J_ref)))
        checked += 1
    verdict(2, worst <= 1e-9, f"max rel err {worst:.3g} over 500 instances")


def test_criterion_3_monte_carlo_validation():
    inst = scalar_fixture()
    oracle = 10.0 + 0.09 * (1.0 - 0.16**10) / 0.84  # roll-out oracle
    analytic0 = expected_cost(inst, IncentiveMatrix([[0.0]])).total
    ok = abs(analytic0 - oracle) <= 1e-6
    details = [f"analytic vs roll-out gap {abs(analytic0 - oracle):.2g}"]
    for theta in (0.0, -1.0, -1.6667):
        analytic = expected_cost(inst, IncentiveMatrix([[theta]])).total
        est, se = monte_carlo_cost(inst, IncentiveMatrix([[theta]]),
                                   samples=100_000, seed=2024)
        ok = ok and abs(est - analytic) <= 4 * se
        details.append(f"theta={theta}: |mc-analytic|/se="
                       f"{abs(est - analytic) / se:.2f}")
    verdict(3, ok, "; ".join(details))


def test_criterion_4_twodim_design_fixture():
    start = time.time()
    report = optimize(twodim_fixture())
    elapsed = time.time() - start
    stalled = (len(report.cost_trace) >= 2
               and abs(report.cost_trace[-1] - report.cost_trace[-2]) <= 1e-12)
    ok = ((report.converged or stalled)
          and report.final_stability.is_schur
          and report.steady_state_error_norm is not None
          and report.steady_state_error_norm <= 1e-6
          and bool(np.all(np.diff(report.cost_trace) <= 0.0))
          and elapsed <= 10.0)
    verdict(4, ok,
            f"converged={report.converged}, "
            f"rho={report.final_stability.spectral_radius:.4f}, "
            f"ss_err={report.steady_state_error_norm:.2e}, "
            f"iters={len(report.cost_trace)}, {elapsed:.1f}s")


def test_criterion_5_infinite_horizon_asymptotics():
    s = scalar_closed()
    res = theta_opt_infinite_horizon(s)
    oracle = grid_argmin(lambda t: steady_state_avg_cost(s, t),
                         -2.8 + 1e-4, 1.2 - 1e-4, 1e-4)
    ok = (res.regime == "interior"
          and abs(res.theta_star - THETA_INF) <= 1e-12
          and abs(res.theta_star - oracle) <= 2e-4)
    s1 = ScalarInstance(A=1.0, B=1.0, Q=1.0, R=1.0, xref=1.0, N=10,
                        mu0=-1.0, var0=0.0)
    res1 = theta_opt_infinite_horizon(s1)
    residual = abs(res1.theta_star**2 - res1.theta_star - 2.0)
    ok = ok and abs(res1.theta_star + 1.0) <= 1e-12 and residual <= 1e-12
    verdict(5, ok,
            f"interior theta*={res.theta_star:.6f} (grid {oracle:.6f}); "
            f"A=1 theta*={res1.theta_star} residual {residual:.1e}")


def test_criterion_6_finite_N_convergence():
    # NOTE: the true argmin gap decays like ~30.6/N for this fixture
    # (cross-checked against the generic evaluator), so at N = 10^3 the
    # gap is 1.70% of |theta*|. The stated 1% bound is asserted as-is.
    gaps = []
    for N in (10, 50, 200, 1000):
        s = scalar_closed(N=N)
        argmin = refined_argmin(lambda t: closed_form_cost(s, t) / N,
                                -2.8 + 1e-9, 1.2 - 1e-9)
        gaps.append(abs(argmin - THETA_INF))
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    within = gaps[-1] <= 0.01 * abs(THETA_INF)
    verdict(6, monotone and within,
            f"gaps {['%.4f' % g for g in gaps]}, "
            f"final {gaps[-1] / abs(THETA_INF):.2%} of |theta*| "
            f"(monotone={monotone}, within 1%={within})")


def test_criterion_7_R_limit_asymptotics():
    s = scalar_closed()
    target = theta_opt_R_infinity(s).theta_star
    def stable_argmin(sR):
        # clamp the scan to the stability interval: outside it the cost
        # grows geometrically and overflows for large N
        lo, hi = (-2.8 * sR.R, 1.2 * sR.R)
        width = hi - lo
        return refined_argmin(lambda t: closed_form_cost(sR, t),
                              max(lo + 1e-6 * width, -6.0),
                              min(hi - 1e-6 * width, 6.0))

    errors = []
    for R in (10.0, 1e2, 1e3, 1e4):
        errors.append(abs(stable_argmin(scalar_closed(R=R)) - target))
    halving = all(b <= a / 2 for a, b in zip(errors, errors[1:]))

    def spread_for(N):
        argmins = [stable_argmin(scalar_closed(N=N, R=R))
                   for R in (1.0, 10.0, 100.0, 1000.0)]
        return max(argmins) - min(argmins)

    spread10, spread1000 = spread_for(10), spread_for(1000)
    verdict(7, halving and spread1000 < spread10,
            f"target {target:.4f}, errors {['%.2e' % e for e in errors]}; "
            f"argmin spread N=10: {spread10:.3f} -> N=1000: {spread1000:.3f}")


def test_criterion_8_R_invariance():
    # interior regime for all four R values requires B^2 Q < 1.68 R at
    # R = 0.5 for the fixture dynamics; Q = 0.5 satisfies it
    step = 1e-4
    argmins = []
    for R in (0.5, 1.0, 5.0, 50.0):
        s = scalar_closed(R=R, Q=0.5)
        assert theta_opt_infinite_horizon(s).regime == "interior"
        lo, hi = (-2.0 * R * 1.4, 2.0 * R * 0.6)
        argmins.append(grid_argmin(
            lambda t: steady_state_avg_cost(s, t),
            max(lo + step, -3.0), min(hi - step, 3.0), step))
    spread = max(argmins) - min(argmins)
    verdict(8, spread <= step + 1e-12,
            f"argmins {argmins}, spread {spread:.2e} vs grid step {step}")


def test_criterion_9_social_cost_identity():
    rng = np.random.default_rng(1009)
    worst = 0.0
    count = 0
    instances = [scalar_fixture(), twodim_fixture()]
    instances += [random_instance(rng, n_max=3, m_max=3, n_horizon=15)
                  for _ in range(20)]
    for inst in instances:
        th = random_theta(rng, inst)
        x0 = sample_initial_state(inst, 55, count)
        traj = simulate(inst, th, x0)
        sc = social_cost(traj, inst)
        leader = float(np.sum(traj.leader_stage_cost) + np.sum(traj.payment))
        follower = float(np.sum(traj.follower_stage_cost)
                         - np.sum(traj.payment))
        worst = max(worst, abs(sc - (leader + follower))
                    / max(1e-30, abs(sc)))
        count += 1
    verdict(9, worst <= 1e-9,
            f"max rel cancellation defect {worst:.3g} over {count} trajectories")


def test_criterion_10_stability_dichotomy():
    rng = np.random.default_rng(1010)
    agree = 0
    total = 0
    while total < 100:
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        A = rng.uniform(-1, 1, size=(n, n)) * float(rng.uniform(0.5, 2.0))
        B = rng.uniform(-1, 1, size=(n, m))
        M = rng.uniform(-1, 1, size=(m, m))
        R = M @ M.T + 0.1 * np.eye(m)
        inst = validate(GameInstance(A=A, B=B, Q=np.eye(n), R=R,
                                     xref=np.zeros(n), N=1,
                                     mu0=np.zeros(n), Sigma0=np.zeros((n, n))))
        th = random_theta(rng, inst)
        cl = build_closed_loop(inst, th)
        # near-marginal loops cannot be classified by a finite roll-out
        if abs(cl.spectral_radius - 1.0) < 0.02:
            continue
        # excite the expanding eigendirection (dominant eigenvector)
        w, V = np.linalg.eig(cl.A_Theta)
        e = np.real(V[:, int(np.argmax(np.abs(w)))])
        if np.linalg.norm(e) < 1e-12:
            e = rng.normal(size=n)
        e /= np.linalg.norm(e)
        diverged = False
        ek = e.copy()
        for _ in range(500):
            ek = cl.A_Theta @ ek
            if np.linalg.norm(ek) >= 1e3:
                diverged = True
                break
        if cl.is_schur == (not diverged):
            agree += 1
        total += 1
    verdict(10, agree == total, f"{agree}/{total} agreement")


def test_criterion_11_cli_determinism(tmp_path, monkeypatch):
    scalar_scn = {
        "n": 1, "m": 1, "A": [[0.4]], "B": [[1.0]], "Q": [[1.0]],
        "R": [[1.0]], "xref": [1.0], "N": 10, "mu0": [-1.0],
        "Sigma0": [[0.09]], "theta": [[0.0]],
        "monte_carlo": {"samples": 25, "seed": 7},
        "sweep": {"variable": "theta",
                  "grid": {"start": -2.8, "stop": 1.2, "step": 0.05}},
    }
    twodim_scn = {
        "n": 2, "m": 1, "A": [[1.0, 0.3], [0.0, 1.0]], "B": [[0.5], [1.0]],
        "Q": [[1.0, 0.0], [0.0, 1.0]], "R": [[2.0]], "xref": [1.0, 0.0],
        "N": 20, "mu0": [-1.0, 0.0], "Sigma0": [[0.0, 0.0], [0.0, 0.0]],
        "theta": [[0.0], [0.0]],
        "sweep": {"variable": "theta",
                  "values": [[[0.0], [0.0]], [[-0.5], [-0.5]]]},
    }
    commands = ["evaluate", "gradcheck", "optimize", "simulate", "sweep"]
    ok = True
    detail = []
    for label, scn, extra in (("scalar", scalar_scn, ["scalar"]),
                              ("twodim", twodim_scn, [])):
        path = tmp_path / f"{label}.json"
        path.write_text(json.dumps(scn))
        snapshots = []
        for run_id, threads in (("r1", "1"), ("r2", "4"), ("r3", "1")):
            monkeypatch.setenv("INCENTIVE_FORGE_THREADS", threads)
            out = tmp_path / f"{label}_{run_id}"
            out.mkdir()
            for cmd in commands + extra:
                code = cli_main([cmd, "--scenario", str(path),
                                 "--out", str(out)])
                assert code == 0, f"{cmd} on {label} exited {code}"
            snapshots.append({f.name: f.read_bytes()
                              for f in sorted(out.iterdir())})
        same = snapshots[0] == snapshots[1] == snapshots[2]
        ok = ok and same
        detail.append(f"{label}: byte-identical={same}")
    verdict(11, ok, "; ".join(detail))
