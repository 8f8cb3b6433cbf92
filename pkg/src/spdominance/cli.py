"""Command-line surface.

Subcommands: certify, decouple, epsilon-star, simulate, monotone-probe,
reproduce-paper. Configuration is a single JSON file; every command writes
a machine-readable JSON report with a fixed key order.

Exit codes: 0 = all requested checks passed, 1 = usage or configuration
error, 2 = a mathematical check failed.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys as _sys

import numpy as np

from . import __version__
from .analyze import (batch_trajectories, convergence_report, monotone_probe,
                      thread_count)
from .certify import MatrixPolytope, SPDominanceCertificate, certify_sp
from .decouple import (InfeasibleAtFloor, build_decoupling, chang_residuals,
                       epsilon_star, full_system_matrix, reduced_model)
from .errors import ConfigError
from .integrate import find_equilibria, write_trajectory_csv
from .systems import (LinearSPSystem, NonlinearSPSystem, a_block_hull,
                      jacobians, nonlinear_spring_certificate,
                      nonlinear_spring_system, scalar_hull,
                      SPRING_INITIAL_CONDITIONS, SPRING_SLOPE_BOUNDS)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2


# -- configuration ----------------------------------------------------------

def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if cfg.get("spec_version") != 1:
        raise ConfigError("config must declare \"spec_version\": 1")
    if cfg.get("kind") not in ("linear", "nonlinear"):
        raise ConfigError("config \"kind\" must be \"linear\" or \"nonlinear\"")
    return cfg


def _matrix_or_polytope(value, what):
    if isinstance(value, dict):
        if "vertices" not in value:
            raise ConfigError(f"{what}: polytope object needs a \"vertices\" list")
        return MatrixPolytope(value["vertices"])
    return MatrixPolytope([value])


def build_system(cfg):
    try:
        if cfg["kind"] == "nonlinear":
            omega = {k: tuple(v) for k, v in cfg.get("omega", {}).items()}
            return NonlinearSPSystem(n_r=int(cfg["n_r"]), n_f=int(cfg["n_f"]),
                                     f=cfg["f"], g=cfg["g"],
                                     eps=float(cfg["eps"]), omega=omega)
        omega = {k: tuple(v) for k, v in cfg["omega"].items()} if "omega" in cfg else None
        return LinearSPSystem(A=_matrix_or_polytope(cfg["A"], "A"),
                              B=cfg["B"], C=cfg["C"],
                              D=_matrix_or_polytope(cfg["D"], "D"),
                              eps=float(cfg["eps"]), omega=omega)
    except KeyError as e:
        raise ConfigError(f"config missing required field {e}")
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e))


def build_certificate(cfg):
    block = cfg.get("certificate")
    if block is None:
        raise ConfigError("config has no \"certificate\" block")
    try:
        return SPDominanceCertificate(
            P_r=block["P_r"], P_f=block["P_f"],
            lambda_r=float(block["lambda_r"]), lambda_f=float(block["lambda_f"]),
            sigma_r=float(block["sigma_r"]), sigma_f=float(block["sigma_f"]),
            p=int(block["p"]))
    except KeyError as e:
        raise ConfigError(f"certificate block missing field {e}")
    except ValueError as e:
        raise ConfigError(f"invalid certificate: {e}")


def slow_fast_polytopes(cfg, system):
    """Polytopes of reduced-model matrices and fast blocks for certification."""
    if isinstance(system, NonlinearSPSystem):
        hull = cfg.get("hull", {})
        entry = hull.get("entry")
        bounds = hull.get("bounds")
        slow = scalar_hull(system, nonlinearity_entry=entry, bounds=bounds)
        _, _, _, D = jacobians(system, system.omega_center())
        return slow, MatrixPolytope([D])
    verts = []
    for A in system.A.vertices:
        for D in system.D.vertices:
            _, _, A0 = reduced_model(A, system.B, system.C, D)
            verts.append(A0)
    return MatrixPolytope(verts), system.D


def coupling_inputs(cfg, system):
    """(A polytope, B, C, D polytope) for the eps-threshold search."""
    if isinstance(system, NonlinearSPSystem):
        hull = cfg.get("hull", {})
        A_poly, B, C, D = a_block_hull(system, bounds=hull.get("bounds"))
        return A_poly, B, C, MatrixPolytope([D])
    return system.A, system.B, system.C, system.D


# -- reports ----------------------------------------------------------------

def new_report(command, args):
    rep = {"tool": "spdominance", "version": __version__, "command": command}
    if not getattr(args, "no_timestamp", False):
        rep["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    rep["threads"] = thread_count()
    return rep


def cert_result_dict(res):
    return {
        "feasible": bool(res.feasible),
        "worst_margin": float(res.worst_margin),
        "worst_vertex": int(res.worst_vertex),
        "margins": [float(m) for m in res.margins],
    }


def write_report(report, path):
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")


# -- subcommands ------------------------------------------------------------

def cmd_certify(args):
    cfg = load_config(args.config)
    system = build_system(cfg)
    cert = build_certificate(cfg)
    slow, fast = slow_fast_polytopes(cfg, system)
    slow_res, fast_res = certify_sp(cert, slow, fast)
    report = new_report("certify", args)
    report["tolerances"] = {"feasibility_margin": 0.0, "boundary_slack_report": 1e-9}
    report["certificate"] = {
        "slow": cert_result_dict(slow_res),
        "fast": cert_result_dict(fast_res),
        "feasible": bool(slow_res.feasible and fast_res.feasible),
    }
    write_report(report, args.report)
    print(f"slow block: worst margin {slow_res.worst_margin:.6g} "
          f"({'feasible' if slow_res.feasible else 'INFEASIBLE'})")
    print(f"fast block: worst margin {fast_res.worst_margin:.6g} "
          f"({'feasible' if fast_res.feasible else 'INFEASIBLE'})")
    return EXIT_OK if report["certificate"]["feasible"] else EXIT_CHECK_FAILED


def _fixed_blocks(cfg, system):
    if isinstance(system, NonlinearSPSystem):
        point = cfg.get("linearization_point") or [0.0] * system.dim
        return jacobians(system, point)
    return system.fixed_blocks()


def cmd_decouple(args):
    cfg = load_config(args.config)
    system = build_system(cfg)
    eps = args.eps if args.eps is not None else float(cfg["eps"])
    A, B, C, D = _fixed_blocks(cfg, system)
    dec = build_decoupling(A, B, C, D, eps)
    M = full_system_matrix(A, B, C, D, eps)
    Md = dec.T_inv @ M @ dec.T
    n_r = A.shape[0]
    offdiag = max(np.linalg.norm(Md[:n_r, n_r:]), np.linalg.norm(Md[n_r:, :n_r]))
    r_l, r_h = chang_residuals(A, B, C, D, dec.L, dec.H, eps)
    report = new_report("decouple", args)
    report["eps"] = eps
    report["tolerances"] = {"coupling_residual": 1e-10, "block_diagonal_residual": 1e-8}
    report["decoupling"] = {
        "L": dec.L.tolist(),
        "H": dec.H.tolist(),
        "T": dec.T.tolist(),
        "T_inv": dec.T_inv.tolist(),
        "slow_block": dec.slow_block.tolist(),
        "fast_block": dec.fast_block.tolist(),
        "det_T_inv": float(np.linalg.det(dec.T_inv)),
        "coupling_residuals": [float(r_l), float(r_h)],
        "block_diagonalization_residual": float(offdiag),
    }
    write_report(report, args.report)
    print(f"L = {dec.L.tolist()}")
    print(f"block-diagonalization residual: {offdiag:.3e}")
    return EXIT_OK if offdiag <= 1e-8 else EXIT_CHECK_FAILED


def cmd_epsilon_star(args):
    cfg = load_config(args.config)
    system = build_system(cfg)
    cert = build_certificate(cfg)
    A_poly, B, C, D_poly = coupling_inputs(cfg, system)
    report = new_report("epsilon-star", args)
    report["tolerances"] = {"eps_floor": 1e-12, "bisect_steps": 60}
    try:
        eps_hat = epsilon_star(A_poly, B, C, D_poly, cert, eps_max=args.eps_max)
    except InfeasibleAtFloor as e:
        report["epsilon_star"] = None
        report["error"] = str(e)
        write_report(report, args.report)
        print(f"infeasible: {e}")
        return EXIT_CHECK_FAILED
    report["epsilon_star"] = eps_hat
    write_report(report, args.report)
    print(f"certified eps threshold: {eps_hat:.6g}")
    return EXIT_OK


def _equilibria(system):
    if isinstance(system, NonlinearSPSystem):
        return find_equilibria(system)
    return [np.zeros(system.dim)]


def cmd_simulate(args):
    cfg = load_config(args.config)
    system = build_system(cfg)
    ics = cfg.get("initial_conditions")
    if not ics:
        raise ConfigError("config has no \"initial_conditions\" list")
    trajectories = batch_trajectories(system, ics, args.t_final, h=args.step)
    equilibria = _equilibria(system)
    verdicts = convergence_report(trajectories, equilibria, tol=args.tol)
    os.makedirs(args.out, exist_ok=True)
    csv_paths = []
    for i, traj in enumerate(trajectories):
        path = os.path.join(args.out, f"trajectory_{i:02d}.csv")
        write_trajectory_csv(traj, path, n_r=system.n_r)
        csv_paths.append(path)
    report = new_report("simulate", args)
    report["t_final"] = args.t_final
    report["tolerances"] = {"convergence": args.tol}
    report["equilibria"] = [[float(v) for v in q] for q in equilibria]
    report["trajectories"] = verdicts
    report["csv_files"] = csv_paths
    write_report(report, os.path.join(args.out, "report.json"))
    for v in verdicts:
        state = "converged to " + str(v["matched_equilibrium"]) if v["converged"] \
            else "no convergence"
        print(f"from {v['initial_state']}: {state}")
    return EXIT_OK


def cmd_monotone_probe(args):
    cfg = load_config(args.config)
    system = build_system(cfg)
    cert = build_certificate(cfg)
    probe = monotone_probe(system, cert, n_pairs=args.pairs,
                           t_final=args.t_final, seed=args.seed)
    report = new_report("monotone-probe", args)
    report["monotone_probe"] = probe
    write_report(report, args.report)
    print(f"{probe['interior']}/{probe['total_classifications']} interior, "
          f"{probe['boundary_warnings']} boundary warnings, "
          f"{probe['outside']} outside; worst margin {probe['worst_quadform_margin']:.3e}")
    return EXIT_OK if probe["passed"] else EXIT_CHECK_FAILED


def spring_config(eps=0.01, sigma_r=0.01, box=3.0):
    """Built-in demo configuration (nonlinear spring with fast filter)."""
    cert = nonlinear_spring_certificate()
    return {
        "spec_version": 1,
        "kind": "nonlinear",
        "n_r": 2, "n_f": 1,
        "eps": eps,
        "f": ["x2", "7*tanh(x1) - 5*x1 - 5*z1"],
        "g": ["x2 - z1"],
        "omega": {n: [-box, box] for n in ("x1", "x2", "z1")},
        "certificate": {
            "P_r": cert.P_r.a.tolist(), "P_f": cert.P_f.a.tolist(),
            "lambda_r": cert.lambda_r, "lambda_f": cert.lambda_f,
            "sigma_r": sigma_r, "sigma_f": cert.sigma_f, "p": cert.p,
        },
        "hull": {"entry": [1, 0], "bounds": list(SPRING_SLOPE_BOUNDS)},
        "initial_conditions": [list(ic) for ic in SPRING_INITIAL_CONDITIONS],
    }


def cmd_reproduce_paper(args):
    cfg = spring_config(eps=args.eps, sigma_r=args.sigma_r)
    system = build_system(cfg)
    report = new_report("reproduce-paper", args)
    report["eps"] = args.eps
    checks = {}

    cert_error = None
    try:
        cert = build_certificate(cfg)
    except ConfigError as e:
        cert = None
        cert_error = str(e)

    if cert is not None:
        slow, fast = slow_fast_polytopes(cfg, system)
        slow_res, fast_res = certify_sp(cert, slow, fast)
        report["certificate"] = {
            "slow": cert_result_dict(slow_res),
            "fast": cert_result_dict(fast_res),
            "feasible": bool(slow_res.feasible and fast_res.feasible),
        }
        checks["certificate_feasible"] = report["certificate"]["feasible"]
        A_poly, B, C, D_poly = coupling_inputs(cfg, system)
        try:
            eps_hat = epsilon_star(A_poly, B, C, D_poly, cert)
            report["epsilon_star"] = eps_hat
            checks["eps_below_threshold"] = args.eps < eps_hat
        except InfeasibleAtFloor as e:
            report["epsilon_star"] = None
            report["epsilon_star_error"] = str(e)
            checks["eps_below_threshold"] = False
    else:
        report["certificate"] = {"error": cert_error}
        checks["certificate_feasible"] = False

    equilibria = find_equilibria(system)
    report["equilibria"] = [[float(v) for v in q] for q in equilibria]
    checks["three_equilibria"] = len(equilibria) == 3

    trajectories = batch_trajectories(system, cfg["initial_conditions"], 9.0)
    verdicts = convergence_report(trajectories, equilibria, tol=1e-3)
    report["trajectories"] = verdicts
    checks["all_converged"] = all(v["converged"] for v in verdicts)

    os.makedirs(args.out, exist_ok=True)
    csv_paths = []
    for i, traj in enumerate(trajectories):
        path = os.path.join(args.out, f"trajectory_{i:02d}.csv")
        write_trajectory_csv(traj, path, n_r=system.n_r)
        csv_paths.append(path)
    report["csv_files"] = csv_paths

    if cert is not None:
        probe = monotone_probe(system, cert, n_pairs=100, t_final=9.0, seed=42)
        report["monotone_probe"] = probe
        checks["monotone_probe"] = probe["passed"]

    report["tolerances"] = {"convergence": 1e-3, "probe_classification": 1e-9,
                            "feasibility_margin": 0.0}
    report["checks"] = checks
    report["all_checks_passed"] = all(checks.values())
    write_report(report, os.path.join(args.out, "report.json"))
    for name, ok in checks.items():
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if report["all_checks_passed"] else EXIT_CHECK_FAILED


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdominance",
        description="Dominance certificates and two-time-scale decoupling "
                    "for singularly perturbed systems")
    parser.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps so reports are byte-reproducible")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="verify a dominance certificate")
    p.add_argument("config")
    p.add_argument("--report", default=None, help="write a JSON report here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decouple", help="compute the decoupling transformation")
    p.add_argument("config")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("epsilon-star", help="bisect for the certified eps threshold")
    p.add_argument("config")
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_epsilon_star)

    p = sub.add_parser("simulate", help="integrate trajectories and check convergence")
    p.add_argument("config")
    p.add_argument("--t-final", type=float, default=9.0)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monotone-probe",
                       help="sample trajectory pairs and classify their difference")
    p.add_argument("config")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--t-final", type=float, default=9.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_monotone_probe)

    p = sub.add_parser("reproduce-paper",
                       help="run the full built-in worked example end to end")
    p.add_argument("--out", default="out")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--sigma-r", type=float, default=0.01, dest="sigma_r")
    p.set_defaults(func=cmd_reproduce_paper)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
