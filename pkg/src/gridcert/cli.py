"""Command-line interface.

Every subcommand prints a JSON report on stdout and exits with

    0  success / stable / certified
    2  negative verdict
    3  invalid input
    4  numerical failure
    5  inconclusive

``GRIDCERT_GRID_POINTS`` overrides the default number of grid points.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .buses import bus_eval
from .config import parse_config
from .errors import (AssumptionViolated, DisconnectedNetwork, GridCertError, Inconclusive,
                     InvalidParameter, NoCertificate, ParseError, UnknownBus)
from .network import components, diag_susceptance, nyquist_global_check, protocol_certify_network
from .sim import detect_stability, frequency_metrics, simulate
from .spr import (FirstOrderDesign, admit, certify_bus, first_order_protocol, min_gamma,
                  min_gamma_first_order)
from .tf import FrequencyGrid

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 2, 3, 4, 5
DEFAULT_POINTS = 2000
GRID_ENV = "GRIDCERT_GRID_POINTS"


def _default_points():
    raw = os.environ.get(GRID_ENV)
    if raw is None:
        return DEFAULT_POINTS
    try:
        pts = int(raw)
    except ValueError:
        raise InvalidParameter(f"{GRID_ENV}={raw!r} is not an integer") from None
    if pts < 10:
        raise InvalidParameter(f"{GRID_ENV} must be >= 10")
    return pts


def _grid(args):
    pts = args.points if args.points is not None else _default_points()
    if not 0 < args.grid_min < args.grid_max:
        raise InvalidParameter("need 0 < --grid-min < --grid-max")
    return FrequencyGrid.log(args.grid_min, args.grid_max, pts)


def _grid_meta(grid):
    return {"wmin": grid.wmin, "wmax": grid.wmax, "points": len(grid), "spacing": "log"}


def _emit(report):
    report = {"tool": "gridcert", "version": __version__, **report}
    print(json.dumps(report, indent=2, sort_keys=False, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


def _bus_of(cfg, bus_id):
    bus_id = str(bus_id)
    if bus_id not in cfg.network.buses:
        raise UnknownBus(bus_id)
    return bus_id, cfg.network.buses[bus_id]


# -- subcommands ---------------------------------------------------------------

def cmd_certify(args):
    cfg = parse_config(args.config)
    grid = _grid(args)
    net, h = cfg.network, cfg.h
    report = {"command": "certify", "config": str(args.config), "omega0": cfg.omega0,
              "grid": _grid_meta(grid)}
    comps = components(net)
    if len(comps) > 1:
        report["warning"] = f"network has {len(comps)} components; admission is per bus"
    buses = {}
    if args.gamma is None:
        cert = protocol_certify_network(net, h, grid)
        for bus_id, c in cert.certificates.items():
            buses[bus_id] = {
                "gamma_min": c.gamma_min, "gamma_rtol": 1e-4,
                "budget": c.susceptance_budget if c.gamma_min else None,
                "diag_susceptance": c.diag_susceptance,
                "margin": c.margin, "margin_tol": c.tol,
                "verdict": "admitted" if c.admitted else "rejected",
                "reason": c.reason,
            }
        certified = cert.certified
    else:
        certified = True
        for bus_id, bus in net.buses.items():
            susceptance = diag_susceptance(net, bus_id)
            entry = {"gamma": args.gamma, "budget": 1.0 / args.gamma,
                     "diag_susceptance": susceptance}
            try:
                r = certify_bus(h, bus, args.gamma, grid)
                ok = r.valid and admit(args.gamma, susceptance)
                entry.update(margin=r.margin, margin_tol=r.tol, at_omega=r.omega, reason="")
            except AssumptionViolated as exc:
                ok = False
                entry.update(margin=None, margin_tol=None, reason=f"AssumptionViolated: {exc}")
            entry["verdict"] = "admitted" if ok else "rejected"
            certified &= ok
            buses[bus_id] = entry
    report["buses"] = buses
    report["verdict"] = "certified" if certified else "not certified"
    _emit(report)
    return EXIT_OK if certified else EXIT_NEGATIVE


def cmd_simulate(args):
    cfg = parse_config(args.config)
    sim = cfg.sim_or_default()
    traj = simulate(cfg.network, sim)
    if args.out:
        header = ["t"]
        cols = [traj.times]
        for k, bus_id in enumerate(traj.bus_ids):
            header += [f"theta_{bus_id}", f"omega_{bus_id}", f"x_{bus_id}"]
            cols += [traj.theta[:, k], traj.omega[:, k], traj.x[:, k]]
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in np.column_stack(cols):
                w.writerow([repr(float(v)) for v in row])
    verdict = detect_stability(traj)
    report = {"command": "simulate", "config": str(args.config),
              "sim": {"dt": sim.dt, "t_end": sim.t_end, "disturbance": sim.disturbance,
                      "derivative_filter_eta": sim.derivative_filter_eta},
              "samples": len(traj), "truncated": traj.truncated, "truncation_reason": traj.reason,
              "verdict": verdict.verdict, "ratio": _finite(verdict.ratio),
              "thresholds": {"growing": 2.0, "decaying": 0.5}}
    if verdict.verdict == "decaying":
        try:
            report["metrics"] = frequency_metrics(traj)
        except GridCertError as exc:
            report["metrics_error"] = str(exc)
    if args.out:
        report["csv"] = str(args.out)
    _emit(report)
    return {"decaying": EXIT_OK, "growing": EXIT_NEGATIVE}.get(verdict.verdict, EXIT_INCONCLUSIVE)


def cmd_freqresp(args):
    cfg = parse_config(args.config)
    bus_id, bus = _bus_of(cfg, args.bus)
    grid = _grid(args)
    w = grid.omegas
    p = np.asarray(bus_eval(bus, 1j * w))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out = csv.writer(fh)
        out.writerow(["omega", "re", "im", "mag", "phase"])
        for wk, pk in zip(w, p):
            out.writerow([repr(float(v)) for v in
                          (wk, pk.real, pk.imag, abs(pk), np.angle(pk))])
    finally:
        if args.out:
            fh.close()
    if args.out:
        _emit({"command": "freqresp", "bus": bus_id, "grid": _grid_meta(grid),
               "csv": str(args.out), "phase_unit": "rad"})
    return EXIT_OK


def cmd_global_check(args):
    cfg = parse_config(args.config)
    grid = _grid(args)
    v = nyquist_global_check(cfg.network, grid)
    _emit({"command": "global-check", "grid": _grid_meta(grid),
           "verdict": "stable" if v.stable else "unstable",
           "rhp_roots": v.rhp_roots, "min_abs": v.min_abs, "inconclusive_rtol": 1e-10})
    return EXIT_OK if v.stable else EXIT_NEGATIVE


def cmd_min_gamma(args):
    cfg = parse_config(args.config)
    bus_id, bus = _bus_of(cfg, args.bus)
    grid = _grid(args)
    report = {"command": "min-gamma", "bus": bus_id, "omega0": cfg.omega0,
              "grid": _grid_meta(grid), "gamma_rtol": 1e-4}
    try:
        g = min_gamma(cfg.h, bus, grid)
    except (AssumptionViolated, NoCertificate) as exc:
        report.update(verdict="no certificate", reason=f"{type(exc).__name__}: {exc}")
        _emit(report)
        return EXIT_NEGATIVE
    r = certify_bus(cfg.h, bus, g, grid)
    report.update(gamma_min=g, budget=1.0 / g, margin=r.margin, margin_tol=r.tol,
                  diag_susceptance=diag_susceptance(cfg.network, bus_id),
                  verdict="certified")
    _emit(report)
    return EXIT_OK


def cmd_first_order(args):
    d = FirstOrderDesign(args.a, args.b, args.eps, args.omega0)
    report = {"command": "first-order", "a": d.a, "b": d.b, "eps": d.eps, "omega0": d.omega0,
              "gamma_rtol": 1e-4}
    try:
        g = min_gamma_first_order(d)
        report["gamma_min"] = g
    except NoCertificate as exc:
        g = None
        report.update(gamma_min=None, reason=str(exc))
    if args.gamma is not None:
        ok = first_order_protocol(d, args.gamma)
        report.update(gamma=args.gamma, verdict="pass" if ok else "fail")
    else:
        ok = g is not None
        report["verdict"] = "pass" if ok else "fail"
    _emit(report)
    return EXIT_OK if ok else EXIT_NEGATIVE


# -- entry point -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="gridcert", description="Decentralized stability certificates for power networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_grid(p):
        p.add_argument("--grid-min", type=float, default=1e-4, help="lowest frequency, rad/s")
        p.add_argument("--grid-max", type=float, default=1e5, help="highest frequency, rad/s")
        p.add_argument("--points", type=int, default=None,
                       help=f"grid points (default ${GRID_ENV} or {DEFAULT_POINTS})")
        return p

    p = with_grid(sub.add_parser("certify", help="run the admission protocol"))
    p.add_argument("config")
    p.add_argument("--gamma", type=float, default=None,
                   help="check every bus at this budget instead of searching")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="time-domain simulation")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="trajectory CSV")
    p.set_defaults(func=cmd_simulate)

    p = with_grid(sub.add_parser("freqresp", help="frequency response of one bus"))
    p.add_argument("config")
    p.add_argument("--bus", required=True)
    p.add_argument("--out", default=None, help="CSV file (default stdout)")
    p.set_defaults(func=cmd_freqresp)

    p = with_grid(sub.add_parser("global-check", help="network-wide winding-number test"))
    p.add_argument("config")
    p.set_defaults(func=cmd_global_check)

    p = with_grid(sub.add_parser("min-gamma", help="smallest certifying budget of one bus"))
    p.add_argument("config")
    p.add_argument("--bus", required=True)
    p.set_defaults(func=cmd_min_gamma)

    p = sub.add_parser("first-order", help="closed-form test for a first-order bus model")
    for name in ("a", "b", "eps", "omega0"):
        p.add_argument(name, type=float)
    p.add_argument("--gamma", type=float, default=None)
    p.set_defaults(func=cmd_first_order)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, InvalidParameter, UnknownBus, DisconnectedNetwork) as exc:
        print(f"gridcert: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Inconclusive as exc:
        print(f"gridcert: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (GridCertError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"gridcert: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"gridcert: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
