"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 numerical
non-convergence or failed invariant, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import errors
from .asym import Regime, build_expansion, fit_constant
from .checks import run_all
from .flow import Flow, classify_flow
from .fredholm import log_det
from .surface import Configuration, build_surface, surface_invariants, validate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("surface", "direct", "asym", "compare", "flow", "average", "selftest")
CSV_COLUMNS = ("r", "log_F_direct", "prediction", "residual", "C_hat", "nodes", "converged")


class UsageError(errors.InvalidConfiguration):
    module = "cli"


@dataclass
class RunSpec:
    command: str
    config: Configuration | None = None
    r_values: tuple = ()
    regime: Regime | None = None
    out: Path | None = None
    nodes: int = 64
    tol: float = 1e-10
    theta_tol: float = 1e-15
    M: float = 1.0
    precision: str = "auto"
    workers: int = 1
    T: float = 1e4
    z_values: tuple = field(default=())
    samples: int = 2 ** 14


def _fmt(v):
    return format(float(v) + 0.0, ".17g")  # + 0.0 turns -0.0 into 0.0


def _parse_floats(text, name):
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def read_config_file(path):
    """``key = value`` lines, ``#`` comments; keys match the long flag names."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")  # OSError becomes exit code 4 in main
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="besselgap", description=(
        "Gap probabilities of the Bessel point process on a union of intervals: "
        "direct Fredholm determinants, theta-function asymptotics and their comparison."))
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file of 'key = value' lines; flags override it")
    parser.add_argument("--x", help="comma-separated endpoints 0 < x1 < ... < x_{2g+1}")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--r", help="single r or comma-separated list")
    parser.add_argument("--r-min", type=float)
    parser.add_argument("--r-max", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--log-grid", action="store_true", default=None)
    parser.add_argument("--nodes", type=int, help="Nystrom nodes per interval (floor)")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--theta-tol", type=float)
    parser.add_argument("--M", type=float, help="lower limit of the oscillatory integral")
    parser.add_argument("--regime", choices=[r.value for r in Regime])
    parser.add_argument("--out", help="CSV output path (compare)")
    parser.add_argument("--precision", choices=("auto", "double", "mp"))
    parser.add_argument("--workers", type=int)
    parser.add_argument("--T", type=float, help="time-average horizon (average)")
    parser.add_argument("--z", help="comma-separated z values (average)")
    parser.add_argument("--samples", type=int, help="quasi-Monte Carlo sample count (average)")
    parser.add_argument("--seed-free", action="store_true", default=None,
                        help="accepted for compatibility; nothing here uses random numbers")
    return parser


def _merge(args):
    merged = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if value is not None and key != "config":
            merged[key] = value
    return merged


def _r_grid(opts):
    if "r" in opts:
        values = _parse_floats(opts["r"], "r")
    elif "r_min" in opts or "r_max" in opts:
        try:
            lo, hi = float(opts["r_min"]), float(opts["r_max"])
        except KeyError:
            raise UsageError("--r-min and --r-max must be given together") from None
        steps = int(opts.get("steps", 1))
        if steps < 1:
            raise UsageError("--steps must be at least 1")
        log_grid = str(opts.get("log_grid", False)).lower() in ("1", "true", "yes")
        if steps == 1:
            values = [lo]
        elif log_grid:
            if lo <= 0:
                raise UsageError("a log grid needs r-min > 0")
            values = list(np.geomspace(lo, hi, steps))
        else:
            values = list(np.linspace(lo, hi, steps))
    else:
        return ()
    if any(v < 0 for v in values):
        raise errors.NegativeR("r must be non-negative")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError("the r grid must be strictly increasing")
    return tuple(values)


def make_spec(argv):
    args = build_parser().parse_args(argv)
    opts = _merge(args)
    spec = RunSpec(command=args.command)
    if args.command != "selftest":
        if "x" not in opts:
            raise UsageError("--x is required")
        spec.config = validate(_parse_floats(opts["x"], "x"), float(opts.get("alpha", 0.0)))
    spec.r_values = _r_grid(opts)
    if "regime" in opts:
        spec.regime = Regime(opts["regime"])
    for key, cast in (("nodes", int), ("tol", float), ("theta_tol", float), ("M", float),
                      ("workers", int), ("T", float), ("samples", int)):
        if key in opts:
            setattr(spec, key, cast(opts[key]))
    if "precision" in opts:
        spec.precision = str(opts["precision"])
    if "out" in opts:
        spec.out = Path(opts["out"])
    if "z" in opts:
        spec.z_values = tuple(_parse_floats(opts["z"], "z"))
    if spec.nodes < 8:
        raise UsageError("--nodes must be at least 8")
    return spec


def _default_regime(config):
    return {0: Regime.G0_CLOSED, 1: Regime.G1_CLOSED}.get(config.g, Regime.DIO_ERGODIC)


def _need_r(spec):
    if not spec.r_values:
        raise UsageError("give --r or --r-min/--r-max")


def _direct_one(job):
    r, config, nodes, tol, precision = job
    return log_det(r, config, m=nodes, tol=tol, precision=precision)


def _direct_all(spec):
    jobs = [(r, spec.config, spec.nodes, spec.tol, spec.precision) for r in spec.r_values]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(_direct_one, jobs))  # map preserves r order
    return [_direct_one(job) for job in jobs]


def _flow(spec):
    from .theta import ThetaEvaluator
    surface = build_surface(spec.config)
    return Flow(surface, ThetaEvaluator(surface.tau, tol=spec.theta_tol))


def cmd_surface(spec, out):
    s = build_surface(spec.config)
    with np.printoptions(precision=12, linewidth=120):
        print(f"g = {s.g}, alpha = {spec.config.alpha}", file=out)
        print(f"A =\n{s.A}", file=out)
        print(f"a_last = {s.a_last}", file=out)
        print(f"q coefficients (q_0..q_(g-1), leading 1/2) = {s.q_coeffs}", file=out)
        print(f"c = {_fmt(s.c)}", file=out)
        print(f"Omega = {s.Omega}", file=out)
        print(f"tau =\n{s.tau}", file=out)
        print(f"d1 = {_fmt(s.d1)}", file=out)
        print(f"alpha_tilde = {s.alpha_tilde}", file=out)
        print(f"T =\n{s.T}", file=out)
    limits = {"omega_inverse_row": 1e-8, "charpoly": 1e-8, "tau_symmetry": 1e-8,
              "normalization": 1e-12, "gap_vanishing": 1e-10}
    failed = False
    for name, value in surface_invariants(s).items():
        if name in limits:
            ok = value < limits[name]
        elif name == "tau_min_eig":
            ok = value > 0
        elif name == "q_roots_in_gaps":
            ok = value == 1.0
        else:
            ok = True  # informational (Re tau)
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} = {value:.3g}", file=out)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_direct(spec, out):
    _need_r(spec)
    code = EXIT_OK
    print("r,log_F,nodes,converged,last_delta,precision", file=out)
    for r, res in zip(spec.r_values, _direct_all(spec)):
        print(f"{_fmt(r)},{_fmt(res.log_F)},{res.nodes_per_interval},{res.converged},"
              f"{res.last_delta:.3g},{res.precision}", file=out)
        if not res.converged:
            code = EXIT_NUMERIC
    return code


def cmd_asym(spec, out):
    _need_r(spec)
    regime = spec.regime or _default_regime(spec.config)
    expansion = build_expansion(_flow(spec), regime, M=spec.M, T_average=spec.T)
    print(f"regime = {regime.value}", file=out)
    print(f"c = {_fmt(expansion.c_r)}, sqrt(r) coefficient = {_fmt(expansion.d1_sqrt)}, "
          f"log coefficient = {_fmt(expansion.log_coeff)}", file=out)
    print("r,prediction", file=out)
    for r in spec.r_values:
        print(f"{_fmt(r)},{_fmt(expansion(r))}", file=out)
    return EXIT_OK


def cmd_compare(spec, out):
    _need_r(spec)
    regime = spec.regime or _default_regime(spec.config)
    flow = _flow(spec)
    expansion = build_expansion(flow, regime, M=spec.M, T_average=spec.T)
    results = _direct_all(spec)
    r = np.array(spec.r_values)
    direct = np.array([res.log_F for res in results])
    pred = np.atleast_1d(expansion(r))
    phases = flow.surface.nu(r) if flow.g and expansion.theta_term is not None else None
    fit = fit_constant(r, direct, pred, phases=phases)
    buf = io.StringIO(newline="")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for i, res in enumerate(results):
        buf.write(",".join([_fmt(r[i]), _fmt(direct[i]), _fmt(pred[i]), _fmt(fit.residuals[i]),
                            _fmt(fit.C_hat), str(res.total_nodes), str(res.converged).lower()]) + "\n")
    if spec.out is not None:
        with open(spec.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    print(f"regime = {regime.value}", file=out)
    print(fit, file=out)
    return EXIT_OK if all(res.converged for res in results) else EXIT_NUMERIC


def cmd_flow(spec, out):
    surface = build_surface(spec.config)
    print(f"Omega = {surface.Omega}", file=out)
    print(classify_flow(surface.Omega), file=out)
    return EXIT_OK


def cmd_average(spec, out):
    flow = _flow(spec)
    s = flow.surface
    ta = flow.time_averages(spec.T)
    print("time averages of B(-x_j, nu(t^2)) over [0, T]:", file=out)
    for T, vals in ta.history:
        print(f"  T = {_fmt(T)}: " + ", ".join(f"{v:.8f}" for v in vals), file=out)
    z = np.array(spec.z_values) if spec.z_values else np.linspace(-s.config.x[-1] - 0.5, 0.5, 5)
    sa = flow.space_average_poly(z, n_samples=spec.samples)
    print("z, space_average, stderr, det(zI-T), 2q(z)", file=out)
    for zi, est, err in zip(z, sa.estimate, sa.stderr):
        det = float(np.linalg.det(zi * np.eye(s.g) - s.T)) if s.g else 1.0
        print(f"{_fmt(zi)}, {_fmt(est)}, {err:.3g}, {_fmt(det)}, {_fmt(2 * s.q(zi))}", file=out)
    return EXIT_OK


def cmd_selftest(spec, out):
    failed = 0
    for result in run_all():
        print(result.line(), file=out)
        failed += not result.passed
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}", file=out)
    return EXIT_NUMERIC if failed else EXIT_OK


HANDLERS = {"surface": cmd_surface, "direct": cmd_direct, "asym": cmd_asym, "compare": cmd_compare,
            "flow": cmd_flow, "average": cmd_average, "selftest": cmd_selftest}


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        spec = make_spec(argv)
        return HANDLERS[spec.command](spec, out)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except errors.NumericalError as exc:
        print(f"error: {exc.describe()}", file=sys.stderr)
        return EXIT_NUMERIC
    except errors.BesselGapError as exc:
        print(f"error: {exc.describe()}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
