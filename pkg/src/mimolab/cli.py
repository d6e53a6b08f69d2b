"""Command-line front end.

Exit codes: 0 success, 2 configuration or precondition error,
3 capacity routes disagree, 4 a verdict or property check failed.
The output directory defaults to ``$MIMOLAB_OUT`` or ``./mimolab-out``.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import io
from .analysis import fuzz_berezin, fuzz_trace_inequalities
from .asymptotics import REGIMES, run_sweep
from .capacity import (
    CSV_HEADER,
    capacity_direct,
    capacity_finite_rank,
    capacity_fredholm,
    finite_rank_data_from_patterns,
)
from .config import ConfigError, RunConfig, load_config
from .errors import IllConditioned, InvalidArgument, NotPSDError, PreconditionFailure
from .operators import build_A, build_B, build_H, build_K, resolvent_trace_identity
from .spread import ScattererSet
from .sphere import weyl_count

EXIT_OK, EXIT_CONFIG, EXIT_DISAGREE, EXIT_FAILED = 0, 2, 3, 4
ROUTE_TOL = 1e-6
IDENTITY_TOL = 1e-6
CAPACITY_RESOLUTION = 12
WEYL_ENERGIES = (100, 1000, 10000)
SUITES = ("inequalities", "identity", "weyl")


def _out_dir(args):
    return args.out or os.environ.get("MIMOLAB_OUT") or "mimolab-out"


def _config(args):
    if args.config:
        cfg, keys = load_config(args.config)
    else:
        cfg, keys = RunConfig(), frozenset()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.resolution is not None:
        overrides["grid_resolution"] = args.resolution
    if overrides:
        cfg = replace(cfg, **overrides)
        keys = keys | set(overrides)
    return cfg, keys


# capacity ------------------------------------------------------------------

def capacity_rows(cfg):
    """Capacity per requested route; returns ``(results, H)``."""
    sc = cfg.scenario(cfg.resolution(CAPACITY_RESOLUTION))
    finite = isinstance(sc.environment, ScattererSet)
    routes = cfg.routes or (("direct", "fredholm", "finite_rank") if finite
                            else ("direct", "fredholm"))
    if "finite_rank" in routes and not finite:
        raise ConfigError("the finite_rank route needs environment 'finite_rank'")
    tx, rx = sc.tx(cfg.tx_count), sc.rx(cfg.rx_count)
    H = build_H(tx, rx, sc.spread)
    results = []
    for route in routes:
        if route == "direct":
            results.append(capacity_direct(H, sc.snr, grid_resolution=sc.resolution))
        elif route == "fredholm":
            K = build_K(build_A(tx), build_A(rx), sc.spread)
            results.append(capacity_fredholm(K, sc.snr, tx.count, rx.count))
        else:
            data = finite_rank_data_from_patterns(sc.environment, tx, rx, sc.snr)
            results.append(capacity_finite_rank(data, M_R=rx.count))
    return results, H


def routes_agree(results, tol=ROUTE_TOL):
    ref = results[0].bits
    return all(abs(r.bits - ref) <= tol * (1.0 + abs(ref)) for r in results[1:])


def cmd_capacity(args):
    cfg, _ = _config(args)
    results, H = capacity_rows(cfg)
    out = _out_dir(args)
    io.write_csv(os.path.join(out, "capacity.csv"), CSV_HEADER, [r.csv_row() for r in results])
    io.write_complex_matrix_csv(os.path.join(out, "channel_H.csv"), H)
    for r in results:
        print(f"{r.route}: {io.format_value(r.bits)} bits")
    if not routes_agree(results):
        print("capacity routes disagree", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


# sweep ---------------------------------------------------------------------

def cmd_sweep(args):
    cfg, keys = _config(args)
    if args.regime is not None:
        cfg = replace(cfg, regime=args.regime)
    spec = cfg.sweep_spec(keys)
    result = run_sweep(spec, jobs=args.jobs)
    out = _out_dir(args)
    name = f"sweep_{result.regime}"
    io.write_csv(os.path.join(out, f"{name}.csv"), result.columns, result.rows)
    io.write_csv(os.path.join(out, f"{name}_MC.csv"), ("M", "C"),
                 [(r[0] if result.regime != "rx_log" else r[1], r[2]) for r in result.rows])
    stat_rows = [(k, v) for k, v in result.stats.items() if np.isscalar(v)]
    stat_rows += [(f"verdict_{k}", v) for k, v in result.verdicts.items()]
    stat_rows += [(f"tolerance_{k}", v) for k, v in result.tolerances.items()]
    io.write_csv(os.path.join(out, f"{name}_summary.csv"), ("key", "value"), stat_rows)
    print(result.summary())
    return EXIT_OK if result.passed else EXIT_FAILED


# verify --------------------------------------------------------------------

def verify_inequalities(seed, out):
    rows = fuzz_trace_inequalities(seed=seed) + fuzz_berezin(seed=seed)
    io.write_csv(os.path.join(out, "verify_inequalities.csv"),
                 ("seed", "trial", "check", "lhs", "rhs", "margin", "passed"), rows)
    ok = True
    for name in ("lipschitz", "concavity", "berezin"):
        sel = [r for r in rows if r[2] == name]
        fails = sum(not r[6] for r in sel)
        ok &= fails == 0
        print(f"{name}: trials={len(sel)} failures={fails} "
              f"min_margin={io.format_value(min(r[5] for r in sel))}")
    return ok


def identity_points(scale, count=8):
    """Points on the circle of radius ``2 scale``, offset from the real axis."""
    r = 2.0 * scale if scale > 0 else 1.0
    return r * np.exp(2j * np.pi * (np.arange(count) + 0.5) / count)


def identity_rows(cfg):
    sc = cfg.scenario(cfg.resolution(CAPACITY_RESOLUTION))
    tx, rx = sc.tx(cfg.tx_count), sc.rx(cfg.rx_count)
    B = build_B(build_H(tx, rx, sc.spread))
    K = build_K(build_A(tx), build_A(rx), sc.spread)
    eigs_B = np.linalg.eigvalsh(B)
    eigs_K = K.eigvalsh()
    scale = float(max(np.max(np.abs(eigs_B), initial=0.0), np.max(np.abs(eigs_K), initial=0.0)))
    rows = []
    for j, z in enumerate(identity_points(scale)):
        lhs, rhs = resolvent_trace_identity(B, K, z, eigs_B, eigs_K)
        err = abs(lhs - rhs)
        rows.append((j, z.real, z.imag, lhs.real, lhs.imag, rhs.real, rhs.imag, err,
                     err <= IDENTITY_TOL * (1.0 + abs(lhs))))
    return rows


def verify_identity(cfg, out):
    rows = identity_rows(cfg)
    io.write_csv(os.path.join(out, "verify_identity.csv"),
                 ("point", "z_re", "z_im", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_error",
                  "passed"), rows)
    for r in rows:
        print(f"z{r[0]}: error={io.format_value(r[7])} passed={io.format_value(r[8])}")
    return all(r[8] for r in rows)


def weyl_rows(energies=WEYL_ENERGIES):
    rows = []
    for E in energies:
        scalar, six = weyl_count(E)
        rows.append((E, scalar, six, scalar / E if E else float("nan"),
                     six / E if E else float("nan")))
    return rows


def _write_weyl(out, filename, energies):
    rows = weyl_rows(energies)
    io.write_csv(os.path.join(out, filename),
                 ("E", "scalar_dim", "six_component_dim", "scalar_ratio", "six_ratio"), rows)
    for r in rows:
        print(f"E={r[0]}: scalar={r[1]} ratio={io.format_value(r[3])} "
              f"six={r[2]} ratio={io.format_value(r[4])}")
    return rows


def verify_weyl(out):
    rows = _write_weyl(out, "verify_weyl.csv", WEYL_ENERGIES)
    E, _, _, rs, r6 = rows[-1]
    return 0.99 <= rs <= 1.01 and 5.94 <= r6 <= 6.06


def cmd_verify(args):
    cfg, _ = _config(args)
    out = _out_dir(args)
    suites = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for suite in suites:
        print(f"[{suite}]")
        if suite == "inequalities":
            ok &= verify_inequalities(cfg.seed, out)
        elif suite == "identity":
            ok &= verify_identity(cfg, out)
        else:
            ok &= verify_weyl(out)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_weyl(args):
    energies = args.energies or list(WEYL_ENERGIES)
    if any(E < 0 for E in energies):
        raise InvalidArgument("Weyl cutoffs must be nonnegative")
    _write_weyl(_out_dir(args), "weyl.csv", energies)
    return EXIT_OK


# entry point ---------------------------------------------------------------

def _nonnegative_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (default $MIMOLAB_OUT or ./mimolab-out)")
    common.add_argument("--seed", type=_nonnegative_int, help="RNG seed (overrides config)")
    common.add_argument("--jobs", type=_positive_int, default=1, help="parallel sweep points")
    common.add_argument("--resolution", type=_positive_int, help="quadrature resolution override")

    parser = argparse.ArgumentParser(prog="mimolab", description="MIMO capacity in fixed volumes")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("capacity", parents=[common], help="capacity by each requested route")
    p = sub.add_parser("sweep", parents=[common], help="growth-regime sweep with verdicts")
    p.add_argument("--regime", choices=REGIMES)
    p = sub.add_parser("verify", parents=[common], help="property suites")
    p.add_argument("suite", choices=SUITES + ("all",))
    p = sub.add_parser("weyl", parents=[common], help="Laplace-Beltrami counting table")
    p.add_argument("energies", nargs="*", type=float)
    return parser


_COMMANDS = {"capacity": cmd_capacity, "sweep": cmd_sweep, "verify": cmd_verify,
             "weyl": cmd_weyl}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InvalidArgument, PreconditionFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotPSDError, IllConditioned) as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
