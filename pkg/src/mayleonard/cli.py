"""Command-line front door.

Subcommands::

    simulate       integrate the flow and emit a (t, x, y, z) CSV
    poincare       extract section returns and emit a (k, x, s, t_raw) CSV
    return-map     iterate an analytic return-map variant, emit (k, x, s)
    singular-limit convergence table of the rescaled family, CSV
    certify        expansion certificate / hypothesis battery, JSON
    classify       regime report (plus admissibility check), JSON
    scan           amplitude density scan, CSV + JSON summary
    chaos-test     0-1 statistic and autocorrelation of an orbit, JSON

Exit codes: 0 success, 1 validation/config error, 2 numeric failure.
Identical config and seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from ._io import write_csv, write_json
from .config import ScanSpec, dump_config, parse_config
from .diagnostics import (
    Case34SMarginal,
    ScanOpts,
    autocorrelation,
    classify_regime,
    density_scan,
    rotation_interval,
    zero_one_test,
)
from .errors import NumericsError, ValidationError
from .flow import IntegrateOpts, FlowState, integrate, section_returns, section_state
from .params import check_c1a_c1b, derive_constants
from .returnmap import VARIANTS, map_lift, reduce_mod
from .singular import (
    gamma_sequence,
    hypothesis_battery,
    make_circle_map,
    misiurewicz_check,
    singular_limit_convergence,
    transition_matrix,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through the
    # validation path instead so numeric failures keep exit code 2
    def error(self, message):
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mayleonard",
                     description="Forced May-Leonard system toolbox")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=True):
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, default=None,
                       help="override numerics.seed")
        p.add_argument("--output", required=output_required,
                       help="output path (CSV/JSON per subcommand)")
        p.add_argument("--dump-config", action="store_true",
                       help="print the normalised config and exit")

    p = sub.add_parser("simulate", help="integrate the flow to a CSV trajectory")
    common(p)
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--y0", type=float, default=0.3)
    p.add_argument("--z0", type=float, default=0.3)
    p.add_argument("--t-end", type=float, default=500.0)

    p = sub.add_parser("poincare", help="extract Poincare section returns")
    common(p)
    p.add_argument("--x0", type=float, default=1e-3,
                   help="leading coordinate of the section start point")
    p.add_argument("--returns", type=int, default=10)
    p.add_argument("--sections", choices=("o3", "all"), default="o3")

    p = sub.add_parser("return-map", help="iterate an analytic return-map variant")
    common(p)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--iters", type=int, default=10000)
    p.add_argument("--x0", type=float, default=0.5)
    p.add_argument("--s0", type=float, default=0.25)
    p.add_argument("--n", type=int, default=None, help="sequence index (rescaled)")
    p.add_argument("--a", type=float, default=None, help="phase offset (rescaled)")

    p = sub.add_parser("singular-limit",
                       help="sup-distance table of the rescaled family")
    common(p)
    p.add_argument("--a", type=float, default=0.3)
    p.add_argument("--n-from", type=int, default=None,
                   help="first sequence index (default: first admissible)")
    p.add_argument("--n-count", type=int, default=8)

    p = sub.add_parser("certify",
                       help="expansion certificate or full hypothesis battery")
    common(p)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--n", type=int, default=None,
                   help="sequence index (default: first admissible)")
    p.add_argument("--battery", action="store_true",
                   help="run the full battery instead of the certificate alone")
    p.add_argument("--horizon", type=int, default=None,
                   help="override numerics.horizon for the certificate")
    p.add_argument("--u-radius", type=float, default=1e-2)

    p = sub.add_parser("classify", help="regime classification report")
    common(p)

    p = sub.add_parser("scan", help="density scan over forcing amplitudes")
    common(p)
    p.add_argument("--axis", default=None)
    p.add_argument("--from", dest="lo", type=float, default=None)
    p.add_argument("--to", dest="hi", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--log", action="store_true", default=None)
    p.add_argument("--no-battery", action="store_true",
                   help="skip the per-sample certificate flag")

    p = sub.add_parser("chaos-test",
                       help="0-1 statistic and autocorrelation of an orbit")
    common(p)
    p.add_argument("--variant", choices=("case12", "case34"), default="case12")
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--s0", type=float, default=0.37)
    p.add_argument("--lags", type=int, default=50)
    return parser


def _default_n(params, gamma_plus=0.05):
    dc = derive_constants(params)
    kxi = dc.K_omega * dc.xi
    return math.floor(kxi * math.log(1.0 / gamma_plus)) + 1


def _orbit_rows(variant, x0, s0, iters, params, n=None, a=None):
    modulus = math.pi / params.omega if variant == "full" else 1.0
    x, s = x0, s0
    for k in range(1, iters + 1):
        x, f2 = map_lift(variant, x, s, params, n=n, a=a)
        s = reduce_mod(f2, modulus)
        yield (k, x, s)


def _run(args) -> int:
    cfg = parse_config(args.config)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return 0
    params = cfg.params
    seed = args.seed if args.seed is not None else cfg.numerics.seed
    opts = IntegrateOpts(rel_tol=cfg.numerics.rel_tol,
                         abs_tol=cfg.numerics.abs_tol,
                         max_step=cfg.numerics.max_step)

    if args.command == "simulate":
        traj = integrate(FlowState(args.x0, args.y0, args.z0, 0.0),
                         args.t_end, params, opts)
        write_csv(args.output, ("t", "x", "y", "z"), traj.to_rows())
        return 0

    if args.command == "poincare":
        if not math.isfinite(opts.max_step):
            opts = IntegrateOpts(rel_tol=opts.rel_tol, abs_tol=opts.abs_tol,
                                 max_step=50.0)
        events = section_returns(section_state(args.x0, params),
                                 args.returns, params, opts,
                                 sections=args.sections)
        write_csv(args.output, ("k", "x", "s", "t_raw"),
                  ((ev.index, ev.x, ev.s, ev.t_raw) for ev in events))
        return 0

    if args.command == "return-map":
        n, a = args.n, args.a
        if args.variant == "rescaled":
            if a is None:
                raise ValidationError("rescaled variant needs --a")
            if n is None:
                n = _default_n(params)
        write_csv(args.output, ("k", "x", "s"),
                  _orbit_rows(args.variant, args.x0, args.s0, args.iters,
                              params, n=n, a=a))
        return 0

    if args.command == "singular-limit":
        n0 = args.n_from if args.n_from is not None else _default_n(params)
        rows = singular_limit_convergence(range(n0, n0 + args.n_count),
                                          args.a, params)
        write_csv(args.output,
                  ("n", "gamma", "x_absorb", "f1_sup", "f2_sup",
                   "d1_sup", "d2_sup", "d3_sup"),
                  ((r.n, r.gamma, r.x_absorb, r.f1_sup, r.f2_sup,
                    r.d1_sup, r.d2_sup, r.d3_sup) for r in rows))
        return 0

    if args.command == "certify":
        n = args.n if args.n is not None else _default_n(params)
        horizon = args.horizon if args.horizon is not None else cfg.numerics.horizon
        if args.battery:
            report = hypothesis_battery(params, n, args.a, horizon=horizon,
                                        u_radii=args.u_radius)
            write_json(args.output, report.to_dict())
        else:
            cmap = make_circle_map(args.a, params)
            cert = misiurewicz_check(cmap, u_radii=args.u_radius, horizon=horizon)
            tm = transition_matrix(cmap)
            dc = derive_constants(params)
            write_json(args.output, {
                "a": args.a,
                "n": n,
                "gamma": gamma_sequence(n, args.a, dc),
                "certificate": cert.to_dict(),
                "transition_matrix": tm.to_dict(),
            })
        return 0

    if args.command == "classify":
        report = classify_regime(params).to_dict()
        if cfg.diophantine is not None:
            c1 = check_c1a_c1b(params, cfg.diophantine)
            report["admissibility"] = {
                "c1a": c1.c1a,
                "c1b_up_to_n_max": c1.c1b_up_to_n_max,
                "worst_pair": list(c1.worst_pair),
                "worst_margin": c1.worst_margin,
                "n_max": c1.n_max,
            }
        write_json(args.output, report)
        return 0

    if args.command == "scan":
        spec = cfg.scan if cfg.scan is not None else ScanSpec()
        over = {}
        if args.axis is not None:
            over["axis"] = args.axis
        if args.lo is not None:
            over["lo"] = args.lo
        if args.hi is not None:
            over["hi"] = args.hi
        if args.steps is not None:
            over["steps"] = args.steps
        if args.log is not None:
            over["log"] = True
        if over:
            base = {"axis": spec.axis, "lo": spec.lo, "hi": spec.hi,
                    "steps": spec.steps, "log": spec.log}
            base.update(over)
            spec = ScanSpec(**base)
        sopts = ScanOpts(iterations=cfg.numerics.iterations,
                         series_len=cfg.numerics.series_len,
                         seed=seed, battery=not args.no_battery)
        result = density_scan(spec.grid(), params, sopts)
        base_path = args.output[:-4] if args.output.endswith(".csv") else args.output
        write_csv(base_path + ".csv",
                  ("gamma", "lambda1", "lambda2", "K", "rot_lo", "rot_hi",
                   "annulus_ok", "battery_h4", "success", "failed"),
                  ((r.gamma, r.lambda1, r.lambda2, r.K, r.rot_lo, r.rot_hi,
                    r.annulus_ok, bool(r.battery_h4), r.success, r.failed)
                   for r in result.rows))
        write_json(base_path + ".json", result.to_summary())
        return 0

    if args.command == "chaos-test":
        rng = np.random.default_rng(seed)
        x0 = args.x0 if args.x0 is not None else max(params.gamma, 1e-6)
        if args.variant == "case34":
            cmap = Case34SMarginal(params)
            series = cmap.orbit(args.s0, args.iters, burn_in=200)
            rot = rotation_interval(cmap, rng=rng)
            rot_info = {"lo": rot.lo, "hi": rot.hi, "width": rot.width,
                        "is_point": rot.is_point}
        else:
            xs = []
            x, s = x0, args.s0
            for _ in range(200):
                x, f2 = map_lift("case12", x, s, params)
                s = reduce_mod(f2, 1.0)
            series = np.empty(args.iters)
            for i in range(args.iters):
                x, f2 = map_lift("case12", x, s, params)
                s = reduce_mod(f2, 1.0)
                series[i] = s
            rot_info = None
        obs = np.cos(2.0 * np.pi * series)
        K = zero_one_test(obs, rng=rng)
        acf = autocorrelation(obs, args.lags)
        write_json(args.output, {
            "variant": args.variant,
            "iters": args.iters,
            "K": K,
            "autocorrelation_decay_rate": acf.decay_rate,
            "rotation": rot_info,
        })
        return 0

    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericsError, FileNotFoundError, OSError) as exc:
        print(f"numeric/io failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
