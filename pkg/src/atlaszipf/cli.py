"""Command-line entry point (``atlaszipf``).

Exit codes: 0 success, 2 invalid input or arguments, 3 runtime or numeric
failure.
"""

import argparse
import sys

from . import io
from .errors import (DomainError, EstimationError, FormatError, ParameterError,
                     SimulationError, TuningError)
from .estimation import (detrend, distribution_curve, estimate_stats, first_order_approx,
                         gaussian_smooth, predicted_curve)
from .families import AtlasParams, make_atlas_family, slope_parameter
from .simulate import SimulationConfig, simulate_first_order
from .svg import emit_curve
from .zipf import Tolerances, classify, stable_expectations, trend_to_zero, tune_e1_rho

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

TREND_RULE = ("pass if |last| <= max(3 SE, 1e-3), or |value| falls by more than 3 combined SE "
              "at each step and by a factor >= 1.5 overall")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _pair(text):
    try:
        g, s2 = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'g,sigma2'") from None
    return g, s2


def _int_list(text):
    try:
        vals = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    p = _Parser(prog="atlaszipf", description="Rank-based models and Zipf analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a first-order or Atlas model to a panel CSV")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="family file")
    src.add_argument("--atlas", type=_pair, metavar="G,SIGMA2")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--burn-in", type=int, default=None)
    s.add_argument("--record-every", type=_positive_int, default=1,
                   help="write every k-th recorded time (panel interval = k*dt)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    for name, help_ in (("estimate", "per-rank estimates to a stats CSV"),
                        ("approx", "first-order approximation to a family file")):
        e = sub.add_parser(name, help=help_)
        e.add_argument("--panel", required=True)
        e.add_argument("--interval", type=float, default=1.0,
                       help="time between panel observations")
        if name == "estimate":
            e.add_argument("--detrend", action="store_true")
        e.add_argument("--smooth-window", type=int, default=None if name == "estimate" else 100,
                       help="Gaussian smoothing window in points (0 disables)")
        e.add_argument("--out", required=True)

    c = sub.add_parser("classify", help="Zipf verdict for a family")
    c.add_argument("--family", required=True)
    c.add_argument("--depth", type=int, required=True)
    c.add_argument("--tol-zipf", type=float, default=Tolerances.zipf)
    c.add_argument("--tol-mono", type=float, default=Tolerances.mono)
    c.add_argument("--out", required=True)

    k = sub.add_parser("check", help="trend test of a stable-law condition")
    k.add_argument("--family", required=True)
    k.add_argument("--cond", choices=("conservative", "complete", "topweight"), required=True)
    k.add_argument("--n-schedule", type=_int_list, default=(100, 1000, 10000))
    k.add_argument("--mc", type=int, default=100_000)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--workers", type=_positive_int, default=1)
    k.add_argument("--out", required=True)

    t = sub.add_parser("tune-e1", help="tune the alternating-variance family")
    t.add_argument("--g", type=float, required=True)
    t.add_argument("--sigma2", type=float, required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--mc", type=int, default=100_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--workers", type=_positive_int, default=1)
    t.add_argument("--out", required=True)

    pl = sub.add_parser("plot", help="distribution curve as SVG (or CSV by extension)")
    pl.add_argument("--panel", required=True)
    pl.add_argument("--family", default=None, help="overlay the family's predicted curve")
    pl.add_argument("--depth", type=int, required=True)
    pl.add_argument("--format", choices=("svg", "csv"), default=None)
    pl.add_argument("--out", required=True)
    return p


def _simulate(a):
    if a.family:
        family = io.load_family(a.family)
    else:
        family = make_atlas_family(AtlasParams(*a.atlas))
    cfg = SimulationConfig(a.n, a.dt, a.steps, a.burn_in, a.seed)
    panel = simulate_first_order(family, cfg).to_panel(a.record_every)
    io.save_panel_csv(panel, a.out)


def _estimate(a):
    panel = io.load_panel_csv(a.panel, a.interval)
    if a.detrend:
        panel = detrend(panel)
    stats = estimate_stats(panel)
    cols = (stats.lambda_hat, stats.sigma2_hat, stats.mean_gap)
    if a.smooth_window:
        cols = tuple(gaussian_smooth(c, a.smooth_window) for c in cols)
    io.save_stats_csv(stats, a.out, cols)


def _approx(a):
    panel = io.load_panel_csv(a.panel, a.interval)
    io.save_family(first_order_approx(panel, a.smooth_window or None), a.out)


def classification_report(family, res):
    return [
        ("verdict", str(res.verdict)),
        ("depth", len(res.s_curve)),
        ("ranks_checked", res.checked_ranks),
        ("s1", res.s1),
        ("max_monotonicity_violation", res.max_monotonicity_violation),
        ("max_zipf_deviation", res.max_zipf_deviation),
        ("tail_limit", res.tail_limit),
        ("tail_note", "slope parameters are constant from rank K on; an infinite limit cannot occur"),
        ("tol_zipf", res.tolerances.zipf),
        ("tol_mono", res.tolerances.mono),
        ("K", family.K_explicit),
        ("s_curve", res.s_curve),
    ]


def _classify(a):
    family = io.load_family(a.family)
    res = classify(family, a.depth, Tolerances(a.tol_zipf, a.tol_mono))
    io.write_report(a.out, classification_report(family, res))


def _check(a):
    family = io.load_family(a.family)
    est = [stable_expectations(family, n, a.mc, a.seed, a.workers)[a.cond] for n in a.n_schedule]
    items = [("cond", a.cond), ("n_schedule", a.n_schedule), ("mc", a.mc), ("seed", a.seed),
             ("values", [e.value for e in est]), ("std_errors", [e.std_error for e in est])]
    if a.cond == "topweight":
        last = est[-1]
        ok = last.value <= 0.5 + 3 * last.std_error
        items += [("pass", ok), ("rule", "pass if the value at the largest n is <= 1/2 + 3 SE")]
    else:
        tr = trend_to_zero(est)
        items += [("pass", tr.passes), ("reason", tr.reason), ("rule", TREND_RULE)]
    io.write_report(a.out, items)


def _tune_e1(a):
    try:
        res = tune_e1_rho(a.g, a.sigma2, a.n, a.mc, a.seed, a.workers)
    except TuningError as exc:
        grid = exc.evidence or ()
        io.write_report(a.out, [
            ("status", "no_root"), ("message", str(exc)),
            ("grid_rho2", [r for r, _, _ in grid]), ("grid_F", [f for _, f, _ in grid]),
            ("grid_se", [s for _, _, s in grid])])
        raise
    s = slope_parameter(res.family, 1)
    verdict = classify(res.family, max(2, a.n)).verdict
    io.write_report(a.out, [
        ("status", "ok"), ("rho2", res.rho2), ("residual", res.residual.value),
        ("residual_se", res.residual.std_error), ("iterations", res.iterations),
        ("monotone", res.monotone), ("truncation_bound", res.truncation_bound),
        ("slope_parameter", s), ("verdict", str(verdict)),
        ("grid_rho2", [r for r, _, _ in res.grid]), ("grid_F", [f for _, f, _ in res.grid])])


def _plot(a):
    panel = io.load_panel_csv(a.panel)
    curve = distribution_curve(panel, a.depth)
    overlay = None
    if a.family:
        overlay = predicted_curve(io.load_family(a.family), a.depth,
                                  anchor=float(curve.mean_log_value[0]))
    fmt = a.format or ("csv" if a.out.lower().endswith(".csv") else "svg")
    emit_curve(curve, a.out, fmt, overlay)


COMMANDS = {"simulate": _simulate, "estimate": _estimate, "approx": _approx,
            "classify": _classify, "check": _check, "tune-e1": _tune_e1, "plot": _plot}


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"atlaszipf: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (ParameterError, DomainError, FormatError, OSError) as exc:
        print(f"atlaszipf: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (EstimationError, TuningError, SimulationError, FloatingPointError,
            ArithmeticError) as exc:
        print(f"atlaszipf: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
