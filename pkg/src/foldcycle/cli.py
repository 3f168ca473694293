"""Command-line front end.

Exit codes: 0 success, 1 failed suite or numerical failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .applications.lienard import LienardSpec, lienard_verify, van_der_pol
from .applications.tipping import TippingSpec, tipping_simulate, tipping_transit_time
from .asymptotics import fit_power_law
from .blowup import riccati_special_solution
from .config import RunConfig, load_config, parse_eps_grid
from .errors import ConfigError, FoldCycleError
from .model import ScalingRegime
from .output import RunManifest, csv_text, svg_plot, write_csv, write_svg
from .special import omega0, omega0_value
from .suites import ACCEPTANCE, criterion_blowup, scaling_suite
from .transition import entry_state, fold_certificate, poincare_map, transition_map, transition_scan

SCAN_HEADER = ("alpha", "eps", "entry_r", "exit_theta_lifted", "exit_y", "n_rot", "transit_time",
               "log_contraction")
VERIFY_HEADER = ("criterion", "check", "status", "measured", "target")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--alpha", type=int, help="exponent of the angular speed eps^alpha")
    p.add_argument("--eps", type=float, help="single eps value")
    p.add_argument("--eps-grid", help="log-spaced grid a:b:n")
    p.add_argument("--entry-r", type=float, help="entry r on the section y = R^2")
    p.add_argument("--out", default=".", help="output directory (FCL_OUT overrides)")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="foldcycle", description="Folded-cycle transition numerics.")
    ap.add_argument("--version", action="version", version=f"foldcycle {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("omega0", help="print Omega0 and its cross-checks")
    _common(p)
    p = sub.add_parser("transition", help="one transition map evaluation")
    _common(p)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--no-contraction", action="store_true")
    p = sub.add_parser("scan", help="transition maps over an eps grid")
    _common(p)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--no-contraction", action="store_true")
    p = sub.add_parser("verify", help="run acceptance suites")
    _common(p)
    p.add_argument("--all", action="store_true", help="run all acceptance criteria")
    p.add_argument("--svg", action="store_true", help="also write log-log plots")
    p = sub.add_parser("charts-verify", help="blow-up chart consistency suite")
    _common(p)
    p = sub.add_parser("riccati", help="sample the special Riccati solution")
    _common(p)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=401)
    p = sub.add_parser("lienard", help="forced Lienard transition study")
    _common(p)
    p = sub.add_parser("tipping", help="tipping model jump study")
    _common(p)
    p.add_argument("--theta0", type=float, action="append", default=None)
    p = sub.add_parser("poincare", help="layer return map and fold certificate")
    _common(p)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--eps1", type=float, default=0.05)
    p.add_argument("--eps2", type=float, default=0.0)
    p.add_argument("--certificate", action="store_true")
    return ap


def _out_dir(args) -> str:
    return os.environ.get("FCL_OUT") or args.out


def _overrides(args) -> dict:
    skip = {"command", "config", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v not in (None, False)}


def _manifest(args) -> RunManifest:
    return RunManifest(args.command, args.config, _overrides(args), _out_dir(args))


def _eps_list(args, cfg: RunConfig) -> list[float]:
    if args.eps_grid:
        return parse_eps_grid(args.eps_grid)
    if args.eps is not None:
        return [args.eps]
    if cfg.scan_eps:
        return cfg.scan_eps
    return [cfg.system.regime.eps]


def _system(args, cfg: RunConfig):
    sys_ = cfg.system
    if args.alpha is not None or args.eps is not None:
        try:
            sys_ = sys_.with_regime(alpha=args.alpha, eps=args.eps)
        except FoldCycleError as exc:
            raise ConfigError(str(exc)) from exc
    return sys_


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def _record_row(rec, eps, alpha):
    return (alpha, float(eps), rec.entry.r, rec.exit.theta_lifted, rec.exit.y, rec.n_rot,
            rec.transit_time, rec.log_contraction_y)


def cmd_omega0(args, cfg) -> int:
    r = omega0()
    print(f"Omega0 = {r.value:.16f}  bessel_residual = {r.residual:.3e}  "
          f"airy_zero_difference = {r.airy_crosscheck:.3e}")
    print(json.dumps({"omega0": r.value, "bessel_residual": r.residual,
                      "airy_zero_difference": r.airy_crosscheck}))
    return 0


def cmd_transition(args, cfg) -> int:
    sys_ = _system(args, cfg)
    sec = cfg.section
    r0 = args.entry_r if args.entry_r is not None else (cfg.entry_r if cfg.entry_r is not None
                                                        else sec.midpoint)
    th = args.theta0 if args.theta0 is not None else cfg.theta0
    rec = transition_map(sys_, entry_state(sec, r0, th), sec, cfg.integrator,
                         contraction=not args.no_contraction)
    row = _record_row(rec, sys_.regime.eps, sys_.regime.alpha)
    path = write_csv(os.path.join(_out_dir(args), "transition.csv"), SCAN_HEADER, [row], _manifest(args))
    sys.stdout.write(csv_text(SCAN_HEADER, [row]))
    print(f"wrote {path} (backend {rec.stats.backend})", file=sys.stderr)
    return 0


def cmd_scan(args, cfg) -> int:
    sys_ = _system(args, cfg)
    eps_list = sorted(_eps_list(args, cfg))
    sec = cfg.section
    r0 = args.entry_r if args.entry_r is not None else (cfg.entry_r if cfg.entry_r is not None
                                                        else sec.midpoint)
    th = args.theta0 if args.theta0 is not None else cfg.theta0
    recs = transition_scan(sys_, eps_list, r0, th, sec, cfg.integrator,
                           contraction=not args.no_contraction, jobs=_jobs(args))
    rows = [_record_row(r, e, sys_.regime.alpha) for e, r in zip(eps_list, recs)]
    path = write_csv(os.path.join(_out_dir(args), "scan.csv"), SCAN_HEADER, rows, _manifest(args))
    sys.stdout.write(csv_text(SCAN_HEADER, rows))
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _print_table(results) -> None:
    for res in results:
        print(res.line())
        for c in res.checks:
            print(f"    {'PASS' if c.passed else 'FAIL'}  {c.name:<40s} {c.measured:<24.10g} {c.target}")


def cmd_verify(args, cfg) -> int:
    out = _out_dir(args)
    if args.all:
        results = [fn() for fn in ACCEPTANCE]
    else:
        alpha = args.alpha if args.alpha is not None else cfg.system.regime.alpha
        grid = parse_eps_grid(args.eps_grid) if args.eps_grid else None
        kw = {"eps_grid": grid} if grid else {}
        results = [scaling_suite(alpha, cfg.system, cfg.section, jobs=_jobs(args), **kw)]
    _print_table(results)
    rows = [row for res in results for row in res.rows()]
    path = write_csv(os.path.join(out, "verify.csv"), VERIFY_HEADER, rows, _manifest(args))
    print(f"wrote {path}", file=sys.stderr)
    if args.svg:
        alpha = args.alpha if args.alpha is not None else 2
        sys_ = cfg.system.with_regime(alpha=max(alpha, 2))
        grid = parse_eps_grid(args.eps_grid) if args.eps_grid else [0.005, 0.00707, 0.01, 0.0141, 0.02,
                                                                    0.0283, 0.04]
        recs = transition_scan(sys_, grid, section=cfg.section, contraction=False, jobs=_jobs(args))
        ys = [abs(r.exit.y) for r in recs]
        fit = fit_power_law(list(zip(grid, ys)))
        w0 = omega0_value()
        text = svg_plot([("simulated |exit y|", grid, ys, "points"),
                         ("Omega0 eps^2", grid, [w0 * e * e for e in grid], "line")],
                        f"exit drift, alpha={sys_.regime.alpha}, fitted slope {fit.slope:.3f}",
                        "claim checked: exit y = -(c^2/(ab))^(1/3) Omega0 eps^2 + O(eps^3 ln eps)",
                        "eps", "|exit y|", manifest=_manifest(args))
        print(f"wrote {write_svg(os.path.join(out, 'exit_y.svg'), text)}", file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


def cmd_charts_verify(args, cfg) -> int:
    res = criterion_blowup()
    _print_table([res])
    write_csv(os.path.join(_out_dir(args), "charts_verify.csv"), VERIFY_HEADER, res.rows(),
              _manifest(args))
    return 0 if res.passed else 1


def cmd_riccati(args, cfg) -> int:
    curve = riccati_special_solution(args.a, args.b, args.c, L=args.L, n=args.samples)
    rows = [(float(r), float(y)) for r, y in zip(curve.r2, curve.y2)]
    path = write_csv(os.path.join(_out_dir(args), "riccati.csv"), ("r2", "y2"), rows, _manifest(args))
    print(f"right asymptote deviation {curve.right_deviation:.3e} (tolerance {curve.tolerance:.3e})")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _lienard_spec(args, cfg) -> LienardSpec:
    li = cfg.lienard
    alpha = args.alpha if args.alpha is not None else cfg.system.regime.alpha
    eps = args.eps if args.eps is not None else cfg.system.regime.eps
    if not li:
        return van_der_pol(alpha, eps)
    base = van_der_pol(alpha, eps)
    try:
        return LienardSpec(li.get("f", base.f), li.get("g", base.g), li.get("A", base.A),
                           float(li.get("vartheta", 1.0)), ScalingRegime(alpha, eps))
    except FoldCycleError as exc:
        raise ConfigError(f"[lienard]: {exc}") from exc


def cmd_lienard(args, cfg) -> int:
    spec = _lienard_spec(args, cfg)
    eps_list = sorted(_eps_list(args, cfg)) if (args.eps_grid or cfg.scan_eps) else \
        [0.005, 0.00707, 0.01, 0.0141, 0.02, 0.0283, 0.04]
    rep = lienard_verify(spec, eps_list, args.entry_r, cfg.section, cfg=cfg.integrator)
    header = ("alpha", "eps", "entry_theta", "exit_theta_lifted", "exit_y", "predicted_exit_y", "ratio",
              "n_rot")
    rows = [(spec.regime.alpha, p.eps, p.entry_theta, p.record.exit.theta_lifted, p.record.exit.y,
             p.predicted_y, p.ratio, p.record.n_rot) for p in rep.points]
    path = write_csv(os.path.join(_out_dir(args), "lienard.csv"), header, rows, _manifest(args))
    sys.stdout.write(csv_text(header, rows))
    print(f"x_F = {rep.x_F:g}, K''(x_F) = {rep.K2:g}")
    if rep.fit is not None:
        print(f"fitted exit-y slope {rep.fit.slope:.4f} (r^2 {rep.fit.r_squared:.6f})")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_tipping(args, cfg) -> int:
    t = cfg.tipping
    alpha = args.alpha if args.alpha is not None else 2
    eps = args.eps if args.eps is not None else 0.01
    try:
        spec = TippingSpec(float(t.get("amplitude", 0.5)), float(t.get("nu", 1.0)),
                           ScalingRegime(alpha, eps), float(t.get("R", 0.3)), float(t.get("rho", 0.5)))
    except FoldCycleError as exc:
        raise ConfigError(f"[tipping]: {exc}") from exc
    thetas = args.theta0 or t.get("theta0") or [0.55, 0.65, 0.75, 0.85, 0.95]
    header = ("alpha", "eps", "theta0", "classification", "theta_exit", "theta_e", "theta_error",
              "a_exit", "transit_time", "transit_time_from_rho")
    rows = []
    for th in thetas:
        th = float(th)
        T = tipping_transit_time(th, spec)
        try:
            j = tipping_simulate(spec, th)
            rows.append((alpha, eps, th, j.classification, j.theta_exit,
                         "" if j.theta_e is None else j.theta_e,
                         "" if j.theta_error is None else j.theta_error, j.a_exit, j.transit_time, T))
        except FoldCycleError as exc:
            rows.append((alpha, eps, th, f"no exit: {exc}", "", "", "", "", "", T))
    path = write_csv(os.path.join(_out_dir(args), "tipping.csv"), header, rows, _manifest(args))
    sys.stdout.write(csv_text(header, rows))
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_poincare(args, cfg) -> int:
    sys_ = _system(args, cfg)
    r1, y1 = poincare_map(sys_, args.r, args.y, args.eps1, args.eps2)
    header = ("r", "y", "eps1", "eps2", "P_r", "P_y")
    rows = [(args.r, args.y, args.eps1, args.eps2, r1, y1)]
    sys.stdout.write(csv_text(header, rows))
    code = 0
    if args.certificate:
        cert = fold_certificate(sys_, args.eps1)
        print(f"P_r(0,0) = {cert.P_r:.3e}, dP_r/dr = {cert.dPr_dr:.12f}, d2P_r/dr2 = {cert.d2Pr_dr2:.6g}, "
              f"dP_r/dy = {cert.dPr_dy:.6g}, slow integral = {cert.slow_integral:.6g}")
        print("fold certificate: " + ("PASS" if cert.passes() else "FAIL"))
        code = 0 if cert.passes() else 1
    write_csv(os.path.join(_out_dir(args), "poincare.csv"), header, rows, _manifest(args))
    return code


COMMANDS = {"omega0": cmd_omega0, "transition": cmd_transition, "scan": cmd_scan,
            "verify": cmd_verify, "charts-verify": cmd_charts_verify, "riccati": cmd_riccati,
            "lienard": cmd_lienard, "tipping": cmd_tipping, "poincare": cmd_poincare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.eps_grid:
            parse_eps_grid(args.eps_grid)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FoldCycleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
