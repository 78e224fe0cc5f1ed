"""Command-line experiment runner.

    geoslide run <config.yaml> [--out DIR] [--csv] [--checks-only]
    geoslide suite <config-dir> [--jobs N] [--out DIR] [--csv]
    geoslide lemmas

Exit code is 0 iff every certification passes.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

import numpy as np

from . import analysis
from .harness import config_from_yaml, run_experiment, run_suite


def _cmd_run(args) -> int:
    config = config_from_yaml(args.config)
    result = run_experiment(config)
    print(result.report_text())
    if args.out and not args.checks_only:
        os.makedirs(args.out, exist_ok=True)
        report_path = os.path.join(args.out, f"{config.name}.report.txt")
        with open(report_path, "w") as f:
            f.write(result.report_text() + "\n")
        if args.csv:
            csv_path = os.path.join(args.out, f"{config.name}.csv")
            result.trace.write_csv(csv_path)
            print(f"trace written to {csv_path}")
    return 0 if result.passed else 1


def _cmd_suite(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.config_dir, "*.yaml")))
    paths += sorted(glob.glob(os.path.join(args.config_dir, "*.yml")))
    if not paths:
        print(f"no .yaml configs found in {args.config_dir}", file=sys.stderr)
        return 2
    configs = [config_from_yaml(p) for p in paths]
    report = run_suite(configs, jobs=args.jobs, out_dir=args.out, write_csv=args.csv)
    print(report.format())
    return 0 if report.passed else 1


def _lemma_battery() -> list[tuple[str, bool, str]]:
    """Standalone oracle battery for the scalar comparison ODEs and the
    rotation-distance identity."""
    results = []

    # closed form of x_dot = -sigma x sqrt(1 - x) against RK4, plus its
    # loose exponential bound
    worst = 0.0
    ok_bound = True
    t = np.linspace(0.0, 10.0, 2001)
    for x0 in (0.1, 0.5, 0.9):
        for sigma in (0.5, 1.0, 2.0):
            exact = analysis.separable_ode_solution(x0, sigma, t)
            num = analysis.integrate_scalar_ode(
                lambda _t, x, s=sigma: -s * x * np.sqrt(max(0.0, 1.0 - x)), x0, t
            )
            worst = max(worst, float(np.max(np.abs(exact - num))))
            loose = analysis.separable_ode_loose_bound(x0, sigma, t)
            ok_bound = ok_bound and bool(np.all(num <= loose * (1.0 + 1e-9)))
    results.append((
        "separable-ode closed form vs RK4",
        worst < 1e-8 and ok_bound,
        f"max |closed - numeric| = {worst:.3e}; loose bound held: {ok_bound}",
    ))

    # driven linear decay: closed form vs RK4 and tail rate min(lam, p)
    worst = 0.0
    rates_ok = True
    details = []
    for lam, p in ((2.0, 1.0), (1.0, 2.0)):
        exact = analysis.driven_decay_solution(1.0, lam, 1.0, p, t)
        num = analysis.integrate_scalar_ode(
            lambda tt, v, L=lam, P=p: -L * v + np.exp(-P * tt), 1.0, t
        )
        worst = max(worst, float(np.max(np.abs(exact - num))))
        fit = analysis.fit_exponential(t, exact, (5.0, 10.0))
        expect = min(lam, p)
        rates_ok = rates_ok and abs(fit.rate - expect) <= 0.02 * expect
        details.append(f"rate({lam},{p}) = {fit.rate:.4f}")
    results.append((
        "driven-decay closed form vs RK4",
        worst < 1e-8 and rates_ok,
        f"max dev = {worst:.3e}; " + ", ".join(details),
    ))

    # rate-perturbed decay stays on its tight envelope
    env = analysis.overshoot_envelope(1.0, 2.0, 1.5, 1.0)
    num = analysis.integrate_scalar_ode(
        lambda tt, v: (-2.0 + 1.5 * np.exp(-tt)) * v, 1.0, t
    )
    cert = analysis.certify_bound(t, num, env.tight, 1e-9)
    loose_ok = bool(np.all(env.tight(t) <= env.loose(t) * (1.0 + 1e-12)))
    results.append((
        "overshoot envelope (tight and loose)",
        cert.passed and loose_ok,
        f"{cert}; tight <= loose: {loose_ok}",
    ))

    # Frobenius distance identity over random rotations
    from . import so3

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        q = so3.random_unit_quaternion(rng)
        dist = so3.frobenius_distance(so3.to_rotation(q))
        worst = max(worst, abs(dist - 2.0 * np.sqrt(2.0) * float(np.linalg.norm(q.vector))))
    results.append((
        "rotation distance identity",
        worst < 1e-10,
        f"max |frobenius - 2*sqrt(2)*|qv|| = {worst:.3e}",
    ))
    return results


def _cmd_lemmas(_args) -> int:
    results = _lemma_battery()
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    n_pass = sum(ok for _, ok, _ in results)
    print(f"lemma battery: {n_pass}/{len(results)} passed")
    return 0 if n_pass == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoslide",
        description="deterministic flight-control simulation and certification runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a YAML experiment config")
    p_run.add_argument("--out", default=None, help="directory for reports/traces")
    p_run.add_argument("--csv", action="store_true", help="also write the trace CSV")
    p_run.add_argument(
        "--checks-only", action="store_true",
        help="evaluate checks without writing any files",
    )
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite", help="run every config in a directory")
    p_suite.add_argument("config_dir", help="directory of YAML experiment configs")
    p_suite.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_suite.add_argument("--out", default=None, help="directory for reports/traces")
    p_suite.add_argument("--csv", action="store_true", help="also write trace CSVs")
    p_suite.set_defaults(func=_cmd_suite)

    p_lem = sub.add_parser("lemmas", help="run the standalone analysis oracle battery")
    p_lem.set_defaults(func=_cmd_lemmas)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
