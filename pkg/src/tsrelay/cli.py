"""Command-line interface.

Subcommands:
  gen     draw a channel realization and write it as a text instance file
  solve   run one scheme on an instance file and print the diagnostics
  sweep   run a Monte Carlo sweep from a config file into a CSV
  report  render figures from a sweep CSV
  verify  run the self-check suite on random instances

Exit codes: 0 on success, 1 on verification or solver failure, 2 on usage
errors.
"""

import argparse
import sys
from dataclasses import replace

from .fixed_source import solve_fixed_source
from .joint import solve_joint
from .model import (
    SystemParams,
    channel_to_text,
    eigen_profile,
    generate_channel,
    harvest_constraint_slack,
    naf_design,
    rate_matrix_form,
    read_channel_file,
)
from .oracle import verify_design
from .sweep import load_config, run_sweep, write_csv
from .verification import run_verification

__all__ = ["main"]


def _add_params_args(p: argparse.ArgumentParser):
    p.add_argument("--p", type=float, default=1.0, help="data-phase source power (linear)")
    p.add_argument("--p0-dbm", type=float, default=0.0,
                   help="energy-phase power threshold in dBm (0 dBm == 1.0 linear)")
    p.add_argument("--eta", type=float, default=0.8, help="energy conversion efficiency")
    p.add_argument("--sigma1-sq", type=float, default=0.1, help="relay noise variance")
    p.add_argument("--sigma2-sq", type=float, default=0.1, help="destination noise variance")
    p.add_argument("--harvest-noise-dim", choices=("D", "L"), default="D",
                   help="noise streams counted in the harvest budget")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsrelay",
        description="Rate-maximizing designs for a time-switching energy-harvesting MIMO relay",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a channel instance file")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--antennas", type=int, default=4, help="sets M = L = N")
    p_gen.add_argument("--m", type=int, default=None)
    p_gen.add_argument("--l", type=int, default=None)
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--d", type=int, default=None, help="stream count (default min(M,L,N))")
    p_gen.add_argument("--rician-k", type=float, default=1.0)
    p_gen.add_argument("--scatter-var", type=float, default=0.1)
    p_gen.add_argument("--out", default=None, help="output path (default stdout)")

    p_solve = sub.add_parser("solve", help="solve one instance with one scheme")
    p_solve.add_argument("--instance", required=True, help="channel instance file")
    p_solve.add_argument("--scheme", choices=("fixed-source", "joint", "naf"), required=True)
    p_solve.add_argument("--rel-tol", type=float, default=1e-8)
    p_solve.add_argument("--max-iter", type=int, default=500)
    p_solve.add_argument("--out", default=None, help="write the verified design to this file")
    _add_params_args(p_solve)

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep")
    p_sweep.add_argument("--config", required=True, help="key = value config file")
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_report = sub.add_parser("report", help="render figures from a sweep CSV")
    p_report.add_argument("--csv", required=True)
    p_report.add_argument("--outdir", default=None, help="default: alongside the CSV")
    p_report.add_argument("--p0-dbm", type=float, default=None,
                          help="P0 level for the rate-vs-antennas figure")

    p_verify = sub.add_parser("verify", help="run the self-check suite")
    p_verify.add_argument("--trials", type=int, default=50)
    p_verify.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_gen(args) -> int:
    m = args.m if args.m is not None else args.antennas
    l = args.l if args.l is not None else args.antennas
    n = args.n if args.n is not None else args.antennas
    d = args.d if args.d is not None else min(m, l, n)
    params = SystemParams(
        P=1.0, P0=1.0, sigma1_sq=0.1, sigma2_sq=0.1, eta=0.8, D=d, M=m, L=l, N=n
    )
    ch = generate_channel(
        params, rician_k=args.rician_k, scatter_var=args.scatter_var, seed=args.seed
    )
    text = channel_to_text(ch, d)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out} (M={m} L={l} N={n} D={d}, seed={args.seed})")
    else:
        sys.stdout.write(text)
    return 0


def _format_matrix(m) -> str:
    lines = []
    for row in m:
        lines.append(" ".join(f"{z.real:.15e}{z.imag:+.15e}i" for z in row))
    return "\n".join(lines)


def _write_design(path, design) -> None:
    with open(path, "w") as fh:
        fh.write(f"SCHEME {design.scheme}\n")
        fh.write(f"EPSILON {design.epsilon:.15e}\n")
        fh.write("F\n" + _format_matrix(design.f_mat) + "\n")
        fh.write("Q\n" + _format_matrix(design.q_mat) + "\n")
        fh.write("Q_TILDE\n" + _format_matrix(design.q_tilde) + "\n")


def _cmd_solve(args) -> int:
    ch, (m, l, n, d) = read_channel_file(args.instance)
    params = SystemParams(
        P=args.p,
        P0=10.0 ** (args.p0_dbm / 10.0),
        sigma1_sq=args.sigma1_sq,
        sigma2_sq=args.sigma2_sq,
        eta=args.eta,
        D=d,
        M=m,
        L=l,
        N=n,
        harvest_noise_dim=args.harvest_noise_dim,
    )
    profile = eigen_profile(ch, params)
    if args.scheme == "fixed-source":
        design, rep = solve_fixed_source(profile, params)
        rate, eps, iters, converged = rep.rate, rep.epsilon, rep.iterations, rep.converged
        extra = f"mu={rep.mu:.6e} kkt={rep.kkt_residual:.2e}"
    elif args.scheme == "joint":
        design, rep = solve_joint(profile, params, rel_tol=args.rel_tol, max_iter=args.max_iter)
        rate, eps, iters, converged = rep.rate, rep.epsilon, rep.iterations, rep.converged
        mu1, mu2 = rep.mu
        extra = f"mu1={mu1:.6e} mu2={mu2:.6e} kkt={rep.kkt_residual:.2e}"
    else:
        _, fixed_rep = solve_fixed_source(profile, params)
        design = naf_design(ch, params, fixed_rep.epsilon)
        rate = rate_matrix_form(ch, design, params)
        eps, iters, converged = design.epsilon, 0, True
        extra = "epsilon from fixed-source solve"
    slack = harvest_constraint_slack(ch, design, params)

    print(f"scheme      {args.scheme}")
    print(f"rate        {rate:.10g} bits/channel use")
    print(f"epsilon     {eps:.10g}")
    print(f"iterations  {iters}")
    print(f"converged   {str(converged).lower()}")
    print(f"slack       {slack:.6e}")
    print(f"diagnostics {extra}")

    if not converged:
        print("solver did not converge", file=sys.stderr)
        return 1
    if args.out:
        check = verify_design(ch, design, params)
        if not check.passed:
            print("design failed verification, not writing:", file=sys.stderr)
            print(str(check), file=sys.stderr)
            return 1
        _write_design(args.out, design)
        print(f"design written to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    rows = run_sweep(config, workers=args.workers)
    bad = sum(1 for r in rows if not r.converged)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    if bad:
        print(f"{bad} rows flagged non-converged", file=sys.stderr)
        return 1
    return 0


def _cmd_report(args) -> int:
    from .report import render_report

    paths = render_report(args.csv, outdir=args.outdir, p0_dbm=args.p0_dbm)
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_verify(args) -> int:
    result = run_verification(trials=args.trials, seed=args.seed)
    for line in result.lines:
        print(line)
    if not result.passed:
        print(f"{len(result.failures)} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
