"""Command-line entry point: ``biaowc <verb> [options]``.

Exit status: 0 on success, 1 on validation error (including a failed
``verify``), 2 on I/O error.
"""

import argparse
import logging
import os
import sys
import time

from . import _accel
from .config import ConfigError, ScenarioConfig, load_config
from .harness import run_fig5, run_fig6, run_scenario
from .supersymbol import build_schedule, format_schedule, verify_decodability

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _config(args) -> ScenarioConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.drops is not None:
        overrides["drops"] = args.drops
    if args.config:
        return load_config(args.config, overrides)
    return ScenarioConfig(**overrides)


def _open_out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return open(os.path.join(args.out, name), "w", encoding="utf-8", newline="")


def cmd_fig5(args):
    cfg = _config(args)
    res = run_fig5(cfg)
    with _open_out(args, "fig5.csv") as fh:
        res.write_csv(fh)
    with _open_out(args, "fig5_summary.csv") as fh:
        res.write_summary(fh)
    for G, kind, clusters, tiling, drops, mean_rate, _ in res.aggregates():
        print(f"G={G:<2d} {kind:<8s} clusters={clusters:<2d} mean user rate {mean_rate:.4f} bits/slot")


def cmd_fig6(args):
    cfg = _config(args)
    res = run_fig6(cfg)
    with _open_out(args, "fig6.csv") as fh:
        res.write_csv(fh)
    with _open_out(args, "fig6_summary.csv") as fh:
        res.write_summary(fh)
    for K, kind, G, lo, hi in res.summary():
        print(f"K={K:<3d} {kind:<8s} G={G:<2d} block length {lo}..{hi}")


def cmd_run(args):
    cfg = _config(args)
    res = run_scenario(cfg)
    with _open_out(args, "run.csv") as fh:
        res.write_csv(fh)
    with _open_out(args, "run_summary.csv") as fh:
        res.write_summary(fh)
    for agg in res.aggregates():
        print(f"{agg[1]} G={agg[0]} mean user rate {agg[5]:.4f} bits/slot, mean sum rate {agg[6]:.4f}")


def cmd_dump_schedule(args):
    text = format_schedule(build_schedule(args.aps, args.users))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with _open_out(args, f"schedule_L{args.aps}_K{args.users}.txt") as fh:
            fh.write(text)


def cmd_verify(args):
    t0 = time.perf_counter()
    ok = True
    for L in range(2, args.max_aps + 1):
        for K in range(1, args.max_users + 1):
            rep = verify_decodability(build_schedule(L, K))
            ok &= rep.passed
            for line in rep.lines():
                print(line)
    print(f"{'all conditions pass' if ok else 'FAILED'} ({time.perf_counter() - t0:.2f} s, {_accel.BACKEND} kernels)")
    return EXIT_OK if ok else EXIT_INVALID


def build_parser():
    p = argparse.ArgumentParser(prog="biaowc", description="Blind interference alignment for optical wireless networks")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--seed", type=int, help="master seed (u64)")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--drops", type=int, help="Monte Carlo drops")

    for name, fn, help_ in (("fig5", cmd_fig5, "user rate against number of groups"),
                            ("fig6", cmd_fig6, "block length against number of users"),
                            ("run", cmd_run, "evaluate the configured topology")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("dump-schedule", help="print a BIA transmission block")
    common(sp, out_default="-")
    sp.add_argument("--aps", "-L", type=int, required=True)
    sp.add_argument("--users", "-K", type=int, required=True)
    sp.set_defaults(func=cmd_dump_schedule)
    sp = sub.add_parser("verify", help="structural decodability checks")
    common(sp)
    sp.add_argument("--max-aps", type=int, default=6)
    sp.add_argument("--max-users", type=int, default=5)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        status = args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
