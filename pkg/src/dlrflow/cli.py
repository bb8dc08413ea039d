"""Command-line entry point: simulate --config <file> [overrides]."""

from __future__ import annotations

import argparse
import sys

from .scenarios import ConfigError, load_config, run
from .splitting import PhaseFailure


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Low-rank kinetic / MacCormack solver for weakly "
                    "compressible 2D flow on the periodic unit square.")
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--scenario", choices=("sound_wave", "shear_flow", "custom"))
    p.add_argument("--solver", choices=("lowrank", "maccormack", "both"))
    p.add_argument("--nx", type=int, dest="n_x")
    p.add_argument("--nv", type=int, dest="n_v")
    p.add_argument("--rank", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--reynolds", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--order", choices=("lie", "strang"))
    p.add_argument("--backend",
                   choices=("fd_rk4", "spectral", "semi_lagrangian"))
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run(cfg)
    except PhaseFailure as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out_dir}/diagnostics.csv "
          f"(lowrank steps: {result.lowrank_steps}, "
          f"reference steps: {result.reference_steps}, "
          f"snapshots: {len(result.snapshots)})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
