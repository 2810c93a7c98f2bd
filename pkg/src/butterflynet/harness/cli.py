"""Command line entry point.

    butterflynet <task> [--config FILE] [--seed S] [--paper-scale] [--out DIR]

Config files are plain-text key=value (one per line, '#' comments; tuple
values are space separated).  Outputs in the --out directory: results.csv,
results.json, trace_<run>.csv, plotdata_<name>.csv, and timings.csv (wall
times; the only non-deterministic file).  Exit codes: 0 success, 2
validation error, 3 training divergence.
"""

import argparse
import sys
from pathlib import Path

from ..errors import TrainingDiverged, ValidationError
from .config import TASKS, parse_config
from .experiments import RUNNERS
from .results import write_plotdata, write_trace


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="butterflynet",
        description="Butterfly-net experiment harness",
    )
    parser.add_argument("task", choices=sorted(TASKS))
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--paper-scale", action="store_true", default=None)
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    overrides = {
        "task": args.task,
        "seed": args.seed,
        "paper_scale": args.paper_scale,
        "out_dir": args.out,
    }
    try:
        cfg = parse_config(args.config, overrides)
    except (ValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        table, artifacts = RUNNERS[cfg.task](cfg)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        write_trace(out_dir / "trace_diverged.csv", exc.trace)
        return 3
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    table.write_csv(out_dir / "results.csv")
    table.write_json(out_dir / "results.json")
    for name, trace in artifacts.get("traces", {}).items():
        write_trace(out_dir / f"trace_{name}.csv", trace)
    for name, cols in artifacts.get("plots", {}).items():
        write_plotdata(out_dir / f"plotdata_{name}.csv", cols)
    timings = artifacts.get("timings", {})
    if timings:
        lines = ["name,seconds"] + [f"{k},{v:.6f}" for k, v in timings.items()]
        (out_dir / "timings.csv").write_text("\n".join(lines) + "\n")
    for row in table.rows:
        std = "" if row["std"] is None else f" +- {row['std']:.3g}"
        print(f"{row['metric']}: {row['value']:.6g}{std}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
