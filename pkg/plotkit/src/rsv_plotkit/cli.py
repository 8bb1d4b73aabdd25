"""rsv-plot: render the standard figures for one run directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import plot_ledger, plot_profile, plot_riccati
from .reader import MissingArtifact, SchemaError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rsv-plot",
        description="Generate figures from an rsv run directory",
    )
    parser.add_argument("run_dir", help="path to a finished run directory")
    parser.add_argument("--out", default=None,
                        help="output directory (default: the run directory)")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)

    out_dir = Path(args.out) if args.out else Path(args.run_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = args.format
    try:
        for name, fn in (("riccati", plot_riccati), ("profile", plot_profile),
                         ("ledger", plot_ledger)):
            path = fn(args.run_dir, out_dir / f"{name}.{ext}")
            print(path)
    except (MissingArtifact, SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
