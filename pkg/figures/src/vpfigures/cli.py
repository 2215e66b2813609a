"""Render PNG overviews for vpcontrol artifact directories.

Usage:
    vpfigures run DIR [--baseline DIR]
    vpfigures landscape DIR [DIR ...]
    vpfigures optimization DIR [--sweep DIR]
    vpfigures auto DIR            # dispatch on the manifest's subcommand
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vpfigures import artifacts, plots


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vpfigures", description=__doc__)
    parser.add_argument("kind", choices=["run", "landscape", "optimization", "auto"])
    parser.add_argument("dirs", nargs="+", type=Path)
    parser.add_argument("--baseline", type=Path, help="baseline run for energy overlays")
    parser.add_argument("--sweep", type=Path, help="2-d sweep for trajectory overlays")
    args = parser.parse_args(argv)

    kind = args.kind
    if kind == "auto":
        manifest = args.dirs[0] / "manifest.json"
        if not manifest.exists():
            print(f"vpfigures: {args.dirs[0]} has no manifest.json", file=sys.stderr)
            return 1
        sub = artifacts.read_json(manifest)["subcommand"]
        kind = {"simulate": "run", "sweep": "landscape", "optimize": "optimization"}.get(sub)
        if kind is None:
            print(f"vpfigures: no figure class for subcommand {sub!r}", file=sys.stderr)
            return 1

    try:
        if kind == "run":
            written = plots.plot_run(args.dirs[0], baseline_dir=args.baseline)
        elif kind == "landscape":
            written = plots.plot_landscape(args.dirs)
        else:
            written = plots.plot_optimization(args.dirs[0], sweep_dir=args.sweep)
    except artifacts.ArtifactError as err:
        print(f"vpfigures: {err}", file=sys.stderr)
        return 1

    for path in written:
        print(path)
    return 0 if written else 1


if __name__ == "__main__":
    sys.exit(main())
