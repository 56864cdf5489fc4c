"""Command line: plot <kind> --in <path...> --out <img>.

Kinds and their inputs (order-free; files are recognized by name/suffix):
  field      field CSV [+ report JSON for interface lines]
  band       band CSV [+ report JSON for the frequency plane]
  brillouin  selected CSV + report JSON [+ band CSV for the level set]
  sweep      sweep CSV

Inputs are never modified; output format follows the --out suffix (.png/.svg).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import FormatError
from . import render


def _classify(paths):
    """Sort input paths into roles by suffix and conventional names."""
    roles = {"report": None, "field": None, "band": None, "selected": None, "sweep": None}
    for p in map(Path, paths):
        if p.suffix == ".json":
            roles["report"] = p
            continue
        name = p.name.lower()
        for key in ("field", "selected", "sweep", "band"):
            if key in name:
                roles[key] = p
                break
    return roles


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot", description="Render blochfem output files")
    parser.add_argument("kind", choices=["field", "band", "brillouin", "sweep"])
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, help="input file(s)")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)

    roles = _classify(args.inputs)
    try:
        if args.kind == "field":
            if roles["field"] is None:
                raise FormatError("field plot needs a field CSV")
            out = render.plot_field(roles["field"], args.out, report_json=roles["report"])
        elif args.kind == "band":
            if roles["band"] is None:
                raise FormatError("band plot needs a band CSV")
            out = render.plot_band(roles["band"], args.out, report_json=roles["report"])
        elif args.kind == "brillouin":
            if roles["selected"] is None or roles["report"] is None:
                raise FormatError("brillouin plot needs a selected CSV and a report JSON")
            out = render.plot_brillouin(
                roles["selected"], roles["report"], args.out, band_csv=roles["band"]
            )
        else:
            if roles["sweep"] is None:
                raise FormatError("sweep plot needs a sweep CSV")
            out = render.plot_sweep(roles["sweep"], args.out)
    except (FormatError, OSError, ValueError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
