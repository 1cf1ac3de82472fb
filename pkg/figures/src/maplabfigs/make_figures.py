"""Regenerate all six paper-style figures from acceptance-suite artifacts.

Usage: maplab-figs <acceptance prefix> [--outdir DIR]

The prefix is the --out value given to `stdmaplab suite --name
acceptance` (e.g. out/acceptance); the expected artifact files are
documented in the primary package's docs/formats.md.
"""

from __future__ import annotations

import argparse
import sys
from typing import List

from .figspec import FigureSpec
from .render import render


def default_specs(prefix: str, outdir: str) -> List[FigureSpec]:
    return [
        FigureSpec("orbit_portrait", (f"{prefix}_orbit.csv",),
                   f"{outdir}/orbit_portrait.png",
                   title="standard map orbits, lam = 3.4"),
        FigureSpec("bound_curve", (f"{prefix}_bounds_table.csv",),
                   f"{outdir}/bound_crossing.png"),
        FigureSpec("wiener_transition",
                   (f"{prefix}_wiener_mathieu.csv", f"{prefix}_wiener_stdmap.csv"),
                   f"{outdir}/wiener_transition.png"),
        FigureSpec("wspectrum_bands", (f"{prefix}_wspectrum_bands.csv",),
                   f"{outdir}/wspectrum_bands.png",
                   title="w-spectrum, k = 7, lam = 2.1"),
        FigureSpec("permutation_distribution", (f"{prefix}_perm_exceedance.csv",),
                   f"{outdir}/permutation_distribution.png",
                   title="cyclic 9-annulus permutations, lam = 4"),
        FigureSpec("exponent_cdfs",
                   (f"{prefix}_cdf_lam2_cdf.csv", f"{prefix}_cdf_lam10_cdf.csv"),
                   f"{outdir}/exponent_cdfs.png"),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="maplab-figs")
    ap.add_argument("prefix", help="acceptance artifact prefix")
    ap.add_argument("--outdir", default="figs")
    args = ap.parse_args(argv)
    for spec in default_specs(args.prefix, args.outdir):
        path = render(spec)
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
