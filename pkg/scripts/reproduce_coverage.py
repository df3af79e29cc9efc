#!/usr/bin/env python3
"""Single-site coverage for 2x2, 4x4 and 8x8 MIMO.

Prints the fitted pathloss offset, usable and detectable ranges along the
first sector's boresight, the share of pixels above sensitivity and the RSRP
class histogram, then writes PGM rasters for each MIMO order.
"""

import argparse
from pathlib import Path

from cellplan.coverage import cell_range, coverage_fraction, coverage_grid, histogram, write_pgm
from cellplan.scenario import MimoConfig, load_scenario, load_scenario_file


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default=None, help="defaults to the built-in single site")
    ap.add_argument("--out-dir", default="out/coverage")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    scen = load_scenario_file(args.scenario) if args.scenario else load_scenario("")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"pathloss offset {scen.propagation.offset_db:.3f} dB")
    for tx in (2, 4, 8):
        sc = scen.with_mimo(MimoConfig(tx, tx))
        raster, _ = coverage_grid(sc, args.threads)
        cr = cell_range(sc, 0, sc.sites[0].sectors[0].azimuth)
        frac = coverage_fraction(raster, sc.receiver.sensitivity)
        hist = histogram(raster.values)
        bins = ", ".join(f"[{b['range'][0]:g},{b['range'][1]:g}) {b['percent']:.1f}%" for b in hist["bins"])
        print(f"{tx}x{tx}: usable {cr.usable_km:.2f} km, detectable {cr.detectable_km:.2f} km"
              f"{' (grid edge)' if cr.detectable_limited else ''}, >= sensitivity {100 * frac:.2f}%")
        print(f"    {bins}")
        write_pgm(raster, out / f"rsrp_{tx}x{tx}.pgm")
    print(f"rasters in {out}")


if __name__ == "__main__":
    main()
