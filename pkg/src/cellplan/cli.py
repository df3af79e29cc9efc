"""Command-line front end: ``cellplan {fit-pattern,coverage,capacity,compare,splits}``.

Exit codes: 0 success, 2 usage or config error, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .antenna_pattern import (DEFAULT_SAMPLES, ArraySpec, PasSpec, PatternError, fit_erp, ideal_pattern,
                              spread_pattern, write_pattern_csv)
from .capacity import (check_split, point_throughput, sector_throughput, throughput_grid,
                       throughput_histogram, valid_tdd_splits)
from .coverage import (cell_range, coverage_fraction, coverage_grid, histogram, radial_profile,
                       site_rsrp_grid, thread_count, write_grid_csv, write_pgm)
from .measurement import DataError, aligned_series, bin_by_distance, compare, parse_drive_test, sector_report
from .report import RunManifest, write_json
from .scenario import (STRICT_DL_SYMBOLS, ConfigError, LoadReport, MimoConfig, Scenario, TddSplit, load_scenario,
                       place_users)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3

log = logging.getLogger("cellplan")


class UsageError(Exception):
    pass


def _float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _mimo_list(text: str):
    try:
        return [MimoConfig.parse(v.strip()) for v in text.split(",") if v.strip()]
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _tag(x: float) -> str:
    return f"{x:g}".replace("-", "m")


def _load(args) -> Scenario:
    report = LoadReport()
    if args.scenario:
        path = Path(args.scenario)
        if not path.is_file():
            raise UsageError(f"scenario file not found: {path}")
        scen = load_scenario(path.read_text(encoding="utf-8"), report)
    else:
        scen = load_scenario("", report)
    if args.seed is not None:
        scen = replace(scen, seed=args.seed)
    for note in report.notes:
        log.info(note)
    return scen


def _manifest(args, argv, scen: Scenario | None) -> RunManifest:
    return RunManifest(command=list(argv), scenario_hash=scen.digest() if scen else None,
                       seed=scen.seed if scen else args.seed, threads=thread_count(args.threads))


def cmd_fit_pattern(args, argv) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest(args, argv, None)
    spreads = args.spread_deg or [0.0]
    spec = ArraySpec(args.elements)
    for sd in spreads:
        if sd < 0:
            raise UsageError(f"--spread-deg must be >= 0, got {sd}")
        sigma = math.radians(sd)
        n = args.samples or DEFAULT_SAMPLES
        if args.samples is None and sigma >= math.pi / n:
            # smallest power of two resolving the kernel (step <= sigma/8)
            n = max(n, 1 << int(math.ceil(math.log2(8 * math.pi / sigma))))
        ideal = ideal_pattern(spec, n)
        # a zero spread is the sub-step identity case
        real = spread_pattern(ideal, PasSpec(sigma if sigma > 0 else math.pi / n / 2))
        fit = fit_erp(real, args.floor_db)
        stem = f"n{args.elements}_s{_tag(sd)}deg"
        pcsv = write_pattern_csv(real, out / f"pattern_{stem}.csv")
        fjson = write_json(out / f"fit_{stem}.json", {
            "elements": args.elements, "spread_deg": sd, "floor_db": args.floor_db, "samples": n,
            "bw_effect_rad": fit.bw_effect, "bw_effect_deg": math.degrees(fit.bw_effect),
            "sll_effect_db": fit.sll_effect, "sidelobe_level_db": -fit.sll_effect,
            "pointing_rad": fit.pointing, "residual": fit.residual,
        })
        man.add(pcsv)
        man.add(fjson)
        print(f"spread {sd:g} deg: BW {math.degrees(fit.bw_effect):.4f} deg, SLL -{fit.sll_effect:.3f} dB")
    man.write(out)
    return EXIT_OK


def cmd_coverage(args, argv) -> int:
    scen = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest(args, argv, scen)
    mimos = args.mimo or [scen.sites[0].sectors[0].mimo]
    site = args.site
    if not 0 <= site < len(scen.sites):
        raise UsageError(f"--site must be in 0..{len(scen.sites) - 1}")
    azimuth = scen.sites[site].sectors[0].azimuth if args.azimuth is None else args.azimuth
    ranges = []
    for mimo in mimos:
        sc = scen.with_mimo(mimo)
        raster, _best = coverage_grid(sc, args.threads)
        tag = mimo.label
        write_grid_csv(raster, out / f"rsrp_{tag}.csv")
        write_pgm(raster, out / f"rsrp_{tag}.pgm")
        hist = histogram(raster.values)
        hist["coverage_fraction_usable"] = coverage_fraction(raster, sc.receiver.sensitivity)
        hist["mimo"] = tag
        write_json(out / f"histogram_{tag}.json", hist)
        site_raster = raster if len(sc.sites) == 1 else site_rsrp_grid(sc, site, args.threads)
        cr = cell_range(sc, site, azimuth, raster=site_raster)
        ranges.append({"mimo": tag, **asdict(cr)})
        for name in (f"rsrp_{tag}.csv", f"rsrp_{tag}.pgm", f"histogram_{tag}.json"):
            man.add(out / name)
        print(f"{tag}: usable {cr.usable_km:.2f} km, detectable {cr.detectable_km:.2f} km, "
              f"RSRP >= {sc.receiver.sensitivity:g} dBm on {100 * hist['coverage_fraction_usable']:.2f}% of grid")
    write_json(out / "cell_range.json", {"site": site, "azimuth_deg": azimuth,
                                         "offset_db": scen.propagation.offset_db, "ranges": ranges})
    man.add(out / "cell_range.json")
    man.write(out)
    return EXIT_OK


def cmd_capacity(args, argv) -> int:
    scen = _load(args)
    strict = args.strict
    splits = []
    for text in args.split or [scen.tdd.label]:
        try:
            splits.append(check_split(TddSplit.parse(text), strict))
        except ConfigError as exc:
            valid = ", ".join(str(n) for n in STRICT_DL_SYMBOLS)
            raise UsageError(f"invalid TDD split {text}: {exc}; valid DL symbol counts: {{{valid}}}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest(args, argv, scen)
    mimos = args.mimo or [scen.sites[0].sectors[0].mimo]
    summary = {"splits": [], "mimo": [], "users_per_site": args.users}
    for split in splits:
        st = sector_throughput(scen, split)
        summary["splits"].append({"split": split.label, "dl_mbps": st.dl_mbps, "ul_mbps": st.ul_mbps,
                                  "calibration_mbps_per_symbol": st.calibration_constant})
        print(f"split {split.label}: sector DL {st.dl_mbps:.2f} Mbps, UL {st.ul_mbps:.2f} Mbps")
    grid_split = splits[0]
    ux, uy, _ = place_users(scen, args.users)
    for mimo in mimos:
        sc = scen.with_mimo(mimo)
        tag = mimo.label
        raster, best = throughput_grid(sc, grid_split, args.threads)
        write_grid_csv(raster, out / f"throughput_{tag}.csv")
        hist = throughput_histogram(raster.values)
        hist["mimo"] = tag
        hist["split"] = grid_split.label
        write_json(out / f"throughput_hist_{tag}.json", hist)
        user_tp, user_best = point_throughput(sc, ux, uy, grid_split)
        st = sector_throughput(sc, grid_split, throughput=user_tp, best=user_best)
        (out / f"sectors_{tag}.csv").write_text(st.to_csv(), encoding="utf-8")
        summary["mimo"].append({"mimo": tag, "split": grid_split.label, "grid_mean_dl_mbps": hist["mean_mbps"],
                                "user_mean_dl_mbps": float(np.mean(user_tp))})
        for name in (f"throughput_{tag}.csv", f"throughput_hist_{tag}.json", f"sectors_{tag}.csv"):
            man.add(out / name)
        print(f"{tag}: mean DL per user {np.mean(user_tp):.3f} Mbps, grid mean {hist['mean_mbps']:.3f} Mbps")
    write_json(out / "capacity_summary.json", summary)
    man.add(out / "capacity_summary.json")
    man.write(out)
    return EXIT_OK


def cmd_compare(args, argv) -> int:
    scen = _load(args)
    path = Path(args.drive_test)
    if not path.is_file():
        raise UsageError(f"drive-test file not found: {path}")
    parsed = parse_drive_test(path.read_text(encoding="utf-8"))
    if parsed.errors:
        details = "; ".join(f"line {ln} {col}: {msg}" for ln, col, msg in parsed.errors[:10])
        raise DataError(f"{len(parsed.errors)} malformed row(s): {details}")
    site = args.site
    if not 0 <= site < len(scen.sites):
        raise UsageError(f"--site must be in 0..{len(scen.sites) - 1}")
    s = scen.sites[site]
    azimuth = s.sectors[0].azimuth if args.azimuth is None else args.azimuth
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest(args, argv, scen)
    raster = site_rsrp_grid(scen, site, args.threads)
    r_m, sim = radial_profile(raster, s.x, s.y, azimuth)
    series = bin_by_distance(parsed.samples, args.bin_km, "rsrp_dbm", (s.x, s.y), args.average)
    stats = compare(r_m / 1000.0, sim, series)
    write_json(out / "compare_stats.json", stats.to_dict())
    rows = ["distance_km,field,simulated,error,count"]
    for d, f, sv, e, c in aligned_series(r_m / 1000.0, sim, series):
        rows.append(f"{d:.6f},{f:.6f},{sv:.6f},{e:.6f},{int(c)}")
    (out / "aligned.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    man.add(out / "compare_stats.json")
    man.add(out / "aligned.csv")
    if any(x.dl_mbps is not None or x.ul_mbps is not None for x in parsed.samples):
        write_json(out / "sector_report.json", sector_report(parsed.samples).to_dict())
        man.add(out / "sector_report.json")
    man.write(out)
    print(f"mean error {stats.mean_error_db:.3f} dB, std {stats.std_dev_db:.3f} dB, "
          f"rmse {stats.rmse_db:.3f} dB over {stats.n} bins")
    return EXIT_OK


def cmd_splits(args, argv) -> int:
    splits = valid_tdd_splits(args.strict)
    payload = {"strict": args.strict, "splits": [{"dl": s.dl_symbols, "ul": s.ul_symbols} for s in splits]}
    print(" ".join(s.label for s in splits))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        man = _manifest(args, argv, None)
        man.add(write_json(out / "splits.json", payload))
        man.write(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cellplan", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cellplan {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario config (TOML or JSON); defaults apply when omitted")
    common.add_argument("--out-dir", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $CELLPLAN_THREADS or 1); output does not depend on it")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit-pattern", parents=[common], help="spread an array pattern and fit its ERP")
    f.add_argument("--elements", type=int, required=True)
    f.add_argument("--spread-deg", type=_float_list, default=None, help="comma-separated angular spreads")
    f.add_argument("--floor-db", type=float, default=-20.0, help="SLL search floor, negative dB")
    f.add_argument("--samples", type=int, default=None, help="angle samples over [0, pi)")
    f.set_defaults(func=cmd_fit_pattern)

    c = sub.add_parser("coverage", parents=[common], help="RSRP raster, histogram and cell ranges")
    c.add_argument("--mimo", type=_mimo_list, default=None, help="e.g. 2x2,4x4,8x8")
    c.add_argument("--site", type=int, default=0)
    c.add_argument("--azimuth", type=float, default=None, help="range azimuth in degrees")
    c.set_defaults(func=cmd_coverage)

    k = sub.add_parser("capacity", parents=[common], help="throughput raster and sector accounting")
    k.add_argument("--split", action="append", default=None, help="DL:UL split, repeatable (e.g. 26:21)")
    k.add_argument("--strict", action="store_true", help="enforce the odd-DL rule (rejects 26:21)")
    k.add_argument("--mimo", type=_mimo_list, default=None)
    k.add_argument("--users", type=int, default=1000, help="users per site for sector averages")
    k.set_defaults(func=cmd_capacity)

    m = sub.add_parser("compare", parents=[common], help="score a simulated profile against a drive test")
    m.add_argument("--drive-test", required=True)
    m.add_argument("--site", type=int, default=0)
    m.add_argument("--azimuth", type=float, default=None)
    m.add_argument("--bin-km", type=float, default=0.1)
    m.add_argument("--average", choices=("db", "linear"), default="db")
    m.set_defaults(func=cmd_compare)

    s = sub.add_parser("splits", parents=[common], help="list valid TDD splits")
    s.add_argument("--strict", action="store_true")
    s.set_defaults(func=cmd_splits, out_dir=None)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args, ["cellplan", *argv])
    except (UsageError, ConfigError, PatternError) as exc:
        parser.exit(EXIT_USAGE, f"cellplan {args.command}: error: {exc}\n")
    except DataError as exc:
        parser.exit(EXIT_DATA, f"cellplan {args.command}: data error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
