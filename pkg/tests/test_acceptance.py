"""Acceptance criteria, one test per criterion.

Each test prints a single ``[ACCEPT n] PASS|FAIL`` line with the measured
value, the pinned tolerance and the runtime, whatever the outcome.
"""

import json
import math
import time

import numpy as np
import pytest

from cellplan.antenna_pattern import ArraySpec, PasSpec, fit_erp, ideal_pattern, spread_pattern
from cellplan.capacity import (FluidModelParams, point_throughput, pusc_capacity, pusc_sinr, sector_throughput,
                               valid_tdd_splits)
from cellplan.cli import main
from cellplan.coverage import cell_range, coverage_fraction, coverage_grid
from cellplan.link_budget import rsrp_offset_db
from cellplan.measurement import BinnedSeries, compare
from cellplan.scenario import MimoConfig, TddSplit, default_scenario, place_users

MIMOS = [MimoConfig(2, 2), MimoConfig(4, 4), MimoConfig(8, 8)]


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail, elapsed=None, limit=None):
        timing = ""
        if elapsed is not None:
            timing = f" [{elapsed:.2f} s" + (f" / limit {limit:g} s]" if limit else "]")
        with capsys.disabled():
            print(f"\n[ACCEPT {n:2d}] {'PASS' if ok else 'FAIL'} {title}: {detail}{timing}")
        return ok
    return emit


def test_01_erp_fit_anchor(report):
    t0 = time.perf_counter()
    ideal = ideal_pattern(ArraySpec(320))
    # sigma at half a sampling step: the identity-spread case
    real = spread_pattern(ideal, PasSpec(ideal.step / 2))
    fit = fit_erp(real, -25.0)
    dt = time.perf_counter() - t0
    ok = abs(fit.sll_effect - 20.5) <= 3.0 and dt < 5.0
    report(1, "ERP fit anchor", ok,
           f"sll_effect {fit.sll_effect:.3f} dB, target 20.5 +/- 3 dB (BW {math.degrees(fit.bw_effect):.3f} deg)",
           dt, 5)
    assert ok


def _brute_force_min(pattern, floor_db, n=50):
    g = pattern.gains / pattern.gains.max()
    center = pattern.angles[int(np.argmax(g))]
    dist = np.abs(pattern.angles - center)
    slls = np.linspace(0, -floor_db, n + 2)[1:-1]
    levels = 10 ** (-slls / 10)
    best = math.inf
    for bw in np.linspace(0, math.pi, n + 2)[1:-1]:
        inside = dist <= bw / 2
        erp = np.where(inside[None, :], 1.0, levels[:, None])
        best = min(best, float(np.min(np.sum(np.abs(erp - g[None, :]), axis=1)) * pattern.step))
    return best


def test_02_erp_fit_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    ideal = ideal_pattern(ArraySpec(320))
    worst = -math.inf
    for sigma_deg in rng.uniform(1.0, 30.0, 20):
        real = spread_pattern(ideal, PasSpec(math.radians(sigma_deg)))
        fit = fit_erp(real, -20.0)
        worst = max(worst, fit.residual - _brute_force_min(real, -20.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 30.0
    report(2, "ERP fit oracle", ok, f"max(fit - brute force) = {worst:.3e} over 20 patterns, must be <= 0", dt, 30)
    assert ok


def test_03_rsrp_offset(report):
    off = rsrp_offset_db(10.0)
    ok = abs(off - 27.78) <= 0.01
    report(3, "RSRP offset", ok, f"{off:.4f} dB at 10 MHz, target 27.78 +/- 0.01 dB")
    assert ok


def test_04_cell_ranges(report):
    t0 = time.perf_counter()
    base = default_scenario()
    ranges = [cell_range(base.with_mimo(m)).usable_km for m in MIMOS]
    dt = time.perf_counter() - t0
    ok = (abs(ranges[0] - 2.0) <= 0.02 and 2.25 <= ranges[1] <= 2.75 and 2.52 <= ranges[2] <= 3.08
          and dt < 10.0)
    report(4, "Cell ranges", ok,
           f"2x2 {ranges[0]:.2f} km (2.0 +/- 1 px), 4x4 {ranges[1]:.2f} km in [2.25, 2.75], "
           f"8x8 {ranges[2]:.2f} km in [2.52, 3.08]; offset {base.propagation.offset_db:.3f} dB", dt, 10)
    assert ok


def test_05_coverage_fraction(report):
    base = default_scenario()
    frac = [coverage_fraction(coverage_grid(base.with_mimo(m))[0], -110.0) for m in MIMOS]
    ok = frac[0] < frac[1] < frac[2]
    report(5, "Coverage fraction", ok,
           " < ".join(f"{100 * f:.2f}%" for f in frac) + " (strictly increasing required)")
    assert ok


def test_06_cluster_throughput(report):
    t0 = time.perf_counter()
    scen = default_scenario(**{"layout.n_sites": 20})
    x, y, _ = place_users(scen, 1000)
    means = [float(np.mean(point_throughput(scen.with_mimo(m), x, y)[0])) for m in MIMOS]
    dt = time.perf_counter() - t0
    ok = means[0] < means[1] < means[2] and dt < 60.0
    report(6, "Cluster throughput", ok,
           " < ".join(f"{m:.3f}" for m in means) + " Mbps mean DL, 20 sites x 1000 users", dt, 60)
    assert ok


def test_07_tdd_splits(report):
    brute = [n for n in range(1, 48) if n % 2 == 1 and (47 - n) % 3 == 0]
    strict = [s.dl_symbols for s in valid_tdd_splits(True)]
    lenient = valid_tdd_splits(False)
    field_split = TddSplit(26, 21)
    ok = (strict == brute == [5, 11, 17, 23, 29, 35, 41, 47]
          and field_split in lenient and field_split not in valid_tdd_splits(True))
    report(7, "TDD splits", ok, f"strict {strict}; 26:21 lenient-only {field_split in lenient}")
    assert ok


def test_08_sector_anchor(report):
    scen = default_scenario()
    a, b = sector_throughput(scen, TddSplit(26, 21)), sector_throughput(scen, TddSplit(35, 12))
    ratio = b.dl_mbps / a.dl_mbps
    ok = (a.dl_mbps == pytest.approx(28.51, abs=1e-12) and abs(ratio - 35 / 26) <= 1e-9
          and b.dl_mbps > a.dl_mbps and b.ul_mbps < a.ul_mbps)
    report(8, "Sector anchor", ok,
           f"DL(26:21) {a.dl_mbps:.4f} Mbps, ratio {ratio:.12f} vs 35/26, "
           f"UL {a.ul_mbps:.2f} -> {b.ul_mbps:.2f} Mbps")
    assert ok


def test_09_fluid_model(report):
    ok = pusc_capacity(1.0) == 1.0
    for k in (1, 3, 7):
        r_max = 2 * math.sqrt(k)
        rs = np.linspace(0.01, 0.99 * r_max, 100)
        for eta in (2.5, 3.0, 4.0):
            s = np.array([pusc_sinr(FluidModelParams(k, eta, r)) for r in rs])
            ok &= bool(np.all(np.diff(s) < 0))
    report(9, "Fluid model", ok, "pusc_sinr strictly decreasing over 9 sweeps; pusc_capacity(1) == 1")
    assert ok


def test_10_comparison_stats(report):
    d = np.linspace(0.1, 5.0, 500)
    sim = -60 - 35 * np.log10(d)
    series = lambda v: BinnedSeries(d, v, np.ones(d.size, int))  # noqa: E731
    s0 = compare(d, sim, series(sim))
    s5 = compare(d, sim, series(sim - 5.0))
    sn = compare(d, sim, series(sim + np.random.default_rng(78).normal(0, 7.8, d.size)))
    ok = ((s0.mean_error_db, s0.std_dev_db, s0.rmse_db) == (0.0, 0.0, 0.0)
          and abs(s5.mean_error_db + 5) < 1e-9 and s5.std_dev_db < 1e-9 and abs(s5.rmse_db - 5) < 1e-9
          and 7.0 <= sn.rmse_db <= 8.6)
    report(10, "Comparison stats", ok,
           f"self rmse {s0.rmse_db:g}, offset -5 -> ({s5.mean_error_db:.3f}, {s5.std_dev_db:.1e}, "
           f"{s5.rmse_db:.3f}), noise rmse {sn.rmse_db:.3f} in [7.0, 8.6]")
    assert ok


def _run(args):
    try:
        return main(args)
    except SystemExit as exc:
        return exc.code


def test_11_determinism(report, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    scen = tmp_path / "cluster.toml"
    scen.write_text("[layout]\nn_sites = 20\n[grid]\nwidth = 200\nheight = 200\nresolution = 60.0\n")
    dt_csv = tmp_path / "dt.csv"
    dt_csv.write_text("route,distance_km,rsrp_dbm\n" + "".join(
        f"r,{0.05 + 0.1 * k:.2f},{-70 - 12 * k ** 0.5:.3f}\n" for k in range(40)))
    commands = {
        "fit-pattern": ["fit-pattern", "--elements", "320", "--spread-deg", "5,20"],
        "coverage": ["coverage", "--scenario", str(scen), "--mimo", "2x2,4x4,8x8"],
        "capacity": ["capacity", "--scenario", str(scen), "--split", "26:21", "--split", "35:12",
                     "--mimo", "2x2,4x4,8x8", "--users", "200"],
        "compare": ["compare", "--scenario", str(scen), "--drive-test", str(dt_csv)],
        "splits": ["splits"],
    }
    mismatched = []
    n_files = 0
    for name, args in commands.items():
        outs = []
        for k, threads in enumerate(("1", "8", "1", "8")):
            d = tmp_path / f"{name}{k}"
            if _run(args + ["--out-dir", str(d), "--threads", threads]) != 0:
                mismatched.append(f"{name}: nonzero exit")
            man = json.loads((d / "manifest.json").read_text())
            outs.append({o["file"]: (o["sha256"], (d / o["file"]).read_bytes()) for o in man["outputs"]})
        n_files += len(outs[0])
        if not outs[0] or any(o != outs[0] for o in outs[1:]):
            mismatched.append(name)
    dt = time.perf_counter() - t0
    ok = not mismatched
    report(11, "Determinism", ok,
           f"{n_files} output files identical over 2 runs x threads {{1, 8}} for 5 commands"
           + (f"; mismatched: {mismatched}" if mismatched else ""), dt)
    assert ok
