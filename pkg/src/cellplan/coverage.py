"""RSRP rasterization, best-server selection, coverage classes and cell ranges."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .antenna_pattern import ArraySpec, PasSpec, ideal_pattern, spread_pattern
from .link_budget import NO_LINK_DBM, rsrp_offset_db
from .propagation import pathloss_db
from .scenario import GridSpec, Scenario, mimo_tx_gain_db

# rows per work unit; fixed so results never depend on the worker count
CHUNK_ROWS = 16
MIN_DISTANCE_M = 1.0

# RSRP legend edges (dBm)
RSRP_BIN_EDGES = (-140.0, -120.0, -110.0, -105.0, -90.0, -80.0, -70.0, -50.0, 0.0)

PGM_LOW_DBM = -140.0
PGM_HIGH_DBM = -50.0

RSRP_CLASSES = ("excellent", "good", "fair", "poor", "outage")


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("CELLPLAN_THREADS", "1") or 1)
    return max(1, int(threads))


def run_chunked(fn, n_rows: int, threads: int | None = None):
    """Apply ``fn(row_start, row_stop)`` over fixed row chunks, results in row order."""
    bounds = [(a, min(a + CHUNK_ROWS, n_rows)) for a in range(0, n_rows, CHUNK_ROWS)]
    workers = thread_count(threads)
    if workers == 1 or len(bounds) == 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))


@dataclass(frozen=True, eq=False)
class RasterGrid:
    grid: GridSpec
    values: np.ndarray  # shape (height, width); row index follows +y
    quantity: str = "rsrp"

    def __post_init__(self):
        if self.values.shape != (self.grid.height, self.grid.width):
            raise ValueError(f"raster shape {self.values.shape} does not match grid "
                             f"{(self.grid.height, self.grid.width)}")

    def sample(self, x, y):
        """Bilinear interpolation at planar coordinates; NaN outside the grid."""
        g = self.grid
        fx = (np.asarray(x, dtype=float) - g.origin_x) / g.resolution
        fy = (np.asarray(y, dtype=float) - g.origin_y) / g.resolution
        out = np.full(np.broadcast(fx, fy).shape, np.nan)
        ok = (fx >= 0) & (fx <= g.width - 1) & (fy >= 0) & (fy <= g.height - 1)
        fx, fy = np.broadcast_arrays(fx, fy)
        fxo, fyo = fx[ok], fy[ok]
        x0 = np.minimum(np.floor(fxo).astype(int), max(g.width - 2, 0))
        y0 = np.minimum(np.floor(fyo).astype(int), max(g.height - 2, 0))
        x1 = np.minimum(x0 + 1, g.width - 1)
        y1 = np.minimum(y0 + 1, g.height - 1)
        tx = fxo - x0
        ty = fyo - y0
        v = self.values
        out[ok] = ((1 - tx) * (1 - ty) * v[y0, x0] + tx * (1 - ty) * v[y0, x1]
                   + (1 - tx) * ty * v[y1, x0] + tx * ty * v[y1, x1])
        return out


@dataclass(frozen=True)
class CellRange:
    usable_km: float
    detectable_km: float
    azimuth: float
    usable_limited: bool = False
    detectable_limited: bool = False


@dataclass(frozen=True, eq=False)
class PointMetrics:
    """Per-point link quantities for a set of locations."""

    rsrp: np.ndarray          # best-server RSRP, dBm
    best: np.ndarray          # flat sector index of the best server
    signal_dbm: np.ndarray    # best-server wideband received power
    interference_mw: np.ndarray
    noise_mw: float

    @property
    def sinr_db(self) -> np.ndarray:
        s = 10.0 ** (self.signal_dbm / 10.0)
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(s / (self.interference_mw + self.noise_mw))


def thermal_noise_dbm(bandwidth_mhz: float, noise_figure_db: float) -> float:
    """kTB at 290 K plus receiver noise figure."""
    k_t = 1.380649e-23 * 290.0
    return 10.0 * math.log10(k_t * bandwidth_mhz * 1e6 * 1e3) + noise_figure_db


@lru_cache(maxsize=8)
def _sampled_sector_pattern(elements: int, spread_deg: float):
    sigma = math.radians(spread_deg)
    n = 2048
    if sigma > 0:
        n = max(n, 1 << int(math.ceil(math.log2(8 * math.pi / sigma))))
    pat = ideal_pattern(ArraySpec(elements), n)
    if sigma > 0:
        pat = spread_pattern(pat, PasSpec(sigma))
    pat = pat.normalized()
    return pat.angles, pat.gains


def azimuth_gain_db(scenario: Scenario, off_boresight):
    """Antenna gain (dB, relative to peak) at an off-boresight angle in radians."""
    delta = np.abs((np.asarray(off_boresight, dtype=float) + np.pi) % (2 * np.pi) - np.pi)
    ant = scenario.antenna
    if ant.model == "erp":
        erp = ant.erp
        return np.where(delta <= erp.bw_effect / 2, 0.0, -erp.sll_effect)
    angles, gains = _sampled_sector_pattern(ant.elements, ant.spread_deg)
    # linear-array symmetry: the back half mirrors the front about the array axis
    phi = np.pi / 2 + np.where(delta <= np.pi / 2, delta, np.pi - delta)
    g = np.interp(phi, angles, gains, period=2 * np.pi)
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(g), NO_LINK_DBM)


def sector_received_dbm(scenario: Scenario, site_index: int, sector_index: int, x, y):
    """Wideband received power (dBm) from one sector at planar points."""
    site = scenario.sites[site_index]
    sec = site.sectors[sector_index]
    dx = np.asarray(x, dtype=float) - site.x
    dy = np.asarray(y, dtype=float) - site.y
    d_km = np.maximum(np.hypot(dx, dy), MIN_DISTANCE_M) / 1000.0
    bearing = np.arctan2(dx, dy)  # clockwise from +y
    off = bearing - math.radians(sec.azimuth)
    rx = scenario.receiver
    pl = pathloss_db(scenario.propagation, scenario.frequency_mhz, d_km, site.height, rx.height)
    return (sec.tx_power + sec.antenna_gain + mimo_tx_gain_db(sec.mimo)
            + azimuth_gain_db(scenario, off) + rx.gain - pl)


def rsrp_at_point(scenario: Scenario, point, sector) -> float:
    """RSRP (dBm) at ``point`` from ``sector = (site_index, sector_index)``."""
    p = sector_received_dbm(scenario, sector[0], sector[1], point[0], point[1])
    return float(p - rsrp_offset_db(scenario.bandwidth_mhz))


def evaluate_points(scenario: Scenario, x, y) -> PointMetrics:
    """Best server, RSRP and co-segment interference at arbitrary points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sectors = scenario.sectors
    best_p = np.full(x.shape, -np.inf)
    best_i = np.zeros(x.shape, dtype=np.int64)
    seg_total = np.zeros((3,) + x.shape)
    for k, (i, j, _site, sec) in enumerate(sectors):
        p = sector_received_dbm(scenario, i, j, x, y)
        seg_total[sec.pusc_segment] += 10.0 ** (p / 10.0)
        # strict '>' keeps the lowest (site, sector) index on ties
        better = p > best_p
        best_p = np.where(better, p, best_p)
        best_i = np.where(better, k, best_i)
    seg_of = np.array([sec.pusc_segment for *_x, sec in sectors])
    own = 10.0 ** (best_p / 10.0)
    same = np.take_along_axis(seg_total, seg_of[best_i][None, ...], axis=0)[0]
    interference = np.maximum(same - own, 0.0)
    noise = 10.0 ** (thermal_noise_dbm(scenario.bandwidth_mhz, scenario.receiver.noise_figure) / 10.0)
    rsrp = best_p - rsrp_offset_db(scenario.bandwidth_mhz)
    return PointMetrics(rsrp, best_i, best_p, interference, noise)


def evaluate_grid(scenario: Scenario, threads: int | None = None, fn=None):
    """Evaluate ``fn(PointMetrics)`` (default: identity) over the raster, row-chunked."""
    g = scenario.grid
    xs, ys = g.axes()

    def work(a, b):
        X, Y = np.meshgrid(xs, ys[a:b])
        m = evaluate_points(scenario, X, Y)
        return fn(m) if fn is not None else m

    return run_chunked(work, g.height, threads)


def coverage_grid(scenario: Scenario, threads: int | None = None):
    """Best-server RSRP raster and the flat best-server index map."""
    parts = evaluate_grid(scenario, threads, lambda m: (m.rsrp, m.best))
    rsrp = np.vstack([p[0] for p in parts])
    best = np.vstack([p[1] for p in parts])
    return RasterGrid(scenario.grid, rsrp, "rsrp"), best


def site_rsrp_grid(scenario: Scenario, site_index: int, threads: int | None = None) -> RasterGrid:
    """RSRP raster of the strongest sector of one site (other sites ignored)."""
    g = scenario.grid
    xs, ys = g.axes()
    site = scenario.sites[site_index]
    off = rsrp_offset_db(scenario.bandwidth_mhz)

    def work(a, b):
        X, Y = np.meshgrid(xs, ys[a:b])
        per = [sector_received_dbm(scenario, site_index, j, X, Y) for j in range(len(site.sectors))]
        return np.max(per, axis=0) - off

    return RasterGrid(g, np.vstack(run_chunked(work, g.height, threads)), "rsrp")


def classify(rsrp: float) -> str:
    """Coverage class with half-open bins: [-90, inf) excellent, [-105, -90) good,
    [-110, -105) fair, [-120, -110) poor, below -120 outage."""
    if rsrp >= -90.0:
        return "excellent"
    if rsrp >= -105.0:
        return "good"
    if rsrp >= -110.0:
        return "fair"
    if rsrp >= -120.0:
        return "poor"
    return "outage"


def histogram(values, bin_edges=RSRP_BIN_EDGES, no_link=NO_LINK_DBM) -> dict:
    """Percent of pixels per bin. Bins are [lo, hi) except the last, which is closed.

    Pixels at the no-link sentinel, below the first edge or above the last edge
    go to separate buckets so the percentages always total 100.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty grid")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    dead = v <= no_link
    live = v[~dead]
    counts, _ = np.histogram(live, bins=edges)
    below = int(np.sum(live < edges[0]))
    above = int(np.sum(live > edges[-1]))
    n = v.size
    pct = lambda c: 100.0 * c / n  # noqa: E731
    return {
        "bins": [{"range": [float(lo), float(hi)], "count": int(c), "percent": pct(c)}
                 for lo, hi, c in zip(edges[:-1], edges[1:], counts)],
        "below": {"count": below, "percent": pct(below)},
        "above": {"count": above, "percent": pct(above)},
        "no_link": {"count": int(dead.sum()), "percent": pct(int(dead.sum()))},
        "total_pixels": int(n),
    }


def coverage_fraction(raster: RasterGrid, threshold: float = -110.0) -> float:
    return float(np.mean(raster.values >= threshold))


def radial_profile(raster: RasterGrid, cx: float, cy: float, azimuth_deg: float, step: float | None = None):
    """(distances m, values) along a ray from (cx, cy), stopping at the grid edge."""
    step = raster.grid.resolution if step is None else step
    az = math.radians(azimuth_deg)
    ux, uy = math.sin(az), math.cos(az)
    g = raster.grid
    extent = math.hypot(g.width * g.resolution, g.height * g.resolution)
    r = step * np.arange(1, int(extent / step) + 2)
    vals = raster.sample(cx + r * ux, cy + r * uy)
    ok = np.isfinite(vals)
    # keep the contiguous in-grid run from the centre
    stop = int(np.argmin(ok)) if not ok.all() else ok.size
    return r[:stop], vals[:stop]


def _last_above(r, v, threshold):
    hit = np.nonzero(v >= threshold - 1e-9)[0]
    if hit.size == 0:
        return 0.0, False
    k = int(hit[-1])
    return float(r[k]) / 1000.0, k == r.size - 1


def cell_range(scenario: Scenario, site_index: int = 0, azimuth_deg: float = 0.0,
               thresholds=None, raster: RasterGrid | None = None, threads: int | None = None) -> CellRange:
    """Usable and detectable radii along one azimuth of a site.

    A ``*_limited`` flag is set when the profile still meets the threshold at
    the grid edge, so the true range is larger than reported.
    """
    usable_t, detect_t = thresholds or (scenario.receiver.sensitivity, scenario.receiver.detect_threshold)
    raster = raster if raster is not None else site_rsrp_grid(scenario, site_index, threads)
    site = scenario.sites[site_index]
    r, v = radial_profile(raster, site.x, site.y, azimuth_deg)
    usable, ul = _last_above(r, v, usable_t)
    detect, dl = _last_above(r, v, detect_t)
    return CellRange(usable, detect, azimuth_deg, ul, dl)


# ---------------------------------------------------------------------------
# writers

def write_grid_csv(raster: RasterGrid, path, fmt: str = "%.4f"):
    xs, ys = raster.grid.axes()
    X, Y = np.meshgrid(xs, ys)
    data = np.column_stack([X.ravel(), Y.ravel(), raster.values.ravel()])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,value\n")
        np.savetxt(fh, data, fmt=("%.3f", "%.3f", fmt), delimiter=",")


def pgm_levels(values, low: float = PGM_LOW_DBM, high: float = PGM_HIGH_DBM, no_link=NO_LINK_DBM):
    """Grey level = floor((clip(v, low, high) - low) / (high - low) * 255 + 0.5); no-link -> 0."""
    v = np.asarray(values, dtype=float)
    lvl = np.floor((np.clip(v, low, high) - low) / (high - low) * 255.0 + 0.5).astype(int)
    return np.where(v <= no_link, 0, lvl)


def write_pgm(raster: RasterGrid, path, low: float = PGM_LOW_DBM, high: float = PGM_HIGH_DBM):
    """Plain (P2) PGM, north-up: the first image row is the largest y."""
    lv = pgm_levels(raster.values, low, high)[::-1]
    h, w = lv.shape
    lines = ["P2", f"{w} {h}", "255"]
    for row in lv:
        cur = ""
        for val in row:
            tok = str(int(val))
            if cur and len(cur) + 1 + len(tok) > 70:
                lines.append(cur)
                cur = tok
            else:
                cur = f"{cur} {tok}" if cur else tok
        lines.append(cur)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = open(path, encoding="ascii").read().split()
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)
