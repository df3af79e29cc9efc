"""SINR, fluid-model capacity, TDD frame accounting and throughput rasters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coverage import PointMetrics, RasterGrid, evaluate_grid, evaluate_points
from .link_budget import n_resource_blocks
from .scenario import FRAME_USABLE_SYMBOLS, STRICT_DL_SYMBOLS, Scenario, TddSplit

__all__ = [
    "FrameBudget", "FluidModelParams", "SectorThroughput", "TddSplit", "THROUGHPUT_BIN_EDGES",
    "valid_tdd_splits", "pusc_sinr", "pusc_capacity", "sinr_grid", "throughput_grid",
    "point_throughput", "sector_throughput", "calibration_constant", "throughput_histogram",
]

# throughput legend edges (Mbps)
THROUGHPUT_BIN_EDGES = (0.0, 1.0, 5.0, 10.0, 20.0, 30.0, 40.0)

RB_BANDWIDTH_MHZ = 0.18


@dataclass(frozen=True)
class FrameBudget:
    frame_ms: float = 5.0
    symbol_us: float = 102.8
    symbols_per_frame: float = 48.6
    guard_symbols: float = 1.6
    usable: int = FRAME_USABLE_SYMBOLS
    dl_slot_symbols: int = 2
    ul_slot_symbols: int = 3

    def __post_init__(self):
        if abs(self.symbols_per_frame - self.guard_symbols - self.usable) > 0.01:
            raise ValueError("usable symbols must equal symbols_per_frame - guard_symbols")


FRAME = FrameBudget()


def valid_tdd_splits(strict: bool = True):
    """DL:UL splits of the 47 usable symbols.

    UL must be a whole number of 3-symbol slots. Strict mode also requires an
    odd DL count; lenient mode drops the parity rule only for 26:21, the
    coverage-limited split used in the field deployment.
    """
    out = []
    for n in range(1, FRAME_USABLE_SYMBOLS + 1):
        ul = FRAME_USABLE_SYMBOLS - n
        if ul % FRAME.ul_slot_symbols:
            continue
        if n % 2 == 1 or (not strict and n == 26):
            out.append(TddSplit(n, ul))
    return out


def check_split(split: TddSplit, strict: bool = True) -> TddSplit:
    if split not in valid_tdd_splits(strict):
        valid = ", ".join(str(n) for n in STRICT_DL_SYMBOLS)
        extra = "" if strict else " (plus 26:21 in lenient mode)"
        raise ValueError(f"invalid TDD split {split.label}; valid DL symbol counts: {{{valid}}}{extra}")
    return split


@dataclass(frozen=True)
class FluidModelParams:
    k: float = 3.0
    eta: float = 3.0
    r: float = 0.5

    def __post_init__(self):
        if not self.k >= 1:
            raise ValueError("reuse factor K must be >= 1")
        if not self.eta > 2:
            raise ValueError("propagation exponent eta must be > 2")
        if not self.r > 0:
            raise ValueError("normalized radius r must be > 0")


def pusc_sinr(params: FluidModelParams) -> float:
    """Fluid-model SINR at normalized distance r.

    (K*sqrt(3)/pi) * (eta - 2) * (2*sqrt(K) - r)**-2 * (2*sqrt(K)/r - 1)**eta
    """
    k, eta, r = params.k, params.eta, params.r
    a = 2.0 * math.sqrt(k) - r
    b = 2.0 * math.sqrt(k) / r - 1.0
    if a <= 0 or b <= 0:
        raise ValueError(f"r={r} is outside the fluid-model domain r < 2*sqrt(K) = {2 * math.sqrt(k):.6g}")
    return (k * math.sqrt(3.0) / math.pi) * (eta - 2.0) * a ** -2 * b ** eta


def pusc_capacity(sinr):
    """Spectral efficiency log2(1 + SINR) in bit/s/Hz."""
    s = np.asarray(sinr, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be >= 0 (linear)")
    c = np.log2(1.0 + s)
    return float(c) if c.ndim == 0 else c


def sinr_grid(scenario: Scenario, threads: int | None = None) -> RasterGrid:
    parts = evaluate_grid(scenario, threads, lambda m: m.sinr_db)
    return RasterGrid(scenario.grid, np.vstack(parts), "sinr_db")


def occupied_bandwidth_mhz(bandwidth_mhz: float) -> float:
    return n_resource_blocks(bandwidth_mhz) * RB_BANDWIDTH_MHZ


def _throughput(scenario: Scenario, m: PointMetrics, split: TddSplit) -> np.ndarray:
    cap = scenario.capacity
    sectors = scenario.sectors
    mux_of = np.array([min(sec.mimo.tx, sec.mimo.rx) / 2.0 for *_x, sec in sectors])
    adaptive_of = np.array([sec.mimo.adaptive for *_x, sec in sectors])
    sinr_db = m.sinr_db
    mux = mux_of[m.best]
    # adaptive MIMO falls back to diversity (gain already in the link budget) below the switch point
    mux = np.where(adaptive_of[m.best] & (sinr_db < cap.mimo_switch_db), 1.0, mux)
    se = np.log2(1.0 + 10.0 ** (sinr_db / 10.0))
    duty = split.dl_symbols / FRAME_USABLE_SYMBOLS * cap.data_fraction
    rate = se * occupied_bandwidth_mhz(scenario.bandwidth_mhz) * duty * mux
    rate = np.minimum(rate, cap.peak_dl_mbps * mux_of[m.best])
    return np.where(m.rsrp < scenario.receiver.sensitivity, 0.0, rate)


def throughput_grid(scenario: Scenario, split: TddSplit | None = None, threads: int | None = None):
    """DL throughput raster (Mbps) and the best-server map it was computed with."""
    split = scenario.tdd if split is None else split
    parts = evaluate_grid(scenario, threads, lambda m: (_throughput(scenario, m, split), m.best))
    tput = np.vstack([p[0] for p in parts])
    best = np.vstack([p[1] for p in parts])
    return RasterGrid(scenario.grid, tput, "throughput_mbps"), best


def point_throughput(scenario: Scenario, x, y, split: TddSplit | None = None):
    """DL throughput (Mbps) and best-server index at arbitrary points, e.g. users."""
    split = scenario.tdd if split is None else split
    m = evaluate_points(scenario, x, y)
    return _throughput(scenario, m, split), m.best


def throughput_histogram(values, bin_edges=THROUGHPUT_BIN_EDGES) -> dict:
    """Percent per [lo, hi) Mbps bin; zero-throughput pixels reported as no service."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("empty grid")
    edges = np.asarray(bin_edges, dtype=float)
    dead = v <= 0.0
    live = v[~dead]
    counts, _ = np.histogram(live, bins=edges)
    above = int(np.sum(live > edges[-1]))
    n = v.size
    return {
        "bins": [{"range": [float(lo), float(hi)], "count": int(c), "percent": 100.0 * c / n}
                 for lo, hi, c in zip(edges[:-1], edges[1:], counts)],
        "above": {"count": above, "percent": 100.0 * above / n},
        "no_service": {"count": int(dead.sum()), "percent": 100.0 * dead.sum() / n},
        "mean_mbps": float(v.mean()),
        "total_pixels": int(n),
    }


def calibration_constant(scenario: Scenario) -> float:
    """Mbps per DL symbol that reproduces the anchor sector DL at the anchor split."""
    anchor = TddSplit.parse(scenario.capacity.calibration_split)
    return scenario.capacity.calibration_dl_mbps / anchor.dl_symbols


@dataclass(frozen=True)
class SectorThroughput:
    rows: tuple  # (site, sector, dl_mbps, ul_mbps, avg_dl_mbps)
    calibration_constant: float
    split: TddSplit

    @property
    def dl_mbps(self) -> float:
        return self.calibration_constant * self.split.dl_symbols

    @property
    def ul_mbps(self) -> float:
        ul_slot_rate = self.calibration_constant * FRAME.ul_slot_symbols / FRAME.dl_slot_symbols
        return self.split.ul_symbols / FRAME.ul_slot_symbols * ul_slot_rate

    def to_csv(self) -> str:
        lines = ["site,sector,dl_mbps,ul_mbps,avg_dl_mbps"]
        for site, sector, dl, ul, avg in self.rows:
            lines.append(f"{site},{sector},{dl:.6f},{ul:.6f},{avg:.6f}")
        return "\n".join(lines) + "\n"


def sector_throughput(scenario: Scenario, split: TddSplit, calibration: float | None = None,
                      throughput=None, best=None) -> SectorThroughput:
    """Per-sector frame accounting plus mean served throughput.

    DL = n * calibration; UL = (47 - n)/3 slots at 1.5 * calibration per slot
    (a UL slot spans three symbols against two for DL). ``avg_dl_mbps`` is the
    mean of ``throughput`` over points served by the sector, 0 when none.
    """
    c = calibration_constant(scenario) if calibration is None else calibration
    if not c > 0:
        raise ValueError("calibration constant must be > 0")
    proto = SectorThroughput((), c, split)
    rows = []
    for k, (i, j, _site, _sec) in enumerate(scenario.sectors):
        avg = 0.0
        if throughput is not None:
            served = np.asarray(best).ravel() == k
            if served.any():
                avg = float(np.asarray(throughput).ravel()[served].mean())
        rows.append((i, j, proto.dl_mbps, proto.ul_mbps, avg))
    return SectorThroughput(tuple(rows), c, split)
