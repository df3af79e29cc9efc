"""Drive-test log ingestion and simulated-vs-field error statistics."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

COLUMNS = ("route", "distance_km", "rsrp_dbm", "dl_mbps", "ul_mbps", "timestamp")
OPTIONAL_COLUMNS = ("x_m", "y_m", "site")
MEASUREMENTS = ("rsrp_dbm", "dl_mbps", "ul_mbps")


class DataError(ValueError):
    """Malformed or insufficient measurement data."""


@dataclass(frozen=True)
class DriveTestSample:
    route: str
    distance_km: float | None = None
    rsrp_dbm: float | None = None
    dl_mbps: float | None = None
    ul_mbps: float | None = None
    timestamp: str | None = None
    x_m: float | None = None
    y_m: float | None = None
    site: str | None = None

    def __post_init__(self):
        if all(getattr(self, k) is None for k in MEASUREMENTS):
            raise DataError("sample has no measurement field")
        if self.distance_km is not None and self.distance_km < 0:
            raise DataError("distance must be >= 0")

    def distance_from(self, site_xy=(0.0, 0.0)) -> float:
        if self.distance_km is not None:
            return self.distance_km
        if self.x_m is None or self.y_m is None:
            raise DataError("sample has neither distance_km nor x_m/y_m")
        return math.hypot(self.x_m - site_xy[0], self.y_m - site_xy[1]) / 1000.0


@dataclass
class ParseResult:
    samples: list
    errors: list = field(default_factory=list)   # (row number, column, message)
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def parse_drive_test(csv_text: str) -> ParseResult:
    """Parse a drive-test CSV.

    Rows that fail to parse are reported in ``errors`` with their 1-based line
    number (header is line 1) and column. Unknown columns are ignored with a
    warning.
    """
    if not csv_text.strip():
        raise DataError("empty drive-test file")
    reader = csv.DictReader(io.StringIO(csv_text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header
    if "route" not in header:
        raise DataError("missing mandatory column 'route'")
    if "distance_km" not in header and not {"x_m", "y_m"} <= set(header):
        raise DataError("missing mandatory column 'distance_km' (or 'x_m' and 'y_m')")
    if not any(m in header for m in MEASUREMENTS):
        raise DataError(f"no measurement column; expected at least one of {MEASUREMENTS}")
    result = ParseResult([])
    unknown = [h for h in header if h not in COLUMNS + OPTIONAL_COLUMNS]
    for h in unknown:
        msg = f"ignoring unknown column {h!r}"
        log.warning(msg)
        result.warnings.append(msg)
    numeric = ("distance_km", "rsrp_dbm", "dl_mbps", "ul_mbps", "x_m", "y_m")
    for lineno, row in enumerate(reader, start=2):
        vals = {}
        bad = False
        for col in numeric:
            raw = (row.get(col) or "").strip()
            if not raw:
                vals[col] = None
                continue
            try:
                v = float(raw)
            except ValueError:
                result.errors.append((lineno, col, f"not a number: {raw!r}"))
                bad = True
                continue
            if not math.isfinite(v):
                result.errors.append((lineno, col, f"not finite: {raw!r}"))
                bad = True
                continue
            vals[col] = v
        if bad:
            continue
        try:
            result.samples.append(DriveTestSample(
                route=(row.get("route") or "").strip(),
                timestamp=(row.get("timestamp") or "").strip() or None,
                site=(row.get("site") or "").strip() or None,
                **vals,
            ))
        except DataError as exc:
            result.errors.append((lineno, "", str(exc)))
    return result


@dataclass(frozen=True)
class BinnedSeries:
    bin_centers: np.ndarray
    means: np.ndarray
    counts: np.ndarray
    quantity: str = "rsrp_dbm"


def bin_by_distance(samples, bin_width_km: float, quantity: str = "rsrp_dbm",
                    site_xy=(0.0, 0.0), average: str = "db") -> BinnedSeries:
    """Mean per distance bin [k*w, (k+1)*w), reported at the bin centre.

    RSRP is averaged in dB by default; ``average="linear"`` averages milliwatts.
    Empty bins are omitted.
    """
    if not bin_width_km > 0:
        raise DataError("bin width must be > 0")
    if average not in ("db", "linear"):
        raise DataError("average must be 'db' or 'linear'")
    pairs = [(s.distance_from(site_xy), getattr(s, quantity)) for s in samples
             if getattr(s, quantity) is not None]
    if not pairs:
        raise DataError(f"no samples carry {quantity}")
    d = np.array([p[0] for p in pairs])
    v = np.array([p[1] for p in pairs])
    k = np.floor(d / bin_width_km + 1e-12).astype(int)
    keys = np.unique(k)
    means, counts = [], []
    for key in keys:
        sel = v[k == key]
        if average == "linear" and quantity == "rsrp_dbm":
            means.append(10.0 * math.log10(np.mean(10.0 ** (sel / 10.0))))
        else:
            means.append(float(np.mean(sel)))
        counts.append(sel.size)
    return BinnedSeries((keys + 0.5) * bin_width_km, np.array(means), np.array(counts), quantity)


@dataclass(frozen=True)
class ComparisonStats:
    mean_error_db: float
    std_dev_db: float
    rmse_db: float
    n: int

    def to_dict(self) -> dict:
        return {"mean_error_db": self.mean_error_db, "std_dev_db": self.std_dev_db,
                "rmse_db": self.rmse_db, "n": self.n}


def error_stats(errors) -> ComparisonStats:
    """Mean, sample standard deviation (n - 1) and RMSE of an error vector."""
    e = np.asarray(errors, dtype=float)
    if e.size == 0:
        raise DataError("no overlapping points to compare")
    n = e.size
    mean = float(np.mean(e))
    std = float(np.std(e, ddof=1)) if n > 1 else 0.0
    rmse = float(np.sqrt(np.mean(e ** 2)))
    return ComparisonStats(mean, std, rmse, n)


def compare(sim_distance_km, sim_values, field_series: BinnedSeries) -> ComparisonStats:
    """Field minus simulated at each field bin centre inside the simulated support."""
    sd = np.asarray(sim_distance_km, dtype=float)
    sv = np.asarray(sim_values, dtype=float)
    order = np.argsort(sd, kind="stable")
    sd, sv = sd[order], sv[order]
    c = field_series.bin_centers
    inside = (c >= sd[0]) & (c <= sd[-1]) if sd.size else np.zeros(c.shape, bool)
    if not inside.any():
        raise DataError("simulated profile and field data do not overlap in distance")
    sim_at = np.interp(c[inside], sd, sv)
    return error_stats(field_series.means[inside] - sim_at)


def aligned_series(sim_distance_km, sim_values, field_series: BinnedSeries):
    """Rows (distance_km, field, simulated, error, count) at overlapping bin centres."""
    sd = np.asarray(sim_distance_km, dtype=float)
    sv = np.asarray(sim_values, dtype=float)
    c = field_series.bin_centers
    inside = (c >= sd.min()) & (c <= sd.max())
    sim_at = np.interp(c[inside], sd, sv)
    f = field_series.means[inside]
    return list(zip(c[inside], f, sim_at, f - sim_at, field_series.counts[inside]))


@dataclass(frozen=True)
class SectorReport:
    groups: dict  # label -> {"peak_dl_mbps", "peak_ul_mbps", "avg_dl_mbps", "n"}
    peak_dl_mbps: float | None
    peak_ul_mbps: float | None
    best_group: str | None
    warnings: tuple = ()

    def to_dict(self) -> dict:
        return {"groups": self.groups, "peak_dl_mbps": self.peak_dl_mbps, "peak_ul_mbps": self.peak_ul_mbps,
                "best_group": self.best_group, "warnings": list(self.warnings)}


def sector_report(samples, key: str = "site") -> SectorReport:
    """Per-group peak DL/UL and mean DL, grouping by ``site`` (falling back to route)."""
    groups = defaultdict(list)
    for s in samples:
        label = getattr(s, key, None) or s.route
        groups[label].append(s)
    out = {}
    warns = []
    for label in sorted(groups):
        dl = [s.dl_mbps for s in groups[label] if s.dl_mbps is not None]
        ul = [s.ul_mbps for s in groups[label] if s.ul_mbps is not None]
        if not dl and not ul:
            msg = f"group {label!r} has no throughput data; omitted"
            log.warning(msg)
            warns.append(msg)
            continue
        out[label] = {
            "peak_dl_mbps": max(dl) if dl else None,
            "peak_ul_mbps": max(ul) if ul else None,
            "avg_dl_mbps": float(np.mean(dl)) if dl else None,
            "n": len(groups[label]),
        }
    dls = [g["peak_dl_mbps"] for g in out.values() if g["peak_dl_mbps"] is not None]
    uls = [g["peak_ul_mbps"] for g in out.values() if g["peak_ul_mbps"] is not None]
    avgs = {k: g["avg_dl_mbps"] for k, g in out.items() if g["avg_dl_mbps"] is not None}
    best = max(avgs, key=lambda k: (avgs[k], k)) if avgs else None
    return SectorReport(out, max(dls) if dls else None, max(uls) if uls else None, best, tuple(warns))
