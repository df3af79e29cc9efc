"""Scenario definition, config loading, hexagonal layout and user placement.

Config documents are TOML (dotted keys such as ``site.height = 35`` work) or
JSON. Every key is optional; absent keys take the deployment defaults
(43 dBm, 18.5 dBi, 35 m masts, 10 MHz at 2625 MHz, -110 dBm sensitivity).
The schema is documented in ``docs/scenario.md``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .antenna_pattern import ErpFit
from .link_budget import rsrp_offset_db
from .propagation import ENVIRONMENTS, KINDS, PathlossModel, PropagationError, pathloss_db

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

FRAME_USABLE_SYMBOLS = 47
STRICT_DL_SYMBOLS = (5, 11, 17, 23, 29, 35, 41, 47)


class ConfigError(ValueError):
    """Config validation failure; ``path`` is the dotted key that failed."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class MimoConfig:
    tx: int = 2
    rx: int = 2
    adaptive: bool = True

    def __post_init__(self):
        for name in ("tx", "rx"):
            if getattr(self, name) not in (2, 4, 8):
                raise ConfigError(f"mimo.{name}", f"expected one of 2, 4, 8, got {getattr(self, name)}")

    @property
    def label(self) -> str:
        return f"{self.tx}x{self.rx}"

    @classmethod
    def parse(cls, text: str, adaptive: bool = True) -> "MimoConfig":
        try:
            tx, rx = (int(v) for v in text.lower().split("x"))
        except ValueError:
            raise ConfigError("mimo", f"expected a form like '4x4', got {text!r}") from None
        return cls(tx, rx, adaptive)


@dataclass(frozen=True)
class TddSplit:
    dl_symbols: int = 35
    ul_symbols: int = 12

    def __post_init__(self):
        if self.dl_symbols < 1 or self.ul_symbols < 0:
            raise ConfigError("tdd", "symbol counts must be non-negative with at least one DL symbol")
        if self.dl_symbols + self.ul_symbols != FRAME_USABLE_SYMBOLS:
            raise ConfigError("tdd", f"dl + ul must equal {FRAME_USABLE_SYMBOLS}, got "
                                     f"{self.dl_symbols}:{self.ul_symbols}")
        if self.ul_symbols % 3:
            raise ConfigError("tdd", f"ul symbols must be a multiple of 3, got {self.ul_symbols}")

    @property
    def strict_ok(self) -> bool:
        return self.dl_symbols % 2 == 1

    @property
    def label(self) -> str:
        return f"{self.dl_symbols}:{self.ul_symbols}"

    @classmethod
    def parse(cls, text: str) -> "TddSplit":
        try:
            dl, ul = (int(v) for v in str(text).split(":"))
        except ValueError:
            raise ConfigError("tdd", f"expected 'DL:UL', got {text!r}") from None
        return cls(dl, ul)


@dataclass(frozen=True)
class Sector:
    azimuth: float
    pusc_segment: int
    tx_power: float = 43.0
    antenna_gain: float = 18.5
    mimo: MimoConfig = field(default_factory=MimoConfig)


@dataclass(frozen=True)
class Site:
    x: float
    y: float
    height: float = 35.0
    sectors: tuple = ()

    def __post_init__(self):
        if not self.height > 0:
            raise ConfigError("site.height", "must be > 0")
        if len(self.sectors) != 3:
            raise ConfigError("sectors", f"expected 3, got {len(self.sectors)}")
        segs = sorted(s.pusc_segment for s in self.sectors)
        if segs != [0, 1, 2]:
            raise ConfigError("sectors", f"PUSC segments must be 0, 1, 2 once each, got {segs}")


@dataclass(frozen=True)
class GridSpec:
    """Raster geometry; ``origin`` is the centre of pixel (row 0, col 0)."""

    width: int = 500
    height: int = 500
    resolution: float = 20.0
    origin_x: float = -5000.0
    origin_y: float = -5000.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("grid", "width and height must be >= 1")
        if not self.resolution > 0:
            raise ConfigError("grid.resolution", "must be > 0")

    @classmethod
    def centered(cls, width: int, height: int, resolution: float, cx: float = 0.0, cy: float = 0.0):
        return cls(width, height, resolution, cx - (width // 2) * resolution, cy - (height // 2) * resolution)

    def axes(self):
        xs = self.origin_x + self.resolution * np.arange(self.width)
        ys = self.origin_y + self.resolution * np.arange(self.height)
        return xs, ys


@dataclass(frozen=True)
class Receiver:
    sensitivity: float = -110.0
    detect_threshold: float = -133.0
    height: float = 0.5
    gain: float = 0.0
    noise_figure: float = 7.0


@dataclass(frozen=True)
class Reuse:
    n_c: int = 1
    n_s: int = 3
    n_f: int = 3


@dataclass(frozen=True)
class AntennaConfig:
    model: str = "erp"
    bw_deg: float = 120.0
    sll_db: float = 20.0
    elements: int = 320
    spread_deg: float = 0.0

    def __post_init__(self):
        if self.model not in ("erp", "sampled"):
            raise ConfigError("antenna.model", f"expected 'erp' or 'sampled', got {self.model!r}")
        if not 0 < self.bw_deg <= 360:
            raise ConfigError("antenna.bw_deg", "must be in (0, 360]")
        if not self.sll_db > 0:
            raise ConfigError("antenna.sll_db", "must be a positive suppression in dB")

    @property
    def erp(self) -> ErpFit:
        return ErpFit(math.radians(self.bw_deg), self.sll_db, pointing=0.0)


@dataclass(frozen=True)
class CapacityParams:
    data_fraction: float = 0.75
    peak_dl_mbps: float = 75.0
    mimo_switch_db: float = 10.0
    calibration_dl_mbps: float = 28.51
    calibration_split: str = "26:21"

    def __post_init__(self):
        if not 0 < self.data_fraction <= 1:
            raise ConfigError("capacity.data_fraction", "must be in (0, 1]")
        if not self.calibration_dl_mbps > 0:
            raise ConfigError("capacity.calibration_dl_mbps", "must be > 0")
        TddSplit.parse(self.calibration_split)


@dataclass(frozen=True)
class Scenario:
    sites: tuple
    frequency_mhz: float = 2625.0
    bandwidth_mhz: float = 10.0
    grid: GridSpec = field(default_factory=GridSpec)
    propagation: PathlossModel = field(default_factory=PathlossModel)
    receiver: Receiver = field(default_factory=Receiver)
    reuse: Reuse = field(default_factory=Reuse)
    tdd: TddSplit = field(default_factory=TddSplit)
    capacity: CapacityParams = field(default_factory=CapacityParams)
    antenna: AntennaConfig = field(default_factory=AntennaConfig)
    inter_site_distance: float = 2000.0
    calibration_range_km: float = 2.0
    seed: int = 1

    def __post_init__(self):
        if not 1.25 <= self.bandwidth_mhz <= 20:
            raise ConfigError("bandwidth_mhz", f"must be within 1.25-20 MHz, got {self.bandwidth_mhz}")
        if not self.frequency_mhz > 0:
            raise ConfigError("frequency_mhz", "must be > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if not self.sites:
            raise ConfigError("sites", "at least one site is required")

    @property
    def sectors(self):
        """Flat (site_index, sector_index, site, sector) list in deterministic order."""
        return [(i, j, site, sec) for i, site in enumerate(self.sites) for j, sec in enumerate(site.sectors)]

    def with_mimo(self, mimo: MimoConfig) -> "Scenario":
        sites = tuple(replace(s, sectors=tuple(replace(sec, mimo=mimo) for sec in s.sectors)) for s in self.sites)
        return replace(self, sites=sites)

    def to_config(self) -> dict:
        d = {
            "seed": self.seed,
            "frequency_mhz": self.frequency_mhz,
            "bandwidth_mhz": self.bandwidth_mhz,
            "layout": {"inter_site_distance": self.inter_site_distance},
            "grid": asdict(self.grid),
            "propagation": {"kind": self.propagation.kind, "environment": self.propagation.environment,
                            "offset_db": self.propagation.offset_db,
                            "calibration_range_km": self.calibration_range_km},
            "receiver": asdict(self.receiver),
            "reuse": asdict(self.reuse),
            "tdd": {"dl": self.tdd.dl_symbols, "ul": self.tdd.ul_symbols},
            "capacity": asdict(self.capacity),
            "antenna": asdict(self.antenna),
            "sites": [
                {"x": s.x, "y": s.y, "height": s.height,
                 "sectors": [{"azimuth": c.azimuth, "segment": c.pusc_segment, "tx_power": c.tx_power,
                              "antenna_gain": c.antenna_gain, "mimo": c.mimo.label,
                              "adaptive": c.mimo.adaptive} for c in s.sectors]}
                for s in self.sites
            ],
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_config(), sort_keys=True, indent=2)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_config(), sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------------------
# layout and users

_HEX_DIRS = [(math.cos(math.radians(60 * k)), math.sin(math.radians(60 * k))) for k in range(6)]


def hex_layout(n_sites: int, inter_site_distance: float = 2000.0, center=(0.0, 0.0)):
    """Centre site, then hexagonal rings of 6, 12, ... sites, truncated to ``n_sites``."""
    if n_sites < 1:
        raise ConfigError("layout.n_sites", "must be >= 1")
    d = inter_site_distance
    # axial coordinates, walked ring by ring
    axial = [(0, 0)]
    k = 1
    while len(axial) < n_sites:
        q, r = -k, k  # k steps along axial direction (-1, 1)
        steps = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
        for dq, dr in steps:
            for _ in range(k):
                axial.append((q, r))
                q, r = q + dq, r + dr
        k += 1
    out = []
    for q, r in axial[:n_sites]:
        # axial basis vectors at 0 and 60 degrees
        x = d * (q + 0.5 * r)
        y = d * (math.sqrt(3) / 2 * r)
        out.append((round(center[0] + x, 9), round(center[1] + y, 9)))
    return out


_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int, count: int) -> np.ndarray:
    """``count`` outputs of splitmix64 starting from ``state`` (uint64 array).

    Output i is mix(state + (i + 1) * golden); vectorized but identical to the
    sequential generator.
    """
    with np.errstate(over="ignore"):
        z = np.uint64(state & _MASK) + np.uint64(_GOLDEN) * np.arange(1, count + 1, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def uniform01(state: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of splitmix64 outputs."""
    return (splitmix64(state, count) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def site_stream_seed(seed: int, site_index: int) -> int:
    return (seed ^ ((site_index + 1) * _GOLDEN)) & _MASK


def in_hex(x, y, cx: float, cy: float, inradius: float):
    """Point-in-cell test for a hexagon whose edge normals point at 0/60/120 degrees."""
    dx = np.asarray(x, dtype=float) - cx
    dy = np.asarray(y, dtype=float) - cy
    ok = np.ones(np.broadcast(dx, dy).shape, dtype=bool)
    for c, s in _HEX_DIRS[:3]:
        ok &= np.abs(dx * c + dy * s) <= inradius
    return ok


def hex_users(seed: int, site_index: int, cx: float, cy: float, inradius: float, count: int):
    """``count`` points uniform in one hexagonal cell, by rejection from its bounding box."""
    circ = inradius * 2 / math.sqrt(3)
    state = site_stream_seed(seed, site_index)
    xs, ys = [], []
    have = 0
    drawn = 0
    while have < count:
        batch = max(64, int((count - have) * 1.4))
        u = uniform01((state + drawn * 2 * _GOLDEN) & _MASK, 2 * batch)
        drawn += batch
        # x spans the flat-to-flat width, y the vertex-to-vertex height
        px = cx + (2 * u[0::2] - 1) * inradius
        py = cy + (2 * u[1::2] - 1) * circ
        keep = in_hex(px, py, cx, cy, inradius)
        xs.append(px[keep])
        ys.append(py[keep])
        have += int(keep.sum())
    return np.concatenate(xs)[:count], np.concatenate(ys)[:count]


def place_users(scenario: Scenario, per_site: int):
    """Deterministic uniform users inside each site's hexagonal cell.

    Returns ``(x, y, site_index)`` arrays, site-major order.
    """
    if per_site < 1:
        raise ConfigError("users", "per_site must be >= 1")
    xs, ys, idx = [], [], []
    for i, site in enumerate(scenario.sites):
        x, y = hex_users(scenario.seed, i, site.x, site.y, scenario.inter_site_distance / 2, per_site)
        xs.append(x)
        ys.append(y)
        idx.append(np.full(per_site, i))
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(idx)


def mimo_tx_gain_db(mimo: MimoConfig) -> float:
    """Transmit-array gain over the 2x2 baseline: 10*log10(tx/2)."""
    return 10.0 * math.log10(mimo.tx / 2)


# ---------------------------------------------------------------------------
# config loading

_SCHEMA = {
    "seed": int, "frequency_mhz": float, "bandwidth_mhz": float,
    "layout": {"n_sites": int, "inter_site_distance": float},
    "site": {"height": float, "tx_power": float, "antenna_gain": float, "azimuths": list},
    "mimo": {"tx": int, "rx": int, "adaptive": bool},
    "antenna": {"model": str, "bw_deg": float, "sll_db": float, "elements": int, "spread_deg": float},
    "grid": {"width": int, "height": int, "resolution": float, "origin_x": float, "origin_y": float},
    "propagation": {"kind": str, "environment": str, "offset_db": object, "calibration_range_km": float},
    "receiver": {"sensitivity": float, "detect_threshold": float, "height": float, "gain": float,
                 "noise_figure": float},
    "reuse": {"n_c": int, "n_s": int, "n_f": int},
    "tdd": {"dl": int, "ul": int},
    "capacity": {"data_fraction": float, "peak_dl_mbps": float, "mimo_switch_db": float,
                 "calibration_dl_mbps": float, "calibration_split": str},
    "sites": list,
}
_SITE_KEYS = {"x": float, "y": float, "height": float, "sectors": list}
_SECTOR_KEYS = {"azimuth": float, "segment": int, "tx_power": float, "antenna_gain": float,
                "mimo": str, "adaptive": bool}

_DEFAULTS = {
    "seed": 1, "frequency_mhz": 2625.0, "bandwidth_mhz": 10.0,
    "layout.n_sites": 1, "layout.inter_site_distance": 2000.0,
    "site.height": 35.0, "site.tx_power": 43.0, "site.antenna_gain": 18.5, "site.azimuths": [0.0, 120.0, 240.0],
    "mimo.tx": 2, "mimo.rx": 2, "mimo.adaptive": True,
    "antenna.model": "erp", "antenna.bw_deg": 120.0, "antenna.sll_db": 20.0, "antenna.elements": 320,
    "antenna.spread_deg": 0.0,
    "grid.width": 500, "grid.height": 500, "grid.resolution": 20.0,
    "propagation.kind": "cost231_hata", "propagation.environment": "urban_metro",
    "propagation.offset_db": "auto", "propagation.calibration_range_km": 2.0,
    "receiver.sensitivity": -110.0, "receiver.detect_threshold": -133.0, "receiver.height": 0.5,
    "receiver.gain": 0.0, "receiver.noise_figure": 7.0,
    "reuse.n_c": 1, "reuse.n_s": 3, "reuse.n_f": 3,
    "tdd.dl": 35, "tdd.ul": 12,
    "capacity.data_fraction": 0.75, "capacity.peak_dl_mbps": 75.0, "capacity.mimo_switch_db": 10.0,
    "capacity.calibration_dl_mbps": 28.51, "capacity.calibration_split": "26:21",
}


def _coerce(path: str, value, kind):
    if kind is object:
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {value!r}")
        return value
    raise AssertionError(kind)


def _flatten(doc: dict) -> dict:
    flat = {}
    for key, value in doc.items():
        spec = _SCHEMA.get(key)
        if spec is None:
            raise ConfigError(key, "unknown key")
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise ConfigError(key, "expected a section")
            for sub, v in value.items():
                path = f"{key}.{sub}"
                if sub not in spec:
                    raise ConfigError(path, "unknown key")
                flat[path] = _coerce(path, v, spec[sub])
        else:
            flat[key] = _coerce(key, value, spec)
    return flat


def parse_config_text(text: str) -> dict:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"malformed JSON: {exc}") from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("", f"malformed config: {exc}") from None


@dataclass
class LoadReport:
    applied_defaults: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _build_sites(flat: dict, get) -> tuple:
    mimo = MimoConfig(get("mimo.tx"), get("mimo.rx"), get("mimo.adaptive"))
    if "sites" in flat:
        sites = []
        for i, raw in enumerate(flat["sites"]):
            base = f"sites[{i}]"
            if not isinstance(raw, dict):
                raise ConfigError(base, "expected a table")
            for k in raw:
                if k not in _SITE_KEYS:
                    raise ConfigError(f"{base}.{k}", "unknown key")
            for k in ("x", "y"):
                if k not in raw:
                    raise ConfigError(f"{base}.{k}", "required")
            sec_raw = _coerce(f"{base}.sectors", raw.get("sectors", []), list)
            if len(sec_raw) != 3:
                raise ConfigError(f"{base}.sectors", f"expected 3, got {len(sec_raw)}")
            sectors = []
            for j, sr in enumerate(sec_raw):
                sp = f"{base}.sectors[{j}]"
                if not isinstance(sr, dict):
                    raise ConfigError(sp, "expected a table")
                for k in sr:
                    if k not in _SECTOR_KEYS:
                        raise ConfigError(f"{sp}.{k}", "unknown key")
                vals = {k: _coerce(f"{sp}.{k}", v, _SECTOR_KEYS[k]) for k, v in sr.items()}
                sm = MimoConfig.parse(vals["mimo"], vals.get("adaptive", mimo.adaptive)) if "mimo" in vals else mimo
                sectors.append(Sector(
                    azimuth=vals.get("azimuth", get("site.azimuths")[j] if j < 3 else 0.0),
                    pusc_segment=vals.get("segment", j),
                    tx_power=vals.get("tx_power", get("site.tx_power")),
                    antenna_gain=vals.get("antenna_gain", get("site.antenna_gain")),
                    mimo=sm,
                ))
            try:
                sites.append(Site(_coerce(f"{base}.x", raw["x"], float), _coerce(f"{base}.y", raw["y"], float),
                                  _coerce(f"{base}.height", raw.get("height", get("site.height")), float),
                                  tuple(sectors)))
            except ConfigError as exc:
                raise ConfigError(f"{base}.{exc.path}", str(exc).split(": ", 1)[-1]) from None
        return tuple(sites)
    az = get("site.azimuths")
    if len(az) != 3:
        raise ConfigError("site.azimuths", f"sectors: expected 3, got {len(az)}")
    az = [_coerce(f"site.azimuths[{k}]", a, float) for k, a in enumerate(az)]
    sites = []
    for x, y in hex_layout(get("layout.n_sites"), get("layout.inter_site_distance")):
        sectors = tuple(Sector(az[j], j, get("site.tx_power"), get("site.antenna_gain"), mimo) for j in range(3))
        sites.append(Site(x, y, get("site.height"), sectors))
    return tuple(sites)


def calibrate_offset(scenario: Scenario, target_km: float | None = None) -> float:
    """Pathloss offset (dB) that puts the 2x2 boresight usable edge at ``target_km``.

    Uses the first sector's transmit parameters at unit ERP gain. Higher MIMO
    orders are not part of the fit; their ranges follow from the model.
    """
    target_km = scenario.calibration_range_km if target_km is None else target_km
    site = scenario.sites[0]
    sec = site.sectors[0]
    rx = scenario.receiver
    allowed_pl = (sec.tx_power + sec.antenna_gain + rx.gain
                  - rsrp_offset_db(scenario.bandwidth_mhz) - rx.sensitivity)
    base = pathloss_db(scenario.propagation.with_offset(0.0), scenario.frequency_mhz, target_km,
                       site.height, rx.height)
    return allowed_pl - base


def load_scenario(config_text: str = "", report: LoadReport | None = None) -> Scenario:
    """Parse and validate a config document into a :class:`Scenario`.

    Raises :class:`ConfigError` carrying the failing key path. Applied defaults
    are appended to ``report.applied_defaults``.
    """
    doc = parse_config_text(config_text) if config_text.strip() else {}
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a table/object")
    flat = _flatten(doc)
    report = report if report is not None else LoadReport()

    def get(key):
        if key in flat:
            return flat[key]
        value = _DEFAULTS[key]
        report.applied_defaults.append(f"{key} = {value!r}")
        flat[key] = value
        return value

    sites = _build_sites(flat, get)
    if "grid.origin_x" in flat or "grid.origin_y" in flat:
        grid = GridSpec(get("grid.width"), get("grid.height"), get("grid.resolution"),
                        flat.get("grid.origin_x", 0.0), flat.get("grid.origin_y", 0.0))
    else:
        grid = GridSpec.centered(get("grid.width"), get("grid.height"), get("grid.resolution"))
        report.applied_defaults.append(f"grid.origin = centred ({grid.origin_x!r}, {grid.origin_y!r})")

    kind = get("propagation.kind")
    env = get("propagation.environment")
    try:
        model = PathlossModel(kind, env, 0.0)
    except PropagationError as exc:
        path = "propagation.kind" if kind not in KINDS else "propagation.environment"
        raise ConfigError(path, str(exc)) from None
    tdd = TddSplit(get("tdd.dl"), get("tdd.ul"))
    scen = Scenario(
        sites=sites,
        frequency_mhz=get("frequency_mhz"),
        bandwidth_mhz=get("bandwidth_mhz"),
        grid=grid,
        propagation=model,
        receiver=Receiver(get("receiver.sensitivity"), get("receiver.detect_threshold"), get("receiver.height"),
                          get("receiver.gain"), get("receiver.noise_figure")),
        reuse=Reuse(get("reuse.n_c"), get("reuse.n_s"), get("reuse.n_f")),
        tdd=tdd,
        capacity=CapacityParams(get("capacity.data_fraction"), get("capacity.peak_dl_mbps"),
                                get("capacity.mimo_switch_db"), get("capacity.calibration_dl_mbps"),
                                get("capacity.calibration_split")),
        antenna=AntennaConfig(get("antenna.model"), get("antenna.bw_deg"), get("antenna.sll_db"),
                              get("antenna.elements"), get("antenna.spread_deg")),
        inter_site_distance=get("layout.inter_site_distance"),
        calibration_range_km=get("propagation.calibration_range_km"),
        seed=get("seed"),
    )
    offset = get("propagation.offset_db")
    if offset == "auto":
        value = calibrate_offset(scen)
        report.notes.append(f"propagation.offset_db = auto -> {value:.6f} dB "
                            f"(2x2 usable edge at {scen.calibration_range_km} km)")
    else:
        value = _coerce("propagation.offset_db", offset, float)
    return replace(scen, propagation=model.with_offset(value))


def load_scenario_file(path, report: LoadReport | None = None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read(), report)


def default_scenario(**overrides) -> Scenario:
    """Deployment defaults; ``overrides`` are dotted config keys."""
    doc: dict = {}
    for key, value in overrides.items():
        parts = key.split("__") if "__" in key else key.split(".")
        cur = doc
        for p in parts[:-1]:
            cur = cur.setdefault(p, {})
        cur[parts[-1]] = value
    return load_scenario(json.dumps(doc))
