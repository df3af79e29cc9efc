"""Pathloss models: free space and COST-231 Hata, with a calibration offset."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

KINDS = ("free_space", "cost231_hata")
ENVIRONMENTS = {"urban_metro": 3.0, "urban_medium": 0.0}

_FSPL_CONST = 32.45


class PropagationError(ValueError):
    pass


@dataclass(frozen=True)
class PathlossModel:
    kind: str = "cost231_hata"
    environment: str = "urban_metro"
    offset_db: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PropagationError(f"unknown pathloss kind {self.kind!r}; expected one of {KINDS}")
        if self.environment not in ENVIRONMENTS:
            raise PropagationError(
                f"unknown environment {self.environment!r}; expected one of {tuple(ENVIRONMENTS)}")

    def with_offset(self, offset_db: float) -> "PathlossModel":
        return PathlossModel(self.kind, self.environment, offset_db)


def _check_heights(h_b: float, h_m: float):
    if not 4.0 <= h_b <= 50.0:
        raise PropagationError(f"COST-231 Hata base height must be 4-50 m, got {h_b}")
    if h_m > 10.0:
        raise PropagationError(f"COST-231 Hata mobile height must be <= 10 m, got {h_m}")
    if h_m < 1.0:
        warnings.warn(f"mobile height {h_m} m is below the COST-231 Hata validity range (1-10 m); "
                      "evaluating the formula as written", stacklevel=3)


def _hata_terms(f_mhz: float, h_b: float, h_m: float, c_db: float):
    """Intercept at 1 km and slope per decade of distance."""
    lf = math.log10(f_mhz)
    a_hm = (1.1 * lf - 0.7) * h_m - (1.56 * lf - 0.8)
    intercept = 46.3 + 33.9 * lf - 13.82 * math.log10(h_b) - a_hm + c_db
    slope = 44.9 - 6.55 * math.log10(h_b)
    return intercept, slope


def model_terms(model: PathlossModel, f_mhz: float, h_b: float = 35.0, h_m: float = 1.5):
    """(intercept dB at 1 km including offset, slope dB/decade)."""
    if not f_mhz > 0:
        raise PropagationError(f"frequency must be > 0, got {f_mhz}")
    if model.kind == "free_space":
        return _FSPL_CONST + 20.0 * math.log10(f_mhz) + model.offset_db, 20.0
    _check_heights(h_b, h_m)
    intercept, slope = _hata_terms(f_mhz, h_b, h_m, ENVIRONMENTS[model.environment])
    return intercept + model.offset_db, slope


def pathloss_db(model: PathlossModel, f_mhz: float, d_km, h_b: float = 35.0, h_m: float = 1.5):
    """Pathloss in dB; ``d_km`` may be an array."""
    d = np.asarray(d_km, dtype=float)
    if np.any(~(d > 0)):
        raise PropagationError("distance must be > 0 km")
    intercept, slope = model_terms(model, f_mhz, h_b, h_m)
    pl = intercept + slope * np.log10(d)
    return float(pl) if pl.ndim == 0 else pl


def invert_range(model: PathlossModel, max_pl: float, f_mhz: float,
                 h_b: float = 35.0, h_m: float = 1.5) -> float:
    """Distance (km) at which the pathloss equals ``max_pl``."""
    intercept, slope = model_terms(model, f_mhz, h_b, h_m)
    floor = intercept + slope * math.log10(1e-3)
    if max_pl <= floor:
        raise PropagationError(
            f"infeasible budget: {max_pl:.2f} dB is below the {floor:.2f} dB pathloss at 1 m")
    return 10.0 ** ((max_pl - intercept) / slope)
