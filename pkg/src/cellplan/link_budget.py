"""Friis link budget: power density, received power, EIRP and range inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# Received power reported when the link carries no power at all (cross-polarized,
# zero gain). A finite value keeps rasters and histograms well defined.
NO_LINK_DBM = -300.0


class LinkError(ValueError):
    pass


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    if p_w <= 0:
        return NO_LINK_DBM
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def wavelength(freq_mhz: float) -> float:
    return SPEED_OF_LIGHT / (freq_mhz * 1e6)


def plf(rho_t, rho_r) -> float:
    """Polarization loss factor |rho_t . conj(rho_r)|**2 for unit Jones vectors."""
    a = np.asarray(rho_t, dtype=complex)
    b = np.asarray(rho_r, dtype=complex)
    for name, v in (("rho_t", a), ("rho_r", b)):
        if v.shape != (2,) or abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise LinkError(f"{name} must be a unit-norm 2-vector")
    return float(abs(np.vdot(b, a)) ** 2)


def linear_polarization(angle_rad: float) -> np.ndarray:
    return np.array([math.cos(angle_rad), math.sin(angle_rad)], dtype=complex)


@dataclass(frozen=True)
class TerminalParams:
    """One end of the link.

    ``directivity`` is linear; ``polarization`` is either a unit Jones vector or
    ``None``, in which case the link-level PLF scalar applies.
    """

    directivity: float = 1.0
    efficiency: float = 1.0
    reflection: float = 0.0
    polarization: tuple | None = None

    def __post_init__(self):
        if not self.directivity >= 0:
            raise LinkError("directivity must be >= 0")
        if not 0 < self.efficiency <= 1:
            raise LinkError(f"radiation efficiency must be in (0, 1], got {self.efficiency}")
        if not 0 <= abs(self.reflection) < 1:
            raise LinkError(f"|reflection coefficient| must be in [0, 1), got {self.reflection}")
        if self.polarization is not None:
            v = np.asarray(self.polarization, dtype=complex)
            if v.shape != (2,) or abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise LinkError("polarization must be a unit-norm 2-vector")

    @classmethod
    def from_gain_dbi(cls, gain_dbi: float, **kw) -> "TerminalParams":
        # gain = efficiency * directivity, so back out D for the given e
        e = kw.get("efficiency", 1.0)
        return cls(directivity=10.0 ** (gain_dbi / 10.0) / e, **kw)

    @property
    def gain(self) -> float:
        return self.efficiency * self.directivity

    @property
    def mismatch(self) -> float:
        return 1.0 - abs(self.reflection) ** 2


@dataclass(frozen=True)
class LinkParams:
    tx: TerminalParams = field(default_factory=TerminalParams)
    rx: TerminalParams = field(default_factory=TerminalParams)
    p_t_w: float = 1.0
    wavelength_m: float = 1.0
    range_m: float = 1.0
    line_efficiency: float = 1.0
    plf_scalar: float | None = None

    def __post_init__(self):
        if not self.range_m > 0:
            raise LinkError(f"range must be > 0, got {self.range_m}")
        if not self.wavelength_m > 0:
            raise LinkError("wavelength must be > 0")
        if not self.p_t_w > 0:
            raise LinkError("transmit power must be > 0")
        if not 0 < self.line_efficiency <= 1:
            raise LinkError("line efficiency must be in (0, 1]")
        if self.plf_scalar is not None and not 0 <= self.plf_scalar <= 1:
            raise LinkError("PLF must be in [0, 1]")

    @classmethod
    def from_dbm(cls, p_t_dbm: float, freq_mhz: float, range_m: float, **kw) -> "LinkParams":
        return cls(p_t_w=dbm_to_watts(p_t_dbm), wavelength_m=wavelength(freq_mhz), range_m=range_m, **kw)

    @property
    def p_t_dbm(self) -> float:
        return watts_to_dbm(self.p_t_w)

    def polarization_factor(self) -> float:
        if self.plf_scalar is not None:
            return self.plf_scalar
        if self.tx.polarization is None or self.rx.polarization is None:
            return 1.0
        return plf(self.tx.polarization, self.rx.polarization)

    def with_range(self, range_m: float) -> "LinkParams":
        return LinkParams(self.tx, self.rx, self.p_t_w, self.wavelength_m, range_m,
                          self.line_efficiency, self.plf_scalar)

    def swapped(self) -> "LinkParams":
        return LinkParams(self.rx, self.tx, self.p_t_w, self.wavelength_m, self.range_m,
                          self.line_efficiency, self.plf_scalar)


def power_density(p_t_w: float, g_t: float, r_m: float) -> float:
    if not r_m > 0:
        raise LinkError(f"range must be > 0, got {r_m}")
    return p_t_w * g_t / (4.0 * math.pi * r_m ** 2)


def _ratio_at_unit_range(link: LinkParams) -> float:
    # every factor of P_r/P_t except 1/R^2
    return (link.tx.mismatch * link.rx.mismatch
            * link.tx.efficiency * link.rx.efficiency
            * link.polarization_factor()
            * (link.wavelength_m / (4.0 * math.pi)) ** 2
            * link.tx.directivity * link.rx.directivity)


def power_ratio(link: LinkParams) -> float:
    """P_r / P_t including mismatch, efficiency and polarization losses."""
    return _ratio_at_unit_range(link) / link.range_m ** 2


def received_power(link: LinkParams) -> float:
    """Received power in dBm, or ``NO_LINK_DBM`` when no power arrives."""
    ratio = power_ratio(link)
    if ratio <= 0:
        return NO_LINK_DBM
    return link.p_t_dbm + 10.0 * math.log10(ratio)


def eirp(p_t_dbm: float, g_t_dbi: float, line_efficiency: float = 1.0) -> float:
    if not 0 < line_efficiency <= 1:
        raise LinkError("line efficiency must be in (0, 1]")
    return p_t_dbm + g_t_dbi + 10.0 * math.log10(line_efficiency)


def eirp_from_intensity(u_max_w_per_sr: float) -> float:
    """EIRP in watts from peak radiation intensity (W/sr)."""
    return 4.0 * math.pi * u_max_w_per_sr


def max_range(link: LinkParams, p_r_min_dbm: float) -> float:
    """Range in metres at which the received power falls to ``p_r_min_dbm``."""
    k = _ratio_at_unit_range(link)
    if k <= 0:
        raise LinkError("infeasible link: no power reaches the receiver at any range")
    return math.sqrt(k * link.p_t_w / dbm_to_watts(p_r_min_dbm))


def n_resource_blocks(bandwidth_mhz: float) -> int:
    """LTE resource blocks for a channel bandwidth (standard 1.4 to 20 MHz table).

    Other bandwidths use 90% occupancy at 180 kHz per block.
    """
    table = {1.4: 6, 3.0: 15, 5.0: 25, 10.0: 50, 15.0: 75, 20.0: 100}
    for bw, n in table.items():
        if abs(bandwidth_mhz - bw) < 1e-9:
            return n
    return max(1, int(bandwidth_mhz * 0.9 / 0.18))


def rsrp_offset_db(bandwidth_mhz: float) -> float:
    """dB gap between wideband received power and per-RE RSRP: 10*log10(12*N_rb)."""
    return 10.0 * math.log10(12 * n_resource_blocks(bandwidth_mhz))
