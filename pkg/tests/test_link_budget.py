import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cellplan.link_budget import (
    NO_LINK_DBM, LinkError, LinkParams, TerminalParams, dbm_to_watts, eirp, eirp_from_intensity,
    linear_polarization, max_range, n_resource_blocks, plf, power_density, power_ratio, received_power,
    rsrp_offset_db, wavelength,
)


def test_power_density_unit_sphere():
    assert power_density(1.0, 1.0, 1 / (2 * math.sqrt(math.pi))) == pytest.approx(1.0)


def test_power_density_deployment_values():
    # 43 dBm ~ 19.95 W, 18.5 dBi ~ 70.79, 1 km
    assert power_density(19.95, 70.79, 1000.0) == pytest.approx(1.12384e-4, rel=1e-4)


def test_power_density_inverse_square():
    assert power_density(5.0, 2.0, 200.0) == pytest.approx(power_density(5.0, 2.0, 100.0) / 4)
    with pytest.raises(LinkError):
        power_density(1.0, 1.0, 0.0)


def test_plf_cases():
    assert plf(linear_polarization(0.3), linear_polarization(0.3)) == pytest.approx(1.0)
    assert plf(linear_polarization(0.0), linear_polarization(math.pi / 2)) == pytest.approx(0.0, abs=1e-15)
    assert plf(linear_polarization(math.pi / 4), linear_polarization(-math.pi / 4 + math.pi / 2)) == pytest.approx(1.0)
    assert plf(linear_polarization(0.0), linear_polarization(math.pi / 4)) == pytest.approx(0.5)
    with pytest.raises(LinkError):
        plf([1.0, 1.0], [1.0, 0.0])


def test_plf_conjugates_one_side():
    rhc = np.array([1, 1j]) / math.sqrt(2)
    assert plf(rhc, rhc) == pytest.approx(1.0)


def _unit_link(r, **kw):
    lam = 1.0
    return LinkParams(p_t_w=1.0, wavelength_m=lam, range_m=r, **kw)


def test_power_ratio_unity_at_lambda_over_4pi():
    assert power_ratio(_unit_link(1 / (4 * math.pi))) == pytest.approx(1.0)
    assert power_ratio(_unit_link(2 / (4 * math.pi))) == pytest.approx(0.25)


def test_power_ratio_mismatch_and_efficiency():
    t = TerminalParams(directivity=1.0, efficiency=0.9, reflection=0.2)
    link = LinkParams(tx=t, rx=t, p_t_w=1.0, wavelength_m=1.0, range_m=1 / (4 * math.pi))
    assert power_ratio(link) == pytest.approx(0.96 ** 2 * 0.81, rel=1e-12)
    assert power_ratio(link) == pytest.approx(0.7465, abs=1e-4)


def test_received_power_deployment_example():
    link = LinkParams.from_dbm(43.0, 2625.0, 2000.0, tx=TerminalParams.from_gain_dbi(18.5))
    assert received_power(link) == pytest.approx(-45.35, abs=0.01)
    far = link.with_range(4000.0)
    assert received_power(link) - received_power(far) == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_received_power_cross_polarized_is_no_link():
    link = LinkParams.from_dbm(43.0, 2625.0, 2000.0, plf_scalar=0.0)
    assert received_power(link) == NO_LINK_DBM
    with pytest.raises(LinkError, match="infeasible"):
        max_range(link, -110.0)


def test_eirp():
    assert eirp(43.0, 18.5) == pytest.approx(61.5)
    assert eirp(43.0, 18.5, 0.5) == pytest.approx(61.5 - 10 * math.log10(2))
    assert eirp_from_intensity(1.0) == pytest.approx(4 * math.pi)


def test_max_range_inversion():
    base = LinkParams.from_dbm(43.0, 2625.0, 1000.0, tx=TerminalParams.from_gain_dbi(18.5))
    p1 = received_power(base)
    assert max_range(base, p1) == pytest.approx(1000.0, rel=1e-3)
    assert max_range(base, p1 - 10 * math.log10(2)) == pytest.approx(1000.0 * math.sqrt(2), rel=1e-9)


def test_max_range_free_space_budget():
    # 43 + 18.5 + 110 = 171.5 dB; 10**((171.5 - 32.45 - 20 log10 2625) / 20) km
    link = LinkParams.from_dbm(43.0, 2625.0, 1.0, tx=TerminalParams.from_gain_dbi(18.5))
    r_km = max_range(link, -110.0) / 1000.0
    assert r_km == pytest.approx(3414.84, rel=1e-3)


_terminal = st.builds(
    TerminalParams,
    directivity=st.floats(0.5, 100.0),
    efficiency=st.floats(0.1, 1.0),
    reflection=st.floats(0.0, 0.9),
)


@given(_terminal, _terminal, st.floats(1.0, 50.0), st.floats(300.0, 6000.0), st.floats(10.0, 50_000.0))
def test_round_trip_and_reciprocity(tx, rx, p_dbm, f_mhz, r):
    link = LinkParams.from_dbm(p_dbm, f_mhz, r, tx=tx, rx=rx)
    assert max_range(link, received_power(link)) == pytest.approx(r, rel=1e-3)
    assert power_ratio(link) == pytest.approx(power_ratio(link.swapped()), rel=1e-12)
    # dB path agrees with the linear path
    lin = 10 * math.log10(dbm_to_watts(p_dbm) * power_ratio(link)) + 30
    assert abs(received_power(link) - lin) < 1e-9


def test_terminal_validation():
    with pytest.raises(LinkError):
        TerminalParams(efficiency=0.0)
    with pytest.raises(LinkError):
        TerminalParams(reflection=1.0)
    with pytest.raises(LinkError):
        TerminalParams(polarization=(1.0, 1.0))
    with pytest.raises(LinkError):
        LinkParams(range_m=0.0)


def test_resource_blocks_and_rsrp_offset():
    assert n_resource_blocks(10.0) == 50
    assert rsrp_offset_db(10.0) == pytest.approx(27.78, abs=0.01)
    assert rsrp_offset_db(1.4) == pytest.approx(18.57, abs=0.01)
    assert wavelength(2625.0) == pytest.approx(0.11421, abs=1e-5)
