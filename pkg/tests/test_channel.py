import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mprdisc.channel import (
    ChannelParams,
    Fading,
    amplitude,
    dbm_to_watts,
    mean_rx_power,
    mean_rx_power_eta4,
    rx_power_cdf,
    rx_power_survival,
    sample_powers,
    simplified_channel,
    sinr,
    success_mask,
    success_set,
    watts_to_dbm,
)
from mprdisc.deployment import DiskRegion, distance_cdf

powers = hnp.arrays(np.float64, st.integers(1, 8), elements=st.floats(1e-6, 1e3))


def test_dbm_conversion():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-24.0) == pytest.approx(3.981e-6, rel=1e-3)
    assert watts_to_dbm(dbm_to_watts(-173.0)) == pytest.approx(-173.0)


def test_default_noise_power(default_channel):
    assert default_channel.noise_power_N == pytest.approx(5.012e-19, rel=1e-3)


def test_path_loss_laws(default_channel):
    G = default_channel.tx_power_G
    assert default_channel.mean_power(0.0) == pytest.approx(G)
    assert default_channel.mean_power(9.0) == pytest.approx(G * 1e-4)
    assert simplified_channel().mean_power(2.0) == pytest.approx(1 / 16)
    assert simplified_channel().mean_power(0.0) == math.inf


@given(st.floats(0, 5000))
def test_distance_for_power_inverts_mean_power(r):
    ch = ChannelParams()
    assert ch.distance_for_power(ch.mean_power(r)) == pytest.approx(r, rel=1e-9, abs=1e-6)


def test_amplitude_requires_consistent_fading(default_channel):
    with pytest.raises(ValueError):
        amplitude(10.0, default_channel, fading_draw=1.0)
    ray = default_channel.with_(fading=Fading.RAYLEIGH)
    with pytest.raises(ValueError):
        amplitude(10.0, ray)
    g = amplitude(10.0, ray, fading_draw=1j)
    assert abs(g) ** 2 == pytest.approx(ray.mean_power(10.0))


def test_mean_power_closed_form_matches_quadrature(default_channel):
    region = DiskRegion(1000.0)
    q = mean_rx_power(default_channel, region)
    assert q == pytest.approx(mean_rx_power_eta4(default_channel.tx_power_G, 1000.0), rel=1e-10)


def test_simplified_mean_power_diverges():
    assert mean_rx_power(simplified_channel(), DiskRegion(1.0)) == math.inf


def test_survival_without_fading_is_distance_cdf(default_channel):
    region = DiskRegion(1000.0)
    x = default_channel.mean_power(400.0)
    assert rx_power_survival(x, default_channel, region) == pytest.approx(distance_cdf(400.0, region))
    assert rx_power_cdf(x, default_channel, region) == pytest.approx(1 - 0.16)


def test_rayleigh_survival_against_sampling():
    ch = ChannelParams(fading=Fading.RAYLEIGH)
    region = DiskRegion(1000.0)
    rng = np.random.default_rng(3)
    r = region.radius_m * np.sqrt(rng.random(400_000))
    p, _ = sample_powers(r, ch, rng)
    x = ch.mean_power(600.0)
    emp = np.mean(p > x)
    se = math.sqrt(emp * (1 - emp) / p.size)
    assert abs(rx_power_survival(x, ch, region) - emp) < 4 * se


def test_rx_power_cdf_rejects_nonpositive(default_channel):
    with pytest.raises(ValueError):
        rx_power_cdf(0.0, default_channel, DiskRegion(1.0))


def test_sinr_values():
    assert sinr(0, [4.0, 1.0], 1.0) == pytest.approx(2.0)
    assert sinr(0, [4.0], 0.0) == math.inf


def test_success_set_relabels():
    assert success_set([4.0, 1.0, 0.5], 0.0, 2.0, ids=("a", "b", "c")) == {"a"}
    assert success_set([], 0.0, 1.0) == frozenset()
    with pytest.raises(ValueError):
        success_mask([1.0], 0.0, 0.0)


def test_equal_power_tie_at_unit_threshold():
    # two equal powers at tau = 1 and no noise meet the threshold with equality
    assert success_set([1.0, 1.0], 0.0, 1.0) == {0, 1}


@settings(max_examples=300)
@given(powers, st.floats(0, 10), st.floats(0.05, 20))
def test_success_mask_matches_sinr(p, noise, tau):
    mask = success_mask(p, noise, tau)
    for k in range(len(p)):
        interference = float(np.sum(np.delete(p, k))) + noise
        assert mask[k] == (p[k] >= tau * interference)
