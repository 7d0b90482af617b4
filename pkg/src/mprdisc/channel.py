"""Received power, amplitude and SINR capture rules.

Two mean path-loss laws are supported:

* ``PathLoss.OFFSET``: ``G * (1 + r)**-eta`` with ``r`` in meters.
* ``PathLoss.SIMPLIFIED``: ``r**-eta`` (unit transmit power), normally used
  with a unit-radius discovery region.

With ``Fading.RAYLEIGH`` the power is multiplied by a unit-mean exponential.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import integrate

from mprdisc.deployment import distance_cdf


class Fading(str, Enum):
    NONE = "none"
    RAYLEIGH = "rayleigh"


class PathLoss(str, Enum):
    OFFSET = "offset"
    SIMPLIFIED = "simplified"


def dbm_to_watts(dbm):
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(w):
    return 10.0 * math.log10(w * 1000.0)


@dataclass(frozen=True)
class ChannelParams:
    tx_power_G: float = dbm_to_watts(-24.0)
    path_loss_eta: float = 4.0
    fading: Fading = Fading.NONE
    noise_density_N0: float = dbm_to_watts(-173.0)
    bandwidth_B: float = 100.0
    path_loss: PathLoss = PathLoss.OFFSET

    def __post_init__(self):
        object.__setattr__(self, "fading", Fading(self.fading))
        object.__setattr__(self, "path_loss", PathLoss(self.path_loss))
        if not self.path_loss_eta > 0:
            raise ValueError("path_loss_eta must be positive")
        for name in ("tx_power_G", "noise_density_N0", "bandwidth_B"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def noise_power_N(self):
        return self.noise_density_N0 * self.bandwidth_B

    def with_(self, **kw):
        return replace(self, **kw)

    def mean_power(self, r):
        """Fading-free received power at distance ``r``."""
        r = np.asarray(r, dtype=float)
        if self.path_loss is PathLoss.OFFSET:
            out = self.tx_power_G * (1.0 + r) ** -self.path_loss_eta
        else:
            with np.errstate(divide="ignore"):
                out = r ** -self.path_loss_eta
        return out if out.ndim else float(out)

    def distance_for_power(self, p):
        """Distance at which the fading-free power equals ``p`` (may be negative or inf)."""
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            if self.path_loss is PathLoss.OFFSET:
                out = (self.tx_power_G / p) ** (1.0 / self.path_loss_eta) - 1.0
            else:
                out = p ** (-1.0 / self.path_loss_eta)
        return out if out.ndim else float(out)


def simplified_channel(eta=4.0, fading=Fading.NONE):
    """The unit-power ``r**-eta`` law used by the closed-form three-node analysis."""
    return ChannelParams(tx_power_G=1.0, path_loss_eta=eta, fading=fading,
                         noise_density_N0=0.0, bandwidth_B=1.0,
                         path_loss=PathLoss.SIMPLIFIED)


def amplitude(dist, params, fading_draw=None):
    """Complex (or real, without fading) amplitude of a signal received from ``dist`` meters."""
    if dist < 0:
        raise ValueError("distance must be non-negative")
    if (fading_draw is None) != (params.fading is Fading.NONE):
        raise ValueError("fading_draw must be given iff Rayleigh fading is enabled")
    g = math.sqrt(params.mean_power(dist))
    if fading_draw is None:
        return g
    return g * complex(fading_draw)


def rayleigh_draws(rng, size):
    """Standard circularly-symmetric complex Gaussian samples (E|psi|^2 = 1)."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def rx_power_survival(x, params, region):
    """P(P_rx > x), the complement of :func:`rx_power_cdf`; accepts arrays when fading is off."""
    if params.fading is Fading.NONE:
        return distance_cdf(params.distance_for_power(x), region)
    x = float(x)
    # The integrand vanishes below w0 (distance negative) and is 1 above w1 (distance >= R).
    w1 = x / params.mean_power(region.radius_m)
    w0 = x / params.mean_power(0.0) if params.path_loss is PathLoss.OFFSET else 0.0

    def integrand(w):
        return distance_cdf(params.distance_for_power(x / w), region) * math.exp(-w)

    body, _ = integrate.quad(integrand, w0, w1, epsrel=1e-8, epsabs=1e-14, limit=200)
    return body + math.exp(-w1)


def rx_power_cdf(x, params, region):
    """Common CDF of the received signal power of a node uniform in ``region``."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("received power must be positive")
    return 1.0 - rx_power_survival(x, params, region)


def mean_rx_power(params, region):
    """Average fading-free received power of a node uniform in ``region`` (numerical quadrature)."""
    R = region.radius_m
    if params.path_loss is PathLoss.SIMPLIFIED and params.path_loss_eta >= 2:
        return math.inf
    val, _ = integrate.quad(lambda r: params.mean_power(r) * 2 * r / R**2, 0.0, R,
                            epsrel=1e-12, epsabs=0.0, limit=200)
    return val


def mean_rx_power_eta4(G, R):
    """Closed form of :func:`mean_rx_power` for the offset law with eta = 4."""
    u = 1.0 + R
    return G * 2.0 * (1.0 / 6.0 - 1.0 / (2 * u**2) + 1.0 / (3 * u**3)) / R**2


def sinr(k, powers, noise):
    """SINR of transmitter ``k``; returns ``inf`` when both interference and noise are zero."""
    powers = np.asarray(powers, dtype=float)
    interference = float(np.sum(np.delete(powers, k))) + noise
    if interference == 0:
        return math.inf
    return float(powers[k] / interference)


def success_mask(powers, noise, tau):
    """Boolean mask of transmitters whose SINR is at least ``tau``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    p = np.asarray(powers, dtype=float)
    n = len(p)
    if n == 0:
        return np.zeros(0, dtype=bool)
    # Interference sums exclude the own term exactly instead of subtracting it from the total.
    interference = (np.ones((n, n)) - np.eye(n)) @ p + noise
    return p >= tau * interference


def success_set(powers, noise, tau, ids=None):
    """Set of transmitters that meet the SINR threshold.

    ``powers`` is indexed positionally; ``ids`` optionally relabels positions.
    """
    mask = success_mask(powers, noise, tau)
    idx = np.flatnonzero(mask)
    if ids is None:
        return frozenset(int(i) for i in idx)
    return frozenset(ids[i] for i in idx)


def sample_powers(distances, params, rng):
    """Received powers (and amplitudes) for nodes at ``distances`` under ``params``."""
    distances = np.asarray(distances, dtype=float)
    mean = np.asarray(params.mean_power(distances), dtype=float)
    if params.fading is Fading.NONE:
        g = np.sqrt(mean)
        return mean, g
    psi = rayleigh_draws(rng, distances.shape)
    g = np.sqrt(mean) * psi
    return np.abs(g) ** 2, g
