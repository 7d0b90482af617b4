"""Closed-form and Monte Carlo throughput analysis of the random-access discovery protocol.

Capture probabilities are defined with noise neglected unless ``include_noise``
is set. Where no closed form is available they are estimated by Monte Carlo
over the interferers' received powers; the own-node term is integrated
analytically (conditional expectation), which keeps the estimator bounded and
low-variance even for the heavy-tailed ``r**-eta`` law. Uniform variates are
used in antithetic pairs ``(u, 1 - u)``.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import optimize, special

from mprdisc._random import make_rng
from mprdisc.channel import ChannelParams, Fading, PathLoss, simplified_channel
from mprdisc.deployment import DiskRegion, distance_cdf

MC_SAMPLES = 1_000_000

# stream ids for make_rng so that each estimator has its own reproducible stream
_CAPTURE, _F1, _F2 = 1, 2, 3


class McEstimate(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True)
class CaptureContext:
    """Parameters of a symmetric network in which every node has ``J`` neighbors."""

    J: int
    p_T: float
    tau: float
    channel: ChannelParams = field(default_factory=simplified_channel)
    region: DiskRegion = DiskRegion(1.0)
    include_noise: bool = False
    samples: int = MC_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be at least 1")
        if not 0.0 <= self.p_T <= 1.0:
            raise ValueError("p_T must lie in [0, 1]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def eta(self):
        return self.channel.path_loss_eta

    @property
    def noise(self):
        return self.channel.noise_power_N if self.include_noise else 0.0

    def _kw(self):
        return dict(channel=self.channel, region=self.region, include_noise=self.include_noise,
                    samples=self.samples, seed=self.seed)

    @cached_property
    def capture_table(self):
        """``f_n`` for n = 1..J (index 0 unused)."""
        return [math.nan] + [capture_prob(n, self.tau, **self._kw()) for n in range(1, self.J + 1)]


def _binom(n, k):
    return math.comb(n, k) if 0 <= k <= n else 0


def _antithetic_uniforms(rng, half, width):
    u = rng.random((half, width))
    return np.concatenate([u, 1.0 - u])


def _interference(n_int, channel, region, rng, half, u_fade=None):
    """Sum of ``n_int`` i.i.d. received powers, ``2 * half`` antithetic samples."""
    if n_int == 0:
        return np.zeros(2 * half)
    u = _antithetic_uniforms(rng, half, n_int)
    r = region.radius_m * np.sqrt(u)
    with np.errstate(divide="ignore"):
        p = np.asarray(channel.mean_power(r))
        if channel.fading is Fading.RAYLEIGH:
            w = _antithetic_uniforms(rng, half, n_int)
            p = p * -np.log1p(-w)
    return p.sum(axis=1)


def _own_fading(channel, rng, half):
    if channel.fading is Fading.NONE:
        return None
    return -np.log1p(-_antithetic_uniforms(rng, half, 1)[:, 0])


def _estimate(values, half):
    """Mean and standard error of antithetic-paired samples."""
    pairs = 0.5 * (values[:half] + values[half:])
    se = pairs.std(ddof=1) / math.sqrt(half) if half > 1 else math.nan
    return McEstimate(float(pairs.mean()), float(se))


def _survival_at(threshold, channel, region, own_fade):
    """P(own power >= threshold) for a node uniform in the region, given its fading draw."""
    if own_fade is not None:
        threshold = threshold / own_fade
    with np.errstate(divide="ignore", invalid="ignore"):
        d = channel.distance_for_power(threshold)
    return np.asarray(distance_cdf(np.nan_to_num(d, nan=-1.0), region))


def capture_prob_mc(n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
                    samples=MC_SAMPLES, seed=0):
    """Monte Carlo estimate of the capture probability among ``n`` simultaneous transmitters."""
    if n < 1:
        raise ValueError("n must be at least 1")
    channel = channel or simplified_channel()
    rng = make_rng(seed, _CAPTURE, n)
    half = max(samples // 2, 1)
    s = _interference(n - 1, channel, region, rng, half)
    if include_noise:
        s = s + channel.noise_power_N
    vals = _survival_at(tau * s, channel, region, _own_fading(channel, rng, half))
    return _estimate(vals, half)


def capture_prob(n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
                 samples=MC_SAMPLES, seed=0):
    """Probability that a given transmitter among ``n`` simultaneous ones has SINR above ``tau``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    channel = channel or simplified_channel()
    if not include_noise:
        if n == 1:
            return 1.0
        if n == 2 and _simplified_no_fading(channel):
            c = tau ** (2.0 / channel.path_loss_eta)
            return 1.0 - c / 2.0 if c <= 1.0 else 1.0 / (2.0 * c)
    return capture_prob_mc(n, tau, channel, region, include_noise, samples, seed).value


def _simplified_no_fading(channel):
    return channel.path_loss is PathLoss.SIMPLIFIED and channel.fading is Fading.NONE


def expected_successes_per_slot(ctx):
    """Expected number of neighbors successfully received by one node in one slot."""
    return _expected_successes(ctx.capture_table, ctx.J, ctx.p_T)


def _expected_successes(f, J, p):
    return sum(_binom(J, n) * p**n * (1 - p) ** (J - n + 1) * n * f[n] for n in range(1, J + 1))


def three_node_expected_successes(p_T, tau, eta=4.0):
    """Closed-form per-slot expectation for three mutually-neighboring nodes and the ``r**-eta`` law."""
    p = p_T
    if tau < 1:
        a = tau ** (2.0 / eta)
        return a * p**3 - (2 + a) * p**2 + 2 * p
    b = tau ** (-2.0 / eta)
    return (2 - b) * p**3 + (b - 4) * p**2 + 2 * p


def optimal_pt(tau, eta=4.0):
    """Transmit probability maximizing :func:`three_node_expected_successes`."""
    if not (tau > 0 and eta > 0):
        raise ValueError("tau and eta must be positive")
    if tau < 1:
        a = tau ** (2.0 / eta)
        return (a + 2 - math.sqrt((a - 1) ** 2 + 3)) / (3 * a)
    b = tau ** (-2.0 / eta)
    return (b - 4 + math.sqrt((b - 1) ** 2 + 3)) / (3 * (b - 2))


def optimal_pt_numeric(ctx, xatol=1e-6):
    """Maximize :func:`expected_successes_per_slot` over p_T in [0, 1] for any ``J``."""
    f = ctx.capture_table
    res = optimize.minimize_scalar(lambda p: -_expected_successes(f, ctx.J, p),
                                   bounds=(0.0, 1.0), method="bounded",
                                   options={"xatol": xatol})
    return float(res.x)


# ---------------------------------------------------------------------------
# M-PSK rate normalization


@dataclass(frozen=True)
class MpskParams:
    M: int = 2
    target_ber_z: float = 1e-6
    W: float = 1.0
    B: float = 1.0
    k_g: float = 1.0

    def __post_init__(self):
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two >= 2")
        if not 0 < self.target_ber_z < 0.5:
            raise ValueError("target BER must lie in (0, 0.5)")

    @property
    def max_symbol_rate(self):
        return 1.0 / self.k_g

    @property
    def bits_per_symbol(self):
        return math.log2(self.M)


def q_function(x):
    return 0.5 * special.erfc(x / math.sqrt(2.0))


def q_inverse(z):
    """Inverse of the Gaussian tail probability Q."""
    return float(math.sqrt(2.0) * special.erfcinv(2.0 * z))


def mpsk_symbol_rate(tau, params):
    """Symbol rate [symbols/s/Hz] that M-PSK sustains at SINR ``tau`` and the target BER."""
    M, z = params.M, params.target_ber_z
    if M == 2:
        raw = 2 * tau / q_inverse(z) ** 2
    elif M == 4:
        raw = tau / (2 * q_inverse(z) ** 2)
    else:
        raw = 2 * tau * math.sin(math.pi / M) ** 2 / q_inverse(z * math.log2(M) / 2) ** 2
    return min(raw, params.max_symbol_rate)


def slot_duration(tau, params):
    rate = mpsk_symbol_rate(tau, params)
    if rate <= 0:
        raise ValueError(f"symbol rate is zero at tau={tau}")
    return params.W / (rate * params.B * params.bits_per_symbol)


def nodes_per_second(tau, params, eta=4.0):
    """Maximum expected successful receptions per second in the three-node example."""
    e_star = three_node_expected_successes(optimal_pt(tau, eta), tau, eta)
    return e_star / slot_duration(tau, params)


# ---------------------------------------------------------------------------
# multi-slot discovery prediction


def slot_basis_prediction(h, J):
    """Probability that a given neighbor was received at least once, given per-slot success counts."""
    if J <= 0:
        raise ValueError("J must be positive")
    h = np.asarray(h, dtype=float)
    if np.any((h < 0) | (h > J)):
        raise ValueError("success counts must lie in [0, J]")
    return float(1.0 - np.prod(1.0 - h / J))


def slot_basis_curve(h, J):
    """:func:`slot_basis_prediction` evaluated after every slot."""
    if J <= 0:
        raise ValueError("J must be positive")
    h = np.asarray(h, dtype=float)
    return 1.0 - np.cumprod(1.0 - h / J)


def bernoulli_prediction(D, e_star, J):
    """Poisson approximation of the discovered fraction after ``D`` slots."""
    if D < 0:
        raise ValueError("D must be non-negative")
    if math.isinf(D):
        return 1.0 if e_star > 0 else 0.0
    return 1.0 - math.exp(-D * e_star / J)


# ---------------------------------------------------------------------------
# distance-conditioned capture and correlated-slot membership


def f1n(r_prime, n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
        samples=MC_SAMPLES, seed=0):
    """Capture probability of a transmitter at distance ``r_prime`` among ``n`` transmitters."""
    return _f1n(r_prime, n, tau, channel, region, include_noise, samples, seed).value


def f1n_mc(r_prime, n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
           samples=MC_SAMPLES, seed=0):
    return _f1n(r_prime, n, tau, channel, region, include_noise, samples, seed, force_mc=True)


def _f1n(r_prime, n, tau, channel, region, include_noise, samples, seed, force_mc=False):
    if n < 1:
        raise ValueError("n must be at least 1")
    channel = channel or simplified_channel()
    if not force_mc and not include_noise and _simplified_no_fading(channel):
        if n == 1:
            return McEstimate(1.0, 0.0)
        if n == 2:
            c = tau ** (2.0 / channel.path_loss_eta)
            return McEstimate(1.0 - min(1.0, c * (r_prime / region.radius_m) ** 2), 0.0)
    rng = make_rng(seed, _F1, n)
    half = max(samples // 2, 1)
    s = _interference(n - 1, channel, region, rng, half)
    if include_noise:
        s = s + channel.noise_power_N
    with np.errstate(divide="ignore"):
        own = channel.mean_power(r_prime)
    if channel.fading is Fading.NONE:
        vals = (own >= tau * s).astype(float)
    else:
        vals = np.exp(-tau * s / own)
    return _estimate(vals, half)


def f2n(r_prime, n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
        samples=MC_SAMPLES, seed=0):
    """Capture probability of an arbitrary transmitter when one interferer sits at ``r_prime``."""
    return _f2n(r_prime, n, tau, channel, region, include_noise, samples, seed).value


def f2n_mc(r_prime, n, tau, channel=None, region=DiskRegion(1.0), include_noise=False,
           samples=MC_SAMPLES, seed=0):
    return _f2n(r_prime, n, tau, channel, region, include_noise, samples, seed, force_mc=True)


def _f2n(r_prime, n, tau, channel, region, include_noise, samples, seed, force_mc=False):
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return McEstimate(0.0, 0.0)
    channel = channel or simplified_channel()
    if not force_mc and n == 2 and not include_noise and _simplified_no_fading(channel):
        c = tau ** (-2.0 / channel.path_loss_eta)
        return McEstimate(min(1.0, c * (r_prime / region.radius_m) ** 2), 0.0)
    rng = make_rng(seed, _F2, n)
    half = max(samples // 2, 1)
    s = _interference(n - 2, channel, region, rng, half)
    with np.errstate(divide="ignore"):
        pinned = channel.mean_power(r_prime)
    if channel.fading is Fading.RAYLEIGH:
        pinned = pinned * -np.log1p(-_antithetic_uniforms(rng, half, 1)[:, 0])
    s = s + pinned
    if include_noise:
        s = s + channel.noise_power_N
    vals = _survival_at(tau * s, channel, region, _own_fading(channel, rng, half))
    return _estimate(vals, half)


def _membership_terms(r_prime, h_t, ctx):
    """Per-n weights (numerator, denominator) of the distance-conditioned membership ratio."""
    J, p, h = ctx.J, ctx.p_T, h_t
    kw = ctx._kw()
    f = ctx.capture_table
    num, den = [], []
    for n in range(max(h, 1), J + 1):
        a = f1n(r_prime, n, ctx.tau, **kw)
        b = f2n(r_prime, n, ctx.tau, **kw)
        zeta = _binom(n - 1, h - 1) * a * b ** (h - 1) * (1 - b) ** (n - h) if h >= 1 else 0.0
        gamma = (_binom(n - 1, h) * b**h * (1 - b) ** (n - h - 1) * (1 - a)) if h <= n - 1 else 0.0
        xi = _binom(n, h) * f[n] ** h * (1 - f[n]) ** (n - h)
        w = p**n * (1 - p) ** (J - n)
        num.append(_binom(J - 1, n - 1) * w * zeta)
        den.append(_binom(J, n) * w * (n / J * (zeta + gamma - xi) + xi))
    if h == 0:
        den.append((1 - p) ** J)
    return math.fsum(num), math.fsum(den)


def conditional_membership(r_prime, h_t, ctx):
    """P(node at distance r' is among the successes | exactly ``h_t`` successes this slot)."""
    if not 0 <= h_t <= ctx.J:
        raise ValueError(f"h_t must lie in [0, {ctx.J}]")
    if h_t == 0:
        return 0.0
    num, den = _membership_terms(r_prime, h_t, ctx)
    return num / den


def success_count_given_distance(r_prime, h_t, ctx):
    """P(exactly ``h_t`` successes | a particular neighbor sits at distance r')."""
    if not 0 <= h_t <= ctx.J:
        raise ValueError(f"h_t must lie in [0, {ctx.J}]")
    return _membership_terms(r_prime, h_t, ctx)[1]


def membership_given_distance(r_prime, ctx):
    """P(node at distance r' is among the successes), unconditioned on the success count."""
    kw = ctx._kw()
    p, J = ctx.p_T, ctx.J
    return math.fsum(_binom(J - 1, n - 1) * p**n * (1 - p) ** (J - n) * f1n(r_prime, n, ctx.tau, **kw)
                     for n in range(1, J + 1))


def three_node_membership(r_prime, p_T):
    """Closed form of :func:`conditional_membership` for J = 2, h_t = 1, tau = 1, unit radius."""
    q = 1 - r_prime**2
    return (1 - p_T + p_T * q**2) / (2 * (1 - p_T) + (q**2 + r_prime**4) * p_T)
