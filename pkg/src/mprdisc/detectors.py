"""Detection of the set of transmitting neighbors from one received vector.

Two detectors are provided:

* a bank of matched filters that treats interference as extra Gaussian noise
  and thresholds each correlator output independently;
* a joint MAP estimator of the transmitter set and the neighbor count, which
  averages the Gaussian likelihood over a discrete amplitude grid and combines
  it with set-membership and cardinality priors.
"""
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from mprdisc import kernels
from mprdisc.rfs import BinomialPrior, log_membership_density, members_of, popcounts

HIT, CORRECT_REJECTION, FALSE_ALARM, MISS = "H", "C", "F", "M"


@dataclass(frozen=True)
class Decision:
    detected_set: frozenset
    estimated_J: int | None = None
    per_node_scores: dict | None = None
    log_objective: float | None = None


# ---------------------------------------------------------------------------
# matched filter bank


def effective_noise(J_bar, p_T, mean_rx_power, N):
    """Noise plus the average interference power of the other J_bar - 1 neighbors."""
    if J_bar < 1:
        raise ValueError("J_bar must be at least 1")
    m = int(J_bar) - 1
    interference = math.fsum(math.comb(m, n) * p_T**n * (1 - p_T) ** (m - n) * n
                             for n in range(1, m + 1))
    return N + interference * mean_rx_power


@dataclass(frozen=True)
class MatchedFilterConfig:
    effective_noise_Nprime: float
    threshold_beta: float

    def __post_init__(self):
        if not self.threshold_beta > 0:
            raise ValueError("threshold_beta must be positive")

    @property
    def threshold_beta_prime(self):
        return self.threshold_beta * self.effective_noise_Nprime

    @classmethod
    def min_error(cls, p_T, J_bar, mean_rx_power, N):
        """Threshold from equal error costs: beta = (1 - p_T) / p_T."""
        return cls(effective_noise(J_bar, p_T, mean_rx_power, N), (1 - p_T) / p_T)


def matched_filter_decide(y, signatures, cfg, universe=None):
    """Declare node k present when its correlator output reaches beta * N'."""
    S = np.asarray(signatures, dtype=float)
    y = np.asarray(y)
    if S.shape[1] != y.shape[-1]:
        raise ValueError("signature length does not match received vector")
    universe = tuple(range(len(S))) if universe is None else tuple(universe)
    scores = np.real(S @ y)
    thr = cfg.threshold_beta_prime
    detected = frozenset(u for u, s in zip(universe, scores) if s >= thr)
    return Decision(detected, per_node_scores=dict(zip(universe, scores.tolist())))


# ---------------------------------------------------------------------------
# set-valued MAP detector


def equal_area_radii(R0, strips):
    """Radii that bisect, by area, each of ``strips`` equal-area annuli of a disk of radius R0."""
    if strips < 1:
        raise ValueError("strips must be at least 1")
    i = np.arange(1, strips + 1)
    return R0 * np.sqrt((2 * i - 1) / (2 * strips))


@dataclass(frozen=True, eq=False)
class RstDetectorConfig:
    discovery_radius_R0: float
    cardinality_prior: object
    amplitude_grid: tuple
    p_T: float
    signatures: np.ndarray
    universe: tuple = None
    max_terms: int = 10**8
    backend: str | None = None

    def __post_init__(self):
        if len(self.amplitude_grid) == 0:
            raise ValueError("amplitude grid is empty")
        sig = np.asarray(self.signatures, dtype=float)
        object.__setattr__(self, "signatures", sig)
        if self.universe is None:
            object.__setattr__(self, "universe", tuple(range(len(sig))))
        if len(self.universe) != len(sig):
            raise ValueError("universe and signature rows differ in length")
        if len(sig) > 12:
            raise ValueError("exhaustive MAP search supports at most 12 nodes")

    @classmethod
    def build(cls, R0, channel, p_T, signatures, universe=None, R=None, strips=7, prior=None, **kw):
        """Grid amplitudes at the equal-area radii; binomial prior over nodes within R0 of R."""
        K = len(signatures)
        if prior is None:
            prior = BinomialPrior.from_radii(K, R0, R if R is not None else R0)
        grid = tuple(np.sqrt(channel.mean_power(equal_area_radii(R0, strips))).tolist())
        return cls(R0, prior, grid, p_T, signatures, universe, **kw)

    @property
    def n_terms(self):
        return (1 + len(self.amplitude_grid)) ** len(self.signatures)


def rst_log_likelihood(y, X_prime, amplitudes, signatures, N, universe=None):
    """Log Gaussian likelihood of ``y`` given members of X' sent with ``amplitudes``.

    ``amplitudes`` lists one value per member in increasing member order.
    """
    if N <= 0:
        raise ValueError("noise power must be positive")
    S = np.asarray(signatures, dtype=float)
    universe = tuple(range(len(S))) if universe is None else tuple(universe)
    members = sorted(X_prime)
    if len(amplitudes) != len(members):
        raise ValueError("need exactly one amplitude per member")
    row = {u: i for i, u in enumerate(universe)}
    mean = np.zeros(S.shape[1])
    for k, g in zip(members, amplitudes):
        mean = mean + g * S[row[k]]
    resid = np.asarray(y, dtype=float) - mean
    L = S.shape[1]
    return -0.5 * L * math.log(2 * math.pi * N) - float(resid @ resid) / (2 * N)


def rst_gaussian_likelihood(y, X_prime, amplitudes, signatures, N, universe=None):
    return math.exp(rst_log_likelihood(y, X_prime, amplitudes, signatures, N, universe))


def rst_log_marginal_likelihood(y, X_prime, cfg, N):
    """Log of the likelihood averaged over every grid assignment of amplitudes to X' (direct sum)."""
    grid = cfg.amplitude_grid
    k = len(X_prime)
    if len(grid) ** k > cfg.max_terms:
        raise ValueError(f"{len(grid)}^{k} amplitude assignments exceed max_terms; "
                         "use fewer grid points or nodes")
    logs = [rst_log_likelihood(y, X_prime, combo, cfg.signatures, N, cfg.universe)
            for combo in itertools.product(grid, repeat=k)]
    m = max(logs)
    return m + math.log(math.fsum(math.exp(v - m) for v in logs)) - k * math.log(len(grid))


def rst_marginal_likelihood(y, X_prime, cfg, N):
    return math.exp(rst_log_marginal_likelihood(y, X_prime, cfg, N))


def rst_objective_table(y, cfg, N):
    """Log MAP objective for every (subset bitmask, J') pair; ``-inf`` where infeasible.

    Returns ``(table, J_values)`` with ``table.shape == (2**K, len(J_values))``.
    """
    if cfg.n_terms > cfg.max_terms:
        raise ValueError(f"{cfg.n_terms} likelihood terms exceed max_terms={cfg.max_terms}; "
                         "reduce the number of nodes or grid points")
    log_like = kernels.subset_log_marginals(y, cfg.signatures, cfg.amplitude_grid, N,
                                            backend=cfg.backend)
    K = len(cfg.signatures)
    sizes = popcounts(K)
    J_values = [j for j in cfg.cardinality_prior.support() if cfg.cardinality_prior.pmf(j) > 0]
    table = np.full((1 << K, len(J_values)), -np.inf)
    for col, j in enumerate(J_values):
        log_prior = math.log(cfg.cardinality_prior.pmf(j))
        dens = np.array([log_membership_density(k, j, cfg.p_T) for k in range(K + 1)])
        table[:, col] = log_like + dens[sizes] + log_prior
    return table, J_values


def rst_map_decide(y, cfg, N):
    """Joint MAP estimate of the transmitter set and the neighbor count.

    Ties go to the smaller set, then the smaller J', then the smaller bitmask.
    """
    table, J_values = rst_objective_table(y, cfg, N)
    best = table.max()
    masks, cols = np.nonzero(table == best)
    sizes = popcounts(len(cfg.signatures))
    mask, col = min(zip(masks.tolist(), cols.tolist()), key=lambda mc: (sizes[mc[0]], mc[1], mc[0]))
    return Decision(members_of(mask, cfg.universe), estimated_J=J_values[col],
                    log_objective=float(best))


# ---------------------------------------------------------------------------
# scoring


def classify_outcomes(truth, decided, universe):
    """Per-node outcome letter: H(it), C(orrect rejection), F(alse alarm) or M(iss)."""
    truth, decided = set(truth), set(decided)
    universe = tuple(universe)
    extra = (truth | decided) - set(universe)
    if extra:
        raise ValueError(f"nodes {sorted(extra)} are outside the universe")
    out = {}
    for u in universe:
        if u in truth:
            out[u] = HIT if u in decided else MISS
        else:
            out[u] = FALSE_ALARM if u in decided else CORRECT_REJECTION
    return out


@dataclass
class Tally:
    hits: int = 0
    correct_rejections: int = 0
    false_alarms: int = 0
    misses: int = 0
    misses_out_of_range: int = 0
    false_alarms_out_of_range: int = 0
    by_node: dict = field(default_factory=dict)

    @property
    def errors(self):
        return self.false_alarms + self.misses

    def add(self, outcomes, out_of_range=()):
        c = Counter(outcomes.values())
        self.hits += c[HIT]
        self.correct_rejections += c[CORRECT_REJECTION]
        self.false_alarms += c[FALSE_ALARM]
        self.misses += c[MISS]
        for node, letter in outcomes.items():
            if node in out_of_range:
                self.misses_out_of_range += letter == MISS
                self.false_alarms_out_of_range += letter == FALSE_ALARM
            self.by_node.setdefault(node, Counter())[letter] += 1
        return self

    def as_dict(self):
        return {
            "hits": self.hits,
            "correct_rejections": self.correct_rejections,
            "false_alarms": self.false_alarms,
            "misses": self.misses,
            "misses_out_of_range": self.misses_out_of_range,
            "false_alarms_out_of_range": self.false_alarms_out_of_range,
        }
