"""Random finite sets over a small discrete universe.

Set functions are stored as dense tables indexed by bitmask: bit ``i`` of the
index stands for ``universe[i]``. The belief mass (probability that the random
set is contained in ``C``) and the belief density (probability that it equals
``B``) are related by the zeta transform and its Moebius inverse on the subset
lattice, both computed in O(K 2^K).
"""
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

MAX_UNIVERSE = 20


def mask_of(subset, universe):
    pos = {u: i for i, u in enumerate(universe)}
    m = 0
    for x in subset:
        try:
            m |= 1 << pos[x]
        except KeyError:
            raise ValueError(f"{x!r} is not in the universe {tuple(universe)}") from None
    return m


def members_of(mask, universe):
    return frozenset(u for i, u in enumerate(universe) if mask >> i & 1)


def popcounts(K):
    """Cardinality of every subset of a K-element universe, by bitmask."""
    c = np.zeros(1 << K, dtype=np.int64)
    for i in range(K):
        c[1 << i: 2 << i] = c[: 1 << i] + 1
    return c


@dataclass
class SetFunction:
    """Real-valued function on the power set of ``universe``."""

    universe: tuple
    table: np.ndarray

    def __post_init__(self):
        self.universe = tuple(self.universe)
        if len(self.universe) > MAX_UNIVERSE:
            raise ValueError(f"universe larger than {MAX_UNIVERSE} elements")
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe has duplicate elements")
        self.table = np.asarray(self.table, dtype=float)
        if self.table.shape != (1 << len(self.universe),):
            raise ValueError("table must have one entry per subset")

    @classmethod
    def from_mapping(cls, universe, values, default=0.0):
        universe = tuple(universe)
        table = np.full(1 << len(universe), default, dtype=float)
        for subset, v in values.items():
            table[mask_of(subset, universe)] = v
        return cls(universe, table)

    @classmethod
    def from_callable(cls, universe, fn):
        universe = tuple(universe)
        return cls(universe, [fn(members_of(m, universe)) for m in range(1 << len(universe))])

    def __getitem__(self, subset):
        return float(self.table[mask_of(subset, self.universe)])

    def items(self):
        for m, v in enumerate(self.table):
            yield members_of(m, self.universe), float(v)

    def to_json(self):
        return json.dumps({"universe": list(self.universe),
                           "table": {str(m): float(v) for m, v in enumerate(self.table)}})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        universe = tuple(d["universe"])
        table = np.zeros(1 << len(universe))
        for m, v in d["table"].items():
            table[int(m)] = v
        return cls(universe, table)


def _subset_sum(table, sign):
    t = np.array(table, dtype=float)
    n = t.size
    K = n.bit_length() - 1
    for i in range(K):
        step = 1 << i
        v = t.reshape(-1, 2, step)
        v[:, 1, :] += sign * v[:, 0, :]
    return t


def belief_mass_from_pmf(pmf, tol=1e-12):
    """beta(C) = sum of pmf(B) over all B contained in C."""
    if np.any(pmf.table < -tol):
        raise ValueError("pmf has negative entries")
    total = math.fsum(pmf.table)
    if abs(total - 1.0) > tol:
        raise ValueError(f"pmf sums to {total!r}, not 1")
    return SetFunction(pmf.universe, _subset_sum(pmf.table, +1.0))


def mobius_inverse(beta):
    """f(B) = sum over C contained in B of (-1)^|B \\ C| beta(C)."""
    return SetFunction(beta.universe, _subset_sum(beta.table, -1.0))


def membership_belief_mass(C, J_prime, p_T):
    """Belief mass of the transmitter set given J' neighbors transmitting independently with p_T."""
    c = len(C)
    return math.fsum(math.comb(c, n) * p_T**n * (1 - p_T) ** (J_prime - n)
                     for n in range(0, min(J_prime, c) + 1))


def membership_density(X_prime, J_prime, p_T):
    k = len(X_prime)
    if k > J_prime:
        return 0.0
    return p_T**k * (1 - p_T) ** (J_prime - k)


def log_membership_density(k, J_prime, p_T):
    """Log of :func:`membership_density` for a set of size ``k``; ``-inf`` when impossible."""
    if k > J_prime:
        return -math.inf
    return _xlogy(k, p_T) + _xlogy(J_prime - k, 1 - p_T)


def _xlogy(a, b):
    if a == 0:
        return 0.0
    return a * math.log(b) if b > 0 else -math.inf


@dataclass(frozen=True)
class PoissonPrior:
    """Neighbor count of a Poisson field: mean = intensity * pi * R0^2."""

    mean: float

    @classmethod
    def from_intensity(cls, intensity, R0):
        return cls(intensity * math.pi * R0**2)

    def pmf(self, j):
        return float(stats.poisson.pmf(j, self.mean))

    def support(self, tail=1e-12):
        hi = int(stats.poisson.isf(tail, self.mean)) + 1 if self.mean > 0 else 0
        return range(0, hi + 1)


@dataclass(frozen=True)
class BinomialPrior:
    """Neighbor count when ``K`` nodes lie uniformly in radius R: Binomial(K, (R0/R)^2)."""

    K: int
    q: float

    @classmethod
    def from_radii(cls, K, R0, R):
        return cls(K, min(1.0, (R0 / R) ** 2))

    def pmf(self, j):
        if not 0 <= j <= self.K:
            raise ValueError(f"J'={j} outside the support 0..{self.K}")
        return float(stats.binom.pmf(j, self.K, self.q))

    def support(self):
        return range(0, self.K + 1)


def cardinality_prior(J_prime, model):
    return model.pmf(J_prime)
