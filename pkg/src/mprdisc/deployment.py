"""Node placement inside a disk and the associated distance law."""
import json
import math
from dataclasses import dataclass

import numpy as np

from mprdisc._random import make_rng


@dataclass(frozen=True)
class DiskRegion:
    """Disk of radius ``radius_m`` centred on the origin."""

    radius_m: float

    def __post_init__(self):
        if not self.radius_m > 0:
            raise ValueError(f"radius_m must be positive, got {self.radius_m}")

    @property
    def area(self):
        return math.pi * self.radius_m**2


@dataclass
class Deployment:
    """Node positions in meters; row 0 is the reference node at the origin."""

    positions: np.ndarray
    radius_m: float
    seed: int | None = None
    reference_index: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)

    @property
    def n_nodes(self):
        return len(self.positions)

    @property
    def neighbor_ids(self):
        return tuple(i for i in range(self.n_nodes) if i != self.reference_index)

    def distances(self):
        """Distance from every node to the reference node."""
        ref = self.positions[self.reference_index]
        return np.hypot(*(self.positions - ref).T)

    def to_dict(self):
        return {
            "seed": self.seed,
            "radius_m": self.radius_m,
            "positions": self.positions.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(positions=d["positions"], radius_m=float(d["radius_m"]), seed=d.get("seed"))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def distance_quantile(u, region):
    """Inverse of :func:`distance_cdf`."""
    return region.radius_m * np.sqrt(u)


def sample_uniform_disk(n, region, seed=0):
    """Place ``n`` nodes i.i.d. uniformly in ``region`` plus the reference at the origin."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed)
    r = distance_quantile(rng.random(n), region)
    theta = 2 * np.pi * rng.random(n)
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    positions = np.vstack([np.zeros((1, 2)), pts])
    return Deployment(positions=positions, radius_m=region.radius_m,
                      seed=None if isinstance(seed, np.random.Generator) else seed)


def sample_poisson_count(intensity, region, seed=0):
    """Number of nodes of a homogeneous Poisson field falling inside ``region``."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    return int(make_rng(seed).poisson(intensity * region.area))


def distance_cdf(x, region):
    """P(r <= x) for a node uniform in the disk: 0 below zero, (x/R)^2 inside, 1 beyond."""
    x = np.asarray(x, dtype=float)
    out = np.clip(x / region.radius_m, 0.0, 1.0) ** 2
    return out if out.ndim else float(out)


def distance_pdf(x, region):
    x = np.asarray(x, dtype=float)
    R = region.radius_m
    out = np.where((x >= 0) & (x <= R), 2 * x / R**2, 0.0)
    return out if out.ndim else float(out)
