"""Slotted random-access neighbor discovery driven over a deployment.

Every slot each node independently transmits with probability ``p_T`` or
listens. The reference node (index 0) discovers a neighbor when the neighbor's
pilot is decided present in a slot where the reference listens. Deciding can
use the SINR ground truth directly (``OracleDetector``) or one of the
physical-layer detectors applied to the synthesized chip vector.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from mprdisc._random import make_rng
from mprdisc.channel import ChannelParams, sample_powers, success_set
from mprdisc.deployment import DiskRegion, sample_uniform_disk
from mprdisc.detectors import (
    MatchedFilterConfig,
    RstDetectorConfig,
    Tally,
    classify_outcomes,
    matched_filter_decide,
    rst_map_decide,
)
from mprdisc.signals import signature_bank, synthesize

TRANSMIT, LISTEN = "T", "L"

# Transmit/listen pattern of three nodes A, B, C over 15 slots; A is the reference.
SCRIPTED_PATTERN = {
    "A": "TTLLTLTLLTTLTTL",
    "B": "LLTLTTLTLLLLTTT",
    "C": "LTTLTLLTTTTTTTL",
}


# spawn-key tag that keeps batch draws apart from per-slot streams
_BATCH_STREAM = 1 << 20


def _rng(seed, *key):
    if isinstance(seed, tuple):
        return make_rng(seed[0], *seed[1:], *key)
    return make_rng(seed, *key)


@dataclass(frozen=True)
class ProtocolConfig:
    channel: ChannelParams = field(default_factory=ChannelParams)
    p_T: float = 0.5
    tau: float = 1.0
    include_noise: bool = False
    reference_always_listens: bool = False

    def __post_init__(self):
        if not 0 <= self.p_T <= 1:
            raise ValueError("p_T must lie in [0, 1]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass
class SlotRealization:
    slot_index: int
    roles: dict
    truth_tx_set: frozenset
    amplitudes: dict
    powers: dict
    success_set: frozenset
    received: np.ndarray | None = None

    @property
    def reference_listens(self):
        return self.roles[0] == LISTEN


@dataclass(frozen=True)
class DiscoveryState:
    discovered: frozenset = frozenset()
    last_new_discovery_slot: int | None = None
    terminated: bool = False


def run_slot(deployment, channel, p_T, tau, seed, slot_index, *, roles=None,
             include_noise=False, signatures=None, reference_always_listens=False):
    """Draw roles, received powers and the SINR success set for one slot.

    ``roles`` optionally scripts the roles as ``{node: "T" | "L"}``; missing
    nodes are drawn at random. ``signatures`` maps neighbor id to chips; when
    given and the reference listens, the received chip vector is synthesized.
    """
    rng = _rng(seed, slot_index)
    n = deployment.n_nodes
    ref = deployment.reference_index
    draws = rng.random(n) < p_T
    role = {i: TRANSMIT if draws[i] else LISTEN for i in range(n)}
    if roles:
        role.update(roles)
    if reference_always_listens:
        role[ref] = LISTEN
    if role[ref] == TRANSMIT:
        return SlotRealization(slot_index, role, frozenset(), {}, {}, frozenset())
    tx = [i for i in deployment.neighbor_ids if role[i] == TRANSMIT]
    dist = deployment.distances()
    p, g = sample_powers(dist[tx], channel, rng)
    noise = channel.noise_power_N if include_noise else 0.0
    succ = success_set(p, noise, tau, ids=tx)
    amps = dict(zip(tx, g.tolist()))
    received = None
    if signatures is not None:
        received = synthesize(tx, amps, signatures, channel.noise_power_N, seed=rng)
    return SlotRealization(slot_index, role, frozenset(tx), amps, dict(zip(tx, p.tolist())),
                           succ, received)


# ---------------------------------------------------------------------------
# detectors as used by the engine


class OracleDetector:
    """Uses the SINR success set directly."""

    name = "oracle"
    needs_signal = False

    def decide(self, slot):
        return slot.success_set


class MatchedFilterDetector:
    name = "mf"
    needs_signal = True

    def __init__(self, cfg, signatures, universe):
        self.cfg, self.signatures, self.universe = cfg, np.asarray(signatures), tuple(universe)

    def decide(self, slot):
        return matched_filter_decide(slot.received, self.signatures, self.cfg, self.universe).detected_set


class RstMapDetector:
    needs_signal = True

    def __init__(self, cfg, noise, name="rst"):
        self.cfg, self.noise, self.name = cfg, noise, name

    @property
    def signatures(self):
        return self.cfg.signatures

    @property
    def universe(self):
        return self.cfg.universe

    def decide(self, slot):
        return rst_map_decide(slot.received, self.cfg, self.noise).detected_set


def detector_suite(deployment, channel, p_T, region_radius, r0_values=None, strips=7):
    """Matched-filter bank plus one set-valued MAP detector per discovery radius."""
    from mprdisc.channel import mean_rx_power

    universe = deployment.neighbor_ids
    sig = signature_bank(universe)
    N = channel.noise_power_N
    p_bar = mean_rx_power(channel, DiskRegion(region_radius))
    dets = {"mf": MatchedFilterDetector(
        MatchedFilterConfig.min_error(p_T, len(universe), p_bar, N), sig, universe)}
    for r0 in r0_values or (region_radius, region_radius / 2):
        cfg = RstDetectorConfig.build(r0, channel, p_T, sig, universe, R=region_radius, strips=strips)
        name = f"rst_r0_{r0:g}"
        dets[name] = RstMapDetector(cfg, N, name=name)
    return dets


# ---------------------------------------------------------------------------
# runs


@dataclass
class DetectionReport:
    detector: str
    universe: tuple
    grid: dict
    tally: Tally
    out_of_range: frozenset = frozenset()

    def grid_rows(self):
        return [[node] + self.grid[node] for node in self.universe]


@dataclass
class DiscoveryRun:
    states: list
    slots: list
    decided: list
    fraction: list
    report: DetectionReport | None = None

    @property
    def successes(self):
        return [len(d) for d in self.decided]


def _signature_map(detector):
    sig = getattr(detector, "signatures", None)
    if sig is None:
        return None
    return dict(zip(detector.universe, np.asarray(sig)))


def run_discovery(deployment, config, detector=None, max_slots=1, early_stop_window=None,
                  seed=0, role_pattern=None, discovery_radius=None):
    """Iterate slots until ``max_slots`` or ``early_stop_window`` slots pass without a new neighbor.

    ``role_pattern`` maps node index to a per-slot string of T/L letters.
    ``discovery_radius`` only labels out-of-range nodes in the detection report.
    """
    if max_slots < 1:
        raise ValueError("max_slots must be at least 1")
    detector = detector or OracleDetector()
    sigs = _signature_map(detector) if detector.needs_signal else None
    neighbors = deployment.neighbor_ids
    J = len(neighbors)
    state = DiscoveryState(last_new_discovery_slot=None)
    run = DiscoveryRun([], [], [], [])
    track_grid = detector.needs_signal
    grid = {k: [] for k in neighbors}
    tally = Tally()
    oor = _out_of_range(deployment, discovery_radius)
    for t in range(max_slots):
        roles = None
        if role_pattern is not None:
            roles = {node: pat[t] for node, pat in role_pattern.items() if t < len(pat)}
        slot = run_slot(deployment, config.channel, config.p_T, config.tau, seed, t, roles=roles,
                        include_noise=config.include_noise, signatures=sigs,
                        reference_always_listens=config.reference_always_listens)
        decided = detector.decide(slot) if slot.reference_listens else frozenset()
        new = decided - state.discovered
        if new:
            state = DiscoveryState(state.discovered | new, t, False)
        run.slots.append(slot)
        run.decided.append(decided)
        run.fraction.append(len(state.discovered) / J if J else 1.0)
        if track_grid:
            if slot.reference_listens:
                out = classify_outcomes(slot.truth_tx_set, decided, neighbors)
                tally.add(out, oor)
                for k in neighbors:
                    grid[k].append(out[k])
            else:
                for k in neighbors:
                    grid[k].append("-")
        last = state.last_new_discovery_slot
        idle = t + 1 if last is None else t - last
        if early_stop_window is not None and idle >= early_stop_window:
            state = DiscoveryState(state.discovered, last, True)
            run.states.append(state)
            break
        run.states.append(state)
    if track_grid:
        run.report = DetectionReport(detector.name, neighbors, grid, tally, oor)
    return run


def _out_of_range(deployment, radius):
    if radius is None:
        return frozenset()
    d = deployment.distances()
    return frozenset(k for k in deployment.neighbor_ids if d[k] > radius)


def run_paired_detection(deployment, config, detectors, slots=20, seed=0, discovery_radius=None):
    """Apply several detectors to the same slot realizations; returns ``{name: DetectionReport}``."""
    config = ProtocolConfig(config.channel, config.p_T, config.tau, config.include_noise,
                            reference_always_listens=True)
    neighbors = deployment.neighbor_ids
    sigs = next((m for m in map(_signature_map, detectors.values()) if m is not None), None)
    grids = {name: {k: [] for k in neighbors} for name in detectors}
    tallies = {name: Tally() for name in detectors}
    oor_by = {}
    for name, det in detectors.items():
        r0 = getattr(getattr(det, "cfg", None), "discovery_radius_R0", discovery_radius)
        oor_by[name] = _out_of_range(deployment, r0)
    for t in range(slots):
        slot = run_slot(deployment, config.channel, config.p_T, config.tau, seed, t,
                        include_noise=config.include_noise, signatures=sigs,
                        reference_always_listens=True)
        for name, det in detectors.items():
            out = classify_outcomes(slot.truth_tx_set, det.decide(slot), neighbors)
            tallies[name].add(out, oor_by[name])
            for k in neighbors:
                grids[name][k].append(out[k])
    return {name: DetectionReport(name, neighbors, grids[name], tallies[name], oor_by[name])
            for name in detectors}


def batch_slot_successes(J, p_T, tau, channel, region, trials, seed=0, include_noise=False):
    """Successful receptions at the reference in one slot, for ``trials`` independent deployments.

    Vectorized over trials; the reference transmits with probability ``p_T`` like
    every neighbor and then receives nothing.
    """
    rng = _rng(seed, _BATCH_STREAM)
    listens = rng.random(trials) >= p_T
    tx = rng.random((trials, J)) < p_T
    r = region.radius_m * np.sqrt(rng.random((trials, J)))
    p, _ = sample_powers(r, channel, rng)
    p = np.where(tx, p, 0.0)
    noise = channel.noise_power_N if include_noise else 0.0
    interference = p.sum(axis=1, keepdims=True) - p + noise
    ok = tx & (p >= tau * interference) & listens[:, None]
    return ok.sum(axis=1)


@dataclass
class ReplicationSummary:
    trials: int
    slots: int
    mean_successes: np.ndarray
    stderr_successes: np.ndarray
    mean_fraction: np.ndarray
    stderr_fraction: np.ndarray
    tally: Tally | None = None

    def as_dict(self):
        d = {
            "trials": self.trials,
            "slots": self.slots,
            "mean_successes_per_slot": self.mean_successes.tolist(),
            "stderr_successes_per_slot": self.stderr_successes.tolist(),
            "mean_fraction_discovered": self.mean_fraction.tolist(),
            "stderr_fraction_discovered": self.stderr_fraction.tolist(),
        }
        if self.tally is not None:
            d["tally"] = self.tally.as_dict()
        return d


def replicate(config, trials, base_seed=0, n_neighbors=2, region=DiskRegion(1.0), slots=1,
              detector_factory=None, role_pattern=None, early_stop_window=None):
    """Independent trials, each on a fresh uniform deployment; aggregates in trial order.

    ``detector_factory(deployment)`` builds the detector for a trial (oracle when omitted).
    Trials stopped early hold their final state for the remaining slots.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    succ = np.zeros((trials, slots))
    frac = np.zeros((trials, slots))
    tally = None
    for i in range(trials):
        dep = sample_uniform_disk(n_neighbors, region, seed=_rng((base_seed, i), 0))
        det = detector_factory(dep) if detector_factory else None
        run = run_discovery(dep, config, det, max_slots=slots, seed=(base_seed, i, 1),
                            role_pattern=role_pattern, early_stop_window=early_stop_window)
        n = len(run.decided)
        succ[i, :n] = run.successes
        frac[i, :n] = run.fraction
        frac[i, n:] = run.fraction[-1]
        if run.report is not None:
            tally = tally or Tally()
            for key, v in run.report.tally.as_dict().items():
                setattr(tally, key, getattr(tally, key) + v)

    def se(a):
        return a.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.full(slots, np.nan)

    return ReplicationSummary(trials, slots, succ.mean(axis=0), se(succ), frac.mean(axis=0),
                              se(frac), tally)


# ---------------------------------------------------------------------------
# role pattern files


def load_role_pattern(path):
    """Read a CSV whose rows are ``name,L,T,...``; the first row is the reference node.

    Returns ``(names, {node_index: "LT..."})``.
    """
    names, pattern = [], {}
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#"):
                continue
            letters = "".join(c.strip().upper() for c in row[1:])
            if set(letters) - {TRANSMIT, LISTEN}:
                raise ValueError(f"row {row[0]!r} contains letters other than T and L")
            pattern[len(names)] = letters
            names.append(row[0])
    return names, pattern


def write_role_pattern(path, named_pattern):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        for name, letters in named_pattern.items():
            w.writerow([name, *letters])


def indexed_pattern(named_pattern):
    return {i: letters for i, letters in enumerate(named_pattern.values())}
