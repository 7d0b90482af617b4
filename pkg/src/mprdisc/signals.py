"""Signature sequences and chip-level received-vector synthesis."""
import csv
from dataclasses import dataclass

import numpy as np

from mprdisc._random import make_rng

# x^4 + x + 1
DEFAULT_TAPS = (4, 1, 0)


@dataclass(frozen=True)
class Signature:
    chips: np.ndarray
    node_id: int | None = None

    def __len__(self):
        return len(self.chips)


def lfsr_bits(register_len, taps, seed_state=1):
    """One period of the binary sequence of a Fibonacci LFSR.

    ``taps`` lists the exponents of the feedback polynomial, e.g. ``(4, 1, 0)``
    for x^4 + x + 1. Raises ``ValueError`` when the period is not 2^m - 1.
    """
    m = register_len
    exps = set(taps)
    if m not in exps or 0 not in exps or max(exps) != m:
        raise ValueError(f"taps {taps} do not describe a degree-{m} polynomial with constant term")
    coeffs = [i for i in exps if i < m]
    state = [(seed_state >> i) & 1 for i in range(m)]
    if not any(state):
        raise ValueError("LFSR seed state must be nonzero")
    start = list(state)
    period = 2**m - 1
    bits = []
    for n in range(period):
        bits.append(state[0])
        fb = 0
        for c in coeffs:
            fb ^= state[c]
        state = state[1:] + [fb]
        if state == start and n < period - 1:
            raise ValueError(f"polynomial with taps {taps} is not primitive (period {n + 1})")
    if state != start:
        raise ValueError(f"polynomial with taps {taps} is not primitive")
    return np.array(bits, dtype=np.int8)


def msequence(register_len=4, taps=DEFAULT_TAPS, shift=0, node_id=None):
    """Antipodal m-sequence (bit 1 -> +1, bit 0 -> -1) cyclically shifted left by ``shift``."""
    bits = lfsr_bits(register_len, taps)
    chips = np.where(bits == 1, 1.0, -1.0)
    return Signature(chips=np.roll(chips, -shift), node_id=node_id)


def signature_bank(node_ids, register_len=4, taps=DEFAULT_TAPS):
    """Distinct cyclic shifts of one m-sequence, one per node; rows follow ``node_ids``."""
    node_ids = list(node_ids)
    period = 2**register_len - 1
    if len(node_ids) > period:
        raise ValueError(f"only {period} distinct shifts available for {len(node_ids)} nodes")
    base = msequence(register_len, taps).chips
    return np.stack([np.roll(base, -i) for i in range(len(node_ids))])


def synthesize(transmitters, amplitudes, signatures, noise_power, seed=0):
    """Sum of amplitude-weighted signatures of ``transmitters`` plus white Gaussian noise.

    ``signatures`` maps node id to a chip vector (a dict or a 2-D array indexed by id).
    Real amplitudes give a real vector with noise variance ``noise_power``; complex
    amplitudes give complex baseband with variance ``noise_power / 2`` per component.
    """
    transmitters = sorted(transmitters)
    L = _length(signatures, transmitters)
    complex_ = any(np.iscomplexobj(np.asarray(amplitudes[k])) for k in transmitters if k in amplitudes)
    y = np.zeros(L, dtype=complex if complex_ else float)
    for k in transmitters:
        if k not in amplitudes:
            raise KeyError(f"no amplitude for transmitter {k}")
        s = _chips(signatures, k)
        if len(s) != L:
            raise ValueError("signature lengths differ")
        y = y + amplitudes[k] * s
    if noise_power > 0:
        rng = make_rng(seed)
        if complex_:
            y = y + np.sqrt(noise_power / 2) * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
        else:
            y = y + np.sqrt(noise_power) * rng.standard_normal(L)
    return y


def _chips(signatures, k):
    try:
        s = signatures[k]
    except (KeyError, IndexError):
        raise KeyError(f"no signature for transmitter {k}") from None
    return np.asarray(getattr(s, "chips", s), dtype=float)


def _length(signatures, transmitters):
    if isinstance(signatures, np.ndarray):
        return signatures.shape[1]
    if transmitters:
        return len(_chips(signatures, transmitters[0]))
    first = next(iter(signatures.values()))
    return len(getattr(first, "chips", first))


def write_signatures_csv(path, signatures, node_ids=None):
    sig = np.asarray(signatures)
    node_ids = range(len(sig)) if node_ids is None else node_ids
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["node"] + [f"chip{i + 1}" for i in range(sig.shape[1])])
        for nid, row in zip(node_ids, sig):
            w.writerow([nid] + [int(c) for c in row])
