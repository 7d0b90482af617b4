import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mprdisc.signals import (
    lfsr_bits,
    msequence,
    signature_bank,
    synthesize,
    write_signatures_csv,
)


def test_lfsr_period_and_balance():
    bits = lfsr_bits(4, (4, 1, 0))
    assert bits.size == 15
    assert bits.sum() == 8


def test_non_primitive_polynomial_rejected():
    # x^4 + x^2 + 1 = (x^2 + x + 1)^2 has period 6
    with pytest.raises(ValueError):
        lfsr_bits(4, (4, 2, 0))
    with pytest.raises(ValueError):
        lfsr_bits(4, (3, 1, 0))
    with pytest.raises(ValueError):
        lfsr_bits(4, (4, 1, 0), seed_state=0)


@pytest.mark.parametrize("m,taps", [(3, (3, 1, 0)), (4, (4, 1, 0)), (5, (5, 2, 0)), (7, (7, 1, 0))])
def test_two_valued_autocorrelation(m, taps):
    chips = msequence(m, taps).chips
    L = 2**m - 1
    for lag in range(L):
        c = float(chips @ np.roll(chips, lag))
        assert c == (L if lag == 0 else -1)


def test_bank_rows_are_distinct_shifts():
    S = signature_bank(range(8))
    assert S.shape == (8, 15)
    G = S @ S.T
    assert np.array_equal(G, 16 * np.eye(8) - 1)
    with pytest.raises(ValueError):
        signature_bank(range(16))


def test_shift_convention():
    base = msequence().chips
    assert np.array_equal(msequence(shift=3).chips, np.roll(base, -3))


@given(st.floats(0.1, 10), st.floats(0.1, 10))
def test_noiseless_superposition(a, b):
    S = signature_bank(range(3))
    y = synthesize({0, 2}, {0: a, 2: b}, S, 0.0)
    assert np.allclose(y, a * S[0] + b * S[2])


def test_noise_variance_real_and_complex():
    S = signature_bank(range(1))
    ys = np.array([synthesize(set(), {}, S, 2.0, seed=s) for s in range(2000)])
    assert ys.var() == pytest.approx(2.0, rel=0.05)
    yc = np.array([synthesize({0}, {0: 0j}, S, 2.0, seed=s) for s in range(2000)])
    assert np.iscomplexobj(yc)
    assert yc.real.var() == pytest.approx(1.0, rel=0.05)
    assert np.mean(np.abs(yc) ** 2) == pytest.approx(2.0, rel=0.05)


def test_missing_amplitude_raises():
    with pytest.raises(KeyError):
        synthesize({1}, {}, signature_bank(range(2)), 0.0)


def test_signature_csv(tmp_path):
    path = tmp_path / "sig.csv"
    write_signatures_csv(path, signature_bank(range(2)), node_ids=[5, 6])
    rows = path.read_text().splitlines()
    assert rows[0].split(",")[:2] == ["node", "chip1"]
    assert [r.split(",")[0] for r in rows[1:]] == ["5", "6"]
