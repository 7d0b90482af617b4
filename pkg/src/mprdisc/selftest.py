"""Fast invariant checks behind ``mprdisc selftest``."""
import numpy as np

from mprdisc import analysis, kernels, rfs
from mprdisc.detectors import RstDetectorConfig, rst_log_marginal_likelihood
from mprdisc.channel import simplified_channel
from mprdisc.signals import signature_bank


def _check(name, fn):
    try:
        detail = fn()
        return name, True, detail or ""
    except Exception as e:  # a crash is reported as a failed check
        return name, False, f"{type(e).__name__}: {e}"


def _optimal_pt():
    p = analysis.optimal_pt(1.0, 4.0)
    e = analysis.three_node_expected_successes(p, 1.0, 4.0)
    assert abs(p - 0.4226) < 1e-4, f"p*={p}"
    assert abs(e - 0.3849) < 1e-4, f"E*={e}"
    return f"p*={p:.4f} E*={e:.4f}"


def _mobius_roundtrip():
    rng = np.random.default_rng(0)
    pmf = rng.random(1 << 4)
    pmf /= pmf.sum()
    f = rfs.SetFunction(tuple(range(4)), pmf)
    back = rfs.mobius_inverse(rfs.belief_mass_from_pmf(f))
    assert np.allclose(back.table, pmf, atol=1e-12), "Mobius inverse does not recover pmf"


def _kernel_matches_direct():
    sigs = signature_bank(range(4)).astype(float)
    y = 2 * sigs[0] + 1.5 * sigs[2] + np.random.default_rng(1).normal(0, 0.5, 15)
    cfg = RstDetectorConfig(discovery_radius_R0=1.0, cardinality_prior=rfs.BinomialPrior(4, 0.5),
                            amplitude_grid=(1.0, 2.0), p_T=0.5, signatures=sigs,
                            universe=tuple(range(4)))
    table = kernels.subset_log_marginals(y, sigs, cfg.amplitude_grid, 0.25)
    for mask in (0, 0b101, 0b1111):
        direct = rst_log_marginal_likelihood(y, rfs.members_of(mask, range(4)), cfg, 0.25)
        assert abs(table[mask] - direct) < 1e-8, f"mask {mask}: {table[mask]} vs {direct}"
    return f"backend={kernels.BACKEND}"


def _capture_closed_form():
    kw = dict(channel=simplified_channel(4.0), samples=20000, seed=0)
    mc = analysis.capture_prob_mc(2, 1.0, **kw)
    exact = analysis.capture_prob(2, 1.0, **kw)
    assert abs(mc.value - exact) < 5 * mc.stderr + 1e-3, f"{mc.value} vs {exact}"


def run_all():
    return [
        _check("optimal_pt", _optimal_pt),
        _check("mobius_roundtrip", _mobius_roundtrip),
        _check("kernel_vs_direct", _kernel_matches_direct),
        _check("capture_closed_form", _capture_closed_form),
    ]
