import numpy as np
import pytest

from mprdisc import analysis
from mprdisc.channel import ChannelParams, simplified_channel
from mprdisc.deployment import DiskRegion, sample_uniform_disk
from mprdisc.fixtures import FIXTURE_SEEDS, generate_fixture, load_fixture
from mprdisc.sim import (
    SCRIPTED_PATTERN,
    MatchedFilterDetector,
    OracleDetector,
    ProtocolConfig,
    indexed_pattern,
    load_role_pattern,
    detector_suite,
    replicate,
    run_discovery,
    run_paired_detection,
    run_slot,
    write_role_pattern,
)

THREE = ProtocolConfig(simplified_channel(), 0.4226, 1.0)


def test_run_slot_is_reproducible_and_consistent():
    dep = sample_uniform_disk(6, DiskRegion(1000.0), seed=1)
    ch = ChannelParams()
    a = run_slot(dep, ch, 0.5, 1.0, seed=3, slot_index=4, reference_always_listens=True)
    b = run_slot(dep, ch, 0.5, 1.0, seed=3, slot_index=4, reference_always_listens=True)
    assert a.truth_tx_set == b.truth_tx_set and a.success_set == b.success_set
    assert a.success_set <= a.truth_tx_set
    assert a.reference_listens


def test_transmitting_reference_receives_nothing():
    dep = sample_uniform_disk(2, DiskRegion(1.0), seed=0)
    s = run_slot(dep, simplified_channel(), 0.5, 1.0, 0, 0, roles={0: "T", 1: "T"})
    assert not s.reference_listens
    assert s.success_set == frozenset()


def test_table_pattern_success_counts():
    pattern = indexed_pattern(SCRIPTED_PATTERN)
    dep = sample_uniform_disk(2, DiskRegion(1.0), seed=3)
    run = run_discovery(dep, THREE, max_slots=15, role_pattern=pattern)
    a, b, c = SCRIPTED_PATTERN.values()
    expected = [int(x == "L" and (y == "T" or z == "T")) for x, y, z in zip(a, b, c)]
    assert run.successes == expected
    assert all(np.diff(run.fraction) >= 0)


def test_early_stop():
    dep = sample_uniform_disk(3, DiskRegion(1.0), seed=0)
    run = run_discovery(dep, THREE, max_slots=500, early_stop_window=5, seed=1)
    assert run.states[-1].terminated
    assert len(run.decided) < 500


def test_replicated_three_node_mean_matches_closed_form():
    s = replicate(THREE, trials=4000, base_seed=5, n_neighbors=2, slots=1)
    e = analysis.three_node_expected_successes(0.4226, 1.0)
    assert abs(s.mean_successes[0] - e) < 4 * s.stderr_successes[0]


def test_paired_detection_shares_realizations():
    dep = load_fixture("deploy1")
    dets = detector_suite(dep, ChannelParams(), 0.5, 1000.0)
    dets["oracle"] = OracleDetector()
    reports = run_paired_detection(dep, ProtocolConfig(), dets, slots=3, seed=2)
    truth = {name: [[g[k][t] in "HM" for k in dep.neighbor_ids] for t in range(3)]
             for name, g in ((n, r.grid) for n, r in reports.items())}
    first = next(iter(truth.values()))
    assert all(v == first for v in truth.values())
    assert reports["rst_r0_500"].out_of_range == {k for k in dep.neighbor_ids
                                                   if dep.distances()[k] > 500}


def test_matched_filter_detector_grid(tmp_path):
    dep = sample_uniform_disk(3, DiskRegion(1000.0), seed=4)
    det = detector_suite(dep, ChannelParams(), 0.5, 1000.0)["mf"]
    assert isinstance(det, MatchedFilterDetector)
    run = run_discovery(dep, ProtocolConfig(), det, max_slots=6, seed=0)
    rows = run.report.grid_rows()
    assert len(rows) == 3 and all(len(r) == 7 for r in rows)


def test_role_pattern_roundtrip(tmp_path):
    path = tmp_path / "p.csv"
    write_role_pattern(path, SCRIPTED_PATTERN)
    names, pattern = load_role_pattern(path)
    assert names == ["A", "B", "C"]
    assert pattern == indexed_pattern(SCRIPTED_PATTERN)
    bad = tmp_path / "bad.csv"
    bad.write_text("A,T,X\n")
    with pytest.raises(ValueError):
        load_role_pattern(bad)


@pytest.mark.parametrize("name", sorted(FIXTURE_SEEDS))
def test_fixtures_regenerate_from_seed(name):
    dep = load_fixture(name)
    assert dep.n_nodes == 9
    assert np.allclose(generate_fixture(name).positions, dep.positions)
    assert dep.distances().max() <= 1000.0


@pytest.mark.parametrize("tau", [0.5, 3.0])
def test_batch_slot_matches_closed_form(tau):
    from mprdisc.sim import batch_slot_successes

    h = batch_slot_successes(2, 0.3, tau, simplified_channel(), DiskRegion(1.0), 200_000, seed=1)
    e = analysis.three_node_expected_successes(0.3, tau)
    assert abs(h.mean() - e) < 4 * h.std(ddof=1) / np.sqrt(h.size)
