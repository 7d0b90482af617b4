"""Command-line front end: ``mprdisc {analyze,simulate,detect,selftest}``."""
import argparse
import csv
import json
import os
import sys

import numpy as np

from mprdisc import analysis
from mprdisc.config import ConfigError, ExperimentConfig
from mprdisc.deployment import DiskRegion, sample_uniform_disk
from mprdisc.sim import (
    SCRIPTED_PATTERN,
    MatchedFilterDetector,
    OracleDetector,
    RstMapDetector,
    indexed_pattern,
    load_role_pattern,
    detector_suite,
    replicate,
    run_discovery,
    run_paired_detection,
)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

# deployment seed of the scripted three-node example
FIG3_DEPLOYMENT_SEED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(type(o))


# ---------------------------------------------------------------------------
# analyze


def _taus(cfg):
    return np.logspace(np.log10(cfg.tau_min), np.log10(cfg.tau_max), cfg.tau_points)


def analyze_fig1(cfg):
    eta = cfg.path_loss_eta
    rows = []
    for tau in _taus(cfg):
        p = analysis.optimal_pt(tau, eta)
        rows.append((tau, p, analysis.three_node_expected_successes(p, tau, eta)))
    return ["tau", "pt_star", "e_star"], rows


def analyze_fig2(cfg):
    rows = []
    for M in (2, 4, 8):
        params = cfg.mpsk(M)
        for tau in _taus(cfg):
            rows.append((tau, M, analysis.nodes_per_second(tau, params, cfg.path_loss_eta)))
    return ["tau", "M", "nodes_per_sec"], rows


def _three_node_ctx(cfg):
    from mprdisc.channel import simplified_channel

    p = analysis.optimal_pt(cfg.tau, cfg.path_loss_eta)
    return analysis.CaptureContext(J=2, p_T=p, tau=cfg.tau,
                                   channel=simplified_channel(cfg.path_loss_eta),
                                   samples=cfg.mc_samples, seed=cfg.seed)


def fig3_run(cfg):
    """Scripted three-node run seen from node A; returns (header, rows, replicated_rows)."""
    ctx = _three_node_ctx(cfg)
    protocol = analysis_protocol(ctx)
    region = DiskRegion(1.0)
    dep = sample_uniform_disk(2, region, seed=FIG3_DEPLOYMENT_SEED)
    pattern = indexed_pattern(SCRIPTED_PATTERN)
    slots = len(SCRIPTED_PATTERN["A"])
    run = run_discovery(dep, protocol, OracleDetector(), max_slots=slots, seed=cfg.seed,
                        role_pattern=pattern)
    e_star = analysis.three_node_expected_successes(ctx.p_T, ctx.tau, ctx.eta)
    sb = analysis.slot_basis_curve(run.successes, 2)
    rows = [(t + 1, run.fraction[t], sb[t], analysis.bernoulli_prediction(t + 1, e_star, 2))
            for t in range(slots)]
    rep = replicate(protocol, cfg.trials, base_seed=cfg.seed, n_neighbors=2, region=region,
                    slots=slots, role_pattern=pattern)
    rep_rows = [(t + 1, rep.mean_fraction[t], rep.stderr_fraction[t]) for t in range(slots)]
    return ["slot", "actual_fraction", "slot_basis", "bernoulli"], rows, rep_rows


def analysis_protocol(ctx):
    from mprdisc.sim import ProtocolConfig

    return ProtocolConfig(ctx.channel, ctx.p_T, ctx.tau, ctx.include_noise)


def analyze_fig4(cfg, points=101):
    ctx = _three_node_ctx(cfg)
    rows = [(r, analysis.conditional_membership(r, 1, ctx)) for r in np.linspace(0.0, 1.0, points)]
    return ["r_prime", "probability"], rows


def cmd_analyze(args, cfg):
    targets = ["fig1", "fig2", "fig3", "fig4"] if args.target == "all" else [args.target]
    out = _outdir(args, cfg)
    for t in targets:
        if t == "fig3":
            header, rows, rep = fig3_run(cfg)
            write_csv(os.path.join(out, "fig3_replicated.csv"),
                      ["slot", "mean_fraction", "stderr_fraction"], rep)
        else:
            header, rows = {"fig1": analyze_fig1, "fig2": analyze_fig2, "fig4": analyze_fig4}[t](cfg)
        path = os.path.join(out, f"{t}.csv")
        write_csv(path, header, rows)
        print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _detector_factory(cfg, name):
    if name in (None, "oracle"):
        return None
    ch = cfg.channel()

    def make(dep):
        dets = detector_suite(dep, ch, cfg.p_T, cfg.region_radius_m,
                               r0_values=[cfg.discovery_radius_m], strips=cfg.grid_points)
        if name == "mf":
            return dets["mf"]
        return next(d for d in dets.values() if isinstance(d, RstMapDetector))

    return make


def cmd_simulate(args, cfg):
    out = _outdir(args, cfg)
    pattern = None
    if args.pattern:
        _, pattern = load_role_pattern(args.pattern)
    protocol = cfg.protocol()
    region = DiskRegion(cfg.region_radius_m)
    summary = replicate(protocol, cfg.trials, base_seed=cfg.seed, n_neighbors=cfg.n_nodes,
                        region=region, slots=cfg.slots,
                        detector_factory=_detector_factory(cfg, args.detector),
                        role_pattern=pattern, early_stop_window=cfg.early_stop_window)
    rows = [(t + 1, summary.mean_successes[t], summary.stderr_successes[t],
             summary.mean_fraction[t], summary.stderr_fraction[t]) for t in range(cfg.slots)]
    write_csv(os.path.join(out, "trace.csv"),
              ["slot", "mean_successes", "stderr_successes", "mean_fraction", "stderr_fraction"], rows)
    report = {"config": cfg.to_dict(), "derived": cfg.derived(), "detector": args.detector or "oracle",
              "summary": summary.as_dict()}
    if cfg.path_loss == "simplified" and not cfg.include_noise and cfg.fading == "none":
        ctx = analysis.CaptureContext(J=cfg.n_nodes, p_T=cfg.p_T, tau=cfg.tau,
                                      channel=protocol.channel, region=region,
                                      samples=cfg.mc_samples, seed=cfg.seed)
        report["analytic_expected_successes_per_slot"] = analysis.expected_successes_per_slot(ctx)
    write_json(os.path.join(out, "summary.json"), report)
    print(json.dumps({"mean_successes_slot1": float(summary.mean_successes[0]),
                      "stderr": float(summary.stderr_successes[0])}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# detect


def _select(dets, detector, r0_given):
    if detector == "mf":
        return {"mf": dets["mf"]}
    if detector == "rst":
        return {k: v for k, v in dets.items() if k != "mf"}
    if detector == "oracle":
        return {"oracle": OracleDetector(), **{k: v for k, v in dets.items() if k == "mf"}}
    return dets


def _detectors_for(dep, cfg, args):
    r0 = [args.r0] if args.r0 else None
    dets = detector_suite(dep, cfg.channel(), cfg.p_T, cfg.region_radius_m, r0_values=r0,
                           strips=cfg.grid_points)
    return _select(dets, args.detector, args.r0)


def cmd_detect(args, cfg):
    from mprdisc.fixtures import load_fixture

    out = _outdir(args, cfg)
    protocol = cfg.protocol()
    if args.scenario in ("deploy1", "deploy2"):
        dep = load_fixture(args.scenario)
        reports = run_paired_detection(dep, protocol, _detectors_for(dep, cfg, args),
                                       slots=cfg.slots, seed=cfg.seed)
        tallies = {}
        for name, rep in reports.items():
            write_csv(os.path.join(out, f"grid_{name}.csv"),
                      ["node"] + [str(t + 1) for t in range(cfg.slots)], rep.grid_rows())
            tallies[name] = rep.tally.as_dict()
        write_json(os.path.join(out, "tally.json"), {"scenario": args.scenario, "tallies": tallies,
                                                    "derived": cfg.derived()})
        print(json.dumps(tallies, sort_keys=True))
        return EXIT_OK
    per_rep = []
    totals = {}
    region = DiskRegion(cfg.region_radius_m)
    for i in range(cfg.trials):
        dep = sample_uniform_disk(cfg.n_nodes, region, seed=(cfg.seed * 1_000_003 + i))
        reports = run_paired_detection(dep, protocol, _detectors_for(dep, cfg, args),
                                       slots=cfg.slots, seed=(cfg.seed, i))
        for name, rep in reports.items():
            d = rep.tally.as_dict()
            per_rep.append((i, name, d["hits"], d["correct_rejections"], d["false_alarms"],
                            d["misses"], d["misses_out_of_range"]))
            t = totals.setdefault(name, {k: 0 for k in d})
            for k, v in d.items():
                t[k] += v
    write_csv(os.path.join(out, "replications.csv"),
              ["replication", "detector", "hits", "correct_rejections", "false_alarms", "misses",
               "misses_out_of_range"], per_rep)
    write_json(os.path.join(out, "tally.json"),
               {"scenario": "random", "replications": cfg.trials, "tallies": totals,
                "derived": cfg.derived()})
    print(json.dumps(totals, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args, cfg):
    from mprdisc.selftest import run_all

    results = run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAILED


# ---------------------------------------------------------------------------


def _outdir(args, cfg):
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def build_parser():
    p = _Parser(prog="mprdisc", description=__doc__)
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--trials", type=int)
    common.add_argument("--detector", choices=["mf", "rst", "oracle"])
    common.add_argument("--r0", type=float, metavar="METERS", help="discovery radius of the MAP detector")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", parents=[common], help="closed-form curves as CSV")
    a.add_argument("target", choices=["fig1", "fig2", "fig3", "fig4", "all"])
    s = sub.add_parser("simulate", parents=[common], help="replicated protocol simulation")
    s.add_argument("--pattern", metavar="CSV", help="scripted transmit/listen pattern")
    d = sub.add_parser("detect", parents=[common], help="paired detector comparison")
    d.add_argument("scenario", choices=["deploy1", "deploy2", "random"])
    sub.add_parser("selftest", parents=[common], help="run the built-in invariant checks")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.r0 is not None:
            overrides["discovery_radius_m"] = args.r0
        if overrides:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    except ConfigError as e:
        print(f"mprdisc: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"mprdisc: {e}", file=sys.stderr)
        return EXIT_USAGE
    cmd = {"analyze": cmd_analyze, "simulate": cmd_simulate, "detect": cmd_detect,
           "selftest": cmd_selftest}[args.command]
    return cmd(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
