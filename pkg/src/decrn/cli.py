"""Command-line front end.

Subcommands: analyze, certify, equilibrium, simulate, chain-compare,
reproduce-paper.  Exit codes: 0 success, 2 parse error, 3 capability
limit, 4 unmet precondition, 5 numeric failure.  Runs are deterministic;
the default --seedless-deterministic flag additionally pins the manifest
wall-clock field to zero so repeated runs produce byte-identical output
trees.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .certify import certify, stability_statement
from .dynamics import (
    SolverConfig,
    chain_approximation,
    check_descent,
    conservation_drift,
    integrate_dde,
    min_profile,
)
from .equilibrium import complex_balance_residual, equilibrium_in_class, solve_complex_balanced
from .errors import CrnError, PreconditionError
from .geometry import conserved_basis
from .history import history_from_json, load_history
from .model import ReactionNetwork
from .netparse import parse_network
from .report import (
    RunManifest,
    certificate_to_dict,
    equilibrium_to_dict,
    plot_data_text,
    structure_to_dict,
    trajectory_csv_text,
    write_json,
    write_text,
)
from .structure import analyze_structure, enumerate_semilocking

DEFAULT_T_END = 60.0
DEFAULT_DT = 0.005
DEFAULT_STRIDE = 20


def _load_network(path: str) -> ReactionNetwork:
    return parse_network(Path(path).read_text())


def _emit(doc: dict, json_path: str | None) -> list[Path]:
    if json_path:
        write_json(json_path, doc)
        return [Path(json_path)]
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return []


def _maybe_manifest(args, command: str, inputs: list[str], config: dict,
                    outputs: list[Path], elapsed: float) -> None:
    path = getattr(args, "manifest", None)
    if not path:
        return
    manifest = RunManifest(
        command=command,
        inputs=[str(p) for p in inputs],
        config=config,
        version=__version__,
        wall_clock_seconds=0.0 if args.seedless_deterministic else elapsed,
        outputs=[str(p) for p in outputs],
    )
    write_json(path, manifest.to_dict())


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    network = _load_network(args.network)
    report = analyze_structure(network)
    catalog = enumerate_semilocking(network)
    doc = structure_to_dict(network, report, catalog, conserved_basis(network))
    outputs = _emit(doc, args.json)
    _maybe_manifest(args, "analyze", [args.network], {}, outputs,
                    time.perf_counter() - started)
    return 0


def cmd_certify(args) -> int:
    started = time.perf_counter()
    network = _load_network(args.network)
    history = None
    if args.history:
        history = load_history(args.history, tau_max=network.tau_max,
                               n_species=network.n_species)
    certificate = certify(network, history)
    stability = None
    if certificate.verdict == "Persistent":
        stability = stability_statement(network, history, certificate)
    doc = certificate_to_dict(certificate, stability)
    outputs = _emit(doc, args.json)
    inputs = [args.network] + ([args.history] if args.history else [])
    _maybe_manifest(args, "certify", inputs, {}, outputs, time.perf_counter() - started)
    if certificate.cb_residual is None:
        print(f"certification unavailable: {certificate.notes[0]}", file=sys.stderr)
        return 4
    return 0


def cmd_equilibrium(args) -> int:
    started = time.perf_counter()
    network = _load_network(args.network)
    balanced = solve_complex_balanced(network)
    in_class = None
    if args.history:
        history = load_history(args.history, tau_max=network.tau_max,
                               n_species=network.n_species)
        in_class = equilibrium_in_class(network, history, base=balanced)
    doc = equilibrium_to_dict(balanced, in_class)
    outputs = _emit(doc, args.json)
    inputs = [args.network] + ([args.history] if args.history else [])
    _maybe_manifest(args, "equilibrium", inputs, {}, outputs, time.perf_counter() - started)
    return 0


def _reference_equilibrium(network: ReactionNetwork, history):
    """In-class equilibrium for monitoring, or None for unbalanced networks."""
    try:
        base = solve_complex_balanced(network)
        return equilibrium_in_class(network, history, base=base).point
    except (PreconditionError, CrnError):
        return None


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    network = _load_network(args.network)
    history = load_history(args.history, tau_max=network.tau_max,
                           n_species=network.n_species)
    config = SolverConfig(step=args.dt, t_end=args.t_end, monitor_stride=args.monitor_stride)
    reference = _reference_equilibrium(network, history)
    if reference is None:
        print("note: no complex-balanced equilibrium; entropy column will be nan",
              file=sys.stderr)
    trajectory = integrate_dde(network, history, config, equilibrium=reference)
    out = Path(args.out)
    write_text(out, trajectory_csv_text(trajectory))
    outputs = [out]
    if args.plot_data:
        for j, name in enumerate(network.species):
            data_path = out.with_name(f"{out.stem}_{name}.dat")
            write_text(data_path, plot_data_text(trajectory, j))
            outputs.append(data_path)
    if args.plot:
        from .plots import plot_trajectory

        png = out.with_suffix(".png")
        plot_trajectory(trajectory, network.species, png)
        outputs.append(png)
    config_echo = {"t_end": args.t_end, "dt": args.dt, "monitor_stride": args.monitor_stride}
    _maybe_manifest(args, "simulate", [args.network, args.history], config_echo,
                    outputs, time.perf_counter() - started)
    final = ", ".join(f"{v:.6g}" for v in trajectory.final_state)
    print(f"integrated to t={trajectory.times[-1]:g}; final state ({final})")
    return 0


def cmd_chain_compare(args) -> int:
    started = time.perf_counter()
    network = _load_network(args.network)
    history = load_history(args.history, tau_max=network.tau_max,
                           n_species=network.n_species)
    stage_counts = [int(v) for v in args.N.split(",") if v.strip()]
    if not stage_counts:
        raise PreconditionError("need at least one chain length in --N")
    config = SolverConfig(step=args.dt, t_end=args.t_end, monitor_stride=args.monitor_stride)
    reference = integrate_dde(network, history, config)
    gaps = []
    for n_stages in stage_counts:
        chain = chain_approximation(network, history, n_stages, config)
        gaps.append(float(np.abs(chain.states - reference.states).max()))
    monotone = all(gaps[i + 1] <= gaps[i] * 1.1 for i in range(len(gaps) - 1))
    print(f"{'N':>6}  {'sup_gap':>14}  {'ratio':>8}")
    for i, (n_stages, gap) in enumerate(zip(stage_counts, gaps)):
        ratio = ""
        if i > 0 and gaps[i - 1] > 0.0:
            ratio = f"{gaps[i] / gaps[i - 1]:8.3f}"
        print(f"{n_stages:>6}  {gap:14.6e}  {ratio:>8}")
    if not monotone:
        print("warning: gaps are not non-increasing within the 10% noise band",
              file=sys.stderr)
    outputs: list[Path] = []
    doc = {"stage_counts": stage_counts, "gaps": gaps, "monotone": monotone}
    if args.json:
        write_json(args.json, doc)
        outputs.append(Path(args.json))
    if args.plot:
        from .plots import plot_chain_gaps

        png = Path(args.json).with_suffix(".png") if args.json else Path("chain_gaps.png")
        plot_chain_gaps(stage_counts, gaps, png)
        outputs.append(png)
    config_echo = {"t_end": args.t_end, "dt": args.dt, "N": stage_counts}
    _maybe_manifest(args, "chain-compare", [args.network, args.history], config_echo,
                    outputs, time.perf_counter() - started)
    return 0


# -- paper reproduction -------------------------------------------------------


def _data_text(name: str) -> str:
    return resources.files("decrn").joinpath("data").joinpath(name).read_text()


def _figure_settings() -> dict:
    return json.loads(_data_text("figures.json"))


def _run_setting(payload: dict) -> dict:
    """One figure setting: integrate, write CSV and figure, return summary row."""
    network = parse_network(_data_text(payload["network"])).with_delays(payload["tau"])
    history = history_from_json(payload["history"], tau_max=network.tau_max,
                                n_species=network.n_species)
    config = SolverConfig(step=payload["dt"], t_end=payload["t_end"],
                          monitor_stride=payload["stride"])
    base = solve_complex_balanced(network)
    target = equilibrium_in_class(network, history, base=base)
    trajectory = integrate_dde(network, history, config, equilibrium=target.point)
    outdir = Path(payload["outdir"])
    csv_path = outdir / f"{payload['id']}.csv"
    write_text(csv_path, trajectory_csv_text(trajectory))
    png_path = outdir / f"{payload['id']}.png"
    from .plots import plot_trajectory

    plot_trajectory(trajectory, network.species, png_path, title=payload["label"])
    drift = conservation_drift(trajectory)
    descent = check_descent(trajectory)
    minima = min_profile(trajectory, t_skip=min(10.0, payload["t_end"] / 2.0))
    gap = float(np.abs(trajectory.final_state - target.point).max())
    return {
        "id": payload["id"],
        "label": payload["label"],
        "tau": payload["tau"],
        "in_class_equilibrium": [float(v) for v in target.point],
        "final_state": [float(v) for v in trajectory.final_state],
        "final_gap": gap,
        "conservation_drift": [float(v) for v in drift],
        "entropy_initial": descent.initial_value,
        "entropy_max_jump": descent.max_jump,
        "min_after_transient": [float(v) for v in minima],
        "outputs": [csv_path.name, png_path.name],
    }


def cmd_reproduce_paper(args) -> int:
    started = time.perf_counter()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    figures = _figure_settings()
    payloads = []
    for example_key in ("example1", "example2"):
        block = figures[example_key]
        for setting in block["settings"]:
            payloads.append(
                {
                    "network": block["network"],
                    "outdir": str(outdir),
                    "t_end": args.t_end,
                    "dt": args.dt,
                    "stride": args.monitor_stride,
                    **setting,
                }
            )
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_setting, payloads))
    else:
        rows = [_run_setting(p) for p in payloads]

    outputs: list[str] = []
    for row in rows:
        outputs.extend(row["outputs"])

    summary: dict = {"settings": rows}
    for example_key in ("example1", "example2"):
        block = figures[example_key]
        network = parse_network(_data_text(block["network"]))
        history = history_from_json(block["settings"][0]["history"],
                                    tau_max=network.tau_max,
                                    n_species=network.n_species)
        certificate = certify(network, history)
        stability = None
        if certificate.verdict == "Persistent":
            stability = stability_statement(network, history, certificate)
        cert_path = outdir / f"{example_key}.certificate.json"
        write_json(cert_path, certificate_to_dict(certificate, stability))
        outputs.append(cert_path.name)
        balanced = solve_complex_balanced(network)
        in_class = equilibrium_in_class(network, history, base=balanced)
        eq_path = outdir / f"{example_key}.equilibrium.json"
        write_json(eq_path, equilibrium_to_dict(balanced, in_class))
        outputs.append(eq_path.name)
        entry: dict = {
            "computed_equilibrium": [float(v) for v in balanced.point],
            "computed_cb_residual": balanced.cb_residual,
            "verdict": certificate.verdict,
            "routes": list(certificate.routes),
        }
        if "published_equilibrium" in block:
            published = np.array(block["published_equilibrium"], dtype=float)
            entry["published_equilibrium"] = [float(v) for v in published]
            entry["published_point_cb_residual"] = complex_balance_residual(network, published)
            consistent = bool(np.abs(published - balanced.point).max() <= 1e-2)
            entry["equilibria_consistent"] = consistent
            if not consistent:
                entry["note"] = (
                    "the published equilibrium does not satisfy the complex-balance "
                    "equations for the stated rate constants; the value computed from "
                    "the rate constants is reported alongside it"
                )
        if "published_equilibrium_relation" in block:
            point = balanced.point
            entry["published_equilibrium_relation"] = block["published_equilibrium_relation"]
            entry["relation_holds"] = bool(point.max() - point.min() <= 1e-10)
        summary[example_key] = entry

    summary_path = outdir / "summary.json"
    write_json(summary_path, summary)
    outputs.append(summary_path.name)

    manifest = RunManifest(
        command="reproduce-paper",
        inputs=["decrn/data/figures.json"],
        config={
            "t_end": args.t_end,
            "dt": args.dt,
            "monitor_stride": args.monitor_stride,
            "jobs": args.jobs,
        },
        version=__version__,
        wall_clock_seconds=0.0 if args.seedless_deterministic else time.perf_counter() - started,
        outputs=outputs + ["manifest.json"],
    )
    write_json(outdir / "manifest.json", manifest.to_dict())
    persistent = all(summary[key]["verdict"] == "Persistent" for key in ("example1", "example2"))
    print(f"wrote {len(outputs) + 1} files to {outdir}; "
          f"verdicts {'all Persistent' if persistent else 'NOT all Persistent'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seedless-deterministic",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="pin run metadata (manifest wall-clock) for byte-identical reruns",
    )
    common.add_argument("--manifest", help="write a run manifest JSON to this path")

    parser = argparse.ArgumentParser(
        prog="decrn",
        description="Delayed mass-action networks: structure, persistence certificates, "
                    "equilibria and delay dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="structural report: linkage classes, deficiency, semilocking sets")
    p.add_argument("network", help=".crn network file")
    p.add_argument("--json", help="write the report to this path instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("certify", parents=[common],
                       help="persistence certificate and stability statement")
    p.add_argument("network")
    p.add_argument("--history", help="history JSON (needed when conserved quantities exist)")
    p.add_argument("--json", help="write the certificate to this path instead of stdout")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("equilibrium", parents=[common],
                       help="complex-balanced equilibrium, optionally the in-class one")
    p.add_argument("network")
    p.add_argument("--history")
    p.add_argument("--json")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", parents=[common],
                       help="method-of-steps integration with monitors")
    p.add_argument("network")
    p.add_argument("--history", required=True)
    p.add_argument("--t-end", type=float, default=DEFAULT_T_END)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--monitor-stride", type=int, default=DEFAULT_STRIDE)
    p.add_argument("--out", default="trajectory.csv")
    p.add_argument("--plot-data", action="store_true",
                   help="also write per-species two-column data files")
    p.add_argument("--plot", action="store_true", help="also render a PNG figure")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("chain-compare", parents=[common],
                       help="chain-approximation convergence against method of steps")
    p.add_argument("network")
    p.add_argument("--history", required=True)
    p.add_argument("--N", default="10,20,40,80", help="comma-separated chain lengths")
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--monitor-stride", type=int, default=DEFAULT_STRIDE)
    p.add_argument("--json")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_chain_compare)

    p = sub.add_parser("reproduce-paper", parents=[common],
                       help="regenerate both reference examples: trajectories, figures, "
                            "certificates, equilibria and a summary")
    p.add_argument("outdir")
    p.add_argument("--t-end", type=float, default=DEFAULT_T_END)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--monitor-stride", type=int, default=DEFAULT_STRIDE)
    p.add_argument("--jobs", type=int, default=1, help="parallel sub-runs (1 = serial)")
    p.set_defaults(func=cmd_reproduce_paper)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CrnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
