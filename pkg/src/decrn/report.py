"""Serialization of analysis results: JSON reports, trajectory CSV, manifests.

All emitters are deterministic: fixed key order, repr-based float text,
LF newlines.  Trajectory CSV rows carry 17 significant digits so a value
round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .certify import PersistenceCertificate, StabilityStatement
from .equilibrium import EquilibriumResult
from .geometry import ConservedBasis
from .model import ReactionNetwork
from .structure import SemilockingCatalog, StructureReport
from .dynamics import Trajectory

__all__ = [
    "g17",
    "structure_to_dict",
    "certificate_to_dict",
    "equilibrium_to_dict",
    "trajectory_csv_text",
    "plot_data_text",
    "RunManifest",
    "write_json",
    "write_text",
]


def g17(x: float) -> str:
    return format(float(x), ".17g")


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def structure_to_dict(network: ReactionNetwork, report: StructureReport,
                      catalog: SemilockingCatalog, basis: ConservedBasis) -> dict:
    minimal_sets = {
        s
        for s in catalog.sets
        if not any(set(other) < set(s) for other in catalog.sets)
    }
    return {
        "species": list(network.species),
        "complexes": [cplx.format(network.species) for cplx in network.complexes],
        "n_reactions": network.n_reactions,
        "linkage_classes": [list(c) for c in report.linkage_classes],
        "weakly_reversible": report.weakly_reversible,
        "reversible": report.reversible,
        "stoich_basis": [[str(v) for v in vec] for vec in report.stoich_basis],
        "dim_S": report.dim_s,
        "deficiency": report.deficiency,
        "conserved_basis": [[str(v) for v in vec] for vec in basis.vectors],
        "semilocking": [
            {
                "W": [network.species[j] for j in indices],
                "locking": locking,
                "minimal": indices in minimal_sets,
            }
            for indices, locking in catalog
        ],
    }


def certificate_to_dict(certificate: PersistenceCertificate,
                        stability: StabilityStatement | None = None) -> dict:
    doc = {
        "verdict": certificate.verdict,
        "route": certificate.route,
        "routes": list(certificate.routes),
        "dim_S": certificate.dim_s,
        "deficiency": certificate.deficiency,
        "weakly_reversible": certificate.weakly_reversible,
        "cb_residual": certificate.cb_residual,
        "semilocking": [
            {
                "W": list(entry.species),
                "locking": entry.locking,
                "face": entry.face.tag.value,
                "zw_dim": entry.face.zw_dim,
                "witness": None if entry.face.witness_point is None
                else _floats(entry.face.witness_point),
            }
            for entry in certificate.per_w
        ],
        "notes": list(certificate.notes),
    }
    if stability is not None:
        doc["stability"] = {
            "equilibrium": _floats(stability.equilibrium.point),
            "cb_residual": stability.equilibrium.cb_residual,
            "claim": stability.claim,
            "certificate_route": stability.route,
        }
    return doc


def equilibrium_to_dict(result: EquilibriumResult,
                        in_class: EquilibriumResult | None = None) -> dict:
    doc = {
        "point": _floats(result.point),
        "cb_residual": result.cb_residual,
        "drift_residual": result.drift_residual,
    }
    if in_class is not None:
        doc["in_class"] = {
            "point": _floats(in_class.point),
            "cb_residual": in_class.cb_residual,
            "drift_residual": in_class.drift_residual,
        }
    return doc


def trajectory_csv_text(trajectory: Trajectory) -> str:
    """Monitor samples as CSV: t, x1..xn, V, Ca_1..Ca_p."""
    n = trajectory.monitor_states.shape[1]
    p = 0 if trajectory.conserved is None else trajectory.conserved.shape[1]
    header = ["t"] + [f"x{j + 1}" for j in range(n)] + ["V"]
    header += [f"Ca_{a + 1}" for a in range(p)]
    lines = [",".join(header)]
    for row, t in enumerate(trajectory.monitor_times):
        cells = [g17(t)]
        cells += [g17(v) for v in trajectory.monitor_states[row]]
        if trajectory.lyapunov is None:
            cells.append("nan")
        else:
            cells.append(g17(trajectory.lyapunov[row]))
        for a in range(p):
            cells.append(g17(trajectory.conserved[row, a]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def plot_data_text(trajectory: Trajectory, species_index: int) -> str:
    """Two-column `t value` rows for one species, gnuplot-style."""
    lines = [
        f"{g17(t)} {g17(trajectory.monitor_states[row, species_index])}"
        for row, t in enumerate(trajectory.monitor_times)
    ]
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    """What a command ran and what it wrote; serialized last."""

    command: str
    inputs: list[str]
    config: dict
    version: str
    wall_clock_seconds: float
    outputs: list[str]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "version": self.version,
            "wall_clock_seconds": self.wall_clock_seconds,
            "outputs": self.outputs,
        }


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text)
