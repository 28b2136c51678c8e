"""Sweep drivers for the move families and relative-energy reporting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .energy import EPS, Instance, InvalidInputError, instance_satisfies_triangle, total_energy
from .moves import ICM, ExpShrink, Expansion, MoveSpec, Swap, optimal_move


class Method(str, enum.Enum):
    ICM = "icm"
    SWAP = "swap"
    EXPANSION = "expansion"
    EXPSHRINK_RANDOM = "expshrink-random"
    EXPSHRINK_PREV = "expshrink-prev"
    EXPSHRINK_NEXT = "expshrink-next"
    EXPSHRINK_ALL = "expshrink-all"

    def __str__(self):
        return self.value


@dataclass
class MoveRecord:
    spec: MoveSpec
    accepted: bool
    energy: float


@dataclass
class RunReport:
    method: Method
    initial_energy: float
    labeling: tuple[int, ...]
    moves: list[MoveRecord] = field(default_factory=list)
    sweep_energies: list[float] = field(default_factory=list)
    sweeps: int = 0
    converged: bool = False
    truncation_used: bool = False
    seed: int | None = None
    instance_hash: str = ""

    @property
    def final_energy(self) -> float:
        return self.sweep_energies[-1] if self.sweep_energies else self.initial_energy

    @property
    def accepted_moves(self) -> int:
        return sum(m.accepted for m in self.moves)

    def energy_trace(self) -> list[float]:
        """Initial energy followed by the energy after every move."""
        return [self.initial_energy] + [m.energy for m in self.moves]

    def to_dict(self) -> dict:
        return {
            "method": str(self.method),
            "seed": self.seed,
            "instance_hash": self.instance_hash,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "sweep_energies": list(self.sweep_energies),
            "sweeps": self.sweeps,
            "converged": self.converged,
            "accepted_moves": self.accepted_moves,
            "truncation_used": self.truncation_used,
            "labeling": [v + 1 for v in self.labeling],
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        """Rebuild a report from :meth:`to_dict` output (the move log is not stored)."""
        return cls(
            method=Method(d["method"]),
            initial_energy=float(d["initial_energy"]),
            labeling=tuple(int(v) - 1 for v in d.get("labeling", [])),
            sweep_energies=[float(e) for e in d["sweep_energies"]] or [float(d["final_energy"])],
            sweeps=int(d.get("sweeps", len(d["sweep_energies"]))),
            converged=bool(d.get("converged", False)),
            truncation_used=bool(d.get("truncation_used", False)),
            seed=d.get("seed"),
            instance_hash=d.get("instance_hash", ""),
        )


def sweep_specs(method: Method, num_states: int, rng: np.random.Generator | None = None) -> Iterator[MoveSpec]:
    """Moves of one sweep, in order."""
    k = num_states
    if method is Method.SWAP:
        for b in range(k):
            for a in range(b + 1, k):
                yield Swap(a, b)
    elif method is Method.EXPANSION:
        for a in range(k):
            yield Expansion(a)
    elif method is Method.EXPSHRINK_RANDOM:
        for a in range(k):
            if k == 1:
                yield ExpShrink(a, a)
                continue
            # uniform over the other states
            b = int(rng.integers(k - 1))
            yield ExpShrink(a, b + (b >= a))
    elif method is Method.EXPSHRINK_PREV:
        for a in range(k):
            yield ExpShrink(a, max(0, a - 1))
    elif method is Method.EXPSHRINK_NEXT:
        for a in range(k):
            yield ExpShrink(a, min(k - 1, a + 1))
    elif method is Method.EXPSHRINK_ALL:
        for b in range(k):
            for a in range(k):
                yield ExpShrink(a, b)
    else:
        raise InvalidInputError(f"{method} has no state sweep; use run_icm")


def _drive(inst, x, method, sweep, max_sweeps, eps, truncation, seed) -> RunReport:
    if max_sweeps < 1:
        raise InvalidInputError("max_sweeps must be at least 1")
    report = RunReport(
        method=method,
        initial_energy=total_energy(inst, x),
        labeling=tuple(x.tolist()),
        truncation_used=truncation,
        seed=seed,
        instance_hash=inst.digest,
    )
    y = tuple(x.tolist())
    energy = report.initial_energy
    for _ in range(max_sweeps):
        accepted = False
        for spec in sweep():
            res = optimal_move(inst, y, spec, allow_truncation=truncation, eps=eps)
            if res.changed:
                y, energy, accepted = res.y, res.energy, True
            report.moves.append(MoveRecord(spec, res.changed, energy))
        report.sweeps += 1
        report.sweep_energies.append(energy)
        if not accepted:
            report.converged = True
            break
    report.labeling = y
    return report


def run(
    inst: Instance,
    init,
    method: Method | str,
    *,
    seed: int | None = None,
    max_sweeps: int = 100,
    eps: float = EPS,
    truncation: bool | None = None,
) -> RunReport:
    """Repeat sweeps of ``method`` until a sweep accepts no move.

    Truncation is switched on automatically when some edge table fails the
    triangle condition, unless ``truncation`` forces it either way.
    """
    method = Method(method)
    if method is Method.ICM:
        return run_icm(inst, init, max_sweeps=max_sweeps, eps=eps)
    x = inst.check_labeling(init)
    if truncation is None:
        truncation = not instance_satisfies_triangle(inst, eps)
    rng = np.random.default_rng(seed) if method is Method.EXPSHRINK_RANDOM else None
    return _drive(
        inst, x, method, lambda: sweep_specs(method, inst.num_states, rng),
        max_sweeps, eps, truncation, seed,
    )


def run_icm(
    inst: Instance,
    init,
    node_order: Sequence[int] | None = None,
    *,
    max_sweeps: int = 100,
    eps: float = EPS,
) -> RunReport:
    x = inst.check_labeling(init)
    order = list(range(inst.num_nodes)) if node_order is None else [int(j) for j in node_order]
    if any(not 0 <= j < inst.num_nodes for j in order):
        raise InvalidInputError("node_order contains an unknown node")
    return _drive(
        inst, x, Method.ICM, lambda: (ICM(j) for j in order),
        max_sweeps, eps, False, None,
    )


def format_ratio(energy: float, baseline: float) -> str:
    """Ratio to the baseline energy, written ``1`` only when the energies are identical."""
    if energy == baseline:
        return "1"
    if baseline == 0:
        return format_energy(energy)
    return f"{energy / baseline:.4f}"


def format_energy(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


@dataclass
class RelativeEnergyTable:
    baseline: RunReport
    runs: list[RunReport]
    labels: list[str]

    @property
    def absolute(self) -> bool:
        """True when the baseline energy is zero and ratios are undefined."""
        return self.baseline.final_energy == 0

    @property
    def cells(self) -> list[str]:
        base = self.baseline.final_energy
        if self.absolute:
            return [format_energy(r.final_energy) for r in self.runs]
        return [format_ratio(r.final_energy, base) for r in self.runs]

    def to_text(self, name: str = "instance") -> str:
        head = "Name | " + " | ".join(self.labels)
        row = f"{name} | " + " | ".join(self.cells)
        kind = "absolute energies" if self.absolute else "energy / baseline"
        return (
            f"# {kind}; baseline {self.baseline.method} final energy "
            f"{format_energy(self.baseline.final_energy)}\n{head}\n{row}\n"
        )


def relative_energy_report(
    runs: Sequence[RunReport], baseline: RunReport, labels: Sequence[str] | None = None
) -> RelativeEnergyTable:
    """Final energies of ``runs`` divided by the baseline's final energy."""
    hashes = {r.instance_hash for r in runs} | {baseline.instance_hash}
    if len(hashes) > 1:
        raise InvalidInputError("runs come from different instances")
    labels = list(labels) if labels is not None else [str(r.method) for r in runs]
    return RelativeEnergyTable(baseline, list(runs), labels)
