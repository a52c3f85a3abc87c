"""Greedy improvement of per-task offload ratios.

Every task starts at the same offload ratio.  Each round re-evaluates all
per-task energies, picks the still-adjustable task that is currently the
most expensive, and nudges its ratio one step toward full offload.  The
loop keeps going while the system total strictly improves and stops the
first time a probe fails to beat the best total seen, so the returned
vector is always the best one evaluated.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import Scenario, SEProvider, implied_tx_power

TERMINATION_CONVERGED = "converged"    # every ratio pinned at 1.0, nothing left to adjust
TERMINATION_SATURATED = "saturated"    # a probe failed to improve the best total
TERMINATION_ITER_CAPPED = "iter_capped"  # safety bound on adjustments was hit

_SNAP = 1e-12  # ratios this close to 1.0 are pinned exactly


@dataclass(frozen=True)
class GreedyConfig:
    init_ratio: float = 0.5
    step: float = 0.01
    max_iters: int | None = None  # None: 10 * n_tasks / step, rounded up

    def __post_init__(self):
        if not 0.0 <= self.init_ratio <= 1.0:
            raise ValueError("init_ratio must lie in [0, 1]")
        if not 0.0 < self.step <= 1.0:
            raise ValueError("step must lie in (0, 1]")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1 when set")

    def resolve_max_iters(self, n_tasks: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return math.ceil(10.0 * n_tasks / self.step)


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    total_energy: float
    adjusted_task_index: int | None  # None on the initial evaluation


@dataclass(frozen=True)
class OffloadSolution:
    offload_ratios: np.ndarray
    per_task_energy: np.ndarray
    total_energy: float
    trace: tuple[TraceEntry, ...]
    termination: str

    @property
    def evaluations(self) -> int:
        return len(self.trace)


def task_energy_endpoints(scenario: Scenario, se_provider: SEProvider) -> tuple[np.ndarray, np.ndarray]:
    """Per-task energy at l=0 (all local) and l=1 (all offloaded).

    Energy is affine in the offload ratio, so these two arrays determine
    the whole energy landscape: E_i(l) = local_i * (1 - l) + offload_i * l.
    """
    n = len(scenario.tasks)
    local = np.empty(n)
    offload = np.empty(n)
    for i, task in enumerate(scenario.tasks):
        device = scenario.devices[task.device_id]
        channel = scenario.channels[task.device_id]
        local[i] = (device.energy_coeff * task.cycles_per_bit
                    * device.cpu_freq_hz ** 2 * task.data_bits)
        if task.data_bits == 0.0:
            offload[i] = 0.0
        else:
            se = se_provider(channel.speed_mps, channel.carrier_freq_hz)
            power = implied_tx_power(channel, se)
            offload[i] = power * task.data_bits / (channel.bandwidth_hz * se)
    return local, offload


def get_total_energy(offload_ratios: np.ndarray, scenario: Scenario,
                     se_provider: SEProvider) -> np.ndarray:
    """Per-task energies for an explicit ratio vector (one entry per task)."""
    ratios = np.asarray(offload_ratios, dtype=float)
    if ratios.shape != (len(scenario.tasks),):
        raise ValueError(
            f"expected {len(scenario.tasks)} ratios, got shape {ratios.shape}")
    if ratios.size and (ratios.min() < 0.0 or ratios.max() > 1.0):
        raise ValueError("offload ratios must lie in [0, 1]")
    local, offload = task_energy_endpoints(scenario, se_provider)
    return local * (1.0 - ratios) + offload * ratios


def optimize(scenario: Scenario, config: GreedyConfig,
             se_provider: SEProvider) -> OffloadSolution:
    """Run the greedy descent and return the best ratio vector seen."""
    n = len(scenario.tasks)
    if n == 0:
        raise ValueError("scenario has no tasks to optimize")
    max_iters = config.resolve_max_iters(n)
    local, offload = task_energy_endpoints(scenario, se_provider)

    ratios = np.full(n, float(config.init_ratio))
    energies = local * (1.0 - ratios) + offload * ratios
    trace = [TraceEntry(0, float(energies.sum()), None)]

    best_total = math.inf
    best_ratios = ratios.copy()
    best_energies = energies.copy()
    termination = TERMINATION_SATURATED
    bumps = 0

    while True:
        total = float(energies.sum())
        if not total < best_total:
            termination = TERMINATION_SATURATED
            break
        best_total = total
        best_ratios = ratios.copy()
        best_energies = energies.copy()

        adjustable = ratios < 1.0
        if not adjustable.any():
            termination = TERMINATION_CONVERGED
            break
        if bumps >= max_iters:
            termination = TERMINATION_ITER_CAPPED
            break

        idx = int(np.argmax(np.where(adjustable, energies, -np.inf)))
        bumped = ratios[idx] + config.step
        ratios[idx] = 1.0 if bumped >= 1.0 - _SNAP else bumped
        energies = local * (1.0 - ratios) + offload * ratios
        bumps += 1
        trace.append(TraceEntry(bumps, float(energies.sum()), idx))

    return OffloadSolution(
        offload_ratios=best_ratios,
        per_task_energy=best_energies,
        total_energy=float(best_energies.sum()),
        trace=tuple(trace),
        termination=termination,
    )


def write_trace_csv(solution: OffloadSolution, path) -> None:
    """Dump the evaluation trace; the initial row carries task_index -1."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total_energy_j", "task_index"])
        for entry in solution.trace:
            idx = -1 if entry.adjusted_task_index is None else entry.adjusted_task_index
            writer.writerow([entry.iteration, repr(entry.total_energy), idx])
