"""Shared fixture builders for the test suite."""

import numpy as np

from offloadlab import (Channel, Device, Scenario, ScenarioSpec, SpectralConfig,
                        Task)

# Constants of the worked single-task example used across model tests.
EX_DATA_BITS = 8e6
EX_CYCLES_PER_BIT = 1000.0
EX_CPU_HZ = 1e9
EX_ENERGY_COEFF = 1e-28
EX_BANDWIDTH = 1e6
EX_NOISE = 1e-13
EX_GAIN = 1.0
EX_SE = np.log2(101.0)  # static channel at snr 100


def example_device(dev_id: int = 0) -> Device:
    return Device(id=dev_id, cpu_freq_hz=EX_CPU_HZ, energy_coeff=EX_ENERGY_COEFF)


def example_channel(**kw) -> Channel:
    base = dict(bandwidth_hz=EX_BANDWIDTH, noise_var_w=EX_NOISE, gain=EX_GAIN,
                speed_mps=0.0, carrier_freq_hz=1e9)
    base.update(kw)
    return Channel(**base)


def example_task(ratio: float = 0.5, data_bits: float = EX_DATA_BITS,
                 dev_id: int = 0, task_id: int = 1) -> Task:
    return Task(device_id=dev_id, task_id=task_id, data_bits=data_bits,
                cycles_per_bit=EX_CYCLES_PER_BIT, offload_ratio=ratio)


def small_scenario(noise_var_w: float = EX_NOISE) -> Scenario:
    """Two devices, three tasks, static channels."""
    devices = (example_device(0),
               Device(id=1, cpu_freq_hz=5e8, energy_coeff=2e-28))
    channels = (example_channel(noise_var_w=noise_var_w),
                example_channel(noise_var_w=noise_var_w, bandwidth_hz=2e6,
                                carrier_freq_hz=2e9))
    tasks = (example_task(dev_id=0, task_id=1, data_bits=4e6),
             example_task(dev_id=0, task_id=2, data_bits=2e6),
             Task(device_id=1, task_id=1, data_bits=6e6, cycles_per_bit=700.0))
    return Scenario(devices=devices, tasks=tasks, channels=channels,
                    spectral_config=SpectralConfig())


def balanced_spec(seed: int) -> ScenarioSpec:
    """Ranges tuned so local and offload costs compete.

    Greedy runs stop at a spread of ratios instead of pinning everything at
    1.0, and the resulting energies are driven mainly by task size and the
    achieved offload ratio, only weakly by mobility.
    """
    return ScenarioSpec(
        n_devices=5,
        tasks_per_device=10,
        seed=seed,
        data_bits=(1e6, 8e6),
        cycles_per_bit=(600.0, 1400.0),
        cpu_freq_hz=(1e9, 1e9),
        energy_coeff=(1e-28, 1e-28),
        speed_mps=(100.0, 400.0),
        carrier_freq_hz=(1e9, 3e9),
        bandwidth_hz=(1e6, 1e6),
        noise_var_w=(6.6e-3, 6.6e-3),
        gain=(1.0, 1.0),
    )


BALANCED_NOISE_VAR = 6.6e-3
BALANCED_ENERGY_COEFF = 1e-28
BALANCED_GAIN = 1.0
