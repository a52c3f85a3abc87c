import math

import numpy as np
import pytest

from offloadlab.datagen import (EARTH_RADIUS_M, VED_COLUMNS, ColumnMap,
                                ScenarioSpec, TrajectoryPoint, build_dataset,
                                generate_scenario, ingest_trajectory_csv,
                                trajectory_speeds)
from offloadlab.features import CANONICAL_FEATURES
from offloadlab.spectral import calc_se

from helpers import (BALANCED_ENERGY_COEFF, BALANCED_GAIN, BALANCED_NOISE_VAR,
                     balanced_spec)


class TestScenarioSpec:
    def test_defaults_build(self):
        spec = ScenarioSpec()
        assert spec.n_devices == 5 and spec.tasks_per_device == 10

    @pytest.mark.parametrize("kwargs", [
        {"n_devices": 0},
        {"tasks_per_device": 0},
        {"data_bits": (8e6, 1e6)},          # inverted
        {"data_bits": (-1.0, 1e6)},         # negative size
        {"cycles_per_bit": (0.0, 100.0)},   # zero cycles not workable
        {"cpu_freq_hz": (0.0, 1e9)},
        {"gain": (0.0, 1.0)},
        {"speed_mps": (-5.0, 10.0)},
    ])
    def test_rejects_bad_ranges(self, kwargs):
        with pytest.raises(ValueError):
            ScenarioSpec(**kwargs)

    def test_zero_speed_allowed(self):
        ScenarioSpec(speed_mps=(0.0, 0.0))


class TestGenerateScenario:
    def test_counts_and_id_wiring(self):
        spec = ScenarioSpec(n_devices=3, tasks_per_device=4, seed=2)
        sc = generate_scenario(spec)
        assert len(sc.devices) == 3
        assert len(sc.channels) == 3
        assert len(sc.tasks) == 12
        assert [d.id for d in sc.devices] == [0, 1, 2]
        for n in range(3):
            mine = [t for t in sc.tasks if t.device_id == n]
            assert [t.task_id for t in mine] == [1, 2, 3, 4]

    def test_deterministic_per_seed(self):
        spec = ScenarioSpec(seed=7)
        a = generate_scenario(spec)
        b = generate_scenario(spec)
        assert a == b
        c = generate_scenario(ScenarioSpec(seed=8))
        assert a != c

    def test_values_respect_ranges(self):
        spec = ScenarioSpec(n_devices=10, tasks_per_device=5, seed=3,
                            data_bits=(2e6, 3e6), cycles_per_bit=(800.0, 900.0),
                            cpu_freq_hz=(1e9, 2e9), speed_mps=(50.0, 60.0),
                            carrier_freq_hz=(2e9, 4e9))
        sc = generate_scenario(spec)
        for d in sc.devices:
            assert 1e9 <= d.cpu_freq_hz <= 2e9
        for ch in sc.channels:
            assert 50.0 <= ch.speed_mps <= 60.0
            assert 2e9 <= ch.carrier_freq_hz <= 4e9
        for t in sc.tasks:
            assert 2e6 <= t.data_bits <= 3e6
            assert 800.0 <= t.cycles_per_bit <= 900.0
            assert t.offload_ratio == 0.5

    def test_pinned_ranges_are_exact(self):
        spec = ScenarioSpec(seed=4, cpu_freq_hz=(1e9, 1e9), gain=(0.25, 0.25),
                            noise_var_w=(2e-13, 2e-13))
        sc = generate_scenario(spec)
        assert all(d.cpu_freq_hz == 1e9 for d in sc.devices)
        assert all(ch.gain == 0.25 for ch in sc.channels)
        assert all(ch.noise_var_w == 2e-13 for ch in sc.channels)

    def test_tx_power_matches_channel(self):
        sc = generate_scenario(ScenarioSpec(seed=5))
        for d, ch in zip(sc.devices, sc.channels):
            se = calc_se(ch.speed_mps, ch.carrier_freq_hz, sc.spectral_config)
            expected = (2.0 ** se - 1.0) * ch.noise_var_w / ch.gain
            assert d.tx_power_w == pytest.approx(expected, rel=1e-12)

    def test_pinning_one_range_leaves_other_draws_alone(self):
        # a pinned range must consume its draw so the rest of the stream
        # stays aligned across sweep variants
        free = generate_scenario(ScenarioSpec(seed=6))
        pinned = generate_scenario(ScenarioSpec(seed=6, speed_mps=(250.0, 250.0)))
        for a, b in zip(free.devices, pinned.devices):
            assert a.cpu_freq_hz == b.cpu_freq_hz
            assert a.energy_coeff == b.energy_coeff
        for a, b in zip(free.channels, pinned.channels):
            assert b.speed_mps == 250.0
            assert a.carrier_freq_hz == b.carrier_freq_hz
        for a, b in zip(free.tasks, pinned.tasks):
            assert a.data_bits == b.data_bits
            assert a.cycles_per_bit == b.cycles_per_bit


class TestTrajectorySpeeds:
    def test_equator_degree_oracle(self):
        pts = [TrajectoryPoint(0.0, 0.0, 0.0), TrajectoryPoint(3600.0, 0.0, 1.0)]
        speed = trajectory_speeds(pts)
        expected = EARTH_RADIUS_M * math.pi / 180.0 / 3600.0
        assert speed.shape == (1,)
        assert speed[0] == pytest.approx(expected, rel=1e-9)

    def test_stationary_point(self):
        pts = [TrajectoryPoint(0.0, 0.0, 9.0), TrajectoryPoint(10.0, 0.0, 9.0)]
        assert trajectory_speeds(pts)[0] == 0.0
        # away from the equator the cosine argument can round just below 1,
        # leaving sub-cm/s numeric dust rather than an exact zero
        pts = [TrajectoryPoint(0.0, 45.0, 9.0), TrajectoryPoint(10.0, 45.0, 9.0)]
        assert trajectory_speeds(pts)[0] < 0.01

    def test_duplicate_timestamps_skipped(self):
        pts = [TrajectoryPoint(0.0, 0.0, 0.0),
               TrajectoryPoint(0.0, 0.0, 0.5),
               TrajectoryPoint(3600.0, 0.0, 1.0)]
        speeds = trajectory_speeds(pts)
        assert speeds.shape == (1,)

    def test_out_of_order_rejected(self):
        pts = [TrajectoryPoint(10.0, 0.0, 0.0), TrajectoryPoint(0.0, 0.0, 1.0)]
        with pytest.raises(ValueError):
            trajectory_speeds(pts)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            trajectory_speeds([TrajectoryPoint(0.0, 0.0, 0.0)])

    def test_antipodal_points_stay_in_domain(self):
        # cos of the central angle lands at exactly -1; the clamp keeps
        # acos defined and the distance is half the circumference
        pts = [TrajectoryPoint(0.0, 0.0, 0.0), TrajectoryPoint(1.0, 0.0, 180.0)]
        speed = trajectory_speeds(pts)[0]
        assert speed == pytest.approx(EARTH_RADIUS_M * math.pi, rel=1e-9)

    def test_custom_radius(self):
        pts = [TrajectoryPoint(0.0, 0.0, 0.0), TrajectoryPoint(1.0, 0.0, 90.0)]
        speed = trajectory_speeds(pts, earth_radius_m=2.0)
        assert speed[0] == pytest.approx(2.0 * math.pi / 2.0, rel=1e-9)


class TestIngest:
    def write(self, tmp_path, text, name="trace.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path

    def test_two_trips_with_bad_rows(self, tmp_path):
        cmap = ColumnMap(timestamp="t", lat="lat", lon="lon", trip_id="trip")
        path = self.write(tmp_path, "\n".join([
            "t,lat,lon,trip",
            "0,0.0,0.0,A",
            "60,0.0,0.01,A",
            "not-a-number,0.0,0.02,A",
            "0,10.0,10.0,B",
            "30,95.0,10.0,B",       # latitude out of range
            "30,10.0,10.01,B",
            "",
        ]))
        result = ingest_trajectory_csv(path, cmap)
        assert result.rows_read == 6
        assert result.rows_skipped == 2
        assert sorted(result.trips) == ["A", "B"]
        assert len(result.trips["A"]) == 2
        assert len(result.trips["B"]) == 2
        assert result.trips["A"][1].timestamp_s == 60.0

    def test_timestamp_scale(self, tmp_path):
        cmap = ColumnMap(timestamp="ms", lat="lat", lon="lon", trip_id="id",
                         timestamp_scale=1e-3)
        path = self.write(tmp_path, "ms,lat,lon,id\n2500,1.0,2.0,x\n")
        result = ingest_trajectory_csv(path, cmap)
        assert result.trips["x"][0].timestamp_s == 2.5

    def test_ved_preset_columns(self, tmp_path):
        path = self.write(tmp_path, "\n".join([
            "Timestamp(ms),Latitude[deg],Longitude[deg],Trip",
            "0,42.28,-83.74,1001",
            "1000,42.281,-83.74,1001",
            "",
        ]))
        result = ingest_trajectory_csv(path, VED_COLUMNS)
        assert result.rows_read == 2
        pts = result.trips["1001"]
        assert pts[1].timestamp_s == 1.0
        speeds = trajectory_speeds(pts)
        assert 100.0 < speeds[0] < 120.0  # ~111 m per millidegree of latitude

    def test_missing_column_is_hard_error(self, tmp_path):
        cmap = ColumnMap(timestamp="t", lat="lat", lon="lon", trip_id="trip")
        path = self.write(tmp_path, "t,lat,trip\n0,0,A\n")
        with pytest.raises(ValueError):
            ingest_trajectory_csv(path, cmap)

    def test_header_only_file(self, tmp_path):
        cmap = ColumnMap(timestamp="t", lat="lat", lon="lon", trip_id="trip")
        path = self.write(tmp_path, "t,lat,lon,trip\n")
        result = ingest_trajectory_csv(path, cmap)
        assert result.rows_read == 0 and result.rows_skipped == 0
        assert result.trips == {}

    def test_empty_file(self, tmp_path):
        cmap = ColumnMap(timestamp="t", lat="lat", lon="lon", trip_id="trip")
        result = ingest_trajectory_csv(self.write(tmp_path, ""), cmap)
        assert result.trips == {} and result.rows_read == 0


class TestBuildDataset:
    def test_shape_and_names(self):
        specs = [ScenarioSpec(n_devices=2, tasks_per_device=3, seed=s)
                 for s in (0, 1)]
        ds = build_dataset(specs)
        assert ds.feature_names == CANONICAL_FEATURES
        assert ds.X.shape == (12, 7)
        assert ds.y.shape == (12,)

    def test_first_row_matches_scenario(self):
        spec = ScenarioSpec(n_devices=2, tasks_per_device=2, seed=9)
        ds = build_dataset([spec])
        sc = generate_scenario(spec)
        row = ds.X[0]
        names = list(ds.feature_names)
        assert row[names.index("TaskSize")] == sc.tasks[0].data_bits
        assert row[names.index("Speed")] == sc.channels[0].speed_mps
        assert row[names.index("CarrierFrequency")] == sc.channels[0].carrier_freq_hz
        assert row[names.index("CyclesPerBit")] == sc.tasks[0].cycles_per_bit
        assert row[names.index("CpuFreq")] == sc.devices[0].cpu_freq_hz
        assert row[names.index("Bandwidth")] == sc.channels[0].bandwidth_hz

    def test_ratios_start_at_half_and_climb(self):
        ds = build_dataset([balanced_spec(100)])
        ratios = ds.column("OffloadingRatio")
        assert np.all(ratios >= 0.5) and np.all(ratios <= 1.0)

    def test_rows_are_self_consistent(self):
        # the target must be reproducible from the row plus the spec's
        # pinned constants, otherwise the dataset is useless for learning
        ds = build_dataset([balanced_spec(101)])
        for row, target in zip(ds.X, ds.y):
            size, ratio, speed, carrier, cycles, cpu, bandwidth = row
            se = calc_se(speed, carrier)
            local = BALANCED_ENERGY_COEFF * cycles * cpu ** 2 * (1 - ratio) * size
            power = (2.0 ** se - 1.0) * BALANCED_NOISE_VAR / BALANCED_GAIN
            offload = power * ratio * size / (bandwidth * se)
            assert local + offload == pytest.approx(target, rel=1e-9)

    def test_csv_bytes_deterministic(self, tmp_path):
        specs = [ScenarioSpec(n_devices=2, tasks_per_device=2, seed=11)]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        build_dataset(specs).to_csv(p1)
        build_dataset(specs).to_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_specs_rejected(self):
        with pytest.raises(ValueError):
            build_dataset([])
