"""Energy-optimal computation offloading for edge-served mobile devices.

The package covers the full loop: a per-task time/energy model with partial
offloading, a mobility-aware spectral efficiency surrogate, a greedy
offload-ratio optimizer, scenario/dataset generation (including GPS trace
ingestion), and a clustered linear predictor of task energy.
"""

from .cluster import (ClusteredModel, EvalReport, KMeansModel, LinearModel,
                      assign_cluster, clustering_predict, evaluate_models,
                      fit_linear_model, kmeans_fit, load_model, predict_dataset,
                      save_model, train_clustered_models)
from .features import (CANONICAL_FEATURES, PRIMARY_FEATURES, Dataset,
                       ScalingParams, apply_min_max, fit_min_max,
                       mutual_information, rank_features, split_dataset)
from .datagen import (ColumnMap, IngestResult, ScenarioSpec, TrajectoryPoint,
                      VED_COLUMNS, build_dataset, generate_scenario,
                      ingest_trajectory_csv, trajectory_speeds)
from .greedy import (GreedyConfig, OffloadSolution, TraceEntry, get_total_energy,
                     optimize, write_trace_csv)
from .model import (Channel, Device, Scenario, Task, implied_tx_power,
                    local_energy, local_time, offload_energy, offload_time,
                    system_total_energy, total_energy, total_time, uplink_rate)
from .spectral import (SpectralConfig, SpectralEfficiencyCache, calc_se,
                       doppler_shift)

__version__ = "0.1.0"
