"""Drifting-field estimation with exact and landmark-projected attraction."""

from .data import FeatureSet, load_csv, save_csv
from .field import (Conditioning, DriftFieldConfig, Estimator, FieldEvaluation,
                    drift_field, drift_targets, exact_attractive_mean,
                    exact_repulsive_mean, projected_attractive_mean,
                    projected_repulsive_mean)
from .fidelity import (BoundDiagnostic, FidelityReport, OnSupportBound,
                       cosine_fidelity, fidelity_report, relative_l2_fidelity,
                       target_mse, verify_local_bound, verify_on_support_bound)
from .kernels import DEFAULT_TAU, KernelParams, kernel_matrix, laplace_kernel
from .landmarks import (LandmarkSet, Scope, Strategy, select_facility_location,
                        select_kcenter, select_kmeans, select_landmarks,
                        select_random)
from .nystrom import (AttractiveSummary, NystromBasis, ShardedSummaryBank,
                      build_basis, build_summary, compose_shards,
                      compose_shards_batch, concatenated_reference_mean,
                      feature_map, features, merge_summaries, projected_kernel,
                      single_shard_bank)
from .bankio import (BankMagicError, BankPayloadError, BankTruncatedError,
                     BankVersionError, SummaryBankError, load_summary_bank,
                     save_summary_bank)
from .bench import (BenchMode, BenchReport, CostModel, account_memory,
                    fit_loglog_slope, measure_field_cost, predict_cost)
from .mlp import AdamOptimizer, MlpGenerator, init_mlp, mlp_backward, mlp_forward
from .rng import prng_stream, substream
from .toy import (ToyDistribution, ToyKind, checkerboard, energy_distance,
                  gaussian_mixture, sample_toy, swissroll)
from .train import TrainState, particle_drift_run, train_generator

__version__ = "0.1.0"
