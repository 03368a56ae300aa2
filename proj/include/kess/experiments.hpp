#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kess/estimator.hpp"
#include "kess/mmd.hpp"
#include "kess/samplers.hpp"

namespace kess {

struct SummaryStats {
  double mean = 0, sd = 0, min = 0, max = 0, range_over_mean = 0;
  static SummaryStats of(std::span<const double> values);
};

/// One stored random-walk path targeting a single vMF law, re-expressed in
/// many Haar-rotated frames; coordinate-wise scalar ESS moves with the frame
/// while the kernel ESS stays fixed.
struct RotationExperimentConfig {
  std::uint64_t master_seed = 20240801;
  Eigen::Index n_keep = 3000;
  Eigen::Index burn_in = 1000;
  double target_kappa = 12.0;
  double proposal_kappa = 35.0;
  int rotations = 80;
  double rho = 0.75;
  WindowSpec window;  // bartlett, auto bandwidth
};

struct RotationRow {
  int rotation = 0;  // 0 is the unrotated frame
  std::array<double, 3> coordinate_ess{};
  double kernel_ess = 0;
};

struct RotationExperimentReport {
  RotationExperimentConfig config;
  double acceptance_rate = 0;
  EssReport unrotated;
  std::vector<RotationRow> rows;  // rotations 1..R
  SummaryStats kernel_ess_stats;
  SummaryStats pooled_coordinate_stats;
  std::array<SummaryStats, 3> axis_stats;
  double max_abs_kernel_ess_deviation = 0;  // vs the unrotated frame
};

RotationExperimentReport run_rotation_experiment(const RotationExperimentConfig& config);

/// Two samplers on a four-mode vMF mixture: a deliberately well-mixing
/// independence chain and a local random walk that rarely crosses modes.
/// Per replication and kernel scale, the report carries the kernel ESS, the
/// long-run variance, the reference-corrected risk statistic D_hat and the
/// calibration ratio D_hat / sigma2, plus nearest-mode total variation
/// errors and acceptance rates.
struct MixtureExperimentConfig {
  std::uint64_t master_seed = 20240802;
  Eigen::Index n_keep = 2500;
  Eigen::Index burn_in = 1000;
  int replications = 20;
  Eigen::Index reference_size = 8000;
  double kappa = 28.0;
  std::array<double, 4> weights{0.4, 0.3, 0.2, 0.1};
  double local_proposal_kappa = 90.0;
  double independence_proposal_kappa = 12.0;
  std::vector<double> rhos{0.35, 0.60, 0.85};
  WindowSpec window;  // bartlett, auto bandwidth
};

struct MixtureRow {
  std::string sampler;  // "independence" | "local"
  int replication = 0;
  double rho = 0;
  double ess = 0, gamma0 = 0, sigma2 = 0, dhat = 0, ratio = 0;
  double tv_error = 0, acceptance = 0;
};

struct MixtureCellSummary {
  std::string sampler;
  double rho = 0;
  SummaryStats ess, sigma2, dhat, ratio;
};

struct MixtureExperimentReport {
  MixtureExperimentConfig config;
  Eigen::VectorXd reference_mode_freqs;
  std::vector<MixtureRow> rows;
  std::vector<MixtureCellSummary> cells;           // sampler x rho
  std::map<std::string, SummaryStats> tv_error;    // per sampler
  std::map<std::string, SummaryStats> acceptance;  // per sampler
};

MixtureExperimentReport run_mixture_experiment(const MixtureExperimentConfig& config);

/// Worker cap for replication-level parallelism: MANIFOLD_ESS_THREADS if
/// set, otherwise the hardware concurrency.
int experiment_thread_cap();

}  // namespace kess
