#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kess/kernels.hpp"
#include "kess/rng.hpp"

namespace kess {

struct MmdResult {
  double mmd2 = 0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  KernelSpec kernel;
};

/// Squared MMD between the two empirical measures, V-statistic form
/// (diagonal terms included):
///   (1/n^2) sum k(a,a') - (2/nm) sum k(a,b) + (1/m^2) sum k(b,b').
MmdResult mmd2_empirical(const Chain& a, const Chain& b, const KernelSpec& spec);

/// Squared MMD between a chain's empirical measure and a known atomic law
/// sum_j w_j delta_{atom_j}; atoms are flattened point rows on the chain's
/// manifold.
double mmd2_vs_atoms(const Chain& a, const Eigen::MatrixXd& atom_rows,
                     const Eigen::VectorXd& weights, const KernelSpec& spec);

/// Centered-Gram diagonal mean of a sample: the one-sample kernel variance
/// gamma_hat_0 = mean(diag K) - mean(K). Streamed; never materializes K.
double kernel_variance_v(const Chain& sample, const KernelSpec& spec);

struct IidRiskEstimate {
  double mean_mmd2 = 0;  // reference-corrected, see below
  double se = 0;
  Eigen::Index n = 0;
  int reps = 0;
};

/// Monte Carlo estimate of the iid MMD risk at sample size n: each
/// replication draws an n-sample with `make_sample` on its own derived
/// stream and evaluates MMD^2 against an m-point iid reference, minus the
/// finite-reference term gamma_hat_0^ref / m. The reference is drawn once
/// from its own stream and shared across replications.
IidRiskEstimate iid_risk_estimate(const KernelSpec& spec,
                                  const std::function<Chain(Eigen::Index, Rng&)>& make_sample,
                                  Eigen::Index n, int reps, std::uint64_t master_seed,
                                  Eigen::Index reference_size = 8000);

/// Finite-reference-corrected risk statistic
///   D_hat = n { MMD^2(chain, reference) - gamma_hat_0^ref / m }.
/// The reference must be an iid sample from the target; D_hat may be
/// negative when reference noise dominates and is reported signed.
double corrected_risk_statistic(const Chain& chain, const Chain& iid_reference,
                                const KernelSpec& spec);

/// Frequencies of the nearest mode argmax_j mu_j . x (ties to the lowest
/// index) over a sphere chain.
Eigen::VectorXd nearest_mode_frequencies(const Chain& chain,
                                         const std::vector<UnitVector>& modes);

/// Total variation distance (1/2) sum_j |freq_j - ref_j| between the chain's
/// nearest-mode frequencies and reference frequencies.
double mode_tv_error(const Chain& chain, const std::vector<UnitVector>& modes,
                     const Eigen::VectorXd& reference_freqs);

}  // namespace kess
