#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "kess/geometry.hpp"
#include "kess/rng.hpp"

namespace kess {

/// von Mises-Fisher parameters; kappa = 0 is the uniform law on the sphere.
struct VmfParams {
  UnitVector mean;
  double kappa = 0;

  VmfParams(UnitVector mu, double concentration);
};

/// Finite vMF mixture sum_j w_j vMF(mu_j, kappa_j). When all components
/// share one concentration, the displayed weights are the actual mixture
/// weights; log_density_mixture drops the shared normalizing constant.
struct MixtureTarget {
  std::vector<VmfParams> components;
  Eigen::VectorXd weights;

  MixtureTarget(std::vector<VmfParams> comps, Eigen::VectorXd w);
  static MixtureTarget single(VmfParams params);
};

struct ChainRunConfig {
  Eigen::Index n_keep = 1;
  Eigen::Index burn_in = 0;
  std::uint64_t seed = 0;
  std::optional<MixtureTarget> target;
  double proposal_kappa = 0;                      // random-walk proposal vMF(x, kappa)
  std::optional<MixtureTarget> proposal_mixture;  // independence proposal
};

/// Uniform point on S^2.
UnitVector sample_uniform_sphere(Rng& rng);

/// Exact vMF draw on S^2: the cosine against mu follows the inverse CDF
/// W = 1 + log(u + (1-u) e^{-2 kappa}) / kappa, the tangential angle is
/// uniform, and the e3 frame is rotated onto mu (180-degree rotation about
/// e1 when mu is at the antipode).
UnitVector sample_vmf_s2(const VmfParams& params, Rng& rng);

/// log sum_j w_j exp(kappa_j mu_j . x), stabilized by max subtraction. Off
/// by the additive constant log c(kappa) shared across components, which
/// cancels in Metropolis-Hastings ratios.
double log_density_mixture(const MixtureTarget& target, const UnitVector& x);
double log_density_mixture(const MixtureTarget& target,
                           const Eigen::Ref<const Eigen::Vector3d>& x);

struct McmcRun {
  Chain chain;
  double acceptance_rate = 0;  // accepted / proposed, post-burn-in only
};

/// Random-walk Metropolis on S^2 with proposal vMF(current, proposal_kappa).
/// The proposal density depends on x . y only, hence is symmetric and never
/// evaluated; acceptance is min(1, pi(y)/pi(x)). Starts from a uniform
/// point, discards burn_in iterations, keeps n_keep.
McmcRun rwmh_sphere(const ChainRunConfig& cfg);

/// Independence Metropolis-Hastings on S^2 with a state-free mixture
/// proposal; acceptance is min(1, pi(y) q(x) / (pi(x) q(y))).
McmcRun independence_mh(const ChainRunConfig& cfg);

/// iid sample from a vMF mixture (component by weight, then vMF draw).
Chain sample_iid_mixture(const MixtureTarget& target, Eigen::Index count, Rng& rng);

/// Vertices of the regular tetrahedron: (1,1,1), (1,-1,-1), (-1,1,-1),
/// (-1,-1,1), each scaled by 1/sqrt(3). Pairwise dot products are -1/3.
std::array<UnitVector, 4> tetrahedron_modes();

}  // namespace kess
