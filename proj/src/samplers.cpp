#include "kess/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kess {

namespace {

void require_s2(const UnitVector& v, const char* what) {
  if (v.dim() != 3) throw ValidationError(std::string(what) + ": samplers run on S^2 (d = 3)");
}

Eigen::Vector3d draw_vmf(const Eigen::Vector3d& mu, double kappa, Rng& rng) {
  double w;
  const double u = rng.uniform01();
  if (kappa > 0.0) {
    w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  } else {
    w = 2.0 * u - 1.0;
  }
  w = std::clamp(w, -1.0, 1.0);
  const double theta = 2.0 * M_PI * rng.uniform01();
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  const Eigen::Vector3d in_frame(s * std::cos(theta), s * std::sin(theta), w);

  // rotate the e3 frame onto mu within their common plane
  const double c = mu.z();
  if (c < -1.0 + 1e-12) {
    // antipode: 180-degree rotation about e1
    return {in_frame.x(), -in_frame.y(), -in_frame.z()};
  }
  const Eigen::Vector3d axis_raw(-mu.y(), mu.x(), 0.0);  // e3 x mu
  const double axis_norm = axis_raw.norm();
  if (axis_norm < 1e-15) return in_frame;  // mu == e3
  const Eigen::Vector3d axis = axis_raw / axis_norm;
  const double cos_a = c;
  const double sin_a = axis_norm;
  // Rodrigues rotation of in_frame about axis
  return in_frame * cos_a + axis.cross(in_frame) * sin_a +
         axis * (axis.dot(in_frame)) * (1.0 - cos_a);
}

Eigen::Vector3d draw_mixture(const MixtureTarget& mix, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t j = 0;
  for (; j + 1 < mix.components.size(); ++j) {
    acc += mix.weights[static_cast<Eigen::Index>(j)];
    if (u < acc) break;
  }
  return draw_vmf(mix.components[j].mean.coords(), mix.components[j].kappa, rng);
}

struct MhState {
  Eigen::Vector3d x = Eigen::Vector3d::UnitZ();
  double log_pi = 0;
  double log_q = 0;  // independence sampler only
};

McmcRun run_mh(const ChainRunConfig& cfg, bool independence) {
  if (cfg.n_keep < 1) throw ValidationError("chain run: n_keep must be >= 1");
  if (cfg.burn_in < 0) throw ValidationError("chain run: burn_in must be >= 0");
  if (!cfg.target) throw ValidationError("chain run: no target");
  const MixtureTarget& target = *cfg.target;
  const MixtureTarget* proposal = nullptr;
  if (independence) {
    if (!cfg.proposal_mixture) {
      throw ValidationError("independence_mh: config has no proposal mixture");
    }
    proposal = &*cfg.proposal_mixture;
  } else if (!(cfg.proposal_kappa > 0.0)) {
    throw ValidationError("rwmh_sphere: proposal_kappa must be > 0");
  }

  Rng rng(cfg.seed);
  MhState state;
  state.x = sample_uniform_sphere(rng).coords();
  state.log_pi = log_density_mixture(target, state.x);
  if (independence) state.log_q = log_density_mixture(*proposal, state.x);

  Eigen::MatrixXd keep(cfg.n_keep, 3);
  Eigen::Index accepted = 0;
  const Eigen::Index total = cfg.burn_in + cfg.n_keep;
  for (Eigen::Index t = 0; t < total; ++t) {
    Eigen::Vector3d y;
    double log_q_y = 0.0;
    if (independence) {
      y = draw_mixture(*proposal, rng);
      log_q_y = log_density_mixture(*proposal, y);
    } else {
      y = draw_vmf(state.x, cfg.proposal_kappa, rng);
    }
    const double log_pi_y = log_density_mixture(target, y);
    const double log_ratio = independence
                                 ? (log_pi_y + state.log_q) - (state.log_pi + log_q_y)
                                 : log_pi_y - state.log_pi;
    const bool accept = log_ratio >= 0.0 || std::log(rng.uniform01()) < log_ratio;
    if (accept) {
      state.x = y;
      state.log_pi = log_pi_y;
      state.log_q = log_q_y;
      if (t >= cfg.burn_in) ++accepted;
    }
    if (t >= cfg.burn_in) keep.row(t - cfg.burn_in) = state.x.transpose();
  }

  ChainMeta meta;
  meta.sampler = independence ? "independence_mh" : "rwmh_sphere";
  meta.seed = cfg.seed;
  meta.burn_in_discarded = cfg.burn_in;
  Chain chain(Manifold::sphere, {3}, std::move(keep), meta);
  return McmcRun{std::move(chain), static_cast<double>(accepted) / cfg.n_keep};
}

}  // namespace

VmfParams::VmfParams(UnitVector mu, double concentration)
    : mean(std::move(mu)), kappa(concentration) {
  if (kappa < 0.0) throw ValidationError("VmfParams: kappa must be >= 0");
}

MixtureTarget::MixtureTarget(std::vector<VmfParams> comps, Eigen::VectorXd w)
    : components(std::move(comps)), weights(std::move(w)) {
  if (components.empty()) throw ValidationError("MixtureTarget: no components");
  if (weights.size() != static_cast<Eigen::Index>(components.size())) {
    throw ValidationError("MixtureTarget: weights do not match components");
  }
  if (weights.minCoeff() < 0.0) throw ValidationError("MixtureTarget: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ValidationError("MixtureTarget: weights must sum to 1");
  }
  const Eigen::Index d = components.front().mean.dim();
  for (const VmfParams& c : components) {
    if (c.mean.dim() != d) throw ValidationError("MixtureTarget: mixed dimensions");
  }
}

MixtureTarget MixtureTarget::single(VmfParams params) {
  std::vector<VmfParams> comps{std::move(params)};
  return MixtureTarget(std::move(comps), Eigen::VectorXd::Ones(1));
}

UnitVector sample_uniform_sphere(Rng& rng) {
  const double w = 2.0 * rng.uniform01() - 1.0;
  const double theta = 2.0 * M_PI * rng.uniform01();
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  return UnitVector(Eigen::Vector3d(s * std::cos(theta), s * std::sin(theta), w));
}

UnitVector sample_vmf_s2(const VmfParams& params, Rng& rng) {
  require_s2(params.mean, "sample_vmf_s2");
  return UnitVector(draw_vmf(params.mean.coords(), params.kappa, rng));
}

double log_density_mixture(const MixtureTarget& target,
                           const Eigen::Ref<const Eigen::Vector3d>& x) {
  double max_exponent = -std::numeric_limits<double>::infinity();
  const std::size_t j_count = target.components.size();
  double exponents[64];
  if (j_count > 64) throw ValidationError("log_density_mixture: too many components");
  for (std::size_t j = 0; j < j_count; ++j) {
    exponents[j] = target.components[j].kappa * target.components[j].mean.coords().dot(x);
    max_exponent = std::max(max_exponent, exponents[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < j_count; ++j) {
    sum += target.weights[static_cast<Eigen::Index>(j)] * std::exp(exponents[j] - max_exponent);
  }
  return max_exponent + std::log(sum);
}

double log_density_mixture(const MixtureTarget& target, const UnitVector& x) {
  require_s2(x, "log_density_mixture");
  return log_density_mixture(target, Eigen::Vector3d(x.coords()));
}

McmcRun rwmh_sphere(const ChainRunConfig& cfg) { return run_mh(cfg, false); }

McmcRun independence_mh(const ChainRunConfig& cfg) { return run_mh(cfg, true); }

Chain sample_iid_mixture(const MixtureTarget& target, Eigen::Index count, Rng& rng) {
  if (count < 1) throw ValidationError("sample_iid_mixture: count must be >= 1");
  Eigen::MatrixXd pts(count, 3);
  for (Eigen::Index i = 0; i < count; ++i) pts.row(i) = draw_mixture(target, rng).transpose();
  return Chain(Manifold::sphere, {3}, std::move(pts));
}

std::array<UnitVector, 4> tetrahedron_modes() {
  const double s = 1.0 / std::sqrt(3.0);
  return {UnitVector(Eigen::Vector3d(s, s, s)), UnitVector(Eigen::Vector3d(s, -s, -s)),
          UnitVector(Eigen::Vector3d(-s, s, -s)), UnitVector(Eigen::Vector3d(-s, -s, s))};
}

}  // namespace kess
