#include "kess/mmd.hpp"

#include <cmath>

namespace kess {

namespace {

// content-based order so the cross term is evaluated identically no matter
// which way the caller passes the samples
bool in_canonical_order(const Chain& a, const Chain& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    for (Eigen::Index j = 0; j < a.row_width(); ++j) {
      if (a.points()(t, j) != b.points()(t, j)) return a.points()(t, j) < b.points()(t, j);
    }
  }
  return true;  // identical samples: either order gives the same sums
}

}  // namespace

MmdResult mmd2_empirical(const Chain& a, const Chain& b, const KernelSpec& spec) {
  if (a.manifold() != b.manifold() || a.dims() != b.dims()) {
    throw ValidationError("mmd2_empirical: samples live on different manifolds");
  }
  // the three terms go through the identical blocked-mean path, so two equal
  // samples cancel to zero exactly, and the cross term is order-canonical
  const double aa = gram_mean(spec, a, a);
  const double ab = in_canonical_order(a, b) ? gram_mean(spec, a, b) : gram_mean(spec, b, a);
  const double bb = gram_mean(spec, b, b);
  return MmdResult{aa - 2.0 * ab + bb, a.size(), b.size(), spec};
}

double mmd2_vs_atoms(const Chain& a, const Eigen::MatrixXd& atom_rows,
                     const Eigen::VectorXd& weights, const KernelSpec& spec) {
  if (atom_rows.rows() == 0) throw ValidationError("mmd2_vs_atoms: no atoms");
  if (atom_rows.rows() != weights.size()) {
    throw ValidationError("mmd2_vs_atoms: weights do not match atoms");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9 || weights.minCoeff() < 0.0) {
    throw ValidationError("mmd2_vs_atoms: weights must be a probability vector");
  }
  const Chain atoms(a.manifold(), a.dims(), atom_rows);
  const Eigen::MatrixXd cross = cross_gram(spec, a, atoms);   // n x J
  const Eigen::MatrixXd among = cross_gram(spec, atoms, atoms);
  const double self_term = gram_mean(spec, a, a);
  const double cross_term = (cross * weights).mean();
  const double target_term = weights.dot(among * weights);
  return self_term - 2.0 * cross_term + target_term;
}

double kernel_variance_v(const Chain& sample, const KernelSpec& spec) {
  return gram_diag_mean(spec, sample) - gram_mean(spec, sample, sample);
}

IidRiskEstimate iid_risk_estimate(const KernelSpec& spec,
                                  const std::function<Chain(Eigen::Index, Rng&)>& make_sample,
                                  Eigen::Index n, int reps, std::uint64_t master_seed,
                                  Eigen::Index reference_size) {
  if (reps < 2) throw ValidationError("iid_risk_estimate: need reps >= 2");
  Rng ref_rng(master_seed, 0xFFFF0000ULL);  // reserved reference stream
  const Chain reference = make_sample(reference_size, ref_rng);
  const double ref_self = gram_mean(spec, reference, reference);
  const double gamma0_ref = gram_diag_mean(spec, reference) - ref_self;
  const double correction = gamma0_ref / static_cast<double>(reference.size());

  std::vector<double> values(reps);
  for (int r = 0; r < reps; ++r) {
    Rng rng(master_seed, 1 + static_cast<std::uint64_t>(r));
    const Chain sample = make_sample(n, rng);
    const double aa = gram_mean(spec, sample, sample);
    const double ab = gram_mean(spec, sample, reference);
    values[r] = aa - 2.0 * ab + ref_self - correction;
  }
  IidRiskEstimate est;
  est.n = n;
  est.reps = reps;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= reps;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  est.mean_mmd2 = mean;
  est.se = std::sqrt(ss / (reps * static_cast<double>(reps - 1)));
  return est;
}

double corrected_risk_statistic(const Chain& chain, const Chain& iid_reference,
                                const KernelSpec& spec) {
  if (iid_reference.size() <= 1) {
    throw ValidationError("corrected_risk_statistic: reference must have m > 1 points");
  }
  const MmdResult mmd = mmd2_empirical(chain, iid_reference, spec);
  const double gamma0_ref = kernel_variance_v(iid_reference, spec);
  return static_cast<double>(chain.size()) *
         (mmd.mmd2 - gamma0_ref / static_cast<double>(iid_reference.size()));
}

Eigen::VectorXd nearest_mode_frequencies(const Chain& chain,
                                         const std::vector<UnitVector>& modes) {
  if (chain.manifold() != Manifold::sphere) {
    throw ValidationError("nearest_mode_frequencies: sphere chains only");
  }
  if (modes.empty()) throw ValidationError("nearest_mode_frequencies: no modes");
  Eigen::MatrixXd mu(modes.size(), chain.row_width());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    if (modes[j].dim() != chain.row_width()) {
      throw ValidationError("nearest_mode_frequencies: mode dimension mismatch");
    }
    mu.row(static_cast<Eigen::Index>(j)) = modes[j].coords().transpose();
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(modes.size()));
  const Eigen::MatrixXd scores = chain.points() * mu.transpose();  // n x J
  for (Eigen::Index t = 0; t < chain.size(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.cols(); ++j) {
      if (scores(t, j) > scores(t, best)) best = j;  // ties keep the lowest index
    }
    counts[best] += 1.0;
  }
  return counts / static_cast<double>(chain.size());
}

double mode_tv_error(const Chain& chain, const std::vector<UnitVector>& modes,
                     const Eigen::VectorXd& reference_freqs) {
  if (static_cast<std::size_t>(reference_freqs.size()) != modes.size()) {
    throw ValidationError("mode_tv_error: reference frequencies do not match modes");
  }
  if (std::abs(reference_freqs.sum() - 1.0) > 1e-9) {
    throw ValidationError("mode_tv_error: reference frequencies must sum to 1");
  }
  const Eigen::VectorXd freqs = nearest_mode_frequencies(chain, modes);
  return 0.5 * (freqs - reference_freqs).cwiseAbs().sum();
}

}  // namespace kess
