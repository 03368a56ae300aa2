#include "kess/estimator.hpp"

#include <cassert>
#include <cmath>

namespace kess {

namespace {

constexpr double kZeroVarianceFloor = 1e-14;

LagCovariances lags_from_entries(const Eigen::MatrixXd& k, const Eigen::VectorXd& row_means,
                                 double grand_mean, int bandwidth) {
  const Eigen::Index n = k.rows();
  LagCovariances lags;
  lags.n = n;
  lags.bandwidth = bandwidth;
  lags.gammas.resize(bandwidth + 1);
  for (int lag = 0; lag <= bandwidth; ++lag) {
    double sum = 0.0;
    for (Eigen::Index t = 0; t + lag < n; ++t) {
      sum += ((k(t, t + lag) - row_means[t]) - row_means[t + lag]) + grand_mean;
    }
    lags.gammas[lag] = sum / static_cast<double>(n - lag);
  }
  return lags;
}

void check_bandwidth(Eigen::Index n, int bandwidth) {
  if (bandwidth < 0 || bandwidth >= n) {
    throw ValidationError("bandwidth " + std::to_string(bandwidth) +
                          " out of range for n = " + std::to_string(n));
  }
}

}  // namespace

std::string window_kind_name(WindowKind w) {
  switch (w) {
    case WindowKind::bartlett: return "bartlett";
    case WindowKind::truncated: return "truncated";
    case WindowKind::custom: return "custom";
  }
  throw ValidationError("unknown window tag");
}

WindowKind window_kind_from_name(const std::string& name) {
  if (name == "bartlett") return WindowKind::bartlett;
  if (name == "truncated") return WindowKind::truncated;
  if (name == "custom") return WindowKind::custom;
  throw ValidationError("unknown window '" + name + "'");
}

int WindowSpec::auto_bandwidth(Eigen::Index n) {
  int b = 0;
  while (static_cast<long long>(b + 1) * (b + 1) * (b + 1) <= n) ++b;
  return b;
}

int WindowSpec::resolve_bandwidth(Eigen::Index n) const {
  const int b = bandwidth.value_or(auto_bandwidth(n));
  check_bandwidth(n, b);
  if (kind == WindowKind::custom && static_cast<int>(custom_weights.size()) < b) {
    throw ValidationError("custom window: need " + std::to_string(b) + " weights, got " +
                          std::to_string(custom_weights.size()));
  }
  return b;
}

double WindowSpec::weight(int lag, int b) const {
  if (lag < 1 || lag > b) throw ValidationError("window weight: lag out of range");
  switch (kind) {
    case WindowKind::bartlett:
      return 1.0 - static_cast<double>(lag) / static_cast<double>(b + 1);
    case WindowKind::truncated:
      return 1.0;
    case WindowKind::custom:
      return custom_weights[lag - 1];
  }
  throw ValidationError("unknown window tag");
}

Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols()) throw ValidationError("center_gram: not square");
  const Eigen::VectorXd r = gram.rowwise().mean();
  const double g = r.mean();
  Eigen::MatrixXd centered = gram;
  centered.colwise() -= r;
  centered.rowwise() -= r.transpose();
  centered.array() += g;
  return centered;
}

Eigen::MatrixXd center_gram(const GramMatrix& gram) { return center_gram(gram.values()); }

LagCovariances lag_covariances(const Eigen::MatrixXd& centered, int bandwidth) {
  if (centered.rows() != centered.cols()) throw ValidationError("lag_covariances: not square");
  check_bandwidth(centered.rows(), bandwidth);
  const Eigen::Index n = centered.rows();
  LagCovariances lags;
  lags.n = n;
  lags.bandwidth = bandwidth;
  lags.gammas.resize(bandwidth + 1);
  for (int lag = 0; lag <= bandwidth; ++lag) {
    double sum = 0.0;
    for (Eigen::Index t = 0; t + lag < n; ++t) sum += centered(t, t + lag);
    lags.gammas[lag] = sum / static_cast<double>(n - lag);
  }
  return lags;
}

LagCovariances lag_covariances(const GramMatrix& gram, int bandwidth) {
  check_bandwidth(gram.size(), bandwidth);
  const Eigen::VectorXd r = gram.values().rowwise().mean();
  return lags_from_entries(gram.values(), r, r.mean(), bandwidth);
}

double long_run_variance(const LagCovariances& lags, const WindowSpec& window) {
  const int b = lags.bandwidth;
  if (static_cast<int>(lags.gammas.size()) != b + 1) {
    throw ValidationError("long_run_variance: lag sequence length does not match bandwidth");
  }
  if (window.bandwidth && *window.bandwidth != b) {
    throw ValidationError("long_run_variance: window bandwidth differs from the lag bandwidth");
  }
  double sigma2 = lags.gammas[0];
  for (int lag = 1; lag <= b; ++lag) {
    sigma2 += 2.0 * window.weight(lag, b) * lags.gammas[lag];
  }
  return sigma2;
}

EssReport ess_from_lags(const LagCovariances& lags, const WindowSpec& window,
                        double scale_hint) {
  EssReport report;
  report.n = lags.n;
  report.bandwidth = lags.bandwidth;
  report.window = window.kind;
  report.gamma0 = lags.gammas[0];
  if (report.gamma0 <= kZeroVarianceFloor * std::max(1.0, scale_hint)) {
    throw ValidationError("zero feature variance: gamma_0 = " + std::to_string(report.gamma0));
  }
  report.sigma2 = long_run_variance(lags, window);
  if (report.sigma2 <= 0.0) {
    report.status = EssStatus::unstable_sigma;
    return report;
  }
  report.status = EssStatus::ok;
  report.ess = static_cast<double>(report.n) * report.gamma0 / report.sigma2;
  report.tau = report.sigma2 / report.gamma0;
  return report;
}

EssReport kernel_ess(const Chain& chain, const KernelSpec& spec, const WindowSpec& window) {
  if (chain.size() < 4) throw ValidationError("kernel_ess: need n >= 4");
  if (!spec.positive_definite()) {
    throw ValidationError("kernel_ess: '" + kernel_family_name(spec.family()) +
                          "' is not positive definite and is excluded from the ESS pipeline");
  }
  const int b = window.resolve_bandwidth(chain.size());
  const GramMatrix k = gram(spec, chain);
  const LagCovariances lags = lag_covariances(k, b);
  return ess_from_lags(lags, window, spec.diagonal_bound());
}

double exact_population_ess(std::span<const double> gammas, Eigen::Index n) {
  if (n < 1) throw ValidationError("exact_population_ess: need n >= 1");
  if (static_cast<Eigen::Index>(gammas.size()) < n) {
    throw ValidationError("exact_population_ess: need gamma_0..gamma_{n-1}");
  }
  const double gamma0 = gammas[0];
  if (!(gamma0 > 0.0)) throw ValidationError("exact_population_ess: gamma_0 must be > 0");
  double denom = static_cast<double>(n) * gamma0;
  for (Eigen::Index lag = 1; lag < n; ++lag) {
    denom += 2.0 * static_cast<double>(n - lag) * gammas[lag];
  }
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  if (denom < 0.0) {
    throw ValidationError(
        "exact_population_ess: negative risk denominator; the sequence is not a valid kernel "
        "autocovariance sequence");
  }
  return static_cast<double>(n) * static_cast<double>(n) * gamma0 / denom;
}

EssReport scalar_ess(std::span<const double> series, const WindowSpec& window) {
  const Eigen::Index n = static_cast<Eigen::Index>(series.size());
  if (n < 4) throw ValidationError("scalar_ess: need n >= 4");
  const int b = window.resolve_bandwidth(n);
  Eigen::Map<const Eigen::VectorXd> y(series.data(), n);
  const Eigen::VectorXd centered = y.array() - y.mean();
  const double scale = centered.cwiseAbs().maxCoeff();

  LagCovariances lags;
  lags.n = n;
  lags.bandwidth = b;
  lags.gammas.resize(b + 1);
  for (int lag = 0; lag <= b; ++lag) {
    lags.gammas[lag] = centered.head(n - lag).dot(centered.tail(n - lag)) /
                       static_cast<double>(n - lag);
  }
  if (scale == 0.0) throw ValidationError("scalar_ess: constant series has zero variance");
  return ess_from_lags(lags, window, scale * scale);
}

HarmonicMeanReport harmonic_mean_diagnostic(const Chain& chain, const WindowSpec& window) {
  if (chain.manifold() != Manifold::sphere) {
    throw ValidationError("harmonic_mean_diagnostic: sphere chains only");
  }
  const Eigen::Index n = chain.size();
  const Eigen::Index d = chain.row_width();
  HarmonicMeanReport report;
  report.kernel_linear = kernel_ess(chain, KernelSpec::sphere_linear(), window);
  const int b = report.kernel_linear.bandwidth;

  // empirical feature covariance (divisor n, matching gamma_hat_0) and its
  // eigenbasis
  Eigen::MatrixXd centered = chain.points();
  centered.rowwise() -= chain.points().colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0)) {
    throw ValidationError("harmonic_mean_diagnostic: degenerate feature covariance");
  }

  double weighted_sigma2 = 0.0;  // sum over active directions of sigma2_j / n
  double lambda_total = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    DirectionEss dir;
    dir.lambda = es.eigenvalues()[j];
    lambda_total += dir.lambda;
    const Eigen::VectorXd series = centered * es.eigenvectors().col(j);
    LagCovariances lags;
    lags.n = n;
    lags.bandwidth = b;
    lags.gammas.resize(b + 1);
    for (int lag = 0; lag <= b; ++lag) {
      lags.gammas[lag] =
          series.head(n - lag).dot(series.tail(n - lag)) / static_cast<double>(n - lag);
    }
    dir.sigma2 = long_run_variance(lags, window);
    if (dir.lambda > 1e-12 * lambda_max) {
      weighted_sigma2 += dir.sigma2 / static_cast<double>(n);
      if (dir.sigma2 > 0.0) dir.ess = static_cast<double>(n) * dir.lambda / dir.sigma2;
    }
    report.per_direction.push_back(dir);
  }
  report.weighted_harmonic_mean = lambda_total / weighted_sigma2;
  return report;
}

PrecisionReport precision_check(const EssReport& report, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("precision_check: epsilon must be > 0");
  if (report.status != EssStatus::ok) {
    throw ValidationError("precision_check: report has unstable sigma2; rerun with a longer "
                          "chain or different bandwidth");
  }
  PrecisionReport out;
  out.epsilon = epsilon;
  out.risk = report.sigma2 / static_cast<double>(report.n);
  out.required_ess = report.gamma0 / (epsilon * epsilon);
  out.pass_risk = out.risk <= epsilon * epsilon;
  out.pass_ess = report.ess >= out.required_ess;
  assert(out.pass_risk == out.pass_ess);
  return out;
}

}  // namespace kess
