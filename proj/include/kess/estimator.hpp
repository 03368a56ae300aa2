#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kess/kernels.hpp"

namespace kess {

enum class WindowKind { bartlett, truncated, custom };

std::string window_kind_name(WindowKind w);
WindowKind window_kind_from_name(const std::string& name);

/// Lag window plus bandwidth policy. An unset bandwidth resolves to the
/// n-dependent default floor(n^(1/3)).
struct WindowSpec {
  WindowKind kind = WindowKind::bartlett;
  std::optional<int> bandwidth;        // unset: auto
  std::vector<double> custom_weights;  // custom kind: weight at lags 1..b

  /// Largest integer b with b^3 <= n.
  static int auto_bandwidth(Eigen::Index n);

  /// Resolves auto and validates 0 <= b < n.
  int resolve_bandwidth(Eigen::Index n) const;

  /// w(lag / (b+1)) for lag in 1..b; bartlett is 1 - u, truncated is 1.
  double weight(int lag, int b) const;
};

/// gamma_hat_0..gamma_hat_b, each the mean of one superdiagonal of the
/// centered Gram (divisor n - lag).
struct LagCovariances {
  std::vector<double> gammas;
  Eigen::Index n = 0;
  int bandwidth = 0;
};

enum class EssStatus { ok, unstable_sigma };

struct EssReport {
  Eigen::Index n = 0;
  double gamma0 = 0;
  double sigma2 = 0;
  double ess = std::numeric_limits<double>::quiet_NaN();  // NaN unless status == ok
  double tau = std::numeric_limits<double>::quiet_NaN();
  int bandwidth = 0;
  WindowKind window = WindowKind::bartlett;
  EssStatus status = EssStatus::ok;
};

/// H K H with H = I - (1/n) 1 1^T, evaluated entrywise as
/// K_st - r_s - r_t + g from row means r and their mean g.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram);
Eigen::MatrixXd center_gram(const GramMatrix& gram);

LagCovariances lag_covariances(const Eigen::MatrixXd& centered, int bandwidth);

/// Same values without materializing the centered matrix: centering is
/// applied on the fly while streaming superdiagonals.
LagCovariances lag_covariances(const GramMatrix& gram, int bandwidth);

/// sigma2_hat = gamma_0 + 2 sum_{l=1..b} w(l/(b+1)) gamma_l. May be
/// nonpositive; that is reported downstream as a status, never clamped.
double long_run_variance(const LagCovariances& lags, const WindowSpec& window);

/// Windowed long-run variance, ESS and tau from a lag sequence; shared tail
/// of the kernel and scalar pipelines.
EssReport ess_from_lags(const LagCovariances& lags, const WindowSpec& window, double scale_hint);

/// Full pipeline gram -> center -> lag covariances -> windowed variance.
/// Throws on zero feature variance (gamma_0 below 1e-14 * K0); a nonpositive
/// sigma2_hat yields status unstable_sigma with ess/tau flagged as NaN.
EssReport kernel_ess(const Chain& chain, const KernelSpec& spec, const WindowSpec& window = {});

/// Exact finite-sample ESS n^2 g0 / (n g0 + 2 sum (n-l) g_l) from population
/// lag covariances gamma_0..gamma_{n-1}. Returns +infinity when the
/// denominator vanishes; rejects gamma_0 <= 0 and negative denominators.
double exact_population_ess(std::span<const double> gammas, Eigen::Index n);

/// Lag-window ESS of a scalar series, empirically centered.
EssReport scalar_ess(std::span<const double> series, const WindowSpec& window = {});

struct DirectionEss {
  double lambda = 0;   // eigenvalue of the empirical feature covariance
  double sigma2 = 0;   // windowed long-run variance of the projected series
  double ess = std::numeric_limits<double>::quiet_NaN();
};

struct HarmonicMeanReport {
  EssReport kernel_linear;
  double weighted_harmonic_mean = 0;
  std::vector<DirectionEss> per_direction;
};

/// Linear-kernel ESS of a sphere chain next to the variance-weighted
/// harmonic mean of per-eigendirection scalar ESS values. In the empirical
/// eigenbasis the two agree exactly (up to roundoff): the trace of the
/// centered Gram's lag sums equals the sum of per-direction lag sums.
HarmonicMeanReport harmonic_mean_diagnostic(const Chain& chain, const WindowSpec& window = {});

struct PrecisionReport {
  double epsilon = 0;
  double risk = 0;          // sigma2_hat / n
  double required_ess = 0;  // gamma_0 / epsilon^2
  bool pass_risk = false;
  bool pass_ess = false;
};

/// Mean-square precision rule: pass iff sigma2/n <= eps^2, equivalently
/// ESS >= gamma_0 / eps^2. Both forms are evaluated and must agree.
PrecisionReport precision_check(const EssReport& report, double epsilon);

}  // namespace kess
