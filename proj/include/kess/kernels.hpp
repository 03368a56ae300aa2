#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kess/geometry.hpp"

namespace kess {

enum class KernelFamily {
  sphere_poisson,
  sphere_gegenbauer,
  grassmann_projection_gauss,
  spd_log_euclidean_gauss,
  correlation_cholesky_gauss,
  sphere_linear,
  sphere_geodesic_gauss_unsafe,
  euclidean_gauss,
};

std::string kernel_family_name(KernelFamily f);
KernelFamily kernel_family_from_name(const std::string& name);

/// Closed description of a kernel family plus its parameters. Instances are
/// immutable; the factories validate parameter ranges.
///
/// sphere_geodesic_gauss_unsafe is exp(-d_g^2/h^2) with the geodesic
/// distance. It is not positive definite on the sphere, exists only so the
/// failure can be exhibited, and is rejected by the ESS pipeline; its
/// factory requires an explicit acknowledgment flag.
class KernelSpec {
 public:
  static KernelSpec sphere_poisson(double rho);
  static KernelSpec sphere_gegenbauer(double rho, int truncation);
  static KernelSpec grassmann_projection_gauss(double beta);
  static KernelSpec spd_log_euclidean_gauss(double beta);
  static KernelSpec correlation_cholesky_gauss(double beta,
                                               CholeskyVariant variant = CholeskyVariant::ecm);
  static KernelSpec sphere_linear();
  static KernelSpec sphere_geodesic_gauss_unsafe(double h, bool acknowledge_not_pd);
  static KernelSpec euclidean_gauss(double beta);

  KernelFamily family() const { return family_; }
  double rho() const { return rho_; }
  double beta() const { return beta_; }
  double bandwidth_h() const { return h_; }
  int truncation() const { return truncation_; }
  CholeskyVariant cholesky_variant() const { return variant_; }

  /// Manifold the family evaluates on.
  Manifold manifold() const;

  /// K0 = sup_x k(x, x) for the family.
  double diagonal_bound() const;

  /// False only for the non-positive-definite geodesic Gaussian.
  bool positive_definite() const {
    return family_ != KernelFamily::sphere_geodesic_gauss_unsafe;
  }

  /// Smallest M with rho^{M+1}/(1-rho) <= 1e-12; series truncation used when
  /// sphere_poisson is evaluated off S^2.
  static int default_truncation(double rho);

 private:
  KernelSpec() = default;
  KernelFamily family_ = KernelFamily::sphere_linear;
  double rho_ = 0, beta_ = 0, h_ = 0;
  int truncation_ = 0;
  CholeskyVariant variant_ = CholeskyVariant::ecm;
};

/// n x n kernel evaluations over one chain; symmetric by construction
/// (upper triangle mirrored), diagonal within tolerance of the family bound.
class GramMatrix {
 public:
  GramMatrix(Eigen::MatrixXd values, KernelSpec kernel);
  const Eigen::MatrixXd& values() const { return values_; }
  const KernelSpec& kernel() const { return kernel_; }
  Eigen::Index size() const { return values_.rows(); }

 private:
  Eigen::MatrixXd values_;
  KernelSpec kernel_;
};

/// Normalized Gegenbauer partial sum; see gegenbauer.hpp for the recurrence
/// and the tail bound rho^{M+1}/(1-rho).
double gegenbauer_kernel_eval(int d, double rho, int truncation, double t);

double kernel_eval(const KernelSpec& spec, const UnitVector& x, const UnitVector& y);
double kernel_eval(const KernelSpec& spec, const SpdMatrix& x, const SpdMatrix& y);
double kernel_eval(const KernelSpec& spec, const GrassmannPoint& x, const GrassmannPoint& y);
double kernel_eval(const KernelSpec& spec, const CorrelationMatrix& x, const CorrelationMatrix& y);
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

GramMatrix gram(const KernelSpec& spec, const Chain& chain);

/// Cross Gram block k(a_s, b_t); no symmetry post-processing.
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Chain& a, const Chain& b);

/// Mean of all entries of the cross Gram of a vs b, evaluated in row blocks
/// so the full matrix is never materialized.
double gram_mean(const KernelSpec& spec, const Chain& a, const Chain& b);

/// Mean of k(x_t, x_t) over the chain.
double gram_diag_mean(const KernelSpec& spec, const Chain& a);

struct PdAuditReport {
  double min_eigenvalue = 0;
  bool pass = false;
  Eigen::Index n = 0;
  double tol = 0;
};

/// Minimum eigenvalue of the Gram over the point set; pass iff
/// min_eig >= -tol. Default tol is 1e-8, scaled up once n * K0 passes 1e3
/// to track eigensolver roundoff growth.
PdAuditReport pd_audit(const KernelSpec& spec, const Chain& points,
                       std::optional<double> tol = std::nullopt);

struct PdFailureWitness {
  bool found = false;
  double h = 0;
  int set_index = -1;
  double min_eigenvalue = 0;
  int n_points = 0;
};

/// Documented search for a Gram with a genuinely negative eigenvalue under
/// the geodesic Gaussian on S^2: bandwidths {0.5, 1, 2, 4}, `sets` uniform
/// random point sets of `points_per_set` points, failure threshold -1e-6.
/// Returns the worst witness over the whole grid.
PdFailureWitness geodesic_gauss_pd_failure_search(std::uint64_t seed, int sets = 50,
                                                  int points_per_set = 30,
                                                  double threshold = -1e-6);

/// A pullback family written as embedding + matched Euclidean Gaussian:
/// kernel_eval(spec, x, y) == euclidean kernel at the embedded points. The
/// embedding takes a flattened point row plus the manifold dims.
struct TransportedKernel {
  KernelSpec euclidean;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& flat_point,
                                const std::vector<int>& dims)>
      embed_point;

  /// Embed every point of a chain, producing the matched Euclidean chain.
  Chain apply(const Chain& chain) const;
};

TransportedKernel transported_spec(const KernelSpec& spec);

}  // namespace kess
