#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kess/errors.hpp"
#include "kess/rng.hpp"

namespace kess {

enum class Manifold { sphere, spd, grassmann, correlation, euclidean };

std::string manifold_name(Manifold m);
Manifold manifold_from_name(const std::string& name);

/// Flattened row width of one point: sphere d, spd m*m, grassmann m*p,
/// correlation m*m, euclidean q.
Eigen::Index point_row_width(Manifold m, const std::vector<int>& dims);

/// Point on S^{d-1} stored as a unit-norm coordinate vector. Construction
/// renormalizes inputs whose norm is within 1e-6 of one and rejects anything
/// further off the sphere.
class UnitVector {
 public:
  explicit UnitVector(Eigen::VectorXd coords);
  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }

 private:
  Eigen::VectorXd coords_;
};

/// Symmetric positive-definite matrix: symmetry within 1e-8, every
/// eigenvalue above 1e-12.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd entries);
  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// Subspace of R^m represented by an m x p frame with orthonormal columns.
class GrassmannPoint {
 public:
  explicit GrassmannPoint(Eigen::MatrixXd frame);
  const Eigen::MatrixXd& frame() const { return frame_; }
  Eigen::Index ambient_dim() const { return frame_.rows(); }
  Eigen::Index subspace_dim() const { return frame_.cols(); }

 private:
  Eigen::MatrixXd frame_;
};

/// Full-rank correlation matrix: symmetric, unit diagonal, eigenvalues
/// above 1e-12.
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(Eigen::MatrixXd entries);
  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// Element of SO(d): orthogonal within 1e-10 with det +1 within 1e-8.
class Rotation {
 public:
  explicit Rotation(Eigen::MatrixXd matrix);
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  UnitVector apply(const UnitVector& x) const;

 private:
  Eigen::MatrixXd matrix_;
};

struct ChainMeta {
  std::string sampler;
  std::uint64_t seed = 0;
  Eigen::Index burn_in_discarded = 0;
};

/// Ordered stationary-path container for MCMC output on one manifold.
/// Points are stored as flattened row-major rows of a dense matrix; every
/// row is validated against the manifold's constructor on entry (sphere rows
/// are renormalized under the UnitVector rule).
class Chain {
 public:
  Chain(Manifold manifold, std::vector<int> dims, Eigen::MatrixXd points,
        std::optional<ChainMeta> meta = std::nullopt);

  Manifold manifold() const { return manifold_; }
  const std::vector<int>& dims() const { return dims_; }
  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index row_width() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  const std::optional<ChainMeta>& meta() const { return meta_; }

  UnitVector unit_vector(Eigen::Index t) const;
  SpdMatrix spd(Eigen::Index t) const;
  GrassmannPoint grassmann(Eigen::Index t) const;
  CorrelationMatrix correlation(Eigen::Index t) const;

  /// Sphere chains only: the same path viewed in the rotated frame q.
  Chain rotated(const Rotation& q) const;

 private:
  Manifold manifold_;
  std::vector<int> dims_;
  Eigen::MatrixXd points_;
  std::optional<ChainMeta> meta_;
};

/// Symmetric matrix log via eigendecomposition; rejects non-SPD input,
/// naming the offending eigenvalue.
Eigen::MatrixXd sym_log(const Eigen::MatrixXd& a);
Eigen::MatrixXd sym_log(const SpdMatrix& a);

/// Symmetric matrix exponential via eigendecomposition.
Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& symmetric);

/// Orthogonal projector U U^T onto the subspace.
Eigen::MatrixXd projection_embed(const GrassmannPoint& p);

/// Projection distance ||U U^T - V V^T||_F / sqrt(2).
double projection_distance(const GrassmannPoint& a, const GrassmannPoint& b);

enum class CholeskyVariant { ecm, lecm };

/// Euclidean coordinates of a correlation matrix through its lower Cholesky
/// factor L (diagonal taken positive).
///   ecm:  strict lower triangle of L, row-major.
///   lecm: elementwise log of diag(L), then the row-major strict lower
///         triangle, concatenated in that order.
Eigen::VectorXd cholesky_embed(const CorrelationMatrix& c, CholeskyVariant variant);

/// Haar-distributed element of SO(d): QR of a Gaussian matrix with column
/// signs fixed so R has positive diagonal, then one column flipped if
/// det < 0. Deterministic given the stream.
Rotation haar_rotation(int d, Rng& rng);

/// arccos(x . y), clamped, in [0, pi].
double sphere_geodesic_distance(const UnitVector& x, const UnitVector& y);

}  // namespace kess
