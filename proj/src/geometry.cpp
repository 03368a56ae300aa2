#include "kess/geometry.hpp"

#include <cmath>
#include <sstream>

namespace kess {

namespace {

std::string scalar_str(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_symmetric(const Eigen::MatrixXd& m, double tol, const char* what) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected square");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw ValidationError(std::string(what) + ": asymmetry " + scalar_str(asym) + " exceeds " +
                          scalar_str(tol));
  }
}

double min_eigenvalue_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::string manifold_name(Manifold m) {
  switch (m) {
    case Manifold::sphere: return "sphere";
    case Manifold::spd: return "spd";
    case Manifold::grassmann: return "grassmann";
    case Manifold::correlation: return "correlation";
    case Manifold::euclidean: return "euclidean";
  }
  throw ValidationError("unknown manifold tag");
}

Manifold manifold_from_name(const std::string& name) {
  if (name == "sphere") return Manifold::sphere;
  if (name == "spd") return Manifold::spd;
  if (name == "grassmann") return Manifold::grassmann;
  if (name == "correlation") return Manifold::correlation;
  if (name == "euclidean") return Manifold::euclidean;
  throw ValidationError("unknown manifold name '" + name + "'");
}

Eigen::Index point_row_width(Manifold m, const std::vector<int>& dims) {
  auto need = [&](std::size_t k) {
    if (dims.size() != k) {
      throw ValidationError(manifold_name(m) + " expects " + std::to_string(k) +
                            " dimension entries, got " + std::to_string(dims.size()));
    }
    for (int d : dims) {
      if (d < 1) throw ValidationError(manifold_name(m) + ": nonpositive dimension");
    }
  };
  switch (m) {
    case Manifold::sphere:
      need(1);
      if (dims[0] < 2) throw ValidationError("sphere: ambient dimension must be >= 2");
      return dims[0];
    case Manifold::spd:
      need(1);
      return static_cast<Eigen::Index>(dims[0]) * dims[0];
    case Manifold::grassmann:
      need(2);
      if (!(dims[1] >= 1 && dims[1] < dims[0])) {
        throw ValidationError("grassmann: need 1 <= p < m, got m=" + std::to_string(dims[0]) +
                              " p=" + std::to_string(dims[1]));
      }
      return static_cast<Eigen::Index>(dims[0]) * dims[1];
    case Manifold::correlation:
      need(1);
      return static_cast<Eigen::Index>(dims[0]) * dims[0];
    case Manifold::euclidean:
      need(1);
      return dims[0];
  }
  throw ValidationError("unknown manifold tag");
}

UnitVector::UnitVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw ValidationError("UnitVector: dimension must be >= 2, got " +
                          std::to_string(coords_.size()));
  }
  if (!coords_.allFinite()) throw ValidationError("UnitVector: non-finite coordinate");
  const double norm = coords_.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    throw ValidationError("UnitVector: |norm - 1| = " + scalar_str(std::abs(norm - 1.0)) +
                          " exceeds the renormalization tolerance 1e-6");
  }
  // renormalizing an already-unit vector would shift the last bits, so the
  // division is idempotent: rows survive write/read cycles unchanged
  if (std::abs(norm - 1.0) > 1e-12) coords_ /= norm;
}

SpdMatrix::SpdMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  check_symmetric(entries_, 1e-8, "SpdMatrix");
  const double min_eig = min_eigenvalue_sym(entries_);
  if (!(min_eig > 1e-12)) {
    throw ValidationError("SpdMatrix: eigenvalue " + scalar_str(min_eig) +
                          " is not above 1e-12");
  }
}

GrassmannPoint::GrassmannPoint(Eigen::MatrixXd frame) : frame_(std::move(frame)) {
  const Eigen::Index m = frame_.rows(), p = frame_.cols();
  if (!(p >= 1 && p < m)) {
    throw ValidationError("GrassmannPoint: need 1 <= p < m, got m=" + std::to_string(m) +
                          " p=" + std::to_string(p));
  }
  const Eigen::MatrixXd gram = frame_.transpose() * frame_;
  const double dev = (gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    throw ValidationError("GrassmannPoint: |U^T U - I| = " + scalar_str(dev) +
                          " exceeds 1e-10");
  }
}

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  check_symmetric(entries_, 1e-8, "CorrelationMatrix");
  const double diag_dev = (entries_.diagonal().array() - 1.0).abs().maxCoeff();
  if (diag_dev > 1e-10) {
    throw ValidationError("CorrelationMatrix: diagonal deviates from 1 by " +
                          scalar_str(diag_dev));
  }
  const double min_eig = min_eigenvalue_sym(entries_);
  if (!(min_eig > 1e-12)) {
    throw ValidationError("CorrelationMatrix: eigenvalue " + scalar_str(min_eig) +
                          " is not above 1e-12");
  }
}

Rotation::Rotation(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  const Eigen::Index d = matrix_.rows();
  if (d != matrix_.cols() || d < 2) throw ValidationError("Rotation: need a square d>=2 matrix");
  const double ortho = (matrix_.transpose() * matrix_ - Eigen::MatrixXd::Identity(d, d))
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-10) {
    throw ValidationError("Rotation: |Q^T Q - I| = " + scalar_str(ortho) + " exceeds 1e-10");
  }
  const double det = matrix_.determinant();
  if (std::abs(det - 1.0) > 1e-8) {
    throw ValidationError("Rotation: det = " + scalar_str(det) + ", expected +1");
  }
}

UnitVector Rotation::apply(const UnitVector& x) const {
  if (x.dim() != dim()) throw ValidationError("Rotation::apply: dimension mismatch");
  return UnitVector(matrix_ * x.coords());
}

Chain::Chain(Manifold manifold, std::vector<int> dims, Eigen::MatrixXd points,
             std::optional<ChainMeta> meta)
    : manifold_(manifold), dims_(std::move(dims)), points_(std::move(points)),
      meta_(std::move(meta)) {
  const Eigen::Index width = point_row_width(manifold_, dims_);
  if (points_.rows() == 0) throw ValidationError("Chain: empty point sequence");
  if (points_.cols() != width) {
    throw ValidationError("Chain: rows have width " + std::to_string(points_.cols()) +
                          ", manifold expects " + std::to_string(width));
  }
  for (Eigen::Index t = 0; t < points_.rows(); ++t) {
    try {
      switch (manifold_) {
        case Manifold::sphere: {
          UnitVector u(points_.row(t).transpose());
          points_.row(t) = u.coords().transpose();  // store renormalized
          break;
        }
        case Manifold::spd: (void)spd(t); break;
        case Manifold::grassmann: (void)grassmann(t); break;
        case Manifold::correlation: (void)correlation(t); break;
        case Manifold::euclidean:
          if (!points_.row(t).allFinite()) throw ValidationError("non-finite coordinate");
          break;
      }
    } catch (const ValidationError& e) {
      throw ValidationError("Chain point " + std::to_string(t) + ": " + e.what());
    }
  }
}

namespace {

// copies one (strided) row into a row-major rectangle
Eigen::MatrixXd unflatten_row(const Eigen::MatrixXd& points, Eigen::Index t, Eigen::Index rows,
                              Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = points(t, i * cols + j);
  }
  return out;
}

}  // namespace

UnitVector Chain::unit_vector(Eigen::Index t) const {
  if (manifold_ != Manifold::sphere) throw ValidationError("Chain: not a sphere chain");
  return UnitVector(points_.row(t).transpose());
}

SpdMatrix Chain::spd(Eigen::Index t) const {
  if (manifold_ != Manifold::spd) throw ValidationError("Chain: not an SPD chain");
  return SpdMatrix(unflatten_row(points_, t, dims_[0], dims_[0]));
}

GrassmannPoint Chain::grassmann(Eigen::Index t) const {
  if (manifold_ != Manifold::grassmann) throw ValidationError("Chain: not a Grassmann chain");
  return GrassmannPoint(unflatten_row(points_, t, dims_[0], dims_[1]));
}

CorrelationMatrix Chain::correlation(Eigen::Index t) const {
  if (manifold_ != Manifold::correlation) throw ValidationError("Chain: not a correlation chain");
  return CorrelationMatrix(unflatten_row(points_, t, dims_[0], dims_[0]));
}

Chain Chain::rotated(const Rotation& q) const {
  if (manifold_ != Manifold::sphere) {
    throw ValidationError("Chain::rotated is defined for sphere chains only");
  }
  if (q.dim() != points_.cols()) throw ValidationError("Chain::rotated: dimension mismatch");
  return Chain(manifold_, dims_, points_ * q.matrix().transpose(), meta_);
}

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& a) {
  check_symmetric(a, 1e-8, "sym_log");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > 1e-12)) {
    throw ValidationError("sym_log: eigenvalue " + scalar_str(min_eig) +
                          " is not above 1e-12; input is not SPD");
  }
  const Eigen::VectorXd logs = es.eigenvalues().array().log();
  return es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_log(const SpdMatrix& a) { return sym_log(a.entries()); }

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& symmetric) {
  check_symmetric(symmetric, 1e-8, "sym_exp");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric);
  const Eigen::VectorXd exps = es.eigenvalues().array().exp();
  return es.eigenvectors() * exps.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd projection_embed(const GrassmannPoint& p) {
  return p.frame() * p.frame().transpose();
}

double projection_distance(const GrassmannPoint& a, const GrassmannPoint& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw ValidationError("projection_distance: ambient dimension mismatch");
  }
  return (projection_embed(a) - projection_embed(b)).norm() / std::sqrt(2.0);
}

Eigen::VectorXd cholesky_embed(const CorrelationMatrix& c, CholeskyVariant variant) {
  const Eigen::Index m = c.size();
  Eigen::LLT<Eigen::MatrixXd> llt(c.entries());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("cholesky_embed: factorization failed; matrix numerically not PD");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::Index strict = m * (m - 1) / 2;
  const bool log_diag = variant == CholeskyVariant::lecm;
  Eigen::VectorXd out(log_diag ? m + strict : strict);
  Eigen::Index k = 0;
  if (log_diag) {
    for (Eigen::Index i = 0; i < m; ++i) out[k++] = std::log(l(i, i));
  }
  for (Eigen::Index i = 1; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) out[k++] = l(i, j);
  }
  return out;
}

Rotation haar_rotation(int d, Rng& rng) {
  if (d < 2) throw ValidationError("haar_rotation: need d >= 2");
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(d - 1) = -q.col(d - 1);
  return Rotation(std::move(q));
}

double sphere_geodesic_distance(const UnitVector& x, const UnitVector& y) {
  if (x.dim() != y.dim()) throw ValidationError("sphere_geodesic_distance: dimension mismatch");
  const double t = std::clamp(x.coords().dot(y.coords()), -1.0, 1.0);
  return std::acos(t);
}

}  // namespace kess
