#include "kess/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kess/gegenbauer.hpp"

namespace kess {

namespace {

// Resolved evaluation plan for one sample: feature rows plus the scalar map
// applied to dot products (sphere families) or squared feature distances
// (Gaussian pullbacks).
enum class EntryKind { poisson_s2, gegenbauer, linear, geodesic_unsafe, gaussian };

struct Embedded {
  Eigen::MatrixXd feats;   // n x q feature rows
  Eigen::VectorXd sqnorm;  // row squared norms (gaussian only)
  EntryKind kind = EntryKind::linear;
  double rho = 0, h = 0, beta_eff = 0;
  int d = 0, truncation = 0;
};

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
as_square(const Eigen::VectorXd& flat, Eigen::Index m) {
  return {flat.data(), m, m};
}

Embedded embed(const KernelSpec& spec, const Chain& chain) {
  if (spec.manifold() != chain.manifold()) {
    throw ValidationError("kernel family '" + kernel_family_name(spec.family()) +
                          "' expects a " + manifold_name(spec.manifold()) + " chain, got " +
                          manifold_name(chain.manifold()));
  }
  Embedded e;
  switch (spec.family()) {
    case KernelFamily::sphere_poisson: {
      e.d = chain.dims()[0];
      e.rho = spec.rho();
      if (e.d == 3) {
        e.kind = EntryKind::poisson_s2;
      } else {
        e.kind = EntryKind::gegenbauer;
        e.truncation = KernelSpec::default_truncation(e.rho);
      }
      e.feats = chain.points();
      return e;
    }
    case KernelFamily::sphere_gegenbauer:
      e.kind = EntryKind::gegenbauer;
      e.d = chain.dims()[0];
      e.rho = spec.rho();
      e.truncation = spec.truncation();
      e.feats = chain.points();
      return e;
    case KernelFamily::sphere_linear:
      e.kind = EntryKind::linear;
      e.feats = chain.points();
      return e;
    case KernelFamily::sphere_geodesic_gauss_unsafe:
      e.kind = EntryKind::geodesic_unsafe;
      e.h = spec.bandwidth_h();
      e.feats = chain.points();
      return e;
    case KernelFamily::spd_log_euclidean_gauss: {
      e.kind = EntryKind::gaussian;
      e.beta_eff = spec.beta();
      const Eigen::Index m = chain.dims()[0];
      e.feats.resize(chain.size(), m * m);
      for (Eigen::Index t = 0; t < chain.size(); ++t) {
        const Eigen::VectorXd flat = chain.points().row(t).transpose();
        const Eigen::MatrixXd lg = sym_log(Eigen::MatrixXd(as_square(flat, m)));
        for (Eigen::Index i = 0; i < m; ++i) {
          for (Eigen::Index j = 0; j < m; ++j) e.feats(t, i * m + j) = lg(i, j);
        }
      }
      break;
    }
    case KernelFamily::grassmann_projection_gauss: {
      // d_pr^2 = ||UU^T - VV^T||_F^2 / 2, so beta folds to beta/2 on the
      // flattened projectors.
      e.kind = EntryKind::gaussian;
      e.beta_eff = spec.beta() / 2.0;
      const Eigen::Index m = chain.dims()[0];
      e.feats.resize(chain.size(), m * m);
      for (Eigen::Index t = 0; t < chain.size(); ++t) {
        const Eigen::MatrixXd p = projection_embed(chain.grassmann(t));
        for (Eigen::Index i = 0; i < m; ++i) {
          for (Eigen::Index j = 0; j < m; ++j) e.feats(t, i * m + j) = p(i, j);
        }
      }
      break;
    }
    case KernelFamily::correlation_cholesky_gauss: {
      e.kind = EntryKind::gaussian;
      e.beta_eff = spec.beta();
      for (Eigen::Index t = 0; t < chain.size(); ++t) {
        const Eigen::VectorXd v = cholesky_embed(chain.correlation(t), spec.cholesky_variant());
        if (t == 0) e.feats.resize(chain.size(), v.size());
        e.feats.row(t) = v.transpose();
      }
      break;
    }
    case KernelFamily::euclidean_gauss:
      e.kind = EntryKind::gaussian;
      e.beta_eff = spec.beta();
      e.feats = chain.points();
      break;
  }
  e.sqnorm = e.feats.rowwise().squaredNorm();
  return e;
}

// out = k(A[r0..r0+nr), B[c0..c0+nc)) as a dense block.
Eigen::MatrixXd kernel_block(const Embedded& a, const Embedded& b, Eigen::Index r0,
                             Eigen::Index nr, Eigen::Index c0, Eigen::Index nc) {
  Eigen::MatrixXd t = a.feats.middleRows(r0, nr) * b.feats.middleRows(c0, nc).transpose();
  switch (a.kind) {
    case EntryKind::poisson_s2:
      return (1.0 - 2.0 * a.rho * t.array() + a.rho * a.rho).rsqrt();
    case EntryKind::linear:
      return t;
    case EntryKind::geodesic_unsafe: {
      const Eigen::ArrayXXd ang = t.array().min(1.0).max(-1.0).acos();
      return (-(ang * ang) / (a.h * a.h)).exp();
    }
    case EntryKind::gegenbauer: {
      Eigen::MatrixXd out(nr, nc);
      for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nc; ++j) {
          const double x = std::clamp(t(i, j), -1.0, 1.0);
          out(i, j) = detail::gegenbauer_truncated_series<double>(a.d, a.rho, a.truncation, x);
        }
      }
      return out;
    }
    case EntryKind::gaussian: {
      Eigen::ArrayXXd d2 = (-2.0 * t).array();
      d2.colwise() += a.sqnorm.segment(r0, nr).array();
      d2.rowwise() += b.sqnorm.segment(c0, nc).transpose().array();
      return (-a.beta_eff * d2.max(0.0)).exp();
    }
  }
  throw ValidationError("unreachable kernel kind");
}

double psi_scalar(const KernelSpec& spec, int d, double t) {
  switch (spec.family()) {
    case KernelFamily::sphere_poisson:
      if (d == 3) return 1.0 / std::sqrt(1.0 - 2.0 * spec.rho() * t + spec.rho() * spec.rho());
      return detail::gegenbauer_truncated_series<double>(
          d, spec.rho(), KernelSpec::default_truncation(spec.rho()), std::clamp(t, -1.0, 1.0));
    case KernelFamily::sphere_gegenbauer:
      return detail::gegenbauer_truncated_series<double>(d, spec.rho(), spec.truncation(),
                                                         std::clamp(t, -1.0, 1.0));
    case KernelFamily::sphere_linear:
      return t;
    case KernelFamily::sphere_geodesic_gauss_unsafe: {
      const double ang = std::acos(std::clamp(t, -1.0, 1.0));
      return std::exp(-(ang * ang) / (spec.bandwidth_h() * spec.bandwidth_h()));
    }
    default:
      throw ValidationError("psi_scalar: not a sphere family");
  }
}

constexpr Eigen::Index kBlockRows = 1024;

}  // namespace

std::string kernel_family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::sphere_poisson: return "sphere_poisson";
    case KernelFamily::sphere_gegenbauer: return "sphere_gegenbauer";
    case KernelFamily::grassmann_projection_gauss: return "grassmann_projection_gauss";
    case KernelFamily::spd_log_euclidean_gauss: return "spd_log_euclidean_gauss";
    case KernelFamily::correlation_cholesky_gauss: return "correlation_cholesky_gauss";
    case KernelFamily::sphere_linear: return "sphere_linear";
    case KernelFamily::sphere_geodesic_gauss_unsafe: return "sphere_geodesic_gauss_unsafe";
    case KernelFamily::euclidean_gauss: return "euclidean_gauss";
  }
  throw ValidationError("unknown kernel family tag");
}

KernelFamily kernel_family_from_name(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  if (s == "sphere_poisson") return KernelFamily::sphere_poisson;
  if (s == "sphere_gegenbauer") return KernelFamily::sphere_gegenbauer;
  if (s == "grassmann_projection_gauss") return KernelFamily::grassmann_projection_gauss;
  if (s == "spd_log_euclidean_gauss") return KernelFamily::spd_log_euclidean_gauss;
  if (s == "correlation_cholesky_gauss") return KernelFamily::correlation_cholesky_gauss;
  if (s == "sphere_linear") return KernelFamily::sphere_linear;
  if (s == "sphere_geodesic_gauss_unsafe" || s == "geodesic_gauss_unsafe") {
    return KernelFamily::sphere_geodesic_gauss_unsafe;
  }
  if (s == "euclidean_gauss") return KernelFamily::euclidean_gauss;
  throw ValidationError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::sphere_poisson(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ValidationError("sphere_poisson: rho must be in (0,1)");
  }
  KernelSpec s;
  s.family_ = KernelFamily::sphere_poisson;
  s.rho_ = rho;
  return s;
}

KernelSpec KernelSpec::sphere_gegenbauer(double rho, int truncation) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw ValidationError("sphere_gegenbauer: rho must be in (0,1)");
  }
  if (truncation < 1) throw ValidationError("sphere_gegenbauer: truncation must be >= 1");
  KernelSpec s;
  s.family_ = KernelFamily::sphere_gegenbauer;
  s.rho_ = rho;
  s.truncation_ = truncation;
  return s;
}

KernelSpec KernelSpec::grassmann_projection_gauss(double beta) {
  if (!(beta > 0.0)) throw ValidationError("grassmann_projection_gauss: beta must be > 0");
  KernelSpec s;
  s.family_ = KernelFamily::grassmann_projection_gauss;
  s.beta_ = beta;
  return s;
}

KernelSpec KernelSpec::spd_log_euclidean_gauss(double beta) {
  if (!(beta > 0.0)) throw ValidationError("spd_log_euclidean_gauss: beta must be > 0");
  KernelSpec s;
  s.family_ = KernelFamily::spd_log_euclidean_gauss;
  s.beta_ = beta;
  return s;
}

KernelSpec KernelSpec::correlation_cholesky_gauss(double beta, CholeskyVariant variant) {
  if (!(beta > 0.0)) throw ValidationError("correlation_cholesky_gauss: beta must be > 0");
  KernelSpec s;
  s.family_ = KernelFamily::correlation_cholesky_gauss;
  s.beta_ = beta;
  s.variant_ = variant;
  return s;
}

KernelSpec KernelSpec::sphere_linear() {
  KernelSpec s;
  s.family_ = KernelFamily::sphere_linear;
  return s;
}

KernelSpec KernelSpec::sphere_geodesic_gauss_unsafe(double h, bool acknowledge_not_pd) {
  if (!acknowledge_not_pd) {
    throw ValidationError(
        "sphere_geodesic_gauss_unsafe requires acknowledge_not_pd=true; this family is not "
        "positive definite on the sphere and exists only for the failure demonstration");
  }
  if (!(h > 0.0)) throw ValidationError("sphere_geodesic_gauss_unsafe: h must be > 0");
  KernelSpec s;
  s.family_ = KernelFamily::sphere_geodesic_gauss_unsafe;
  s.h_ = h;
  return s;
}

KernelSpec KernelSpec::euclidean_gauss(double beta) {
  if (!(beta > 0.0)) throw ValidationError("euclidean_gauss: beta must be > 0");
  KernelSpec s;
  s.family_ = KernelFamily::euclidean_gauss;
  s.beta_ = beta;
  return s;
}

Manifold KernelSpec::manifold() const {
  switch (family_) {
    case KernelFamily::sphere_poisson:
    case KernelFamily::sphere_gegenbauer:
    case KernelFamily::sphere_linear:
    case KernelFamily::sphere_geodesic_gauss_unsafe:
      return Manifold::sphere;
    case KernelFamily::grassmann_projection_gauss: return Manifold::grassmann;
    case KernelFamily::spd_log_euclidean_gauss: return Manifold::spd;
    case KernelFamily::correlation_cholesky_gauss: return Manifold::correlation;
    case KernelFamily::euclidean_gauss: return Manifold::euclidean;
  }
  throw ValidationError("unknown kernel family tag");
}

double KernelSpec::diagonal_bound() const {
  switch (family_) {
    case KernelFamily::sphere_poisson: return 1.0 / (1.0 - rho_);
    case KernelFamily::sphere_gegenbauer:
      return (1.0 - std::pow(rho_, truncation_ + 1)) / (1.0 - rho_);
    default: return 1.0;
  }
}

int KernelSpec::default_truncation(double rho) {
  const double target = 1e-12 * (1.0 - rho);
  int m = 1;
  double tail = rho * rho;  // rho^{m+1}
  while (tail > target && m < 100000) {
    ++m;
    tail *= rho;
  }
  return m;
}

GramMatrix::GramMatrix(Eigen::MatrixXd values, KernelSpec kernel)
    : values_(std::move(values)), kernel_(std::move(kernel)) {
  if (values_.rows() != values_.cols()) throw ValidationError("GramMatrix: not square");
  const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw ValidationError("GramMatrix: asymmetry " + std::to_string(asym) + " exceeds 1e-10");
  }
  const double k0 = kernel_.diagonal_bound();
  const double slack = 1e-9 * std::max(1.0, k0);
  if (values_.diagonal().maxCoeff() > k0 + slack) {
    throw ValidationError("GramMatrix: diagonal exceeds the family bound K0");
  }
}

double gegenbauer_kernel_eval(int d, double rho, int truncation, double t) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("gegenbauer: rho must be in (0,1)");
  if (!(t >= -1.0 && t <= 1.0)) throw ValidationError("gegenbauer: t must lie in [-1,1]");
  return detail::gegenbauer_truncated_series<double>(d, rho, truncation, t);
}

double kernel_eval(const KernelSpec& spec, const UnitVector& x, const UnitVector& y) {
  if (spec.manifold() != Manifold::sphere) {
    throw ValidationError("kernel_eval: family is not a sphere kernel");
  }
  if (x.dim() != y.dim()) throw ValidationError("kernel_eval: dimension mismatch");
  return psi_scalar(spec, static_cast<int>(x.dim()), x.coords().dot(y.coords()));
}

double kernel_eval(const KernelSpec& spec, const SpdMatrix& x, const SpdMatrix& y) {
  if (spec.family() != KernelFamily::spd_log_euclidean_gauss) {
    throw ValidationError("kernel_eval: family does not apply to SPD matrices");
  }
  if (x.size() != y.size()) throw ValidationError("kernel_eval: dimension mismatch");
  return std::exp(-spec.beta() * (sym_log(x) - sym_log(y)).squaredNorm());
}

double kernel_eval(const KernelSpec& spec, const GrassmannPoint& x, const GrassmannPoint& y) {
  if (spec.family() != KernelFamily::grassmann_projection_gauss) {
    throw ValidationError("kernel_eval: family does not apply to Grassmann points");
  }
  const double d = projection_distance(x, y);
  return std::exp(-spec.beta() * d * d);
}

double kernel_eval(const KernelSpec& spec, const CorrelationMatrix& x,
                   const CorrelationMatrix& y) {
  if (spec.family() != KernelFamily::correlation_cholesky_gauss) {
    throw ValidationError("kernel_eval: family does not apply to correlation matrices");
  }
  if (x.size() != y.size()) throw ValidationError("kernel_eval: dimension mismatch");
  const Eigen::VectorXd a = cholesky_embed(x, spec.cholesky_variant());
  const Eigen::VectorXd b = cholesky_embed(y, spec.cholesky_variant());
  return std::exp(-spec.beta() * (a - b).squaredNorm());
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ValidationError("kernel_eval: dimension mismatch");
  switch (spec.manifold()) {
    case Manifold::euclidean:
      return std::exp(-spec.beta() * (x - y).squaredNorm());
    case Manifold::sphere:
      return kernel_eval(spec, UnitVector(x), UnitVector(y));
    default:
      throw ValidationError(
          "kernel_eval on raw vectors supports sphere and euclidean families; use the typed "
          "overloads for matrix manifolds");
  }
}

GramMatrix gram(const KernelSpec& spec, const Chain& chain) {
  const Embedded e = embed(spec, chain);
  const Eigen::Index n = chain.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index r0 = 0; r0 < n; r0 += kBlockRows) {
    const Eigen::Index nr = std::min(kBlockRows, n - r0);
    k.middleRows(r0, nr) = kernel_block(e, e, r0, nr, 0, n);
  }
  // exact symmetry: keep the upper triangle, mirror it below
  k.triangularView<Eigen::StrictlyLower>() = k.transpose().triangularView<Eigen::StrictlyLower>();
  return GramMatrix(std::move(k), spec);
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Chain& a, const Chain& b) {
  if (a.manifold() != b.manifold() || a.dims() != b.dims()) {
    throw ValidationError("cross_gram: chains live on different manifolds");
  }
  const Embedded ea = embed(spec, a);
  const Embedded eb = embed(spec, b);
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index r0 = 0; r0 < a.size(); r0 += kBlockRows) {
    const Eigen::Index nr = std::min(kBlockRows, a.size() - r0);
    k.middleRows(r0, nr) = kernel_block(ea, eb, r0, nr, 0, b.size());
  }
  return k;
}

double gram_mean(const KernelSpec& spec, const Chain& a, const Chain& b) {
  if (a.manifold() != b.manifold() || a.dims() != b.dims()) {
    throw ValidationError("gram_mean: chains live on different manifolds");
  }
  const Embedded ea = embed(spec, a);
  const Embedded eb = embed(spec, b);
  double total = 0.0;
  for (Eigen::Index r0 = 0; r0 < a.size(); r0 += kBlockRows) {
    const Eigen::Index nr = std::min(kBlockRows, a.size() - r0);
    total += kernel_block(ea, eb, r0, nr, 0, b.size()).sum();
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double gram_diag_mean(const KernelSpec& spec, const Chain& a) {
  const Embedded e = embed(spec, a);
  double total = 0.0;
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    total += kernel_block(e, e, t, 1, t, 1)(0, 0);
  }
  return total / static_cast<double>(a.size());
}

PdAuditReport pd_audit(const KernelSpec& spec, const Chain& points, std::optional<double> tol) {
  if (points.size() < 2) throw ValidationError("pd_audit: need at least 2 points");
  PdAuditReport report;
  report.n = points.size();
  const double k0 = spec.diagonal_bound();
  report.tol = tol.value_or(1e-8 * std::max(1.0, static_cast<double>(points.size()) * k0 / 1e3));
  const GramMatrix g = gram(spec, points);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.values(), Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  report.pass = report.min_eigenvalue >= -report.tol;
  return report;
}

PdFailureWitness geodesic_gauss_pd_failure_search(std::uint64_t seed, int sets,
                                                  int points_per_set, double threshold) {
  const double bandwidths[] = {0.5, 1.0, 2.0, 4.0};
  PdFailureWitness worst;
  worst.min_eigenvalue = std::numeric_limits<double>::infinity();
  worst.n_points = points_per_set;
  for (int hi = 0; hi < 4; ++hi) {
    const KernelSpec spec = KernelSpec::sphere_geodesic_gauss_unsafe(bandwidths[hi], true);
    for (int s = 0; s < sets; ++s) {
      Rng rng(seed, static_cast<std::uint64_t>(hi) * 100000ULL + static_cast<std::uint64_t>(s));
      Eigen::MatrixXd pts(points_per_set, 3);
      for (int i = 0; i < points_per_set; ++i) {
        Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
        pts.row(i) = (v / v.norm()).transpose();
      }
      const Chain chain(Manifold::sphere, {3}, pts);
      const PdAuditReport audit = pd_audit(spec, chain, 0.0);
      if (audit.min_eigenvalue < worst.min_eigenvalue) {
        worst.min_eigenvalue = audit.min_eigenvalue;
        worst.h = bandwidths[hi];
        worst.set_index = s;
      }
    }
  }
  worst.found = worst.min_eigenvalue < threshold;
  return worst;
}

Chain TransportedKernel::apply(const Chain& chain) const {
  Eigen::MatrixXd feats;
  for (Eigen::Index t = 0; t < chain.size(); ++t) {
    const Eigen::VectorXd v = embed_point(chain.points().row(t).transpose(), chain.dims());
    if (t == 0) feats.resize(chain.size(), v.size());
    feats.row(t) = v.transpose();
  }
  const int width = static_cast<int>(feats.cols());
  return Chain(Manifold::euclidean, {width}, std::move(feats), chain.meta());
}

TransportedKernel transported_spec(const KernelSpec& spec) {
  switch (spec.family()) {
    case KernelFamily::spd_log_euclidean_gauss:
      return TransportedKernel{
          KernelSpec::euclidean_gauss(spec.beta()),
          [](const Eigen::VectorXd& flat, const std::vector<int>& dims) {
            const Eigen::Index m = dims.at(0);
            const Eigen::MatrixXd lg = sym_log(Eigen::MatrixXd(as_square(flat, m)));
            Eigen::VectorXd out(m * m);
            for (Eigen::Index i = 0; i < m; ++i) {
              for (Eigen::Index j = 0; j < m; ++j) out[i * m + j] = lg(i, j);
            }
            return out;
          }};
    case KernelFamily::grassmann_projection_gauss:
      // the sqrt(2) in d_pr is folded into the Euclidean bandwidth
      return TransportedKernel{
          KernelSpec::euclidean_gauss(spec.beta() / 2.0),
          [](const Eigen::VectorXd& flat, const std::vector<int>& dims) {
            const Eigen::Index m = dims.at(0), p = dims.at(1);
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>
                u(flat.data(), m, p);
            const Eigen::MatrixXd proj = u * u.transpose();
            Eigen::VectorXd out(m * m);
            for (Eigen::Index i = 0; i < m; ++i) {
              for (Eigen::Index j = 0; j < m; ++j) out[i * m + j] = proj(i, j);
            }
            return out;
          }};
    case KernelFamily::correlation_cholesky_gauss:
      return TransportedKernel{
          KernelSpec::euclidean_gauss(spec.beta()),
          [variant = spec.cholesky_variant()](const Eigen::VectorXd& flat,
                                              const std::vector<int>& dims) {
            const Eigen::Index m = dims.at(0);
            return cholesky_embed(CorrelationMatrix(Eigen::MatrixXd(as_square(flat, m))),
                                  variant);
          }};
    default:
      throw ValidationError("transported_spec: '" + kernel_family_name(spec.family()) +
                            "' is not a pullback family");
  }
}

}  // namespace kess
