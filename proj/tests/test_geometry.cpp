#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "kess/geometry.hpp"

using namespace kess;

namespace {

Eigen::MatrixXd random_orthogonal(int d, Rng& rng) { return haar_rotation(d, rng).matrix(); }

Eigen::MatrixXd random_frame(int m, int p, Rng& rng) {
  Eigen::MatrixXd raw(m, p);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p; ++j) raw(i, j) = rng.normal();
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
         Eigen::MatrixXd::Identity(m, p);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("unit vector renormalizes near-unit input and rejects the rest") {
  const UnitVector u(Eigen::Vector3d(0.0, 0.0, 1.0 + 5e-7));
  CHECK(std::abs(u.coords().norm() - 1.0) <= 1e-10);

  CHECK_THROWS_AS(UnitVector(Eigen::Vector3d(0.0, 0.0, 0.9)), ValidationError);
  CHECK_THROWS_AS(UnitVector(Eigen::VectorXd::Ones(1)), ValidationError);
}

TEST_CASE("sym_log on identity and diagonal matrices") {
  CHECK(sym_log(Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd d = Eigen::Vector2d(std::exp(1.0), 1.0).asDiagonal();
  const Eigen::MatrixXd lg = sym_log(d);
  CHECK(lg(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(lg(1, 1)) <= 1e-12);
  CHECK(std::abs(lg(0, 1)) <= 1e-12);
}

TEST_CASE("sym_log matches a known eigensystem and round-trips") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd eigs(4);
    for (int i = 0; i < 4; ++i) eigs[i] = 0.1 + 3.0 * rng.uniform01();
    const Eigen::MatrixXd q = random_orthogonal(4, rng);
    const Eigen::MatrixXd a = q * eigs.asDiagonal() * q.transpose();
    const Eigen::MatrixXd expected =
        q * eigs.array().log().matrix().asDiagonal() * q.transpose();
    CHECK((sym_log(a) - expected).norm() <= 1e-10);
    CHECK((sym_exp(sym_log(a)) - a).norm() <= 1e-8);
    CHECK((sym_log(a) - sym_log(a).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("sym_log rejects non-SPD input naming the eigenvalue") {
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -2.0;
  CHECK_THROWS_WITH_AS(sym_log(Eigen::MatrixXd(indefinite)), doctest::Contains("-2"),
                       ValidationError);
}

TEST_CASE("sym_log . sym_exp is the identity on bounded symmetric matrices") {
  Rng rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd s(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = 10.0 * rng.uniform01() - 5.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMin(5.0).cwiseMax(-5.0);
    s = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    s = 0.5 * (s + s.transpose());
    CHECK((sym_log(sym_exp(s)) - s).norm() <= 1e-8);
  }
}

TEST_CASE("projection embedding of a coordinate axis") {
  Eigen::MatrixXd e1(2, 1);
  e1 << 1.0, 0.0;
  const Eigen::MatrixXd p = projection_embed(GrassmannPoint(e1));
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(p(0, 1)) + std::abs(p(1, 0)) + std::abs(p(1, 1)) <= 1e-14);

  Eigen::MatrixXd e2(2, 1);
  e2 << 0.0, 1.0;
  CHECK(projection_distance(GrassmannPoint(e1), GrassmannPoint(e2)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection distance ignores the frame representative") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const GrassmannPoint u(random_frame(5, 2, rng));
    const GrassmannPoint v(random_frame(5, 2, rng));
    const GrassmannPoint u_rotated(u.frame() * random_orthogonal(2, rng));
    CHECK(std::abs(projection_distance(u, v) - projection_distance(u_rotated, v)) <= 1e-10);
  }
}

TEST_CASE("projector spectrum sits on {0,1} and trace equals p") {
  Rng rng(17);
  const Eigen::MatrixXd p = projection_embed(GrassmannPoint(random_frame(6, 3, rng)));
  CHECK((p * p - p).norm() <= 1e-9);
  CHECK(p.trace() == doctest::Approx(3.0).epsilon(1e-9));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 6; ++i) {
    const double lambda = es.eigenvalues()[i];
    CHECK(std::min(std::abs(lambda), std::abs(lambda - 1.0)) <= 1e-8);
  }
}

TEST_CASE("cholesky embedding coordinates") {
  const CorrelationMatrix id3(Eigen::MatrixXd::Identity(3, 3));
  const Eigen::VectorXd ecm = cholesky_embed(id3, CholeskyVariant::ecm);
  CHECK(ecm.size() == 3);
  CHECK(ecm.cwiseAbs().maxCoeff() <= 1e-14);
  // lecm prepends the diagonal logs
  const Eigen::VectorXd lecm = cholesky_embed(id3, CholeskyVariant::lecm);
  CHECK(lecm.size() == 6);
  CHECK(lecm.cwiseAbs().maxCoeff() <= 1e-14);

  Eigen::Matrix2d c;
  const double r = 0.37;
  c << 1.0, r, r, 1.0;
  const Eigen::VectorXd v = cholesky_embed(CorrelationMatrix(c), CholeskyVariant::ecm);
  CHECK(v.size() == 1);
  CHECK(v[0] == doctest::Approx(r).epsilon(1e-14));
}

TEST_CASE("correlation rebuilds from its stored Cholesky rows") {
  Rng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd b(4, 6);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 6; ++j) b(i, j) = rng.normal();
    }
    Eigen::MatrixXd s = b * b.transpose();
    const Eigen::VectorXd d = s.diagonal().cwiseSqrt();
    Eigen::MatrixXd c = d.cwiseInverse().asDiagonal() * s * d.cwiseInverse().asDiagonal();
    c = 0.5 * (c + c.transpose());
    c.diagonal().setOnes();
    const Eigen::VectorXd strict = cholesky_embed(CorrelationMatrix(c), CholeskyVariant::ecm);
    // unit rows of L L^T pin the diagonal, so the strict part determines C
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(4, 4);
    Eigen::Index k = 0;
    for (Eigen::Index i = 1; i < 4; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) l(i, j) = strict[k++];
    }
    for (Eigen::Index i = 0; i < 4; ++i) {
      l(i, i) = std::sqrt(1.0 - l.row(i).head(i).squaredNorm());
    }
    CHECK((l * l.transpose() - c).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("haar rotations are orthogonal, deterministic, and centered") {
  Rng rng(100);
  const Rotation q = haar_rotation(3, rng);
  CHECK((q.matrix().transpose() * q.matrix() - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(q.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-8));

  Rng a(42), b(42);
  CHECK(haar_rotation(4, a).matrix() == haar_rotation(4, b).matrix());

  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  Rng rng2(5);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) mean += haar_rotation(3, rng2).matrix();
  mean /= draws;
  CHECK(mean.cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("geodesic distance endpoints") {
  const UnitVector x(Eigen::Vector3d(0, 0, 1));
  const UnitVector y(Eigen::Vector3d(0, 0, -1));
  const UnitVector z(Eigen::Vector3d(1, 0, 0));
  CHECK(sphere_geodesic_distance(x, x) == doctest::Approx(0.0));
  CHECK(sphere_geodesic_distance(x, y) == doctest::Approx(M_PI));
  CHECK(sphere_geodesic_distance(x, z) == doctest::Approx(M_PI / 2));
  CHECK_THROWS_AS(sphere_geodesic_distance(x, UnitVector(Eigen::Vector2d(1, 0))),
                  ValidationError);
}

TEST_CASE("rotations preserve inner products") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Rotation q = haar_rotation(3, rng);
    Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
    Eigen::Vector3d b(rng.normal(), rng.normal(), rng.normal());
    const UnitVector x(a / a.norm()), y(b / b.norm());
    const double before = x.coords().dot(y.coords());
    const double after = q.apply(x).coords().dot(q.apply(y).coords());
    CHECK(std::abs(before - after) <= 1e-12);
  }
}

TEST_CASE("constructors reject invariant violations") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(SpdMatrix{asym}, ValidationError);

  Eigen::MatrixXd psd_only(2, 2);
  psd_only << 1.0, 1.0, 1.0, 1.0;  // eigenvalues {2, 0}
  CHECK_THROWS_AS(SpdMatrix{psd_only}, ValidationError);

  Eigen::MatrixXd bad_diag(2, 2);
  bad_diag << 1.1, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(CorrelationMatrix{bad_diag}, ValidationError);

  Eigen::MatrixXd reflect(2, 2);
  reflect << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(Rotation{reflect}, ValidationError);

  CHECK_THROWS_AS(Chain(Manifold::sphere, {3}, Eigen::MatrixXd(0, 3)), ValidationError);
  Eigen::MatrixXd off(1, 3);
  off << 0.5, 0.0, 0.0;
  CHECK_THROWS_AS(Chain(Manifold::sphere, {3}, off), ValidationError);
}

TEST_CASE("chain stores validated rows in time order and rotates") {
  Eigen::MatrixXd pts(3, 3);
  pts << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  const Chain chain(Manifold::sphere, {3}, pts);
  CHECK(chain.size() == 3);
  CHECK(chain.unit_vector(2).coords()[2] == doctest::Approx(1.0));

  Rng rng(9);
  const Rotation q = haar_rotation(3, rng);
  const Chain rotated = chain.rotated(q);
  for (Eigen::Index t = 0; t < 3; ++t) {
    CHECK((rotated.points().row(t).transpose() -
           q.matrix() * chain.points().row(t).transpose())
              .norm() <= 1e-12);
  }
}

}  // TEST_SUITE
