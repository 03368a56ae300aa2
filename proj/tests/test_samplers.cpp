#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "kess/samplers.hpp"

using namespace kess;

namespace {

MixtureTarget single_vmf(double kappa) {
  return MixtureTarget::single(VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), kappa));
}

MixtureTarget tetrahedral_mixture(double kappa, const Eigen::Vector4d& w) {
  const std::array<UnitVector, 4> modes = tetrahedron_modes();
  std::vector<VmfParams> comps;
  for (const UnitVector& mu : modes) comps.emplace_back(mu, kappa);
  return MixtureTarget(comps, w);
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("tetrahedron modes") {
  const std::array<UnitVector, 4> modes = tetrahedron_modes();
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const UnitVector& mu : modes) {
    CHECK(std::abs(mu.coords().norm() - 1.0) <= 1e-12);
    sum += mu.coords();
  }
  CHECK(sum.norm() <= 1e-12);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK(modes[static_cast<std::size_t>(i)].coords().dot(
                modes[static_cast<std::size_t>(j)].coords()) ==
            doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("vmf cosine formula endpoints") {
  // W = 1 + log(u + (1-u)e^{-2k})/k maps u -> 1 to W = 1 and u -> 0 to W = -1
  const double kappa = 3.0;
  auto w_of = [kappa](double u) {
    return 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
  };
  CHECK(w_of(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w_of(0.0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("vmf sample moments match the analytic mean cosine") {
  const double kappa = 12.0;
  const Eigen::Vector3d raw(0.3, -0.5, 0.81);
  const UnitVector mu(raw / raw.norm());
  const VmfParams params(mu, kappa);
  Rng rng(2024);
  const int draws = 100000;
  Eigen::Vector3d resultant = Eigen::Vector3d::Zero();
  double sum_cos = 0.0, sum_cos2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const UnitVector x = sample_vmf_s2(params, rng);
    resultant += x.coords();
    const double c = mu.coords().dot(x.coords());
    sum_cos += c;
    sum_cos2 += c * c;
  }
  const double mean_cos = sum_cos / draws;
  const double analytic = 1.0 / std::tanh(kappa) - 1.0 / kappa;
  const double sd = std::sqrt((sum_cos2 / draws - mean_cos * mean_cos) / draws);
  CHECK(std::abs(mean_cos - analytic) <= 3.0 * sd);

  const double angle = std::acos(std::clamp(
      resultant.normalized().dot(mu.coords()), -1.0, 1.0));
  CHECK(angle <= 0.02);
}

TEST_CASE("vmf at kappa zero is uniform and negative kappa is rejected") {
  CHECK_THROWS_AS(VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), -1.0), ValidationError);

  Rng rng(31);
  const VmfParams uniform(UnitVector(Eigen::Vector3d(0, 0, 1)), 0.0);
  double mean_z = 0.0;
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) mean_z += sample_vmf_s2(uniform, rng).coords()[2];
  mean_z /= draws;
  CHECK(std::abs(mean_z) <= 0.02);
}

TEST_CASE("mixture log density differences are exact for one component") {
  const MixtureTarget target = single_vmf(12.0);
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const UnitVector x = sample_uniform_sphere(rng);
    const UnitVector y = sample_uniform_sphere(rng);
    const double diff = log_density_mixture(target, x) - log_density_mixture(target, y);
    const double expected = 12.0 * (x.coords()[2] - y.coords()[2]);
    CHECK(diff == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mixture log density is symmetric under component permutations") {
  const Eigen::Vector4d w = Eigen::Vector4d::Constant(0.25);
  const MixtureTarget target = tetrahedral_mixture(28.0, w);
  // the centroid direction of any face is equidistant from the remaining
  // modes; any x gives the same value under component reordering
  std::vector<VmfParams> reversed(target.components.rbegin(), target.components.rend());
  const MixtureTarget permuted(reversed, w);
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const UnitVector x = sample_uniform_sphere(rng);
    CHECK(std::abs(log_density_mixture(target, x) - log_density_mixture(permuted, x)) <=
          1e-12);
  }
}

TEST_CASE("mixture density ratios match the direct unnormalized form") {
  Eigen::Vector4d w(0.4, 0.3, 0.2, 0.1);
  const MixtureTarget target = tetrahedral_mixture(28.0, w);
  const std::array<UnitVector, 4> modes = tetrahedron_modes();
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const UnitVector x = sample_uniform_sphere(rng);
    const UnitVector y = sample_uniform_sphere(rng);
    double direct_x = 0.0, direct_y = 0.0;
    for (int j = 0; j < 4; ++j) {
      direct_x += w[j] * std::exp(28.0 * modes[static_cast<std::size_t>(j)].coords().dot(
                                             x.coords()));
      direct_y += w[j] * std::exp(28.0 * modes[static_cast<std::size_t>(j)].coords().dot(
                                             y.coords()));
    }
    const double got = std::exp(log_density_mixture(target, x) - log_density_mixture(target, y));
    CHECK(got == doctest::Approx(direct_x / direct_y).epsilon(1e-12));
  }
}

TEST_CASE("random-walk chain reproduces the reference acceptance band") {
  ChainRunConfig cfg;
  cfg.n_keep = 3000;
  cfg.burn_in = 1000;
  cfg.seed = 4242;
  cfg.target = single_vmf(12.0);
  cfg.proposal_kappa = 35.0;
  const McmcRun run = rwmh_sphere(cfg);
  CHECK(run.chain.size() == 3000);
  CHECK(run.acceptance_rate == doctest::Approx(0.733).epsilon(0.07));
  for (Eigen::Index t = 0; t < run.chain.size(); ++t) {
    CHECK(std::abs(run.chain.points().row(t).norm() - 1.0) <= 1e-10);
  }
  CHECK(run.chain.meta().has_value());
  CHECK(run.chain.meta()->burn_in_discarded == 1000);
}

TEST_CASE("nearly frozen proposals are always accepted") {
  ChainRunConfig cfg;
  cfg.n_keep = 2000;
  cfg.burn_in = 100;
  cfg.seed = 11;
  cfg.target = single_vmf(12.0);
  cfg.proposal_kappa = 1e6;
  const McmcRun run = rwmh_sphere(cfg);
  CHECK(run.acceptance_rate >= 0.99);
}

TEST_CASE("chains are bit-identical given the seed") {
  ChainRunConfig cfg;
  cfg.n_keep = 500;
  cfg.burn_in = 100;
  cfg.seed = 77;
  cfg.target = single_vmf(12.0);
  cfg.proposal_kappa = 35.0;
  const McmcRun a = rwmh_sphere(cfg);
  const McmcRun b = rwmh_sphere(cfg);
  CHECK(a.chain.points() == b.chain.points());
  CHECK(a.acceptance_rate == b.acceptance_rate);

  ChainRunConfig icfg = cfg;
  icfg.proposal_kappa = 0;
  icfg.proposal_mixture = tetrahedral_mixture(12.0, Eigen::Vector4d::Constant(0.25));
  icfg.target = tetrahedral_mixture(28.0, Eigen::Vector4d(0.4, 0.3, 0.2, 0.1));
  const McmcRun c = independence_mh(icfg);
  const McmcRun d = independence_mh(icfg);
  CHECK(c.chain.points() == d.chain.points());
}

TEST_CASE("independence sampler accepts everything when proposal equals target") {
  ChainRunConfig cfg;
  cfg.n_keep = 1000;
  cfg.burn_in = 50;
  cfg.seed = 13;
  cfg.target = single_vmf(9.0);
  cfg.proposal_mixture = single_vmf(9.0);
  const McmcRun run = independence_mh(cfg);
  CHECK(run.acceptance_rate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independence sampler on the four-mode target") {
  ChainRunConfig cfg;
  cfg.n_keep = 2500;
  cfg.burn_in = 1000;
  cfg.seed = 2025;
  cfg.target = tetrahedral_mixture(28.0, Eigen::Vector4d(0.4, 0.3, 0.2, 0.1));
  cfg.proposal_mixture = tetrahedral_mixture(12.0, Eigen::Vector4d::Constant(0.25));
  const McmcRun run = independence_mh(cfg);
  CHECK(run.acceptance_rate == doctest::Approx(0.526).epsilon(0.12));
}

TEST_CASE("stationarity smoke test for the single-mode target") {
  // post-burn-in mean of mu . X across seeds against the analytic value
  const double kappa = 12.0;
  const double analytic = 1.0 / std::tanh(kappa) - 1.0 / kappa;
  std::vector<double> means;
  for (int seed = 0; seed < 20; ++seed) {
    ChainRunConfig cfg;
    cfg.n_keep = 1000;
    cfg.burn_in = 500;
    cfg.seed = 9000 + static_cast<std::uint64_t>(seed);
    cfg.target = single_vmf(kappa);
    cfg.proposal_kappa = 35.0;
    const McmcRun run = rwmh_sphere(cfg);
    means.push_back(run.chain.points().col(2).mean());
  }
  double mean = 0;
  for (double v : means) mean += v;
  mean /= static_cast<double>(means.size());
  double ss = 0;
  for (double v : means) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (means.size() * (means.size() - 1.0)));
  CHECK(std::abs(mean - analytic) <= 3.0 * se);
}

TEST_CASE("config validation") {
  ChainRunConfig cfg;
  cfg.n_keep = 10;
  cfg.target = single_vmf(5.0);
  CHECK_THROWS_AS(rwmh_sphere(cfg), ValidationError);       // no proposal kappa
  CHECK_THROWS_AS(independence_mh(cfg), ValidationError);   // no proposal mixture

  CHECK_THROWS_AS(MixtureTarget({}, Eigen::VectorXd()), ValidationError);
  std::vector<VmfParams> comps{VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), 2.0)};
  Eigen::VectorXd bad_w(1);
  bad_w << 0.5;
  CHECK_THROWS_AS(MixtureTarget(comps, bad_w), ValidationError);
}

}  // TEST_SUITE
