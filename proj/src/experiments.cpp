#include "kess/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

namespace kess {

namespace {

// Runs fn(i) for i in [0, count) on up to experiment_thread_cap() workers.
// Each index owns its output slot, so results do not depend on scheduling.
void parallel_for_index(int count, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(count, experiment_thread_cap()));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::array<double, 3> coordinate_ess_values(const Chain& chain, const WindowSpec& window) {
  std::array<double, 3> out{};
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::VectorXd series = chain.points().col(axis);
    out[static_cast<std::size_t>(axis)] =
        scalar_ess(std::span<const double>(series.data(), static_cast<std::size_t>(series.size())),
                   window)
            .ess;
  }
  return out;
}

}  // namespace

SummaryStats SummaryStats::of(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  double sum = 0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.range_over_mean = s.mean != 0.0 ? (s.max - s.min) / s.mean : 0.0;
  return s;
}

int experiment_thread_cap() {
  if (const char* env = std::getenv("MANIFOLD_ESS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return cap;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

RotationExperimentReport run_rotation_experiment(const RotationExperimentConfig& config) {
  if (config.rotations < 1) throw ValidationError("rotation experiment: need rotations >= 1");
  RotationExperimentReport report;
  report.config = config;

  ChainRunConfig run;
  run.n_keep = config.n_keep;
  run.burn_in = config.burn_in;
  run.seed = config.master_seed;  // stream 0 of the experiment
  run.target = MixtureTarget::single(
      VmfParams(UnitVector(Eigen::Vector3d(0, 0, 1)), config.target_kappa));
  run.proposal_kappa = config.proposal_kappa;
  const McmcRun mcmc = rwmh_sphere(run);
  report.acceptance_rate = mcmc.acceptance_rate;

  const KernelSpec spec = KernelSpec::sphere_poisson(config.rho);
  report.unrotated = kernel_ess(mcmc.chain, spec, config.window);

  report.rows.resize(static_cast<std::size_t>(config.rotations));
  parallel_for_index(config.rotations, [&](int r) {
    Rng rng(config.master_seed, 1 + static_cast<std::uint64_t>(r));
    const Rotation q = haar_rotation(3, rng);
    const Chain rotated = mcmc.chain.rotated(q);
    RotationRow row;
    row.rotation = r + 1;
    row.coordinate_ess = coordinate_ess_values(rotated, config.window);
    row.kernel_ess = kernel_ess(rotated, spec, config.window).ess;
    report.rows[static_cast<std::size_t>(r)] = row;
  });

  std::vector<double> kernel_vals, pooled;
  std::array<std::vector<double>, 3> axis_vals;
  double max_dev = 0.0;
  for (const RotationRow& row : report.rows) {
    kernel_vals.push_back(row.kernel_ess);
    max_dev = std::max(max_dev, std::abs(row.kernel_ess - report.unrotated.ess));
    for (int axis = 0; axis < 3; ++axis) {
      pooled.push_back(row.coordinate_ess[static_cast<std::size_t>(axis)]);
      axis_vals[static_cast<std::size_t>(axis)].push_back(
          row.coordinate_ess[static_cast<std::size_t>(axis)]);
    }
  }
  report.kernel_ess_stats = SummaryStats::of(kernel_vals);
  report.pooled_coordinate_stats = SummaryStats::of(pooled);
  for (int axis = 0; axis < 3; ++axis) {
    report.axis_stats[static_cast<std::size_t>(axis)] =
        SummaryStats::of(axis_vals[static_cast<std::size_t>(axis)]);
  }
  report.max_abs_kernel_ess_deviation = max_dev;
  return report;
}

MixtureExperimentReport run_mixture_experiment(const MixtureExperimentConfig& config) {
  if (config.replications < 1) throw ValidationError("mixture experiment: need replications >= 1");
  if (config.rhos.empty()) throw ValidationError("mixture experiment: need at least one rho");
  MixtureExperimentReport report;
  report.config = config;

  const std::array<UnitVector, 4> modes = tetrahedron_modes();
  std::vector<VmfParams> target_comps, proposal_comps;
  for (const UnitVector& mu : modes) {
    target_comps.emplace_back(mu, config.kappa);
    proposal_comps.emplace_back(mu, config.independence_proposal_kappa);
  }
  Eigen::VectorXd w(4);
  for (int j = 0; j < 4; ++j) w[j] = config.weights[static_cast<std::size_t>(j)];
  const MixtureTarget target(target_comps, w);
  const MixtureTarget proposal(proposal_comps, Eigen::VectorXd::Constant(4, 0.25));

  Rng ref_rng(config.master_seed, 0);
  const Chain reference = sample_iid_mixture(target, config.reference_size, ref_rng);
  const std::vector<UnitVector> mode_list(modes.begin(), modes.end());
  report.reference_mode_freqs = nearest_mode_frequencies(reference, mode_list);

  // per-rho reference constants, computed once and reused by every row
  struct RefStats {
    double self_mean = 0, gamma0 = 0;
  };
  std::vector<RefStats> ref_stats(config.rhos.size());
  for (std::size_t k = 0; k < config.rhos.size(); ++k) {
    const KernelSpec spec = KernelSpec::sphere_poisson(config.rhos[k]);
    ref_stats[k].self_mean = gram_mean(spec, reference, reference);
    ref_stats[k].gamma0 = gram_diag_mean(spec, reference) - ref_stats[k].self_mean;
  }

  const int samplers = 2;  // 0 = independence, 1 = local
  const int jobs = samplers * config.replications;
  std::vector<std::vector<MixtureRow>> job_rows(static_cast<std::size_t>(jobs));
  parallel_for_index(jobs, [&](int job) {
    const int sampler = job / config.replications;
    const int rep = job % config.replications;
    ChainRunConfig run;
    run.n_keep = config.n_keep;
    run.burn_in = config.burn_in;
    run.target = target;
    run.seed = Rng(config.master_seed,
                   0x100ULL * static_cast<std::uint64_t>(sampler + 1) +
                       static_cast<std::uint64_t>(rep))
                   .next_u64();
    McmcRun mcmc = [&] {
      if (sampler == 0) {
        run.proposal_mixture = proposal;
        return independence_mh(run);
      }
      run.proposal_kappa = config.local_proposal_kappa;
      return rwmh_sphere(run);
    }();
    const double tv = mode_tv_error(mcmc.chain, mode_list, report.reference_mode_freqs);
    std::vector<MixtureRow>& rows = job_rows[static_cast<std::size_t>(job)];
    for (std::size_t k = 0; k < config.rhos.size(); ++k) {
      const KernelSpec spec = KernelSpec::sphere_poisson(config.rhos[k]);
      MixtureRow row;
      row.sampler = sampler == 0 ? "independence" : "local";
      row.replication = rep + 1;
      row.rho = config.rhos[k];
      const EssReport ess = kernel_ess(mcmc.chain, spec, config.window);
      row.ess = ess.ess;
      row.gamma0 = ess.gamma0;
      row.sigma2 = ess.sigma2;
      const double self_mean = gram_mean(spec, mcmc.chain, mcmc.chain);
      const double cross_mean = gram_mean(spec, mcmc.chain, reference);
      const double mmd2 = self_mean - 2.0 * cross_mean + ref_stats[k].self_mean;
      row.dhat = static_cast<double>(config.n_keep) *
                 (mmd2 - ref_stats[k].gamma0 / static_cast<double>(config.reference_size));
      row.ratio = row.dhat / row.sigma2;
      row.tv_error = tv;
      row.acceptance = mcmc.acceptance_rate;
      rows.push_back(row);
    }
  });
  for (const std::vector<MixtureRow>& rows : job_rows) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }

  for (const std::string& sampler : {std::string("independence"), std::string("local")}) {
    for (double rho : config.rhos) {
      MixtureCellSummary cell;
      cell.sampler = sampler;
      cell.rho = rho;
      std::vector<double> ess, sigma2, dhat, ratio;
      for (const MixtureRow& row : report.rows) {
        if (row.sampler != sampler || row.rho != rho) continue;
        ess.push_back(row.ess);
        sigma2.push_back(row.sigma2);
        dhat.push_back(row.dhat);
        ratio.push_back(row.ratio);
      }
      cell.ess = SummaryStats::of(ess);
      cell.sigma2 = SummaryStats::of(sigma2);
      cell.dhat = SummaryStats::of(dhat);
      cell.ratio = SummaryStats::of(ratio);
      report.cells.push_back(cell);
    }
    std::vector<double> tv, acc;
    for (const MixtureRow& row : report.rows) {
      if (row.sampler != sampler || row.rho != config.rhos.front()) continue;
      tv.push_back(row.tv_error);
      acc.push_back(row.acceptance);
    }
    report.tv_error[sampler] = SummaryStats::of(tv);
    report.acceptance[sampler] = SummaryStats::of(acc);
  }
  return report;
}

}  // namespace kess
