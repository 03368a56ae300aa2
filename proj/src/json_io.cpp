#include "kess/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kess {

namespace {

using nlohmann::json;

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const KernelSpec& spec) {
  json j{{"family", kernel_family_name(spec.family())}};
  switch (spec.family()) {
    case KernelFamily::sphere_poisson:
      j["rho"] = spec.rho();
      break;
    case KernelFamily::sphere_gegenbauer:
      j["rho"] = spec.rho();
      j["truncation"] = spec.truncation();
      break;
    case KernelFamily::grassmann_projection_gauss:
    case KernelFamily::spd_log_euclidean_gauss:
    case KernelFamily::euclidean_gauss:
      j["beta"] = spec.beta();
      break;
    case KernelFamily::correlation_cholesky_gauss:
      j["beta"] = spec.beta();
      j["variant"] = spec.cholesky_variant() == CholeskyVariant::ecm ? "ecm" : "lecm";
      break;
    case KernelFamily::sphere_linear:
      break;
    case KernelFamily::sphere_geodesic_gauss_unsafe:
      j["h"] = spec.bandwidth_h();
      j["acknowledge_unsafe"] = true;
      break;
  }
  return j;
}

KernelSpec kernel_spec_from_json(const json& j) {
  if (!j.contains("family")) throw ValidationError("kernel json: missing \"family\"");
  const KernelFamily family = kernel_family_from_name(j.at("family").get<std::string>());
  auto need = [&](const char* key) -> double {
    if (!j.contains(key)) {
      throw ValidationError(std::string("kernel json: missing \"") + key + "\"");
    }
    return j.at(key).get<double>();
  };
  switch (family) {
    case KernelFamily::sphere_poisson:
      return KernelSpec::sphere_poisson(need("rho"));
    case KernelFamily::sphere_gegenbauer:
      return KernelSpec::sphere_gegenbauer(need("rho"),
                                           j.at("truncation").get<int>());
    case KernelFamily::grassmann_projection_gauss:
      return KernelSpec::grassmann_projection_gauss(need("beta"));
    case KernelFamily::spd_log_euclidean_gauss:
      return KernelSpec::spd_log_euclidean_gauss(need("beta"));
    case KernelFamily::correlation_cholesky_gauss: {
      CholeskyVariant variant = CholeskyVariant::ecm;
      if (j.contains("variant")) {
        const std::string v = j.at("variant").get<std::string>();
        if (v == "ecm") {
          variant = CholeskyVariant::ecm;
        } else if (v == "lecm") {
          variant = CholeskyVariant::lecm;
        } else {
          throw ValidationError("kernel json: unknown variant '" + v + "'");
        }
      }
      return KernelSpec::correlation_cholesky_gauss(need("beta"), variant);
    }
    case KernelFamily::sphere_linear:
      return KernelSpec::sphere_linear();
    case KernelFamily::sphere_geodesic_gauss_unsafe:
      return KernelSpec::sphere_geodesic_gauss_unsafe(
          need("h"), j.value("acknowledge_unsafe", false));
    case KernelFamily::euclidean_gauss:
      return KernelSpec::euclidean_gauss(need("beta"));
  }
  throw ValidationError("kernel json: unknown family");
}

json to_json(const EssReport& report) {
  json j{{"n", report.n},
         {"gamma0", report.gamma0},
         {"sigma2", report.sigma2},
         {"bandwidth", report.bandwidth},
         {"window", window_kind_name(report.window)},
         {"status", report.status == EssStatus::ok ? "ok" : "unstable_sigma"}};
  if (report.status == EssStatus::ok) {
    j["ess"] = report.ess;
    j["tau"] = report.tau;
  } else {
    j["ess"] = nullptr;
    j["tau"] = nullptr;
  }
  return j;
}

EssReport ess_report_from_json(const json& j) {
  EssReport report;
  report.n = j.at("n").get<Eigen::Index>();
  report.gamma0 = j.at("gamma0").get<double>();
  report.sigma2 = j.at("sigma2").get<double>();
  report.bandwidth = j.at("bandwidth").get<int>();
  report.window = window_kind_from_name(j.at("window").get<std::string>());
  const std::string status = j.at("status").get<std::string>();
  if (status == "ok") {
    report.status = EssStatus::ok;
    report.ess = j.at("ess").get<double>();
    report.tau = j.at("tau").get<double>();
  } else if (status == "unstable_sigma") {
    report.status = EssStatus::unstable_sigma;
  } else {
    throw ValidationError("ess report json: unknown status '" + status + "'");
  }
  return report;
}

json to_json(const PrecisionReport& report) {
  return json{{"epsilon", report.epsilon},
              {"risk", report.risk},
              {"required_ess", report.required_ess},
              {"pass_risk", report.pass_risk},
              {"pass_ess", report.pass_ess}};
}

json to_json(const MmdResult& result) {
  return json{{"mmd2", result.mmd2},
              {"n", result.n},
              {"m", result.m},
              {"kernel", to_json(result.kernel)}};
}

json to_json(const PdAuditReport& report) {
  return json{{"min_eigenvalue", report.min_eigenvalue},
              {"pass", report.pass},
              {"n", report.n},
              {"tol", report.tol}};
}

json to_json(const PdFailureWitness& witness) {
  return json{{"found", witness.found},
              {"h", witness.h},
              {"set_index", witness.set_index},
              {"min_eigenvalue", witness.min_eigenvalue},
              {"n_points", witness.n_points}};
}

json to_json(const SummaryStats& stats) {
  return json{{"mean", stats.mean},
              {"sd", stats.sd},
              {"min", stats.min},
              {"max", stats.max},
              {"range_over_mean", stats.range_over_mean}};
}

json to_json(const RotationExperimentConfig& config) {
  return json{{"experiment", "rotation"},
              {"master_seed", config.master_seed},
              {"n_keep", config.n_keep},
              {"burn_in", config.burn_in},
              {"target_kappa", config.target_kappa},
              {"proposal_kappa", config.proposal_kappa},
              {"rotations", config.rotations},
              {"rho", config.rho},
              {"window", window_kind_name(config.window.kind)},
              {"bandwidth", config.window.bandwidth ? json(*config.window.bandwidth)
                                                    : json("auto")}};
}

json to_json(const MixtureExperimentConfig& config) {
  return json{{"experiment", "mixture"},
              {"master_seed", config.master_seed},
              {"n_keep", config.n_keep},
              {"burn_in", config.burn_in},
              {"replications", config.replications},
              {"reference_size", config.reference_size},
              {"kappa", config.kappa},
              {"weights", config.weights},
              {"local_proposal_kappa", config.local_proposal_kappa},
              {"independence_proposal_kappa", config.independence_proposal_kappa},
              {"rhos", config.rhos},
              {"window", window_kind_name(config.window.kind)},
              {"bandwidth", config.window.bandwidth ? json(*config.window.bandwidth)
                                                    : json("auto")}};
}

namespace {

void apply_window_overrides(WindowSpec& window, const json& j) {
  if (j.contains("window")) window.kind = window_kind_from_name(j.at("window").get<std::string>());
  if (j.contains("bandwidth")) {
    const json& b = j.at("bandwidth");
    if (b.is_string() && b.get<std::string>() == "auto") {
      window.bandwidth.reset();
    } else {
      window.bandwidth = b.get<int>();
    }
  }
}

}  // namespace

void apply_overrides(RotationExperimentConfig& config, const json& j) {
  if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("n_keep")) config.n_keep = j.at("n_keep").get<Eigen::Index>();
  if (j.contains("burn_in")) config.burn_in = j.at("burn_in").get<Eigen::Index>();
  if (j.contains("target_kappa")) config.target_kappa = j.at("target_kappa").get<double>();
  if (j.contains("proposal_kappa")) config.proposal_kappa = j.at("proposal_kappa").get<double>();
  if (j.contains("rotations")) config.rotations = j.at("rotations").get<int>();
  if (j.contains("rho")) config.rho = j.at("rho").get<double>();
  apply_window_overrides(config.window, j);
}

void apply_overrides(MixtureExperimentConfig& config, const json& j) {
  if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("n_keep")) config.n_keep = j.at("n_keep").get<Eigen::Index>();
  if (j.contains("burn_in")) config.burn_in = j.at("burn_in").get<Eigen::Index>();
  if (j.contains("replications")) config.replications = j.at("replications").get<int>();
  if (j.contains("reference_size")) {
    config.reference_size = j.at("reference_size").get<Eigen::Index>();
  }
  if (j.contains("kappa")) config.kappa = j.at("kappa").get<double>();
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 4) throw ValidationError("config: weights must have 4 entries");
    std::copy(w.begin(), w.end(), config.weights.begin());
  }
  if (j.contains("local_proposal_kappa")) {
    config.local_proposal_kappa = j.at("local_proposal_kappa").get<double>();
  }
  if (j.contains("independence_proposal_kappa")) {
    config.independence_proposal_kappa = j.at("independence_proposal_kappa").get<double>();
  }
  if (j.contains("rhos")) config.rhos = j.at("rhos").get<std::vector<double>>();
  apply_window_overrides(config.window, j);
}

json to_json(const RotationExperimentReport& report) {
  json axes = json::object();
  for (int axis = 0; axis < 3; ++axis) {
    axes["axis" + std::to_string(axis + 1)] =
        to_json(report.axis_stats[static_cast<std::size_t>(axis)]);
  }
  return json{{"config", to_json(report.config)},
              {"acceptance_rate", report.acceptance_rate},
              {"unrotated", to_json(report.unrotated)},
              {"kernel_ess", to_json(report.kernel_ess_stats)},
              {"max_abs_kernel_ess_deviation", report.max_abs_kernel_ess_deviation},
              {"coordinate_ess", json{{"pooled", to_json(report.pooled_coordinate_stats)},
                                      {"per_axis", axes}}}};
}

json to_json(const MixtureExperimentReport& report) {
  json cells = json::array();
  for (const MixtureCellSummary& cell : report.cells) {
    cells.push_back(json{{"sampler", cell.sampler},
                         {"rho", cell.rho},
                         {"ess", to_json(cell.ess)},
                         {"sigma2", to_json(cell.sigma2)},
                         {"dhat", to_json(cell.dhat)},
                         {"ratio", to_json(cell.ratio)}});
  }
  json per_sampler = json::object();
  for (const auto& [sampler, stats] : report.tv_error) {
    per_sampler[sampler] = json{{"tv_error", to_json(stats)},
                                {"acceptance", to_json(report.acceptance.at(sampler))}};
  }
  std::vector<double> freqs(report.reference_mode_freqs.data(),
                            report.reference_mode_freqs.data() +
                                report.reference_mode_freqs.size());
  return json{{"config", to_json(report.config)},
              {"reference_mode_freqs", freqs},
              {"cells", cells},
              {"samplers", per_sampler}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

void write_rotation_report(const std::filesystem::path& out_dir,
                           const RotationExperimentReport& report) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "rotation_summary.json", to_json(report).dump(2) + "\n");

  std::ostringstream rows;
  rows << "rotation,coordinate_ess_axis1,coordinate_ess_axis2,coordinate_ess_axis3,kernel_ess\n";
  std::ostringstream longfmt;
  longfmt << "replication,quantity,value\n";
  auto long_row = [&](int rep, const std::string& quantity, double value) {
    longfmt << rep << ',' << quantity << ',' << csv_num(value) << '\n';
  };
  long_row(0, "kernel_ess", report.unrotated.ess);
  long_row(0, "acceptance_rate", report.acceptance_rate);
  for (const RotationRow& row : report.rows) {
    rows << row.rotation;
    for (double v : row.coordinate_ess) rows << ',' << csv_num(v);
    rows << ',' << csv_num(row.kernel_ess) << '\n';
    for (int axis = 0; axis < 3; ++axis) {
      long_row(row.rotation, "coordinate_ess_axis" + std::to_string(axis + 1),
               row.coordinate_ess[static_cast<std::size_t>(axis)]);
    }
    long_row(row.rotation, "kernel_ess", row.kernel_ess);
  }
  write_text_file(out_dir / "rotation_rows.csv", rows.str());
  write_text_file(out_dir / "rotation_long.csv", longfmt.str());
}

void write_mixture_report(const std::filesystem::path& out_dir,
                          const MixtureExperimentReport& report) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "mixture_summary.json", to_json(report).dump(2) + "\n");

  std::ostringstream rows;
  rows << "sampler,replication,rho,ess,gamma0,sigma2,dhat,ratio,tv_error,acceptance\n";
  std::ostringstream longfmt;
  longfmt << "replication,quantity,value\n";
  const double first_rho = report.config.rhos.front();
  for (const MixtureRow& row : report.rows) {
    rows << row.sampler << ',' << row.replication << ',' << csv_num(row.rho) << ','
         << csv_num(row.ess) << ',' << csv_num(row.gamma0) << ',' << csv_num(row.sigma2) << ','
         << csv_num(row.dhat) << ',' << csv_num(row.ratio) << ',' << csv_num(row.tv_error) << ','
         << csv_num(row.acceptance) << '\n';
    const std::string tag = row.sampler + "_rho" + csv_num(row.rho);
    longfmt << row.replication << ',' << tag << "_ess," << csv_num(row.ess) << '\n';
    longfmt << row.replication << ',' << tag << "_sigma2," << csv_num(row.sigma2) << '\n';
    longfmt << row.replication << ',' << tag << "_dhat," << csv_num(row.dhat) << '\n';
    longfmt << row.replication << ',' << tag << "_ratio," << csv_num(row.ratio) << '\n';
    if (row.rho == first_rho) {  // per-replication quantities, once each
      longfmt << row.replication << ',' << row.sampler << "_tv_error,"
              << csv_num(row.tv_error) << '\n';
      longfmt << row.replication << ',' << row.sampler << "_acceptance,"
              << csv_num(row.acceptance) << '\n';
    }
  }
  write_text_file(out_dir / "mixture_rows.csv", rows.str());
  write_text_file(out_dir / "mixture_long.csv", longfmt.str());
}

}  // namespace kess
