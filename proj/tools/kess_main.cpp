// kess - intrinsic effective sample size for manifold-valued MCMC output.
//
// Subcommands: ess, mmd, pd-audit, precision, experiment. Reports are JSON
// on stdout (or --out FILE); experiment writes a summary/rows/long-format
// file set into --out DIR.
//
// Exit codes: 0 success, 2 validation error, 3 unstable long-run variance,
// 4 precision rule failed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "kess/chain_io.hpp"
#include "kess/estimator.hpp"
#include "kess/experiments.hpp"
#include "kess/json_io.hpp"
#include "kess/mmd.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitUnstableSigma = 3;
constexpr int kExitPrecisionFail = 4;

struct KernelFlags {
  std::string kernel;  // family shorthand or inline JSON object
  std::optional<double> rho, beta, h;
  std::optional<int> truncation;
  std::string variant = "ecm";
  bool acknowledge_unsafe = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kernel", kernel,
                    "kernel family (e.g. sphere-poisson) or an inline JSON spec")
        ->required();
    cmd->add_option("--rho", rho, "sphere series weight, in (0,1)");
    cmd->add_option("--beta", beta, "Gaussian pullback bandwidth, > 0");
    cmd->add_option("--geodesic-h", h, "geodesic Gaussian bandwidth (unsafe family only)");
    cmd->add_option("--truncation", truncation, "series truncation order");
    cmd->add_option("--variant", variant, "Cholesky coordinates: ecm or lecm");
    cmd->add_flag("--acknowledge-unsafe", acknowledge_unsafe,
                  "opt in to the non-positive-definite geodesic Gaussian");
  }

  kess::KernelSpec resolve() const {
    if (!kernel.empty() && kernel.front() == '{') {
      return kess::kernel_spec_from_json(json::parse(kernel));
    }
    json j{{"family", kernel}};
    if (rho) j["rho"] = *rho;
    if (beta) j["beta"] = *beta;
    if (h) j["h"] = *h;
    if (truncation) j["truncation"] = *truncation;
    j["variant"] = variant;
    if (acknowledge_unsafe) j["acknowledge_unsafe"] = true;
    const kess::KernelFamily family = kess::kernel_family_from_name(kernel);
    if (family == kess::KernelFamily::sphere_gegenbauer && !truncation) {
      throw kess::ValidationError("sphere-gegenbauer needs --truncation");
    }
    return kess::kernel_spec_from_json(j);
  }
};

struct WindowFlags {
  std::string window = "bartlett";
  std::string bandwidth = "auto";

  void attach(CLI::App* cmd) {
    cmd->add_option("--window", window, "lag window: bartlett or truncated");
    cmd->add_option("--bandwidth", bandwidth, "lag bandwidth: auto or a positive integer");
  }

  kess::WindowSpec resolve() const {
    kess::WindowSpec spec;
    spec.kind = kess::window_kind_from_name(window);
    if (bandwidth != "auto") {
      try {
        spec.bandwidth = std::stoi(bandwidth);
      } catch (const std::exception&) {
        throw kess::ValidationError("--bandwidth must be 'auto' or an integer");
      }
    }
    return spec;
  }
};

void emit(const json& payload, const std::string& out_path) {
  const std::string text = payload.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    kess::write_text_file(out_path, text);
  }
}

std::string ess_report_csv(const kess::EssReport& r) {
  std::ostringstream os;
  os << "n,gamma0,sigma2,ess,tau,bandwidth,window,status\n";
  os.precision(17);
  os << r.n << ',' << r.gamma0 << ',' << r.sigma2 << ',';
  if (r.status == kess::EssStatus::ok) {
    os << r.ess << ',' << r.tau;
  } else {
    os << ",";
  }
  os << ',' << r.bandwidth << ',' << kess::window_kind_name(r.window) << ','
     << (r.status == kess::EssStatus::ok ? "ok" : "unstable_sigma") << '\n';
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intrinsic kernel effective sample size for manifold-valued MCMC output"};
  app.require_subcommand(1);

  // --- ess ---
  auto* ess_cmd = app.add_subcommand("ess", "kernel ESS of a stored chain");
  std::string ess_input, ess_out, ess_format = "json";
  KernelFlags ess_kernel;
  WindowFlags ess_window;
  ess_cmd->add_option("--input", ess_input, "chain file")->required();
  ess_kernel.attach(ess_cmd);
  ess_window.attach(ess_cmd);
  ess_cmd->add_option("--output", ess_format, "json or csv");
  ess_cmd->add_option("--out", ess_out, "write the report here instead of stdout");

  // --- mmd ---
  auto* mmd_cmd = app.add_subcommand("mmd", "squared MMD between two stored samples");
  std::string mmd_a, mmd_b, mmd_out;
  bool mmd_corrected = false;
  KernelFlags mmd_kernel;
  mmd_cmd->add_option("--a", mmd_a, "first chain file")->required();
  mmd_cmd->add_option("--b", mmd_b, "second chain file (reference when --corrected)")
      ->required();
  mmd_kernel.attach(mmd_cmd);
  mmd_cmd->add_flag("--corrected", mmd_corrected,
                    "emit the reference-corrected risk statistic n(MMD^2 - gamma0_ref/m), "
                    "treating --b as an iid reference");
  mmd_cmd->add_option("--out", mmd_out, "write the report here instead of stdout");

  // --- pd-audit ---
  auto* pd_cmd = app.add_subcommand("pd-audit", "minimum Gram eigenvalue over a point set");
  std::string pd_input, pd_out;
  std::optional<double> pd_tol;
  bool pd_search = false;
  std::uint64_t pd_seed = 20240803;
  KernelFlags pd_kernel;
  pd_cmd->add_option("--input", pd_input, "point set (chain file)");
  pd_kernel.attach(pd_cmd);
  pd_cmd->add_option("--tol", pd_tol, "audit tolerance (default scales with n*K0)");
  pd_cmd->add_flag("--search", pd_search,
                   "run the geodesic Gaussian failure search (bandwidths {0.5,1,2,4}, 50 "
                   "random 30-point sets) instead of auditing --input");
  pd_cmd->add_option("--seed", pd_seed, "search seed");
  pd_cmd->add_option("--out", pd_out, "write the report here instead of stdout");

  // --- precision ---
  auto* prec_cmd = app.add_subcommand("precision", "kernel-MMD precision rule");
  std::string prec_report, prec_input, prec_out;
  double prec_epsilon = 0;
  KernelFlags prec_kernel;
  WindowFlags prec_window;
  prec_cmd->add_option("--epsilon", prec_epsilon, "mean-square MMD tolerance, > 0")->required();
  prec_cmd->add_option("--report", prec_report, "ESS report JSON file to check");
  prec_cmd->add_option("--input", prec_input, "chain file (compute the report first)");
  prec_kernel.kernel = "sphere_linear";
  prec_cmd->add_option("--kernel", prec_kernel.kernel, "kernel for --input mode");
  prec_cmd->add_option("--rho", prec_kernel.rho, "sphere series weight");
  prec_cmd->add_option("--beta", prec_kernel.beta, "Gaussian pullback bandwidth");
  prec_window.attach(prec_cmd);
  prec_cmd->add_option("--out", prec_out, "write the report here instead of stdout");

  // --- experiment ---
  auto* exp_cmd = app.add_subcommand("experiment", "run a preset study and write report files");
  std::string exp_preset, exp_config, exp_dir = ".";
  std::optional<std::uint64_t> exp_seed;
  exp_cmd->add_option("--preset", exp_preset, "rotation or mixture")->required();
  exp_cmd->add_option("--config", exp_config, "JSON file overriding preset fields");
  exp_cmd->add_option("--seed", exp_seed, "override the master seed");
  exp_cmd->add_option("--out", exp_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ess_cmd) {
      if (ess_format != "json" && ess_format != "csv") {
        throw kess::ValidationError("--output must be json or csv");
      }
      const kess::Chain chain = kess::read_chain(ess_input);
      const kess::EssReport report =
          kess::kernel_ess(chain, ess_kernel.resolve(), ess_window.resolve());
      if (ess_format == "csv") {
        const std::string text = ess_report_csv(report);
        if (ess_out.empty()) {
          std::cout << text;
        } else {
          kess::write_text_file(ess_out, text);
        }
      } else {
        emit(kess::to_json(report), ess_out);
      }
      return report.status == kess::EssStatus::ok ? kExitOk : kExitUnstableSigma;
    }

    if (*mmd_cmd) {
      const kess::Chain a = kess::read_chain(mmd_a);
      const kess::Chain b = kess::read_chain(mmd_b);
      const kess::KernelSpec spec = mmd_kernel.resolve();
      const kess::MmdResult result = kess::mmd2_empirical(a, b, spec);
      json payload = kess::to_json(result);
      if (mmd_corrected) {
        payload["dhat"] = kess::corrected_risk_statistic(a, b, spec);
      }
      emit(payload, mmd_out);
      return kExitOk;
    }

    if (*pd_cmd) {
      if (pd_search) {
        const kess::PdFailureWitness witness =
            kess::geodesic_gauss_pd_failure_search(pd_seed);
        emit(kess::to_json(witness), pd_out);
        return kExitOk;
      }
      if (pd_input.empty()) {
        throw kess::ValidationError("pd-audit: need --input (or --search)");
      }
      const kess::Chain points = kess::read_chain(pd_input);
      const kess::KernelSpec spec = pd_kernel.resolve();
      const kess::PdAuditReport report = kess::pd_audit(spec, points, pd_tol);
      json payload = kess::to_json(report);
      payload["kernel"] = kess::to_json(spec);
      emit(payload, pd_out);
      return kExitOk;
    }

    if (*prec_cmd) {
      kess::EssReport report;
      if (!prec_report.empty()) {
        std::ifstream in(prec_report);
        if (!in) throw kess::ValidationError("cannot open report '" + prec_report + "'");
        json j;
        in >> j;
        report = kess::ess_report_from_json(j);
      } else if (!prec_input.empty()) {
        const kess::Chain chain = kess::read_chain(prec_input);
        report = kess::kernel_ess(chain, prec_kernel.resolve(), prec_window.resolve());
      } else {
        throw kess::ValidationError("precision: need --report or --input");
      }
      if (report.status != kess::EssStatus::ok) {
        std::cerr << "precision: unstable long-run variance estimate\n";
        return kExitUnstableSigma;
      }
      const kess::PrecisionReport check = kess::precision_check(report, prec_epsilon);
      json payload = kess::to_json(check);
      payload["ess"] = report.ess;
      emit(payload, prec_out);
      return check.pass_risk ? kExitOk : kExitPrecisionFail;
    }

    if (*exp_cmd) {
      json overrides = json::object();
      if (!exp_config.empty()) {
        std::ifstream in(exp_config);
        if (!in) throw kess::ValidationError("cannot open config '" + exp_config + "'");
        in >> overrides;
      }
      if (exp_preset == "rotation") {
        kess::RotationExperimentConfig config;
        kess::apply_overrides(config, overrides);
        if (exp_seed) config.master_seed = *exp_seed;
        const kess::RotationExperimentReport report = kess::run_rotation_experiment(config);
        kess::write_rotation_report(exp_dir, report);
        std::cout << "wrote rotation_summary.json, rotation_rows.csv, rotation_long.csv to "
                  << exp_dir << "\n";
      } else if (exp_preset == "mixture") {
        kess::MixtureExperimentConfig config;
        kess::apply_overrides(config, overrides);
        if (exp_seed) config.master_seed = *exp_seed;
        const kess::MixtureExperimentReport report = kess::run_mixture_experiment(config);
        kess::write_mixture_report(exp_dir, report);
        std::cout << "wrote mixture_summary.json, mixture_rows.csv, mixture_long.csv to "
                  << exp_dir << "\n";
      } else {
        throw kess::ValidationError("unknown preset '" + exp_preset + "'");
      }
      return kExitOk;
    }
  } catch (const kess::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
