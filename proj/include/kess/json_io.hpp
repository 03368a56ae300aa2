#pragma once

#include <filesystem>
#include <json.hpp>

#include "kess/estimator.hpp"
#include "kess/experiments.hpp"
#include "kess/mmd.hpp"

// JSON shapes for the library types, plus the experiment report writers.
// Payloads carry no timestamps, so rerunning a command with the same flags
// and seed produces byte-identical files.

namespace kess {

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EssReport& report);
EssReport ess_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PrecisionReport& report);
nlohmann::json to_json(const MmdResult& result);
nlohmann::json to_json(const PdAuditReport& report);
nlohmann::json to_json(const PdFailureWitness& witness);
nlohmann::json to_json(const SummaryStats& stats);
nlohmann::json to_json(const RotationExperimentReport& report);
nlohmann::json to_json(const MixtureExperimentReport& report);

nlohmann::json to_json(const RotationExperimentConfig& config);
nlohmann::json to_json(const MixtureExperimentConfig& config);
void apply_overrides(RotationExperimentConfig& config, const nlohmann::json& j);
void apply_overrides(MixtureExperimentConfig& config, const nlohmann::json& j);

/// Atomic text write (temp file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Writes <prefix>_summary.json, <prefix>_rows.csv and <prefix>_long.csv
/// under out_dir; the long file is (replication, quantity, value) rows for
/// external plotting.
void write_rotation_report(const std::filesystem::path& out_dir,
                           const RotationExperimentReport& report);
void write_mixture_report(const std::filesystem::path& out_dir,
                          const MixtureExperimentReport& report);

}  // namespace kess
