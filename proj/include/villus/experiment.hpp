#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "villus/config.hpp"

namespace villus {

inline constexpr const char* kToolName = "villus-homog";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit statuses of the command-line tool.
enum ExitStatus : int { kExitOk = 0, kExitNumeric = 1, kExitUsage = 2 };

struct ExperimentResult {
    int status = kExitOk;
    std::vector<std::filesystem::path> files;  ///< artifacts written, manifest and error record included
    std::string error_kind;
    std::string error_message;
};

/// Runs the pipeline selected by `config.module` and writes its artifacts into
/// `output_dir`: result CSVs, two-column plot series (*.dat), manifest.json and,
/// on failure, error.json. Never throws for pipeline errors.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir);

/// Machine-readable error record for failures that happen before a pipeline runs.
void write_error_record(const std::filesystem::path& output_dir, int status, const std::string& kind,
                        const std::string& message);

}  // namespace villus
