#pragma once

#include <string>

#include "config.hpp"

namespace vclust::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

/// Runs one subcommand. Writes its artifacts and manifest.json into the `out` directory and
/// maps failures to exit codes. `config_path` is recorded in the manifest when not empty.
int run_command(const std::string& command, const Config& config, const std::string& config_path = "");

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::string& path);

}  // namespace vclust::cli
