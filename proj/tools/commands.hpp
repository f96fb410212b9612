#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace nlpt::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line overrides on top of the config file.
struct RunOptions {
    std::string command;
    std::filesystem::path output_dir = ".";
    std::optional<std::string> suite;
    std::optional<std::string> property;
    bool no_obstacle = false;
    /// Field CSV replacing the data section (far model from its sidecar).
    std::optional<std::filesystem::path> field_csv;
    std::optional<std::filesystem::path> obstacle_csv;
    std::optional<Point> center;
    std::optional<double> radius;
    std::optional<unsigned> threads;
};

/// Thread count: NLPT_THREADS overrides the config; a command-line value overrides both.
unsigned resolve_threads(const RunConfig& config, const RunOptions& options);

/// Runs one command, writes its artifacts plus manifest.json into the output
/// directory and returns the exit code. Library errors are reported on `err`
/// and mapped to their exit codes (config 2, non-convergence 3, divergence 4,
/// validation 5, numerical 6); a failed check or verify report gives 1.
int run(const RunConfig& config, const RunOptions& options, std::ostream& err);

}  // namespace nlpt::cli
