#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aerate/engine.hpp"
#include "aerate/harness.hpp"

namespace aerate {

/// Settings for a single trial run: the trial itself plus its dataset.
struct RunConfig {
  DatasetChoice dataset;
  TrialConfig trial;
};

// Config files are INI-style: [section] headers and key = value lines.
// String values may be quoted; lists are written as [a, b, c].
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

BenchConfig parse_bench_config(const std::string& text);
BenchConfig load_bench_config(const std::filesystem::path& path);

SweepGrid parse_grid(const std::string& text);
SweepGrid load_grid(const std::filesystem::path& path);

// "[150, 250]" -> {"150", "250"}; quotes and whitespace stripped.
std::vector<std::string> parse_list(const std::string& value);

}  // namespace aerate
