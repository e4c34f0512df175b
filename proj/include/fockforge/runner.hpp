#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fockforge/config.hpp"
#include "fockforge/report.hpp"

namespace fockforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSimulation = 3;

struct RunOutput {
    nlohmann::json report;
    /// File name -> table.
    std::vector<std::pair<std::string, CsvTable>> tables;
};

/// Executes a parsed configuration.  Throws ValidationError or
/// SimulationError; sweep cells record their own failures instead.
RunOutput execute(const RunConfig& config);

/// Writes report.json and the CSV tables selected by config.io into `dir`.
void persist(const RunOutput& output, const std::filesystem::path& dir, const IoConfig& io);

/// Loads, executes and persists.  Returns an exit code and prints
/// diagnostics to `err`.
int run(Mode mode, const std::filesystem::path& config_path,
        const std::optional<std::filesystem::path>& out_dir, std::optional<int> workers,
        std::ostream& err);

/// A RunReport with its timing block removed, for determinism comparisons.
nlohmann::json without_timing(nlohmann::json report);

}  // namespace fockforge
