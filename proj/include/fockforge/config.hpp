#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockforge/dynamics.hpp"
#include "fockforge/gadam.hpp"
#include "fockforge/robustness.hpp"

namespace fockforge {

enum class Mode { optimize, simulate, detuning, noise, lindblad, wigner, sweep };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct PhysicalConfig {
    std::optional<int> target_photons;  // N
    std::optional<int> depth;           // p
    int revival_index = 0;              // l
    JCParams params;
    /// Defaults to sqrt(N).
    std::optional<cplx> alpha;
    /// Defaults to default_cutoff(N, optimizer.cutoff_budget) for optimization
    /// and default_cutoff(N, budget of the sequence) otherwise.
    std::optional<int> ncut;

    cplx resolved_alpha() const;
};

struct WignerConfig {
    /// "fock", "coherent" or "sequence" (post-selected output of the sequence).
    std::string state = "sequence";
    int fock_n = 0;
    cplx coherent_alpha{0.0, 0.0};
    std::optional<int> ncut;
    double min = -3.0;
    double max = 3.0;
    double step = 0.05;
};

struct SweepConfig {
    std::vector<int> target_photons;
    std::vector<int> depths;
    /// Revival indices tried for every N, unless overridden per N.
    std::vector<int> revival_indices;
    std::map<int, std::vector<int>> revival_indices_by_n;

    const std::vector<int>& revivals_for(int n) const;
};

struct IoConfig {
    std::filesystem::path output_dir = ".";
    bool json = true;
    bool csv = true;
};

struct RunConfig {
    Mode mode = Mode::optimize;
    PhysicalConfig physical;
    GAdamConfig optimizer;
    std::optional<PulseSequence> sequence;
    std::optional<std::filesystem::path> sequence_report;
    std::vector<double> detuning_deltas;
    std::vector<double> noise_sigma_taus;
    std::vector<double> noise_sigma_betas;
    int noise_realizations = 200;
    LindbladConfig lindblad;
    WignerConfig wigner;
    SweepConfig sweep;
    IoConfig io;
    std::uint64_t master_seed = 0;
    int workers = 1;
    /// Verbatim configuration document.
    nlohmann::json document;
};

/// Parses and validates a configuration for `mode`.  Unknown keys, missing
/// mode-required fields and out-of-range values raise ValidationError naming
/// the field path.  A "mode" key in the document must agree with `mode`.
RunConfig parse_config(const nlohmann::json& doc, Mode mode);
RunConfig load_config(const std::filesystem::path& path, Mode mode);

nlohmann::json to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const nlohmann::json& j, const std::string& where = "sequence");
nlohmann::json to_json(cplx z);
nlohmann::json to_json(const GAdamConfig& c);

}  // namespace fockforge
