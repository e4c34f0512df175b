#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockforge/control.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/gadam.hpp"

namespace fockforge {

/// Shortest decimal form that parses back to the same double (17
/// significant digits); NaN prints as "nan".
std::string format_double(double x);

/// In-memory CSV table; numeric cells are formatted with format_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::initializer_list<double> values);
    void add_row(const std::vector<double>& values);
    /// Row with one leading text cell.
    void add_row(const std::string& label, const std::vector<double>& values);

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

/// Parsed CSV: header plus rows of cells (strings).
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json to_json(const QualityReport& q);
nlohmann::json to_json(const LeakageMonitor& m);
nlohmann::json trace_summary(const OptimizationTrace& trace);

/// Per-layer populations (JSON) for a RunReport.
nlohmann::json layers_json(const std::vector<LayerDiagnostics>& layers);

CsvTable layers_table(const std::vector<LayerDiagnostics>& layers);
/// layer, n, m, magnitude, phase.
CsvTable density_maps_table(const std::vector<LayerDiagnostics>& layers);
CsvTable generations_table(const OptimizationTrace& trace);
CsvTable sequence_table(const PulseSequence& seq);
/// n, traced and post-selected photon-number probabilities.
CsvTable distribution_table(const std::vector<double>& traced,
                            const std::vector<double>& postselected);
/// x, p, W.
CsvTable wigner_table(const WignerGrid& grid);

/// Build-time version string.
std::string code_version();

}  // namespace fockforge
