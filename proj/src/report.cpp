#include "fockforge/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fockforge/config.hpp"
#include "fockforge/errors.hpp"

namespace fockforge {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::initializer_list<double> values) {
    add_row(std::vector<double>(values));
}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != header_.size()) {
        throw ValidationError("CSV row has " + std::to_string(values.size()) + " cells, header " +
                              std::to_string(header_.size()));
    }
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    rows_.push_back(std::move(row));
}

void CsvTable::add_row(const std::string& label, const std::vector<double>& values) {
    if (values.size() + 1 != header_.size()) {
        throw ValidationError("CSV row width does not match header");
    }
    std::string row = label;
    for (double v : values) row += ',' + format_double(v);
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

std::size_t CsvData::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ValidationError("CSV has no column '" + name + "'");
}

double CsvData::number(std::size_t row, const std::string& name) const {
    return std::strtod(rows.at(row).at(column(name)).c_str(), nullptr);
}

CsvData read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    CsvData data;
    std::string line;
    if (std::getline(in, line)) data.header = split(line);
    while (std::getline(in, line)) {
        if (!line.empty()) data.rows.push_back(split(line));
    }
    return data;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw ValidationError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

json to_json(const QualityReport& q) {
    return json{{"loss", q.loss},
                {"fidelity_traced", q.fidelity_traced},
                {"fidelity_postselected", q.fidelity_postselected},
                {"success_probability", q.success_probability}};
}

json to_json(const LeakageMonitor& m) {
    return json{{"max_guard_band_population", m.max_top_population},
                {"tolerance", kLeakageTolerance},
                {"guard_band", kGuardBand}};
}

json trace_summary(const OptimizationTrace& trace) {
    json gens = json::array();
    for (const auto& g : trace.generations) {
        gens.push_back(json{{"generation", g.generation},
                            {"best_fitness", g.best_fitness},
                            {"mean_fitness", g.mean_fitness}});
    }
    return json{{"single_layer",
                 json{{"sequence", to_json(trace.single_layer.seq)},
                      {"loss", trace.single_layer.loss}}},
                {"target_time", trace.target_time},
                {"ncut", trace.cutoff.ncut()},
                {"generations", gens},
                {"evaluations", trace.evaluations},
                {"rescaled_offspring", trace.rescaled_offspring},
                {"broken_time_constraints", trace.broken_time_constraints},
                {"final_loss", trace.best.loss}};
}

json layers_json(const std::vector<LayerDiagnostics>& layers) {
    json out = json::array();
    for (const auto& l : layers) {
        out.push_back(json{{"layer", l.layer},
                           {"populations_after_jc", l.populations_after_jc},
                           {"populations_after_displacement", l.populations_after_displacement}});
    }
    return out;
}

CsvTable layers_table(const std::vector<LayerDiagnostics>& layers) {
    CsvTable t({"layer", "n", "population_after_jc", "population_after_displacement"});
    for (const auto& l : layers) {
        for (std::size_t n = 0; n < l.populations_after_jc.size(); ++n) {
            t.add_row({double(l.layer), double(n), l.populations_after_jc[n],
                       l.populations_after_displacement[n]});
        }
    }
    return t;
}

CsvTable density_maps_table(const std::vector<LayerDiagnostics>& layers) {
    CsvTable t({"layer", "n", "m", "magnitude", "phase"});
    for (const auto& l : layers) {
        for (Eigen::Index n = 0; n < l.magnitude.rows(); ++n) {
            for (Eigen::Index m = 0; m < l.magnitude.cols(); ++m) {
                t.add_row({double(l.layer), double(n), double(m), l.magnitude(n, m),
                           l.phase(n, m)});
            }
        }
    }
    return t;
}

CsvTable generations_table(const OptimizationTrace& trace) {
    CsvTable t({"generation", "best_fitness", "mean_fitness"});
    for (const auto& g : trace.generations) {
        t.add_row({double(g.generation), g.best_fitness, g.mean_fitness});
    }
    return t;
}

CsvTable sequence_table(const PulseSequence& seq) {
    CsvTable t({"k", "tau", "beta_re", "beta_im"});
    for (int k = 0; k < seq.depth(); ++k) {
        t.add_row({double(k + 1), seq.taus[k], seq.betas[k].real(), seq.betas[k].imag()});
    }
    return t;
}

CsvTable distribution_table(const std::vector<double>& traced,
                            const std::vector<double>& postselected) {
    CsvTable t({"n", "probability_traced", "probability_postselected"});
    for (std::size_t n = 0; n < traced.size(); ++n) {
        t.add_row({double(n), traced[n], n < postselected.size() ? postselected[n] : 0.0});
    }
    return t;
}

CsvTable wigner_table(const WignerGrid& grid) {
    CsvTable t({"x", "p", "W"});
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        for (std::size_t j = 0; j < grid.ps.size(); ++j) {
            t.add_row({grid.xs[i], grid.ps[j], grid.values[i * grid.ps.size() + j]});
        }
    }
    return t;
}

std::string code_version() {
#ifdef FOCKFORGE_VERSION
    return FOCKFORGE_VERSION;
#else
    return "unknown";
#endif
}

}  // namespace fockforge
