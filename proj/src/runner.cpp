#include "fockforge/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "fockforge/errors.hpp"
#include "fockforge/parallel.hpp"

namespace fockforge {

using nlohmann::json;

namespace {

const char* const kWignerConvention = "W(alpha) = (2/pi) Tr[D(-alpha) rho D(-alpha)^dag P], P = (-1)^n";

struct SimulationInputs {
    PulseSequence seq;
    int target_photons = 1;
    JCParams params;
    cplx alpha;
    FockCutoff cutoff{1};
    double tau_min = 0.0;
    std::optional<QualityReport> stored;
};

json physical_json(int n, std::optional<int> p, int l, const JCParams& params, cplx alpha,
                   FockCutoff cutoff) {
    json j{{"N", n},
           {"l", l},
           {"omega", params.omega},
           {"delta", params.delta},
           {"alpha", to_json(alpha)},
           {"ncut", cutoff.ncut()}};
    if (p) j["p"] = *p;
    return j;
}

json conventions_json(const RunConfig& cfg) {
    return json{{"wigner", kWignerConvention},
                {"dissipator", to_string(cfg.lindblad.convention)},
                {"frame", "H = -delta a^dag a + omega (a sigma_+ + a^dag sigma_-), no extra rotating frame"},
                {"basis", "joint index q * (ncut + 1) + n with q = 0 (g), 1 (e)"},
                {"leakage_tolerance", kLeakageTolerance},
                {"guard_band", kGuardBand}};
}

json base_report(const RunConfig& cfg) {
    return json{{"code_version", code_version()},
                {"mode", to_string(cfg.mode)},
                {"master_seed", cfg.master_seed},
                {"config", cfg.document},
                {"conventions", conventions_json(cfg)}};
}

QualityReport quality_from_json(const json& q) {
    QualityReport r;
    r.loss = q.at("loss").get<double>();
    r.fidelity_traced = q.at("fidelity_traced").get<double>();
    r.fidelity_postselected = q.at("fidelity_postselected").get<double>();
    r.success_probability = q.at("success_probability").get<double>();
    return r;
}

SimulationInputs resolve_simulation(const RunConfig& cfg) {
    SimulationInputs in;
    in.tau_min = cfg.optimizer.resolved_tau_min(cfg.physical.params.omega);
    const json* phys_doc = cfg.document.contains("physical") ? &cfg.document["physical"] : nullptr;

    if (cfg.sequence_report) {
        std::ifstream f(*cfg.sequence_report);
        if (!f) {
            throw ValidationError("cannot read sequence_report '" +
                                  cfg.sequence_report->string() + "'");
        }
        json rep;
        try {
            rep = json::parse(f);
            in.seq = sequence_from_json(rep.at("sequence"), "sequence_report.sequence");
            const json& phys = rep.at("resolved").at("physical");
            in.target_photons = phys.at("N").get<int>();
            in.params.omega = phys.at("omega").get<double>();
            in.params.delta = phys.at("delta").get<double>();
            in.alpha = cplx(phys.at("alpha").at("re").get<double>(),
                            phys.at("alpha").at("im").get<double>());
            in.cutoff = FockCutoff(phys.at("ncut").get<int>());
            in.stored = quality_from_json(rep.at("quality"));
            if (rep.at("resolved").contains("tau_min")) {
                in.tau_min = rep["resolved"]["tau_min"].get<double>();
            }
        } catch (const json::exception& e) {
            throw ValidationError("sequence_report '" + cfg.sequence_report->string() +
                                  "' is not a RunReport: " + e.what());
        }
        // Explicit physical fields override the stored ones.
        if (phys_doc) {
            if (phys_doc->contains("N")) in.target_photons = *cfg.physical.target_photons;
            if (phys_doc->contains("omega")) in.params.omega = cfg.physical.params.omega;
            if (phys_doc->contains("delta")) in.params.delta = cfg.physical.params.delta;
            if (phys_doc->contains("alpha")) in.alpha = *cfg.physical.alpha;
            if (phys_doc->contains("ncut")) in.cutoff = FockCutoff(*cfg.physical.ncut);
        }
    } else {
        in.seq = *cfg.sequence;
        in.target_photons = *cfg.physical.target_photons;
        in.params = cfg.physical.params;
        in.alpha = cfg.physical.resolved_alpha();
        in.cutoff = cfg.physical.ncut
                        ? FockCutoff(*cfg.physical.ncut)
                        : default_cutoff(in.target_photons, in.seq.displacement_budget());
    }
    in.params.validate();
    in.seq.validate();
    if (in.target_photons > in.cutoff.ncut()) {
        throw IndexOutOfRange("N exceeds the Fock cutoff");
    }
    return in;
}

json resolved_simulation_json(const SimulationInputs& in) {
    return json{{"physical", physical_json(in.target_photons, in.seq.depth(),
                                           in.seq.revival_index, in.params, in.alpha, in.cutoff)},
                {"tau_min", in.tau_min}};
}

// Shared by optimize and simulate: replays the sequence with diagnostics.
void describe_sequence(const PulseSequence& seq, int target_photons, const JCParams& params,
                       cplx alpha, FockCutoff cutoff, RunOutput& out) {
    const auto outcome =
        apply_sequence(seq, initial_joint_state(alpha, cutoff), params, /*collect=*/true);
    const QualityReport q = quality_of_state(outcome.state, target_photons, seq.phi0, seq.phi1);
    out.report["sequence"] = to_json(seq);
    out.report["total_time"] = seq.total_time();
    out.report["quality"] = to_json(q);
    out.report["leakage"] = to_json(outcome.leakage);
    out.report["layers"] = layers_json(outcome.layers);
    out.report["checks"] = json{{"postselected_at_least_traced",
                                 q.fidelity_postselected >= q.fidelity_traced - 1e-9}};

    const auto traced = number_distribution(partial_trace_qubit(outcome.state));
    const auto selected = post_select(outcome.state, seq.phi0, seq.phi1);
    const auto post = number_distribution(pure_density(selected.cavity));
    out.tables.emplace_back("sequence.csv", sequence_table(seq));
    out.tables.emplace_back("layers.csv", layers_table(outcome.layers));
    out.tables.emplace_back("density_maps.csv", density_maps_table(outcome.layers));
    out.tables.emplace_back("distribution.csv", distribution_table(traced, post));
}

void reject_ncut(const RunConfig& cfg) {
    if (cfg.physical.ncut) {
        throw ValidationError(
            "physical.ncut is not accepted in this mode; the cutoff follows "
            "optimizer.cutoff_budget");
    }
}

RunOutput run_optimize(const RunConfig& cfg) {
    reject_ncut(cfg);
    RunOutput out;
    out.report = base_report(cfg);
    const int n = *cfg.physical.target_photons;
    const int p = *cfg.physical.depth;
    const int l = cfg.physical.revival_index;
    const cplx alpha = cfg.physical.resolved_alpha();
    const auto trace = optimize(n, p, l, cfg.physical.params, alpha, cfg.optimizer);

    json resolved_opt = to_json(cfg.optimizer);
    resolved_opt["mutation_sigma_tau"] = cfg.optimizer.resolved_sigma_tau(trace.target_time, p);
    resolved_opt["beta_max"] = cfg.optimizer.resolved_beta_max(n);
    out.report["resolved"] = json{
        {"physical", physical_json(n, p, l, cfg.physical.params, alpha, trace.cutoff)},
        {"optimizer", resolved_opt},
        {"tau_min", cfg.optimizer.resolved_tau_min(cfg.physical.params.omega)}};
    out.report["optimization"] = trace_summary(trace);
    describe_sequence(trace.best.seq, n, cfg.physical.params, alpha, trace.cutoff, out);
    out.report["timing"] = json{{"wall_seconds", trace.wall_seconds}, {"workers", cfg.workers}};
    out.tables.emplace_back("generations.csv", generations_table(trace));
    return out;
}

RunOutput run_simulate(const RunConfig& cfg) {
    RunOutput out;
    out.report = base_report(cfg);
    const auto in = resolve_simulation(cfg);
    out.report["resolved"] = resolved_simulation_json(in);
    describe_sequence(in.seq, in.target_photons, in.params, in.alpha, in.cutoff, out);
    if (in.stored) {
        const double now = out.report["quality"]["fidelity_postselected"].get<double>();
        out.report["replay"] = json{{"stored_fidelity_postselected", in.stored->fidelity_postselected},
                                    {"difference", now - in.stored->fidelity_postselected}};
    }
    return out;
}

RunOutput run_detuning(const RunConfig& cfg) {
    RunOutput out;
    out.report = base_report(cfg);
    const auto in = resolve_simulation(cfg);
    out.report["resolved"] = resolved_simulation_json(in);
    out.report["sequence"] = to_json(in.seq);
    const auto scan = detuning_scan(in.seq, in.target_photons, in.params, in.alpha,
                                    cfg.detuning_deltas, in.cutoff, cfg.workers);
    out.report["detuning"] =
        json{{"delta_units", "omega"},
             {"half_level", scan.half_level},
             {"fwhm", scan.fwhm ? json(*scan.fwhm) : json(nullptr)},
             {"fidelity_min", *std::min_element(scan.fidelities.begin(), scan.fidelities.end())},
             {"fidelity_max", *std::max_element(scan.fidelities.begin(), scan.fidelities.end())}};
    CsvTable t({"delta", "fidelity_postselected"});
    for (std::size_t i = 0; i < scan.deltas.size(); ++i) {
        t.add_row({scan.deltas[i], scan.fidelities[i]});
    }
    out.tables.emplace_back("detuning.csv", std::move(t));
    return out;
}

RunOutput run_noise(const RunConfig& cfg) {
    RunOutput out;
    out.report = base_report(cfg);
    const auto in = resolve_simulation(cfg);
    out.report["resolved"] = resolved_simulation_json(in);
    out.report["sequence"] = to_json(in.seq);
    const auto noiseless = quality(in.seq, in.target_photons, in.params, in.alpha, in.cutoff);
    const auto grid = noise_grid(in.seq, in.target_photons, in.params, in.alpha,
                                 cfg.noise_sigma_taus, cfg.noise_sigma_betas,
                                 cfg.noise_realizations, cfg.master_seed, in.cutoff, in.tau_min,
                                 cfg.workers);
    json points = json::array();
    CsvTable t({"sigma_tau", "sigma_beta", "mean_fidelity", "standard_error"});
    for (const auto& g : grid) {
        points.push_back(json{{"sigma_tau", g.sigma_tau},
                              {"sigma_beta", g.sigma_beta},
                              {"mean_fidelity", g.estimate.mean},
                              {"standard_error", g.estimate.standard_error}});
        t.add_row({g.sigma_tau, g.sigma_beta, g.estimate.mean, g.estimate.standard_error});
    }
    out.report["noise"] = json{{"realizations", cfg.noise_realizations},
                               {"noiseless_fidelity", noiseless.fidelity_postselected},
                               {"grid", points}};
    out.tables.emplace_back("noise.csv", std::move(t));
    return out;
}

RunOutput run_lindblad(const RunConfig& cfg) {
    RunOutput out;
    out.report = base_report(cfg);
    const auto in = resolve_simulation(cfg);
    out.report["resolved"] = resolved_simulation_json(in);
    out.report["sequence"] = to_json(in.seq);
    cfg.lindblad.validate(in.params.omega);
    const auto unitary = quality(in.seq, in.target_photons, in.params, in.alpha, in.cutoff);
    const auto open = lindblad_propagate_sequence(in.seq, in.target_photons, in.params, in.alpha,
                                                  cfg.lindblad, in.cutoff);
    const auto& d = open.diagnostics;
    out.report["quality_unitary"] = to_json(unitary);
    out.report["quality"] = to_json(open.quality);
    out.report["lindblad"] = json{{"kappa", cfg.lindblad.kappa},
                                  {"gamma", cfg.lindblad.gamma},
                                  {"dt", cfg.lindblad.dt},
                                  {"convention", to_string(cfg.lindblad.convention)},
                                  {"trace_preserving", d.trace_preserving},
                                  {"max_trace_drift", d.max_trace_drift},
                                  {"final_trace", open.final_state.trace()},
                                  {"max_hermiticity_error", d.max_hermiticity_error},
                                  {"min_population", d.min_population},
                                  {"steps", d.steps}};
    const auto traced = number_distribution(open.final_state.reduced());
    std::vector<double> post(traced.size(), 0.0);
    {
        const auto q = qubit_state(in.seq.phi0, in.seq.phi1);
        const int dim = in.cutoff.dim();
        const auto& r = open.final_state.elements;
        double total = 0.0;
        for (int n = 0; n < dim; ++n) {
            cplx v = 0.0;
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) v += std::conj(q[a]) * q[b] * r(a * dim + n, b * dim + n);
            }
            post[n] = v.real();
            total += v.real();
        }
        if (total > 0.0) {
            for (double& x : post) x /= total;
        }
    }
    out.tables.emplace_back("distribution.csv", distribution_table(traced, post));
    return out;
}

RunOutput run_wigner(const RunConfig& cfg) {
    RunOutput out;
    out.report = base_report(cfg);
    const auto& w = cfg.wigner;
    CavityDensityMatrix rho{Eigen::MatrixXcd(), FockCutoff(1)};
    if (w.state == "fock") {
        const FockCutoff c(w.ncut.value_or(std::max(w.fock_n + kGuardBand + 1, 2 * w.fock_n + 10)));
        rho = pure_density(fock_state(w.fock_n, c));
    } else if (w.state == "coherent") {
        const FockCutoff c =
            w.ncut ? FockCutoff(*w.ncut) : coherent_cutoff(std::norm(w.coherent_alpha));
        rho = pure_density(coherent_state(w.coherent_alpha, c));
    } else {
        const auto in = resolve_simulation(cfg);
        out.report["resolved"] = resolved_simulation_json(in);
        out.report["sequence"] = to_json(in.seq);
        const auto outcome =
            apply_sequence(in.seq, initial_joint_state(in.alpha, in.cutoff), in.params);
        rho = pure_density(post_select(outcome.state, in.seq.phi0, in.seq.phi1).cavity);
    }
    const auto grid = wigner_grid(rho, w.min, w.max, w.step);
    const auto mn = std::min_element(grid.values.begin(), grid.values.end());
    const auto idx = static_cast<std::size_t>(std::distance(grid.values.begin(), mn));
    out.report["wigner"] = json{{"state", w.state},
                                {"ncut", rho.cutoff.ncut()},
                                {"min_value", *mn},
                                {"min_at", json{{"x", grid.xs[idx / grid.ps.size()]},
                                                {"p", grid.ps[idx % grid.ps.size()]}}},
                                {"points", grid.values.size()}};
    out.tables.emplace_back("wigner.csv", wigner_table(grid));
    return out;
}

struct SweepCell {
    int n = 0;
    int p = 0;
    int l = 0;
    std::string status = "ok";
    std::optional<OptimizationTrace> trace;
    QualityReport quality;
};

RunOutput run_sweep(const RunConfig& cfg) {
    reject_ncut(cfg);
    RunOutput out;
    out.report = base_report(cfg);
    const auto start = std::chrono::steady_clock::now();
    GAdamConfig cell_config = cfg.optimizer;
    cell_config.workers = 1;
    const JCParams params = cfg.physical.params;

    // Stage 1: one single-layer optimum per (N, l), shared by every depth.
    struct Seed {
        int n, l;
        std::optional<Individual> single;
        std::string status = "ok";
        long long evaluations = 0;
    };
    std::vector<Seed> seeds;
    for (int n : cfg.sweep.target_photons) {
        for (int l : cfg.sweep.revivals_for(n)) seeds.push_back({n, l, std::nullopt});
    }
    parallel_for(seeds.size(), cfg.workers, [&](std::size_t i) {
        auto& s = seeds[i];
        try {
            s.single = optimize_single_layer(s.n, s.l, params,
                                             cplx(std::sqrt(double(s.n)), 0.0), cell_config,
                                             &s.evaluations);
        } catch (const Error& e) {
            s.status = e.what();
        }
    });

    // Stage 2: every depth from its seed.
    std::vector<SweepCell> cells;
    std::vector<std::size_t> cell_seed;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        for (int p : cfg.sweep.depths) {
            SweepCell c;
            c.n = seeds[i].n;
            c.p = p;
            c.l = seeds[i].l;
            cells.push_back(std::move(c));
            cell_seed.push_back(i);
        }
    }
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        auto& c = cells[i];
        const auto& s = seeds[cell_seed[i]];
        if (!s.single) {
            c.status = "single-layer search failed: " + s.status;
            return;
        }
        try {
            const cplx alpha(std::sqrt(double(c.n)), 0.0);
            c.trace = optimize_from(*s.single, c.n, c.p, c.l, params, alpha, cell_config);
            c.trace->evaluations += s.evaluations;
            c.quality = quality(c.trace->best.seq, c.n, params, alpha, c.trace->cutoff);
        } catch (const Error& e) {
            c.status = e.what();
            c.trace.reset();
        }
    });

    json cells_json = json::array();
    CsvTable all({"N", "p", "l", "ok", "loss", "fidelity_traced", "fidelity_postselected",
                  "success_probability", "total_time"});
    for (const auto& c : cells) {
        json j{{"N", c.n}, {"p", c.p}, {"l", c.l}, {"status", c.status}};
        const bool ok = c.trace.has_value();
        if (ok) {
            j["quality"] = to_json(c.quality);
            j["sequence"] = to_json(c.trace->best.seq);
            j["total_time"] = c.trace->best.seq.total_time();
            j["ncut"] = c.trace->cutoff.ncut();
            j["optimization"] = trace_summary(*c.trace);
        }
        cells_json.push_back(j);
        all.add_row({double(c.n), double(c.p), double(c.l), ok ? 1.0 : 0.0,
                     ok ? c.quality.loss : NAN, ok ? c.quality.fidelity_traced : NAN,
                     ok ? c.quality.fidelity_postselected : NAN,
                     ok ? c.quality.success_probability : NAN,
                     ok ? c.trace->best.seq.total_time() : NAN});
    }

    // Per (N, p) best over l, then per N best over p.
    auto better = [](const SweepCell* a, const SweepCell& b) {
        return !a || b.quality.fidelity_postselected > a->quality.fidelity_postselected;
    };
    CsvTable depth_table({"N", "p", "l", "fidelity_traced", "fidelity_postselected",
                          "success_probability", "total_time"});
    CsvTable best_table({"N", "p", "l", "fidelity_traced", "fidelity_postselected",
                         "success_probability", "total_time"});
    json best_json = json::array();
    auto row = [](const SweepCell& c) {
        return std::vector<double>{double(c.n),
                                   double(c.p),
                                   double(c.l),
                                   c.quality.fidelity_traced,
                                   c.quality.fidelity_postselected,
                                   c.quality.success_probability,
                                   c.trace->best.seq.total_time()};
    };
    for (int n : cfg.sweep.target_photons) {
        const SweepCell* best_n = nullptr;
        for (int p : cfg.sweep.depths) {
            const SweepCell* best_p = nullptr;
            for (const auto& c : cells) {
                if (c.n == n && c.p == p && c.trace && better(best_p, c)) best_p = &c;
            }
            if (!best_p) continue;
            depth_table.add_row(row(*best_p));
            if (better(best_n, *best_p)) best_n = best_p;
        }
        if (!best_n) {
            best_json.push_back(json{{"N", n}, {"status", "no successful cell"}});
            continue;
        }
        best_table.add_row(row(*best_n));
        best_json.push_back(json{{"N", n},
                                 {"p", best_n->p},
                                 {"l", best_n->l},
                                 {"quality", to_json(best_n->quality)},
                                 {"total_time", best_n->trace->best.seq.total_time()}});
    }

    json resolved_opt = to_json(cell_config);
    out.report["resolved"] = json{{"optimizer", resolved_opt},
                                  {"omega", params.omega},
                                  {"delta", params.delta},
                                  {"tau_min", cfg.optimizer.resolved_tau_min(params.omega)}};
    out.report["cells"] = cells_json;
    out.report["best"] = best_json;
    out.report["timing"] =
        json{{"wall_seconds",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
             {"workers", cfg.workers}};
    out.tables.emplace_back("sweep_cells.csv", std::move(all));
    out.tables.emplace_back("sweep.csv", std::move(depth_table));
    out.tables.emplace_back("sweep_best.csv", std::move(best_table));
    return out;
}

}  // namespace

RunOutput execute(const RunConfig& cfg) {
    switch (cfg.mode) {
        case Mode::optimize: return run_optimize(cfg);
        case Mode::simulate: return run_simulate(cfg);
        case Mode::detuning: return run_detuning(cfg);
        case Mode::noise: return run_noise(cfg);
        case Mode::lindblad: return run_lindblad(cfg);
        case Mode::wigner: return run_wigner(cfg);
        case Mode::sweep: return run_sweep(cfg);
    }
    throw ValidationError("unsupported mode");
}

void persist(const RunOutput& output, const std::filesystem::path& dir, const IoConfig& io) {
    std::filesystem::create_directories(dir);
    if (io.json) write_json(dir / "report.json", output.report);
    if (io.csv) {
        for (const auto& [name, table] : output.tables) write_file_atomic(dir / name, table.str());
    }
}

json without_timing(json report) {
    report.erase("timing");
    return report;
}

int run(Mode mode, const std::filesystem::path& config_path,
        const std::optional<std::filesystem::path>& out_dir, std::optional<int> workers,
        std::ostream& err) {
    try {
        RunConfig cfg = load_config(config_path, mode);
        if (workers) {
            if (*workers < 1) throw ValidationError("--workers must be >= 1");
            cfg.workers = *workers;
            cfg.optimizer.workers = *workers;
        }
        const auto dir = out_dir.value_or(cfg.io.output_dir);
        const RunOutput output = execute(cfg);
        persist(output, dir, cfg.io);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "fockforge: validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SimulationError& e) {
        err << "fockforge: simulation error: " << e.what() << '\n';
        return kExitSimulation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "fockforge: I/O error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace fockforge
