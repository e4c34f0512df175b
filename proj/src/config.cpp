#include "fockforge/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "fockforge/errors.hpp"

namespace fockforge {

using nlohmann::json;

std::string to_string(Mode m) {
    switch (m) {
        case Mode::optimize: return "optimize";
        case Mode::simulate: return "simulate";
        case Mode::detuning: return "detuning";
        case Mode::noise: return "noise";
        case Mode::lindblad: return "lindblad";
        case Mode::wigner: return "wigner";
        case Mode::sweep: return "sweep";
    }
    return "optimize";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::optimize, Mode::simulate, Mode::detuning, Mode::noise, Mode::lindblad,
                   Mode::wigner, Mode::sweep}) {
        if (to_string(m) == s) return m;
    }
    throw ValidationError("unknown mode '" + s + "'");
}

cplx PhysicalConfig::resolved_alpha() const {
    if (alpha) return *alpha;
    return cplx(std::sqrt(static_cast<double>(target_photons.value_or(0))), 0.0);
}

const std::vector<int>& SweepConfig::revivals_for(int n) const {
    auto it = revival_indices_by_n.find(n);
    return it != revival_indices_by_n.end() ? it->second : revival_indices;
}

namespace {

// Object reader that records which keys were consumed so leftovers can be
// rejected by name.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_or_root() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) throw ValidationError("missing required field '" + at(key) + "'");
        used_.insert(key);
        return j_.at(key);
    }

    Node child(const std::string& key) { return Node(raw(key), at(key)); }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ValidationError("field '" + at(key) + "' must be a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }
    std::optional<double> maybe_number(const std::string& key) {
        if (!has(key) || j_.at(key).is_null()) {
            if (has(key)) used_.insert(key);
            return std::nullopt;
        }
        return number(key);
    }

    long long integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw ValidationError("field '" + at(key) + "' must be an integer");
        }
        return v.get<long long>();
    }
    long long integer(const std::string& key, long long fallback) {
        return has(key) ? integer(key) : fallback;
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                       v.get<long long>() < 0)) {
            throw ValidationError("field '" + at(key) + "' must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ValidationError("field '" + at(key) + "' must be a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ValidationError("field '" + at(key) + "' must be a boolean");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ValidationError("field '" + at(key) + "' must be an array");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ValidationError("field '" + at(key) + "[" + std::to_string(i) +
                                      "]' must be a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<int> integers(const json& v, const std::string& where) const {
        if (!v.is_array()) throw ValidationError("field '" + where + "' must be an array");
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) {
                throw ValidationError("field '" + where + "[" + std::to_string(i) +
                                      "]' must be an integer");
            }
            out.push_back(v[i].get<int>());
        }
        return out;
    }
    std::vector<int> integers(const std::string& key) { return integers(raw(key), at(key)); }

    cplx complex(const std::string& key) {
        Node c = child(key);
        const cplx z(c.number("re"), c.number("im", 0.0));
        c.finish();
        return z;
    }

    std::string at(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw ValidationError("unknown field '" + at(it.key()) + "'");
            }
        }
    }

    void ignore(const std::string& key) { used_.insert(key); }

private:
    std::string path_or_root() const { return path_.empty() ? "configuration" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

GAdamConfig parse_optimizer(Node n) {
    GAdamConfig c;
    c.population_size = static_cast<int>(n.integer("population_size", c.population_size));
    c.generations = static_cast<int>(n.integer("generations", c.generations));
    c.elites = static_cast<int>(n.integer("elites", c.elites));
    c.tournament_size = static_cast<int>(n.integer("tournament_size", c.tournament_size));
    c.crossover_rate = n.number("crossover_rate", c.crossover_rate);
    c.mutation_sigma_tau = n.maybe_number("mutation_sigma_tau");
    c.mutation_sigma_beta = n.number("mutation_sigma_beta", c.mutation_sigma_beta);
    c.mutation_sigma_phi = n.number("mutation_sigma_phi", c.mutation_sigma_phi);
    c.epsilon_t = n.number("epsilon_t", c.epsilon_t);
    c.tau_min = n.number("tau_min", c.tau_min);
    c.beta_max = n.maybe_number("beta_max");
    c.adam_pre_steps = static_cast<int>(n.integer("adam_pre_steps", c.adam_pre_steps));
    c.adam_final_steps = static_cast<int>(n.integer("adam_final_steps", c.adam_final_steps));
    c.adam_lr = n.number("adam_lr", c.adam_lr);
    c.adam_final_lr_min = n.number("adam_final_lr_min", c.adam_final_lr_min);
    c.adam_beta1 = n.number("adam_beta1", c.adam_beta1);
    c.adam_beta2 = n.number("adam_beta2", c.adam_beta2);
    c.adam_eps = n.number("adam_eps", c.adam_eps);
    c.fd_step = n.number("fd_step", c.fd_step);
    if (n.has("time_target")) c.time_target = time_target_from_string(n.string("time_target"));
    c.single_layer_restarts =
        static_cast<int>(n.integer("single_layer_restarts", c.single_layer_restarts));
    c.single_layer_steps = static_cast<int>(n.integer("single_layer_steps", c.single_layer_steps));
    c.cutoff_budget = n.number("cutoff_budget", c.cutoff_budget);
    n.finish();
    return c;
}

PhysicalConfig parse_physical(Node n) {
    PhysicalConfig p;
    if (n.has("N")) p.target_photons = static_cast<int>(n.integer("N"));
    if (n.has("p")) p.depth = static_cast<int>(n.integer("p"));
    p.revival_index = static_cast<int>(n.integer("l", 0));
    p.params.omega = n.number("omega", 1.0);
    p.params.delta = n.number("delta", 0.0);
    if (n.has("alpha")) p.alpha = n.complex("alpha");
    if (n.has("ncut")) p.ncut = static_cast<int>(n.integer("ncut"));
    n.finish();

    require(!p.target_photons || *p.target_photons >= 1, "physical.N must be >= 1");
    require(!p.depth || *p.depth >= 1, "physical.p must be >= 1");
    require(p.revival_index >= 0, "physical.l must be >= 0");
    require(!p.ncut || *p.ncut >= 1, "physical.ncut must be >= 1");
    p.params.validate();
    return p;
}

std::vector<double> parse_detuning(Node n) {
    std::vector<double> deltas;
    if (n.has("deltas")) {
        deltas = n.numbers("deltas");
    } else {
        const double lo = n.number("min");
        const double hi = n.number("max");
        const double step = n.number("step");
        require(step > 0.0 && hi >= lo, "robustness.detuning needs min <= max and step > 0");
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (long long i = 0; i < count; ++i) deltas.push_back(lo + step * static_cast<double>(i));
    }
    n.finish();
    require(!deltas.empty(), "robustness.detuning.deltas must not be empty");
    return deltas;
}

}  // namespace

json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const PulseSequence& seq) {
    json betas = json::array();
    for (cplx b : seq.betas) betas.push_back(to_json(b));
    return json{{"taus", seq.taus},
                {"betas", betas},
                {"phi0", seq.phi0},
                {"phi1", seq.phi1},
                {"revival_index", seq.revival_index}};
}

PulseSequence sequence_from_json(const json& j, const std::string& where) {
    Node n(j, where);
    PulseSequence seq;
    seq.taus = n.numbers("taus");
    const json& betas = n.raw("betas");
    require(betas.is_array(), "field '" + n.at("betas") + "' must be an array");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        Node b(betas[i], n.at("betas") + "[" + std::to_string(i) + "]");
        seq.betas.emplace_back(b.number("re"), b.number("im", 0.0));
        b.finish();
    }
    seq.phi0 = n.number("phi0");
    seq.phi1 = n.number("phi1");
    seq.revival_index = static_cast<int>(n.integer("revival_index", 0));
    n.finish();
    seq.validate();
    return seq;
}

json to_json(const GAdamConfig& c) {
    json j{{"population_size", c.population_size},
           {"generations", c.generations},
           {"elites", c.elites},
           {"tournament_size", c.tournament_size},
           {"crossover_rate", c.crossover_rate},
           {"mutation_sigma_beta", c.mutation_sigma_beta},
           {"mutation_sigma_phi", c.mutation_sigma_phi},
           {"epsilon_t", c.epsilon_t},
           {"tau_min", c.tau_min},
           {"adam_pre_steps", c.adam_pre_steps},
           {"adam_final_steps", c.adam_final_steps},
           {"adam_lr", c.adam_lr},
           {"adam_final_lr_min", c.adam_final_lr_min},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps},
           {"fd_step", c.fd_step},
           {"time_target", to_string(c.time_target)},
           {"single_layer_restarts", c.single_layer_restarts},
           {"single_layer_steps", c.single_layer_steps},
           {"cutoff_budget", c.cutoff_budget},
           {"master_seed", c.master_seed}};
    j["mutation_sigma_tau"] = c.mutation_sigma_tau ? json(*c.mutation_sigma_tau) : json(nullptr);
    j["beta_max"] = c.beta_max ? json(*c.beta_max) : json(nullptr);
    return j;
}

RunConfig parse_config(const json& doc, Mode mode) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.document = doc;
    Node root(doc, "");

    if (root.has("mode")) {
        const std::string m = root.string("mode");
        if (mode_from_string(m) != mode) {
            throw ValidationError("configuration mode '" + m + "' does not match requested mode '" +
                                  to_string(mode) + "'");
        }
    }

    const bool seeded = mode == Mode::optimize || mode == Mode::sweep || mode == Mode::noise;
    if (seeded) {
        cfg.master_seed = root.unsigned_integer("master_seed");
    } else if (root.has("master_seed")) {
        cfg.master_seed = root.unsigned_integer("master_seed");
    }
    cfg.workers = static_cast<int>(root.integer("workers", 1));
    require(cfg.workers >= 1, "workers must be >= 1");

    const bool takes_sequence = mode == Mode::simulate || mode == Mode::detuning ||
                                mode == Mode::noise || mode == Mode::lindblad ||
                                mode == Mode::wigner;

    if (root.has("physical")) {
        cfg.physical = parse_physical(root.child("physical"));
    } else if (mode == Mode::optimize ||
               (takes_sequence && !root.has("sequence_report") && mode != Mode::wigner)) {
        root.raw("physical");  // throws naming the field
    }

    if (root.has("optimizer")) cfg.optimizer = parse_optimizer(root.child("optimizer"));
    cfg.optimizer.master_seed = cfg.master_seed;
    cfg.optimizer.workers = cfg.workers;
    cfg.optimizer.validate();

    if (root.has("sequence")) cfg.sequence = sequence_from_json(root.raw("sequence"));
    if (root.has("sequence_report")) cfg.sequence_report = root.string("sequence_report");
    require(!(cfg.sequence && cfg.sequence_report),
            "give either 'sequence' or 'sequence_report', not both");

    if (root.has("robustness")) {
        Node rob = root.child("robustness");
        if (rob.has("detuning")) cfg.detuning_deltas = parse_detuning(rob.child("detuning"));
        if (rob.has("noise")) {
            Node noise = rob.child("noise");
            cfg.noise_sigma_taus = noise.numbers("sigma_taus");
            cfg.noise_sigma_betas = noise.numbers("sigma_betas");
            cfg.noise_realizations = static_cast<int>(noise.integer("realizations", 200));
            noise.finish();
            for (double s : cfg.noise_sigma_taus) require(s >= 0.0, "noise sigmas must be >= 0");
            for (double s : cfg.noise_sigma_betas) require(s >= 0.0, "noise sigmas must be >= 0");
            require(!cfg.noise_sigma_taus.empty() && !cfg.noise_sigma_betas.empty(),
                    "robustness.noise sigma grids must not be empty");
            require(cfg.noise_realizations >= 1, "robustness.noise.realizations must be >= 1");
        }
        if (rob.has("lindblad")) {
            Node lb = rob.child("lindblad");
            cfg.lindblad.kappa = lb.number("kappa");
            cfg.lindblad.gamma = lb.number("gamma");
            cfg.lindblad.dt = lb.number("dt", cfg.lindblad.dt);
            cfg.lindblad.convention =
                dissipator_from_string(lb.string("convention", "standard"));
            lb.finish();
            cfg.lindblad.validate(cfg.physical.params.omega);
        }
        rob.finish();
    }

    if (root.has("wigner")) {
        Node w = root.child("wigner");
        cfg.wigner.state = w.string("state");
        if (cfg.wigner.state == "fock") {
            cfg.wigner.fock_n = static_cast<int>(w.integer("n"));
            require(cfg.wigner.fock_n >= 0, "wigner.n must be >= 0");
        } else if (cfg.wigner.state == "coherent") {
            cfg.wigner.coherent_alpha = w.complex("alpha");
        } else if (cfg.wigner.state != "sequence") {
            throw ValidationError("wigner.state must be 'fock', 'coherent' or 'sequence'");
        }
        if (w.has("ncut")) cfg.wigner.ncut = static_cast<int>(w.integer("ncut"));
        if (w.has("grid")) {
            Node g = w.child("grid");
            cfg.wigner.min = g.number("min");
            cfg.wigner.max = g.number("max");
            cfg.wigner.step = g.number("step");
            g.finish();
        }
        w.finish();
        require(cfg.wigner.step > 0.0 && cfg.wigner.max >= cfg.wigner.min,
                "wigner.grid needs min <= max and step > 0");
    }

    if (root.has("sweep")) {
        Node s = root.child("sweep");
        cfg.sweep.target_photons = s.integers("N");
        cfg.sweep.depths = s.integers("p");
        const json& l = s.raw("l");
        if (l.is_object()) {
            for (auto it = l.begin(); it != l.end(); ++it) {
                int n = 0;
                try {
                    n = std::stoi(it.key());
                } catch (const std::exception&) {
                    throw ValidationError("sweep.l keys must be photon numbers, got '" +
                                          it.key() + "'");
                }
                cfg.sweep.revival_indices_by_n[n] = s.integers(it.value(), "sweep.l." + it.key());
            }
        } else {
            cfg.sweep.revival_indices = s.integers(l, "sweep.l");
        }
        s.finish();
        require(!cfg.sweep.target_photons.empty(), "sweep.N must not be empty");
        require(!cfg.sweep.depths.empty(), "sweep.p must not be empty");
        for (int n : cfg.sweep.target_photons) {
            require(n >= 1, "sweep.N entries must be >= 1");
            const auto& ls = cfg.sweep.revivals_for(n);
            require(!ls.empty(), "sweep.l has no revival indices for N=" + std::to_string(n));
            for (int v : ls) require(v >= 0, "sweep.l entries must be >= 0");
        }
        for (int p : cfg.sweep.depths) require(p >= 1, "sweep.p entries must be >= 1");
    }

    if (root.has("io")) {
        Node io = root.child("io");
        cfg.io.output_dir = io.string("output_dir", ".");
        if (io.has("formats")) {
            const json& f = io.raw("formats");
            require(f.is_array(), "io.formats must be an array");
            cfg.io.json = cfg.io.csv = false;
            for (const auto& v : f) {
                require(v.is_string(), "io.formats entries must be strings");
                const auto s = v.get<std::string>();
                if (s == "json") {
                    cfg.io.json = true;
                } else if (s == "csv") {
                    cfg.io.csv = true;
                } else {
                    throw ValidationError("io.formats entry '" + s + "' is not json or csv");
                }
            }
        }
        io.finish();
    }
    root.finish();

    // Mode-required blocks.
    switch (mode) {
        case Mode::optimize:
            require(cfg.physical.target_photons.has_value(), "missing required field 'physical.N'");
            require(cfg.physical.depth.has_value(), "missing required field 'physical.p'");
            require(doc["physical"].contains("l"), "missing required field 'physical.l'");
            break;
        case Mode::simulate:
        case Mode::lindblad:
        case Mode::detuning:
        case Mode::noise:
            require(cfg.sequence || cfg.sequence_report,
                    "missing required field 'sequence' (or 'sequence_report')");
            if (!cfg.sequence_report) {
                require(cfg.physical.target_photons.has_value(),
                        "missing required field 'physical.N'");
            }
            if (mode == Mode::detuning) {
                require(!cfg.detuning_deltas.empty(),
                        "missing required field 'robustness.detuning'");
            }
            if (mode == Mode::noise) {
                require(!cfg.noise_sigma_taus.empty(), "missing required field 'robustness.noise'");
            }
            if (mode == Mode::lindblad) {
                require(doc.contains("robustness") && doc["robustness"].contains("lindblad"),
                        "missing required field 'robustness.lindblad'");
            }
            break;
        case Mode::wigner:
            require(doc.contains("wigner"), "missing required field 'wigner'");
            if (cfg.wigner.state == "sequence") {
                require(cfg.sequence || cfg.sequence_report,
                        "missing required field 'sequence' (or 'sequence_report')");
                if (!cfg.sequence_report) {
                    require(cfg.physical.target_photons.has_value(),
                            "missing required field 'physical.N'");
                }
            }
            break;
        case Mode::sweep:
            require(doc.contains("sweep"), "missing required field 'sweep'");
            break;
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Mode mode) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read configuration file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("configuration '" + path.string() + "' is not valid JSON: " +
                              e.what());
    }
    RunConfig cfg = parse_config(doc, mode);
    const auto base = path.parent_path();
    if (cfg.sequence_report && cfg.sequence_report->is_relative()) {
        cfg.sequence_report = base / *cfg.sequence_report;
    }
    return cfg;
}

}  // namespace fockforge
