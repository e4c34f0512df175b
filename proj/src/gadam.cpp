#include "fockforge/gadam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fockforge/errors.hpp"
#include "fockforge/parallel.hpp"

namespace fockforge {

std::string to_string(TimeTarget t) {
    return t == TimeTarget::single_layer_optimum ? "single_layer_optimum" : "revival_estimate";
}

TimeTarget time_target_from_string(const std::string& s) {
    if (s == "single_layer_optimum") return TimeTarget::single_layer_optimum;
    if (s == "revival_estimate") return TimeTarget::revival_estimate;
    throw ValidationError("time_target must be single_layer_optimum or revival_estimate, got '" +
                          s + "'");
}

void GAdamConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& what) {
        throw ValidationError("optimizer." + field + " " + what);
    };
    if (population_size < 1) fail("population_size", "must be >= 1");
    if (generations < 0) fail("generations", "must be >= 0");
    if (elites < 1) fail("elites", "must be >= 1");
    // A degenerate run without generations may keep the whole population.
    if (generations > 0 ? elites >= population_size : elites > population_size) {
        fail("elites", "must be below population_size");
    }
    if (tournament_size < 1 || tournament_size > population_size) {
        fail("tournament_size", "must be in [1, population_size]");
    }
    if (crossover_rate < 0.0 || crossover_rate > 1.0) fail("crossover_rate", "must be in [0, 1]");
    if (mutation_sigma_tau && *mutation_sigma_tau < 0.0) fail("mutation_sigma_tau", "must be >= 0");
    if (mutation_sigma_beta < 0.0) fail("mutation_sigma_beta", "must be >= 0");
    if (mutation_sigma_phi < 0.0) fail("mutation_sigma_phi", "must be >= 0");
    if (!(epsilon_t > 0.0)) fail("epsilon_t", "must be > 0");
    if (!(tau_min > 0.0)) fail("tau_min", "must be > 0");
    if (beta_max && !(*beta_max > 0.0)) fail("beta_max", "must be > 0");
    if (adam_pre_steps < 0) fail("adam_pre_steps", "must be >= 0");
    if (adam_final_steps < 0) fail("adam_final_steps", "must be >= 0");
    if (!(adam_lr > 0.0)) fail("adam_lr", "must be > 0");
    if (!(adam_final_lr_min > 0.0)) fail("adam_final_lr_min", "must be > 0");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0) fail("adam_beta1", "must be in [0, 1)");
    if (adam_beta2 < 0.0 || adam_beta2 >= 1.0) fail("adam_beta2", "must be in [0, 1)");
    if (!(adam_eps > 0.0)) fail("adam_eps", "must be > 0");
    if (!(fd_step > 0.0)) fail("fd_step", "must be > 0");
    if (single_layer_restarts < 1) fail("single_layer_restarts", "must be >= 1");
    if (single_layer_steps < 0) fail("single_layer_steps", "must be >= 0");
    if (cutoff_budget < 0.0) fail("cutoff_budget", "must be >= 0");
    if (workers < 1) fail("workers", "must be >= 1");
}

double GAdamConfig::resolved_beta_max(int target_photons) const {
    return beta_max.value_or(2.0 * std::sqrt(double(target_photons)));
}

double GAdamConfig::resolved_sigma_tau(double target_time, int depth) const {
    return mutation_sigma_tau.value_or(0.02 * target_time / depth);
}

// ---------------------------------------------------------------------------

Problem Problem::make(int target_photons, int depth, int revival_index, const JCParams& params,
                      cplx alpha, const GAdamConfig& config) {
    if (target_photons < 1) throw ValidationError("target photon number must be >= 1");
    if (depth < 1) throw ValidationError("depth must be >= 1");
    params.validate();
    Problem pr;
    pr.target_photons = target_photons;
    pr.depth = depth;
    pr.revival_index = revival_index;
    pr.params = params;
    pr.alpha = alpha;
    pr.cutoff = default_cutoff(target_photons, config.cutoff_budget);
    pr.tau_min = config.resolved_tau_min(params.omega);
    pr.beta_max = config.resolved_beta_max(target_photons);
    if (target_photons > pr.cutoff.ncut() - kGuardBand) {
        throw CutoffTooSmall("target photon number inside the leakage guard band");
    }
    return pr;
}

void Problem::project(std::span<double> theta) const {
    const auto p = static_cast<std::size_t>(depth);
    for (std::size_t k = 0; k < p; ++k) {
        theta[k] = std::max(theta[k], tau_min);
        const double mag = std::hypot(theta[p + k], theta[2 * p + k]);
        if (mag > beta_max) {
            const double s = beta_max / mag;
            theta[p + k] *= s;
            theta[2 * p + k] *= s;
        }
    }
}

bool Problem::within_bounds(std::span<const double> theta) const {
    const auto p = static_cast<std::size_t>(depth);
    for (std::size_t k = 0; k < p; ++k) {
        if (theta[k] < tau_min) return false;
        if (std::hypot(theta[p + k], theta[2 * p + k]) > beta_max * (1.0 + 1e-12)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

struct Track {
    JointState state;
    double leak;
};

// Propagates layers [first, last) of a depth-p theta from `track`.
void run_layers(Track& track, std::span<const double> theta, int first, int last,
                const JCParams& params) {
    const std::size_t p = (theta.size() - 2) / 3;
    for (int k = first; k < last; ++k) {
        jc_propagate_inplace(track.state, theta[k], params);
        track.leak = std::max(track.leak, track.state.top_population());
        apply_displacement(cplx(theta[p + k], theta[2 * p + k]), track.state);
        track.leak = std::max(track.leak, track.state.top_population());
    }
}

double score(const Track& track, int target, double phi0, double phi1) {
    if (track.leak > kLeakageTolerance) return 1.0;
    return loss_of_state(track.state, target, phi0, phi1);
}

}  // namespace

SequenceLoss::SequenceLoss(Problem problem, double fd_step)
    : problem_(std::move(problem)),
      fd_step_(fd_step),
      initial_(initial_joint_state(problem_.alpha, problem_.cutoff)) {
    if (!(fd_step > 0.0)) throw ValidationError("fd_step must be > 0");
}

double SequenceLoss::value(std::span<const double> theta) const {
    const int p = problem_.depth;
    Track t{initial_, initial_.top_population()};
    run_layers(t, theta, 0, p, problem_.params);
    return score(t, problem_.target_photons, theta[3 * p], theta[3 * p + 1]);
}

double SequenceLoss::value_and_gradient(std::span<const double> theta,
                                        std::span<double> grad) const {
    const int p = problem_.depth;
    const auto up = static_cast<std::size_t>(p);
    const int target = problem_.target_photons;
    const double h = fd_step_;
    const double phi0 = theta[3 * up];
    const double phi1 = theta[3 * up + 1];

    // before[k]: state entering layer k; after_jc[k]: after U(tau_k).
    std::vector<Track> before;
    std::vector<Track> after_jc;
    before.reserve(up + 1);
    after_jc.reserve(up);
    before.push_back({initial_, initial_.top_population()});
    for (int k = 0; k < p; ++k) {
        Track t = before.back();
        jc_propagate_inplace(t.state, theta[k], problem_.params);
        t.leak = std::max(t.leak, t.state.top_population());
        after_jc.push_back(t);
        apply_displacement(cplx(theta[up + k], theta[2 * up + k]), t.state);
        t.leak = std::max(t.leak, t.state.top_population());
        before.push_back(std::move(t));
    }
    const double f0 = score(before.back(), target, phi0, phi1);

    std::vector<double> work(theta.begin(), theta.end());
    for (int k = 0; k < p; ++k) {
        // duration
        {
            const double lo = std::max(theta[k] - h, problem_.tau_min);
            const double hi = std::max(theta[k] + h, problem_.tau_min);
            double f[2];
            const double taus[2] = {hi, lo};
            for (int s = 0; s < 2; ++s) {
                work[k] = taus[s];
                Track t = before[k];
                run_layers(t, work, k, k + 1, problem_.params);
                run_layers(t, work, k + 1, p, problem_.params);
                f[s] = score(t, target, phi0, phi1);
            }
            work[k] = theta[k];
            grad[k] = hi > lo ? (f[0] - f[1]) / (hi - lo) : 0.0;
        }
        // displacement, real then imaginary part
        for (std::size_t part : {up + k, 2 * up + k}) {
            double f[2];
            const double shifts[2] = {h, -h};
            for (int s = 0; s < 2; ++s) {
                work[part] = theta[part] + shifts[s];
                Track t = after_jc[k];
                apply_displacement(cplx(work[up + k], work[2 * up + k]), t.state);
                t.leak = std::max(t.leak, t.state.top_population());
                run_layers(t, work, k + 1, p, problem_.params);
                f[s] = score(t, target, phi0, phi1);
            }
            work[part] = theta[part];
            grad[part] = (f[0] - f[1]) / (2.0 * h);
        }
    }
    const Track& last = before.back();
    grad[3 * up] = (score(last, target, phi0 + h, phi1) - score(last, target, phi0 - h, phi1)) /
                   (2.0 * h);
    grad[3 * up + 1] =
        (score(last, target, phi0, phi1 + h) - score(last, target, phi0, phi1 - h)) / (2.0 * h);
    return f0;
}

std::vector<double> gradient(const PulseSequence& seq, int target_photons,
                             const JCParams& params, cplx alpha, FockCutoff cutoff,
                             double fd_step, double tau_min) {
    if (!(fd_step > 0.0)) throw ValidationError("fd_step must be > 0");
    const int p = seq.depth();
    const std::vector<double> theta = seq.parameters();
    auto eval = [&](const std::vector<double>& x) {
        try {
            return loss(PulseSequence::from_parameters(x, p, seq.revival_index), target_photons,
                        params, alpha, cutoff);
        } catch (const LeakageExceeded&) {
            return 1.0;
        }
    };
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        std::vector<double> plus = theta;
        std::vector<double> minus = theta;
        plus[i] += fd_step;
        minus[i] -= fd_step;
        if (i < static_cast<std::size_t>(p)) {
            plus[i] = std::max(plus[i], tau_min);
            minus[i] = std::max(minus[i], tau_min);
        }
        const double spacing = plus[i] - minus[i];
        grad[i] = spacing > 0.0 ? (eval(plus) - eval(minus)) / spacing : 0.0;
    }
    return grad;
}

// ---------------------------------------------------------------------------

AdamSettings AdamSettings::pre(const GAdamConfig& c) {
    return {c.adam_lr, std::nullopt, c.adam_beta1, c.adam_beta2, c.adam_eps};
}

AdamSettings AdamSettings::final(const GAdamConfig& c) {
    return {c.adam_lr, c.adam_final_lr_min, c.adam_beta1, c.adam_beta2, c.adam_eps};
}

AdamResult adam_minimize(std::span<const double> theta0, int steps,
                         const AdamSettings& settings, const Objective& objective) {
    const std::size_t n = objective.dimension();
    std::vector<double> theta(theta0.begin(), theta0.end());
    AdamResult result;
    if (steps <= 0) {
        result.value = objective.value(theta);
        result.evaluations = 1;
        result.theta = std::move(theta);
        return result;
    }
    const long long per_gradient = 2 * static_cast<long long>(n) + 1;
    std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
    result.theta = theta;
    result.value = std::numeric_limits<double>::infinity();
    double b1t = 1.0;
    double b2t = 1.0;
    for (int t = 0; t < steps; ++t) {
        const double f = objective.value_and_gradient(theta, grad);
        result.evaluations += per_gradient;
        if (f < result.value) {
            result.value = f;
            result.theta = theta;
        }
        double lr = settings.lr;
        if (settings.lr_min) {
            const double frac = static_cast<double>(t) / steps;
            lr = *settings.lr_min +
                 0.5 * (settings.lr - *settings.lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
        }
        b1t *= settings.beta1;
        b2t *= settings.beta2;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = settings.beta1 * m[i] + (1.0 - settings.beta1) * grad[i];
            v[i] = settings.beta2 * v[i] + (1.0 - settings.beta2) * grad[i] * grad[i];
            const double mhat = m[i] / (1.0 - b1t);
            const double vhat = v[i] / (1.0 - b2t);
            theta[i] -= lr * mhat / (std::sqrt(vhat) + settings.eps);
        }
        objective.project(theta);
    }
    const double f = objective.value(theta);
    result.evaluations += 1;
    if (f < result.value) {
        result.value = f;
        result.theta = theta;
    }
    return result;
}

Individual adam_run(const Individual& ind, int steps, const AdamSettings& settings,
                    const SequenceLoss& objective, long long* evaluations) {
    if (steps <= 0) return ind;
    std::vector<double> theta = ind.seq.parameters();
    objective.project(theta);
    AdamResult r = adam_minimize(theta, steps, settings, objective);
    if (evaluations) *evaluations += r.evaluations;
    Individual out = ind;
    if (r.value <= ind.loss) {
        out.seq = PulseSequence::from_parameters(r.theta, ind.seq.depth(), ind.seq.revival_index);
        out.loss = r.value;
    }
    return out;
}

// ---------------------------------------------------------------------------

Individual optimize_single_layer(int target_photons, int revival_index, const JCParams& params,
                                 cplx alpha, const GAdamConfig& config, long long* evaluations) {
    config.validate();
    const Problem problem = Problem::make(target_photons, 1, revival_index, params, alpha, config);
    const SequenceLoss objective(problem, config.fd_step);
    const double t_rev = revival_time(target_photons, revival_index, params.omega);
    const AdamSettings settings = AdamSettings::final(config);

    std::vector<Individual> results(config.single_layer_restarts);
    std::vector<long long> counts(results.size(), 0);
    parallel_for(results.size(), config.workers, [&](std::size_t r) {
        Rng rng = make_stream(config.master_seed, {stream::kSingleLayer, r});
        std::uniform_real_distribution<double> spread(0.75, 1.25);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        Individual start;
        start.seq.taus = {std::max(t_rev * spread(rng), problem.tau_min)};
        const double re = 0.5 * gauss(rng);
        const double im = 0.5 * gauss(rng);
        start.seq.betas = {cplx(re, im)};
        start.seq.phi0 = 0.5 * angle(rng);
        start.seq.phi1 = angle(rng);
        start.seq.revival_index = revival_index;
        std::vector<double> theta = start.seq.parameters();
        problem.project(theta);
        start.seq = PulseSequence::from_parameters(theta, 1, revival_index);
        start.loss = objective.value(theta);
        start.rng_stream = derive_seed(config.master_seed, {stream::kSingleLayer, r});
        counts[r] = 1;
        results[r] = adam_run(start, config.single_layer_steps, settings, objective, &counts[r]);
    });
    if (evaluations) *evaluations += std::accumulate(counts.begin(), counts.end(), 0LL);
    const auto best = std::min_element(results.begin(), results.end(),
                                       [](const Individual& a, const Individual& b) {
                                           return a.loss < b.loss;
                                       });
    if (best->loss > 0.999) {
        throw NoConvergence("single-layer search ended at loss " + std::to_string(best->loss));
    }
    return *best;
}

double target_time(const Individual& single, int target_photons, int revival_index,
                   const JCParams& params, const GAdamConfig& config) {
    if (config.time_target == TimeTarget::revival_estimate) {
        return revival_time(target_photons, revival_index, params.omega);
    }
    return single.seq.taus.at(0);
}

std::vector<Individual> transfer_init(const Individual& single, int depth, double target_time,
                                      double tau_min, const GAdamConfig& config, Rng& rng) {
    if (depth < 1) throw ValidationError("depth must be >= 1");
    if (!(target_time > 0.0)) throw ValidationError("target time must be > 0");
    if (depth * tau_min > target_time) {
        throw InfeasiblePartition(std::to_string(depth) + " segments of at least " +
                                  std::to_string(tau_min) + " exceed target time " +
                                  std::to_string(target_time));
    }
    const auto p = static_cast<std::size_t>(depth);
    std::uniform_real_distribution<double> cut(0.0, target_time);
    std::vector<Individual> pop(config.population_size);
    std::vector<double> cuts(p - 1);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        std::vector<double> taus(p, target_time / depth);
        if (p > 1) {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                for (auto& c : cuts) c = cut(rng);
                std::sort(cuts.begin(), cuts.end());
                std::vector<double> segs(p);
                segs[0] = cuts[0];
                for (std::size_t k = 1; k + 1 < p; ++k) segs[k] = cuts[k] - cuts[k - 1];
                segs[p - 1] = target_time - cuts[p - 2];
                if (*std::min_element(segs.begin(), segs.end()) >= tau_min) {
                    taus = std::move(segs);
                    break;
                }
            }
        } else {
            taus[0] = target_time;
        }
        Individual& ind = pop[i];
        ind.seq.taus = std::move(taus);
        ind.seq.betas.assign(p, cplx(0.0));
        ind.seq.betas[p - 1] = single.seq.betas.at(0);
        ind.seq.phi0 = single.seq.phi0;
        ind.seq.phi1 = single.seq.phi1;
        ind.seq.revival_index = single.seq.revival_index;
        ind.loss = single.loss;
        ind.rng_stream = derive_seed(config.master_seed, {stream::kTransfer, i});
    }
    if (p == 1 && target_time == single.seq.taus.at(0)) {
        for (auto& ind : pop) ind.seq = single.seq;
    }
    return pop;
}

std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng) {
    if (pop.empty()) throw ValidationError("tournament over an empty population");
    if (k < 1) throw ValidationError("tournament size must be >= 1");
    const std::size_t n = pop.size();
    const std::size_t draws = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    // Partial Fisher-Yates over the index set.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t best = n;
    for (std::size_t j = 0; j < draws; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, n - 1);
        std::swap(idx[j], idx[pick(rng)]);
        const std::size_t c = idx[j];
        if (best == n || pop[c].fitness() > pop[best].fitness() ||
            (pop[c].fitness() == pop[best].fitness() && c < best)) {
            best = c;
        }
    }
    return best;
}

Individual uniform_crossover(const Individual& a, const Individual& b, double rate, Rng& rng) {
    if (a.seq.depth() != b.seq.depth()) {
        throw DepthMismatch("crossover between depths " + std::to_string(a.seq.depth()) +
                            " and " + std::to_string(b.seq.depth()));
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Individual child = a;
    for (int k = 0; k < a.seq.depth(); ++k) {
        if (coin(rng) < rate) child.seq.taus[k] = b.seq.taus[k];
        if (coin(rng) < rate) child.seq.betas[k] = b.seq.betas[k];
    }
    if (coin(rng) < rate) child.seq.phi0 = b.seq.phi0;
    if (coin(rng) < rate) child.seq.phi1 = b.seq.phi1;
    return child;
}

Individual gaussian_mutate(const Individual& ind, const MutationScales& scales,
                           const Problem& bounds, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Individual out = ind;
    for (int k = 0; k < out.seq.depth(); ++k) {
        out.seq.taus[k] += scales.sigma_tau * gauss(rng);
        const double re = scales.sigma_beta * gauss(rng);
        const double im = scales.sigma_beta * gauss(rng);
        out.seq.betas[k] += cplx(re, im);
    }
    out.seq.phi0 += scales.sigma_phi * gauss(rng);
    out.seq.phi1 += scales.sigma_phi * gauss(rng);
    std::vector<double> theta = out.seq.parameters();
    bounds.project(theta);
    out.seq = PulseSequence::from_parameters(theta, ind.seq.depth(), ind.seq.revival_index);
    return out;
}

RescaleResult rescale_total_time(const PulseSequence& seq, double target_time, double epsilon_t,
                                 double tau_min) {
    if (!(target_time > 0.0)) throw ValidationError("target time must be > 0");
    RescaleResult r{seq, false, false};
    const double total = seq.total_time();
    if (std::abs(total - target_time) / target_time <= epsilon_t) return r;
    const double s = target_time / total;
    for (double& tau : r.seq.taus) tau = std::max(tau * s, tau_min);
    r.rescaled = true;
    r.constraint_broken = std::abs(r.seq.total_time() - target_time) / target_time > epsilon_t;
    return r;
}

// ---------------------------------------------------------------------------

OptimizationTrace optimize(int target_photons, int depth, int revival_index,
                           const JCParams& params, cplx alpha, const GAdamConfig& config) {
    config.validate();
    long long evals = 0;
    const Individual single =
        optimize_single_layer(target_photons, revival_index, params, alpha, config, &evals);
    OptimizationTrace trace =
        optimize_from(single, target_photons, depth, revival_index, params, alpha, config);
    trace.evaluations += evals;
    return trace;
}

OptimizationTrace optimize_from(const Individual& single, int target_photons, int depth,
                                int revival_index, const JCParams& params, cplx alpha,
                                const GAdamConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const Problem problem =
        Problem::make(target_photons, depth, revival_index, params, alpha, config);
    const SequenceLoss objective(problem, config.fd_step);

    OptimizationTrace trace;
    trace.single_layer = single;
    trace.cutoff = problem.cutoff;
    trace.target_time = target_time(single, target_photons, revival_index, params, config);
    const MutationScales scales{config.resolved_sigma_tau(trace.target_time, depth),
                                config.mutation_sigma_beta, config.mutation_sigma_phi};

    Rng init_rng = make_stream(config.master_seed, {stream::kTransfer});
    std::vector<Individual> pop =
        transfer_init(single, depth, trace.target_time, problem.tau_min, config, init_rng);
    for (auto& ind : pop) {
        std::vector<double> theta = ind.seq.parameters();
        problem.project(theta);
        ind.seq = PulseSequence::from_parameters(theta, depth, revival_index);
        ind.loss = objective.value(theta);
        ++trace.evaluations;
    }

    auto by_loss = [](const Individual& a, const Individual& b) { return a.loss < b.loss; };
    const AdamSettings pre = AdamSettings::pre(config);
    const std::size_t n = pop.size();
    const auto elites = static_cast<std::size_t>(config.elites);
    std::vector<long long> counts(n);

    for (int gen = 0; gen < config.generations; ++gen) {
        std::fill(counts.begin(), counts.end(), 0);
        parallel_for(n, config.workers, [&](std::size_t i) {
            pop[i] = adam_run(pop[i], config.adam_pre_steps, pre, objective, &counts[i]);
        });
        trace.evaluations += std::accumulate(counts.begin(), counts.end(), 0LL);
        std::stable_sort(pop.begin(), pop.end(), by_loss);

        GenerationStats stats;
        stats.generation = gen + 1;
        stats.best_fitness = pop.front().fitness();
        double mean = 0.0;
        for (const auto& ind : pop) mean += ind.fitness();
        stats.mean_fitness = mean / static_cast<double>(n);
        trace.generations.push_back(stats);

        if (gen + 1 == config.generations) break;

        std::vector<Individual> next(n);
        std::copy_n(pop.begin(), elites, next.begin());
        std::vector<char> rescaled(n, 0), broken(n, 0);
        parallel_for(n - elites, config.workers, [&](std::size_t j) {
            const std::size_t slot = elites + j;
            const std::uint64_t id = derive_seed(
                config.master_seed, {stream::kOffspring, static_cast<std::uint64_t>(gen), slot});
            Rng rng(id);
            const std::size_t a = tournament_select(pop, config.tournament_size, rng);
            const std::size_t b = tournament_select(pop, config.tournament_size, rng);
            Individual child = uniform_crossover(pop[a], pop[b], config.crossover_rate, rng);
            child = gaussian_mutate(child, scales, problem, rng);
            RescaleResult rs =
                rescale_total_time(child.seq, trace.target_time, config.epsilon_t, problem.tau_min);
            rescaled[slot] = rs.rescaled;
            broken[slot] = rs.constraint_broken;
            child.seq = std::move(rs.seq);
            child.loss = objective.value(child.seq.parameters());
            child.rng_stream = id;
            next[slot] = std::move(child);
        });
        trace.evaluations += static_cast<long long>(n - elites);
        trace.rescaled_offspring += static_cast<int>(std::count(rescaled.begin(), rescaled.end(), 1));
        trace.broken_time_constraints += static_cast<int>(std::count(broken.begin(), broken.end(), 1));
        pop = std::move(next);
    }
    if (config.generations == 0) std::stable_sort(pop.begin(), pop.end(), by_loss);

    long long final_evals = 0;
    trace.best = adam_run(pop.front(), config.adam_final_steps, AdamSettings::final(config),
                          objective, &final_evals);
    trace.evaluations += final_evals;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

}  // namespace fockforge
