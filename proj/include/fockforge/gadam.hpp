#pragma once

// Hybrid genetic / Adam search over multi-pulse JC-displacement sequences.
//
//   1. Transfer initialization from an optimized single-layer solution.
//   2. G generations of: Adam pre-optimization of every individual (the
//      result replaces the individual), fitness evaluation, top-E elitism,
//      tournament -> uniform crossover -> Gaussian mutation -> soft total-time
//      rescale for the remaining slots.
//   3. Long Adam refinement of the best individual with cosine learning-rate
//      decay.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fockforge/control.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/rng.hpp"

namespace fockforge {

enum class TimeTarget { single_layer_optimum, revival_estimate };

std::string to_string(TimeTarget t);
TimeTarget time_target_from_string(const std::string& s);

struct GAdamConfig {
    int population_size = 32;
    int generations = 40;
    int elites = 4;
    int tournament_size = 3;
    double crossover_rate = 0.5;
    /// Defaults to 0.02 T_tar / p.
    std::optional<double> mutation_sigma_tau;
    double mutation_sigma_beta = 0.1;
    double mutation_sigma_phi = 0.1;
    double epsilon_t = 0.05;
    /// In units of 1/omega; the absolute bound is tau_min / omega.
    double tau_min = 0.01;
    /// Defaults to 2 sqrt(N).
    std::optional<double> beta_max;
    int adam_pre_steps = 30;
    int adam_final_steps = 2000;
    double adam_lr = 0.01;
    double adam_final_lr_min = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double fd_step = 1e-5;
    std::uint64_t master_seed = 0;
    TimeTarget time_target = TimeTarget::single_layer_optimum;
    int single_layer_restarts = 64;
    int single_layer_steps = 600;
    /// Displacement budget used to size the Fock cutoff for a whole run.
    double cutoff_budget = 2.0;
    int workers = 1;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    double resolved_beta_max(int target_photons) const;
    double resolved_tau_min(double omega) const { return tau_min / omega; }
    double resolved_sigma_tau(double target_time, int depth) const;
};

/// Fixed physical problem that a population is optimized against.
struct Problem {
    int target_photons = 1;
    int depth = 1;
    int revival_index = 0;
    JCParams params;
    cplx alpha;
    FockCutoff cutoff{1};
    double tau_min = 0.0;
    double beta_max = 1e300;

    static Problem make(int target_photons, int depth, int revival_index, const JCParams& params,
                        cplx alpha, const GAdamConfig& config);

    /// Clamps tau_k >= tau_min and |beta_k| <= beta_max.
    void project(std::span<double> theta) const;
    bool within_bounds(std::span<const double> theta) const;
};

/// Differentiable scalar objective over a flat parameter vector.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::size_t dimension() const = 0;
    virtual double value(std::span<const double> theta) const = 0;
    /// Returns value(theta) and fills grad.
    virtual double value_and_gradient(std::span<const double> theta,
                                      std::span<double> grad) const = 0;
    virtual void project(std::span<double>) const {}
};

/// Proxy loss of a Problem.  Gradients are central finite differences that
/// reuse the propagated prefix of the sequence for every perturbed layer.
/// Evaluations whose guard-band population exceeds the leakage tolerance
/// score as loss 1.
class SequenceLoss final : public Objective {
public:
    SequenceLoss(Problem problem, double fd_step);

    std::size_t dimension() const override { return 3 * problem_.depth + 2; }
    double value(std::span<const double> theta) const override;
    double value_and_gradient(std::span<const double> theta,
                              std::span<double> grad) const override;
    void project(std::span<double> theta) const override { problem_.project(theta); }

    const Problem& problem() const noexcept { return problem_; }
    double fd_step() const noexcept { return fd_step_; }

private:
    Problem problem_;
    double fd_step_;
    JointState initial_;
};

/// Central-difference gradient over all 3p+2 coordinates, recomputing every
/// perturbed sequence from scratch through `loss`.  Tau coordinates are
/// clamped to tau_min and the quotient uses the clamped spacing.
std::vector<double> gradient(const PulseSequence& seq, int target_photons,
                             const JCParams& params, cplx alpha, FockCutoff cutoff,
                             double fd_step, double tau_min = 0.0);

struct Individual {
    PulseSequence seq;
    double loss = 1.0;
    std::uint64_t rng_stream = 0;

    double fitness() const noexcept { return 1.0 - loss; }
};

struct AdamSettings {
    double lr = 0.01;
    /// Cosine decay from lr to lr_min over the run when set.
    std::optional<double> lr_min;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamSettings pre(const GAdamConfig& c);
    static AdamSettings final(const GAdamConfig& c);
};

struct AdamResult {
    std::vector<double> theta;  // best-seen iterate
    double value = 0.0;
    long long evaluations = 0;
};

/// Adam with bound projection after every step; returns the best iterate
/// seen, including the starting point.
AdamResult adam_minimize(std::span<const double> theta0, int steps,
                         const AdamSettings& settings, const Objective& objective);

Individual adam_run(const Individual& ind, int steps, const AdamSettings& settings,
                    const SequenceLoss& objective, long long* evaluations = nullptr);

/// Multi-start Adam over (tau_1, Re beta_1, Im beta_1, phi0, phi1) with tau_1
/// drawn near revival_time(N, l).  Throws NoConvergence if the best loss is
/// above 0.999.
Individual optimize_single_layer(int target_photons, int revival_index, const JCParams& params,
                                 cplx alpha, const GAdamConfig& config,
                                 long long* evaluations = nullptr);

/// Total JC time the multi-layer search holds the sequence to.
double target_time(const Individual& single, int target_photons, int revival_index,
                   const JCParams& params, const GAdamConfig& config);

/// population_size candidates that partition target_time into `depth`
/// segments >= tau_min, zero intermediate displacements, and the
/// single-layer beta and qubit basis inherited.
std::vector<Individual> transfer_init(const Individual& single, int depth, double target_time,
                                      double tau_min, const GAdamConfig& config, Rng& rng);

/// Index of the fittest of k distinct uniformly drawn members; ties go to the
/// lowest index.
std::size_t tournament_select(std::span<const Individual> pop, int k, Rng& rng);

Individual uniform_crossover(const Individual& a, const Individual& b, double rate, Rng& rng);

struct MutationScales {
    double sigma_tau = 0.0;
    double sigma_beta = 0.0;
    double sigma_phi = 0.0;
};

Individual gaussian_mutate(const Individual& ind, const MutationScales& scales,
                           const Problem& bounds, Rng& rng);

struct RescaleResult {
    PulseSequence seq;
    bool rescaled = false;
    /// tau_min projection pushed the total back outside the tolerance.
    bool constraint_broken = false;
};

/// Proportional rescale to target_time when the relative deviation exceeds
/// epsilon_t, followed by a single tau_min projection.
RescaleResult rescale_total_time(const PulseSequence& seq, double target_time, double epsilon_t,
                                 double tau_min = 0.0);

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
};

struct OptimizationTrace {
    Individual single_layer;
    double target_time = 0.0;
    FockCutoff cutoff{1};
    std::vector<GenerationStats> generations;
    long long evaluations = 0;
    int rescaled_offspring = 0;
    int broken_time_constraints = 0;
    double wall_seconds = 0.0;
    Individual best;
};

OptimizationTrace optimize(int target_photons, int depth, int revival_index,
                           const JCParams& params, cplx alpha, const GAdamConfig& config);

/// Same, seeded with an already optimized single-layer individual.
OptimizationTrace optimize_from(const Individual& single, int target_photons, int depth,
                                int revival_index, const JCParams& params, cplx alpha,
                                const GAdamConfig& config);

}  // namespace fockforge
