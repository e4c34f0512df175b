#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fockforge/control.hpp"
#include "fockforge/dynamics.hpp"

namespace fockforge {

// ---------------------------------------------------------------------------
// Detuning

struct DetuningScan {
    std::vector<double> deltas;  // units of omega
    std::vector<double> fidelities;
    /// Half-maximum level F_min + (F_max - F_min) / 2 of the scanned window.
    double half_level = 0.0;
    std::optional<double> fwhm;
};

struct HalfWidth {
    double level = 0.0;
    std::optional<double> width;
};

/// Full width at half maximum of a sampled profile, with the level anchored
/// to the window's min and max.  Crossings on either side of the peak are
/// located by linear interpolation; absent unless both exist.
HalfWidth full_width_half_max(std::span<const double> xs, std::span<const double> ys);

/// Post-selected fidelity of a fixed sequence re-simulated at every detuning
/// delta * omega.  `deltas` must be sorted.
DetuningScan detuning_scan(const PulseSequence& seq, int target_photons, const JCParams& params,
                           cplx alpha, std::span<const double> deltas, FockCutoff cutoff,
                           int workers = 1);

// ---------------------------------------------------------------------------
// Control noise

struct NoiseModel {
    double sigma_tau = 0.0;
    double sigma_beta = 0.0;
    int realizations = 200;

    void validate() const;
};

struct NoiseEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Mean post-selected fidelity over realizations of
/// tau_k + xi_tau, beta_k + xi_beta (Re and Im independent).  Realization r
/// draws from stream (master_seed, r), so different noise scales share the
/// same underlying normal deviates.
NoiseEstimate noise_monte_carlo(const PulseSequence& seq, int target_photons,
                                const JCParams& params, cplx alpha, const NoiseModel& model,
                                std::uint64_t master_seed, FockCutoff cutoff, double tau_min,
                                int workers = 1);

struct NoiseGridPoint {
    double sigma_tau = 0.0;
    double sigma_beta = 0.0;
    NoiseEstimate estimate;
};

std::vector<NoiseGridPoint> noise_grid(const PulseSequence& seq, int target_photons,
                                       const JCParams& params, cplx alpha,
                                       std::span<const double> sigma_taus,
                                       std::span<const double> sigma_betas, int realizations,
                                       std::uint64_t master_seed, FockCutoff cutoff,
                                       double tau_min, int workers = 1);

// ---------------------------------------------------------------------------
// Open-system dynamics

enum class DissipatorConvention {
    /// D[o] rho = 2 o rho o^dag - o^dag o rho - rho o^dag o.
    standard,
    /// 2 o rho o^dag - o o^dag rho - rho o o^dag; not trace preserving.
    paper_literal,
};

std::string to_string(DissipatorConvention c);
DissipatorConvention dissipator_from_string(const std::string& s);

struct LindbladConfig {
    double kappa = 0.0;
    double gamma = 0.0;
    double dt = 0.005;
    DissipatorConvention convention = DissipatorConvention::standard;

    /// Throws ValidationError unless dt * max(kappa, gamma, omega) <= 0.05.
    void validate(double omega) const;
};

struct JointDensityMatrix {
    Eigen::MatrixXcd elements;
    FockCutoff cutoff;

    static JointDensityMatrix pure(const JointState& state);
    double trace() const { return elements.trace().real(); }
    double hermiticity_error() const;
    double min_population() const;
    CavityDensityMatrix reduced() const;
};

/// -i[H, rho] + (kappa/2) D[a] rho + (gamma/2) D[sigma_-] rho.  With
/// `coherent` false the Hamiltonian part is dropped.
JointDensityMatrix lindblad_rhs(const JointDensityMatrix& rho, const JCParams& params,
                                const LindbladConfig& config, bool coherent = true);

struct LindbladDiagnostics {
    double max_trace_drift = 0.0;
    double max_hermiticity_error = 0.0;
    double min_population = 0.0;
    long long steps = 0;
    bool trace_preserving = true;
};

/// Fixed-step RK4 over `duration`.  Throws TraceDrift under the standard
/// convention if |Tr rho - 1| exceeds 1e-4.
void lindblad_evolve(JointDensityMatrix& rho, double duration, const JCParams& params,
                     const LindbladConfig& config, LindbladDiagnostics& diag,
                     bool coherent = true);

struct LindbladOutcome {
    QualityReport quality;
    JointDensityMatrix final_state;
    LindbladDiagnostics diagnostics;
};

/// rho(0) = |e,alpha><e,alpha|; RK4 through each JC segment and exact
/// D rho D^dag for each displacement.
LindbladOutcome lindblad_propagate_sequence(const PulseSequence& seq, int target_photons,
                                            const JCParams& params, cplx alpha,
                                            const LindbladConfig& config, FockCutoff cutoff);

/// Loss and fidelities of a joint density matrix against |psi_q> (x) |N>.
QualityReport quality_of_density(const JointDensityMatrix& rho, int target_photons, double phi0,
                                 double phi1);

}  // namespace fockforge
