#pragma once

#include <array>

#include "fockforge/dynamics.hpp"
#include "fockforge/hilbert.hpp"

namespace fockforge {

/// cos(phi0/2)|g> + sin(phi0/2) e^{i phi1} |e>, in (g, e) order.
std::array<cplx, 2> qubit_state(double phi0, double phi1);

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double phi);

struct ProjectionResult {
    CavityState cavity;  // normalized
    double probability = 0.0;
};

/// Projects the qubit onto qubit_state(phi0, phi1).
/// Throws ZeroProbability when the projection weight is below 1e-12.
ProjectionResult post_select(const JointState& state, double phi0, double phi1);

/// Unnormalized projected cavity amplitudes <psi_q| state.
Eigen::VectorXcd project_qubit(const JointState& state, double phi0, double phi1);

/// 1 - |<psi_q(phi) (x) N | state>|^2.
double loss_of_state(const JointState& state, int target_photons, double phi0, double phi1);

/// Loss of a sequence run from |e, alpha> at an explicit cutoff.
double loss(const PulseSequence& seq, int target_photons, const JCParams& params, cplx alpha,
            FockCutoff cutoff);
/// Same, at default_cutoff(N, seq.displacement_budget()).
double loss(const PulseSequence& seq, int target_photons, const JCParams& params, cplx alpha);

/// <N|rho|N>; the Uhlmann-Jozsa fidelity against a pure Fock target.
double fidelity(const CavityDensityMatrix& rho, int target_photons);

struct QualityReport {
    double loss = 1.0;
    double fidelity_traced = 0.0;
    double fidelity_postselected = 0.0;
    double success_probability = 0.0;
};

/// Quality of an already propagated joint state.
QualityReport quality_of_state(const JointState& state, int target_photons, double phi0,
                               double phi1);

QualityReport quality(const PulseSequence& seq, int target_photons, const JCParams& params,
                      cplx alpha, FockCutoff cutoff);
QualityReport quality(const PulseSequence& seq, int target_photons, const JCParams& params,
                      cplx alpha);

}  // namespace fockforge
