#include "fockforge/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fockforge/errors.hpp"

namespace fockforge {

namespace {

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

void check_target(int target_photons, FockCutoff cutoff) {
    if (target_photons < 0 || target_photons > cutoff.ncut()) {
        throw IndexOutOfRange("target photon number " + std::to_string(target_photons) +
                              " outside cutoff " + std::to_string(cutoff.ncut()));
    }
}

}  // namespace

std::array<cplx, 2> qubit_state(double phi0, double phi1) {
    return {cplx(std::cos(0.5 * phi0), 0.0), std::polar(std::sin(0.5 * phi0), phi1)};
}

double wrap_angle(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi, two_pi);
    if (w < 0.0) w += two_pi;
    return w >= two_pi ? 0.0 : w;
}

Eigen::VectorXcd project_qubit(const JointState& state, double phi0, double phi1) {
    const auto q = qubit_state(phi0, phi1);
    return std::conj(q[0]) * state.ground() + std::conj(q[1]) * state.excited();
}

ProjectionResult post_select(const JointState& state, double phi0, double phi1) {
    Eigen::VectorXcd b = project_qubit(state, phi0, phi1);
    const double prob = b.squaredNorm();
    if (prob < 1e-12) {
        throw ZeroProbability("qubit projection probability " + std::to_string(prob) +
                              " below 1e-12");
    }
    b /= std::sqrt(prob);
    return {CavityState{std::move(b), state.cutoff}, std::min(prob, 1.0)};
}

double loss_of_state(const JointState& state, int target_photons, double phi0, double phi1) {
    check_target(target_photons, state.cutoff);
    const auto q = qubit_state(phi0, phi1);
    const cplx overlap = std::conj(q[0]) * state.ground()[target_photons] +
                         std::conj(q[1]) * state.excited()[target_photons];
    return clamp_unit(1.0 - std::norm(overlap));
}

double loss(const PulseSequence& seq, int target_photons, const JCParams& params, cplx alpha,
            FockCutoff cutoff) {
    check_target(target_photons, cutoff);
    const auto out = apply_sequence(seq, initial_joint_state(alpha, cutoff), params);
    return loss_of_state(out.state, target_photons, seq.phi0, seq.phi1);
}

double loss(const PulseSequence& seq, int target_photons, const JCParams& params, cplx alpha) {
    return loss(seq, target_photons, params, alpha,
                default_cutoff(target_photons, seq.displacement_budget()));
}

double fidelity(const CavityDensityMatrix& rho, int target_photons) {
    check_target(target_photons, rho.cutoff);
    return clamp_unit(rho.elements(target_photons, target_photons).real());
}

QualityReport quality_of_state(const JointState& state, int target_photons, double phi0,
                               double phi1) {
    QualityReport report;
    report.loss = loss_of_state(state, target_photons, phi0, phi1);
    report.fidelity_traced = fidelity(partial_trace_qubit(state), target_photons);
    const Eigen::VectorXcd b = project_qubit(state, phi0, phi1);
    report.success_probability = clamp_unit(b.squaredNorm());
    report.fidelity_postselected =
        report.success_probability < 1e-12
            ? 0.0
            : clamp_unit(std::norm(b[target_photons]) / b.squaredNorm());
    return report;
}

QualityReport quality(const PulseSequence& seq, int target_photons, const JCParams& params,
                      cplx alpha, FockCutoff cutoff) {
    check_target(target_photons, cutoff);
    const auto out = apply_sequence(seq, initial_joint_state(alpha, cutoff), params);
    return quality_of_state(out.state, target_photons, seq.phi0, seq.phi1);
}

QualityReport quality(const PulseSequence& seq, int target_photons, const JCParams& params,
                      cplx alpha) {
    return quality(seq, target_photons, params, alpha,
                   default_cutoff(target_photons, seq.displacement_budget()));
}

}  // namespace fockforge
