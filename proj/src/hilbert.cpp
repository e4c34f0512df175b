#include "fockforge/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fockforge/errors.hpp"

namespace fockforge {

FockCutoff::FockCutoff(int ncut) : ncut_(ncut) {
    if (ncut < 1) {
        throw CutoffTooSmall("Fock cutoff must be >= 1, got " + std::to_string(ncut));
    }
}

FockCutoff default_cutoff(int target_photons, double displacement_budget) {
    const double n = std::max(target_photons, 0);
    const int base = static_cast<int>(std::ceil(n + 8.0 * std::sqrt(n) + 12.0));
    const double extra =
        std::abs(displacement_budget) * (2.0 * std::sqrt(static_cast<double>(base)) + 1.0);
    return FockCutoff(base + static_cast<int>(std::ceil(extra)));
}

FockCutoff coherent_cutoff(double mean_photons) {
    const double m = std::max(mean_photons, 0.0);
    return FockCutoff(std::max(1, static_cast<int>(std::ceil(m + 8.0 * std::sqrt(m) + 10.0))));
}

double CavityState::mean_photon_number() const {
    double mean = 0.0;
    for (int n = 0; n < amplitudes.size(); ++n) mean += n * std::norm(amplitudes[n]);
    return mean / norm_squared();
}

JointState::JointState(Eigen::VectorXcd amps, FockCutoff c)
    : amplitudes(std::move(amps)), cutoff(c) {
    if (amplitudes.size() != cutoff.joint_dim()) {
        throw ValidationError("joint amplitude vector has length " +
                              std::to_string(amplitudes.size()) + ", expected " +
                              std::to_string(cutoff.joint_dim()));
    }
}

JointState JointState::product(cplx c_g, cplx c_e, const CavityState& cavity) {
    Eigen::VectorXcd amps(cavity.cutoff.joint_dim());
    amps.head(cavity.cutoff.dim()) = c_g * cavity.amplitudes;
    amps.tail(cavity.cutoff.dim()) = c_e * cavity.amplitudes;
    return {std::move(amps), cavity.cutoff};
}

double JointState::sigma_z() const {
    return excited().squaredNorm() - ground().squaredNorm();
}

double JointState::top_population(int guard) const {
    const int g = std::min(guard, cutoff.dim());
    return ground().tail(g).squaredNorm() + excited().tail(g).squaredNorm();
}

double CavityDensityMatrix::hermiticity_error() const {
    return (elements - elements.adjoint()).cwiseAbs().maxCoeff();
}

double CavityDensityMatrix::min_eigenvalue() const {
    const Eigen::MatrixXcd herm = 0.5 * (elements + elements.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void LeakageMonitor::observe(const JointState& state) {
    max_top_population = std::max(max_top_population, state.top_population(guard));
}

CavityState coherent_state(cplx alpha, FockCutoff cutoff) {
    const double mean = std::norm(alpha);
    if (mean > cutoff.ncut() / 2.0) {
        throw CutoffTooSmall("|alpha|^2 = " + std::to_string(mean) +
                             " exceeds ncut/2 for ncut = " + std::to_string(cutoff.ncut()));
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(cutoff.dim());
    if (mean == 0.0) {
        amps[0] = 1.0;
        return {std::move(amps), cutoff};
    }
    const double log_r = std::log(std::abs(alpha));
    const double theta = std::arg(alpha);
    for (int n = 0; n < cutoff.dim(); ++n) {
        const double log_mag = -0.5 * mean + n * log_r - 0.5 * std::lgamma(n + 1.0);
        amps[n] = std::polar(std::exp(log_mag), n * theta);
    }
    amps /= amps.norm();
    return {std::move(amps), cutoff};
}

CavityState fock_state(int n, FockCutoff cutoff) {
    if (n < 0 || n > cutoff.ncut()) {
        throw IndexOutOfRange("Fock index " + std::to_string(n) + " outside [0, " +
                              std::to_string(cutoff.ncut()) + "]");
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(cutoff.dim());
    amps[n] = 1.0;
    return {std::move(amps), cutoff};
}

JointState initial_joint_state(cplx alpha, FockCutoff cutoff) {
    return JointState::product(0.0, 1.0, coherent_state(alpha, cutoff));
}

CavityDensityMatrix partial_trace_qubit(const JointState& state) {
    const auto g = state.ground();
    const auto e = state.excited();
    Eigen::MatrixXcd rho = g * g.adjoint() + e * e.adjoint();
    return {std::move(rho), state.cutoff};
}

CavityDensityMatrix pure_density(const CavityState& state) {
    return {state.amplitudes * state.amplitudes.adjoint(), state.cutoff};
}

std::vector<double> number_distribution(const CavityDensityMatrix& rho) {
    std::vector<double> p(rho.cutoff.dim());
    for (int n = 0; n < rho.cutoff.dim(); ++n) p[n] = rho.elements(n, n).real();
    return p;
}

}  // namespace fockforge
