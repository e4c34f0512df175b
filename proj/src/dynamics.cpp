#include "fockforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>

#include <unsupported/Eigen/MatrixFunctions>

#include "fockforge/errors.hpp"

namespace fockforge {

void JCParams::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ValidationError("coupling omega must be > 0");
    }
    if (!std::isfinite(delta)) throw ValidationError("detuning must be finite");
}

double PulseSequence::total_time() const {
    double t = 0.0;
    for (double tau : taus) t += tau;
    return t;
}

double PulseSequence::displacement_budget() const {
    double b = 0.0;
    for (cplx beta : betas) b += std::abs(beta);
    return b;
}

std::vector<double> PulseSequence::parameters() const {
    const std::size_t p = taus.size();
    std::vector<double> theta(3 * p + 2);
    for (std::size_t k = 0; k < p; ++k) {
        theta[k] = taus[k];
        theta[p + k] = betas[k].real();
        theta[2 * p + k] = betas[k].imag();
    }
    theta[3 * p] = phi0;
    theta[3 * p + 1] = phi1;
    return theta;
}

PulseSequence PulseSequence::from_parameters(std::span<const double> theta, int depth,
                                             int revival_index) {
    if (depth < 1) throw ValidationError("sequence depth must be >= 1");
    const auto p = static_cast<std::size_t>(depth);
    if (theta.size() != 3 * p + 2) {
        throw ValidationError("parameter vector has length " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(3 * p + 2));
    }
    PulseSequence seq;
    seq.taus.assign(theta.begin(), theta.begin() + depth);
    seq.betas.resize(p);
    for (std::size_t k = 0; k < p; ++k) seq.betas[k] = {theta[p + k], theta[2 * p + k]};
    seq.phi0 = theta[3 * p];
    seq.phi1 = theta[3 * p + 1];
    seq.revival_index = revival_index;
    return seq;
}

void PulseSequence::validate(double tau_min) const {
    if (taus.empty()) throw ValidationError("sequence depth must be >= 1");
    if (betas.size() != taus.size()) {
        throw ValidationError("sequence has " + std::to_string(taus.size()) + " durations but " +
                              std::to_string(betas.size()) + " displacements");
    }
    if (revival_index < 0) throw ValidationError("revival index must be >= 0");
    for (std::size_t k = 0; k < taus.size(); ++k) {
        if (!std::isfinite(taus[k])) throw ValidationError("non-finite pulse duration");
        if (taus[k] < 0.0) {
            throw NegativeDuration("pulse " + std::to_string(k + 1) + " has negative duration");
        }
        if (taus[k] < tau_min) {
            throw ValidationError("pulse " + std::to_string(k + 1) + " duration " +
                                  std::to_string(taus[k]) + " below tau_min " +
                                  std::to_string(tau_min));
        }
    }
}

// ---------------------------------------------------------------------------
// Displacement

DisplacementBasis::DisplacementBasis(int working_dim) {
    if (working_dim < 2) throw ValidationError("displacement working dimension must be >= 2");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(working_dim);
    Eigen::VectorXd sub(working_dim - 1);
    for (int n = 0; n + 1 < working_dim; ++n) sub[n] = std::sqrt(n + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

std::shared_ptr<const DisplacementBasis> DisplacementBasis::get(int working_dim) {
    thread_local std::unordered_map<int, std::shared_ptr<const DisplacementBasis>> local;
    if (auto it = local.find(working_dim); it != local.end()) return it->second;

    static std::mutex mutex;
    static std::unordered_map<int, std::shared_ptr<const DisplacementBasis>> shared;
    std::shared_ptr<const DisplacementBasis> basis;
    {
        std::lock_guard lock(mutex);
        auto& slot = shared[working_dim];
        if (!slot) slot = std::make_shared<const DisplacementBasis>(working_dim);
        basis = slot;
    }
    local.emplace(working_dim, basis);
    return basis;
}

int displacement_working_dim(cplx beta, FockCutoff cutoff) {
    const int ncut = cutoff.ncut();
    const int working_cutoff =
        ncut + 2 * static_cast<int>(std::ceil(std::abs(beta) * std::sqrt(double(ncut)))) + 20;
    const int dim = working_cutoff + 1;
    return (dim + 15) / 16 * 16;
}

DisplacementMatrix displacement_matrix(cplx beta, FockCutoff cutoff) {
    const int d = cutoff.dim();
    if (beta == cplx(0.0)) {
        return {beta, Eigen::MatrixXcd::Identity(d, d), cutoff};
    }
    const auto basis = DisplacementBasis::get(displacement_working_dim(beta, cutoff));
    const auto q = basis->eigenvectors().topRows(d);
    const double r = std::abs(beta);
    const double phase = std::arg(beta) + 0.5 * std::numbers::pi;

    Eigen::VectorXcd rot(basis->dim());
    for (int j = 0; j < basis->dim(); ++j) rot[j] = std::polar(1.0, -r * basis->eigenvalues()[j]);
    Eigen::MatrixXcd m = q.cast<cplx>() * rot.asDiagonal() * q.transpose().cast<cplx>();
    for (int col = 0; col < d; ++col) {
        for (int row = 0; row < d; ++row) m(row, col) *= std::polar(1.0, phase * (row - col));
    }
    return {beta, std::move(m), cutoff};
}

void apply_displacement(cplx beta, Eigen::Ref<Eigen::MatrixXcd> columns) {
    if (beta == cplx(0.0)) return;
    const int d = static_cast<int>(columns.rows());
    const int k = static_cast<int>(columns.cols());
    const auto basis = DisplacementBasis::get(displacement_working_dim(beta, FockCutoff(d - 1)));
    const int m = basis->dim();
    const auto q = basis->eigenvectors().topRows(d);
    const Eigen::VectorXd& lambda = basis->eigenvalues();
    const double r = std::abs(beta);
    const double phase = std::arg(beta) + 0.5 * std::numbers::pi;

    // Complex columns are split into (re, im) real column pairs so both
    // products are real GEMMs.
    thread_local Eigen::MatrixXd in, mid, out;
    thread_local Eigen::VectorXcd ramp;
    in.resize(d, 2 * k);
    ramp.resize(d);
    for (int n = 0; n < d; ++n) ramp[n] = std::polar(1.0, phase * n);
    for (int c = 0; c < k; ++c) {
        for (int n = 0; n < d; ++n) {
            const cplx z = columns(n, c) * std::conj(ramp[n]);
            in(n, 2 * c) = z.real();
            in(n, 2 * c + 1) = z.imag();
        }
    }
    mid.noalias() = q.transpose() * in;
    for (int j = 0; j < m; ++j) {
        const cplx rot = std::polar(1.0, -r * lambda[j]);
        for (int c = 0; c < k; ++c) {
            const cplx z = cplx(mid(j, 2 * c), mid(j, 2 * c + 1)) * rot;
            mid(j, 2 * c) = z.real();
            mid(j, 2 * c + 1) = z.imag();
        }
    }
    out.noalias() = q * mid;
    for (int c = 0; c < k; ++c) {
        for (int n = 0; n < d; ++n) columns(n, c) = ramp[n] * cplx(out(n, 2 * c), out(n, 2 * c + 1));
    }
}

void apply_displacement(cplx beta, JointState& state) {
    apply_displacement(beta, Eigen::Ref<Eigen::MatrixXcd>(state.blocks()));
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings evolution

void jc_propagate_inplace(JointState& state, double tau, const JCParams& params) {
    if (tau < 0.0) throw NegativeDuration("JC duration must be >= 0, got " + std::to_string(tau));
    if (tau == 0.0) return;
    const int ncut = state.cutoff.ncut();
    const int d = state.cutoff.dim();
    cplx* g = state.amplitudes.data();
    cplx* e = g + d;
    const double delta = params.delta;
    const double half = 0.5 * delta;
    const cplx i(0.0, 1.0);

    // |g,0> has zero energy.  Block {|e,n>, |g,n+1>} carries
    // H_n = -delta (n + 1/2) I + [[delta/2, w_n], [w_n, -delta/2]].
    for (int n = 0; n < ncut; ++n) {
        const double coupling = params.omega * std::sqrt(n + 1.0);
        const double rabi = std::sqrt(half * half + coupling * coupling);
        const double c = std::cos(rabi * tau);
        const double s = std::sin(rabi * tau) / rabi;
        const cplx a = e[n];
        const cplx b = g[n + 1];
        cplx ea = cplx(c, -s * half) * a - i * (s * coupling) * b;
        cplx gb = -i * (s * coupling) * a + cplx(c, s * half) * b;
        if (delta != 0.0) {
            const cplx ph = std::polar(1.0, delta * (n + 0.5) * tau);
            ea *= ph;
            gb *= ph;
        }
        e[n] = ea;
        g[n + 1] = gb;
    }
    // |e,ncut> couples only outside the truncated space.
    if (delta != 0.0) e[ncut] *= std::polar(1.0, delta * ncut * tau);
}

JointState jc_propagate(const JointState& state, double tau, const JCParams& params) {
    JointState out = state;
    jc_propagate_inplace(out, tau, params);
    return out;
}

Eigen::MatrixXcd jc_hamiltonian(const JCParams& params, FockCutoff cutoff) {
    const int d = cutoff.dim();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    for (int n = 0; n < d; ++n) {
        h(n, n) = -params.delta * n;
        h(d + n, d + n) = -params.delta * n;
    }
    // a sigma_+ : |g,n+1> -> sqrt(n+1) |e,n>
    for (int n = 0; n + 1 < d; ++n) {
        const double w = params.omega * std::sqrt(n + 1.0);
        h(d + n, n + 1) = w;
        h(n + 1, d + n) = w;
    }
    return h;
}

Eigen::MatrixXcd jc_propagator_oracle(double tau, const JCParams& params, FockCutoff cutoff) {
    if (tau < 0.0) throw NegativeDuration("JC duration must be >= 0");
    const int n = cutoff.joint_dim();
    if (tau == 0.0) return Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd generator = cplx(0.0, -tau) * jc_hamiltonian(params, cutoff);
    return generator.exp();
}

// ---------------------------------------------------------------------------
// Sequences

namespace {

LayerDiagnostics snapshot_after_jc(const JointState& state, int layer) {
    const CavityDensityMatrix rho = partial_trace_qubit(state);
    LayerDiagnostics diag;
    diag.layer = layer;
    diag.populations_after_jc = number_distribution(rho);
    diag.magnitude = rho.elements.cwiseAbs();
    const double cut = kPhaseMapThreshold * diag.magnitude.maxCoeff();
    const int d = state.cutoff.dim();
    diag.phase.resize(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            diag.phase(n, m) = diag.magnitude(n, m) < cut
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : std::arg(rho.elements(n, m));
        }
    }
    return diag;
}

}  // namespace

SequenceOutcome apply_sequence(const PulseSequence& seq, const JointState& initial,
                               const JCParams& params, bool collect, bool enforce_leakage) {
    seq.validate();
    SequenceOutcome out{initial, {}, {}};
    out.leakage.observe(out.state);
    for (int k = 0; k < seq.depth(); ++k) {
        jc_propagate_inplace(out.state, seq.taus[k], params);
        out.leakage.observe(out.state);
        if (collect) out.layers.push_back(snapshot_after_jc(out.state, k + 1));
        apply_displacement(seq.betas[k], out.state);
        out.leakage.observe(out.state);
        if (collect) {
            out.layers.back().populations_after_displacement =
                number_distribution(partial_trace_qubit(out.state));
        }
    }
    if (enforce_leakage && out.leakage.exceeded()) {
        throw LeakageExceeded(out.leakage.max_top_population, kLeakageTolerance);
    }
    return out;
}

double revival_time(int target_photons, int revival_index, double omega) {
    if (target_photons < 1) throw ValidationError("revival time needs N >= 1");
    if (revival_index < 0) throw ValidationError("revival index must be >= 0");
    if (!(omega > 0.0)) throw ValidationError("coupling omega must be > 0");
    return (2.0 * revival_index + 1.0) * std::numbers::pi * std::sqrt(double(target_photons)) /
           omega;
}

// ---------------------------------------------------------------------------
// Wigner function

namespace {

// rho = sum_k w_k |v_k><v_k| embedded in a cutoff large enough to hold every
// displacement up to `max_shift`.
struct WignerKernel {
    Eigen::VectorXd weights;
    Eigen::MatrixXcd vectors;

    WignerKernel(const CavityDensityMatrix& rho, double max_shift) {
        const Eigen::MatrixXcd herm = 0.5 * (rho.elements + rho.elements.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
        const double radius = std::sqrt(double(rho.cutoff.ncut())) + max_shift;
        const int big =
            std::max(rho.cutoff.ncut(), static_cast<int>(std::ceil(radius * radius + 8.0 * radius + 20.0)));
        std::vector<int> keep;
        const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();
        for (int k = 0; k < solver.eigenvalues().size(); ++k) {
            if (std::abs(solver.eigenvalues()[k]) > 1e-14 * scale) keep.push_back(k);
        }
        weights.resize(static_cast<int>(keep.size()));
        vectors = Eigen::MatrixXcd::Zero(big + 1, static_cast<int>(keep.size()));
        for (int j = 0; j < static_cast<int>(keep.size()); ++j) {
            weights[j] = solver.eigenvalues()[keep[j]];
            vectors.col(j).head(rho.cutoff.dim()) = solver.eigenvectors().col(keep[j]);
        }
    }

    double operator()(cplx alpha) const {
        Eigen::MatrixXcd shifted = vectors;
        apply_displacement(-alpha, shifted);
        double w = 0.0;
        for (int k = 0; k < shifted.cols(); ++k) {
            double parity = 0.0;
            for (int n = 0; n < shifted.rows(); ++n) {
                parity += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(shifted(n, k));
            }
            w += weights[k] * parity;
        }
        return 2.0 / std::numbers::pi * w;
    }
};

}  // namespace

double wigner_value(const CavityDensityMatrix& rho, cplx alpha) {
    return WignerKernel(rho, std::abs(alpha))(alpha);
}

WignerGrid wigner_grid(const CavityDensityMatrix& rho, double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("invalid Wigner grid");
    WignerGrid grid;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) grid.xs.push_back(lo + i * step);
    grid.ps = grid.xs;
    const double reach = std::max(std::abs(lo), std::abs(hi)) * std::sqrt(2.0);
    const WignerKernel kernel(rho, reach);
    grid.values.resize(grid.xs.size() * grid.ps.size());
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        for (std::size_t j = 0; j < grid.ps.size(); ++j) {
            grid.values[i * grid.ps.size() + j] = kernel(cplx(grid.xs[i], grid.ps[j]));
        }
    }
    return grid;
}

}  // namespace fockforge
