#include "fockforge/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fockforge/errors.hpp"
#include "fockforge/parallel.hpp"
#include "fockforge/rng.hpp"

namespace fockforge {

// ---------------------------------------------------------------------------
// Detuning

HalfWidth full_width_half_max(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw ValidationError("detuning profile needs matching, non-empty abscissae and values");
    }
    const auto [lo_it, hi_it] = std::minmax_element(ys.begin(), ys.end());
    HalfWidth out;
    out.level = *lo_it + 0.5 * (*hi_it - *lo_it);
    if (*hi_it == *lo_it) return out;

    const std::size_t peak = static_cast<std::size_t>(std::distance(ys.begin(), hi_it));
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double t = (ys[inside] - out.level) / (ys[inside] - ys[outside]);
        return xs[inside] + t * (xs[outside] - xs[inside]);
    };

    std::optional<double> left, right;
    for (std::size_t i = peak; i > 0; --i) {
        if (ys[i - 1] < out.level) {
            left = crossing(i, i - 1);
            break;
        }
    }
    for (std::size_t i = peak; i + 1 < ys.size(); ++i) {
        if (ys[i + 1] < out.level) {
            right = crossing(i, i + 1);
            break;
        }
    }
    if (left && right) out.width = *right - *left;
    return out;
}

DetuningScan detuning_scan(const PulseSequence& seq, int target_photons, const JCParams& params,
                           cplx alpha, std::span<const double> deltas, FockCutoff cutoff,
                           int workers) {
    if (deltas.empty()) throw ValidationError("detuning scan needs at least one delta");
    if (!std::is_sorted(deltas.begin(), deltas.end())) {
        throw ValidationError("detuning deltas must be sorted");
    }
    DetuningScan scan;
    scan.deltas.assign(deltas.begin(), deltas.end());
    scan.fidelities.assign(deltas.size(), 0.0);
    parallel_for(deltas.size(), workers, [&](std::size_t i) {
        JCParams p = params;
        p.delta = deltas[i] * params.omega;
        scan.fidelities[i] =
            quality(seq, target_photons, p, alpha, cutoff).fidelity_postselected;
    });
    const auto hw = full_width_half_max(scan.deltas, scan.fidelities);
    scan.half_level = hw.level;
    scan.fwhm = hw.width;
    return scan;
}

// ---------------------------------------------------------------------------
// Control noise

void NoiseModel::validate() const {
    if (!(sigma_tau >= 0.0)) throw ValidationError("noise.sigma_tau must be >= 0");
    if (!(sigma_beta >= 0.0)) throw ValidationError("noise.sigma_beta must be >= 0");
    if (realizations < 1) throw ValidationError("noise.realizations must be >= 1");
}

NoiseEstimate noise_monte_carlo(const PulseSequence& seq, int target_photons,
                                const JCParams& params, cplx alpha, const NoiseModel& model,
                                std::uint64_t master_seed, FockCutoff cutoff, double tau_min,
                                int workers) {
    model.validate();
    seq.validate(tau_min);
    const double reference = quality(seq, target_photons, params, alpha, cutoff)
                                 .fidelity_postselected;

    std::vector<double> samples(static_cast<std::size_t>(model.realizations));
    parallel_for(samples.size(), workers, [&](std::size_t r) {
        Rng rng = make_stream(master_seed, {stream::kNoise, r});
        std::normal_distribution<double> normal(0.0, 1.0);
        PulseSequence noisy = seq;
        for (int k = 0; k < seq.depth(); ++k) {
            const double z_tau = normal(rng);
            const double z_re = normal(rng);
            const double z_im = normal(rng);
            noisy.taus[k] = std::max(seq.taus[k] + model.sigma_tau * z_tau, tau_min);
            noisy.betas[k] = seq.betas[k] + model.sigma_beta * cplx(z_re, z_im);
        }
        samples[r] = quality(noisy, target_photons, params, alpha, cutoff).fidelity_postselected;
    });

    // Shifted accumulation: exact when every sample equals the reference.
    double shift = 0.0;
    for (double s : samples) shift += s - reference;
    NoiseEstimate est;
    const double n = static_cast<double>(samples.size());
    est.mean = reference + shift / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double s : samples) ss += (s - est.mean) * (s - est.mean);
        est.standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return est;
}

std::vector<NoiseGridPoint> noise_grid(const PulseSequence& seq, int target_photons,
                                       const JCParams& params, cplx alpha,
                                       std::span<const double> sigma_taus,
                                       std::span<const double> sigma_betas, int realizations,
                                       std::uint64_t master_seed, FockCutoff cutoff,
                                       double tau_min, int workers) {
    std::vector<NoiseGridPoint> grid;
    grid.reserve(sigma_taus.size() * sigma_betas.size());
    for (double st : sigma_taus) {
        for (double sb : sigma_betas) {
            NoiseModel model{st, sb, realizations};
            grid.push_back({st, sb,
                            noise_monte_carlo(seq, target_photons, params, alpha, model,
                                              master_seed, cutoff, tau_min, workers)});
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Open-system dynamics

std::string to_string(DissipatorConvention c) {
    return c == DissipatorConvention::standard ? "standard" : "paper_literal";
}

DissipatorConvention dissipator_from_string(const std::string& s) {
    if (s == "standard") return DissipatorConvention::standard;
    if (s == "paper_literal") return DissipatorConvention::paper_literal;
    throw ValidationError("unknown dissipator convention '" + s + "'");
}

void LindbladConfig::validate(double omega) const {
    if (!(kappa >= 0.0)) throw ValidationError("lindblad.kappa must be >= 0");
    if (!(gamma >= 0.0)) throw ValidationError("lindblad.gamma must be >= 0");
    if (!(dt > 0.0)) throw ValidationError("lindblad.dt must be > 0");
    const double rate = std::max({kappa, gamma, omega});
    if (dt * rate > 0.05) {
        throw ValidationError("lindblad.dt too large: dt * max(kappa, gamma, omega) = " +
                              std::to_string(dt * rate) + " > 0.05");
    }
}

JointDensityMatrix JointDensityMatrix::pure(const JointState& state) {
    return {state.amplitudes * state.amplitudes.adjoint(), state.cutoff};
}

double JointDensityMatrix::hermiticity_error() const {
    return (elements - elements.adjoint()).cwiseAbs().maxCoeff();
}

double JointDensityMatrix::min_population() const {
    return elements.diagonal().real().minCoeff();
}

CavityDensityMatrix JointDensityMatrix::reduced() const {
    const int d = cutoff.dim();
    return {elements.topLeftCorner(d, d) + elements.bottomRightCorner(d, d), cutoff};
}

namespace {

// -i (H rho - rho H) for H = -delta n + omega (a sigma_+ + a^dag sigma_-),
// without forming H.  H is real symmetric.
Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& rho, const JCParams& params, int d) {
    const int ncut = d - 1;
    const int dim = 2 * d;
    Eigen::MatrixXcd out(dim, dim);
    for (int j = 0; j < dim; ++j) {
        const double nj = j % d;
        for (int i = 0; i < dim; ++i) {
            const double ni = i % d;
            out(i, j) = (-params.delta * (ni - nj)) * rho(i, j);
        }
    }
    // Left action on rows.
    for (int n = 0; n < ncut; ++n) {
        const double g = params.omega * std::sqrt(n + 1.0);
        out.row(d + n) += g * rho.row(n + 1);
        out.row(n + 1) += g * rho.row(d + n);
    }
    // Right action on columns.
    for (int n = 0; n < ncut; ++n) {
        const double g = params.omega * std::sqrt(n + 1.0);
        out.col(n + 1) -= g * rho.col(d + n);
        out.col(d + n) -= g * rho.col(n + 1);
    }
    return cplx(0.0, -1.0) * out;
}

}  // namespace

JointDensityMatrix lindblad_rhs(const JointDensityMatrix& rho, const JCParams& params,
                                const LindbladConfig& config, bool coherent) {
    const int d = rho.cutoff.dim();
    const int ncut = rho.cutoff.ncut();
    const Eigen::MatrixXcd& r = rho.elements;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(r.rows(), r.cols());

    if (coherent) {
        out = commutator(r, params, d);
    }

    const bool standard = config.convention == DissipatorConvention::standard;

    if (config.kappa > 0.0) {
        const Eigen::ArrayXd s = Eigen::ArrayXd::LinSpaced(ncut, 1.0, ncut).sqrt();
        // Diagonal of a^dag a (standard) or a a^dag (literal), repeated per qubit level.
        Eigen::ArrayXd m(2 * d);
        for (int q = 0; q < 2; ++q) {
            for (int n = 0; n < d; ++n) {
                m(q * d + n) = standard ? n : (n < ncut ? n + 1.0 : 0.0);
            }
        }
        Eigen::MatrixXcd term(r.rows(), r.cols());
        for (int j = 0; j < 2 * d; ++j) {
            for (int i = 0; i < 2 * d; ++i) term(i, j) = -(m(i) + m(j)) * r(i, j);
        }
        for (int q = 0; q < 2; ++q) {
            for (int qq = 0; qq < 2; ++qq) {
                term.block(q * d, qq * d, ncut, ncut).array() +=
                    2.0 * (s.matrix() * s.matrix().transpose()).array() *
                    r.block(q * d + 1, qq * d + 1, ncut, ncut).array();
            }
        }
        out += (0.5 * config.kappa) * term;
    }

    if (config.gamma > 0.0) {
        // sigma_- = |g><e|.  Standard: sigma_+ sigma_- = |e><e|; literal: |g><g|.
        const int keep = standard ? 1 : 0;
        Eigen::MatrixXcd term = Eigen::MatrixXcd::Zero(r.rows(), r.cols());
        for (int q = 0; q < 2; ++q) {
            for (int qq = 0; qq < 2; ++qq) {
                const double w = (q == keep ? 1.0 : 0.0) + (qq == keep ? 1.0 : 0.0);
                if (w != 0.0) term.block(q * d, qq * d, d, d) = -w * r.block(q * d, qq * d, d, d);
            }
        }
        term.block(0, 0, d, d) += 2.0 * r.block(d, d, d, d);
        out += (0.5 * config.gamma) * term;
    }
    return {std::move(out), rho.cutoff};
}

void lindblad_evolve(JointDensityMatrix& rho, double duration, const JCParams& params,
                     const LindbladConfig& config, LindbladDiagnostics& diag, bool coherent) {
    if (duration < 0.0) throw NegativeDuration("lindblad duration must be >= 0");
    config.validate(params.omega);
    const bool standard = config.convention == DissipatorConvention::standard;
    diag.trace_preserving = diag.trace_preserving && standard;
    if (duration == 0.0) return;

    const long long nsteps = static_cast<long long>(std::ceil(duration / config.dt));
    const double h = duration / static_cast<double>(nsteps);
    auto f = [&](const Eigen::MatrixXcd& m) {
        return lindblad_rhs({m, rho.cutoff}, params, config, coherent).elements;
    };
    for (long long step = 0; step < nsteps; ++step) {
        const Eigen::MatrixXcd& r = rho.elements;
        const Eigen::MatrixXcd k1 = f(r);
        const Eigen::MatrixXcd k2 = f(r + (0.5 * h) * k1);
        const Eigen::MatrixXcd k3 = f(r + (0.5 * h) * k2);
        const Eigen::MatrixXcd k4 = f(r + h * k3);
        rho.elements += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++diag.steps;

        const double drift = std::abs(rho.trace() - 1.0);
        diag.max_trace_drift = std::max(diag.max_trace_drift, drift);
        if (standard && drift > 1e-4) {
            throw TraceDrift("trace drifted by " + std::to_string(drift) + " after " +
                             std::to_string(diag.steps) + " RK4 steps");
        }
    }
    diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, rho.hermiticity_error());
    diag.min_population = std::min(diag.min_population, rho.min_population());
}

QualityReport quality_of_density(const JointDensityMatrix& rho, int target_photons, double phi0,
                                 double phi1) {
    const int d = rho.cutoff.dim();
    if (target_photons < 0 || target_photons > rho.cutoff.ncut()) {
        throw IndexOutOfRange("target photon number " + std::to_string(target_photons) +
                              " outside cutoff " + std::to_string(rho.cutoff.ncut()));
    }
    const auto q = qubit_state(phi0, phi1);
    // <psi_q| rho |psi_q> as a cavity operator.
    Eigen::MatrixXcd projected = Eigen::MatrixXcd::Zero(d, d);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            projected += std::conj(q[a]) * q[b] * rho.elements.block(a * d, b * d, d, d);
        }
    }
    const double overlap = projected(target_photons, target_photons).real();
    const double prob = projected.trace().real();
    QualityReport report;
    report.loss = std::clamp(1.0 - overlap, 0.0, 1.0);
    report.fidelity_traced = fidelity(rho.reduced(), target_photons);
    report.success_probability = std::clamp(prob, 0.0, 1.0);
    if (prob < 1e-12) {
        throw ZeroProbability("qubit projection probability " + std::to_string(prob) +
                              " below 1e-12");
    }
    report.fidelity_postselected = std::clamp(overlap / prob, 0.0, 1.0);
    return report;
}

LindbladOutcome lindblad_propagate_sequence(const PulseSequence& seq, int target_photons,
                                            const JCParams& params, cplx alpha,
                                            const LindbladConfig& config, FockCutoff cutoff) {
    params.validate();
    seq.validate();
    config.validate(params.omega);

    JointDensityMatrix rho = JointDensityMatrix::pure(initial_joint_state(alpha, cutoff));
    LindbladDiagnostics diag;
    diag.min_population = rho.min_population();
    const int d = cutoff.dim();
    for (int k = 0; k < seq.depth(); ++k) {
        lindblad_evolve(rho, seq.taus[k], params, config, diag);
        if (seq.betas[k] != cplx(0.0, 0.0)) {
            const Eigen::MatrixXcd dm = displacement_matrix(seq.betas[k], cutoff).matrix;
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    auto blk = rho.elements.block(a * d, b * d, d, d);
                    blk = (dm * blk * dm.adjoint()).eval();
                }
            }
        }
    }
    LindbladOutcome out{quality_of_density(rho, target_photons, seq.phi0, seq.phi1), rho, diag};
    out.diagnostics.min_population = std::min(diag.min_population, rho.min_population());
    out.diagnostics.max_hermiticity_error =
        std::max(diag.max_hermiticity_error, rho.hermiticity_error());
    return out;
}

}  // namespace fockforge
