#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fockforge/hilbert.hpp"

namespace fockforge {

/// H = -delta a^dag a + omega (a sigma_+ + a^dag sigma_-), hbar = 1.
struct JCParams {
    double omega = 1.0;
    double delta = 0.0;

    void validate() const;
};

/// Alternating JC evolutions U(tau_k) and displacements D(beta_k), followed by
/// the qubit projection basis (phi0, phi1).
struct PulseSequence {
    std::vector<double> taus;
    std::vector<cplx> betas;
    double phi0 = 0.0;
    double phi1 = 0.0;
    int revival_index = 0;

    int depth() const noexcept { return static_cast<int>(taus.size()); }
    /// 3p + 2.
    std::size_t parameter_count() const noexcept { return 3 * taus.size() + 2; }
    double total_time() const;
    /// Sum of |beta_k|.
    double displacement_budget() const;

    /// Flat layout (tau_1..tau_p, Re beta_1..p, Im beta_1..p, phi0, phi1).
    std::vector<double> parameters() const;
    static PulseSequence from_parameters(std::span<const double> theta, int depth,
                                         int revival_index = 0);

    /// Throws ValidationError on size mismatch, depth < 1 or tau < tau_min.
    void validate(double tau_min = 0.0) const;
};

/// exp(beta a^dag - beta^* a) cropped to the cutoff.
struct DisplacementMatrix {
    cplx beta;
    Eigen::MatrixXcd matrix;
    FockCutoff cutoff;
};

/// Spectral factorization of the truncated quadrature a + a^dag at a given
/// working dimension: a + a^dag = Q diag(lambda) Q^T with Q real orthogonal.
/// Every displacement at that dimension is
///   D(r e^{i theta}) = P Q diag(exp(-i r lambda)) Q^T P^dag,
///   P = diag(exp(i (theta + pi/2) n)),
/// which is the exact exponential of the truncated generator.
class DisplacementBasis {
public:
    explicit DisplacementBasis(int working_dim);

    /// Shared instance for a working dimension; safe to call concurrently.
    static std::shared_ptr<const DisplacementBasis> get(int working_dim);

    int dim() const noexcept { return static_cast<int>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// Working dimension used to build D(beta) for a cutoff: the generator is
/// exponentiated at ncut + 2 ceil(|beta| sqrt(ncut)) + 20 (rounded up to a
/// multiple of 16) and cropped.
int displacement_working_dim(cplx beta, FockCutoff cutoff);

DisplacementMatrix displacement_matrix(cplx beta, FockCutoff cutoff);

/// Applies D(beta) to each column of `columns` (dim x k) in place without
/// forming the dense matrix.
void apply_displacement(cplx beta, Eigen::Ref<Eigen::MatrixXcd> columns);

/// Applies I_qubit (x) D(beta).
void apply_displacement(cplx beta, JointState& state);

/// Exact JC evolution exp(-i H tau) applied blockwise in the invariant
/// subspaces {|e,n>, |g,n+1>}.  Throws NegativeDuration for tau < 0.
JointState jc_propagate(const JointState& state, double tau, const JCParams& params);
void jc_propagate_inplace(JointState& state, double tau, const JCParams& params);

/// Dense truncated Hamiltonian in the joint basis.
Eigen::MatrixXcd jc_hamiltonian(const JCParams& params, FockCutoff cutoff);

/// Dense exp(-i H tau) by scaling-and-squaring Pade; reference for tests.
Eigen::MatrixXcd jc_propagator_oracle(double tau, const JCParams& params, FockCutoff cutoff);

struct LayerDiagnostics {
    int layer = 0;  // 1-based
    std::vector<double> populations_after_jc;
    std::vector<double> populations_after_displacement;
    /// |rho_nm| of the reduced cavity state after U(tau_k).
    Eigen::MatrixXd magnitude;
    /// arg(rho_nm); NaN where |rho_nm| < 1e-4 max|rho|.
    Eigen::MatrixXd phase;
};

inline constexpr double kPhaseMapThreshold = 1e-4;

struct SequenceOutcome {
    JointState state;
    std::vector<LayerDiagnostics> layers;  // empty unless collected
    LeakageMonitor leakage;
};

/// prod_k D(beta_k) U(tau_k) |initial>, layers applied in order k = 1..p.
/// Throws LeakageExceeded when the guard band exceeds kLeakageTolerance and
/// `enforce_leakage` is set.
SequenceOutcome apply_sequence(const PulseSequence& seq, const JointState& initial,
                               const JCParams& params, bool collect = false,
                               bool enforce_leakage = true);

/// (2l + 1) pi sqrt(N) / omega.
double revival_time(int target_photons, int revival_index, double omega);

/// W(alpha) = (2/pi) Tr[D(-alpha) rho D(-alpha)^dag Pi], Pi = (-1)^{a^dag a}.
double wigner_value(const CavityDensityMatrix& rho, cplx alpha);

struct WignerGrid {
    std::vector<double> xs;
    std::vector<double> ps;
    /// values[i * ps.size() + j] = W(xs[i] + i ps[j]).
    std::vector<double> values;
};

/// Evaluates W over a square grid [lo, hi]^2 with the given step.
WignerGrid wigner_grid(const CavityDensityMatrix& rho, double lo, double hi, double step);

}  // namespace fockforge
