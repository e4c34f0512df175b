#pragma once

// Truncated qubit-oscillator state space.
//
// Basis order is fixed library-wide: the joint amplitude vector holds the
// qubit |g> block first, then the |e> block, each indexed by Fock number
// 0..ncut.  Index of |q, n> is q * (ncut + 1) + n with q = 0 for g, 1 for e.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fockforge {

using cplx = std::complex<double>;

inline constexpr int kGuardBand = 5;
inline constexpr double kLeakageTolerance = 1e-6;

class FockCutoff {
public:
    explicit FockCutoff(int ncut);

    int ncut() const noexcept { return ncut_; }
    /// Dimension of the oscillator space.
    int dim() const noexcept { return ncut_ + 1; }
    /// Dimension of the qubit-oscillator space.
    int joint_dim() const noexcept { return 2 * (ncut_ + 1); }

    friend bool operator==(FockCutoff, FockCutoff) = default;

private:
    int ncut_;
};

/// Default cutoff for target photon number N: ceil(N + 8 sqrt(N) + 12),
/// enlarged by displacement_budget * (2 sqrt(ncut) + 1) where the budget is
/// the summed displacement magnitude a sequence may apply.
FockCutoff default_cutoff(int target_photons, double displacement_budget = 0.0);

/// Cutoff that keeps the truncated tail of a coherent seed below 1e-8.
FockCutoff coherent_cutoff(double mean_photons);

struct CavityState {
    Eigen::VectorXcd amplitudes;
    FockCutoff cutoff;

    double norm_squared() const { return amplitudes.squaredNorm(); }
    double mean_photon_number() const;
};

struct JointState {
    Eigen::VectorXcd amplitudes;
    FockCutoff cutoff;

    JointState(Eigen::VectorXcd amps, FockCutoff c);
    /// |q> (x) |psi> for qubit amplitudes (c_g, c_e).
    static JointState product(cplx c_g, cplx c_e, const CavityState& cavity);

    auto ground() { return amplitudes.head(cutoff.dim()); }
    auto ground() const { return amplitudes.head(cutoff.dim()); }
    auto excited() { return amplitudes.tail(cutoff.dim()); }
    auto excited() const { return amplitudes.tail(cutoff.dim()); }

    /// View as a dim x 2 matrix whose columns are the g and e blocks.
    Eigen::Map<Eigen::MatrixXcd> blocks() {
        return {amplitudes.data(), cutoff.dim(), 2};
    }
    Eigen::Map<const Eigen::MatrixXcd> blocks() const {
        return {amplitudes.data(), cutoff.dim(), 2};
    }

    double norm_squared() const { return amplitudes.squaredNorm(); }
    /// <sigma_z> with |e> as +1.
    double sigma_z() const;
    /// Population in the top `guard` Fock indices of both qubit blocks.
    double top_population(int guard = kGuardBand) const;
};

struct CavityDensityMatrix {
    Eigen::MatrixXcd elements;
    FockCutoff cutoff;

    double trace() const { return elements.trace().real(); }
    /// Largest |rho - rho^dagger| element.
    double hermiticity_error() const;
    double min_eigenvalue() const;
};

/// Tracks the worst guard-band population seen over a run.
struct LeakageMonitor {
    double max_top_population = 0.0;
    int guard = kGuardBand;

    void observe(const JointState& state);
    bool exceeded(double tolerance = kLeakageTolerance) const {
        return max_top_population > tolerance;
    }
};

/// Coherent state |alpha> renormalized over the truncated space.
/// Throws CutoffTooSmall when |alpha|^2 > ncut / 2.
CavityState coherent_state(cplx alpha, FockCutoff cutoff);

/// Throws IndexOutOfRange unless 0 <= n <= ncut.
CavityState fock_state(int n, FockCutoff cutoff);

/// |e> (x) |alpha>.
JointState initial_joint_state(cplx alpha, FockCutoff cutoff);

CavityDensityMatrix partial_trace_qubit(const JointState& state);

CavityDensityMatrix pure_density(const CavityState& state);

/// Diagonal of rho, P_n = rho_nn.
std::vector<double> number_distribution(const CavityDensityMatrix& rho);

}  // namespace fockforge
