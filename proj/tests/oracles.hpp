#pragma once

// Reference implementations that share no code with the library kernels.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cplx = std::complex<double>;

inline double poisson(double mean, int n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

/// Untruncated coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n <= ncut.
inline Eigen::VectorXcd coherent(cplx alpha, int ncut) {
    Eigen::VectorXcd c(ncut + 1);
    const double r = std::abs(alpha);
    const double th = std::arg(alpha);
    for (int n = 0; n <= ncut; ++n) {
        const double logmag =
            r == 0.0 ? (n == 0 ? 0.0 : -INFINITY)
                     : -0.5 * r * r + n * std::log(r) - 0.5 * std::lgamma(n + 1.0);
        c(n) = std::polar(std::exp(logmag), n * th);
    }
    return c;
}

/// Truncated JC Hamiltonian in (g block, e block) order.
inline Eigen::MatrixXcd jc_hamiltonian(double omega, double delta, int ncut) {
    const int d = ncut + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    for (int q = 0; q < 2; ++q) {
        for (int n = 0; n < d; ++n) h(q * d + n, q * d + n) = -delta * n;
    }
    // a sigma_+ : |g, n+1> -> sqrt(n+1) |e, n>
    for (int n = 0; n + 1 < d; ++n) {
        h(d + n, n + 1) = omega * std::sqrt(n + 1.0);
        h(n + 1, d + n) = omega * std::sqrt(n + 1.0);
    }
    return h;
}

/// exp(-i H tau) through the Hermitian eigendecomposition.
inline Eigen::MatrixXcd jc_unitary(double tau, double omega, double delta, int ncut) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(jc_hamiltonian(omega, delta, ncut));
    const Eigen::VectorXcd ph =
        (es.eigenvalues().cast<cplx>() * cplx(0.0, -tau)).array().exp().matrix();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// exp(beta a^dag - beta^* a) computed by Pade exponentiation at a much larger
/// dimension, cropped to ncut.
inline Eigen::MatrixXcd displacement(cplx beta, int ncut, int pad = 120) {
    const int m = ncut + 1 + pad;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
    for (int n = 0; n + 1 < m; ++n) {
        g(n + 1, n) = beta * std::sqrt(n + 1.0);
        g(n, n + 1) = -std::conj(beta) * std::sqrt(n + 1.0);
    }
    const Eigen::MatrixXcd full = g.exp();
    return full.topLeftCorner(ncut + 1, ncut + 1);
}

inline Eigen::VectorXcd random_unit(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cplx(nd(rng), nd(rng));
    return v.normalized();
}

}  // namespace oracle
