#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fockforge/control.hpp"
#include "fockforge/errors.hpp"
#include "fockforge/robustness.hpp"

using namespace fockforge;
using std::numbers::pi;

namespace {

const PulseSequence kPerfect{{pi / 2}, {cplx(0, 0)}, 0.0, 0.0, 0};

const PulseSequence kTwoLayer{{0.9, 1.4}, {cplx(0.3, -0.1), cplx(-0.2, 0.25)}, 1.2, 0.4, 0};

double photon_number(const JointDensityMatrix& rho) {
    const int d = rho.cutoff.dim();
    double n = 0.0;
    for (int q = 0; q < 2; ++q) {
        for (int k = 0; k < d; ++k) n += k * rho.elements(q * d + k, q * d + k).real();
    }
    return n;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> xs;
    const int n = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 0; i <= n; ++i) xs.push_back(lo + i * step);
    return xs;
}

}  // namespace

TEST(Fwhm, TriangularProfile) {
    const auto xs = grid(-1.0, 1.0, 0.05);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::max(0.0, 1.0 - std::abs(x) / 0.6));
    const auto hw = full_width_half_max(xs, ys);
    EXPECT_DOUBLE_EQ(hw.level, 0.5);
    ASSERT_TRUE(hw.width.has_value());
    EXPECT_NEAR(*hw.width, 0.6, 0.05);
    EXPECT_NEAR(*hw.width, 0.6, 1e-12);  // linear profile interpolates exactly

    // Off-grid crossings and an asymmetric peak.
    const auto xs2 = grid(-1.0, 1.0, 0.07);
    std::vector<double> ys2;
    for (double x : xs2) ys2.push_back(x < 0.1 ? std::max(0.0, 1 + (x - 0.1) / 0.4)
                                               : std::max(0.0, 1 - (x - 0.1) / 0.2));
    EXPECT_NEAR(*full_width_half_max(xs2, ys2).width, 0.3, 0.07);
}

TEST(Fwhm, AbsentWithoutBothCrossings) {
    const auto xs = grid(0.0, 1.0, 0.1);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(1.0 - x);
    EXPECT_FALSE(full_width_half_max(xs, ys).width.has_value());
    std::vector<double> flat(xs.size(), 0.8);
    EXPECT_FALSE(full_width_half_max(xs, flat).width.has_value());
}

TEST(DetuningScan, ZeroDetuningMatchesQuality) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, kTwoLayer.displacement_budget());
    const std::vector<double> deltas{-0.2, -0.1, 0.0, 0.1, 0.2};
    const auto scan = detuning_scan(kTwoLayer, 2, p, alpha, deltas, c);
    ASSERT_EQ(scan.fidelities.size(), deltas.size());
    EXPECT_NEAR(scan.fidelities[2], quality(kTwoLayer, 2, p, alpha, c).fidelity_postselected, 1e-9);
    for (double f : scan.fidelities) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0 + 1e-12);
    }
    const auto par = detuning_scan(kTwoLayer, 2, p, alpha, deltas, c, 4);
    EXPECT_EQ(par.fidelities, scan.fidelities);
    const std::vector<double> unsorted{0.1, 0.0};
    EXPECT_THROW(detuning_scan(kTwoLayer, 2, p, alpha, unsorted, c), ValidationError);
}

TEST(DetuningScan, SingleExcitationPostSelectionIsImmune) {
    // From |e,0> the dynamics stay in span{|e,0>, |g,1>}: projecting on |g> leaves |1>.
    const auto deltas = grid(-1.0, 1.0, 0.1);
    const auto scan = detuning_scan(kPerfect, 1, JCParams{}, cplx(0, 0), deltas, FockCutoff(12));
    for (double f : scan.fidelities) EXPECT_NEAR(f, 1.0, 1e-12);
    EXPECT_FALSE(scan.fwhm.has_value());
}

TEST(Noise, ZeroSigmaIsExact) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, 2.0);
    const auto est = noise_monte_carlo(kTwoLayer, 2, p, alpha, NoiseModel{0, 0, 17}, 5, c, 0.01);
    EXPECT_EQ(est.mean, quality(kTwoLayer, 2, p, alpha, c).fidelity_postselected);
    EXPECT_EQ(est.standard_error, 0.0);
}

TEST(Noise, ReproducibleAndWorkerIndependent) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, 3.0);
    const NoiseModel m{0.05, 0.05, 40};
    const auto a = noise_monte_carlo(kTwoLayer, 2, p, alpha, m, 77, c, 0.01);
    const auto b = noise_monte_carlo(kTwoLayer, 2, p, alpha, m, 77, c, 0.01);
    const auto par = noise_monte_carlo(kTwoLayer, 2, p, alpha, m, 77, c, 0.01, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.mean, par.mean);
    EXPECT_EQ(a.standard_error, par.standard_error);
    EXPECT_GT(a.standard_error, 0.0);
    const auto other = noise_monte_carlo(kTwoLayer, 2, p, alpha, m, 78, c, 0.01);
    EXPECT_NE(a.mean, other.mean);
}

TEST(Noise, ConvergesToNoiselessAsSigmaShrinks) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, 3.0);
    const double f0 = quality(kTwoLayer, 2, p, alpha, c).fidelity_postselected;
    double prev = 1.0;
    for (double s : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const auto e = noise_monte_carlo(kTwoLayer, 2, p, alpha, NoiseModel{s, s, 50}, 3, c, 0.01);
        const double gap = std::abs(e.mean - f0);
        EXPECT_LE(gap, prev + 1e-12);
        prev = gap;
    }
    EXPECT_LT(prev, 1e-5);
}

TEST(Noise, GridOrderAndTrendAtOptimum) {
    const std::vector<double> st{0.0, 0.05, 0.1, 0.2};
    const std::vector<double> sb{0.0, 0.05};
    const auto g = noise_grid(kPerfect, 1, JCParams{}, cplx(0, 0), st, sb, 200, 9, FockCutoff(12),
                              0.01);
    ASSERT_EQ(g.size(), 8u);
    EXPECT_EQ(g[1].sigma_tau, 0.0);
    EXPECT_EQ(g[1].sigma_beta, 0.05);
    EXPECT_EQ(g[2].sigma_tau, 0.05);
    EXPECT_NEAR(g[0].estimate.mean, 1.0, 1e-12);
    for (std::size_t j = 0; j < sb.size(); ++j) {
        for (std::size_t i = 1; i < st.size(); ++i) {
            const auto& lo = g[(i - 1) * sb.size() + j].estimate;
            const auto& hi = g[i * sb.size() + j].estimate;
            EXPECT_LE(hi.mean, lo.mean + 2 * std::hypot(lo.standard_error, hi.standard_error));
        }
    }
}

TEST(NoiseModel, Validation) {
    EXPECT_THROW((NoiseModel{-0.1, 0, 10}.validate()), ValidationError);
    EXPECT_THROW((NoiseModel{0, 0, 0}.validate()), ValidationError);
    EXPECT_NO_THROW((NoiseModel{0, 0, 1}.validate()));
}

TEST(LindbladConfig, StabilityGuard) {
    EXPECT_NO_THROW((LindbladConfig{0.1, 0.2, 0.005}.validate(1.0)));
    EXPECT_THROW((LindbladConfig{0.1, 0.2, 0.1}.validate(1.0)), ValidationError);
    EXPECT_THROW((LindbladConfig{20.0, 0.0, 0.005}.validate(1.0)), ValidationError);
    EXPECT_THROW((LindbladConfig{-1.0, 0.0, 0.005}.validate(1.0)), ValidationError);
    EXPECT_EQ(dissipator_from_string(to_string(DissipatorConvention::paper_literal)),
              DissipatorConvention::paper_literal);
}

TEST(LindbladRhs, CommutatorIsTraceless) {
    const FockCutoff c(15);
    const auto rho = JointDensityMatrix::pure(initial_joint_state(cplx(1.2, 0.3), c));
    const auto d = lindblad_rhs(rho, JCParams{1.0, 0.3}, LindbladConfig{});
    EXPECT_LT(std::abs(d.elements.trace()), 1e-12);
    EXPECT_LT((d.elements - d.elements.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LindbladRhs, CavityDecayLaw) {
    const FockCutoff c(50);
    const double kappa = 0.7;
    const auto rho = JointDensityMatrix::pure(
        JointState::product(cplx(1, 0), cplx(0, 0), coherent_state(cplx(2.0, 0.5), c)));
    const auto d = lindblad_rhs(rho, JCParams{}, LindbladConfig{kappa, 0.0, 0.005}, false);
    EXPECT_NEAR(photon_number(d), -kappa * photon_number(rho), 1e-8);
    EXPECT_LT(std::abs(d.elements.trace()), 1e-10);
}

TEST(LindbladRhs, PaperLiteralIsNotTracePreserving) {
    const FockCutoff c(50);
    const double kappa = 0.7;
    const auto rho = JointDensityMatrix::pure(
        JointState::product(cplx(1, 0), cplx(0, 0), coherent_state(cplx(2.0, 0.5), c)));
    const LindbladConfig lit{kappa, 0.0, 0.005, DissipatorConvention::paper_literal};
    const auto d = lindblad_rhs(rho, JCParams{}, lit, false);
    EXPECT_GT(std::abs(d.elements.trace()), 0.1 * kappa);

    const LindbladConfig run{0.05, 0.05, 0.005, DissipatorConvention::paper_literal};
    const auto out = lindblad_propagate_sequence(kPerfect, 1, JCParams{}, cplx(0, 0), run,
                                                 FockCutoff(10));
    EXPECT_FALSE(out.diagnostics.trace_preserving);
    EXPECT_GT(out.diagnostics.max_trace_drift, 1e-3);
}

TEST(Lindblad, ClosedSystemMatchesUnitary) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, kTwoLayer.displacement_budget());
    const auto out = lindblad_propagate_sequence(kTwoLayer, 2, p, alpha, LindbladConfig{}, c);
    const auto q = quality(kTwoLayer, 2, p, alpha, c);
    EXPECT_NEAR(out.quality.fidelity_traced, q.fidelity_traced, 1e-6);
    EXPECT_NEAR(out.quality.fidelity_postselected, q.fidelity_postselected, 1e-6);
    EXPECT_NEAR(out.quality.success_probability, q.success_probability, 1e-6);
    EXPECT_NEAR(out.quality.loss, q.loss, 1e-6);
    EXPECT_EQ(out.diagnostics.steps,
              static_cast<long long>(std::ceil(0.9 / 0.005)) + static_cast<long long>(std::ceil(1.4 / 0.005)));
}

TEST(Lindblad, PureCavityDecayOfCoherentState) {
    const FockCutoff c(50);
    auto rho = JointDensityMatrix::pure(initial_joint_state(cplx(std::sqrt(10.0), 0), c));
    LindbladDiagnostics diag;
    lindblad_evolve(rho, 0.1, JCParams{}, LindbladConfig{1.0, 0.0, 0.005}, diag, false);
    EXPECT_NEAR(photon_number(rho), 10.0 * std::exp(-0.1), 1e-4);
    EXPECT_EQ(diag.steps, 20);
}

TEST(Lindblad, InvariantsUnderStandardConvention) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, kTwoLayer.displacement_budget());
    const auto out =
        lindblad_propagate_sequence(kTwoLayer, 2, p, alpha, LindbladConfig{0.05, 0.1, 0.005}, c);
    EXPECT_TRUE(out.diagnostics.trace_preserving);
    EXPECT_LE(out.diagnostics.max_trace_drift, 1e-6);
    EXPECT_LE(out.diagnostics.max_hermiticity_error, 1e-8);
    EXPECT_GE(out.diagnostics.min_population, -1e-6);
    EXPECT_NEAR(out.final_state.trace(), 1.0, 1e-6);
    const auto red = out.final_state.reduced();
    EXPECT_NEAR(red.trace(), 1.0, 1e-6);
    for (double v : {out.quality.loss, out.quality.fidelity_traced,
                     out.quality.fidelity_postselected, out.quality.success_probability}) {
        EXPECT_GE(v, -1e-9);
        EXPECT_LE(v, 1.0 + 1e-9);
    }
}

TEST(Lindblad, StepHalvingConverges) {
    const JCParams p;
    const cplx alpha(std::sqrt(2.0), 0);
    const FockCutoff c = default_cutoff(2, kTwoLayer.displacement_budget());
    const auto coarse =
        lindblad_propagate_sequence(kTwoLayer, 2, p, alpha, LindbladConfig{0.05, 0.1, 0.005}, c);
    const auto fine =
        lindblad_propagate_sequence(kTwoLayer, 2, p, alpha, LindbladConfig{0.05, 0.1, 0.0025}, c);
    EXPECT_LE(std::abs(coarse.quality.fidelity_postselected - fine.quality.fidelity_postselected),
              1e-5);
    EXPECT_LE(std::abs(coarse.quality.fidelity_traced - fine.quality.fidelity_traced), 1e-5);
}

TEST(Lindblad, QualityOfPureDensityMatchesStateQuality) {
    const FockCutoff c(20);
    const auto out = apply_sequence(kTwoLayer, initial_joint_state(cplx(std::sqrt(2.0), 0), c),
                                    JCParams{});
    const auto a = quality_of_state(out.state, 2, kTwoLayer.phi0, kTwoLayer.phi1);
    const auto b = quality_of_density(JointDensityMatrix::pure(out.state), 2, kTwoLayer.phi0,
                                      kTwoLayer.phi1);
    EXPECT_NEAR(a.loss, b.loss, 1e-12);
    EXPECT_NEAR(a.fidelity_traced, b.fidelity_traced, 1e-12);
    EXPECT_NEAR(a.fidelity_postselected, b.fidelity_postselected, 1e-12);
    EXPECT_NEAR(a.success_probability, b.success_probability, 1e-12);
}
