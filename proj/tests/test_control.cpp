#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fockforge/control.hpp"
#include "fockforge/errors.hpp"
#include "oracles.hpp"

using namespace fockforge;
using std::numbers::pi;

namespace {

PulseSequence random_sequence(int depth, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> tau(0.05, 6.0), b(-0.8, 0.8), ang(0.0, 2 * pi);
    PulseSequence s;
    for (int k = 0; k < depth; ++k) {
        s.taus.push_back(tau(rng));
        s.betas.emplace_back(b(rng), b(rng));
    }
    s.phi0 = ang(rng);
    s.phi1 = ang(rng);
    return s;
}

// |e,0> -> |g,1> by a resonant vacuum Rabi half-cycle.
PulseSequence perfect_one_photon() { return PulseSequence{{pi / 2}, {cplx(0, 0)}, 0.0, 0.0, 0}; }

}  // namespace

TEST(QubitState, Examples) {
    for (double phi1 : {0.0, 1.0, -3.0}) {
        const auto g = qubit_state(0.0, phi1);
        EXPECT_NEAR(std::abs(g[0] - cplx(1, 0)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(g[1]), 0.0, 1e-15);
    }
    const auto e = qubit_state(pi, 0.0);
    EXPECT_NEAR(std::abs(e[0]), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e[1] - cplx(1, 0)), 0.0, 1e-15);
    const auto plus = qubit_state(pi / 2, pi / 2);
    EXPECT_NEAR(std::abs(plus[0] - cplx(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(plus[1] - cplx(0, 1 / std::sqrt(2.0))), 0.0, 1e-15);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(-20, 20);
    for (int i = 0; i < 50; ++i) {
        const auto q = qubit_state(ang(rng), ang(rng));
        EXPECT_NEAR(std::norm(q[0]) + std::norm(q[1]), 1.0, 1e-15);
    }
}

TEST(WrapAngle, IntoZeroTwoPi) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.5), 0.5);
    EXPECT_NEAR(wrap_angle(-0.5), 2 * pi - 0.5, 1e-15);
    EXPECT_NEAR(wrap_angle(7 * pi), pi, 1e-12);
    EXPECT_GE(wrap_angle(-1e-18), 0.0);
    EXPECT_LT(wrap_angle(-1e-18), 2 * pi);
}

TEST(PostSelect, Examples) {
    const FockCutoff c(12);
    const auto psi = coherent_state(cplx(1.1, 0.4), c);
    const auto g_psi = JointState::product(cplx(1, 0), cplx(0, 0), psi);
    const auto r = post_select(g_psi, 0.0, 0.3);
    EXPECT_NEAR(r.probability, 1.0, 1e-12);
    EXPECT_LT((r.cavity.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(post_select(g_psi, pi, 0.0), ZeroProbability);

    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(c.joint_dim());
    a(0) = a(c.dim() + 1) = 1 / std::sqrt(2.0);
    const auto bell = post_select(JointState(a, c), 0.0, 0.0);
    EXPECT_NEAR(bell.probability, 0.5, 1e-15);
    EXPECT_NEAR(std::abs(bell.cavity.amplitudes(0)), 1.0, 1e-15);
}

TEST(PostSelect, OrthonormalBasisProbabilitiesSumToOne) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ang(0, 2 * pi);
    const FockCutoff c(10);
    for (int i = 0; i < 100; ++i) {
        const JointState s(oracle::random_unit(c.joint_dim(), rng), c);
        const double phi0 = ang(rng), phi1 = ang(rng);
        const double p = project_qubit(s, phi0, phi1).squaredNorm() +
                         project_qubit(s, phi0 + pi, phi1).squaredNorm();
        EXPECT_NEAR(p, 1.0, 1e-10);
    }
}

TEST(Loss, PerfectSequenceIsZero) {
    const auto seq = perfect_one_photon();
    EXPECT_NEAR(loss(seq, 1, JCParams{}, cplx(0, 0), FockCutoff(10)), 0.0, 1e-12);
    const auto q = quality(seq, 1, JCParams{}, cplx(0, 0), FockCutoff(10));
    EXPECT_NEAR(q.fidelity_traced, 1.0, 1e-12);
    EXPECT_NEAR(q.fidelity_postselected, 1.0, 1e-12);
    EXPECT_NEAR(q.success_probability, 1.0, 1e-12);
}

TEST(Loss, UntouchedCoherentState) {
    // tau = 0, beta = 0, phi0 = pi: overlap with |e, N> is the coherent amplitude.
    const PulseSequence seq{{0.0}, {cplx(0, 0)}, pi, 0.0, 0};
    const double l = loss(seq, 10, JCParams{}, cplx(std::sqrt(10.0), 0), FockCutoff(60));
    EXPECT_NEAR(l, 1.0 - 0.12511003572113330, 1e-9);
    const double l5 = loss(seq, 5, JCParams{}, cplx(std::sqrt(5.0), 0));
    EXPECT_NEAR(l5, 1.0 - 0.17546736976785071, 1e-9);
    const PulseSequence q{{0.0}, {cplx(0, 0)}, 1.1, 0.4, 0};
    EXPECT_NEAR(quality(q, 3, JCParams{}, cplx(1, 0), FockCutoff(30)).success_probability,
                std::pow(std::sin(0.55), 2), 1e-12);
}

TEST(Loss, ComplementsOverlapOnRandomInputs) {
    std::mt19937_64 rng(21);
    const JCParams p{1.0, 0.2};
    const cplx alpha(std::sqrt(5.0), 0);
    for (int i = 0; i < 20; ++i) {
        const auto seq = random_sequence(3, rng);
        const FockCutoff c = default_cutoff(5, seq.displacement_budget());
        const auto out = apply_sequence(seq, initial_joint_state(alpha, c), p);
        const auto qb = qubit_state(seq.phi0, seq.phi1);
        const cplx overlap =
            std::conj(qb[0]) * out.state.ground()(5) + std::conj(qb[1]) * out.state.excited()(5);
        const double l = loss(seq, 5, p, alpha, c);
        EXPECT_NEAR(l + std::norm(overlap), 1.0, 1e-12);
        EXPECT_GE(l, 0.0);
        EXPECT_LE(l, 1.0);
        const auto q = quality_of_state(out.state, 5, seq.phi0, seq.phi1);
        EXPECT_LE(1.0 - q.loss, q.success_probability + 1e-9);
        EXPECT_GE(q.fidelity_postselected + 1e-12, (1.0 - q.loss) / q.success_probability - 1e-12);
        for (double v : {q.loss, q.fidelity_traced, q.fidelity_postselected, q.success_probability}) {
            EXPECT_GE(v, -1e-9);
            EXPECT_LE(v, 1.0 + 1e-9);
        }
    }
}

TEST(Loss, GlobalPhaseInvariant) {
    std::mt19937_64 rng(22);
    const FockCutoff c(20);
    for (int i = 0; i < 20; ++i) {
        JointState s(oracle::random_unit(c.joint_dim(), rng), c);
        const double before = loss_of_state(s, 4, 0.7, 2.1);
        s.amplitudes *= std::polar(1.0, 0.37 * i);
        EXPECT_NEAR(loss_of_state(s, 4, 0.7, 2.1), before, 1e-14);
    }
}

TEST(Loss, TargetOutsideCutoff) {
    EXPECT_THROW(loss(perfect_one_photon(), 12, JCParams{}, cplx(0, 0), FockCutoff(10)),
                 IndexOutOfRange);
}

TEST(Fidelity, Examples) {
    const FockCutoff c(60);
    EXPECT_DOUBLE_EQ(fidelity(pure_density(fock_state(5, c)), 5), 1.0);
    EXPECT_DOUBLE_EQ(fidelity(pure_density(fock_state(6, c)), 5), 0.0);
    EXPECT_NEAR(fidelity(pure_density(coherent_state(cplx(std::sqrt(10.0), 0), c)), 10),
                0.12511003572113330, 1e-9);
    // |psi_q> (x) |N> traced over the qubit.
    const auto q = qubit_state(1.3, 0.2);
    const auto t = JointState::product(q[0], q[1], fock_state(7, c));
    EXPECT_NEAR(fidelity(partial_trace_qubit(t), 7), 1.0, 1e-12);
}
