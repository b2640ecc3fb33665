#include "qhe/dissipation.hpp"
#include "qhe/engines.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qhe;

namespace {

std::mt19937_64 rng(777);

DensityMatrix random_density(int d) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = complex(g(rng), g(rng));
    Matrix rho = m * m.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(Matrix(0.5 * (rho + rho.adjoint())));
}

Operator all_pairs_6() { return kron(qutrit_all_transitions(), Operator::identity(2)); }

}  // namespace

TEST(PlanckOccupation, Examples) {
    EXPECT_NEAR(planck_occupation(std::log(2.0), 1.0), 1.0, 1e-14);
    EXPECT_EQ(planck_occupation(1.0, 1e-6), 0.0);
    EXPECT_LT(planck_occupation(1.0, 0.01), 1e-40);
    // small-x series T/w - 1/2 + w/(12T) - w^3/(720 T^3)
    const double x = 0.01;
    const double series = 1.0 / x - 0.5 + x / 12.0 - x * x * x / 720.0;
    EXPECT_NEAR(planck_occupation(1.0, 100.0), series, 1e-9);
    EXPECT_NEAR(planck_occupation(1.0, 100.0), 99.500833, 1e-6);
}

TEST(PlanckOccupation, ClampAndErrors) {
    EXPECT_EQ(planck_occupation(701.0, 1.0), 0.0);
    EXPECT_GT(planck_occupation(699.0, 1.0), 0.0);
    EXPECT_THROW(planck_occupation(0.0, 1.0), std::domain_error);
    EXPECT_THROW(planck_occupation(-1.0, 1.0), std::domain_error);
    EXPECT_THROW(planck_occupation(1.0, 0.0), std::domain_error);
}

TEST(SpectralDensity, Ohmic) {
    EXPECT_DOUBLE_EQ(spectral_density(1.0, 1e-3), 1e-3);
    EXPECT_DOUBLE_EQ(spectral_density(1e-300, 1e-3), 1e-303);
    EXPECT_DOUBLE_EQ(spectral_density(6.0, 1e-3), 2.0 * spectral_density(3.0, 1e-3));
}

TEST(EigenoperatorDecomposition, QutritAllPairs) {
    const double A = 3.0;
    const auto comps = eigenoperator_decomposition(qutrit_hamiltonian(A), qutrit_all_transitions());
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_NEAR(comps[0].omega, A / 2.0, 1e-12);
    EXPECT_NEAR(comps[1].omega, A, 1e-12);
    // brute-force projector sums over the 3-level spectrum
    const Operator low = qutrit_transition(0, 1) + qutrit_transition(1, 2);
    EXPECT_LT(max_norm(comps[0].jump - low), 1e-14);
    EXPECT_LT(max_norm(comps[1].jump - qutrit_transition(0, 2)), 1e-14);
}

TEST(EigenoperatorDecomposition, CommutingCouplingHasNoTransitions) {
    EXPECT_TRUE(eigenoperator_decomposition(qutrit_hamiltonian(2.0), qutrit_hamiltonian(2.0)).empty());
    EXPECT_TRUE(eigenoperator_decomposition(qutrit_hamiltonian(2.0), Operator::identity(3)).empty());
}

TEST(EigenoperatorDecomposition, OutAndOutSimultaneousFrequencies) {
    const double A = 50.0, w = 10.0;
    const auto comps = eigenoperator_decomposition(total_hamiltonian(EngineKind::SimOut, A, w), all_pairs_6());
    std::vector<double> expected{(A - 2 * w) / 2, A / 2, (A + 2 * w) / 2, A - w, A + w};
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(comps.size(), expected.size());
    for (std::size_t i = 0; i < comps.size(); ++i) EXPECT_NEAR(comps[i].omega, expected[i], 1e-9);
}

TEST(EigenoperatorDecomposition, EigenoperatorIdentityLowersEnergy) {
    for (double w : {0.0, 3.0, 12.5, 25.0}) {
        const Operator h = total_hamiltonian(EngineKind::SimOut, 50.0, w);
        for (const auto& c : eigenoperator_decomposition(h, all_pairs_6())) {
            EXPECT_LT(max_norm(commutator(h, c.jump) + c.omega * c.jump), 1e-9);
        }
    }
}

TEST(EigenoperatorDecomposition, ComponentsSumToOffDiagonalCoupling) {
    // X = sum_w (A(w) + A(w)^dagger) when X has no zero-frequency part
    const Operator h = total_hamiltonian(EngineKind::SimFrag, 20.0, 3.0);
    const Operator x = kron(qutrit_pair_coupling(0, 2), Operator::identity(2));
    Operator sum = Operator::zero(6);
    for (const auto& c : eigenoperator_decomposition(h, x)) sum = sum + c.jump + c.jump.adjoint();
    EXPECT_LT(max_norm(sum - x), 1e-12);
}

TEST(EigenoperatorDecomposition, MergesDegenerateFrequencies) {
    // omega_sb = 0 collapses the five simultaneous frequencies onto {A/2, A}
    const auto comps = eigenoperator_decomposition(total_hamiltonian(EngineKind::SimOut, 10.0, 0.0), all_pairs_6());
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_NEAR(comps[0].omega, 5.0, 1e-12);
    EXPECT_NEAR(comps[1].omega, 10.0, 1e-12);
}

TEST(EigenoperatorDecomposition, RejectsNonHermitian) {
    EXPECT_THROW(eigenoperator_decomposition(Operator::outer(3, 0, 1), qutrit_all_transitions()), std::domain_error);
    EXPECT_THROW(eigenoperator_decomposition(qutrit_hamiltonian(1.0), Operator::identity(2)), std::domain_error);
}

TEST(BuildChannels, FragmentedSequential) {
    const double A = 7.0;
    const auto hot = build_channels(qutrit_hamiltonian(A), qutrit_pair_coupling(0, 2), {4.0, 1e-3, BathLabel::hot});
    ASSERT_EQ(hot.size(), 1u);
    EXPECT_NEAR(hot[0].omega, A, 1e-12);
    EXPECT_LT(max_norm(hot[0].jump - qutrit_transition(0, 2)), 1e-14);
    EXPECT_EQ(hot[0].bath, BathLabel::hot);

    const auto cold = build_channels(qutrit_hamiltonian(A), qutrit_pair_coupling(0, 1), {4.0, 1e-3, BathLabel::cold});
    ASSERT_EQ(cold.size(), 1u);
    EXPECT_NEAR(cold[0].omega, A / 2.0, 1e-12);
}

TEST(BuildChannels, RatesFollowDetailedBalance) {
    const double T = 3.0, kappa = 1e-3;
    for (const auto& ch : build_channels(total_hamiltonian(EngineKind::SimOut, 20.0, 4.0), all_pairs_6(),
                                         {T, kappa, BathLabel::hot})) {
        const double n = 1.0 / std::expm1(ch.omega / T);
        EXPECT_NEAR(ch.rate_down, kappa * ch.omega * (1.0 + n), 1e-15);
        EXPECT_NEAR(ch.rate_up, kappa * ch.omega * n, 1e-15);
        EXPECT_GT(ch.rate_down, ch.rate_up);
        EXPECT_NEAR(ch.rate_down / ch.rate_up, std::exp(ch.omega / T), 1e-9 * std::exp(ch.omega / T));
    }
}

TEST(BuildChannels, SimultaneousFragmentedHotFrequencies) {
    const double A = 50.0, w = 10.0;
    const auto ch = build_channels(total_hamiltonian(EngineKind::SimFrag, A, w),
                                   kron(qutrit_pair_coupling(0, 2), Operator::identity(2)), {20.0, 1e-3, BathLabel::hot});
    ASSERT_EQ(ch.size(), 3u);
    EXPECT_NEAR(ch[0].omega, A - w, 1e-9);
    EXPECT_NEAR(ch[1].omega, A, 1e-9);
    EXPECT_NEAR(ch[2].omega, A + w, 1e-9);
}

TEST(BuildChannels, InvalidBath) {
    EXPECT_THROW(build_channels(qutrit_hamiltonian(1.0), qutrit_all_transitions(), {0.0, 1e-3, BathLabel::hot}),
                 std::domain_error);
    EXPECT_THROW(build_channels(qutrit_hamiltonian(1.0), qutrit_all_transitions(), {1.0, -1e-3, BathLabel::hot}),
                 std::domain_error);
}

TEST(DissipatorApply, TracelessAndHermitian) {
    const auto ch = build_channels(total_hamiltonian(EngineKind::SimOut, 9.0, 2.0), all_pairs_6(),
                                   {2.5, 1e-3, BathLabel::cold});
    for (int trial = 0; trial < 20; ++trial) {
        const Operator l = dissipator_apply(random_density(6), ch);
        EXPECT_LT(std::abs(l.trace()), 1e-12);
        EXPECT_LT(l.hermiticity_residual(), 1e-12);
    }
}

TEST(DissipatorApply, VanishesOnGibbsState) {
    for (double T : {0.2, 1.0, 40.0}) {
        const Operator h = qutrit_hamiltonian(3.0);
        const auto ch = build_channels(h, qutrit_all_transitions(), {T, 1e-3, BathLabel::hot});
        EXPECT_LT(max_norm(dissipator_apply(thermal_state(h, T), ch)), 1e-10);
    }
}

TEST(DissipatorApply, PureDecayGain) {
    DissipationChannel ch{qutrit_transition(0, 2), 1.0, 0.37, 0.0, BathLabel::hot};
    const Operator l = dissipator_apply(DensityMatrix::basis_state(3, 2), {ch});
    EXPECT_NEAR(l(0, 0).real(), 0.37, 1e-15);
    EXPECT_NEAR(l(2, 2).real(), -0.37, 1e-15);
}

TEST(DissipatorApply, DimensionMismatch) {
    const auto ch = build_channels(qutrit_hamiltonian(1.0), qutrit_all_transitions(), {1.0, 1e-3, BathLabel::hot});
    EXPECT_THROW(dissipator_apply(DensityMatrix::maximally_mixed(2), ch), std::domain_error);
}
