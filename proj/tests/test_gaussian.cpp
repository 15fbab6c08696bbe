#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cvqn/gaussian.hpp"
#include "oracles/williamson.hpp"

using namespace cvqn;

TEST(Entropy, VacuumIsZero) {
    EXPECT_EQ(g_entropy(1.0), 0.0);
    EXPECT_EQ(von_neumann_entropy(GaussianState::vacuum(3)), 0.0);
}

TEST(Entropy, KnownValue) {
    // 3 log2 3 - 2 log2 2
    EXPECT_NEAR(g_entropy(5.0), 2.7548875021634682, 1e-14);
}

TEST(Entropy, RoundingBelowOneIsClamped) {
    EXPECT_EQ(g_entropy(1.0 - 5e-10), 0.0);
    EXPECT_THROW(g_entropy(0.99), Error);
    try {
        g_entropy(0.5);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnphysicalEigenvalue);
    }
}

TEST(Entropy, IncreasingInLambda) {
    double prev = g_entropy(1.0);
    for (double l = 1.1; l < 100.0; l *= 1.3) {
        const double g = g_entropy(l);
        EXPECT_GT(g, prev);
        prev = g;
    }
}

TEST(Epr, Blocks) {
    const auto s = epr_state(5.93);
    const double c = 5.845074849820145;
    EXPECT_DOUBLE_EQ(s.cov()(0, 0), 5.93);
    EXPECT_DOUBLE_EQ(s.cov()(3, 3), 5.93);
    EXPECT_NEAR(s.cov()(0, 2), c, 1e-12);
    EXPECT_NEAR(s.cov()(1, 3), -c, 1e-12);
}

TEST(Epr, IsPure) {
    for (double v : {1.0, 1.5, 3.0, 5.93, 50.0}) {
        const auto spec = symplectic_eigenvalues(epr_state(v).cov());
        for (double nu : spec) EXPECT_NEAR(nu, 1.0, 1e-9);
        EXPECT_NEAR(von_neumann_entropy(epr_state(v)), 0.0, 1e-8);
    }
}

TEST(Epr, ReducedStateIsThermal) {
    const auto a = extract_modes(epr_state(3.0), {0});
    // sqrt(8) is the correlation of V = 3
    EXPECT_NEAR(epr_state(3.0).cov()(0, 2), 2.8284271247461903, 1e-14);
    EXPECT_NEAR(von_neumann_entropy(a), g_entropy(3.0), 1e-12);
}

TEST(Epr, RejectsSubVacuumVariance) {
    EXPECT_THROW(epr_state(0.9), Error);
    try {
        epr_state(0.9);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidVariance);
    }
}

TEST(SymplecticSpectrum, MatchesWilliamsonForm) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 7;
        const auto known = oracle::random_known_state(n, rng);
        const auto spec = symplectic_spectrum(known.cov);
        ASSERT_EQ(spec.values.size(), known.nu.size());
        for (int k = 0; k < n; ++k) EXPECT_NEAR(spec.values[k], known.nu[k], 1e-10 * known.nu[k]);
        EXPECT_LT(spec.pair_mismatch, kPairMismatchWarning);
    }
}

TEST(SymplecticSpectrum, InvariantUnderSymplecticMaps) {
    std::mt19937_64 rng(5);
    const auto known = oracle::random_known_state(4, rng);
    const auto s = oracle::random_symplectic(4, rng);
    ASSERT_TRUE(oracle::is_symplectic(s));
    const auto a = symplectic_eigenvalues(known.cov);
    const auto b = symplectic_eigenvalues(s * known.cov * s.transpose());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9 * a[k]);
}

TEST(SymplecticSpectrum, AllAtLeastOneForPhysicalStates) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto known = oracle::random_known_state(5, rng);
        for (double nu : symplectic_eigenvalues(known.cov)) EXPECT_GE(nu, 1.0 - 1e-9);
    }
}

TEST(GaussianState, RejectsAsymmetricAndUnphysical) {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = 0.1;
    EXPECT_THROW(GaussianState{m}, Error);
    EXPECT_THROW(GaussianState{0.5 * Matrix::Identity(2, 2)}, Error);
    try {
        GaussianState{0.5 * Matrix::Identity(2, 2)};
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidCovariance);
    }
}

TEST(ExtractModes, SelectsBlocksInOrder) {
    const auto joint = direct_sum(epr_state(2.0), GaussianState::thermal(std::vector<double>{7.0}));
    const auto sub = extract_modes(joint, {2, 0});
    EXPECT_DOUBLE_EQ(sub.cov()(0, 0), 7.0);
    EXPECT_DOUBLE_EQ(sub.cov()(2, 2), 2.0);
    EXPECT_DOUBLE_EQ(sub.cov()(0, 2), 0.0);
    EXPECT_THROW(extract_modes(joint, {3}), Error);
}

TEST(DirectSum, EntropyIsAdditive) {
    const auto a = GaussianState::thermal(std::vector<double>{3.0, 4.0});
    const auto b = extract_modes(epr_state(6.0), {1});
    EXPECT_NEAR(von_neumann_entropy(direct_sum(a, b)), von_neumann_entropy(a) + von_neumann_entropy(b), 1e-12);
}

TEST(Heterodyne, ConditioningEprGivesPureState) {
    // A - C (B + I)^-1 C^T = V - (V^2 - 1) / (V + 1) = 1
    const auto cond = condition_on_heterodyne(epr_state(5.0), {1});
    EXPECT_EQ(cond.n_modes(), 1);
    EXPECT_NEAR(cond.cov()(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(cond.cov()(1, 1), 1.0, 1e-12);
}

TEST(Heterodyne, UncorrelatedModeUnchanged) {
    const auto joint = direct_sum(GaussianState::thermal(std::vector<double>{4.0}), GaussianState::vacuum(1));
    const auto cond = condition_on_heterodyne(joint, {1});
    EXPECT_NEAR((cond.cov() - 4.0 * Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
    EXPECT_THROW(condition_on_heterodyne(joint, {2}), Error);
}

TEST(GaussianMap, LossyChannelOnVacuumStaysVacuum) {
    const double t = 0.3;
    Matrix s = std::sqrt(t) * Matrix::Identity(2, 2);
    Matrix y = (1.0 - t) * Matrix::Identity(2, 2);
    const auto out = apply_gaussian_map(GaussianState::vacuum(1), s, y, Vector::Zero(2));
    EXPECT_NEAR((out.cov() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(GaussianMap, NoiselessContractionIsUnphysical) {
    Matrix s = 0.5 * Matrix::Identity(2, 2);
    try {
        apply_gaussian_map(GaussianState::vacuum(1), s, Matrix::Zero(2, 2), Vector::Zero(2));
        FAIL() << "expected UnphysicalChannel";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnphysicalChannel);
    }
}

TEST(GaussianMap, DimensionMismatch) {
    EXPECT_THROW(apply_gaussian_map(GaussianState::vacuum(1), Matrix::Identity(4, 4), Matrix::Zero(4, 4),
                                    Vector::Zero(4)),
                 Error);
}

TEST(PhysicalityMargin, VacuumAndThermal) {
    EXPECT_NEAR(physicality_margin(Matrix::Identity(4, 4)), 1.0, 1e-12);
    EXPECT_NEAR(physicality_margin(3.0 * Matrix::Identity(2, 2)), 3.0, 1e-12);
    EXPECT_LT(physicality_margin(0.5 * Matrix::Identity(2, 2)), 1.0);
}
