#include <gtest/gtest.h>

#include <iodyn/equilibrium.hpp>

#include <cmath>

using namespace iodyn;

TEST(Equilibrium, PlainIsUniform) {
    for (int n : {2, 10, 64}) {
        const auto eq = solve_equilibrium(build_plain_network(n), ModelParams{});
        EXPECT_NEAR(eq.h_eq, 0.45 * n, 1e-12);
        for (int i = 0; i < n; ++i) {
            EXPECT_NEAR(eq.V_eq[i], 1.0, 1e-12);
            EXPECT_NEAR(eq.S_eq[i], 1.0 / n, 1e-12);
            EXPECT_NEAR(eq.p_eq[i], eq.p_eq[0], 1e-12);
            EXPECT_NEAR(eq.x_eq[i], eq.x_eq[0], 1e-12);
        }
    }
}

TEST(Equilibrium, SingleFirmScalarSolution) {
    // (1 - b(1-a)) log p = ab log h with V = 1, h = ab.
    const auto eq = solve_equilibrium(build_plain_network(1), ModelParams{});
    EXPECT_NEAR(eq.V_eq[0], 1.0, 1e-14);
    EXPECT_NEAR(eq.h_eq, 0.45, 1e-14);
    const double log_p = 0.45 * std::log(0.45) / 0.55;
    EXPECT_NEAR(std::log(eq.p_eq[0]), log_p, 1e-12);
    EXPECT_NEAR(eq.x_eq[0], 1.0 / std::exp(log_p), 1e-12);
}

TEST(Equilibrium, InvariantsOnRandomNetworks) {
    ModelParams p;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto net = build_random_exponential_network(25, seed);
        const auto eq = solve_equilibrium(net, p);
        EXPECT_LT(equilibrium_residual(net, p, eq.V_eq), 1e-10);
        EXPECT_NEAR(eq.h_eq, p.a * p.b * eq.V_eq.sum(), 1e-12);
        EXPECT_NEAR(eq.S_eq.sum(), 1.0, 1e-12);
        EXPECT_LT((eq.V_eq - eq.x_eq.cwiseProduct(eq.p_eq)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_GT(eq.p_eq.minCoeff(), 0.0);
    }
}

TEST(Equilibrium, NormalNetworkHasEqualShares) {
    Matrix w(3, 3);  // circulant, hence normal
    w << 0.2, 0.5, 0.3, 0.3, 0.2, 0.5, 0.5, 0.3, 0.2;
    const auto eq = solve_equilibrium(IONetwork(w), ModelParams{});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(eq.S_eq[i], 1.0 / 3, 1e-10);
}

TEST(Equilibrium, GaugeRescalesNominalsOnly) {
    const auto net = build_random_exponential_network(12, 4);
    ModelParams p;
    const Vector z = Vector::Ones(12);
    EquilibriumOptions twice;
    twice.total = 24.0;
    const auto e1 = solve_equilibrium(net, p, z), e2 = solve_equilibrium(net, p, z, twice);
    EXPECT_LT((e1.x_eq - e2.x_eq).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((e1.S_eq - e2.S_eq).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((2.0 * e1.p_eq - e2.p_eq).cwiseAbs().maxCoeff(), 1e-10 * e2.p_eq.maxCoeff());
    EXPECT_NEAR(2.0 * e1.h_eq, e2.h_eq, 1e-10);
}

TEST(Equilibrium, ConstantReturnsRejected) {
    ModelParams p;
    p.b = 1.0;
    EXPECT_THROW(solve_equilibrium(build_plain_network(4), p), ConfigError);
}

TEST(Equilibrium, InfluenceVector) {
    EXPECT_NEAR(influence_vector_lp(build_plain_network(1), 0.5, 0.9)[0], 1.0 / 0.55, 1e-12);
    const Vector v = influence_vector_lp(build_plain_network(10), 0.5, 0.9);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(v[i], 0.1 / 0.55, 1e-12);
    const Vector u = influence_vector_lp(build_random_exponential_network(6, 2), 1.0, 0.9);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(u[i], 1.0 / 6, 1e-14);
}

TEST(Params, Validation) {
    ModelParams p;
    p.a = 1.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.gamma = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.q = -1.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    EXPECT_NO_THROW(p.validate());
    EXPECT_DOUBLE_EQ(p.inflation_q(), p.q);
}
