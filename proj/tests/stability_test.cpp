#include <gtest/gtest.h>

#include <iodyn/stability.hpp>

#include <numbers>

#include "support.hpp"

using namespace iodyn;

namespace {

ModelParams with(double gamma, double q) {
    ModelParams p;
    p.gamma = gamma;
    p.q = q;
    return p;
}

IONetwork circulant(const std::vector<double>& row) {
    const int n = static_cast<int>(row.size());
    Matrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = row[static_cast<std::size_t>((j - i + n) % n)];
    return IONetwork(w);
}

}  // namespace

TEST(Linearized, NormalNetworkProjectorsCoincide) {
    const auto net = build_plain_network(5);
    const auto lin = build_linearized(net, ModelParams{});
    const Matrix avg = Matrix::Constant(5, 5, 0.2);
    EXPECT_LT((lin.J0 - avg).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((lin.J1 - avg).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((lin.J2 - avg).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((lin.W_tilde - net.w().transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Linearized, SingleFirmIsScalarOne) {
    const auto lin = build_linearized(build_plain_network(1), ModelParams{});
    for (const Matrix* m : {&lin.W_tilde, &lin.J0, &lin.J1, &lin.J2}) EXPECT_NEAR((*m)(0, 0), 1.0, 1e-15);
}

TEST(Linearized, NonNormalIdentities) {
    const auto net = build_random_exponential_network(15, 4);
    const auto lin = build_linearized(net, ModelParams{});
    EXPECT_GT((lin.J1 - lin.J0).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(projector_identity_error(lin), 1e-12);
    EXPECT_LT(mus_identity_error(lin), 1e-12);
}

TEST(Linearized, RequiresUnitBaseDiscount) {
    ModelParams p;
    p.beta0 = 0.95;
    EXPECT_THROW(build_linearized(build_plain_network(3), p), ConfigError);
}

TEST(UniformMode, Multiplier) {
    EXPECT_NEAR(uniform_mode_multiplier(with(0.2, -1.0)), 0.8 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(uniform_mode_multiplier(with(1.0, 0.0)), 0.0);
    const double small = uniform_mode_multiplier(with(1e-9, 0.0));
    EXPECT_LT(small, 1.0);
    EXPECT_GT(small, 1.0 - 1e-7);
    ModelParams p = with(0.2, 0.0);
    p.q0 = 0.5;
    EXPECT_THROW(uniform_mode_multiplier(p), ConfigError);
    p = with(0.2, 0.0);
    p.a = 1.0;
    EXPECT_THROW(uniform_mode_multiplier(p), ConfigError);
}

TEST(UniformMode, SingleFirmDecaysAtMultiplier) {
    const auto net = build_plain_network(1);
    const ModelParams p = with(0.2, -1.0);
    const double sim = checks::simulated_decay_rate(net, p, Matrix::Identity(2, 1), 60, 1e-8, 20);
    EXPECT_NEAR(sim, uniform_mode_multiplier(p), 1e-6);
    EXPECT_NEAR(max_growth_rate_state_space(build_linearized(net, p)).max_growth, uniform_mode_multiplier(p), 1e-10);
}

TEST(ModeQuadratic, ZeroModeCoefficients) {
    for (double g : {0.05, 0.13, 0.4}) {
        const auto m0 = mode_quadratic(0.0, with(g, 0.0));
        EXPECT_NEAR(std::abs(m0.A2 - 1.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m0.A1 + (1.0 - g - 9.0 * g)), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(m0.A0), 0.0, 1e-15);
        EXPECT_NEAR(m0.zeta_hat, 10.0 * g, 1e-13);

        const auto m1 = mode_quadratic(0.0, with(g, -1.0));
        EXPECT_NEAR(std::abs(m1.A2 - 1.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m1.A1 + (1.0 - g)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m1.A0 - 9.0 * g), 0.0, 1e-13);
    }
    ModelParams frozen;
    frozen.gamma = 0.0;  // outside the valid range, but the algebra is defined
    const auto m = mode_quadratic(0.3, frozen);
    const auto r = mode_roots(m);
    EXPECT_NEAR(std::abs(r.r1 - 1.0), 0.0, 1e-15);
}

TEST(ModeQuadratic, CoefficientsForComplexMode) {
    const ModelParams p = with(0.2, 0.3);
    const Complex s(0.3, 0.4);
    const auto m = mode_quadratic(s, p);
    const double c = 0.45, zh = 0.2 / (0.1 * (1.0 - 0.9 * 0.25 * 0.25));
    EXPECT_NEAR(m.zeta_hat, zh, 1e-14);
    EXPECT_NEAR(std::abs(m.A0 + 0.3 * 0.9 * zh), 0.0, 1e-14);
    const Complex A2 = 0.8 + zh * (0.1 - c * std::conj(s) * 1.3 + c * c * 0.25);
    EXPECT_NEAR(std::abs(m.A2 - A2), 0.0, 1e-13);
    EXPECT_THROW(mode_quadratic(1.0, p), ConfigError);
}

TEST(ModeRoots, Examples) {
    ModeQuadratic m;
    m.A2 = 1.0;
    m.A1 = -1.0;
    m.A0 = 0.0;
    auto r = mode_roots(m);
    EXPECT_NEAR(std::abs(r.r1 - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r.r2), 0.0, 1e-15);

    r = mode_roots(mode_quadratic(0.0, with(1.0 / 9.0, -1.0)));
    EXPECT_GT(std::abs(r.r1.imag()), 0.1);
    EXPECT_NEAR(std::abs(r.r1), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(r.r2), 1.0, 1e-12);

    r = mode_roots(mode_quadratic(0.0, with(0.2, 0.0)));
    EXPECT_NEAR(std::abs(r.r1 + 1.0), 0.0, 1e-12);

    m.A2 = 0.0;
    m.A1 = 2.0;
    m.A0 = -1.0;
    r = mode_roots(m);
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.r1.real(), 0.5, 1e-15);
}

TEST(ModeRoots, NoCancellationForTinyRoot) {
    ModeQuadratic m;
    m.A2 = 1.0;
    m.A1 = -1.0;
    m.A0 = 1e-14;
    const auto r = mode_roots(m);
    EXPECT_NEAR(r.r2.real() / 1e-14, 1.0, 1e-12);
}

TEST(Modal, PlainReportIndependentOfSize) {
    const auto p = with(0.05, -1.0);
    const auto r8 = max_growth_rate_modal(build_plain_network(8), p);
    const auto r64 = max_growth_rate_modal(build_plain_network(64), p);
    EXPECT_NEAR(r8.max_growth, r64.max_growth, 1e-12);
    EXPECT_NEAR(r8.max_growth, std::sqrt(9.0 * 0.05), 1e-12);
    EXPECT_TRUE(r8.stable);
    EXPECT_THROW(max_growth_rate_modal(build_random_exponential_network(6, 1), p), ConfigError);
}

TEST(Modal, IdentityNetworkFlagsUnitModes) {
    const auto rep = max_growth_rate_modal(IONetwork(Matrix::Identity(4, 4)), with(0.1, 0.0));
    EXPECT_TRUE(rep.degenerate_unit_modes);
    EXPECT_EQ(rep.per_mode.size(), 3u);
}

TEST(StateSpace, MatchesModalOnPlainAndCirculant) {
    const std::vector<IONetwork> nets = {build_plain_network(6), circulant({0.1, 0.5, 0.2, 0.2}),
                                         circulant({0.3, 0.1, 0.05, 0.25, 0.3}), checks::symmetric_random_network(7, 2)};
    for (const auto& net : nets)
        for (double q : {-1.0, -0.4, 0.0, 0.7})
            for (double g : {0.05, 0.12, 0.3, 0.9}) {
                const auto p = with(g, q);
                const double modal = max_growth_rate_modal(net, p).spectral_radius();
                const double ss = max_growth_rate_state_space(build_linearized(net, p)).max_growth;
                EXPECT_NEAR(modal, ss, 1e-8) << "n " << net.n() << " q " << q << " gamma " << g;
            }
}

TEST(StateSpace, GaugeDirectionIsExcluded) {
    const auto net = build_random_exponential_network(6, 3);
    const auto lin = build_linearized(net, with(0.2, -0.5));
    const auto map = state_space_matrix(lin);
    ASSERT_EQ(map.M.rows(), 12);
    Vector mus = Vector::Zero(12);
    mus.tail(6).setOnes();
    // A uniform price shift is annihilated by the gauge.
    EXPECT_LT((map.M * mus).norm(), 1e-10);
    EXPECT_EQ(state_space_spectrum(map).size(), 11u);
    // Every other eigenvalue of M is reported.
    Eigen::EigenSolver<Matrix> es(map.M, false);
    std::vector<double> full;
    for (int i = 0; i < 12; ++i) full.push_back(std::abs(es.eigenvalues()[i]));
    std::sort(full.rbegin(), full.rend());
    const auto kept = state_space_spectrum(map);
    for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_NEAR(std::abs(kept[i]), full[i], 1e-10);
}

TEST(StateSpace, LaggedVariantDeflatesMonetaryDirection) {
    const auto net = build_random_exponential_network(5, 2);
    const auto lin = build_linearized(net, with(0.1, -0.5), ClearingTiming::lagged);
    const auto map = state_space_matrix(lin);
    ASSERT_EQ(map.M.rows(), 15);
    Vector mus = Vector::Zero(15);
    mus.segment(5, 5).setOnes();
    mus.tail(5).setConstant(-lin.params.c());
    EXPECT_LT((map.M * mus - mus).norm(), 1e-10);
    const auto spec = state_space_spectrum(map);
    EXPECT_EQ(spec.size(), 14u);
    for (const auto& z : spec) EXPECT_GT(std::abs(z - 1.0), 1e-8);
}

TEST(StateSpace, DispatchFollowsNormality) {
    EXPECT_EQ(stability_report(build_plain_network(5), with(0.1, 0.0)).method, StabilityMethod::mode_quadratic);
    EXPECT_EQ(stability_report(build_random_exponential_network(5, 1), with(0.1, 0.0)).method,
              StabilityMethod::state_space);
}

TEST(StateSpace, StationaryCovarianceMatchesScalarAR1) {
    Matrix M(1, 1), G(1, 1);
    M << 0.8;
    G << 1.0;
    EXPECT_NEAR(stationary_covariance(M, G)(0, 0), 1.0 / (1.0 - 0.64), 1e-12);
}

TEST(Critical, PlainValues) {
    const auto net = build_plain_network(16);
    const auto c0 = critical_gamma(net, ModelParams{}, 0.0);
    ASSERT_TRUE(c0.gamma_c);
    EXPECT_NEAR(*c0.gamma_c, 0.2, 1e-6);
    EXPECT_EQ(c0.kind, BifurcationKind::real_minus_one);
    const auto c1 = critical_gamma(net, ModelParams{}, -1.0);
    ASSERT_TRUE(c1.gamma_c);
    EXPECT_NEAR(*c1.gamma_c, 1.0 / 9.0, 1e-6);
    EXPECT_EQ(c1.kind, BifurcationKind::complex_pair);
    for (const auto& c : {c0, c1}) {
        EXPECT_LT(c.growth_below, 1.0);
        EXPECT_GT(c.growth_above, 1.0);
    }
}

TEST(Critical, StateSpaceAgreesWithModal) {
    CriticalGammaOptions o;
    o.gamma_step = 0.01;
    o.method = StabilityMethod::state_space;
    const auto c = critical_gamma(build_plain_network(4), ModelParams{}, -1.0, o);
    ASSERT_TRUE(c.gamma_c);
    EXPECT_NEAR(*c.gamma_c, 1.0 / 9.0, 1e-6);
}

TEST(Critical, InteriorMaximumAtNegativeQ) {
    const auto net = build_random_exponential_network(20, 1);
    CriticalGammaOptions o;
    o.gamma_step = 0.01;
    double best_q = 2.0, best = -1.0;
    for (double q = -1.0; q <= 1.0 + 1e-9; q += 0.25) {
        const auto c = critical_gamma(net, ModelParams{}, q, o);
        ASSERT_TRUE(c.gamma_c) << q;
        if (*c.gamma_c > best) {
            best = *c.gamma_c;
            best_q = q;
        }
    }
    EXPECT_LT(best_q, 0.0);
    EXPECT_GT(best_q, -1.0);
}

TEST(Critical, RejectsBadStep) {
    CriticalGammaOptions o;
    o.gamma_step = 0.0;
    EXPECT_THROW(critical_gamma(build_plain_network(3), ModelParams{}, 0.0, o), ConfigError);
}

TEST(ClosedForm, Values) {
    EXPECT_NEAR(*critical_gamma_closed_form(0.0, 0.0, 0.5, 0.9), 0.2, 1e-14);
    EXPECT_FALSE(critical_gamma_closed_form(-1.0, 0.0, 0.5, 0.9));
    for (double a : {0.2, 0.7})
        for (double s : {-0.5, 0.0, 0.5})
            EXPECT_NEAR(*critical_gamma_closed_form(0.0, s, a, 0.9999) / 2e-4, 1.0, 2e-3);
    EXPECT_NEAR(*critical_gamma_b_to_1(0.0, 0.3, 0.4, 0.99), 0.02, 1e-15);
    // The closed form agrees with the root finder on a real-mode network.
    const auto net = circulant({0.4, 0.6});  // s = -0.2
    CriticalGammaOptions o;
    o.gamma_step = 0.005;
    const auto c = critical_gamma(net, ModelParams{}, 0.0, o);
    ASSERT_TRUE(c.gamma_c);
    const double cf = std::min(*critical_gamma_closed_form(0.0, -0.2, 0.5, 0.9), *critical_gamma_closed_form(0.0, 0.0, 0.5, 0.9));
    EXPECT_NEAR(*c.gamma_c, *critical_gamma_closed_form(0.0, -0.2, 0.5, 0.9), 1e-8) << cf;
}

TEST(ClosedForm, HopfAngle) {
    EXPECT_NEAR(hopf_angle(0.0, 0.5), std::numbers::pi / 3.0, 1e-15);
    for (double s : {-0.9, 0.4}) EXPECT_NEAR(hopf_angle(s, 1.0), std::numbers::pi / 3.0, 1e-15);
    // (1 - (1-a)s)^2 = 2 puts the cosine at +1: the angle closes to zero.
    const double s_edge = (1.0 - std::sqrt(2.0)) / 0.5;
    EXPECT_NEAR(hopf_angle(s_edge, 0.5), 0.0, 1e-6);
    EXPECT_THROW(hopf_angle(-3.0, 0.5), ConfigError);
}

TEST(Csv, CriticalLineColumns) {
    std::ostringstream os;
    write_critical_line_csv(os, {critical_gamma(build_plain_network(3), ModelParams{}, 0.0)});
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "q,gamma_c,kind,max_root_re,max_root_im");
    EXPECT_NE(os.str().find("real_minus_one"), std::string::npos);
}
