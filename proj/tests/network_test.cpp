#include <gtest/gtest.h>

#include <iodyn/network.hpp>

#include <sstream>

using namespace iodyn;

TEST(Network, PlainHasUniformEntriesAndSpectrumOneZero) {
    const auto net = build_plain_network(2);
    EXPECT_DOUBLE_EQ(net.w()(0, 1), 0.5);
    const auto& ev = net.eigenvalues();
    EXPECT_NEAR(std::abs(ev[0] - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(ev[1]), 0.0, 1e-14);

    const auto big = build_plain_network(64);
    EXPECT_LT((big.w().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_NEAR(std::abs(big.eigenvalues()[0] - 1.0), 0.0, 1e-12);
    for (int k = 1; k < 64; ++k) EXPECT_LT(std::abs(big.eigenvalues()[k]), 1e-12);
}

TEST(Network, SingleFirm) {
    const auto net = build_plain_network(1);
    EXPECT_EQ(net.n(), 1);
    EXPECT_DOUBLE_EQ(net.w()(0, 0), 1.0);
}

TEST(Network, ZeroSizeRejected) {
    EXPECT_THROW(build_plain_network(0), ConfigError);
    EXPECT_THROW(build_random_exponential_network(0, 1), ConfigError);
}

TEST(Network, RandomIsDeterministicAndStochastic) {
    const auto a = build_random_exponential_network(20, 1), b = build_random_exponential_network(20, 1);
    EXPECT_EQ(std::memcmp(a.w().data(), b.w().data(), sizeof(double) * 400), 0);
    const auto c = build_random_exponential_network(40, 7);
    EXPECT_LT((c.w().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_NE(build_random_exponential_network(20, 2).w(), a.w());
}

TEST(Network, RandomSpectrumInsideUnitDiskExceptOne) {
    const auto net = build_random_exponential_network(80, 3);
    const auto& ev = net.eigenvalues();
    EXPECT_NEAR(std::abs(ev[0] - 1.0), 0.0, 1e-10);
    for (int k = 1; k < ev.size(); ++k) EXPECT_LT(std::abs(ev[k]), 1.0);
}

TEST(Network, CsvIdentity) {
    std::istringstream in("1,0\n0,1\n");
    const auto net = parse_network_csv(in);
    EXPECT_EQ(net.w(), Matrix::Identity(2, 2));
    EXPECT_NEAR(std::abs(net.eigenvalues()[1] - 1.0), 0.0, 1e-14);
}

TEST(Network, CsvRenormalizesWithWarning) {
    std::istringstream in("2,2\n1e-1,9e-1\n");
    std::vector<std::string> warnings;
    const auto net = parse_network_csv(in, &warnings);
    EXPECT_DOUBLE_EQ(net.w()(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(net.w()(0, 1), 0.5);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("row 0"), std::string::npos);
}

TEST(Network, CsvErrors) {
    auto expect_error = [](const std::string& text, const std::string& fragment) {
        std::istringstream in(text);
        try {
            parse_network_csv(in);
            FAIL() << "accepted: " << text;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    };
    expect_error("1,-0.5\n0,1\n", "negative input share");
    expect_error("0,0\n0,1\n", "all-zero row");
    expect_error("1,0,0\n0,1\n", "not square");
    expect_error("1,x\n0,1\n", "malformed");
    expect_error("", "empty");
    EXPECT_THROW(load_network("/nonexistent/w.csv"), ConfigError);
}

TEST(Network, ConstructorRejectsNonStochastic) {
    Matrix w(2, 2);
    w << 0.5, 0.5, 0.5, 0.6;
    EXPECT_THROW(IONetwork{w}, ConfigError);
}

TEST(Network, Normality) {
    EXPECT_TRUE(is_normal(build_plain_network(7)));
    EXPECT_TRUE(is_normal(IONetwork(Matrix::Identity(3, 3))));
    Matrix w(2, 2);
    w << 0.9, 0.1, 0.5, 0.5;
    EXPECT_FALSE(is_normal(IONetwork(w)));
}

TEST(Network, OnesComplementBasisIsOrthonormal) {
    const Matrix B = ones_complement_basis(6);
    EXPECT_LT((B.transpose() * B - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((Vector::Ones(6).transpose() * B).cwiseAbs().maxCoeff(), 1e-14);
}
