#pragma once

// Reference dynamics: the Long-Plosser recursion, its adiabatic and fast
// aggregate-volatility closed forms, the forward (transversality) iteration
// and a schematic near-unstable linear model.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "equilibrium.hpp"
#include "network.hpp"

namespace iodyn {

namespace detail {
inline double require_contraction(double a, double b) {
    const double c = b * (1.0 - a);
    if (!(c >= 0.0 && c < 1.0)) throw ConfigError("requires 0 <= b (1-a) < 1");
    return c;
}
inline Vector broadcast_sigmas(const Vector& sigmas, int n) {
    if (sigmas.size() == 1) return Vector::Constant(n, sigmas[0]);
    if (sigmas.size() != n) throw ConfigError("sigma vector has wrong dimension");
    if ((sigmas.array() < 0.0).any()) throw ConfigError("sigmas must be nonnegative");
    return sigmas;
}
}  // namespace detail

/// xi_{t+1} = b(1-a) W xi_t + eps_t with eps ~ N(0, sigma^2 I). Returns xi_1..xi_steps.
inline std::vector<Vector> long_plosser_simulate(const IONetwork& net, double a, double b, double sigma, int steps,
                                                 std::uint64_t seed, const Vector* xi0 = nullptr) {
    const double c = detail::require_contraction(a, b);
    const int n = net.n();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Vector xi = xi0 ? *xi0 : Vector::Zero(n);
    Vector eps(n);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    for (int t = 0; t < steps; ++t) {
        for (int i = 0; i < n; ++i) eps[i] = sigma * N(rng);
        xi = c * (net.w() * xi) + eps;
        out.push_back(xi);
    }
    return out;
}

/// Same recursion, keeping only the flat aggregate n^{-1} sum(xi_t).
inline std::vector<double> long_plosser_aggregate(const IONetwork& net, double a, double b, double sigma, int steps,
                                                  std::uint64_t seed) {
    const double c = detail::require_contraction(a, b);
    const int n = net.n();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Vector xi = Vector::Zero(n), eps(n);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    for (int t = 0; t < steps; ++t) {
        for (int i = 0; i < n; ++i) eps[i] = sigma * N(rng);
        xi = c * (net.w() * xi) + eps;
        out.push_back(xi.mean());
    }
    return out;
}

/// Sample std of a stationary series over t >= burn_in with a batch-means
/// standard error (the variance error carried to the std).
struct StdEstimate {
    double value = 0.0;
    double std_err = 0.0;
};

inline StdEstimate batch_means_std(const std::vector<double>& x, int burn_in, int batches = 20) {
    if (burn_in < 0 || batches < 2) throw ConfigError("requires burn_in >= 0 and at least two batches");
    const std::size_t start = static_cast<std::size_t>(burn_in);
    if (x.size() < start + 2 * static_cast<std::size_t>(batches))
        throw ConfigError("series too short for batch means");
    const std::size_t len = (x.size() - start) / static_cast<std::size_t>(batches);
    auto var_of = [&](std::size_t from, std::size_t count) {
        double m = 0.0, ss = 0.0;
        for (std::size_t t = from; t < from + count; ++t) m += x[t];
        m /= static_cast<double>(count);
        for (std::size_t t = from; t < from + count; ++t) ss += (x[t] - m) * (x[t] - m);
        return ss / static_cast<double>(count);
    };
    std::vector<double> v;
    for (int k = 0; k < batches; ++k) v.push_back(var_of(start + static_cast<std::size_t>(k) * len, len));
    double mv = 0.0, sv = 0.0;
    for (double e : v) mv += e;
    mv /= batches;
    for (double e : v) sv += (e - mv) * (e - mv);
    StdEstimate out;
    out.value = std::sqrt(var_of(start, x.size() - start));
    const double se_var = std::sqrt(sv / (batches - 1.0) / batches);
    out.std_err = out.value > 0.0 ? se_var / (2.0 * out.value) : 0.0;
    return out;
}

/// Static response [I - b(1-a) W]^{-1} eps.
inline Vector adiabatic_response(const IONetwork& net, double a, double b, const Vector& eps) {
    const double c = detail::require_contraction(a, b);
    const int n = net.n();
    if (eps.size() != n) throw ConfigError("shock vector has wrong dimension");
    return (Matrix::Identity(n, n) - c * net.w()).partialPivLu().solve(eps);
}

/// Aggregate std when production adjusts instantly: sqrt(sum_l sigma_l^2 V_l^2).
inline double sigma_slow(const IONetwork& net, double a, double b, const Vector& sigmas) {
    detail::require_contraction(a, b);
    const Vector s = detail::broadcast_sigmas(sigmas, net.n());
    const Vector v = influence_vector_lp(net, a, b);
    return std::sqrt((s.array().square() * v.array().square()).sum());
}

/// Stationary aggregate std of the Long-Plosser recursion, from the fixed
/// point of C <- c^2 W C W^T + diag(sigma^2).
inline double sigma_fast(const IONetwork& net, double a, double b, const Vector& sigmas, int max_iterations = 100000) {
    const double c = detail::require_contraction(a, b);
    const int n = net.n();
    const Vector s = detail::broadcast_sigmas(sigmas, n);
    const Matrix D = s.array().square().matrix().asDiagonal();
    const Matrix& W = net.w();
    Matrix C = D;
    for (int it = 0; it < max_iterations; ++it) {
        const Matrix next = c * c * (W * C * W.transpose()) + D;
        const double change = (next - C).cwiseAbs().maxCoeff();
        C = next;
        if (change <= 1e-14 * std::max(1.0, C.cwiseAbs().maxCoeff())) return std::sqrt(C.sum()) / n;
    }
    throw NumericalError("stationary covariance iteration did not converge");
}

struct TransversalityResult {
    bool infinite = false;  // W^T is singular on the complement of 1: one-step blow-up
    bool trivial = false;   // zero initial state stays zero
    double growth = 0.0;    // per-step growth factor
    double min_singular = 0.0;  // smallest singular value of the restricted W^T
};

/// Forward iteration S <- [W^T]^{-1} S / (beta (1-a) b) on the complement of 1.
inline TransversalityResult transversality_blowup(const IONetwork& net, double a, double b, double beta,
                                                  const Vector& s0_perp, int steps = 200) {
    const int n = net.n();
    const double k = beta * (1.0 - a) * b;
    if (!(k > 0.0 && k < 1.0)) throw ConfigError("requires 0 < beta (1-a) b < 1");
    if (s0_perp.size() != n) throw ConfigError("initial state has wrong dimension");
    if (std::abs(s0_perp.sum()) > 1e-10 * std::max(1.0, s0_perp.cwiseAbs().maxCoeff()))
        throw ConfigError("initial state must be orthogonal to the ones vector");
    if (steps < 1) throw ConfigError("requires steps >= 1");

    TransversalityResult out;
    if (n < 2 || s0_perp.cwiseAbs().maxCoeff() == 0.0) {
        out.trivial = true;
        return out;
    }
    const Matrix B = ones_complement_basis(n);
    const Matrix R = B.transpose() * net.w().transpose() * B;
    Eigen::JacobiSVD<Matrix> svd(R);
    const auto& sv = svd.singularValues();
    out.min_singular = sv[sv.size() - 1];
    if (out.min_singular <= 1e-12 * std::max(1.0, sv[0])) {
        out.infinite = true;
        out.growth = std::numeric_limits<double>::infinity();
        return out;
    }
    const auto lu = R.partialPivLu();
    Vector y = B.transpose() * s0_perp;
    y.normalize();
    double log_sum = 0.0;
    int counted = 0;
    for (int t = 0; t < steps; ++t) {
        y = lu.solve(y) / k;
        const double norm = y.norm();
        if (t >= steps / 2) {
            log_sum += std::log(norm);
            ++counted;
        }
        y /= norm;
    }
    out.growth = std::exp(log_sum / counted);
    return out;
}

/// Linear model X_{t+1} = A X_t + eps_t with one mode close to instability.
struct NearInstabilityModel {
    Matrix A;
    Vector U_plus;  // unit-norm leading eigenvector
    Vector sigmas;
    double eta = 0.0;  // leading eigenvalue is 1 - eta
};

/// A = (1-eta) U U^T + rho (I - U U^T).
inline NearInstabilityModel make_near_instability_model(Vector u, double eta, const Vector& sigmas,
                                                        double rho = 0.5) {
    const int n = static_cast<int>(u.size());
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
    if (!(std::abs(rho) < 1.0)) throw ConfigError("bulk eigenvalue must lie inside the unit circle");
    const double norm = u.norm();
    if (!(norm > 0.0)) throw ConfigError("leading eigenvector must be nonzero");
    u /= norm;
    NearInstabilityModel m;
    const Matrix P = u * u.transpose();
    m.A = (1.0 - eta) * P + rho * (Matrix::Identity(n, n) - P);
    m.U_plus = u;
    m.sigmas = detail::broadcast_sigmas(sigmas, n);
    m.eta = eta;
    return m;
}

struct NearInstabilityStats {
    Matrix cov_empirical;
    Matrix cov_predicted;       // U U^T Sigma^2 / (2 eta)
    Matrix corr_empirical;
    Matrix corr_predicted_sign; // sign(U_j U_k)
    double sigma2 = 0.0;        // sum_l sigma_l^2 U_l^2
    double relative_frobenius_error = 0.0;
    int samples = 0;
};

inline NearInstabilityStats near_instability_stats(const NearInstabilityModel& m, int steps, std::uint64_t seed,
                                                   int burn_in = -1) {
    const int n = static_cast<int>(m.A.rows());
    Eigen::EigenSolver<Matrix> es(m.A, false);
    if (!(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0))
        throw NumericalError("near-instability model is not stationary (spectral radius >= 1)");
    if (burn_in < 0) burn_in = static_cast<int>(std::ceil(10.0 / m.eta));
    if (steps <= burn_in + 1) throw ConfigError("requires steps > burn_in + 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Vector x = Vector::Zero(n), eps(n);
    Vector sum = Vector::Zero(n);
    Matrix sq = Matrix::Zero(n, n);
    int count = 0;
    for (int t = 0; t < steps; ++t) {
        for (int i = 0; i < n; ++i) eps[i] = m.sigmas[i] * N(rng);
        x = m.A * x + eps;
        if (t >= burn_in) {
            sum += x;
            sq.noalias() += x * x.transpose();
            ++count;
        }
    }
    NearInstabilityStats st;
    st.samples = count;
    const Vector mean = sum / count;
    st.cov_empirical = sq / count - mean * mean.transpose();
    st.sigma2 = (m.sigmas.array().square() * m.U_plus.array().square()).sum();
    st.cov_predicted = m.U_plus * m.U_plus.transpose() * (st.sigma2 / (2.0 * m.eta));
    const Vector sd = st.cov_empirical.diagonal().cwiseSqrt();
    st.corr_empirical = st.cov_empirical.array() / (sd * sd.transpose()).array();
    st.corr_predicted_sign = (m.U_plus * m.U_plus.transpose()).unaryExpr([](double v) {
        return static_cast<double>((v > 0.0) - (v < 0.0));
    });
    st.relative_frobenius_error = (st.cov_empirical - st.cov_predicted).norm() / st.cov_predicted.norm();
    return st;
}

}  // namespace iodyn
