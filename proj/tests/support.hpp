#pragma once

// Shared helpers for the unit and acceptance tests.

#include <iodyn/iodyn.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace iodyn::checks {

/// Per-step growth factor of small deviations from equilibrium in the full
/// nonlinear simulator. Deviations live in the state (log x_{t+1}, log p_t);
/// `directions` (1 or 2 columns, orthonormal) are renormalized to size `delta`
/// after every step and the k-volume growth is converted to a per-vector
/// rate: the k-th root of the mean volume factor. The first `warmup` steps
/// only align the directions with the dominant subspace.
inline double simulated_decay_rate(const IONetwork& net, const ModelParams& params, Matrix directions, int steps,
                                   double delta = 1e-8, int warmup = 100) {
    const int n = net.n();
    const int k = static_cast<int>(directions.cols());
    const EquilibriumState eq = solve_equilibrium(net, params);
    const EconomyState base = equilibrium_state(eq, net, params);
    const Eigen::ArrayXd lx = eq.x_eq.array().log(), lp = eq.p_eq.array().log();

    StepOptions so;
    so.gauge_sum = lp.sum();
    so.compute_psi = false;
    so.newton.tolerance = 1e-15;
    so.newton.accept_tolerance = 1e-13;

    double log_volume = 0.0;
    for (int t = 0; t < warmup + steps; ++t) {
        Matrix D(2 * n, k);
        for (int j = 0; j < k; ++j) {
            EconomyState s = base;
            s.x_next = (lx + delta * directions.col(j).head(n).array()).exp().matrix();
            s.p = (lp + delta * directions.col(j).tail(n).array()).exp().matrix();
            const EconomyState s1 = step(s, net, params, eq.z_bar, Vector::Zero(n), so);
            D.col(j).head(n) = (s1.x_next.array().log() - lx).matrix() / delta;
            D.col(j).tail(n) = (s1.p.array().log() - lp).matrix() / delta;
        }
        Eigen::HouseholderQR<Matrix> qr(D);
        const Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        if (t >= warmup)
            for (int j = 0; j < k; ++j) log_volume += std::log(std::abs(R(j, j)));
        directions = qr.householderQ() * Matrix::Identity(2 * n, k);
    }
    return std::exp(log_volume / (static_cast<double>(k) * steps));
}

/// Symmetric (hence normal) doubly stochastic matrix: symmetrized random
/// entries balanced by symmetric Sinkhorn scaling.
inline IONetwork symmetric_random_network(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> E(1.0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = E(rng);
    Matrix s = 0.5 * (a + a.transpose());
    for (int it = 0; it < 10000; ++it) {
        const Vector r = s.rowwise().sum();
        if ((r.array() - 1.0).abs().maxCoeff() < 1e-15) break;
        const Vector d = r.cwiseSqrt().cwiseInverse();
        s = d.asDiagonal() * s * d.asDiagonal();
    }
    s = 0.5 * (s + s.transpose());
    for (int i = 0; i < n; ++i) s.row(i) /= s.row(i).sum();
    return IONetwork(s, Normality::normal);
}

}  // namespace iodyn::checks
