#pragma once

// Static equilibrium of the firm network: nominal outputs (the influence
// vector), wage, prices and quantities.

#include <cmath>
#include <optional>

#include "network.hpp"
#include "params.hpp"

namespace iodyn {

struct EquilibriumState {
    Vector p_eq;
    Vector x_eq;
    double h_eq = 0.0;
    Vector V_eq;   // nominal outputs x_eq * p_eq
    Vector S_eq;   // shares V_eq / sum(V_eq)
    Vector z_bar;  // baseline productivities

    int n() const { return static_cast<int>(p_eq.size()); }
};

/// Max-norm residual of the nominal-output balance
///   V - mean(V) 1 = beta0 (1-a) b What V,   What(i, j) = w(j, i) - 1/n.
inline double equilibrium_residual(const IONetwork& net, const ModelParams& params, const Vector& V) {
    const double k = params.c() * params.beta0;
    const Vector wtv = net.w().transpose() * V;
    const double mean = V.mean();
    const Vector r = (V.array() - mean).matrix() - k * (wtv.array() - mean).matrix();
    return r.cwiseAbs().maxCoeff();
}

struct EquilibriumOptions {
    /// Gauge for the overall nominal scale: sum(V_eq) = total. Default (nullopt) is n.
    std::optional<double> total;
};

/// Solve for the stationary state with fixed productivities z_bar.
///
/// The nominal-output balance fixes V only up to scale; the scale is pinned by
/// sum(V) = n unless overridden. Log-prices then follow from one linear solve
///   (I - cW) log p = (1-b) log V - log z_bar - b log beta0 + ab log h,
/// obtained by inserting x = V/p into the optimal-production relation.
inline EquilibriumState solve_equilibrium(const IONetwork& net, const ModelParams& params,
                                          const Vector& z_bar, EquilibriumOptions opts = {}) {
    params.validate();
    params.require_decreasing_returns();
    const int n = net.n();
    if (z_bar.size() != n) throw ConfigError("z_bar has wrong dimension");
    if ((z_bar.array() <= 0.0).any()) throw ConfigError("baseline productivities must be positive");

    const double a = params.a, b = params.b, c = params.c();
    const double k = c * params.beta0;
    if (!(k < 1.0)) throw ConfigError("requires beta0 b (1-a) < 1");
    const double total = opts.total.value_or(static_cast<double>(n));
    if (!(total > 0.0)) throw ConfigError("equilibrium gauge total must be positive");

    // V = (1-k) 1 + k W^T V  has total n; rescale afterwards.
    const Matrix I = Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu_v(I - k * net.w().transpose());
    Vector V = lu_v.solve(Vector::Constant(n, 1.0 - k));
    if (!V.allFinite() || (V.array() <= 0.0).any())
        throw NumericalError("equilibrium nominal-output system is singular");
    V *= total / V.sum();

    EquilibriumState eq;
    eq.V_eq = V;
    eq.S_eq = V / V.sum();
    eq.z_bar = z_bar;
    eq.h_eq = a * b * params.beta0 * V.sum();

    const Vector rhs = (1.0 - b) * V.array().log().matrix() - z_bar.array().log().matrix() +
                       Vector::Constant(n, -b * std::log(params.beta0) + a * b * std::log(eq.h_eq));
    Eigen::PartialPivLU<Matrix> lu_p(I - c * net.w());
    const Vector logp = lu_p.solve(rhs);
    if (!logp.allFinite()) throw NumericalError("equilibrium price system is singular");
    eq.p_eq = logp.array().exp().matrix();
    eq.x_eq = (V.array() / eq.p_eq.array()).matrix();
    return eq;
}

inline EquilibriumState solve_equilibrium(const IONetwork& net, const ModelParams& params) {
    return solve_equilibrium(net, params, Vector::Ones(net.n()));
}

/// n^{-1} 1^T [I - b(1-a) W]^{-1}, returned as a column vector.
inline Vector influence_vector_lp(const IONetwork& net, double a, double b) {
    const int n = net.n();
    const double c = b * (1.0 - a);
    if (!(c < 1.0)) throw ConfigError("requires b (1-a) < 1");
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - c * net.w().transpose());
    Vector v = lu.solve(Vector::Constant(n, 1.0 / n));
    if (!v.allFinite()) throw NumericalError("influence-vector system is singular");
    return v;
}

}  // namespace iodyn
