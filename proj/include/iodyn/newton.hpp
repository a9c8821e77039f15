#pragma once

// Damped Newton iteration with a forward-difference Jacobian.

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace iodyn {

struct NewtonOptions {
    double tolerance = 1e-12;       // target on max |F|
    double accept_tolerance = 1e-10; // accepted if the iteration stagnates below this
    int max_iterations = 100;
    int max_halvings = 30;           // damping floor 2^-30
    double fd_step = 1e-7;
};

struct NewtonResult {
    Eigen::VectorXd x;
    double max_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Solve F(x) = 0. `residual(x, out)` must fill `out` and return false if the
/// trial point is not admissible (non-finite values); the line search then
/// backtracks.
template <class Residual>
NewtonResult newton_solve(Residual&& residual, Eigen::VectorXd x, const NewtonOptions& opts = {}) {
    using Eigen::VectorXd;
    const auto m = x.size();
    VectorXd f(m), trial_f(m), fp(m), dx(m), trial(m);
    Eigen::MatrixXd jac(m, m);
    NewtonResult out;

    auto norm = [](const VectorXd& v) { return v.cwiseAbs().maxCoeff(); };
    auto eval = [&](const VectorXd& at, VectorXd& res) {
        return residual(at, res) && res.allFinite();
    };

    if (!eval(x, f)) {
        out.x = x;
        return out;
    }
    double fnorm = norm(f);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (fnorm < opts.tolerance) {
            out.converged = true;
            break;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const double h = opts.fd_step * std::max(1.0, std::abs(x[j]));
            const double saved = x[j];
            x[j] = saved + h;
            const double hh = x[j] - saved;
            const bool ok = eval(x, fp);
            x[j] = saved;
            if (!ok) {
                out.x = x;
                out.max_residual = fnorm;
                out.iterations = it;
                return out;
            }
            jac.col(j) = (fp - f) / hh;
        }
        dx = jac.partialPivLu().solve(-f);
        if (!dx.allFinite()) break;

        double step = 1.0;
        bool improved = false;
        for (int k = 0; k <= opts.max_halvings; ++k, step *= 0.5) {
            trial = x + step * dx;
            if (eval(trial, trial_f) && norm(trial_f) < fnorm) {
                improved = true;
                break;
            }
        }
        out.iterations = it + 1;
        if (!improved) break;
        x = trial;
        f = trial_f;
        fnorm = norm(f);
    }
    if (!out.converged && fnorm < opts.tolerance) out.converged = true;
    if (!out.converged && fnorm < opts.accept_tolerance) out.converged = true;
    out.x = x;
    out.max_residual = fnorm;
    return out;
}

}  // namespace iodyn
