#pragma once

// Full nonlinear dynamics of the firm network with myopic price forecasts and
// slow production adjustment.
//
// Timing: at time t firms sell x_t (decided at t-1), observe (p_t, h_t), form
// a price forecast from p_t and p_{t-1}, pick the production target x_{t+1}
// and buy labor and inputs for it. Prices and wage at t clear all markets
// simultaneously; the overall price level is pinned by a gauge on sum(log p).

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "hash.hpp"
#include "network.hpp"
#include "newton.hpp"
#include "params.hpp"

namespace iodyn {

/// Complete state of the economy at time t.
struct EconomyState {
    int t = 0;
    Vector x;       // production sold at t
    Vector p;       // prices at t
    Vector p_prev;  // prices at t-1
    Vector z;       // productivities known at t
    Vector lambda;  // Lagrange multipliers
    Vector x_next;  // production target for t+1
    double h = 0.0;     // wage
    double M = 0.0;     // household wealth
    double beta = 0.0;  // discount factor
    Vector ell;     // labor inputs
    Matrix psi;     // intermediate inputs psi(i, j) of good j used by firm i
    int newton_iterations = 0;
    double max_residual = 0.0;

    int n() const { return static_cast<int>(x.size()); }
};

class StepFailure : public NumericalError {
public:
    StepFailure(int t, const std::string& what)
        : NumericalError("step failed at t=" + std::to_string(t) + ": " + what), t_(t) {}
    int time() const { return t_; }

private:
    int t_;
};

namespace detail {
inline void require_positive(const Vector& v, const char* what) {
    if (!v.allFinite() || (v.array() <= 0.0).any())
        throw ConfigError(std::string(what) + " must be positive");
}
inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}
}  // namespace detail

/// Extrapolative forecast p_t (p_t / p_{t-1})^q.
inline Vector expected_price(const Vector& p, const Vector& p_prev, double q) {
    detail::require_positive(p, "prices");
    detail::require_positive(p_prev, "previous prices");
    return (p.array() * (p.array() / p_prev.array()).pow(q)).matrix();
}

/// beta0 times the geometric-mean inflation factor raised to -q0.
inline double discount_factor(const Vector& p, const Vector& p_prev, double q0, double beta0) {
    detail::require_positive(p, "prices");
    detail::require_positive(p_prev, "previous prices");
    const double mean_log_inflation = (p.array().log() - p_prev.array().log()).mean();
    return beta0 * std::exp(-q0 * mean_log_inflation);
}

/// Profit-maximizing production target
///   x*_i = [ z_i (beta E_i)^b h^{-ab} prod_j p_j^{-b(1-a) w_ij} ]^{1/(1-b)}
/// with the factor b^b absorbed into z. Input prices enter with a negative
/// exponent so that a uniform rescaling of (E, p, h) leaves x* unchanged.
inline Vector optimal_production(const Vector& z, const Vector& p, double h, const Vector& e_price, double beta,
                                 const IONetwork& net, const ModelParams& params) {
    params.require_decreasing_returns();
    detail::require_positive(z, "productivities");
    detail::require_positive(p, "prices");
    detail::require_positive(e_price, "expected prices");
    detail::require_positive(h, "wage");
    detail::require_positive(beta, "discount factor");
    const double a = params.a, b = params.b, c = params.c();
    const Vector wlogp = net.w() * p.array().log().matrix();
    const Vector logx = (z.array().log() + b * (std::log(beta) + e_price.array().log()) - a * b * std::log(h) -
                         c * wlogp.array()) /
                        (1.0 - b);
    return logx.array().exp().matrix();
}

/// (1 - gamma) x_t + gamma x*.
inline Vector production_target(const Vector& x, const Vector& x_star, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    return (1.0 - gamma) * x + gamma * x_star;
}

/// beta E_i (x_next_i / x*_i)^{(1-b)/b}.
inline Vector lagrange_multiplier(const Vector& x_next, const Vector& x_star, const Vector& e_price, double beta,
                                  double b) {
    detail::require_positive(x_next, "production targets");
    detail::require_positive(x_star, "optimal production");
    detail::require_positive(e_price, "expected prices");
    detail::require_positive(beta, "discount factor");
    return (beta * e_price.array() * (x_next.array() / x_star.array()).pow((1.0 - b) / b)).matrix();
}

struct FactorDemands {
    Vector ell;
    Matrix psi;
};

/// Cost-minimizing labor and intermediate inputs for the targets x_next.
inline FactorDemands factor_demands(const Vector& lambda, const Vector& x_next, const Vector& p, double h,
                                    const IONetwork& net, const ModelParams& params) {
    detail::require_positive(lambda, "multipliers");
    detail::require_positive(x_next, "production targets");
    detail::require_positive(p, "prices");
    detail::require_positive(h, "wage");
    const Vector spend = (lambda.array() * x_next.array()).matrix();
    FactorDemands fd;
    fd.ell = params.a * params.b * spend / h;
    fd.psi = params.c() * (spend.asDiagonal() * net.w()) * p.cwiseInverse().asDiagonal();
    return fd;
}

/// Household wealth: total sales minus intermediate spending.
inline double household_wealth(const Vector& x, const Vector& p, const Vector& lambda, const Vector& x_next,
                               const ModelParams& params) {
    return x.dot(p) - params.c() * lambda.dot(x_next);
}

/// Everything that is fixed while the time-t market-clearing system is solved.
struct ClearingContext {
    Vector x;       // x_t
    Vector p_prev;  // p_{t-1}
    Vector z;       // z_t
    double gauge_sum = 0.0;  // target value of sum(log p_t)
};

/// Quantities derived from a trial (log p_t, log h_t).
struct ClearingPoint {
    Vector p, e_price, x_star, x_next, lambda;
    double h = 0.0, beta = 0.0;
};

/// Per-step market-clearing system in the unknowns u = (log p_t, log h_t).
class ClearingSystem {
public:
    ClearingSystem(const IONetwork& net, const ModelParams& params, ClearingContext ctx)
        : net_(net), params_(params), ctx_(std::move(ctx)) {
        log_p_prev_ = ctx_.p_prev.array().log();
        log_z_ = ctx_.z.array().log();
        wt_ = net_.w().transpose();
    }

    int n() const { return net_.n(); }
    const ClearingContext& context() const { return ctx_; }

    /// Derived quantities at the trial point. Returns false on overflow.
    bool evaluate(const Vector& u, ClearingPoint& pt) const {
        const int n = this->n();
        const double a = params_.a, b = params_.b, c = params_.c();
        const auto logp = u.head(n).array();
        const double logh = u[n];
        const Eigen::ArrayXd dlog = logp - log_p_prev_;
        const double log_beta = std::log(params_.beta0) - params_.inflation_q() * dlog.mean();
        const Eigen::ArrayXd log_e = logp + params_.q * dlog;
        const Eigen::ArrayXd wlogp = (net_.w() * u.head(n)).array();
        const Eigen::ArrayXd log_xstar = (log_z_ + b * (log_beta + log_e) - a * b * logh - c * wlogp) / (1.0 - b);
        pt.p = logp.exp().matrix();
        pt.h = std::exp(logh);
        pt.beta = std::exp(log_beta);
        pt.e_price = log_e.exp().matrix();
        pt.x_star = log_xstar.exp().matrix();
        pt.x_next = (1.0 - params_.gamma) * ctx_.x + params_.gamma * pt.x_star;
        const Eigen::ArrayXd log_lambda =
            log_beta + log_e + ((1.0 - b) / b) * (pt.x_next.array().log() - log_xstar);
        pt.lambda = log_lambda.exp().matrix();
        return pt.p.allFinite() && pt.x_star.allFinite() && pt.lambda.allFinite() && std::isfinite(pt.h) &&
               (pt.x_next.array() > 0.0).all();
    }

    /// The n goods-market residuals (they sum to zero identically).
    Vector goods_residuals(const ClearingPoint& pt) const {
        const Vector sales = (ctx_.x.array() * pt.p.array()).matrix();
        const Vector spend = (pt.lambda.array() * pt.x_next.array()).matrix();
        const Vector wts = wt_ * spend;
        return (sales.array() - sales.mean()).matrix() - params_.c() * (wts.array() - spend.mean()).matrix();
    }

    /// (n+1) residuals: goods markets 0..n-2, wage, gauge.
    bool residual(const Vector& u, Vector& out) const {
        ClearingPoint pt;
        if (!evaluate(u, pt)) return false;
        const int n = this->n();
        out.resize(n + 1);
        if (n > 1) out.head(n - 1) = goods_residuals(pt).head(n - 1);
        out[n - 1] = pt.h - params_.a * params_.b * pt.lambda.dot(pt.x_next);
        out[n] = u.head(n).sum() - ctx_.gauge_sum;
        return out.allFinite();
    }

private:
    const IONetwork& net_;
    const ModelParams& params_;
    ClearingContext ctx_;
    Eigen::ArrayXd log_p_prev_, log_z_;
    Matrix wt_;
};

/// Residual vector of the clearing system at trial (log p, h).
inline Vector clearing_residual(const Vector& log_p, double h, const ClearingContext& ctx, const IONetwork& net,
                                const ModelParams& params) {
    ClearingSystem sys(net, params, ctx);
    Vector u(net.n() + 1);
    u.head(net.n()) = log_p;
    u[net.n()] = std::log(h);
    Vector r;
    if (!sys.residual(u, r)) r = Vector::Constant(net.n() + 1, std::numeric_limits<double>::quiet_NaN());
    return r;
}

/// The equilibrium as a dynamic state (p_{t-1} = p_t = p_eq, x_{t+1} = x_t = x_eq).
inline EconomyState equilibrium_state(const EquilibriumState& eq, const IONetwork& net, const ModelParams& params) {
    EconomyState s;
    s.t = 0;
    s.x = eq.x_eq;
    s.p = eq.p_eq;
    s.p_prev = eq.p_eq;
    s.z = eq.z_bar;
    s.beta = params.beta0;
    s.lambda = params.beta0 * eq.p_eq;
    s.x_next = eq.x_eq;
    s.h = eq.h_eq;
    s.M = household_wealth(s.x, s.p, s.lambda, s.x_next, params);
    auto fd = factor_demands(s.lambda, s.x_next, s.p, s.h, net, params);
    s.ell = std::move(fd.ell);
    s.psi = std::move(fd.psi);
    return s;
}

struct StepOptions {
    NewtonOptions newton{};
    /// sum(log p_t) is pinned to this value; default keeps the previous sum.
    std::optional<double> gauge_sum;
    bool compute_psi = true;
};

/// Advance one period. `shock` is the log-productivity draw for the new period;
/// `z_bar` the baseline productivities.
inline EconomyState step(const EconomyState& s, const IONetwork& net, const ModelParams& params, const Vector& z_bar,
                         const Vector& shock, const StepOptions& opts = {}) {
    const int n = net.n();
    ClearingContext ctx;
    ctx.x = s.x_next;
    ctx.p_prev = s.p;
    ctx.z = (z_bar.array() * shock.array().exp()).matrix();
    ctx.gauge_sum = opts.gauge_sum.value_or(s.p.array().log().sum());
    ClearingSystem sys(net, params, ctx);

    Vector u0(n + 1);
    u0.head(n) = s.p.array().log().matrix();
    u0[n] = std::log(s.h);
    auto res = newton_solve([&](const Vector& u, Vector& r) { return sys.residual(u, r); }, u0, opts.newton);
    const int t = s.t + 1;
    if (!res.converged)
        throw StepFailure(t, "market clearing did not converge (max residual " + format_double(res.max_residual) +
                                 " after " + std::to_string(res.iterations) + " iterations)");

    ClearingPoint pt;
    sys.evaluate(res.x, pt);
    EconomyState out;
    out.t = t;
    out.x = ctx.x;
    out.p = pt.p;
    out.p_prev = s.p;
    out.z = ctx.z;
    out.lambda = pt.lambda;
    out.x_next = pt.x_next;
    out.h = pt.h;
    out.beta = pt.beta;
    out.M = household_wealth(out.x, out.p, out.lambda, out.x_next, params);
    out.ell = params.a * params.b * (pt.lambda.array() * pt.x_next.array()).matrix() / pt.h;
    if (opts.compute_psi) out.psi = factor_demands(out.lambda, out.x_next, out.p, out.h, net, params).psi;
    out.newton_iterations = res.iterations;
    out.max_residual = res.max_residual;
    return out;
}

/// I.i.d. Gaussian log-productivity shocks with a per-trajectory RNG.
class NoiseProcess {
public:
    NoiseProcess(double sigma, std::uint64_t seed) : sigma_(sigma), seed_(seed), rng_(seed) {
        if (!(sigma >= 0.0)) throw ConfigError("noise scale must be nonnegative");
    }
    double sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }

    Vector draw(int n) {
        Vector e(n);
        for (int i = 0; i < n; ++i) e[i] = sigma_ * normal_(rng_);
        return e;
    }
    /// Uniform draws on [-scale, scale] from the same stream.
    Vector uniform(int n, double scale) {
        std::uniform_real_distribution<double> u(-scale, scale);
        Vector e(n);
        for (int i = 0; i < n; ++i) e[i] = u(rng_);
        return e;
    }

private:
    double sigma_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Observables recorded after each step.
struct TrajectoryRow {
    int t = 0;
    double aggregate_output = 0.0;  // sum_i x_t[i] p_eq[i]
    double nominal_output = 0.0;    // sum_i x_t[i] p_t[i]
    double mean_xi = 0.0;           // n^{-1} sum_i log(x_t[i] / x_eq[i])
    double consumption_real = 0.0;  // sum_i M_t / (n p_t[i])
    double log_utility = 0.0;       // sum_i log(M_t / (n p_t[i]))
    double wage = 0.0;
    double price_level = 0.0;       // sum p_t x_t / sum p_eq x_t
    double wealth = 0.0;
    int newton_iters = 0;
    double max_residual = 0.0;
    Vector xi;                      // per-sector log deviations (empty if not recorded)
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;
    int burn_in = 0;
    int n = 0;
    std::string config_hash;
    // Equilibrium reference levels.
    double eq_aggregate_output = 0.0;
    double eq_consumption_real = 0.0;
    int nonpositive_wealth_steps = 0;

    std::size_t size() const { return rows.size(); }
};

struct SimulationOptions {
    int steps = 5000;
    int burn_in = 1000;
    double initial_kick = 1e-6;
    bool record_sectors = true;
    /// Added to sum(log p_eq) to set the price-level gauge.
    double gauge_shift = 0.0;
    NewtonOptions newton{};
};

inline TrajectoryRow observe(const EconomyState& s, const EquilibriumState& eq) {
    TrajectoryRow r;
    const int n = s.n();
    r.t = s.t;
    r.aggregate_output = s.x.dot(eq.p_eq);
    r.nominal_output = s.x.dot(s.p);
    const Eigen::ArrayXd xi = (s.x.array() / eq.x_eq.array()).log();
    r.mean_xi = xi.mean();
    r.wealth = s.M;
    if (s.M > 0.0) {
        r.consumption_real = (s.M / n) * s.p.cwiseInverse().sum();
        r.log_utility = (std::log(s.M / n) - s.p.array().log()).sum();
    } else {
        r.consumption_real = std::numeric_limits<double>::quiet_NaN();
        r.log_utility = std::numeric_limits<double>::quiet_NaN();
    }
    r.wage = s.h;
    r.price_level = r.nominal_output / r.aggregate_output;
    r.newton_iters = s.newton_iterations;
    r.max_residual = s.max_residual;
    r.xi = xi.matrix();
    return r;
}

inline std::string trajectory_hash(const IONetwork& net, const ModelParams& p, const NoiseProcess& noise,
                                   const SimulationOptions& o) {
    std::string s;
    for (double v : {p.a, p.b, p.q, p.inflation_q(), p.gamma, p.beta0, noise.sigma(), o.initial_kick, o.gauge_shift})
        s += format_double(v) + ";";
    s += std::to_string(noise.seed()) + ";" + std::to_string(o.steps) + ";" + std::to_string(o.burn_in) + ";";
    const auto h = fnv1a64(std::string_view(reinterpret_cast<const char*>(net.w().data()),
                                            sizeof(double) * static_cast<std::size_t>(net.w().size())),
                           fnv1a64(s));
    return hex64(h);
}

/// Run the nonlinear dynamics from a kicked equilibrium.
inline Trajectory simulate(const IONetwork& net, const ModelParams& params, const Vector& z_bar, NoiseProcess noise,
                           const SimulationOptions& opts) {
    params.validate();
    if (!(opts.steps > opts.burn_in && opts.burn_in >= 0)) throw ConfigError("requires steps > burn_in >= 0");
    const int n = net.n();
    const EquilibriumState eq = solve_equilibrium(net, params, z_bar);

    Trajectory traj;
    traj.burn_in = opts.burn_in;
    traj.n = n;
    traj.config_hash = trajectory_hash(net, params, noise, opts);
    traj.rows.reserve(static_cast<std::size_t>(opts.steps));

    EconomyState s = equilibrium_state(eq, net, params);
    {
        const TrajectoryRow r0 = observe(s, eq);
        traj.eq_aggregate_output = r0.aggregate_output;
        traj.eq_consumption_real = r0.consumption_real;
    }
    if (opts.initial_kick > 0.0)
        s.x_next = (s.x_next.array() * noise.uniform(n, opts.initial_kick).array().exp()).matrix();

    StepOptions so;
    so.newton = opts.newton;
    so.gauge_sum = eq.p_eq.array().log().sum() + opts.gauge_shift;
    so.compute_psi = false;
    for (int k = 0; k < opts.steps; ++k) {
        const Vector shock = noise.sigma() > 0.0 ? noise.draw(n) : Vector::Zero(n);
        s = step(s, net, params, eq.z_bar, shock, so);
        TrajectoryRow r = observe(s, eq);
        if (!(s.M > 0.0)) ++traj.nonpositive_wealth_steps;
        if (!opts.record_sectors) r.xi.resize(0);
        traj.rows.push_back(std::move(r));
    }
    return traj;
}

inline Trajectory simulate(const IONetwork& net, const ModelParams& params, NoiseProcess noise,
                           const SimulationOptions& opts) {
    return simulate(net, params, Vector::Ones(net.n()), std::move(noise), opts);
}

}  // namespace iodyn
