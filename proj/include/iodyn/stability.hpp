#pragma once

// Linear stability of the equilibrium.
//
// Deviations are logs relative to equilibrium: xi (production), pi (prices),
// mu (Lagrange multipliers). For normal networks every eigenvector of W
// decouples into a scalar second-order recursion; for general networks the
// full one-step map on (xi_t, pi_{t-1}) is built and diagonalized.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "hash.hpp"
#include "network.hpp"
#include "params.hpp"

namespace iodyn {

using Complex = std::complex<double>;

/// How payments clear: in the same period as production, or one period late.
enum class ClearingTiming { simultaneous, lagged };

inline const char* to_string(ClearingTiming t) { return t == ClearingTiming::simultaneous ? "simultaneous" : "lagged"; }

struct LinearizedSystem {
    IONetwork net;
    ModelParams params;
    EquilibriumState eq;
    Matrix W_tilde;  // W_tilde(i, j) = w(j, i) V_j / V_i
    Matrix J0, J1, J2;
    ClearingTiming variant = ClearingTiming::simultaneous;

    int n() const { return net.n(); }
};

namespace detail {
inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline void require_unit_beta0(const ModelParams& p) {
    if (std::abs(p.beta0 - 1.0) > 1e-15) throw ConfigError("linear stability analysis requires beta0 = 1");
}
}  // namespace detail

/// Largest violation of the projector identities
///   J1 J2 = J1,  J2 J1 = J2,  J1 W~ = J1,  J2 W~ = J2.
inline double projector_identity_error(const LinearizedSystem& lin) {
    return std::max({detail::max_abs(lin.J1 * lin.J2 - lin.J1), detail::max_abs(lin.J2 * lin.J1 - lin.J2),
                     detail::max_abs(lin.J1 * lin.W_tilde - lin.J1),
                     detail::max_abs(lin.J2 * lin.W_tilde - lin.J2)});
}

/// Residual of the linearized equations at xi = 0, mu = pi = 1 (a uniform
/// change of monetary unit), which must vanish.
inline double mus_identity_error(const LinearizedSystem& lin) {
    const int n = lin.n();
    const double a = lin.params.a, c = lin.params.c();
    const Matrix I = Matrix::Identity(n, n);
    const Vector one = Vector::Ones(n);
    const Vector e1 = (I - a * lin.J1) * one - (1.0 - a) * lin.net.w() * one;
    const Vector e3 = (I - lin.J2) * one - c * (lin.W_tilde - lin.J2) * one;
    return std::max(e1.cwiseAbs().maxCoeff(), e3.cwiseAbs().maxCoeff());
}

inline LinearizedSystem build_linearized(const IONetwork& net, const ModelParams& params, const EquilibriumState& eq,
                                         ClearingTiming variant = ClearingTiming::simultaneous) {
    params.validate();
    params.require_decreasing_returns();
    detail::require_unit_beta0(params);
    const int n = net.n();
    if (eq.n() != n) throw ConfigError("equilibrium does not match the network");
    const Vector& V = eq.V_eq;
    LinearizedSystem lin{net, params, eq, Matrix(n, n), Matrix::Constant(n, n, 1.0 / n), Matrix(n, n), Matrix(n, n),
                         variant};
    const double total = V.sum();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            lin.W_tilde(i, j) = net.w()(j, i) * V[j] / V[i];
            lin.J1(i, j) = V[j] / total;
            lin.J2(i, j) = V[j] / (n * V[i]);
        }
    const double err = projector_identity_error(lin);
    if (err > 1e-10) throw NumericalError("projector identities violated by " + format_double(err));
    const double mus = mus_identity_error(lin);
    if (mus > 1e-10) throw NumericalError("monetary-unit identity violated by " + format_double(mus));
    return lin;
}

inline LinearizedSystem build_linearized(const IONetwork& net, const ModelParams& params,
                                         ClearingTiming variant = ClearingTiming::simultaneous) {
    return build_linearized(net, params, solve_equilibrium(net, params), variant);
}

// ---------------------------------------------------------------------------
// Uniform mode

namespace detail {
inline double uniform_multiplier_value(const ModelParams& p) {
    if (!(p.a < 1.0)) throw ConfigError("uniform multiplier requires a < 1");
    if (!(p.b < 1.0)) throw ConfigError("uniform multiplier requires b < 1");
    const double zeta = p.gamma / ((1.0 - p.a) * (1.0 - p.b));
    return (1.0 - p.gamma) / (1.0 - p.gamma + zeta * (1.0 - p.b + p.a * p.b));
}
}  // namespace detail

/// Growth factor of the uniform (aggregate) mode,
///   (1-gamma) / (1-gamma + zeta (1-b+ab)),  zeta = gamma / ((1-a)(1-b)).
inline double uniform_mode_multiplier(const ModelParams& p) {
    if (p.q != p.inflation_q()) throw ConfigError("uniform multiplier is defined for q0 = q");
    return detail::uniform_multiplier_value(p);
}

// ---------------------------------------------------------------------------
// Non-uniform modes of a normal network

struct ModeQuadratic {
    Complex s;
    Complex A2, A1, A0;
    double zeta_hat = 0.0;
    double c = 0.0;
};

namespace detail {
inline ModeQuadratic mode_quadratic_unchecked(Complex s, const ModelParams& p) {
    const double a = p.a, b = p.b, q = p.q, g = p.gamma, c = p.c();
    const double s2 = std::norm(s);
    const double denom = (1.0 - b) * (1.0 - b * (1.0 - a) * (1.0 - a) * s2);
    if (!(denom > 0.0)) throw ConfigError("mode quadratic undefined for this eigenvalue");
    const double zh = g / denom;
    const Complex sb = std::conj(s);
    ModeQuadratic m;
    m.s = s;
    m.c = c;
    m.zeta_hat = zh;
    m.A2 = 1.0 - g + zh * (1.0 - b - c * sb * (1.0 + q) + c * c * s2);
    // The s vs conj(s) placement matters only for complex eigenvalues.
    m.A1 = -(1.0 - g) + zh * (b * (1.0 + q) - c * s + q * c * sb);
    m.A0 = -q * b * zh;
    return m;
}
}  // namespace detail

/// Coefficients of A2 alpha^2 + A1 alpha + A0 = 0 for the mode with W-eigenvalue s.
inline ModeQuadratic mode_quadratic(Complex s, const ModelParams& p) {
    p.require_decreasing_returns();
    if (!(std::abs(s) < 1.0)) throw ConfigError("mode quadratic requires |s| < 1");
    return detail::mode_quadratic_unchecked(s, p);
}

struct RootPair {
    Complex r1, r2;          // |r1| >= |r2| unless degenerate
    bool degenerate = false; // A2 = 0: r2 is infinite

    double max_modulus() const { return degenerate ? std::numeric_limits<double>::infinity() : std::abs(r1); }
};

/// Roots of the mode quadratic without cancellation: the larger root from the
/// quadratic formula with the non-cancelling sign, the other from the product.
inline RootPair mode_roots(const ModeQuadratic& m) {
    RootPair r;
    if (m.A2 == Complex(0.0)) {
        r.degenerate = true;
        r.r1 = m.A1 == Complex(0.0) ? Complex(std::numeric_limits<double>::quiet_NaN()) : -m.A0 / m.A1;
        r.r2 = Complex(std::numeric_limits<double>::infinity());
        return r;
    }
    Complex d = std::sqrt(m.A1 * m.A1 - 4.0 * m.A2 * m.A0);
    if (std::real(std::conj(m.A1) * d) < 0.0) d = -d;
    const Complex big = -0.5 * (m.A1 + d);
    if (big == Complex(0.0)) {
        r.r1 = r.r2 = Complex(0.0);
        return r;
    }
    r.r1 = big / m.A2;
    r.r2 = m.A0 / big;
    if (std::abs(r.r2) > std::abs(r.r1)) std::swap(r.r1, r.r2);
    return r;
}

// ---------------------------------------------------------------------------
// Reports

enum class StabilityMethod { mode_quadratic, state_space };

inline const char* to_string(StabilityMethod m) {
    return m == StabilityMethod::mode_quadratic ? "mode_quadratic" : "state_space";
}

struct ModeEntry {
    Complex s;
    RootPair roots;
    double max_mod = 0.0;
};

struct StabilityReport {
    std::vector<ModeEntry> per_mode;  // mode_quadratic method
    std::vector<Complex> spectrum;    // state_space method, gauge direction removed
    double max_growth = 0.0;          // over non-uniform modes (modal) or the whole reduced map
    double uniform_multiplier = 0.0;
    Complex dominant_root;
    bool stable = false;
    StabilityMethod method = StabilityMethod::mode_quadratic;
    bool degenerate_unit_modes = false;  // non-uniform eigenvectors with |s| = 1

    /// Largest modulus including the uniform mode.
    double spectral_radius() const {
        return method == StabilityMethod::mode_quadratic ? std::max(max_growth, uniform_multiplier) : max_growth;
    }
};

namespace detail {
/// Eigenvalues of a normal network other than the uniform one (the one closest to 1).
inline std::vector<Complex> non_uniform_spectrum(const IONetwork& net) {
    const CVector& all = net.eigenvalues();
    std::vector<Complex> ev(all.data(), all.data() + all.size());
    if (ev.empty()) return ev;
    auto it = std::min_element(ev.begin(), ev.end(),
                               [](Complex x, Complex y) { return std::abs(x - 1.0) < std::abs(y - 1.0); });
    ev.erase(it);
    return ev;
}

/// Dominant root over the given modes; `degenerate` flags |s| = 1 modes.
inline Complex modal_dominant(const std::vector<Complex>& spectrum, const ModelParams& p, bool* degenerate,
                              std::vector<ModeEntry>* entries) {
    Complex best(0.0);
    double best_mod = -1.0;
    for (Complex s : spectrum) {
        const bool unit = std::abs(s) >= 1.0 - 1e-9;
        if (unit && degenerate) *degenerate = true;
        const RootPair r = mode_roots(mode_quadratic_unchecked(unit ? s / std::abs(s) : s, p));
        const double m = r.max_modulus();
        if (entries) entries->push_back({s, r, m});
        if (m > best_mod) {
            best_mod = m;
            best = r.r1;
        }
    }
    return best;
}
}  // namespace detail

/// Modal stability analysis; valid for normal networks only.
inline StabilityReport max_growth_rate_modal(const IONetwork& net, const ModelParams& params) {
    params.validate();
    params.require_decreasing_returns();
    detail::require_unit_beta0(params);
    if (!is_normal(net)) throw ConfigError("modal analysis requires a normal network; use the state-space method");
    StabilityReport rep;
    rep.method = StabilityMethod::mode_quadratic;
    rep.uniform_multiplier = detail::uniform_multiplier_value(params);
    const auto spec = detail::non_uniform_spectrum(net);
    rep.dominant_root = detail::modal_dominant(spec, params, &rep.degenerate_unit_modes, &rep.per_mode);
    rep.max_growth = spec.empty() ? 0.0 : std::abs(rep.dominant_root);
    if (spec.empty()) rep.dominant_root = Complex(rep.uniform_multiplier);
    rep.stable = rep.max_growth < 1.0 && rep.uniform_multiplier < 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// State-space map

struct StateSpaceMap {
    Matrix M;        // full one-step map on the state
    Matrix noise;    // state response to the log-productivity shock
    Matrix basis;    // orthonormal basis of the subspace kept for eigen-analysis
    Matrix reduced;  // basis^T M basis
    ClearingTiming variant = ClearingTiming::simultaneous;
    int n = 0;       // number of sectors; the state is (xi, pi_prev[, omega_prev])
};

namespace detail {
/// Orthonormal basis of the complement of unit vector u (columns).
inline Matrix orthogonal_complement(const Vector& u) {
    const Eigen::Index m = u.size();
    Eigen::HouseholderQR<Matrix> qr(u);
    const Matrix Q = qr.householderQ() * Matrix::Identity(m, m);
    return Q.rightCols(m - 1);
}
}  // namespace detail

/// One-step linear map. Simultaneous clearing: state (xi_t, pi_{t-1}), 2n; the
/// price gauge sum(pi_t) = 0 replaces one (redundant) clearing row. Lagged
/// clearing: state (xi_t, pi_{t-1}, omega_{t-1}) with omega = xi - c mu, 3n;
/// the uniform price shift is an eigenvector with eigenvalue 1 and is
/// projected out.
inline StateSpaceMap state_space_matrix(const LinearizedSystem& lin) {
    const int n = lin.n();
    const auto& p = lin.params;
    const double a = p.a, b = p.b, c = p.c(), gam = p.gamma;
    const double g = gam * b / (1.0 - b);
    const Matrix I = Matrix::Identity(n, n);
    const Matrix Q = p.q * I - p.inflation_q() * lin.J0;
    const bool lagged = lin.variant == ClearingTiming::lagged;
    const int ns = lagged ? 3 * n : 2 * n;

    // Unknowns y = (mu_t, pi_t, xi_{t+1}).
    Matrix A = Matrix::Zero(3 * n, 3 * n);
    Matrix K = Matrix::Zero(3 * n, ns);
    Matrix E = Matrix::Zero(3 * n, n);
    // Labor/multiplier relation.
    A.block(0, 0, n, n) = I - a * lin.J1;
    A.block(0, n, n, n) = -(1.0 - a) * lin.net.w();
    A.block(0, 2 * n, n, n) = -((1.0 - b) / b * I + a * lin.J1);
    E.block(0, 0, n, n) = -(1.0 / b) * I;
    // Production adjustment.
    A.block(n, 0, n, n) = g * I;
    A.block(n, n, n, n) = -g * (I + Q);
    A.block(n, 2 * n, n, n) = (1.0 - gam) * I;
    K.block(n, 0, n, n) = (1.0 - gam) * I;
    K.block(n, n, n, n) = -g * Q;
    // Goods-market clearing.
    if (!lagged) {
        A.block(2 * n, n, n, n) = I - lin.J2;
        A.block(2 * n, 0, n, n) = -c * (lin.W_tilde - lin.J2);
        A.block(2 * n, 2 * n, n, n) = -c * (lin.W_tilde - lin.J2);
        K.block(2 * n, 0, n, n) = -(I - lin.J2);
        // The clearing rows are dependent (weights V_eq); swap the last for the gauge.
        A.row(3 * n - 1).setZero();
        A.block(3 * n - 1, n, 1, n).setOnes();
        K.row(3 * n - 1).setZero();
    } else {
        A.block(2 * n, n, n, n) = I;
        A.block(2 * n, 0, n, n) = -c * lin.W_tilde;
        A.block(2 * n, 2 * n, n, n) = -c * lin.W_tilde;
        K.block(2 * n, 0, n, n) = -I - c * lin.J2;
        K.block(2 * n, n, n, n) = lin.J2;
        K.block(2 * n, 2 * n, n, n) = lin.J2;
    }

    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) throw NumericalError("linearized clearing system is singular");
    const Matrix Y = lu.solve(K);
    const Matrix YE = lu.solve(E);

    StateSpaceMap out;
    out.variant = lin.variant;
    out.n = n;
    out.M = Matrix::Zero(ns, ns);
    out.noise = Matrix::Zero(ns, n);
    out.M.topRows(n) = Y.middleRows(2 * n, n);
    out.M.middleRows(n, n) = Y.middleRows(n, n);
    out.noise.topRows(n) = YE.middleRows(2 * n, n);
    out.noise.middleRows(n, n) = YE.middleRows(n, n);

    Vector gauge = Vector::Zero(ns);
    if (!lagged) {
        gauge.segment(n, n).setConstant(1.0);
    } else {
        out.M.bottomRows(n) = -c * Y.topRows(n);
        out.M.block(2 * n, 0, n, n) += I;
        out.noise.bottomRows(n) = -c * YE.topRows(n);
        gauge.segment(n, n).setConstant(1.0);
        gauge.segment(2 * n, n).setConstant(-c);
    }
    gauge.normalize();
    out.basis = detail::orthogonal_complement(gauge);
    out.reduced = out.basis.transpose() * out.M * out.basis;
    return out;
}

/// Eigenvalues of the reduced map, sorted by decreasing modulus.
inline std::vector<Complex> state_space_spectrum(const StateSpaceMap& map) {
    Eigen::EigenSolver<Matrix> es(map.reduced, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation did not converge");
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::stable_sort(ev.begin(), ev.end(), [](Complex x, Complex y) { return std::abs(x) > std::abs(y); });
    return ev;
}

inline StabilityReport max_growth_rate_state_space(const LinearizedSystem& lin) {
    StabilityReport rep;
    rep.method = StabilityMethod::state_space;
    rep.uniform_multiplier = lin.variant == ClearingTiming::simultaneous
                                 ? detail::uniform_multiplier_value(lin.params)
                                 : std::numeric_limits<double>::quiet_NaN();
    rep.spectrum = state_space_spectrum(state_space_matrix(lin));
    rep.dominant_root = rep.spectrum.empty() ? Complex(0.0) : rep.spectrum.front();
    rep.max_growth = std::abs(rep.dominant_root);
    rep.stable = rep.max_growth < 1.0 && !(rep.uniform_multiplier >= 1.0);
    return rep;
}

/// Modal analysis for normal networks, state-space otherwise.
inline StabilityReport stability_report(const IONetwork& net, const ModelParams& params,
                                        ClearingTiming variant = ClearingTiming::simultaneous,
                                        std::optional<StabilityMethod> force = std::nullopt) {
    const StabilityMethod m = force.value_or((variant == ClearingTiming::simultaneous && is_normal(net))
                                                 ? StabilityMethod::mode_quadratic
                                                 : StabilityMethod::state_space);
    if (m == StabilityMethod::mode_quadratic) {
        if (variant != ClearingTiming::simultaneous)
            throw ConfigError("modal analysis covers simultaneous clearing only");
        return max_growth_rate_modal(net, params);
    }
    return max_growth_rate_state_space(build_linearized(net, params, variant));
}

/// Stationary covariance P = M P M^T + G G^T by the doubling iteration.
inline Matrix stationary_covariance(const Matrix& M, const Matrix& G, int max_doublings = 60) {
    Matrix A = M;
    Matrix P = G * G.transpose();
    for (int k = 0; k < max_doublings; ++k) {
        const Matrix inc = A * P * A.transpose();
        P += inc;
        if (detail::max_abs(inc) <= 1e-15 * detail::max_abs(P)) return P;
        A = A * A;
        if (!A.allFinite() || detail::max_abs(A) > 1e150) break;
    }
    throw NumericalError("stationary covariance does not exist (unstable map)");
}

/// Linear prediction for the std of the flat aggregate n^{-1} sum(xi) under
/// i.i.d. shocks of std sigma in every sector.
inline double linear_aggregate_std(const LinearizedSystem& lin, double sigma) {
    const StateSpaceMap map = state_space_matrix(lin);
    const int n = lin.n();
    const Matrix P = stationary_covariance(map.M, sigma * map.noise);
    const Vector w = Vector::Constant(n, 1.0 / n);
    return std::sqrt(std::max(0.0, w.dot(P.topLeftCorner(n, n) * w)));
}

// ---------------------------------------------------------------------------
// Critical line

enum class BifurcationKind { none, real_minus_one, real_plus_one, complex_pair };

inline const char* to_string(BifurcationKind k) {
    switch (k) {
        case BifurcationKind::real_minus_one: return "real_minus_one";
        case BifurcationKind::real_plus_one: return "real_plus_one";
        case BifurcationKind::complex_pair: return "complex_pair";
        default: return "none";
    }
}

struct CriticalGammaOptions {
    double gamma_step = 1e-3;
    double tolerance = 1e-10;  // on | max|alpha| - 1 |
    ClearingTiming variant = ClearingTiming::simultaneous;
    std::optional<StabilityMethod> method;
};

struct CriticalPoint {
    double q = 0.0;
    std::optional<double> gamma_c;
    BifurcationKind kind = BifurcationKind::none;
    Complex root;           // dominant root at gamma_c
    int crossings = 0;      // sign changes of max|alpha| - 1 on the grid
    double growth_below = std::numeric_limits<double>::quiet_NaN();  // at gamma_c - 1e-6
    double growth_above = std::numeric_limits<double>::quiet_NaN();  // at gamma_c + 1e-6
};

/// Evaluates the dominant root as a function of gamma, reusing what does not
/// depend on gamma.
class GrowthFunction {
public:
    GrowthFunction(const IONetwork& net, ModelParams params, ClearingTiming variant,
                   std::optional<StabilityMethod> method)
        : net_(net), params_(params), variant_(variant) {
        params_.validate();
        params_.require_decreasing_returns();
        detail::require_unit_beta0(params_);
        method_ = method.value_or((variant == ClearingTiming::simultaneous && is_normal(net))
                                      ? StabilityMethod::mode_quadratic
                                      : StabilityMethod::state_space);
        if (method_ == StabilityMethod::mode_quadratic) {
            if (!is_normal(net)) throw ConfigError("modal analysis requires a normal network");
            spectrum_ = detail::non_uniform_spectrum(net);
        } else {
            eq_ = solve_equilibrium(net, params_);
        }
    }

    StabilityMethod method() const { return method_; }

    Complex dominant(double gamma) const {
        ModelParams p = params_;
        p.gamma = gamma;
        if (method_ == StabilityMethod::mode_quadratic) {
            Complex best = detail::modal_dominant(spectrum_, p, nullptr, nullptr);
            if (spectrum_.empty() || detail::uniform_multiplier_value(p) > std::abs(best))
                best = detail::uniform_multiplier_value(p);
            return best;
        }
        const auto spec = state_space_spectrum(state_space_matrix(build_linearized(net_, p, eq_, variant_)));
        return spec.empty() ? Complex(0.0) : spec.front();
    }
    double operator()(double gamma) const { return std::abs(dominant(gamma)); }

private:
    const IONetwork& net_;
    ModelParams params_;
    ClearingTiming variant_;
    StabilityMethod method_;
    std::vector<Complex> spectrum_;
    EquilibriumState eq_;
};

/// Smallest gamma in (0, 1] at which the dominant root crosses the unit circle
/// from inside, by grid scan and bisection.
inline CriticalPoint critical_gamma(const IONetwork& net, ModelParams params, double q,
                                    const CriticalGammaOptions& opts = {}) {
    if (!(opts.gamma_step > 0.0 && opts.gamma_step < 1.0)) throw ConfigError("gamma step must lie in (0, 1)");
    const bool tie_q0 = !params.q0.has_value() || *params.q0 == params.q;
    params.q = q;
    if (tie_q0) params.q0.reset();
    const GrowthFunction growth(net, params, opts.variant, opts.method);
    auto f = [&](double g) { return growth(g) - 1.0; };

    CriticalPoint out;
    out.q = q;
    const int steps = static_cast<int>(std::ceil(1.0 / opts.gamma_step - 1e-9));
    double lo = 0.0, hi = 0.0;
    bool found = false;
    double g_prev = opts.gamma_step, f_prev = f(g_prev);
    for (int k = 2; k <= steps; ++k) {
        const double g = std::min(1.0, k * opts.gamma_step);
        const double fg = f(g);
        if ((f_prev < 0.0) != (fg < 0.0)) {
            ++out.crossings;
            if (!found && f_prev < 0.0) {
                lo = g_prev;
                hi = g;
                found = true;
            }
        }
        g_prev = g;
        f_prev = fg;
    }
    if (!found) return out;

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < opts.tolerance || hi - lo < 1e-15) break;
        (fm < 0.0 ? lo : hi) = mid;
    }
    out.gamma_c = mid;
    out.root = growth.dominant(mid);
    if (std::abs(out.root.imag()) >= 1e-6)
        out.kind = BifurcationKind::complex_pair;
    else
        out.kind = out.root.real() < 0.0 ? BifurcationKind::real_minus_one : BifurcationKind::real_plus_one;
    out.growth_below = growth(mid - 1e-6);
    out.growth_above = growth(mid + 1e-6);
    return out;
}

/// Closed-form real-root crossing (alpha = -1) for a real mode s:
///   (1-g)/g = [2b - 1 - c^2 s^2 + 2q(b + c s)] / [2(1-b)(1 - b(1-a)^2 s^2)],
/// defined only when the right side is positive.
inline std::optional<double> critical_gamma_closed_form(double q, double s, double a, double b) {
    const double c = b * (1.0 - a);
    const double num = 2.0 * b - 1.0 - c * c * s * s + 2.0 * q * (b + c * s);
    const double den = 2.0 * (1.0 - b) * (1.0 - b * (1.0 - a) * (1.0 - a) * s * s);
    if (!(den > 0.0)) return std::nullopt;
    const double r = num / den;
    if (!(r > 0.0)) return std::nullopt;
    return 1.0 / (1.0 + r);
}

/// Leading behavior of the closed form as b -> 1:
///   2 (1 - (1-a) s)(1-b) / (2q + 1 - (1-a) s).
inline std::optional<double> critical_gamma_b_to_1(double q, double s, double a, double b) {
    const double u = 1.0 - (1.0 - a) * s;
    const double den = 2.0 * q + u;
    if (!(den > 0.0)) return std::nullopt;
    return 2.0 * u * (1.0 - b) / den;
}

/// Rotation angle of the complex pair at the q = -1 crossing as b -> 1.
inline double hopf_angle(double s, double a) {
    const double u = 1.0 - (1.0 - a) * s;
    const double cth = 0.5 * u * u;
    if (!(cth <= 1.0 + 1e-12)) throw ConfigError("hopf angle undefined: |cos| > 1");
    return std::acos(std::min(cth, 1.0));
}

// ---------------------------------------------------------------------------
// CSV

inline void write_critical_line_csv(std::ostream& os, const std::vector<CriticalPoint>& line) {
    os << "q,gamma_c,kind,max_root_re,max_root_im\n";
    for (const auto& pt : line) {
        os << format_double(pt.q) << ',';
        if (pt.gamma_c)
            os << format_double(*pt.gamma_c) << ',' << to_string(pt.kind) << ',' << format_double(pt.root.real())
               << ',' << format_double(pt.root.imag()) << '\n';
        else
            os << ",none,,\n";
    }
}

inline void write_stability_report_csv(std::ostream& os, const StabilityReport& rep) {
    os << "s_re,s_im,alpha1_re,alpha1_im,alpha2_re,alpha2_im,max_mod\n";
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(std::isnan(v) ? "nan" : "inf"); };
    if (rep.method == StabilityMethod::mode_quadratic) {
        for (const auto& m : rep.per_mode)
            os << num(m.s.real()) << ',' << num(m.s.imag()) << ',' << num(m.roots.r1.real()) << ','
               << num(m.roots.r1.imag()) << ',' << num(m.roots.r2.real()) << ',' << num(m.roots.r2.imag()) << ','
               << num(m.max_mod) << '\n';
    } else {
        // No mode label: each eigenvalue of the map is reported as its own row.
        for (Complex e : rep.spectrum)
            os << ",," << num(e.real()) << ',' << num(e.imag()) << ",,," << num(std::abs(e)) << '\n';
    }
}

}  // namespace iodyn
