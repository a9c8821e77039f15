#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "error.hpp"

namespace iodyn {

/// Scalar model constants.
struct ModelParams {
    double a = 0.5;       // labor share
    double b = 0.9;       // returns to scale
    double q = -1.0;      // price-trend extrapolation in forecasts
    std::optional<double> q0;  // inflation extrapolation in the discount factor; defaults to q
    double gamma = 0.1;   // production adjustment speed
    double beta0 = 1.0;   // base discount factor
    double sigma = 0.0;   // std of i.i.d. log-productivity shocks

    double inflation_q() const { return q0.value_or(q); }
    /// Intermediate-input elasticity b(1-a).
    double c() const { return b * (1.0 - a); }

    void validate() const {
        auto bad = [](const std::string& m) { throw ConfigError(m); };
        if (!(a >= 0.0 && a <= 1.0)) bad("parameter a must lie in [0, 1]");
        if (!(b > 0.0 && b <= 1.0)) bad("parameter b must lie in (0, 1]");
        if (!(q >= -1.0 && q <= 1.0)) bad("parameter q must lie in [-1, 1]");
        if (!std::isfinite(inflation_q())) bad("parameter q0 must be finite");
        if (!(gamma > 0.0 && gamma <= 1.0)) bad("parameter gamma must lie in (0, 1]");
        if (!(beta0 > 0.0) || !std::isfinite(beta0)) bad("parameter beta0 must be positive");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("parameter sigma must be nonnegative");
    }

    /// The optimal-production problem only has a solution for decreasing returns.
    void require_decreasing_returns() const {
        if (!(b < 1.0)) throw ConfigError("requires b < 1 (decreasing returns to scale)");
    }
};

}  // namespace iodyn
