#pragma once

// Observables over simulated trajectories and the replica sweep runner.

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hash.hpp"
#include "network.hpp"
#include "params.hpp"
#include "simulator.hpp"
#include "stability.hpp"

namespace iodyn {

enum class Weighting { flat_log, equilibrium_price };

/// flat_log: n^{-1} sum_i xi_i(t).  equilibrium_price: sum_i x_t[i] p_eq[i].
inline std::vector<double> aggregate_output(const Trajectory& traj, Weighting w = Weighting::flat_log) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& r : traj.rows) out.push_back(w == Weighting::flat_log ? r.mean_xi : r.aggregate_output);
    return out;
}

namespace detail {
inline std::vector<double> window(const std::vector<double>& series, int burn_in, std::size_t min_len) {
    if (burn_in < 0) throw ConfigError("burn_in must be nonnegative");
    if (series.size() < static_cast<std::size_t>(burn_in) + min_len)
        throw ConfigError("series too short: need " + std::to_string(min_len) + " samples after burn-in");
    return {series.begin() + burn_in, series.end()};
}

inline double population_std(const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}
}  // namespace detail

/// Standard deviation of the series over t >= burn_in.
inline double volatility(const std::vector<double>& series, int burn_in) {
    return detail::population_std(detail::window(series, burn_in, 101));
}

/// Standard deviation of the first differences over t >= burn_in.
inline double volatility_diff(const std::vector<double>& series, int burn_in) {
    const auto x = detail::window(series, burn_in, 102);
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) d[i - 1] = x[i] - x[i - 1];
    return detail::population_std(d);
}

struct CorrelationStats {
    double value = 0.0;     // mean |corr| over pairs of non-constant sectors
    int excluded = 0;       // sectors with zero variance
    long long pairs = 0;
};

inline CorrelationStats avg_abs_correlation(const Trajectory& traj, int burn_in) {
    if (traj.rows.empty() || traj.rows.front().xi.size() == 0)
        throw ConfigError("correlations need per-sector data");
    if (burn_in < 0 || static_cast<std::size_t>(burn_in) + 2 > traj.size())
        throw ConfigError("series too short for correlations");
    const int n = static_cast<int>(traj.rows.front().xi.size());
    const int T = static_cast<int>(traj.size()) - burn_in;
    Matrix Z(n, T);
    for (int t = 0; t < T; ++t) Z.col(t) = traj.rows[static_cast<std::size_t>(burn_in + t)].xi;
    const Vector scale = Z.cwiseAbs().rowwise().maxCoeff();
    Z.colwise() -= Z.rowwise().mean();
    const Vector sd = Z.rowwise().norm();
    CorrelationStats st;
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        // Constant up to rounding counts as zero variance.
        if (sd[i] > 1e-12 * scale[i] * std::sqrt(static_cast<double>(T)))
            keep.push_back(i);
        else
            ++st.excluded;
    }
    Matrix Y(static_cast<Eigen::Index>(keep.size()), T);
    for (std::size_t k = 0; k < keep.size(); ++k) Y.row(static_cast<Eigen::Index>(k)) = Z.row(keep[k]) / sd[keep[k]];
    const Matrix C = Y * Y.transpose();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        for (Eigen::Index j = i + 1; j < C.cols(); ++j) {
            sum += std::min(1.0, std::abs(C(i, j)));
            ++st.pairs;
        }
    st.value = st.pairs ? sum / static_cast<double>(st.pairs) : 0.0;
    return st;
}

struct ConsumptionSeries {
    std::vector<double> real;         // sum_i M_t / (n p_t[i])
    std::vector<double> log_utility;  // sum_i log(M_t / (n p_t[i]))
    int nonpositive_wealth = 0;       // flagged steps (NaN entries)
};

inline ConsumptionSeries consumption_series(const Trajectory& traj) {
    ConsumptionSeries c;
    c.real.reserve(traj.size());
    c.log_utility.reserve(traj.size());
    for (const auto& r : traj.rows) {
        c.real.push_back(r.consumption_real);
        c.log_utility.push_back(r.log_utility);
        if (!(r.wealth > 0.0)) ++c.nonpositive_wealth;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Spectrum

struct Periodogram {
    std::vector<double> frequency;  // cycles per step, bins 1..M/2
    std::vector<double> power;
    int samples = 0;
};

/// Hann-tapered periodogram of the mean-removed series after burn-in.
inline Periodogram periodogram(const std::vector<double>& series, int burn_in, std::size_t min_len = 16) {
    auto x = detail::window(series, burn_in, min_len);
    const std::size_t M = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(M);
    const double pi = std::acos(-1.0);
    for (std::size_t t = 0; t < M; ++t) x[t] = (x[t] - mean) * (0.5 - 0.5 * std::cos(2.0 * pi * t / (M - 1.0)));
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> X;
    fft.fwd(X, x);
    Periodogram p;
    p.samples = static_cast<int>(M);
    for (std::size_t k = 1; k <= M / 2; ++k) {
        p.frequency.push_back(static_cast<double>(k) / static_cast<double>(M));
        p.power.push_back(std::norm(X[k]) / static_cast<double>(M));
    }
    return p;
}

struct PeriodOptions {
    std::size_t min_samples = 2048;
    /// A peak counts only if its power exceeds this multiple of the mean
    /// power; default (nullopt) is 4 ln(M).
    std::optional<double> prominence_threshold;
};

struct PeriodEstimate {
    std::optional<double> period;  // absent when no prominent peak exists
    double frequency = 0.0;        // refined peak frequency (cycles per step)
    double prominence = 0.0;       // peak power / mean power
    int bin = 0;
    std::string diagnostic;
};

/// Period of the largest nonzero-frequency periodogram peak, refined by a
/// parabola through the log-power of the three bins around it.
inline PeriodEstimate dominant_period(const std::vector<double>& series, int burn_in, const PeriodOptions& opts = {}) {
    const Periodogram pg = periodogram(series, burn_in, opts.min_samples);
    PeriodEstimate est;
    const auto& P = pg.power;
    const double mean = std::accumulate(P.begin(), P.end(), 0.0) / static_cast<double>(P.size());
    if (!(mean > 0.0)) {
        est.diagnostic = "flat series";
        return est;
    }
    const std::size_t k = static_cast<std::size_t>(std::max_element(P.begin(), P.end()) - P.begin());
    est.bin = static_cast<int>(k) + 1;
    est.prominence = P[k] / mean;
    double delta = 0.0;
    if (k > 0 && k + 1 < P.size() && P[k - 1] > 0.0 && P[k + 1] > 0.0) {
        const double l = std::log(P[k - 1]), c = std::log(P[k]), r = std::log(P[k + 1]);
        const double den = l - 2.0 * c + r;
        if (den < 0.0) delta = std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
    }
    est.frequency = (static_cast<double>(est.bin) + delta) / static_cast<double>(pg.samples);
    const double threshold = opts.prominence_threshold.value_or(4.0 * std::log(static_cast<double>(pg.samples)));
    if (est.prominence < threshold) {
        est.diagnostic = "no prominent peak (prominence " + format_double(est.prominence) + " < " +
                         format_double(threshold) + ")";
        return est;
    }
    est.period = 1.0 / est.frequency;
    return est;
}

inline void write_periodogram_csv(std::ostream& os, const Periodogram& pg) {
    os << "frequency,period,power\n";
    for (std::size_t k = 0; k < pg.power.size(); ++k)
        os << format_double(pg.frequency[k]) << ',' << format_double(1.0 / pg.frequency[k]) << ','
           << format_double(pg.power[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Burn-in

/// max(1000, 20 / (1 - max|alpha|)) for a linearly stable equilibrium, 1000
/// otherwise; capped at `cap`.
inline int auto_burn_in(const IONetwork& net, const ModelParams& params, int cap) {
    int burn = 1000;
    if (std::abs(params.beta0 - 1.0) <= 1e-15 && params.b < 1.0) {
        const double rho = stability_report(net, params).spectral_radius();
        if (rho < 1.0) burn = static_cast<int>(std::min(1e9, std::max(1000.0, std::ceil(20.0 / (1.0 - rho)))));
    }
    return std::min(burn, cap);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { gamma, sigma, n };
enum class SweepStatistic { volatility, volatility_diff, correlation, mean_output, mean_consumption, dominant_period };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::gamma: return "gamma";
        case SweepAxis::sigma: return "sigma";
        default: return "n";
    }
}

inline const char* to_string(SweepStatistic s) {
    switch (s) {
        case SweepStatistic::volatility: return "volatility";
        case SweepStatistic::volatility_diff: return "volatility_diff";
        case SweepStatistic::correlation: return "correlation";
        case SweepStatistic::mean_output: return "mean_output";
        case SweepStatistic::mean_consumption: return "mean_consumption";
        default: return "dominant_period";
    }
}

struct SweepBase {
    NetworkSpec network;
    ModelParams params;
    SimulationOptions sim;      // sim.record_sectors is forced on for correlations
    bool auto_burn_in = false;  // recompute the burn-in per cell
};

struct SweepPoint {
    double value = 0.0;
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double std_err = std::numeric_limits<double>::quiet_NaN();
    int replicas = 0;          // successful replicas
    int failed_count = 0;
    double mean_output = std::numeric_limits<double>::quiet_NaN();       // time-mean Y / Y_eq
    double mean_consumption = std::numeric_limits<double>::quiet_NaN();  // time-mean C / C_eq
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> failures;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::gamma;
    SweepStatistic statistic = SweepStatistic::volatility;
    std::vector<SweepPoint> points;
};

/// Outcome of one (value, seed) simulation.
struct ReplicaOutcome {
    bool ok = false;
    double statistic = 0.0, mean_output = 0.0, mean_consumption = 0.0;
    std::string error;
};

namespace detail {
inline double time_mean(const std::vector<double>& x, int burn_in) {
    double s = 0.0;
    int k = 0;
    for (std::size_t t = static_cast<std::size_t>(burn_in); t < x.size(); ++t)
        if (std::isfinite(x[t])) {
            s += x[t];
            ++k;
        }
    return k ? s / k : std::numeric_limits<double>::quiet_NaN();
}

inline ReplicaOutcome run_replica(const SweepBase& base, SweepAxis axis, double value, SweepStatistic stat,
                                  std::uint64_t seed) {
    ReplicaOutcome out;
    try {
        NetworkSpec ns = base.network;
        ModelParams p = base.params;
        SimulationOptions so = base.sim;
        switch (axis) {
            case SweepAxis::gamma: p.gamma = value; break;
            case SweepAxis::sigma: p.sigma = value; break;
            case SweepAxis::n: ns.n = static_cast<int>(std::lround(value)); break;
        }
        so.record_sectors = stat == SweepStatistic::correlation;
        const IONetwork net = make_network(ns);
        if (base.auto_burn_in) so.burn_in = auto_burn_in(net, p, so.steps / 2);
        const Trajectory tr = simulate(net, p, NoiseProcess(p.sigma, seed), so);
        const auto flat = aggregate_output(tr, Weighting::flat_log);
        const auto Y = aggregate_output(tr, Weighting::equilibrium_price);
        const auto C = consumption_series(tr).real;
        out.mean_output = time_mean(Y, so.burn_in) / tr.eq_aggregate_output;
        out.mean_consumption = time_mean(C, so.burn_in) / tr.eq_consumption_real;
        switch (stat) {
            case SweepStatistic::volatility: out.statistic = volatility(flat, so.burn_in); break;
            case SweepStatistic::volatility_diff: out.statistic = volatility_diff(flat, so.burn_in); break;
            case SweepStatistic::correlation: out.statistic = avg_abs_correlation(tr, so.burn_in).value; break;
            case SweepStatistic::mean_output: out.statistic = out.mean_output; break;
            case SweepStatistic::mean_consumption: out.statistic = out.mean_consumption; break;
            case SweepStatistic::dominant_period: {
                const auto est = dominant_period(flat, so.burn_in);
                out.statistic = est.period.value_or(std::numeric_limits<double>::quiet_NaN());
                break;
            }
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

/// Runs tasks 0..count-1 on up to `jobs` threads; results land at their index.
template <class Task>
void parallel_for(std::size_t count, int jobs, Task&& task) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        }));
    for (auto& f : pool) f.get();
}
}  // namespace detail

/// Runs every (value, seed) cell, `jobs` at a time; cells fail independently.
/// Results depend only on (base, values, seeds), not on scheduling.
inline SweepResult run_sweep(const SweepBase& base, SweepAxis axis, const std::vector<double>& values,
                             const std::vector<std::uint64_t>& seeds, SweepStatistic stat = SweepStatistic::volatility,
                             int jobs = 1) {
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    const std::size_t R = seeds.size();
    std::vector<ReplicaOutcome> cells(values.size() * R);
    detail::parallel_for(cells.size(), jobs, [&](std::size_t i) {
        cells[i] = detail::run_replica(base, axis, values[i / R], stat, seeds[i % R]);
    });

    SweepResult res;
    res.axis = axis;
    res.statistic = stat;
    for (std::size_t v = 0; v < values.size(); ++v) {
        SweepPoint pt;
        pt.value = values[v];
        pt.seeds = seeds;
        std::vector<double> s, yo, co;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& c = cells[v * R + r];
            if (c.ok && std::isfinite(c.statistic)) {
                s.push_back(c.statistic);
                yo.push_back(c.mean_output);
                co.push_back(c.mean_consumption);
            } else {
                ++pt.failed_count;
                pt.failures.push_back("seed " + std::to_string(seeds[r]) + ": " +
                                      (c.ok ? std::string("statistic undefined") : c.error));
            }
        }
        pt.replicas = static_cast<int>(s.size());
        auto mean = [](const std::vector<double>& x) {
            return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        };
        if (!s.empty()) {
            pt.statistic = mean(s);
            pt.mean_output = mean(yo);
            pt.mean_consumption = mean(co);
            double ss = 0.0;
            for (double x : s) ss += (x - pt.statistic) * (x - pt.statistic);
            pt.std_err = s.size() > 1 ? std::sqrt(ss / static_cast<double>(s.size() - 1) / static_cast<double>(s.size())) : 0.0;
        }
        res.points.push_back(std::move(pt));
    }
    return res;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
    os << "axis_value,statistic,std_err,replicas,failed_count,mean_output,mean_consumption,seeds\n";
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); };
    for (const auto& p : res.points) {
        std::string seeds;
        for (std::size_t i = 0; i < p.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(p.seeds[i]);
        os << num(p.value) << ',' << num(p.statistic) << ',' << num(p.std_err) << ',' << p.replicas << ','
           << p.failed_count << ',' << num(p.mean_output) << ',' << num(p.mean_consumption) << ',' << seeds << '\n';
    }
}

}  // namespace iodyn
