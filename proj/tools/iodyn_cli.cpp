// Command-line front end: one subcommand per analysis, CSV out.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <iodyn/iodyn.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace iodyn;

namespace {

struct Globals {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    bool per_sector = false;
};

ExperimentConfig resolve(const Globals& g) {
    ExperimentConfig c;
    if (!g.config_path.empty()) c = load_config(g.config_path);
    for (const auto& o : g.overrides) apply_override(c, o);
    if (!g.out_dir.empty()) c.output.dir = g.out_dir;
    if (g.seed) {
        c.run.seed = *g.seed;
        c.run.seeds.clear();
    }
    if (g.per_sector) c.output.per_sector = true;
    validate(c);
    return c;
}

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
    fs::create_directories(c.output.dir);
    const fs::path path = fs::path(c.output.dir) / name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    write_hash_header(os, c);
    return os;
}

IONetwork network_of(const ExperimentConfig& c) {
    std::vector<std::string> warnings;
    IONetwork net = make_network(c.network, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return net;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : "inf"); }

int burn_in_of(const ExperimentConfig& c, const IONetwork& net, const ModelParams& p) {
    return c.run.burn_in ? *c.run.burn_in : auto_burn_in(net, p, c.run.steps / 2);
}

// ---------------------------------------------------------------------------

void cmd_equilibrium(const ExperimentConfig& c) {
    const IONetwork net = network_of(c);
    const EquilibriumState eq = solve_equilibrium(net, c.params);
    const double res = equilibrium_residual(net, c.params, eq.V_eq);
    // One noiseless step from the equilibrium.
    const EconomyState s0 = equilibrium_state(eq, net, c.params);
    const EconomyState s1 = step(s0, net, c.params, eq.z_bar, Vector::Zero(net.n()));
    const double drift = std::max({(s1.p - s0.p).cwiseAbs().maxCoeff(), (s1.x - s0.x).cwiseAbs().maxCoeff(),
                                   (s1.x_next - s0.x_next).cwiseAbs().maxCoeff(), std::abs(s1.h - s0.h)});

    auto os = open_output(c, "equilibrium.csv");
    os << "# h_eq=" << format_double(eq.h_eq) << '\n'
       << "# balance_residual=" << format_double(res) << '\n'
       << "# one_step_drift=" << format_double(drift) << '\n'
       << "i,p_eq,x_eq,V_eq,S_eq\n";
    for (int i = 0; i < net.n(); ++i)
        os << i << ',' << format_double(eq.p_eq[i]) << ',' << format_double(eq.x_eq[i]) << ','
           << format_double(eq.V_eq[i]) << ',' << format_double(eq.S_eq[i]) << '\n';
    std::cout << "equilibrium: n=" << net.n() << " h_eq=" << format_double(eq.h_eq)
              << " balance_residual=" << format_double(res) << " one_step_drift=" << format_double(drift) << '\n';
}

void cmd_simulate(const ExperimentConfig& c) {
    const IONetwork net = network_of(c);
    SimulationOptions so;
    so.steps = c.run.steps;
    so.burn_in = burn_in_of(c, net, c.params);
    so.initial_kick = c.run.initial_kick;
    so.record_sectors = true;
    const std::uint64_t seed = c.replica_seeds().front();
    const Trajectory tr = simulate(net, c.params, NoiseProcess(c.params.sigma, seed), so);

    auto os = open_output(c, "trajectory.csv");
    os << "# n=" << net.n() << " seed=" << seed << " burn_in=" << so.burn_in << '\n'
       << "# eq_aggregate_output=" << format_double(tr.eq_aggregate_output)
       << " eq_consumption_real=" << format_double(tr.eq_consumption_real) << '\n'
       << "t,aggregate_output,nominal_output,mean_xi,consumption_real,log_utility,wage,price_level,newton_iters,"
          "max_residual";
    if (c.output.per_sector)
        for (int i = 1; i <= net.n(); ++i) os << ",xi_" << i;
    os << '\n';
    for (const auto& r : tr.rows) {
        os << r.t << ',' << num(r.aggregate_output) << ',' << num(r.nominal_output) << ',' << num(r.mean_xi) << ','
           << num(r.consumption_real) << ',' << num(r.log_utility) << ',' << num(r.wage) << ','
           << num(r.price_level) << ',' << r.newton_iters << ',' << num(r.max_residual);
        if (c.output.per_sector)
            for (Eigen::Index i = 0; i < r.xi.size(); ++i) os << ',' << num(r.xi[i]);
        os << '\n';
    }

    // Statistics need a minimal window; short runs still get their trajectory.
    const auto flat = aggregate_output(tr);
    const bool long_enough = flat.size() >= static_cast<std::size_t>(so.burn_in) + 102;
    if (!long_enough) std::cerr << "warning: fewer than 102 steps after burn-in; summary statistics are nan\n";
    const double vol = long_enough ? volatility(flat, so.burn_in) : NAN;
    const double vol_d = long_enough ? volatility_diff(flat, so.burn_in) : NAN;
    const double corr = long_enough ? avg_abs_correlation(tr, so.burn_in).value : NAN;
    auto summary = open_output(c, "summary.csv");
    summary << "statistic,value\n"
            << "volatility," << num(vol) << '\n'
            << "volatility_diff," << num(vol_d) << '\n'
            << "avg_abs_correlation," << num(corr) << '\n';
    std::string period = "absent";
    if (flat.size() >= static_cast<std::size_t>(so.burn_in) + 2048) {
        const auto est = dominant_period(flat, so.burn_in);
        period = est.period ? format_double(*est.period) : "absent";
        summary << "dominant_period," << (est.period ? num(*est.period) : "nan") << '\n'
                << "period_prominence," << num(est.prominence) << '\n';
        if (c.output.periodogram) {
            auto ps = open_output(c, "periodogram.csv");
            write_periodogram_csv(ps, periodogram(flat, so.burn_in));
        }
    }
    if (tr.nonpositive_wealth_steps > 0)
        std::cerr << "warning: household wealth was nonpositive at " << tr.nonpositive_wealth_steps << " steps\n";
    std::cout << "simulate: steps=" << so.steps << " burn_in=" << so.burn_in << " volatility=" << num(vol)
              << " avg_abs_correlation=" << num(corr) << " dominant_period=" << period << '\n';
}

void cmd_stability(const ExperimentConfig& c) {
    const IONetwork net = network_of(c);
    const StabilityReport rep = stability_report(net, c.params, c.stability.variant);
    const std::string verdict = std::string(rep.stable ? "stable" : "unstable") +
                                " max|alpha|=" + num(rep.spectral_radius()) + " method=" + to_string(rep.method);
    auto os = open_output(c, "stability.csv");
    os << "# " << verdict << " uniform_multiplier=" << num(rep.uniform_multiplier)
       << (rep.degenerate_unit_modes ? " degenerate_unit_modes" : "") << '\n';
    write_stability_report_csv(os, rep);
    std::cout << verdict << '\n';
    if (rep.degenerate_unit_modes)
        std::cerr << "note: non-uniform modes with |s| = 1 were evaluated at s on the unit circle\n";
}

void cmd_phase_diagram(const ExperimentConfig& c, int jobs) {
    const IONetwork net = network_of(c);
    CriticalGammaOptions opts;
    opts.gamma_step = c.stability.gamma_step;
    opts.variant = c.stability.variant;
    const auto& grid = c.stability.q_grid;
    std::vector<CriticalPoint> line(grid.size());
    std::vector<std::string> errors(grid.size());
    (void)net.eigenvalues();  // fill the cache before workers share the network
    detail::parallel_for(grid.size(), jobs, [&](std::size_t i) {
        try {
            line[i] = critical_gamma(net, c.params, grid[i], opts);
        } catch (const std::exception& e) {
            line[i].q = grid[i];
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw NumericalError(e);
    auto os = open_output(c, "critical_line.csv");
    write_critical_line_csv(os, line);
    for (const auto& pt : line) {
        std::cout << "q=" << format_double(pt.q) << " gamma_c=" << (pt.gamma_c ? format_double(*pt.gamma_c) : "none")
                  << " kind=" << to_string(pt.kind);
        if (pt.crossings > 1) std::cout << " crossings=" << pt.crossings;
        std::cout << '\n';
    }
}

void cmd_sweep(const ExperimentConfig& c, int jobs) {
    SweepBase base;
    base.network = c.network;
    base.params = c.params;
    base.sim.steps = c.run.steps;
    base.sim.initial_kick = c.run.initial_kick;
    base.auto_burn_in = !c.run.burn_in.has_value();
    if (c.run.burn_in) base.sim.burn_in = *c.run.burn_in;
    const SweepResult res = run_sweep(base, c.sweep.axis, c.sweep.values, c.replica_seeds(), c.sweep.statistic, jobs);
    auto os = open_output(c, "sweep.csv");
    os << "# axis=" << to_string(res.axis) << " statistic=" << to_string(res.statistic) << '\n';
    write_sweep_csv(os, res);
    for (const auto& p : res.points) {
        std::cout << to_string(res.axis) << '=' << format_double(p.value) << ' ' << to_string(res.statistic) << '='
                  << num(p.statistic) << " +- " << num(p.std_err) << " (" << p.replicas << " ok, " << p.failed_count
                  << " failed)\n";
        for (const auto& f : p.failures) std::cerr << "  failed: " << f << '\n';
    }
}

void cmd_reduced(const ExperimentConfig& c) {
    const auto& r = c.reduced;
    const double a = c.params.a, b = c.params.b, sigma = r.sigma;
    const std::uint64_t seed = c.replica_seeds().front();
    auto os = open_output(c, "reduced_" + r.model + ".csv");
    auto net_for = [&](int n) {
        NetworkSpec s = c.network;
        s.n = n;
        return make_network(s);
    };

    if (r.model == "long_plosser") {
        os << "n,sigma_fast,simulated_std,std_err\n";
        for (int n : r.n_list) {
            const IONetwork net = net_for(n);
            const double pred = sigma_fast(net, a, b, Vector::Constant(1, sigma));
            const int burn = std::min(r.steps / 2, 200);
            const auto g = long_plosser_aggregate(net, a, b, sigma, r.steps, seed);
            const StdEstimate est = batch_means_std(g, burn);
            const double sim = est.value, se = est.std_err;
            os << n << ',' << num(pred) << ',' << num(sim) << ',' << num(se) << '\n';
            std::cout << "n=" << n << " sigma_fast=" << num(pred) << " simulated=" << num(sim) << " +- " << num(se)
                      << '\n';
        }
    } else if (r.model == "adiabatic") {
        os << "n,sigma_slow,sigma_fast,ratio\n";
        for (int n : r.n_list) {
            const IONetwork net = net_for(n);
            const Vector s = Vector::Constant(1, sigma);
            const double slow = sigma_slow(net, a, b, s), fast = sigma_fast(net, a, b, s);
            os << n << ',' << num(slow) << ',' << num(fast) << ',' << num(fast > 0 ? slow / fast : NAN) << '\n';
            std::cout << "n=" << n << " sigma_slow=" << num(slow) << " sigma_fast=" << num(fast) << '\n';
        }
    } else if (r.model == "transversality") {
        os << "n,predicted_growth,measured_growth,infinite\n";
        for (int n : r.n_list) {
            const IONetwork net = net_for(n);
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> N(0.0, 1.0);
            Vector s0(n);
            for (int i = 0; i < n; ++i) s0[i] = N(rng);
            s0.array() -= s0.mean();
            const auto res = transversality_blowup(net, a, b, c.params.beta0, s0, 200);
            // Slowest-growing direction sets the rate: smallest |eigenvalue| of W^T on the complement.
            double pred = std::numeric_limits<double>::infinity();
            if (!res.infinite && !res.trivial) {
                const Matrix B = ones_complement_basis(n);
                Eigen::EigenSolver<Matrix> es(B.transpose() * net.w().transpose() * B, false);
                pred = 1.0 / (c.params.beta0 * (1.0 - a) * b * es.eigenvalues().cwiseAbs().minCoeff());
            }
            os << n << ',' << num(pred) << ',' << num(res.growth) << ',' << (res.infinite ? "true" : "false") << '\n';
            std::cout << "n=" << n << " growth=" << num(res.growth) << (res.infinite ? " (one-step blow-up)" : "")
                      << '\n';
        }
    } else {  // near_instability
        if (!(sigma > 0.0)) throw ConfigError("near_instability needs reduced.sigma > 0");
        const int n = c.network.n;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> N(0.0, 1.0);
        Vector u(n);
        for (int i = 0; i < n; ++i) u[i] = N(rng);
        const auto model = make_near_instability_model(u, r.eta, Vector::Constant(1, sigma), r.rho);
        const auto st = near_instability_stats(model, r.steps, seed + 1);
        os << "# eta=" << format_double(r.eta) << " relative_frobenius_error=" << num(st.relative_frobenius_error)
           << '\n'
           << "j,k,predicted_cov,empirical_cov,predicted_corr_sign,empirical_corr\n";
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k)
                os << j << ',' << k << ',' << num(st.cov_predicted(j, k)) << ',' << num(st.cov_empirical(j, k)) << ','
                   << num(st.corr_predicted_sign(j, k)) << ',' << num(st.corr_empirical(j, k)) << '\n';
        std::cout << "near_instability: eta=" << format_double(r.eta)
                  << " relative_frobenius_error=" << num(st.relative_frobenius_error) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamics of a firm network with myopic expectations and slow production adjustment"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Configuration file (key = value lines)");
    app.add_option("--set", g.overrides, "Override a configuration key: key=value (repeatable)")->take_all();
    app.add_option("--out", g.out_dir, "Output directory (overrides output.dir)");
    app.add_option("--jobs", g.jobs, "Worker threads for sweeps and phase diagrams")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Base seed (overrides run.seed)");
    app.add_flag("--per-sector", g.per_sector, "Write per-sector columns in trajectories");
    app.fallthrough();

    auto* eq = app.add_subcommand("equilibrium", "Solve the static equilibrium");
    auto* sim = app.add_subcommand("simulate", "Simulate one trajectory");
    auto* stab = app.add_subcommand("stability", "Linear stability report");
    auto* phase = app.add_subcommand("phase-diagram", "Critical gamma over the q grid");
    auto* sweep = app.add_subcommand("sweep", "Replicated parameter sweep");
    auto* red = app.add_subcommand("reduced", "Reference linear models");
    std::string model;
    red->add_option("model", model, "long_plosser | adiabatic | transversality | near_instability");
    for (auto* s : {eq, sim, stab, phase, sweep, red}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (!model.empty()) g.overrides.push_back("reduced.model=" + model);
        const ExperimentConfig c = resolve(g);
        if (*eq) cmd_equilibrium(c);
        else if (*sim) cmd_simulate(c);
        else if (*stab) cmd_stability(c);
        else if (*phase) cmd_phase_diagram(c, g.jobs);
        else if (*sweep) cmd_sweep(c, g.jobs);
        else if (*red) cmd_reduced(c);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
