// Walks one economy from its equilibrium through the stability boundary:
// prints the critical adjustment speed, then simulates slightly below and
// slightly above it and reports volatility and the dominant cycle.

#include <iodyn/iodyn.hpp>

#include <cstdio>

using namespace iodyn;

int main() {
    const IONetwork net = build_plain_network(32);
    ModelParams p;
    p.q = -1.0;
    p.sigma = 1e-3;

    const EquilibriumState eq = solve_equilibrium(net, p);
    std::printf("equilibrium wage %.6f (n = %d)\n", eq.h_eq, net.n());

    const CriticalPoint cp = critical_gamma(net, p, p.q);
    if (!cp.gamma_c) {
        std::puts("no instability on (0, 1]");
        return 0;
    }
    std::printf("critical gamma %.6f via %s\n", *cp.gamma_c, to_string(cp.kind));

    for (double factor : {0.8, 1.2}) {
        p.gamma = factor * *cp.gamma_c;
        SimulationOptions o;
        o.steps = 4096 + 1000;
        o.burn_in = 1000;
        o.record_sectors = false;
        const Trajectory tr = simulate(net, p, NoiseProcess(p.sigma, 1), o);
        const auto y = aggregate_output(tr, Weighting::flat_log);
        const PeriodEstimate pe = dominant_period(y, o.burn_in);
        std::printf("gamma %.4f: max|alpha| %.4f  vol %.3e  period %s\n", p.gamma,
                    stability_report(net, p).spectral_radius(), volatility(y, o.burn_in),
                    pe.period ? std::to_string(*pe.period).c_str() : "none");
    }
}
