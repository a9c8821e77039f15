// Prints the critical line gamma_c(q) for a random network next to the
// uniform-network closed form at s = 0.

#include <iodyn/iodyn.hpp>

#include <cstdio>

using namespace iodyn;

int main() {
    const IONetwork net = build_random_exponential_network(20, 7);
    ModelParams p;
    CriticalGammaOptions o;
    o.gamma_step = 0.01;
    std::puts("q       gamma_c(random)  gamma_c(s=0)  kind");
    for (double q = -1.0; q <= 1.0 + 1e-12; q += 0.25) {
        const CriticalPoint cp = critical_gamma(net, p, q, o);
        const auto closed = critical_gamma_closed_form(q, 0.0, p.a, p.b);
        std::printf("%+5.2f   %-15s  %-12s  %s\n", q, cp.gamma_c ? std::to_string(*cp.gamma_c).c_str() : "-",
                    closed ? std::to_string(*closed).c_str() : "-", to_string(cp.kind));
    }
}
