// Walks through the edge-versus-cloud latency question: closed-form waits
// across load, a simulated check of one point, the rush-hour penalty of a
// daily sinusoid, and the capacity the edge needs to match a pooled cloud.

#include <cstdio>
#include <numbers>

#include "edgeq/analytic.hpp"
#include "edgeq/capacity.hpp"
#include "edgeq/desim.hpp"

using namespace edgeq;

int main() {
    const network_spec net{0.001, 0.028};
    std::printf("edge site: mu=50/s, 10%% migrations; cloud: 64 pooled servers at mu=50/s\n");
    std::printf("RTT edge %.0f ms, cloud %.0f ms\n\n", net.t_edge * 1e3, net.t_cloud * 1e3);
    std::printf("%8s %12s %12s %10s\n", "lambda", "edge_ms", "cloud_ms", "winner");
    for (double lambda = 5; lambda <= 40; lambda += 5) {
        const queue_spec edge{lambda, 50, 50, 0.1};
        const cloud_spec cloud{64, 50, lambda / 50};
        const double e = net.t_edge + analytic::mm1_two_phase_wait(edge) + 1.0 / 50 +
                         analytic::migration_service_time(0.1, 50);
        const double c = net.t_cloud + analytic::mmk_cloud_wait(cloud) + 1.0 / 50;
        std::printf("%8.0f %12.3f %12.3f %10s\n", lambda, e * 1e3, c * 1e3,
                    analytic::edge_wins(net, analytic::delta_t_bound_mmk(edge, cloud)) ? "edge" : "cloud");
    }

    sim_config c;
    c.model = sim_model::two_phase_edge;
    c.edge = {20, 50, 50, 0.1};
    c.requests = 100000;
    const auto r = replicate(c, 10, {42, 0});
    const auto& w = r.summary["mean_wait"];
    std::printf("\nsimulated wait at lambda=20: %.5f s +/- %.5f (closed form %.5f)\n", w.mean, w.half_width(),
                analytic::mm1_two_phase_wait(c.edge));

    const double mu = analytic::effective_service_rate(32, 32, 0.3);
    std::printf("\nrush hour, lambda_bar=16, mu_eff=%.2f, period 500 s\n", mu);
    for (double a : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
        const sinusoid_profile p{16, a, 2 * std::numbers::pi / 500, 0};
        std::printf("  A=%.1f  backlog %8.2f jobs  rush wait %7.3f s\n", a,
                    analytic::fluid_backlog(p, mu).backlog(), analytic::rush_hour_wait(p, mu));
    }

    std::printf("\ncapacity: a 64-core cloud server needs %.0f cores per edge site at q=2, %.0f at q=4\n",
                64 * capacity::edge_overprovision_factor(2), 64 * capacity::edge_overprovision_factor(4));
    const auto caps = analytic::empirical_rule_capacities(100, 4);
    std::printf("two-sigma rule for 4 sites at 100/s: edge %.0f, cloud %.0f\n", caps.edge, caps.cloud);
    return 0;
}
