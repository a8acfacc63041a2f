#include <gtest/gtest.h>

#include <sstream>

#include "edgeq/capacity.hpp"

using namespace edgeq;

namespace {

std::vector<vm_request> toy_trace() {
    return {{"a", 0.0, 10.0, 8, 0}, {"b", 0.1, 10.0, 8, 0}, {"c", 0.2, 10.0, 2, 1}, {"d", 0.3, 10.0, 2, 1}};
}

} // namespace

TEST(Capacity, OverprovisionFactor) {
    EXPECT_EQ(capacity::edge_overprovision_factor(2), 1.5);
    EXPECT_EQ(capacity::edge_overprovision_factor(4), 1.25);
    EXPECT_NEAR(capacity::edge_overprovision_factor(1e18), 1.0, 1e-15);
    EXPECT_THROW(capacity::edge_overprovision_factor(0), domain_error);
}

TEST(Capacity, CloudEquivalentExamples) {
    EXPECT_NEAR(capacity::cloud_capacity_equivalent(1000, 0.5, 0, 2, 0.5), 666.6666666666666, 1e-9);
    EXPECT_NEAR(capacity::cloud_capacity_equivalent(96, 0.5, 0, 2, 0.5), 64.0, 1e-12);
    EXPECT_NEAR(capacity::cloud_capacity_equivalent(160, 0.5, 0, 4, 0.5), 128.0, 1e-12);
    EXPECT_THROW(capacity::cloud_capacity_equivalent(96, 0.9, 20, 2, 0.5), domain_error);
    EXPECT_THROW(capacity::cloud_capacity_equivalent(96, 0.5, 0, 2, 1.0), domain_error);
}

TEST(Capacity, DtrpEdgeAndEquivalentCloudAgree) {
    const dtrp_spec edge{96, 0.5, 0.0, 2, 1.0, 1.0, 1.0};
    EXPECT_NEAR(capacity::dtrp_response_time(edge, 3.0),
                capacity::dtrp_response_time({64, 0.5, 0.0, 2, 1.0, 1.0, 1.0}, 3.0, capacity::dtrp_mode::cloud),
                1e-12);
    const dtrp_spec wide{96, 0.5, 0.0, 1e300, 1.0, 1.0, 1.0};
    EXPECT_NEAR(capacity::dtrp_response_time(wide, 3.0),
                capacity::dtrp_response_time(wide, 3.0, capacity::dtrp_mode::cloud), 1e-15);
    EXPECT_NEAR(capacity::geometric_tau(10, 2, 4, 5), 2.0, 1e-15);
}

TEST(Trace, ReadsSortsAndRejects) {
    std::istringstream ok("vm_id,arrival_s,lifetime_s,cores\nx,2,1,4\ny,0.5,1,2\nz,1,3,8\n");
    const auto t = read_vm_trace(ok);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].id, "y");
    EXPECT_EQ(t[1].id, "z");
    EXPECT_EQ(t[2].id, "x");

    std::istringstream bad("vm_id,arrival_s,lifetime_s,cores\nx,2,1,4\ny,zero,1,2\n");
    try {
        read_vm_trace(bad);
        FAIL() << "malformed row accepted";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream empty("vm_id,arrival_s,lifetime_s,cores\n");
    EXPECT_THROW(read_vm_trace(empty), empty_trace);
    std::istringstream header("id,t,l,c\n");
    EXPECT_THROW(read_vm_trace(header), parse_error);
}

TEST(Trace, WriteReadRoundTrip) {
    const auto t = toy_trace();
    std::stringstream s;
    write_vm_trace(s, t);
    const auto back = read_vm_trace(s);
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(back[i].id, t[i].id);
        EXPECT_EQ(back[i].arrival, t[i].arrival);
        EXPECT_EQ(back[i].cores, t[i].cores);
        EXPECT_EQ(back[i].site, t[i].site);
    }
}

TEST(Trace, SyntheticSizeLaw) {
    synthetic_trace_spec spec;
    spec.count = 200000;
    EXPECT_NEAR(mean_size(spec), 4.75, 1e-12);
    const auto t = synthetic_trace(spec, {3, 0});
    const auto s = summarize_trace(t);
    EXPECT_EQ(s.min_cores, 2);
    EXPECT_EQ(s.max_cores, 20);
    EXPECT_NEAR(s.mean_cores, 4.75, 0.05);
}

TEST(Packing, ToyExampleCloudTwoEdgeThree) {
    packing_options opt;
    opt.assign = site_assignment::hint;
    const auto cloud = simulate_packing(toy_trace(), {topology::kind::cloud, 1, 2, 10}, opt);
    const auto edge = simulate_packing(toy_trace(), {topology::kind::edge, 2, 2, 10}, opt);
    EXPECT_EQ(cloud.peak_servers_used, 2);
    EXPECT_EQ(edge.peak_servers_used, 3);
    EXPECT_EQ(edge.delayed, 0u);
}

TEST(Packing, SingleVmUsesOneServer) {
    const std::vector<vm_request> one{{"v", 0, 1, 3, 0}};
    EXPECT_EQ(simulate_packing(one, {topology::kind::cloud, 1, 5, 8}).peak_servers_used, 1);
    EXPECT_EQ(simulate_packing(one, {topology::kind::edge, 3, 5, 8}).peak_servers_used, 1);
}

TEST(Packing, OversizedVmRejected) {
    const std::vector<vm_request> big{{"v", 0, 1, 30, {}}};
    EXPECT_THROW(simulate_packing(big, {topology::kind::cloud, 1, 5, 8}), oversized_vm);
}

TEST(Packing, FifoQueueDelaysWhenFull) {
    // One 10-core server: the second 8-core VM waits until t = 1 and the
    // 2-core VM queues behind it even though it would fit.
    const std::vector<vm_request> t{{"a", 0, 1, 8, {}}, {"b", 0.5, 1, 8, {}}, {"c", 0.6, 1, 2, {}}};
    const auto r = simulate_packing(t, {topology::kind::cloud, 1, 1, 10});
    EXPECT_EQ(r.placed, 3u);
    EXPECT_EQ(r.delayed, 2u);
    EXPECT_EQ(r.rejected_or_queued, 2);
    EXPECT_NEAR(r.mean_delay, (0.5 + 0.4) / 3, 1e-12);
    EXPECT_LE(r.peak_cores_used, 10);
}

TEST(Packing, PoliciesNeverOversubscribe) {
    synthetic_trace_spec spec;
    spec.count = 5000;
    spec.arrival_rate = 40;
    const auto t = synthetic_trace(spec, {5, 0});
    for (auto pol : {packing_policy::first_fit, packing_policy::best_fit, packing_policy::first_fit_decreasing_batch}) {
        packing_options opt;
        opt.policy = pol;
        const topology topo{topology::kind::edge, 4, 2, 32};
        const auto r = simulate_packing(t, topo, opt);
        EXPECT_EQ(r.placed, t.size());
        EXPECT_LE(r.peak_cores_used, topo.total_cores());
        EXPECT_LE(r.peak_servers_used, topo.total_servers());
        for (const auto& s : r.utilization_timeline)
            EXPECT_LE(s.cores_used, topo.total_cores());
    }
}

TEST(Packing, SweepFindsMinimumNearPredictedSize) {
    synthetic_trace_spec spec;
    spec.count = 60000;
    spec.arrival_rate = 0.95 * 100 * 64 / 4.75;
    const auto t = synthetic_trace(spec, {6, 0});
    const topology cloud{topology::kind::cloud, 1, 100, 64};
    const auto sweep = packing_sweep(t, cloud, 100, {64, 80, 96, 112, 128}, 2.0, {}, error_metric::peak_capacity, 1);
    EXPECT_EQ(sweep.predicted_cores, 96.0);
    EXPECT_EQ(sweep.rows[sweep.best].cores_per_edge, 96);
    EXPECT_TRUE(sweep.diminishing_returns());
}
