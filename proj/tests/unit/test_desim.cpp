#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "edgeq/analytic.hpp"
#include "edgeq/desim.hpp"

using namespace edgeq;

namespace {

constexpr double pi = std::numbers::pi;

sim_config edge_config(double lambda, double r, std::uint64_t requests = 200000) {
    sim_config c;
    c.model = sim_model::two_phase_edge;
    c.edge = {lambda, 50, 50, r};
    c.requests = requests;
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(TwoPhaseSim, NoMigrationMatchesMm1) {
    const auto r = replicate(edge_config(10, 0.0), 30, {11, 0}, 1);
    EXPECT_LT(rel(r.summary["mean_wait"].mean, 0.005), 0.05);
}

TEST(TwoPhaseSim, MigrationMatchesClosedForm) {
    const auto r = replicate(edge_config(10, 0.1), 30, {12, 0}, 1);
    EXPECT_LT(rel(r.summary["mean_wait"].mean, analytic::mm1_two_phase_wait({10, 50, 50, 0.1})), 0.05);
}

TEST(TwoPhaseSim, MigrationAccountingAndUtilization) {
    auto c = edge_config(20, 0.3, 1000000);
    c.warmup = 0.0;
    const auto m = run_two_phase_sim(c, {13, 0});
    const double n = static_cast<double>(m.count_measured);
    EXPECT_NEAR(m.migrated_fraction, 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
    EXPECT_LT(rel(m.utilization_observed, analytic::edge_utilization(c.edge)), 0.01);
    EXPECT_LT(rel(m.little_l, m.arrival_rate_observed * m.mean_sojourn), 0.02);
}

TEST(TwoPhaseSim, ShortHorizonGivesZeroMetrics) {
    auto c = edge_config(10, 0.1);
    c.horizon_s = 1e-9;
    const auto m = run_two_phase_sim(c, {14, 0});
    EXPECT_EQ(m.count_served, 0u);
    EXPECT_EQ(m.mean_wait, 0.0);
    EXPECT_EQ(m.mean_response, 0.0);
}

TEST(TwoPhaseSim, UnstableLoadTripsTheCap) {
    EXPECT_THROW(run_two_phase_sim(edge_config(40, 0.3), {15, 0}), runtime_instability);
}

TEST(TwoPhaseSim, EventLogIsOrderedCsv) {
    std::ostringstream log;
    auto c = edge_config(10, 0.3, 200);
    c.event_log = &log;
    run_two_phase_sim(c, {16, 0});
    std::istringstream in(log.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "event_time,event_type,request_id,queue_id");
    double last = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
        const double t = std::stod(line.substr(0, line.find(',')));
        EXPECT_GE(t, last);
        last = t;
        ++rows;
    }
    EXPECT_GT(rows, 400);
    EXPECT_THROW(replicate(c, 2, {16, 0}, 1), config_error);
}

TEST(MmkSim, SingleServerMatchesMm1) {
    sim_config c;
    c.model = sim_model::mmk_cloud;
    c.cloud = {1, 50, 0.5};
    const auto r = replicate(c, 30, {17, 0}, 1);
    EXPECT_LT(rel(r.summary["mean_wait"].mean, 0.5 / (50 * 0.5)), 0.05);
}

// The simulated conditional wait follows the exact M/M/k value
// 1/(k mu (1 - rho)); the QED form exceeds it by sqrt(k).
TEST(MmkSim, ConditionalWaitIsExactMmkNotQed) {
    sim_config c;
    c.model = sim_model::mmk_cloud;
    c.cloud = {16, 50, 0.8};
    const auto r = replicate(c, 30, {18, 0}, 1);
    const double sim = r.summary["conditional_wait"].mean;
    EXPECT_LT(rel(sim, analytic::mmk_exact_conditional_wait(c.cloud)), 0.10);
    EXPECT_LT(rel(analytic::mmk_qed_wait(c.cloud) / sim, 4.0), 0.10);
    EXPECT_LT(rel(r.summary["delay_probability"].mean, analytic::erlang_c(16, 0.8)), 0.05);
}

TEST(MmkSim, ZeroLoadGivesZeroMetrics) {
    sim_config c;
    c.model = sim_model::mmk_cloud;
    c.cloud = {4, 50, 0.0};
    const auto m = run_mmk_sim(c, {19, 0});
    EXPECT_EQ(m.count_served, 0u);
    EXPECT_EQ(m.mean_wait, 0.0);
}

TEST(Mtm1Sim, ZeroAmplitudeIsStationary) {
    sim_config c;
    c.model = sim_model::mtm1_sinusoidal;
    c.edge = {0, 50, 50, 0.1};
    const double mu = analytic::effective_service_rate(50, 50, 0.1);
    c.profile = {0.5 * mu, 0.0, 2 * pi / 200, 0};
    c.periods = 21;
    const auto r = replicate(c, 10, {20, 0}, 1);
    EXPECT_LT(rel(r.summary["mean_wait"].mean, 0.5 / (mu * 0.5)), 0.05);
}

TEST(Mtm1Sim, ExcessWaitExceedsSecondOrderModel) {
    sim_config c;
    c.model = sim_model::mtm1_sinusoidal;
    c.edge = {0, 100, 100, 0.0};
    c.profile = {80, 0.3, 2 * pi / 1000, 0};
    const auto r = replicate(c, 10, {21, 0}, 1);
    const double excess = r.summary["mean_wait"].mean - 0.04;
    EXPECT_GE(excess, analytic::excess_wait_sinusoidal(0.8, 0.3, c.profile.gamma, 100));
}

TEST(Mtm1Sim, NoRushWindowBelowThreshold) {
    sim_config c;
    c.model = sim_model::mtm1_sinusoidal;
    c.edge = {0, 32, 32, 0.5};
    c.profile = {16, 0.3, 2 * pi / 200, 0};
    const auto r = run_mtm1_sim(c, {22, 0});
    EXPECT_FALSE(r.series.rush_window.has_value());
    EXPECT_EQ(static_cast<int>(r.series.bins.size()), c.bins_per_period);
}

TEST(Mtm1Sim, RushWindowCoversOverload) {
    sim_config c;
    c.model = sim_model::mtm1_sinusoidal;
    c.edge = {0, 32, 32, 0.3};
    c.profile = {16, 0.8, 2 * pi / 500, 0};
    const auto r = run_mtm1_sim(c, {23, 0});
    ASSERT_TRUE(r.series.rush_window.has_value());
    EXPECT_GT(r.series.rush_window->peak_bin_wait, r.metrics.mean_wait);
    EXPECT_GT(r.series.rush_window->count, 0u);
}

TEST(Replicate, SingleRunHasNoStderr) {
    const auto r = replicate(edge_config(10, 0.1, 20000), 1, {24, 0}, 1);
    const auto& e = r.summary["mean_wait"];
    EXPECT_FALSE(e.stderr_defined);
    EXPECT_EQ(e.mean, r.runs[0].mean_wait);
}

TEST(Replicate, BitIdenticalAcrossInvocationsAndWorkerCounts) {
    const auto c = edge_config(20, 0.3, 20000);
    const auto a = replicate(c, 30, {25, 0}, 1);
    const auto b = replicate(c, 30, {25, 0}, 4);
    ASSERT_EQ(a.summary.fields.size(), b.summary.fields.size());
    for (std::size_t i = 0; i < a.summary.fields.size(); ++i) {
        const auto& x = a.summary.fields[i].second;
        const auto& y = b.summary.fields[i].second;
        EXPECT_EQ(std::memcmp(&x.mean, &y.mean, sizeof(double)), 0) << a.summary.fields[i].first;
        EXPECT_EQ(std::memcmp(&x.stderr_, &y.stderr_, sizeof(double)), 0) << a.summary.fields[i].first;
    }
}

TEST(Replicate, ConfidenceIntervalShrinksWithMoreRuns) {
    const auto c = edge_config(20, 0.1, 20000);
    const auto few = replicate(c, 5, {26, 0}, 1);
    const auto many = replicate(c, 40, {26, 0}, 1);
    EXPECT_LT(many.summary["mean_wait"].half_width(), few.summary["mean_wait"].half_width());
}
