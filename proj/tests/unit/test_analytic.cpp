#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "edgeq/analytic.hpp"

using namespace edgeq;
using namespace edgeq::analytic;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(TwoPhaseWait, NoMigrationIsMm1) {
    EXPECT_NEAR(mm1_two_phase_wait({10, 50, 50, 0}), 0.005, 1e-15);
    EXPECT_DOUBLE_EQ(destination_wait(10, 50, 0), 0.0);
}

TEST(TwoPhaseWait, WorkedExamples) {
    auto t = mm1_two_phase_wait_terms({10, 50, 50, 0.1});
    EXPECT_NEAR(t.source, 0.00615385, 5e-9);
    EXPECT_NEAR(t.destination, 1.0 / 2450.0, 1e-15);
    EXPECT_NEAR(t.total(), 0.00656201, 5e-9);

    t = mm1_two_phase_wait_terms({10, 50, 50, 0.3});
    EXPECT_NEAR(t.source, 0.00864865, 5e-9);
    EXPECT_NEAR(t.destination, 0.00127660, 5e-9);
    EXPECT_NEAR(t.total(), 0.00992525, 1e-8); // sum of the two rounded terms
}

TEST(TwoPhaseWait, InstantaneousMigrationReducesToMm1) {
    const double w = mm1_two_phase_wait({10, 50, instantaneous, 0.0});
    EXPECT_NEAR(w, 0.005, 1e-15);
    EXPECT_DOUBLE_EQ(migration_service_time(1.0, instantaneous), 0.0);
}

TEST(TwoPhaseWait, RejectsUnstableSourceAndDestination) {
    EXPECT_THROW(mm1_two_phase_wait({40, 50, 50, 0.3}), unstable_queue);
    EXPECT_THROW(destination_wait(60, 50, 1.0), unstable_queue);
    EXPECT_THROW(mm1_two_phase_wait({-1, 50, 50, 0.1}), domain_error);
    EXPECT_THROW(mm1_two_phase_wait({10, 50, 50, 1.5}), domain_error);
}

TEST(MigrationServiceTime, Examples) {
    EXPECT_DOUBLE_EQ(migration_service_time(0, 50), 0.0);
    EXPECT_NEAR(migration_service_time(0.1, 50), 0.002, 1e-18);
}

TEST(CloudWait, QedForm) {
    EXPECT_DOUBLE_EQ(mmk_qed_wait({1, 1, 0.5}), 2.0);
    EXPECT_NEAR(mmk_qed_wait({16, 50, 0.8}), 0.025, 1e-15);
    EXPECT_LT(mmk_qed_wait({1 << 20, 50, 0.8}), 1e-4);
    EXPECT_THROW(mmk_qed_wait({16, 50, 1.0}), unstable_queue);
}

// Frozen from a 40-digit mpmath evaluation of the Erlang-C sum.
TEST(CloudWait, ErlangCMatchesFactorialSum) {
    EXPECT_NEAR(erlang_c(16, 0.8), 0.30488391293001693, 1e-14);
    EXPECT_NEAR(erlang_c(64, 0.9), 0.31066331653295928, 1e-14);
    EXPECT_NEAR(erlang_c(2, 0.8), 0.71111111111111117, 1e-14);
    EXPECT_NEAR(erlang_c(1, 0.5), 0.5, 1e-15);
    EXPECT_NEAR(mmk_erlang_c_wait({16, 50, 0.8}), 0.0019055244558126052, 1e-15);
    EXPECT_NEAR(mmk_exact_conditional_wait({16, 50, 0.8}), 1.0 / (16 * 50 * 0.2), 1e-15);
}

TEST(DeltaTBound, Examples) {
    EXPECT_NEAR(delta_t_bound_mmk({10, 50, 50, 0}, {1, 50, 0.2}), 0.005 - 0.025, 1e-15);
    EXPECT_NEAR(delta_t_bound_mmk({10, 50, 50, 0.1}, {16, 50, 0.8}), -0.01643799, 5e-9);
    const double k_inf = delta_t_bound_mmk({10, 50, 50, 0.1}, {1 << 30, 50, 0.8});
    EXPECT_NEAR(k_inf, mm1_two_phase_wait({10, 50, 50, 0.1}) + 0.002, 1e-5);
    EXPECT_TRUE(edge_wins({0.001, 0.028}, -0.01643799));
    EXPECT_FALSE(edge_wins({0.001, 0.028}, 0.03));
}

// Monte Carlo, 1e7 draws with numpy (S = X1 + B X2, X ~ Exp(1)).
TEST(ServiceScv, LawOfTotalVariance) {
    EXPECT_DOUBLE_EQ(service_scv({0.02, 0.0004, 0.02, 0.0004, 0.0}), 1.0);
    const double half = service_scv({1, 1, 1, 1, 0.5});
    EXPECT_NEAR(half, 7.0 / 9.0, 1e-15);
    EXPECT_LT(rel(half, 0.777346714133256), 0.01);
    const double one = service_scv({1, 1, 1, 1, 1.0});
    EXPECT_NEAR(one, 0.5, 1e-15);
    EXPECT_LT(rel(one, 0.49977883392471867), 0.01);
}

TEST(Gg1TwoPhase, MarkovianReductionAndScaling) {
    const queue_spec q{10, 50, 50, 0.1};
    EXPECT_NEAR(gg1_two_phase_wait(q, {1, 1}), mm1_two_phase_wait(q), 1e-18);
    EXPECT_NEAR(gg1_two_phase_wait(q, {3, 1}), 0.01312402, 1e-8);
    EXPECT_NEAR(gg1_two_phase_wait({10, 50, 50, 0}, {1, 1}), 10.0 / (50.0 * 40.0), 1e-15);
}

TEST(GgkCloud, AllenCunneenBranches) {
    EXPECT_NEAR(waiting_probability(1, 0.8), 0.8, 1e-15);
    EXPECT_NEAR(ggk_cloud_wait({1, 1, 0.8}, {1, 1}), 4.0, 1e-12);
    EXPECT_NEAR(waiting_probability(2, 0.8), 0.72, 1e-15);
    EXPECT_NEAR(ggk_cloud_wait({2, 1, 0.8}, {1, 1}), 1.8, 1e-12);
    EXPECT_NEAR(waiting_probability(4, 0.5), std::pow(0.5, 2.5), 1e-15);
    EXPECT_NEAR(ggk_cloud_wait({4, 1, 0.5}, {1, 1}), 0.0883883476, 1e-9);
}

TEST(GgkCloud, DeltaTBound) {
    EXPECT_NEAR(delta_t_bound_ggk({0.8, 1, 1, 0}, {1, 1}, {1, 1, 0.8}, {1, 1}), 0.0, 1e-12);
    EXPECT_NEAR(delta_t_bound_ggk({10, 50, 50, 0.1}, {1, 1}, {2, 1, 0.8}, {1, 1}), -1.79143799, 5e-9);
    const double lo = delta_t_bound_ggk({10, 50, 50, 0.1}, {1, 1}, {2, 1, 0.8}, {1, 1});
    const double hi = delta_t_bound_ggk({10, 50, 50, 0.1}, {3, 1}, {2, 1, 0.8}, {1, 1});
    EXPECT_NEAR(hi - lo, mm1_two_phase_wait({10, 50, 50, 0.1}), 1e-15);
}

TEST(MaxEdgeArrivalScv, Example) {
    EXPECT_NEAR(max_edge_arrival_scv(0.027, {10, 50, 50, 0.1}, 0.002, 0.001, 1.0), 7.45, 1e-9);
}

TEST(EffectiveServiceRate, Examples) {
    EXPECT_DOUBLE_EQ(effective_service_rate(50, 50, 0), 50.0);
    EXPECT_NEAR(effective_service_rate(50, 50, 0.1), 500.0 / 11.0, 1e-12);
    EXPECT_DOUBLE_EQ(effective_service_rate(32, 32, 1), 16.0);
}

TEST(SinusoidalLoad, Examples) {
    EXPECT_DOUBLE_EQ(sinusoidal_offered_load(3.0, {80, 0, 1, 0}, 100), 0.8);
    EXPECT_NEAR(sinusoidal_offered_load(0, {80, 0.5, 2 * pi / 100, 0}, 100), 0.799748672686933, 1e-14);
    EXPECT_NEAR(offered_load_lag(1e-6), 1.0, 1e-9);
}

// Maximum found by scipy bounded minimisation of -m(t) over one period.
TEST(SinusoidalWait, PeakRegression) {
    const sinusoid_profile p{10, 0.7, 2 * pi / 100, 0};
    EXPECT_NEAR(sinusoidal_wait_profile(0, {10, 0, 1, 0}, 20), 0.05, 1e-15);
    EXPECT_NEAR(sinusoidal_wait_profile(25.050000188833558, p, 20), 0.2833294952264483, 1e-12);
    double best = 0;
    for (int i = 0; i < 100000; ++i)
        best = std::max(best, sinusoidal_wait_profile(i * 1e-3, p, 20));
    EXPECT_NEAR(best, 0.2833294952264483, 1e-9);
    EXPECT_THROW(sinusoidal_wait_profile(25, {19, 0.9, 2 * pi / 100, 0}, 20), overloaded_instant);
}

TEST(ExcessWait, ExamplesAndQuadraticLaw) {
    EXPECT_DOUBLE_EQ(excess_wait_sinusoidal(0.8, 0.0, 0.01, 100), 0.0);
    EXPECT_NEAR(excess_wait_sinusoidal(0.8, 0.5, 1e-9, 100), 0.1, 1e-12);
    const double a = excess_wait_sinusoidal(0.8, 0.2, 2 * pi / 1000, 100);
    const double b = excess_wait_sinusoidal(0.8, 0.4, 2 * pi / 1000, 100);
    EXPECT_NEAR(b / a, 4.0, 1e-14);
}

TEST(OverloadWindow, Examples) {
    EXPECT_FALSE(overload_window({16, 0.9, 1, 0}, 32).has_value());
    const auto w = overload_window({16, 0.7, 1, 0}, 24);
    ASSERT_TRUE(w.has_value());
    EXPECT_NEAR(w->theta, pi / 6, 1e-15);
    EXPECT_NEAR(w->t1, 0.5235987756, 1e-9);
    EXPECT_NEAR(w->t2, 2.6179938780, 1e-9);
    EXPECT_FALSE(overload_window({16, 0.5, 1, 0}, 24).has_value());
}

TEST(OverloadWindow, ExactRuleFindsTrueCrossings) {
    const sinusoid_profile p{16, 0.7, 1, 0};
    const auto w = overload_window(p, 24, crossing_rule::exact);
    ASSERT_TRUE(w.has_value());
    EXPECT_NEAR(p.rate_at(w->t1), 24.0, 1e-12);
    EXPECT_NEAR(p.rate_at(w->t2), 24.0, 1e-12);
}

// V by scipy.integrate.quad of lambda(t) - mu over [t1, t2].
TEST(FluidBacklog, QuadratureExample) {
    const auto fb = fluid_backlog({16, 0.7, 1, 0}, 24);
    EXPECT_TRUE(fb.overloaded);
    EXPECT_NEAR(fb.backlog(), 2.64380822562586, 1e-12);
    EXPECT_NEAR(rush_hour_wait({16, 0.7, 1, 0}, 24), 0.11015867606774417, 1e-12);
    EXPECT_DOUBLE_EQ(fluid_backlog({16, 0.3, 1, 0}, 24).backlog(), 0.0);
}

TEST(RushHourWait, ScaleInvariance) {
    const double base = rush_hour_wait({16, 0.7, 1, 0}, 24);
    EXPECT_NEAR(rush_hour_wait({160, 0.7, 1, 0}, 240), base, 1e-12 * base);
    EXPECT_NEAR(fluid_backlog({160, 0.7, 1, 0}, 240).backlog(), 10 * fluid_backlog({16, 0.7, 1, 0}, 24).backlog(),
                1e-11);
}

TEST(PsaCloudWait, Examples) {
    EXPECT_DOUBLE_EQ(psa_cloud_wait(0.5, {1, 1, 0}), 2.0);
    EXPECT_NEAR(psa_cloud_wait(0.8, {16, 50, 0}), 0.025, 1e-15);
    EXPECT_THROW(psa_cloud_wait(1.0, {16, 50, 0}), overloaded_instant);
}

TEST(AggregateProfile, InPhaseAndAntiphase) {
    const sinusoid_profile s{10, 0.7, 2 * pi / 100, 0};
    const aggregate_profile same({s, s, s});
    EXPECT_NEAR(same.mean_rate(), 30.0, 1e-12);
    EXPECT_NEAR(same.relative_amplitude(), 0.7, 1e-6);
    auto t = s;
    t.phase = pi;
    const aggregate_profile anti({s, t});
    EXPECT_NEAR(anti.relative_amplitude(), 0.0, 1e-12);
    auto u = s;
    u.gamma = 2 * pi / 70;
    EXPECT_THROW(aggregate_profile({s, u}).relative_amplitude(), incompatible_periods);
    EXPECT_NO_THROW(aggregate_profile({s, u}).relative_amplitude(700.0, 8192));
}

TEST(EmpiricalRule, Examples) {
    auto c = empirical_rule_capacities(100, 1);
    EXPECT_DOUBLE_EQ(c.edge, 120.0);
    EXPECT_DOUBLE_EQ(c.cloud, 120.0);
    c = empirical_rule_capacities(100, 4);
    EXPECT_DOUBLE_EQ(c.edge, 480.0);
    EXPECT_DOUBLE_EQ(c.cloud, 440.0);
}
