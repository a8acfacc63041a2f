#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgeq/config.hpp"
#include "edgeq/harness.hpp"

using namespace edgeq;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("edgeq_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

json small_edge_scenario() {
    return json::parse(R"({
      "name": "small", "model": "two_phase_edge", "seed": 5, "replications": 3,
      "grid": {"lambda": [10, 20], "r": [0.1, 0.3]},
      "base": {"edge": {"mu1": 50, "mu2": 50}, "simulation": {"requests": 20000}}
    })");
}

} // namespace

TEST(Config, CanonicalFormIsIdempotent) {
    const std::string text = R"({"edge": {"lambda": 10, "mu1": 50, "mu2": "inf"},
                                 "workload": {"period_s": 100, "amplitude": 0.3}})";
    const auto once = canonicalize(text);
    EXPECT_EQ(canonicalize(once), once);
    const auto cfg = parse_config_text(text);
    EXPECT_TRUE(std::isinf(cfg.sim.edge.mu2));
    EXPECT_NEAR(cfg.sim.profile.gamma, 2 * std::numbers::pi / 100, 1e-15);
}

TEST(Config, RejectsUnknownKeysAndConflicts) {
    EXPECT_THROW(parse_config_text(R"({"edge": {"lamda": 10}})"), config_error);
    EXPECT_THROW(parse_config_text(R"({"edges": {}})"), config_error);
    EXPECT_THROW(parse_config_text(R"({"workload": {"gamma_rad_s": 1, "period_s": 6}})"), config_error);
    EXPECT_THROW(parse_config_text(R"({"model": {"type": "mm9"}})"), config_error);
    EXPECT_THROW(parse_config_text(R"({"edge": {"lambda": "ten"}})"), config_error);
    EXPECT_THROW(parse_config_text("{not json"), config_error);
}

TEST(Scenario, EmptyGridFailsValidation) {
    auto doc = small_edge_scenario();
    doc["grid"] = json::object();
    EXPECT_THROW(parse_scenario(doc), config_error);
    doc["grid"] = {{"lambda", json::array()}};
    EXPECT_THROW(parse_scenario(doc), config_error);
    doc = small_edge_scenario();
    doc["replications"] = 0;
    EXPECT_THROW(parse_scenario(doc), config_error);
    doc = small_edge_scenario();
    doc["grid"]["bogus"] = {1};
    EXPECT_THROW(parse_scenario(doc), config_error);
}

TEST(Scenario, RangeGridExpandsInclusive) {
    auto doc = small_edge_scenario();
    doc["grid"] = {{"lambda", {{"from", 5}, {"to", 45}, {"step", 2.5}}}};
    const auto sc = parse_scenario(doc);
    ASSERT_EQ(sc.grid.size(), 1u);
    EXPECT_EQ(sc.grid[0].second.size(), 17u);
    EXPECT_DOUBLE_EQ(sc.grid[0].second.back(), 45.0);
}

TEST(Scenario, RowsFollowGridOrderWithConsistentErrors) {
    const auto rows = evaluate_scenario(parse_scenario(small_edge_scenario()), 2);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].param("lambda"), 10.0);
    EXPECT_EQ(rows[0].param("r"), 0.1);
    EXPECT_EQ(rows[1].param("r"), 0.3);
    EXPECT_EQ(rows[3].param("lambda"), 20.0);
    for (const auto& r : rows) {
        EXPECT_EQ(r.status, "ok");
        EXPECT_NEAR(r.abs_err, std::abs(r.analytic_value - r.sim_value), 1e-12);
        EXPECT_NEAR(r.rel_err, r.abs_err / r.analytic_value, 1e-12);
        EXPECT_LT(r.rel_err, 0.1);
    }
}

TEST(Scenario, FilesAreByteIdenticalOnRerun) {
    const auto sc = parse_scenario(small_edge_scenario());
    const auto d1 = scratch("a"), d2 = scratch("b");
    const auto a = run_scenario(sc, d1.string(), true, 1);
    const auto b = run_scenario(sc, d2.string(), true, 3);
    ASSERT_EQ(a.files.size(), 2u);
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        EXPECT_EQ(std::filesystem::path(a.files[i]).filename(), std::filesystem::path(b.files[i]).filename());
        EXPECT_EQ(slurp(a.files[i]), slurp(b.files[i]));
    }
    EXPECT_EQ(std::filesystem::path(a.files[0]).filename().string(), "small.csv");
    const auto j = json::parse(slurp(a.files[1]));
    EXPECT_EQ(j["rows"].size(), 4u);
}

TEST(Scenario, UnstablePointsAreMarkedNotDropped) {
    const auto sc = parse_scenario(json::parse(R"({
      "name": "mob", "model": "mobility", "seed": 1, "replications": 2,
      "grid": {"lambda": [10, 45], "r": [0.3]},
      "base": {"edge": {"mu1": 50, "mu2": 50}, "cloud": {"k": 64, "mu": 50},
               "network": {"t_edge": 0.001, "t_cloud": 0.028}, "simulation": {"requests": 20000}}
    })"));
    const auto rows = evaluate_scenario(sc, 1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_EQ(rows[1].status.rfind("skipped", 0), 0u) << rows[1].status;
    EXPECT_TRUE(std::isinf(rows[1].extra("edge_response_sim")));
    EXPECT_EQ(rows[1].extra("edge_faster_sim"), 0.0);
}

TEST(Csv, QuotesAndNumberFormat) {
    comparison_row r;
    r.parameters = {{"a", 1.0 / 3.0}};
    r.analytic_value = 1.0;
    r.sim_value = 2.0;
    r.set_errors();
    r.status = "error: bad, \"x\"";
    std::ostringstream out;
    write_csv(out, {r});
    EXPECT_EQ(out.str(), "a,analytic_value,sim_value,sim_ci,abs_err,rel_err,status\r\n"
                         "0.333333333,1,2,nan,1,1,\"error: bad, \"\"x\"\"\"\r\n");
}

TEST(RushTable, ZeroBelowThresholdMonotoneAboveAndScaleInvariant) {
    const json base = json::parse(R"({"edge": {"mu1": 32, "mu2": 32, "r": 0.3},
        "workload": {"lambda_bar": 16, "period_s": 500}, "simulation": {"periods": 3}})");
    const std::vector<double> amps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const auto rows = table_rush_hour(base, amps, 16, 3, 1, json::object(), 1);
    ASSERT_EQ(rows.size(), 20u);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const auto& lo = rows[i];
        const auto& hi = rows[i + amps.size()];
        EXPECT_EQ(lo.param("scale"), 1.0);
        EXPECT_EQ(hi.param("scale"), 16.0);
        EXPECT_NEAR(hi.analytic_value, lo.analytic_value, 1e-12 * std::max(1.0, lo.analytic_value));
        if (amps[i] <= 0.5) {
            EXPECT_EQ(lo.analytic_value, 0.0);
        }
        if (i > 0 && lo.analytic_value > 0.0) {
            EXPECT_GT(lo.analytic_value, rows[i - 1].analytic_value);
        }
    }
}

TEST(PackingScenario, PeakCapacityErrorVanishesAtModelSize) {
    const auto sc = parse_scenario(json::parse(R"({
      "name": "pk", "model": "packing", "seed": 3, "replications": 1,
      "grid": {"cores_per_edge": [64, 96, 128]},
      "base": {"capacity": {"q": 2}},
      "options": {"cloud_servers": 50, "cloud_cores_per_server": 64, "synthetic_count": 20000}
    })"));
    const auto rows = evaluate_scenario(sc, 1);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].extra("model_point"), 1.0);
    EXPECT_NEAR(rows[1].sim_value, 0.0, 1e-12);
    EXPECT_GT(rows[0].sim_value, 0.0);
}
