// Copyright 2026 The edgeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EDGEQ_HARNESS_HPP
#define EDGEQ_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "edgeq/analytic.hpp"
#include "edgeq/capacity.hpp"
#include "edgeq/config.hpp"
#include "edgeq/desim.hpp"
#include "edgeq/errors.hpp"

/// Pairs closed-form predictions with simulation estimates over a
/// parameter grid and writes the resulting tables.
namespace edgeq {

using param_list = std::vector<std::pair<std::string, double>>;

struct comparison_row {
    param_list parameters;
    double analytic_value = std::numeric_limits<double>::quiet_NaN();
    double sim_value = std::numeric_limits<double>::quiet_NaN();
    double sim_ci = std::numeric_limits<double>::quiet_NaN(); ///< 95% half-width
    double abs_err = std::numeric_limits<double>::quiet_NaN();
    double rel_err = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    param_list extras;

    double param(std::string_view name) const {
        for (const auto& [k, v] : parameters)
            if (k == name)
                return v;
        throw config_error("row has no parameter '" + std::string(name) + "'");
    }

    double extra(std::string_view name) const {
        for (const auto& [k, v] : extras)
            if (k == name)
                return v;
        throw config_error("row has no column '" + std::string(name) + "'");
    }

    void set_errors() {
        abs_err = std::abs(analytic_value - sim_value);
        rel_err = analytic_value != 0.0 ? abs_err / std::abs(analytic_value)
                                        : (abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    }
};

struct scenario {
    std::string name;
    std::string model; ///< two_phase_edge, gg1_edge, mmk_cloud, mobility, excess_wait, rush_hour, packing
    std::uint64_t seed = 1;
    int replications = 30;
    std::vector<std::pair<std::string, std::vector<double>>> grid;
    json base = json::object(); ///< config sections applied before grid values
    json options = json::object();
    std::vector<std::string> outputs{"csv", "json"};
};

inline const std::vector<std::string>& scenario_models() {
    static const std::vector<std::string> m{"two_phase_edge", "gg1_edge", "mmk_cloud", "mobility",
                                            "excess_wait",    "rush_hour", "packing"};
    return m;
}

inline void validate(const scenario& s) {
    if (s.name.empty())
        throw config_error("scenario needs a name");
    if (std::find(scenario_models().begin(), scenario_models().end(), s.model) == scenario_models().end())
        throw config_error("unknown scenario model '" + s.model + "'");
    if (s.grid.empty())
        throw config_error("scenario grid is empty");
    for (const auto& [k, v] : s.grid)
        if (v.empty())
            throw config_error("grid parameter '" + k + "' has no values");
    if (s.replications < 1)
        throw config_error("replications must be at least 1");
    for (const auto& o : s.outputs)
        if (o != "csv" && o != "json")
            throw config_error("outputs entries must be 'csv' or 'json'");
}

namespace harness_detail {

inline std::vector<double> grid_values(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number())
                throw config_error("grid." + key + " must hold numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    if (v.is_object()) {
        config_detail::only_keys(v, "grid." + key, {"from", "to", "step"});
        if (!v.contains("from") || !v.contains("to") || !v.contains("step"))
            throw config_error("grid." + key + " range needs from, to and step");
        const double from = v.at("from").get<double>(), to = v.at("to").get<double>(),
                     step = v.at("step").get<double>();
        if (!(step > 0.0) || to < from)
            throw config_error("grid." + key + " range needs step > 0 and to >= from");
        const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
        for (long i = 0; i <= n; ++i)
            out.push_back(from + i * step);
        return out;
    }
    throw config_error("grid." + key + " must be a list or a {from, to, step} range");
}

inline std::vector<param_list> expand(const std::vector<std::pair<std::string, std::vector<double>>>& grid) {
    std::vector<param_list> out{{}};
    for (const auto& [key, values] : grid) {
        std::vector<param_list> next;
        for (const auto& partial : out)
            for (double v : values) {
                auto p = partial;
                p.emplace_back(key, v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

/// Sets one grid parameter on a run configuration.
inline void apply_param(run_config& cfg, const std::string& key, double v) {
    auto& s = cfg.sim;
    if (key == "lambda") {
        s.edge.lambda = v;
    } else if (key == "mu1") {
        s.edge.mu1 = v;
    } else if (key == "mu2") {
        s.edge.mu2 = v;
    } else if (key == "r") {
        s.edge.r = v;
    } else if (key == "mu_dest") {
        s.mu_dest = v;
    } else if (key == "dest_home_lambda") {
        s.dest_home_lambda = v;
    } else if (key == "k") {
        s.cloud.k = static_cast<int>(v);
    } else if (key == "mu_cloud") {
        s.cloud.mu_cloud = v;
    } else if (key == "rho_cloud") {
        s.cloud.rho_cloud = v;
    } else if (key == "t_edge") {
        s.network.t_edge = v;
    } else if (key == "t_cloud") {
        s.network.t_cloud = v;
    } else if (key == "ca2") {
        s.interarrival.scv = v;
    } else if (key == "cs2") {
        s.service1.scv = v;
        s.service2.scv = v;
    } else if (key == "lambda_bar") {
        s.profile.lambda_bar = v;
    } else if (key == "amplitude") {
        s.profile.amplitude = v;
    } else if (key == "gamma") {
        s.profile.gamma = v;
    } else if (key == "period_s") {
        s.profile.gamma = 2.0 * std::numbers::pi / v;
    } else if (key == "requests") {
        s.requests = static_cast<std::uint64_t>(v);
    } else if (key == "scale") {
        // Scales every rate at fixed utilization; applied after the other keys.
    } else if (key == "cores_per_edge") {
        cfg.capacity.cores_per_server = static_cast<int>(v);
    } else if (key == "q") {
        cfg.capacity.q = v;
    } else {
        throw config_error("unknown grid parameter '" + key + "'");
    }
}

inline void apply_scale(run_config& cfg, double c) {
    if (!(c > 0.0))
        throw config_error("scale must be positive");
    auto& s = cfg.sim;
    s.edge.lambda *= c;
    s.edge.mu1 *= c;
    s.edge.mu2 *= c;
    s.mu_dest *= c;
    s.profile.lambda_bar *= c;
}

inline double option_number(const json& o, const char* key, double fallback) {
    return o.contains(key) ? config_detail::number(o.at(key), std::string("options.") + key) : fallback;
}

inline std::string option_string(const json& o, const char* key, const std::string& fallback) {
    if (!o.contains(key))
        return fallback;
    if (!o.at(key).is_string())
        throw config_error(std::string("options.") + key + " must be a string");
    return o.at(key).get<std::string>();
}

struct packing_context {
    std::vector<vm_request> trace;
    topology cloud;
    packing_report cloud_report;
    packing_options opt;
    error_metric metric = error_metric::peak_capacity;
};

} // namespace harness_detail

inline scenario parse_scenario(const json& doc) {
    using namespace harness_detail;
    config_detail::only_keys(doc, "scenario",
                             {"name", "model", "seed", "replications", "grid", "base", "options", "outputs"});
    scenario s;
    config_detail::read(doc, "name", s.name, "scenario");
    config_detail::read(doc, "model", s.model, "scenario");
    config_detail::read(doc, "seed", s.seed, "scenario");
    config_detail::read(doc, "replications", s.replications, "scenario");
    if (!doc.contains("grid") || !doc.at("grid").is_object())
        throw config_error("scenario needs a grid object");
    for (auto it = doc.at("grid").begin(); it != doc.at("grid").end(); ++it)
        s.grid.emplace_back(it.key(), grid_values(it.value(), it.key()));
    if (doc.contains("base"))
        s.base = doc.at("base");
    if (doc.contains("options")) {
        s.options = doc.at("options");
        config_detail::only_keys(s.options, "options",
                                 {"rush_statistic", "metric", "synthetic_count", "synthetic_rho",
                                  "synthetic_mean_lifetime", "cloud_servers", "cloud_cores_per_server", "sites"});
    }
    if (doc.contains("outputs")) {
        s.outputs.clear();
        for (const auto& o : doc.at("outputs")) {
            if (!o.is_string())
                throw config_error("outputs entries must be strings");
            s.outputs.push_back(o.get<std::string>());
        }
    }
    validate(s);
    // Reject bad base sections and grid keys up front, before any run.
    run_config probe = parse_config(s.base);
    for (const auto& [k, v] : s.grid)
        apply_param(probe, k, v.front());
    return s;
}

inline scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open scenario '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("malformed scenario: ") + e.what());
    }
    return parse_scenario(doc);
}

namespace harness_detail {

inline void fill_sim(comparison_row& row, const replication_result& r, std::string_view metric) {
    const auto& e = r.summary[metric];
    row.sim_value = e.mean;
    row.sim_ci = e.half_width();
}

inline comparison_row evaluate_edge(const run_config& cfg, const scenario& sc, seeded_stream st) {
    comparison_row row;
    const auto& s = cfg.sim;
    if (s.model == sim_model::gg1_edge) {
        const phase_moments m{1.0 / s.edge.mu1, s.service1.scv / (s.edge.mu1 * s.edge.mu1),
                              std::isinf(s.edge.mu2) ? 1e-300 : 1.0 / s.edge.mu2,
                              std::isinf(s.edge.mu2) ? 0.0 : s.service2.scv / (s.edge.mu2 * s.edge.mu2), s.edge.r};
        const double cs2 = analytic::service_scv(m);
        row.analytic_value = analytic::gg1_two_phase_wait(s.edge, {s.interarrival.scv, cs2});
        row.extras.emplace_back("cs2_total", cs2);
    } else {
        row.analytic_value = analytic::mm1_two_phase_wait(s.edge);
    }
    const auto r = replicate(s, sc.replications, st, 1);
    fill_sim(row, r, "mean_wait");
    row.extras.emplace_back("source_wait_sim", r.summary["source_mean_wait"].mean);
    row.extras.emplace_back("destination_wait_sim", r.summary["destination_mean_wait"].mean);
    row.extras.emplace_back("utilization_sim", r.summary["utilization_observed"].mean);
    row.extras.emplace_back("mean_response_sim", r.summary["mean_response"].mean);
    return row;
}

inline comparison_row evaluate_mmk(const run_config& cfg, const scenario& sc, seeded_stream st) {
    comparison_row row;
    auto s = cfg.sim;
    s.model = sim_model::mmk_cloud;
    const bool qed = cfg.cloud_wait == analytic::cloud_wait_form::qed_conditional;
    row.analytic_value = analytic::mmk_cloud_wait(s.cloud, cfg.cloud_wait);
    const auto r = replicate(s, sc.replications, st, 1);
    fill_sim(row, r, qed ? "conditional_wait" : "mean_wait");
    row.extras.emplace_back("erlang_c_wait", analytic::mmk_erlang_c_wait(s.cloud));
    row.extras.emplace_back("exact_conditional_wait", analytic::mmk_exact_conditional_wait(s.cloud));
    row.extras.emplace_back("mean_wait_sim", r.summary["mean_wait"].mean);
    row.extras.emplace_back("delay_probability_sim", r.summary["delay_probability"].mean);
    row.extras.emplace_back("delay_probability_erlang_c", analytic::erlang_c(s.cloud.k, s.cloud.rho_cloud));
    return row;
}

/// Edge (two-phase) against a pooled cloud of k servers carrying k edge
/// sites' load, so rho_cloud = lambda / mu_cloud.
inline comparison_row evaluate_mobility(run_config cfg, const scenario& sc, seeded_stream st) {
    comparison_row row;
    auto& s = cfg.sim;
    s.cloud.rho_cloud = s.edge.lambda / s.cloud.mu_cloud;
    const auto& net = s.network;
    analytic::validate(s.cloud);

    const double w_cloud = analytic::mmk_cloud_wait(s.cloud, cfg.cloud_wait);
    const double cloud_resp_a = net.t_cloud + w_cloud + 1.0 / s.cloud.mu_cloud;
    row.extras.emplace_back("cloud_response_analytic", cloud_resp_a);

    auto cloud = s;
    cloud.model = sim_model::mmk_cloud;
    const auto rc = replicate(cloud, sc.replications, st, 1);
    const double cloud_resp_s = rc.summary["mean_response"].mean;
    row.extras.emplace_back("cloud_response_sim", cloud_resp_s);

    double edge_resp_a = std::numeric_limits<double>::infinity();
    try {
        row.analytic_value = analytic::delta_t_bound_mmk(s.edge, s.cloud, cfg.cloud_wait);
        edge_resp_a = net.t_edge + analytic::mm1_two_phase_wait(s.edge) + 1.0 / s.edge.mu1 +
                      analytic::migration_service_time(s.edge.r, s.edge.mu2);
    } catch (const unstable_queue& e) {
        row.status = std::string("skipped: ") + e.what();
    }
    row.extras.emplace_back("edge_response_analytic", edge_resp_a);

    double edge_resp_s = std::numeric_limits<double>::infinity();
    if (row.status == "ok") {
        auto edge = s;
        edge.model = sim_model::two_phase_edge;
        try {
            const auto re = replicate(edge, sc.replications, st, 1);
            edge_resp_s = re.summary["mean_response"].mean;
            row.sim_value = (edge_resp_s - net.t_edge) - (cloud_resp_s - net.t_cloud);
            row.sim_ci = std::hypot(re.summary["mean_response"].half_width(), rc.summary["mean_response"].half_width());
        } catch (const runtime_instability& e) {
            row.status = std::string("unstable: ") + e.what();
        }
    }
    row.extras.emplace_back("edge_response_sim", edge_resp_s);
    row.extras.emplace_back("edge_faster_analytic", edge_resp_a < cloud_resp_a ? 1.0 : 0.0);
    row.extras.emplace_back("edge_faster_sim", edge_resp_s < cloud_resp_s ? 1.0 : 0.0);
    return row;
}

inline comparison_row evaluate_excess(run_config cfg, const scenario& sc, seeded_stream st) {
    comparison_row row;
    auto& s = cfg.sim;
    s.model = sim_model::mtm1_sinusoidal;
    const double mu = analytic::effective_service_rate(s.edge.mu1, s.edge.mu2, s.edge.r);
    const double rho = s.profile.lambda_bar / mu;
    const double stationary = rho / (mu * (1.0 - rho));
    row.analytic_value = analytic::excess_wait_sinusoidal(rho, s.profile.amplitude, s.profile.gamma, mu);
    const auto r = replicate(s, sc.replications, st, 1);
    row.sim_value = r.summary["mean_wait"].mean - stationary;
    row.sim_ci = r.summary["mean_wait"].half_width();
    row.extras.emplace_back("mean_wait_sim", r.summary["mean_wait"].mean);
    row.extras.emplace_back("stationary_wait", stationary);
    row.extras.emplace_back("analytic_over_sim", row.analytic_value / row.sim_value);
    return row;
}

inline comparison_row evaluate_rush(run_config cfg, const scenario& sc, seeded_stream st) {
    comparison_row row;
    auto& s = cfg.sim;
    s.model = sim_model::mtm1_sinusoidal;
    const double mu = analytic::effective_service_rate(s.edge.mu1, s.edge.mu2, s.edge.r);
    row.analytic_value = analytic::rush_hour_wait(s.profile, mu, s.rush_rule);
    const auto stat = option_string(sc.options, "rush_statistic", "peak_bin");
    if (stat != "peak_bin" && stat != "window_mean")
        throw config_error("options.rush_statistic must be 'peak_bin' or 'window_mean'");
    const auto r = replicate(s, sc.replications, st, 1);
    const auto& rw = r.mean_series->rush_window;
    double rush = 0.0, ci = 0.0;
    if (rw) {
        rush = stat == "peak_bin" ? rw->peak_bin_wait : rw->mean_wait_in_window;
        ci = stat == "peak_bin" ? std::numeric_limits<double>::quiet_NaN() : r.window_wait->half_width();
    }
    row.sim_value = rush;
    row.sim_ci = ci;
    row.extras.emplace_back("mean_wait_sim", r.summary["mean_wait"].mean);
    row.extras.emplace_back("window_mean_wait_sim", rw ? rw->mean_wait_in_window : 0.0);
    row.extras.emplace_back("peak_bin_wait_sim", rw ? rw->peak_bin_wait : 0.0);
    row.extras.emplace_back("mu_eff", mu);
    return row;
}

inline comparison_row evaluate_packing(const run_config& cfg, const packing_context& ctx) {
    comparison_row row;
    const int x = cfg.capacity.cores_per_server;
    const double q = cfg.capacity.q;
    const double predicted = ctx.cloud.cores_per_server * capacity::edge_overprovision_factor(q);
    const topology edge{topology::kind::edge, cfg.capacity.k_sites, 1, x};
    const auto rep = simulate_packing(ctx.trace, edge, ctx.opt);
    row.analytic_value = std::abs(x - predicted) / predicted;
    row.sim_value = relative_error(rep, edge, ctx.cloud_report, ctx.cloud, q, ctx.metric);
    row.extras.emplace_back("model_predicted_cores", predicted);
    row.extras.emplace_back("model_point", std::abs(x - predicted) < 0.5 ? 1.0 : 0.0);
    row.extras.emplace_back("delayed_fraction", rep.delayed_fraction);
    row.extras.emplace_back("cloud_delayed_fraction", ctx.cloud_report.delayed_fraction);
    row.extras.emplace_back("peak_servers_used", static_cast<double>(rep.peak_servers_used));
    row.extras.emplace_back("cloud_peak_servers_used", static_cast<double>(ctx.cloud_report.peak_servers_used));
    row.extras.emplace_back("mean_delay", rep.mean_delay);
    return row;
}

inline packing_context make_packing_context(const scenario& sc, const run_config& base) {
    packing_context ctx;
    const auto& o = sc.options;
    const int servers = static_cast<int>(option_number(o, "cloud_servers", 1000));
    const int cores = static_cast<int>(option_number(o, "cloud_cores_per_server", 64));
    if (servers < 1 || cores < 1)
        throw config_error("cloud_servers and cloud_cores_per_server must be positive");
    ctx.cloud = {topology::kind::cloud, 1, servers, cores};
    if (!base.capacity.trace.empty()) {
        ctx.trace = load_vm_trace(base.capacity.trace);
    } else {
        synthetic_trace_spec spec;
        spec.count = static_cast<std::size_t>(option_number(o, "synthetic_count", 400000));
        spec.mean_lifetime = option_number(o, "synthetic_mean_lifetime", 1.0);
        const double rho = option_number(o, "synthetic_rho", 0.95);
        spec.arrival_rate = rho * servers * cores / (mean_size(spec) * spec.mean_lifetime);
        ctx.trace = synthetic_trace(spec, seeded_stream{sc.seed, 0}.child(0, replication_stride));
    }
    ctx.opt.policy = base.capacity.policy == "best_fit" ? packing_policy::best_fit
                     : base.capacity.policy == "first_fit" ? packing_policy::first_fit
                                                           : packing_policy::first_fit_decreasing_batch;
    ctx.opt.assign = base.capacity.assign == "hint" ? site_assignment::hint : site_assignment::uniform;
    ctx.opt.stream = seeded_stream{sc.seed, 0}.child(1, replication_stride);
    const auto metric = option_string(o, "metric", "peak_capacity");
    if (metric != "peak_capacity" && metric != "delayed_fraction")
        throw config_error("options.metric must be 'peak_capacity' or 'delayed_fraction'");
    ctx.metric = metric == "peak_capacity" ? error_metric::peak_capacity
                                           : error_metric::delayed_fraction;
    ctx.cloud_report = simulate_packing(ctx.trace, ctx.cloud, ctx.opt);
    return ctx;
}

} // namespace harness_detail

/// One row per grid point, in grid order. Failures at a point are recorded
/// in the row's status and never abort the sweep.
inline std::vector<comparison_row> evaluate_scenario(const scenario& sc, unsigned workers = default_workers()) {
    using namespace harness_detail;
    validate(sc);
    const run_config base = parse_config(sc.base);
    const auto points = expand(sc.grid);
    std::optional<packing_context> packing;
    int packing_sites = 0;
    if (sc.model == "packing") {
        packing = make_packing_context(sc, base);
        packing_sites = static_cast<int>(option_number(sc.options, "sites", packing->cloud.servers_per_site));
        if (packing_sites < 1)
            throw config_error("options.sites must be positive");
    }
    std::vector<comparison_row> rows(points.size());
    parallel_for(points.size(), workers, [&](std::size_t g) {
        comparison_row row;
        try {
            run_config cfg = base;
            double scale = 1.0;
            for (const auto& [k, v] : points[g]) {
                apply_param(cfg, k, v);
                if (k == "scale")
                    scale = v;
            }
            if (scale != 1.0)
                apply_scale(cfg, scale);
            const seeded_stream st{sc.seed, g + 1};
            if (sc.model == "two_phase_edge" || sc.model == "gg1_edge") {
                cfg.sim.model = sc.model == "gg1_edge" ? sim_model::gg1_edge : sim_model::two_phase_edge;
                row = evaluate_edge(cfg, sc, st);
            } else if (sc.model == "mmk_cloud") {
                row = evaluate_mmk(cfg, sc, st);
            } else if (sc.model == "mobility") {
                row = evaluate_mobility(cfg, sc, st);
            } else if (sc.model == "excess_wait") {
                row = evaluate_excess(cfg, sc, st);
            } else if (sc.model == "rush_hour") {
                row = evaluate_rush(cfg, sc, st);
            } else {
                cfg.capacity.k_sites = packing_sites;
                row = evaluate_packing(cfg, *packing);
            }
            if (row.status == "ok" || !std::isnan(row.sim_value))
                row.set_errors();
        } catch (const error& e) {
            row.status = std::string("error: ") + e.what();
        }
        row.parameters = points[g];
        rows[g] = std::move(row);
    });
    return rows;
}

/// Formats a number with 9 significant digits; non-finite values become
/// "nan", "inf" or "-inf".
inline std::string format_number(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline void write_csv(std::ostream& out, const std::vector<comparison_row>& rows) {
    if (rows.empty())
        return;
    const auto& first = rows.front();
    std::vector<std::string> extra_names;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.extras)
            if (std::find(extra_names.begin(), extra_names.end(), k) == extra_names.end())
                extra_names.push_back(k);
    for (const auto& [k, v] : first.parameters)
        out << csv_field(k) << ',';
    out << "analytic_value,sim_value,sim_ci,abs_err,rel_err,status";
    for (const auto& k : extra_names)
        out << ',' << csv_field(k);
    out << "\r\n";
    for (const auto& r : rows) {
        for (const auto& [k, v] : r.parameters)
            out << format_number(v) << ',';
        out << format_number(r.analytic_value) << ',' << format_number(r.sim_value) << ','
            << format_number(r.sim_ci) << ',' << format_number(r.abs_err) << ',' << format_number(r.rel_err) << ','
            << csv_field(r.status);
        for (const auto& k : extra_names) {
            out << ',';
            for (const auto& [name, v] : r.extras)
                if (name == k)
                    out << format_number(v);
        }
        out << "\r\n";
    }
}

inline json number_json(double x) {
    if (!std::isfinite(x))
        return nullptr;
    return std::stod(format_number(x));
}

inline json to_json(const std::vector<comparison_row>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json params = json::object(), extras = json::object();
        for (const auto& [k, v] : r.parameters)
            params[k] = number_json(v);
        for (const auto& [k, v] : r.extras)
            extras[k] = number_json(v);
        arr.push_back({{"parameters", params},
                       {"analytic_value", number_json(r.analytic_value)},
                       {"sim_value", number_json(r.sim_value)},
                       {"sim_ci", number_json(r.sim_ci)},
                       {"abs_err", number_json(r.abs_err)},
                       {"rel_err", number_json(r.rel_err)},
                       {"status", r.status},
                       {"extras", extras}});
    }
    return arr;
}

struct scenario_result {
    std::vector<comparison_row> rows;
    std::vector<std::string> files;
};

inline std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

/// Evaluates the scenario and writes `{name}_{timestamp}.{csv,json}` (or
/// `{name}.{ext}` with deterministic names) into `dir`.
inline scenario_result run_scenario(const scenario& sc, const std::string& dir = ".", bool deterministic_names = false,
                                    unsigned workers = default_workers()) {
    scenario_result out;
    out.rows = evaluate_scenario(sc, workers);
    if (dir.empty())
        return out;
    std::filesystem::create_directories(dir);
    const std::string stem = sc.name + (deterministic_names ? "" : "_" + timestamp_utc());
    for (const auto& fmt : sc.outputs) {
        const auto path = (std::filesystem::path(dir) / (stem + "." + fmt)).string();
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw config_error("cannot write '" + path + "'");
        if (fmt == "csv") {
            write_csv(f, out.rows);
        } else {
            json doc{{"scenario", sc.name}, {"model", sc.model}, {"seed", sc.seed},
                     {"replications", sc.replications}, {"rows", to_json(out.rows)}};
            f << doc.dump(2) << '\n';
        }
        out.files.push_back(path);
    }
    return out;
}

/// Rush-hour table over `amplitudes`, run at scale 1 and at `companion_scale`
/// times every rate (utilization and period unchanged). Rows carry the
/// parameters (scale, amplitude); analytic is the fluid estimate, sim the
/// rush-window wait, and extras hold the overall simulated mean wait.
inline std::vector<comparison_row> table_rush_hour(const json& base, const std::vector<double>& amplitudes,
                                                   double companion_scale, std::uint64_t seed, int replications = 30,
                                                   const json& options = json::object(),
                                                   unsigned workers = default_workers()) {
    scenario sc;
    sc.name = "rush_hour";
    sc.model = "rush_hour";
    sc.seed = seed;
    sc.replications = replications;
    sc.base = base;
    sc.options = options;
    sc.grid = {{"scale", {1.0, companion_scale}}, {"amplitude", amplitudes}};
    return evaluate_scenario(sc, workers);
}

} // namespace edgeq

#endif // EDGEQ_HARNESS_HPP
