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

#ifndef EDGEQ_CLI_HPP
#define EDGEQ_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "edgeq/analytic.hpp"
#include "edgeq/capacity.hpp"
#include "edgeq/config.hpp"
#include "edgeq/desim.hpp"
#include "edgeq/errors.hpp"
#include "edgeq/harness.hpp"

namespace edgeq::cli {

enum exit_code : int { ok = 0, invalid = 2, unstable = 3 };

/// Ordered name/value report, printed as `name value` lines or as one JSON
/// object.
class report {
public:
    report& add(std::string name, double v) {
        nums_.emplace_back(std::move(name), v);
        order_.push_back({false, nums_.size() - 1});
        return *this;
    }

    report& add(std::string name, std::string v) {
        strs_.emplace_back(std::move(name), std::move(v));
        order_.push_back({true, strs_.size() - 1});
        return *this;
    }

    void print(std::ostream& out, bool as_json) const {
        if (as_json) {
            json j = json::object();
            for (auto [is_str, i] : order_)
                if (is_str)
                    j[strs_[i].first] = strs_[i].second;
                else
                    j[nums_[i].first] = number_json(nums_[i].second);
            out << j.dump(2) << '\n';
            return;
        }
        for (auto [is_str, i] : order_)
            if (is_str)
                out << strs_[i].first << ' ' << strs_[i].second << '\n';
            else
                out << nums_[i].first << ' ' << format_number(nums_[i].second) << '\n';
    }

private:
    std::vector<std::pair<std::string, double>> nums_;
    std::vector<std::pair<std::string, std::string>> strs_;
    std::vector<std::pair<bool, std::size_t>> order_;
};

/// --seed, then the config file, then EDGEQ_SEED, then 1.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> from_config) {
    if (flag)
        return *flag;
    if (from_config)
        return *from_config;
    if (const char* env = std::getenv("EDGEQ_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size())
                return v;
        } catch (const std::exception&) {
        }
        throw config_error("EDGEQ_SEED must be a non-negative integer");
    }
    return 1;
}

/// Parses `edge:k=4,cores=96[,servers=1]` or `cloud:servers=1000,cores=64`.
inline topology parse_topology(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    topology t;
    if (kind == "edge")
        t.mode = topology::kind::edge;
    else if (kind == "cloud")
        t.mode = topology::kind::cloud;
    else
        throw config_error("topology must start with 'edge:' or 'cloud:'");
    if (colon == std::string::npos)
        return t;
    std::stringstream rest(text.substr(colon + 1));
    for (std::string item; std::getline(rest, item, ',');) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw config_error("topology item '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        int v = 0;
        try {
            v = std::stoi(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw config_error("topology value for '" + key + "' is not an integer");
        }
        if (v < 1)
            throw config_error("topology value for '" + key + "' must be at least 1");
        if (key == "k")
            t.k_sites = v;
        else if (key == "servers")
            t.servers_per_site = v;
        else if (key == "cores")
            t.cores_per_server = v;
        else
            throw config_error("unknown topology key '" + key + "'");
    }
    return t;
}

inline void write_metrics_files(const run_config& cfg, const replication_result& r, std::uint64_t seed,
                                std::vector<std::string>& written) {
    const auto& out = cfg.output;
    std::filesystem::create_directories(out.dir);
    const std::string stem = "simulate" + (out.deterministic_names ? std::string() : "_" + timestamp_utc());
    for (const auto& fmt : out.formats) {
        const auto path = (std::filesystem::path(out.dir) / (stem + "." + fmt)).string();
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw config_error("cannot write '" + path + "'");
        if (fmt == "json") {
            json metrics = json::object();
            for (const auto& [name, e] : r.summary.fields)
                metrics[name] = {{"mean", number_json(e.mean)},
                                 {"stderr", e.stderr_defined ? number_json(e.stderr_) : json(nullptr)},
                                 {"ci_low", number_json(e.ci_low)},
                                 {"ci_high", number_json(e.ci_high)}};
            json doc{{"model", std::string(to_string(cfg.sim.model))},
                     {"seed", seed},
                     {"replications", r.runs.size()},
                     {"metrics", metrics}};
            if (r.mean_series) {
                json bins = json::array();
                for (const auto& b : r.mean_series->bins)
                    bins.push_back({{"t", number_json(b.t_center)},
                                    {"mean_wait", number_json(b.mean_wait)},
                                    {"mean_rate", number_json(b.mean_rate)},
                                    {"count", b.count}});
                doc["time_series"] = {{"period", number_json(r.mean_series->period)}, {"bins", bins}};
                if (const auto& rw = r.mean_series->rush_window)
                    doc["rush_window"] = {{"t1", number_json(rw->t1)},
                                          {"t2", number_json(rw->t2)},
                                          {"mean_wait_in_window", number_json(rw->mean_wait_in_window)},
                                          {"peak_bin_wait", number_json(rw->peak_bin_wait)},
                                          {"count", rw->count}};
            }
            f << doc.dump(2) << '\n';
        } else {
            f << "metric,mean,stderr,ci_low,ci_high\r\n";
            for (const auto& [name, e] : r.summary.fields)
                f << name << ',' << format_number(e.mean) << ','
                  << (e.stderr_defined ? format_number(e.stderr_) : std::string()) << ',' << format_number(e.ci_low)
                  << ',' << format_number(e.ci_high) << "\r\n";
            if (r.mean_series) {
                const auto series_path = (std::filesystem::path(out.dir) / (stem + "_series.csv")).string();
                std::ofstream s(series_path, std::ios::binary);
                s << "t,mean_wait,mean_rate,count\r\n";
                for (const auto& b : r.mean_series->bins)
                    s << format_number(b.t_center) << ',' << format_number(b.mean_wait) << ','
                      << format_number(b.mean_rate) << ',' << b.count << "\r\n";
                written.push_back(series_path);
            }
        }
        written.push_back(path);
    }
}

/// Runs the command line and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Edge versus cloud queueing models, simulator and capacity planner", "edgeq"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "Print results as JSON");

    // analytic
    auto* an = app.add_subcommand("analytic", "Evaluate closed-form models");
    an->require_subcommand(1);
    double lambda = 0, mu1 = 0, mu2 = instantaneous, r = 0, ca2 = 1, cs2 = 1;
    int k = 1;
    double mu_cloud = 0, rho_cloud = 0;
    std::optional<double> t_edge, t_cloud;
    std::string mode = "mmk", form = "qed";
    auto edge_flags = [&](CLI::App* c) {
        c->add_option("--lambda", lambda, "Edge arrival rate (/s)")->required();
        c->add_option("--mu1", mu1, "Primary service rate (/s)")->required();
        c->add_option("--mu2", mu2, "Migration service rate (/s), inf for instantaneous");
        c->add_option("--r", r, "Migration probability");
    };
    auto cloud_flags = [&](CLI::App* c, bool required) {
        auto* ko = c->add_option("--k", k, "Cloud servers");
        auto* mo = c->add_option("--mu-cloud", mu_cloud, "Cloud service rate per server (/s)");
        auto* ro = c->add_option("--rho-cloud", rho_cloud, "Cloud utilization");
        if (required) {
            ko->required();
            mo->required();
            ro->required();
        }
        c->add_option("--form", form, "Cloud wait form: qed | erlang_c")->check(CLI::IsMember({"qed", "erlang_c"}));
    };

    auto* an_wait = an->add_subcommand("wait", "Edge mean wait (two-phase M/M/1, or G/G/1 with --ca2/--cs2)");
    edge_flags(an_wait);
    an_wait->add_option("--ca2", ca2, "Arrival SCV");
    an_wait->add_option("--cs2", cs2, "Service SCV");

    auto* an_cloud = an->add_subcommand("cloud-wait", "Cloud mean wait (M/M/k, or G/G/k with --ca2/--cs2)");
    cloud_flags(an_cloud, true);
    an_cloud->add_option("--ca2", ca2, "Arrival SCV");
    an_cloud->add_option("--cs2", cs2, "Service SCV");

    auto* an_dt = an->add_subcommand("deltat", "Smallest t_cloud - t_edge at which the edge is faster");
    edge_flags(an_dt);
    cloud_flags(an_dt, true);
    an_dt->add_option("--mode", mode, "mmk | ggk")->check(CLI::IsMember({"mmk", "ggk"}));
    an_dt->add_option("--ca2", ca2, "Arrival SCV (ggk)");
    an_dt->add_option("--cs2", cs2, "Service SCV (ggk)");
    an_dt->add_option("--t-edge", t_edge, "Edge RTT (s)");
    an_dt->add_option("--t-cloud", t_cloud, "Cloud RTT (s)");

    double q = 2;
    auto* an_factor = an->add_subcommand("factor", "Edge over-provisioning factor 1 + 1/q");
    an_factor->add_option("--q", q, "Packing factor")->required();

    double lambda_bar = 0, amplitude = 0, mu_eff = 0, rho = 0;
    std::optional<double> gamma, period;
    std::string rule = "published";
    auto profile_flags = [&](CLI::App* c) {
        auto* g = c->add_option("--gamma", gamma, "Angular frequency (rad/s)");
        auto* p = c->add_option("--period", period, "Period (s)");
        g->excludes(p);
        p->excludes(g);
        c->add_option("--amplitude", amplitude, "Relative amplitude A")->required();
        c->add_option("--mu-eff", mu_eff, "Effective service rate (/s)")->required();
    };
    auto* an_excess = an->add_subcommand("excess", "Second-order excess wait of a sinusoidal M(t)/M/1");
    profile_flags(an_excess);
    an_excess->add_option("--rho", rho, "Mean utilization")->required();

    auto* an_rush = an->add_subcommand("rush", "Fluid rush-hour wait");
    profile_flags(an_rush);
    an_rush->add_option("--lambda-bar", lambda_bar, "Mean arrival rate (/s)")->required();
    an_rush->add_option("--rule", rule, "Crossing rule: published | exact")
        ->check(CLI::IsMember({"published", "exact"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the discrete-event simulator from a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::string> out_dir;
    bool deterministic = false;
    sim->add_option("config", config_path, "Config file (JSON)")->required();
    sim->add_option("--seed", seed, "Seed (default: config, then EDGEQ_SEED, then 1)");
    sim->add_option("--reps", reps, "Replications");
    sim->add_option("--out", out_dir, "Output directory");
    sim->add_flag("--deterministic-names", deterministic, "Name files without a timestamp");

    // validate
    auto* val = app.add_subcommand("validate", "Run a scenario sweep and write comparison tables");
    std::string scenario_path;
    std::string val_dir = ".";
    unsigned workers = default_workers();
    val->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
    val->add_option("--seed", seed, "Override the scenario seed");
    val->add_option("--reps", reps, "Override the replication count");
    val->add_option("--out", val_dir, "Output directory");
    val->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    val->add_flag("--deterministic-names", deterministic, "Name files without a timestamp");

    // capacity
    auto* cap = app.add_subcommand("capacity", "Capacity planning");
    cap->require_subcommand(1);
    double c_edge = 96, rho_edge = 0.5, tau = 0;
    bool rho_equal = false;
    auto* cap_eq = cap->add_subcommand("equivalent", "Cloud capacity equivalent to an edge deployment");
    cap_eq->add_option("--c-edge", c_edge, "Edge capacity per site (cores)")->required();
    cap_eq->add_option("--q", q, "Packing factor");
    cap_eq->add_option("--rho-edge", rho_edge, "Edge utilization");
    auto* rc = cap_eq->add_option("--rho-cloud", rho_cloud, "Cloud utilization");
    cap_eq->add_flag("--rho-equal", rho_equal, "Use rho_cloud = rho_edge")->excludes(rc);
    cap_eq->add_option("--tau", tau, "Edge upload time term");

    auto* cap_pack = cap->add_subcommand("pack", "Replay a VM trace on a topology");
    std::string trace_path, topo_text, policy = "first_fit", assign = "uniform";
    cap_pack->add_option("--trace", trace_path, "VM trace CSV")->required();
    cap_pack->add_option("--topology", topo_text, "edge:k=4,cores=96[,servers=1] or cloud:servers=N,cores=C")
        ->required();
    cap_pack->add_option("--policy", policy, "first_fit | best_fit | first_fit_decreasing_batch")
        ->check(CLI::IsMember({"first_fit", "best_fit", "first_fit_decreasing_batch"}));
    cap_pack->add_option("--assign", assign, "uniform | hint")->check(CLI::IsMember({"uniform", "hint"}));
    cap_pack->add_option("--seed", seed, "Seed for uniform site assignment");

    auto* cap_rule = cap->add_subcommand("rule", "Two-sigma peak capacities for k Poisson sites");
    cap_rule->add_option("--lambda", lambda, "Per-site demand")->required();
    cap_rule->add_option("--k", k, "Sites")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return invalid;
    }

    auto profile = [&](double lb) {
        sinusoid_profile p{lb, amplitude, 0.0, 0.0};
        if (gamma)
            p.gamma = *gamma;
        else if (period && *period > 0.0)
            p.gamma = 2.0 * std::numbers::pi / *period;
        else
            throw config_error("give --gamma or a positive --period");
        return p;
    };
    auto wait_form = [&] {
        return form == "qed" ? analytic::cloud_wait_form::qed_conditional : analytic::cloud_wait_form::erlang_c;
    };

    try {
        report rep;
        if (an->parsed()) {
            if (an_wait->parsed()) {
                const queue_spec e{lambda, mu1, mu2, r};
                rep.add("lambda", lambda).add("mu1", mu1).add("mu2", mu2).add("r", r);
                const bool general = ca2 != 1.0 || cs2 != 1.0;
                if (general)
                    rep.add("ca2", ca2).add("cs2", cs2);
                const auto terms = analytic::mm1_two_phase_wait_terms(e);
                const double scale = general ? (ca2 + cs2) / 2.0 : 1.0;
                analytic::validate(variability_spec{ca2, cs2});
                rep.add("source_wait_s", terms.source * scale)
                    .add("destination_wait_s", terms.destination * scale)
                    .add("wait_s", general ? analytic::gg1_two_phase_wait(e, {ca2, cs2}) : terms.total());
            } else if (an_cloud->parsed()) {
                const cloud_spec c{k, mu_cloud, rho_cloud};
                rep.add("k", k).add("mu_cloud", mu_cloud).add("rho_cloud", rho_cloud);
                if (ca2 != 1.0 || cs2 != 1.0)
                    rep.add("ca2", ca2).add("cs2", cs2).add("form", "allen_cunneen")
                        .add("wait_s", analytic::ggk_cloud_wait(c, {ca2, cs2}));
                else
                    rep.add("form", form).add("wait_s", analytic::mmk_cloud_wait(c, wait_form()));
            } else if (an_dt->parsed()) {
                const queue_spec e{lambda, mu1, mu2, r};
                const cloud_spec c{k, mu_cloud, rho_cloud};
                rep.add("mode", mode).add("lambda", lambda).add("mu1", mu1).add("mu2", mu2).add("r", r);
                rep.add("k", k).add("mu_cloud", mu_cloud).add("rho_cloud", rho_cloud);
                double bound = 0.0;
                if (mode == "mmk") {
                    rep.add("form", form);
                    bound = analytic::delta_t_bound_mmk(e, c, wait_form());
                } else {
                    rep.add("ca2", ca2).add("cs2", cs2);
                    bound = analytic::delta_t_bound_ggk(e, {ca2, cs2}, c, {ca2, cs2});
                }
                rep.add("delta_t_bound_s", bound);
                if (t_edge && t_cloud) {
                    const network_spec net{*t_edge, *t_cloud};
                    rep.add("t_edge", *t_edge).add("t_cloud", *t_cloud).add("delta_t_s", net.delta_t());
                    rep.add("edge_wins", analytic::edge_wins(net, bound) ? "true" : "false");
                }
            } else if (an_factor->parsed()) {
                rep.add("q", q).add("factor", capacity::edge_overprovision_factor(q));
            } else if (an_excess->parsed()) {
                const auto p = profile(rho * mu_eff);
                rep.add("rho", rho).add("amplitude", amplitude).add("gamma", p.gamma).add("mu_eff", mu_eff);
                rep.add("stationary_wait_s", rho / (mu_eff * (1.0 - rho)));
                rep.add("excess_wait_s", analytic::excess_wait_sinusoidal(rho, amplitude, p.gamma, mu_eff));
            } else {
                const auto p = profile(lambda_bar);
                const auto cr = rule == "exact" ? analytic::crossing_rule::exact : analytic::crossing_rule::published;
                rep.add("lambda_bar", lambda_bar).add("amplitude", amplitude).add("gamma", p.gamma);
                rep.add("mu_eff", mu_eff).add("rule", rule);
                const auto fb = analytic::fluid_backlog(p, mu_eff, cr);
                if (fb.window)
                    rep.add("t1", fb.window->t1).add("t2", fb.window->t2).add("theta", fb.window->theta);
                rep.add("backlog", fb.backlog()).add("rush_wait_s", analytic::rush_hour_wait(p, mu_eff, cr));
            }
            rep.print(out, as_json);
            return ok;
        }

        if (sim->parsed()) {
            run_config cfg = load_config(config_path);
            const std::uint64_t s = resolve_seed(seed, cfg.seed);
            const int n = reps.value_or(cfg.replications);
            if (out_dir)
                cfg.output.dir = *out_dir;
            if (deterministic)
                cfg.output.deterministic_names = true;
            std::ofstream log;
            if (!cfg.event_log.empty()) {
                log.open(cfg.event_log, std::ios::binary);
                if (!log)
                    throw config_error("cannot open event log '" + cfg.event_log + "'");
                cfg.sim.event_log = &log;
            }
            const auto result = replicate(cfg.sim, n, seeded_stream{s, 0});
            std::vector<std::string> files;
            write_metrics_files(cfg, result, s, files);
            rep.add("model", std::string(to_string(cfg.sim.model))).add("seed", static_cast<double>(s));
            rep.add("replications", n);
            for (const char* m : {"mean_wait", "mean_response", "utilization_observed", "delay_probability"}) {
                const auto& e = result.summary[m];
                rep.add(m, e.mean);
                if (e.stderr_defined)
                    rep.add(std::string(m) + "_ci_half_width", e.half_width());
            }
            if (result.mean_series && result.mean_series->rush_window)
                rep.add("rush_peak_bin_wait", result.mean_series->rush_window->peak_bin_wait);
            for (const auto& f : files)
                rep.add("wrote", f);
            rep.print(out, as_json);
            return ok;
        }

        if (val->parsed()) {
            scenario sc = load_scenario(scenario_path);
            if (seed)
                sc.seed = *seed;
            if (reps)
                sc.replications = *reps;
            const auto res = run_scenario(sc, val_dir, deterministic, workers);
            if (as_json) {
                out << json{{"scenario", sc.name}, {"rows", to_json(res.rows)}, {"files", res.files}}.dump(2) << '\n';
            } else {
                write_csv(out, res.rows);
                for (const auto& f : res.files)
                    err << "wrote " << f << '\n';
            }
            return ok;
        }

        if (cap_eq->parsed()) {
            const double rc_used = rho_equal ? rho_edge : rho_cloud;
            rep.add("c_edge", c_edge).add("q", q).add("rho_edge", rho_edge).add("rho_cloud", rc_used).add("tau", tau);
            rep.add("c_cloud", capacity::cloud_capacity_equivalent(c_edge, rho_edge, tau, q, rc_used));
        } else if (cap_pack->parsed()) {
            const auto trace = load_vm_trace(trace_path);
            const auto topo = parse_topology(topo_text);
            packing_options opt;
            opt.policy = policy == "first_fit"  ? packing_policy::first_fit
                         : policy == "best_fit" ? packing_policy::best_fit
                                                : packing_policy::first_fit_decreasing_batch;
            opt.assign = assign == "hint" ? site_assignment::hint : site_assignment::uniform;
            opt.stream = seeded_stream{resolve_seed(seed, std::nullopt), 0};
            const auto p = simulate_packing(trace, topo, opt);
            rep.add("topology", topo_text).add("vms", static_cast<double>(trace.size()));
            rep.add("peak_servers_used", p.peak_servers_used).add("peak_cores_used", p.peak_cores_used);
            rep.add("peak_capacity_cores", p.peak_capacity(topo.cores_per_server));
            rep.add("peak_queued", p.rejected_or_queued).add("placed", static_cast<double>(p.placed));
            rep.add("delayed", static_cast<double>(p.delayed)).add("delayed_fraction", p.delayed_fraction);
            rep.add("mean_delay_s", p.mean_delay);
        } else {
            const auto c = analytic::empirical_rule_capacities(lambda, k);
            rep.add("lambda", lambda).add("k", k).add("c_edge", c.edge).add("c_cloud", c.cloud);
        }
        rep.print(out, as_json);
        return ok;
    } catch (const runtime_instability& e) {
        err << "error: " << e.what() << '\n';
        return unstable;
    } catch (const error& e) {
        err << "error: " << e.what() << '\n';
        return invalid;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return invalid;
    }
}

} // namespace edgeq::cli

#endif // EDGEQ_CLI_HPP
