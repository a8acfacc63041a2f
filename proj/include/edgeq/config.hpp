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

#ifndef EDGEQ_CONFIG_HPP
#define EDGEQ_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeq/analytic.hpp"
#include "edgeq/capacity.hpp"
#include "edgeq/desim.hpp"
#include "edgeq/errors.hpp"

/// JSON run configuration. Every section is optional; unknown keys are
/// errors. Units: rates per second, times in seconds, angles in radians.
namespace edgeq {

using json = nlohmann::ordered_json;

struct capacity_config {
    double c_edge = 96.0;
    double rho_edge = 0.5;
    double rho_cloud = 0.5;
    double tau = 0.0;
    double q = 2.0;
    std::string trace;
    std::string mode = "edge"; ///< edge | cloud
    int k_sites = 1;
    int servers_per_site = 1;
    int cores_per_server = 64;
    std::string policy = "first_fit"; ///< first_fit | best_fit | first_fit_decreasing_batch
    std::string assign = "uniform";   ///< uniform | hint
};

struct output_config {
    std::string dir = ".";
    std::vector<std::string> formats{"json"};
    bool deterministic_names = false;
};

struct run_config {
    sim_config sim;
    analytic::cloud_wait_form cloud_wait = analytic::cloud_wait_form::qed_conditional;
    int replications = 1;
    std::optional<std::uint64_t> seed;
    std::string event_log;
    capacity_config capacity;
    output_config output;
};

namespace config_detail {

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw config_error("'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw config_error("unknown key '" + where + "." + it.key() + "'");
    }
}

inline double number(const json& v, const std::string& where) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
        return std::numeric_limits<double>::infinity();
    throw config_error("'" + where + "' must be a number");
}

inline json number_out(double x) {
    if (std::isinf(x))
        return "inf";
    return x;
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
    if (!obj.contains(key))
        return;
    const auto& v = obj.at(key);
    const std::string where = section + "." + key;
    if constexpr (std::is_same_v<T, double>) {
        out = number(v, where);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean())
            throw config_error("'" + where + "' must be true or false");
        out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
            throw config_error("'" + where + "' must be an integer" + (std::is_unsigned_v<T> ? " >= 0" : ""));
        out = v.get<T>();
    } else {
        if (!v.is_string())
            throw config_error("'" + where + "' must be a string");
        out = v.get<std::string>();
    }
}

inline renewal_spec read_law(const json& obj, const std::string& where, renewal_spec law) {
    only_keys(obj, where, {"family", "scv"});
    std::string fam(to_string(law.family));
    read(obj, "family", fam, where);
    try {
        law.family = parse_renewal_family(fam);
    } catch (const domain_error& e) {
        throw config_error(where + ": " + e.what());
    }
    read(obj, "scv", law.scv, where);
    return law;
}

inline json write_law(const renewal_spec& law) { return json{{"family", to_string(law.family)}, {"scv", law.scv}}; }

inline std::string to_string(analytic::cloud_wait_form f) {
    return f == analytic::cloud_wait_form::qed_conditional ? "qed" : "erlang_c";
}

inline std::string to_string(analytic::crossing_rule r) {
    return r == analytic::crossing_rule::published ? "published" : "exact";
}

inline std::string to_string(window_statistic w) {
    return w == window_statistic::arrivals_in_window ? "arrivals_in_window" : "served_in_window";
}

} // namespace config_detail

/// Overlays the sections present in `doc` onto `cfg`.
inline void apply_config(run_config& cfg, const json& doc) {
    using namespace config_detail;
    only_keys(doc, "config", {"model", "edge", "cloud", "network", "workload", "simulation", "capacity", "output"});
    auto& s = cfg.sim;

    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        only_keys(m, "model", {"type", "cloud_wait", "crossing_rule"});
        std::string type(to_string(s.model)), wait = to_string(cfg.cloud_wait), rule = to_string(s.rush_rule);
        read(m, "type", type, "model");
        read(m, "cloud_wait", wait, "model");
        read(m, "crossing_rule", rule, "model");
        s.model = parse_sim_model(type);
        if (wait != "qed" && wait != "erlang_c")
            throw config_error("model.cloud_wait must be 'qed' or 'erlang_c'");
        cfg.cloud_wait = wait == "qed" ? analytic::cloud_wait_form::qed_conditional : analytic::cloud_wait_form::erlang_c;
        if (rule != "published" && rule != "exact")
            throw config_error("model.crossing_rule must be 'published' or 'exact'");
        s.rush_rule = rule == "published" ? analytic::crossing_rule::published : analytic::crossing_rule::exact;
    }
    if (doc.contains("edge")) {
        const auto& e = doc.at("edge");
        only_keys(e, "edge", {"lambda", "mu1", "mu2", "r", "mu_dest", "dest_home_lambda", "count_destination_service"});
        read(e, "lambda", s.edge.lambda, "edge");
        read(e, "mu1", s.edge.mu1, "edge");
        read(e, "mu2", s.edge.mu2, "edge");
        read(e, "r", s.edge.r, "edge");
        read(e, "mu_dest", s.mu_dest, "edge");
        read(e, "dest_home_lambda", s.dest_home_lambda, "edge");
        read(e, "count_destination_service", s.count_destination_service, "edge");
    }
    if (doc.contains("cloud")) {
        const auto& c = doc.at("cloud");
        only_keys(c, "cloud", {"k", "mu", "rho"});
        read(c, "k", s.cloud.k, "cloud");
        read(c, "mu", s.cloud.mu_cloud, "cloud");
        read(c, "rho", s.cloud.rho_cloud, "cloud");
    }
    if (doc.contains("network")) {
        const auto& n = doc.at("network");
        only_keys(n, "network", {"t_edge", "t_cloud"});
        read(n, "t_edge", s.network.t_edge, "network");
        read(n, "t_cloud", s.network.t_cloud, "network");
        if (s.network.t_edge < 0.0 || s.network.t_cloud < 0.0)
            throw config_error("network round trips must be non-negative");
    }
    if (doc.contains("workload")) {
        const auto& w = doc.at("workload");
        only_keys(w, "workload",
                  {"interarrival", "service1", "service2", "lambda_bar", "amplitude", "gamma_rad_s", "period_s",
                   "phase", "two_stage_service"});
        if (w.contains("interarrival"))
            s.interarrival = read_law(w.at("interarrival"), "workload.interarrival", s.interarrival);
        if (w.contains("service1"))
            s.service1 = read_law(w.at("service1"), "workload.service1", s.service1);
        if (w.contains("service2"))
            s.service2 = read_law(w.at("service2"), "workload.service2", s.service2);
        read(w, "lambda_bar", s.profile.lambda_bar, "workload");
        read(w, "amplitude", s.profile.amplitude, "workload");
        read(w, "phase", s.profile.phase, "workload");
        read(w, "two_stage_service", s.two_stage_service, "workload");
        if (w.contains("gamma_rad_s") && w.contains("period_s"))
            throw config_error("workload.gamma_rad_s and workload.period_s are mutually exclusive");
        read(w, "gamma_rad_s", s.profile.gamma, "workload");
        if (w.contains("period_s")) {
            double period = 0.0;
            read(w, "period_s", period, "workload");
            if (!(period > 0.0))
                throw config_error("workload.period_s must be positive");
            s.profile.gamma = 2.0 * std::numbers::pi / period;
        }
    }
    if (doc.contains("simulation")) {
        const auto& m = doc.at("simulation");
        only_keys(m, "simulation",
                  {"requests", "horizon_s", "warmup", "periods", "warmup_periods", "bins_per_period",
                   "window_statistic", "max_in_system", "replications", "seed", "event_log"});
        read(m, "requests", s.requests, "simulation");
        read(m, "horizon_s", s.horizon_s, "simulation");
        read(m, "warmup", s.warmup, "simulation");
        read(m, "periods", s.periods, "simulation");
        read(m, "warmup_periods", s.warmup_periods, "simulation");
        read(m, "bins_per_period", s.bins_per_period, "simulation");
        std::string ws = to_string(s.window_stat);
        read(m, "window_statistic", ws, "simulation");
        if (ws != "arrivals_in_window" && ws != "served_in_window")
            throw config_error("simulation.window_statistic must be 'arrivals_in_window' or 'served_in_window'");
        s.window_stat = ws == "arrivals_in_window" ? window_statistic::arrivals_in_window
                                                   : window_statistic::served_in_window;
        read(m, "max_in_system", s.max_in_system, "simulation");
        read(m, "replications", cfg.replications, "simulation");
        if (m.contains("seed")) {
            std::uint64_t seed = 0;
            read(m, "seed", seed, "simulation");
            cfg.seed = seed;
        }
        read(m, "event_log", cfg.event_log, "simulation");
        if (cfg.replications < 1)
            throw config_error("simulation.replications must be at least 1");
        if (!(s.warmup >= 0.0 && s.warmup < 1.0))
            throw config_error("simulation.warmup must lie in [0, 1)");
    }
    if (doc.contains("capacity")) {
        const auto& c = doc.at("capacity");
        auto& k = cfg.capacity;
        only_keys(c, "capacity",
                  {"c_edge", "rho_edge", "rho_cloud", "tau", "q", "trace", "mode", "k_sites", "servers_per_site",
                   "cores_per_server", "policy", "assign"});
        read(c, "c_edge", k.c_edge, "capacity");
        read(c, "rho_edge", k.rho_edge, "capacity");
        read(c, "rho_cloud", k.rho_cloud, "capacity");
        read(c, "tau", k.tau, "capacity");
        read(c, "q", k.q, "capacity");
        read(c, "trace", k.trace, "capacity");
        read(c, "mode", k.mode, "capacity");
        read(c, "k_sites", k.k_sites, "capacity");
        read(c, "servers_per_site", k.servers_per_site, "capacity");
        read(c, "cores_per_server", k.cores_per_server, "capacity");
        read(c, "policy", k.policy, "capacity");
        read(c, "assign", k.assign, "capacity");
        if (k.mode != "edge" && k.mode != "cloud")
            throw config_error("capacity.mode must be 'edge' or 'cloud'");
        if (k.policy != "first_fit" && k.policy != "best_fit" && k.policy != "first_fit_decreasing_batch")
            throw config_error("capacity.policy must be first_fit, best_fit or first_fit_decreasing_batch");
        if (k.assign != "uniform" && k.assign != "hint")
            throw config_error("capacity.assign must be 'uniform' or 'hint'");
    }
    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        only_keys(o, "output", {"dir", "formats", "deterministic_names"});
        read(o, "dir", cfg.output.dir, "output");
        read(o, "deterministic_names", cfg.output.deterministic_names, "output");
        if (o.contains("formats")) {
            const auto& f = o.at("formats");
            if (!f.is_array())
                throw config_error("output.formats must be a list");
            cfg.output.formats.clear();
            for (const auto& x : f) {
                if (!x.is_string() || (x.get<std::string>() != "csv" && x.get<std::string>() != "json"))
                    throw config_error("output.formats entries must be 'csv' or 'json'");
                cfg.output.formats.push_back(x.get<std::string>());
            }
        }
    }
}

inline run_config parse_config(const json& doc) {
    run_config cfg;
    apply_config(cfg, doc);
    return cfg;
}

inline run_config parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    return parse_config(doc);
}

inline run_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical form: every key present, gamma stored as gamma_rad_s.
inline json to_json(const run_config& cfg) {
    using namespace config_detail;
    const auto& s = cfg.sim;
    json sim{{"requests", s.requests},
             {"horizon_s", s.horizon_s},
             {"warmup", s.warmup},
             {"periods", s.periods},
             {"warmup_periods", s.warmup_periods},
             {"bins_per_period", s.bins_per_period},
             {"window_statistic", to_string(s.window_stat)},
             {"max_in_system", s.max_in_system},
             {"replications", cfg.replications}};
    if (cfg.seed)
        sim["seed"] = *cfg.seed;
    sim["event_log"] = cfg.event_log;
    const auto& k = cfg.capacity;
    return json{
        {"model",
         {{"type", edgeq::to_string(s.model)},
          {"cloud_wait", to_string(cfg.cloud_wait)},
          {"crossing_rule", to_string(s.rush_rule)}}},
        {"edge",
         {{"lambda", s.edge.lambda},
          {"mu1", s.edge.mu1},
          {"mu2", number_out(s.edge.mu2)},
          {"r", s.edge.r},
          {"mu_dest", s.mu_dest},
          {"dest_home_lambda", s.dest_home_lambda},
          {"count_destination_service", s.count_destination_service}}},
        {"cloud", {{"k", s.cloud.k}, {"mu", s.cloud.mu_cloud}, {"rho", s.cloud.rho_cloud}}},
        {"network", {{"t_edge", s.network.t_edge}, {"t_cloud", s.network.t_cloud}}},
        {"workload",
         {{"interarrival", write_law(s.interarrival)},
          {"service1", write_law(s.service1)},
          {"service2", write_law(s.service2)},
          {"lambda_bar", s.profile.lambda_bar},
          {"amplitude", s.profile.amplitude},
          {"gamma_rad_s", s.profile.gamma},
          {"phase", s.profile.phase},
          {"two_stage_service", s.two_stage_service}}},
        {"simulation", sim},
        {"capacity",
         {{"c_edge", k.c_edge},
          {"rho_edge", k.rho_edge},
          {"rho_cloud", k.rho_cloud},
          {"tau", k.tau},
          {"q", number_out(k.q)},
          {"trace", k.trace},
          {"mode", k.mode},
          {"k_sites", k.k_sites},
          {"servers_per_site", k.servers_per_site},
          {"cores_per_server", k.cores_per_server},
          {"policy", k.policy},
          {"assign", k.assign}}},
        {"output",
         {{"dir", cfg.output.dir},
          {"formats", cfg.output.formats},
          {"deterministic_names", cfg.output.deterministic_names}}},
    };
}

/// Parses and re-serializes; applying it twice gives the same text.
inline std::string canonicalize(const std::string& text) { return to_json(parse_config_text(text)).dump(2); }

} // namespace edgeq

#endif // EDGEQ_CONFIG_HPP
