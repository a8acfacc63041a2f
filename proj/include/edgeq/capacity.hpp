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

#ifndef EDGEQ_CAPACITY_HPP
#define EDGEQ_CAPACITY_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "edgeq/errors.hpp"
#include "edgeq/rng.hpp"
#include "edgeq/stats.hpp"

namespace edgeq {

/// Spatial queueing parameters of one site. `gos` and `area` are the
/// grade-of-service constant and region area of the repairman model.
struct dtrp_spec {
    double capacity = 1.0; ///< server units C
    double rho = 0.0;
    double tau = 0.0; ///< total expected upload time, seconds
    double q = 1.0;   ///< packing factor (VMs per site lower bound)
    double area = 1.0;
    double velocity = 1.0;
    double gos = 1.0;
};

namespace capacity {

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok)
        throw domain_error(what);
}
} // namespace detail

/// 1 + 1/q. An infinite q gives 1.
inline double edge_overprovision_factor(double q) {
    detail::require(q > 0.0, "packing factor q must be positive");
    return 1.0 + 1.0 / q;
}

/// Cloud capacity serving the same VM workload as an edge of c_edge:
/// C_edge (1 - rho_edge - tau/C_edge) / ((1 + 1/q)(1 - rho_cloud)).
inline double cloud_capacity_equivalent(double c_edge, double rho_edge, double tau_edge, double q,
                                        double rho_cloud) {
    detail::require(c_edge > 0.0, "c_edge must be positive");
    detail::require(tau_edge >= 0.0, "tau_edge must be non-negative");
    const double slack = 1.0 - rho_edge - tau_edge / c_edge;
    detail::require(slack > 0.0 && slack < 1.0 + 1e-15 && rho_edge + tau_edge / c_edge > 0.0,
                    "need 0 < rho_edge + tau_edge/c_edge < 1");
    detail::require(rho_cloud >= 0.0 && rho_cloud < 1.0, "rho_cloud must lie in [0, 1)");
    return c_edge * slack / (edge_overprovision_factor(q) * (1.0 - rho_cloud));
}

/// Upload time from geometry, 2 lambda d / (q v).
inline double geometric_tau(double lambda, double mean_distance, double q, double velocity) {
    detail::require(lambda >= 0.0 && mean_distance >= 0.0, "lambda and distance must be non-negative");
    detail::require(q > 0.0 && velocity > 0.0, "q and velocity must be positive");
    return 2.0 * lambda * mean_distance / (q * velocity);
}

enum class dtrp_mode { edge, cloud };

/// System time up to the shared proportionality constant:
/// gos^2 lambda area (1 + 1/q)^2 / (C^2 v^2 (1 - rho - tau/C)^2).
/// Cloud mode drops the 1/q and tau/C terms.
inline double dtrp_response_time(const dtrp_spec& s, double lambda, dtrp_mode mode = dtrp_mode::edge) {
    detail::require(s.capacity > 0.0 && s.velocity > 0.0 && s.q > 0.0, "capacity, velocity and q must be positive");
    detail::require(lambda >= 0.0 && s.area >= 0.0 && s.tau >= 0.0, "lambda, area and tau must be non-negative");
    const bool edge = mode == dtrp_mode::edge;
    const double pack = edge ? edge_overprovision_factor(s.q) : 1.0;
    const double slack = 1.0 - s.rho - (edge ? s.tau / s.capacity : 0.0);
    detail::require(slack > 0.0, "need 1 - rho - tau/C > 0");
    return s.gos * s.gos * lambda * s.area * pack * pack /
           (s.capacity * s.capacity * s.velocity * s.velocity * slack * slack);
}

} // namespace capacity

struct vm_request {
    std::string id;
    double arrival = 0.0;  ///< seconds
    double lifetime = 0.0; ///< seconds
    int cores = 1;
    std::optional<int> site;
};

struct trace_summary {
    std::size_t count = 0;
    double mean_cores = 0.0;
    int min_cores = 0;
    int max_cores = 0;
    double span = 0.0; ///< last arrival minus first
};

inline trace_summary summarize_trace(const std::vector<vm_request>& t) {
    trace_summary s;
    s.count = t.size();
    if (t.empty())
        return s;
    compensated_sum sum;
    s.min_cores = std::numeric_limits<int>::max();
    for (const auto& v : t) {
        sum.add(v.cores);
        s.min_cores = std::min(s.min_cores, v.cores);
        s.max_cores = std::max(s.max_cores, v.cores);
    }
    s.mean_cores = sum.value() / t.size();
    s.span = t.back().arrival - t.front().arrival;
    return s;
}

namespace capacity::detail {

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t from = 0;
    for (;;) {
        const auto at = line.find(',', from);
        out.push_back(line.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from));
        if (at == std::string_view::npos)
            return out;
        from = at + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view s, std::size_t line, const char* field) {
    s = trim(s);
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw parse_error(line, std::string("bad ") + field + " '" + std::string(s) + "'");
    return v;
}

} // namespace capacity::detail

/// Reads `vm_id,arrival_s,lifetime_s,cores[,site]` rows, sorted by arrival
/// (stable for ties).
inline std::vector<vm_request> read_vm_trace(std::istream& in) {
    using namespace capacity::detail;
    std::string line;
    std::size_t n = 0;
    if (!std::getline(in, line))
        throw empty_trace("trace has no header");
    ++n;
    const auto head = split(trim(line));
    const bool with_site = head.size() == 5;
    if ((head.size() != 4 && !with_site) || trim(head[0]) != "vm_id" || trim(head[1]) != "arrival_s" ||
        trim(head[2]) != "lifetime_s" || trim(head[3]) != "cores" || (with_site && trim(head[4]) != "site"))
        throw parse_error(1, "expected header vm_id,arrival_s,lifetime_s,cores[,site]");
    const std::size_t ncols = head.size();
    std::vector<vm_request> out;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty())
            continue;
        const auto f = split(trim(line));
        if (f.size() != ncols)
            throw parse_error(n, "expected " + std::to_string(ncols) + " fields, got " +
                                     std::to_string(f.size()));
        vm_request v;
        v.id = std::string(trim(f[0]));
        if (v.id.empty())
            throw parse_error(n, "empty vm_id");
        v.arrival = parse_number<double>(f[1], n, "arrival_s");
        v.lifetime = parse_number<double>(f[2], n, "lifetime_s");
        v.cores = parse_number<int>(f[3], n, "cores");
        if (with_site && !trim(f[4]).empty())
            v.site = parse_number<int>(f[4], n, "site");
        if (!(v.arrival >= 0.0) || !std::isfinite(v.arrival))
            throw parse_error(n, "arrival_s must be finite and non-negative");
        if (!(v.lifetime > 0.0) || !std::isfinite(v.lifetime))
            throw parse_error(n, "lifetime_s must be positive");
        if (v.cores < 1)
            throw parse_error(n, "cores must be at least 1");
        if (v.site && *v.site < 0)
            throw parse_error(n, "site must be non-negative");
        out.push_back(std::move(v));
    }
    if (out.empty())
        throw empty_trace("trace has no rows");
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
    return out;
}

inline std::vector<vm_request> load_vm_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open trace '" + path + "'");
    return read_vm_trace(in);
}

inline void write_vm_trace(std::ostream& out, const std::vector<vm_request>& t) {
    const bool with_site = std::any_of(t.begin(), t.end(), [](const auto& v) { return v.site.has_value(); });
    out << "vm_id,arrival_s,lifetime_s,cores" << (with_site ? ",site" : "") << '\n';
    const auto old = out.precision(17);
    for (const auto& v : t) {
        out << v.id << ',' << v.arrival << ',' << v.lifetime << ',' << v.cores;
        if (with_site) {
            out << ',';
            if (v.site)
                out << *v.site;
        }
        out << '\n';
    }
    out.precision(old);
}

/// Poisson arrivals with exponential lifetimes and a discrete size law.
/// The default law has mean 4.75 cores, min 2 and max 20.
struct synthetic_trace_spec {
    std::size_t count = 20000;
    double arrival_rate = 1.0; ///< VMs per second
    double mean_lifetime = 1.0;
    std::vector<int> sizes{2, 4, 8, 16, 20};
    std::vector<double> weights{0.525, 0.245, 0.14, 0.05, 0.04};
};

inline double mean_size(const synthetic_trace_spec& s) {
    double w = 0.0, m = 0.0;
    for (std::size_t i = 0; i < s.sizes.size(); ++i) {
        w += s.weights[i];
        m += s.weights[i] * s.sizes[i];
    }
    return m / w;
}

inline std::vector<vm_request> synthetic_trace(const synthetic_trace_spec& s, seeded_stream stream) {
    if (s.sizes.empty() || s.sizes.size() != s.weights.size())
        throw domain_error("sizes and weights must be non-empty and of equal length");
    if (!(s.arrival_rate > 0.0) || !(s.mean_lifetime > 0.0))
        throw domain_error("arrival rate and mean lifetime must be positive");
    std::vector<double> cdf;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.sizes.size(); ++i) {
        if (s.sizes[i] < 1 || !(s.weights[i] >= 0.0))
            throw domain_error("sizes must be >= 1 and weights non-negative");
        acc += s.weights[i];
        cdf.push_back(acc);
    }
    random_source arr(stream, 0), life(stream, 1), size(stream, 2);
    std::vector<vm_request> out;
    out.reserve(s.count);
    double t = 0.0;
    for (std::size_t i = 0; i < s.count; ++i) {
        t += arr.exponential(s.arrival_rate);
        const double u = size.uniform() * acc;
        const auto k = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                             s.sizes.size() - 1);
        out.push_back({"vm" + std::to_string(i), t, life.exponential(1.0 / s.mean_lifetime), s.sizes[k], {}});
    }
    return out;
}

struct topology {
    enum class kind { edge, cloud } mode = kind::cloud;
    int k_sites = 1; ///< forced to 1 in cloud mode
    int servers_per_site = 1;
    int cores_per_server = 64;

    int sites() const noexcept { return mode == kind::cloud ? 1 : k_sites; }
    long total_servers() const noexcept { return static_cast<long>(sites()) * servers_per_site; }
    long total_cores() const noexcept { return total_servers() * cores_per_server; }
};

enum class packing_policy { first_fit, best_fit, first_fit_decreasing_batch };
enum class site_assignment { uniform, hint };

struct timeline_sample {
    double t = 0.0;
    long cores_used = 0;
    long servers_used = 0;
    long queued = 0;
};

struct packing_report {
    long peak_servers_used = 0;
    long peak_cores_used = 0;
    long rejected_or_queued = 0; ///< peak number of VMs waiting for room
    std::size_t placed = 0;
    std::size_t delayed = 0; ///< VMs that could not be placed on arrival
    double delayed_fraction = 0.0;
    double mean_delay = 0.0;
    double relative_error_vs_cloud = 0.0; ///< filled by compare_to_cloud
    std::vector<timeline_sample> utilization_timeline;

    long peak_capacity(int cores_per_server) const noexcept { return peak_servers_used * cores_per_server; }
};

struct packing_options {
    packing_policy policy = packing_policy::first_fit;
    site_assignment assign = site_assignment::uniform;
    seeded_stream stream{};    ///< drives uniform site assignment
    std::size_t timeline_samples = 200;
};

/// Places every VM of the trace on a server of its site, FIFO-queueing
/// requests that do not fit. First fit scans servers in a fixed order from
/// the lowest index; best fit takes the server with the least room left
/// that still fits. The batch policy re-sorts the pending queue by
/// decreasing size before each placement pass.
inline packing_report simulate_packing(const std::vector<vm_request>& trace, const topology& topo,
                                       const packing_options& opt = {}) {
    if (topo.k_sites < 1 || topo.servers_per_site < 1 || topo.cores_per_server < 1)
        throw domain_error("topology counts must be at least 1");
    const int nsites = topo.sites();
    for (const auto& v : trace) {
        if (v.cores > topo.cores_per_server)
            throw oversized_vm("VM " + v.id + " needs " + std::to_string(v.cores) + " cores, servers have " +
                               std::to_string(topo.cores_per_server));
        if (opt.assign == site_assignment::hint && topo.mode == topology::kind::edge &&
            (!v.site || *v.site >= nsites))
            throw config_error("VM " + v.id + " has no valid site hint for " + std::to_string(nsites) + " sites");
    }

    struct site_state {
        std::vector<int> free;
        std::vector<int> vms; ///< VMs hosted per server
        std::deque<std::size_t> pending;
    };
    std::vector<site_state> sites(nsites);
    for (auto& s : sites) {
        s.free.assign(topo.servers_per_site, topo.cores_per_server);
        s.vms.assign(topo.servers_per_site, 0);
    }

    std::vector<int> site_of(trace.size(), 0);
    random_source rng(opt.stream);
    if (topo.mode == topology::kind::edge)
        for (std::size_t i = 0; i < trace.size(); ++i)
            site_of[i] = opt.assign == site_assignment::hint ? *trace[i].site : static_cast<int>(rng.below(nsites));

    struct release {
        double t;
        std::size_t vm;
        int site, server;
        bool operator>(const release& o) const noexcept { return t > o.t || (t == o.t && vm > o.vm); }
    };
    std::priority_queue<release, std::vector<release>, std::greater<>> departures;

    packing_report rep;
    long cores_used = 0, servers_used = 0, queued = 0;
    compensated_sum delay_sum;
    std::vector<char> placed_once(trace.size(), 0);

    const double t0 = trace.empty() ? 0.0 : trace.front().arrival;
    const double t_last = trace.empty() ? 0.0 : trace.back().arrival;
    const double dt = opt.timeline_samples > 0 && t_last > t0 ? (t_last - t0) / opt.timeline_samples : 0.0;
    double next_sample = t0;
    auto sample = [&](double now) {
        while (opt.timeline_samples > 0 && now >= next_sample &&
               rep.utilization_timeline.size() < opt.timeline_samples + 1) {
            rep.utilization_timeline.push_back({next_sample, cores_used, servers_used, queued});
            if (dt <= 0.0)
                break;
            next_sample += dt;
        }
    };

    auto pick = [&](const site_state& s, int need) {
        int best = -1;
        for (int j = 0; j < static_cast<int>(s.free.size()); ++j) {
            if (s.free[j] < need)
                continue;
            if (opt.policy != packing_policy::best_fit)
                return j;
            if (best < 0 || s.free[j] < s.free[best])
                best = j;
        }
        return best;
    };

    auto place = [&](std::size_t vm, int site, int server, double now) {
        auto& s = sites[site];
        if (s.vms[server]++ == 0)
            ++servers_used;
        s.free[server] -= trace[vm].cores;
        if (s.free[server] < 0)
            throw error("server oversubscribed during packing");
        cores_used += trace[vm].cores;
        if (placed_once[vm]++)
            throw error("VM placed twice during packing");
        ++rep.placed;
        delay_sum.add(now - trace[vm].arrival);
        departures.push({now + trace[vm].lifetime, vm, site, server});
        rep.peak_servers_used = std::max(rep.peak_servers_used, servers_used);
        rep.peak_cores_used = std::max(rep.peak_cores_used, cores_used);
    };

    auto dispatch = [&](int site, double now) {
        auto& s = sites[site];
        if (opt.policy == packing_policy::first_fit_decreasing_batch) {
            if (s.pending.empty())
                return;
            std::vector<std::size_t> order(s.pending.begin(), s.pending.end());
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return trace[a].cores > trace[b].cores; });
            std::deque<std::size_t> left;
            for (std::size_t vm : order) {
                const int j = pick(s, trace[vm].cores);
                if (j >= 0)
                    place(vm, site, j, now);
            }
            for (std::size_t vm : s.pending)
                if (!placed_once[vm])
                    left.push_back(vm);
            queued -= static_cast<long>(s.pending.size() - left.size());
            s.pending.swap(left);
            return;
        }
        while (!s.pending.empty()) {
            const std::size_t vm = s.pending.front();
            const int j = pick(s, trace[vm].cores);
            if (j < 0)
                break;
            s.pending.pop_front();
            --queued;
            place(vm, site, j, now);
        }
    };

    auto release_until = [&](double t, bool inclusive) {
        while (!departures.empty() && (departures.top().t < t || (inclusive && departures.top().t == t))) {
            const auto d = departures.top();
            departures.pop();
            sample(d.t);
            auto& s = sites[d.site];
            s.free[d.server] += trace[d.vm].cores;
            if (--s.vms[d.server] == 0)
                --servers_used;
            cores_used -= trace[d.vm].cores;
            dispatch(d.site, d.t);
        }
    };

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double now = trace[i].arrival;
        release_until(now, true);
        sample(now);
        sites[site_of[i]].pending.push_back(i);
        ++queued;
        dispatch(site_of[i], now);
        if (!placed_once[i]) {
            ++rep.delayed;
            rep.rejected_or_queued = std::max(rep.rejected_or_queued, queued);
        }
    }
    release_until(std::numeric_limits<double>::infinity(), true);

    if (rep.placed != trace.size())
        throw error("packing finished with unplaced VMs");
    rep.delayed_fraction = trace.empty() ? 0.0 : static_cast<double>(rep.delayed) / trace.size();
    rep.mean_delay = trace.empty() ? 0.0 : delay_sum.value() / trace.size();
    return rep;
}

/// How an edge packing run is scored against the cloud run.
enum class error_metric {
    /// |peak_edge_capacity - peak_cloud_capacity (1 + 1/q)| / (peak_cloud_capacity (1 + 1/q))
    peak_capacity,
    /// |P_edge - P_cloud| / P_cloud with P the fraction of VMs delayed on arrival
    delayed_fraction,
};

inline double relative_error(const packing_report& edge, const topology& edge_topo, const packing_report& cloud,
                             const topology& cloud_topo, double q, error_metric metric = error_metric::peak_capacity) {
    if (metric == error_metric::peak_capacity) {
        const double target = static_cast<double>(cloud.peak_capacity(cloud_topo.cores_per_server)) *
                              capacity::edge_overprovision_factor(q);
        if (target <= 0.0)
            throw domain_error("cloud run used no capacity");
        return std::abs(static_cast<double>(edge.peak_capacity(edge_topo.cores_per_server)) - target) / target;
    }
    if (cloud.delayed_fraction <= 0.0)
        throw domain_error("cloud run delayed no VMs; delayed-fraction error is undefined");
    return std::abs(edge.delayed_fraction - cloud.delayed_fraction) / cloud.delayed_fraction;
}

struct sweep_row {
    int cores_per_edge = 0;
    packing_report report;
    double relative_error = 0.0;
};

struct packing_sweep_result {
    packing_report cloud;
    std::vector<sweep_row> rows;
    double predicted_cores = 0.0; ///< cloud server size times (1 + 1/q)
    std::size_t best = 0;         ///< index of the smallest relative error

    /// Past the minimum, extra cores never bring the error back below it.
    bool diminishing_returns() const {
        for (std::size_t i = best + 1; i < rows.size(); ++i)
            if (rows[i].relative_error < rows[i - 1].relative_error)
                return false;
        return true;
    }
};

/// Packs the trace once on the pooled cloud and once per edge size in
/// `cores_grid` (one server per site), scoring each edge run against the
/// cloud.
inline packing_sweep_result packing_sweep(const std::vector<vm_request>& trace, const topology& cloud_topo,
                                          int k_sites, const std::vector<int>& cores_grid, double q,
                                          const packing_options& opt = {},
                                          error_metric metric = error_metric::delayed_fraction,
                                          unsigned workers = default_workers()) {
    if (cores_grid.empty())
        throw domain_error("cores grid must not be empty");
    packing_sweep_result out;
    out.predicted_cores = cloud_topo.cores_per_server * capacity::edge_overprovision_factor(q);
    out.rows.resize(cores_grid.size());
    std::vector<topology> topos(cores_grid.size());
    parallel_for(cores_grid.size() + 1, workers, [&](std::size_t i) {
        if (i == cores_grid.size()) {
            out.cloud = simulate_packing(trace, cloud_topo, opt);
            return;
        }
        topos[i] = {topology::kind::edge, k_sites, 1, cores_grid[i]};
        out.rows[i].cores_per_edge = cores_grid[i];
        out.rows[i].report = simulate_packing(trace, topos[i], opt);
    });
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        out.rows[i].relative_error = relative_error(out.rows[i].report, topos[i], out.cloud, cloud_topo, q, metric);
        out.rows[i].report.relative_error_vs_cloud = out.rows[i].relative_error;
        if (out.rows[i].relative_error < out.rows[out.best].relative_error)
            out.best = i;
    }
    return out;
}

} // namespace edgeq

#endif // EDGEQ_CAPACITY_HPP
