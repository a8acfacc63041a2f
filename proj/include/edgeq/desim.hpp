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

#ifndef EDGEQ_DESIM_HPP
#define EDGEQ_DESIM_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgeq/analytic.hpp"
#include "edgeq/errors.hpp"
#include "edgeq/rng.hpp"
#include "edgeq/stats.hpp"
#include "edgeq/workload.hpp"

/// Event-driven FCFS simulators for the edge (two-phase service with
/// migration to a destination site), the pooled M/M/k cloud and the
/// sinusoidal M_t/M/1 queue.
namespace edgeq {

enum class sim_model { two_phase_edge, gg1_edge, mtm1_sinusoidal, mmk_cloud };

inline std::string_view to_string(sim_model m) noexcept {
    switch (m) {
    case sim_model::two_phase_edge: return "two_phase_edge";
    case sim_model::gg1_edge: return "gg1_edge";
    case sim_model::mtm1_sinusoidal: return "mtm1_sinusoidal";
    case sim_model::mmk_cloud: return "mmk_cloud";
    }
    return "?";
}

inline sim_model parse_sim_model(std::string_view s) {
    for (auto m : {sim_model::two_phase_edge, sim_model::gg1_edge, sim_model::mtm1_sinusoidal, sim_model::mmk_cloud})
        if (s == to_string(m))
            return m;
    throw config_error("unknown model '" + std::string(s) + "'");
}

/// Which requests count toward the rush-window wait.
enum class window_statistic {
    arrivals_in_window, ///< requests arriving inside [t1, t2] of a cycle
    served_in_window,   ///< requests whose service completes inside it
};

struct sim_config {
    sim_model model = sim_model::two_phase_edge;

    queue_spec edge;  ///< edge models and M_t/M/1 (mu1, mu2, r)
    cloud_spec cloud; ///< mmk_cloud; arrival rate is k * mu_cloud * rho_cloud
    network_spec network;

    // gg1_edge only: laws whose means are overridden by 1/lambda, 1/mu1, 1/mu2.
    renewal_spec interarrival;
    renewal_spec service1;
    renewal_spec service2;

    double mu_dest = 0.0;          ///< destination service rate, 0 means mu1
    double dest_home_lambda = 0.0; ///< extra Poisson load native to the destination
    bool count_destination_service = false;

    std::uint64_t requests = 200000; ///< arrivals per run (drained afterwards)
    double horizon_s = 0.0;          ///< when positive, a time horizon replaces `requests`
    double warmup = 0.1;             ///< fraction of requests (or of horizon_s) discarded

    // mtm1_sinusoidal
    sinusoid_profile profile;
    bool two_stage_service = false; ///< explicit mu1 + Bernoulli(r) mu2 stages instead of Exp(mu_eff)
    int periods = 11;
    int warmup_periods = 1;
    int bins_per_period = 100;
    analytic::crossing_rule rush_rule = analytic::crossing_rule::published;
    window_statistic window_stat = window_statistic::arrivals_in_window;

    /// Stationary models abort with runtime_instability once this many
    /// requests are in system; 0 disables the check.
    std::uint64_t max_in_system = 5000;

    std::ostream* event_log = nullptr; ///< CSV event_time,event_type,request_id,queue_id
};

struct sim_metrics {
    double mean_wait = 0.0;             ///< source wait + destination wait of migrated requests
    double mean_wait_per_request = 0.0; ///< mean of w1 + B w2 over requests
    double source_mean_wait = 0.0;
    double destination_mean_wait = 0.0; ///< over migrated requests
    double conditional_wait = 0.0;      ///< mean wait of delayed requests
    double delay_probability = 0.0;
    double mean_response = 0.0;
    double p95_response = 0.0;
    double utilization_observed = 0.0;
    double little_l = 0.0;     ///< time-average number in system over the measured period
    double mean_sojourn = 0.0; ///< arrival to final departure
    double arrival_rate_observed = 0.0;
    double migrated_fraction = 0.0;
    double sim_time = 0.0;
    std::uint64_t count_arrived = 0;
    std::uint64_t count_served = 0;
    std::uint64_t count_migrated = 0;
    std::uint64_t count_measured = 0;
    std::uint64_t in_system_at_end = 0;

    /// Visits every field as (name, value).
    template <class Fn>
    void for_each(Fn&& fn) const {
        fn("mean_wait", mean_wait);
        fn("mean_wait_per_request", mean_wait_per_request);
        fn("source_mean_wait", source_mean_wait);
        fn("destination_mean_wait", destination_mean_wait);
        fn("conditional_wait", conditional_wait);
        fn("delay_probability", delay_probability);
        fn("mean_response", mean_response);
        fn("p95_response", p95_response);
        fn("utilization_observed", utilization_observed);
        fn("little_l", little_l);
        fn("mean_sojourn", mean_sojourn);
        fn("arrival_rate_observed", arrival_rate_observed);
        fn("migrated_fraction", migrated_fraction);
        fn("sim_time", sim_time);
        fn("count_arrived", static_cast<double>(count_arrived));
        fn("count_served", static_cast<double>(count_served));
        fn("count_migrated", static_cast<double>(count_migrated));
        fn("count_measured", static_cast<double>(count_measured));
        fn("in_system_at_end", static_cast<double>(in_system_at_end));
    }
};

struct time_bin {
    double t_center = 0.0;
    double mean_wait = 0.0;
    double mean_rate = 0.0;
    std::uint64_t count = 0;
};

struct rush_window_stats {
    double t1 = 0.0;
    double t2 = 0.0;
    double mean_wait_in_window = 0.0;
    double peak_bin_wait = 0.0; ///< largest bin-mean wait among bins centred in the window
    std::uint64_t count = 0;
};

struct time_series_metrics {
    double period = 0.0;
    std::vector<time_bin> bins;
    std::optional<rush_window_stats> rush_window;
};

struct mtm1_result {
    sim_metrics metrics;
    time_series_metrics series;
};

namespace detail {

struct event {
    double time;
    std::uint64_t seq;
    int kind;
};

struct later {
    bool operator()(const event& a, const event& b) const noexcept {
        return a.time > b.time || (a.time == b.time && a.seq > b.seq);
    }
};

/// Min-heap of pending events; ties resolve in scheduling order.
class event_queue {
public:
    void push(double t, int kind) {
        heap_.push_back({t, seq_++, kind});
        std::push_heap(heap_.begin(), heap_.end(), later{});
    }

    event pop() {
        std::pop_heap(heap_.begin(), heap_.end(), later{});
        const event e = heap_.back();
        heap_.pop_back();
        assert(e.time >= now_ && "event executed out of order");
        now_ = e.time;
        return e;
    }

    bool empty() const noexcept { return heap_.empty(); }
    const event& top() const noexcept { return heap_.front(); }
    double now() const noexcept { return now_; }

private:
    std::vector<event> heap_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
};

class event_log {
public:
    explicit event_log(std::ostream* os) : os_(os) {
        if (os_)
            *os_ << "event_time,event_type,request_id,queue_id\n";
    }

    void operator()(double t, const char* type, std::uint64_t id, int queue) const {
        if (os_)
            *os_ << t << ',' << type << ',' << id << ',' << queue << '\n';
    }

private:
    std::ostream* os_;
};

/// Time integral of the number in system, started lazily at the first
/// measured arrival.
class occupancy {
public:
    void start(double t) {
        if (!on_) {
            on_ = true;
            from_ = last_ = t;
        }
    }

    void change(double t, int delta) {
        if (on_) {
            area_.add(static_cast<double>(n_) * (t - last_));
            last_ = t;
        }
        n_ += delta;
    }

    std::uint64_t count() const noexcept { return n_; }

    double average(double until) {
        if (!on_ || until <= from_)
            return 0.0;
        change(until, 0);
        return area_.value() / (until - from_);
    }

    double measured_span(double until) const noexcept { return on_ ? std::max(until - from_, 0.0) : 0.0; }

private:
    bool on_ = false;
    double from_ = 0.0;
    double last_ = 0.0;
    std::uint64_t n_ = 0;
    compensated_sum area_;
};

/// Draws Poisson or renewal arrivals behind one interface.
class arrival_stream {
public:
    arrival_stream(double lambda, random_source rng) : poisson_(std::in_place, lambda, rng) {}
    arrival_stream(const renewal_spec& spec, random_source rng) : renewal_(std::in_place, spec, rng) {}
    arrival_stream(const sinusoid_profile& p, random_source rng) : nhpp_(std::in_place, p, rng) {}

    double next() {
        if (poisson_)
            return poisson_->next();
        if (renewal_)
            return renewal_->next();
        return nhpp_->next();
    }

private:
    std::optional<poisson_process> poisson_;
    std::optional<renewal_process> renewal_;
    std::optional<nhpp_process> nhpp_;
};

enum lane : std::uint64_t { arrivals = 0, phase1 = 1, routing = 2, migration = 3, destination = 4, home = 5 };

inline void check_cap(const sim_config& c, std::uint64_t n, double t) {
    if (c.max_in_system > 0 && n > c.max_in_system)
        throw runtime_instability("in-system count " + std::to_string(n) + " exceeded cap " +
                                  std::to_string(c.max_in_system) + " at t = " + std::to_string(t));
}

/// Counts and measures requests against the warm-up rule.
struct warmup_rule {
    bool by_time = false;
    double cutoff_t = 0.0;
    std::uint64_t cutoff_n = 0;

    static warmup_rule from(const sim_config& c) {
        if (!(c.warmup >= 0.0 && c.warmup < 1.0))
            throw config_error("warmup must lie in [0, 1)");
        warmup_rule w;
        w.by_time = c.horizon_s > 0.0;
        w.cutoff_t = c.warmup * c.horizon_s;
        w.cutoff_n = static_cast<std::uint64_t>(std::floor(c.warmup * static_cast<double>(c.requests)));
        return w;
    }

    bool measured(std::uint64_t id, double arrival) const noexcept {
        return by_time ? arrival >= cutoff_t : id >= cutoff_n;
    }
};

struct wait_accumulator {
    compensated_sum w1, w2, per_req, resp, sojourn, delayed;
    std::uint64_t n = 0, n_mig = 0, n_delayed = 0;
    std::vector<double> responses;

    void add(double wait1, bool migrated, double wait2, double response, double soj) {
        ++n;
        w1.add(wait1);
        per_req.add(wait1 + (migrated ? wait2 : 0.0));
        if (migrated) {
            ++n_mig;
            w2.add(wait2);
        }
        if (wait1 > 0.0) {
            ++n_delayed;
            delayed.add(wait1);
        }
        resp.add(response);
        sojourn.add(soj);
        responses.push_back(response);
    }

    void fill(sim_metrics& m) {
        m.count_measured = n;
        if (n == 0)
            return;
        m.source_mean_wait = w1.value() / n;
        m.destination_mean_wait = n_mig ? w2.value() / n_mig : 0.0;
        m.mean_wait = m.source_mean_wait + m.destination_mean_wait;
        m.mean_wait_per_request = per_req.value() / n;
        m.conditional_wait = n_delayed ? delayed.value() / n_delayed : 0.0;
        m.delay_probability = static_cast<double>(n_delayed) / n;
        m.mean_response = resp.value() / n;
        m.mean_sojourn = sojourn.value() / n;
        m.p95_response = percentile(responses, 0.95);
    }
};

} // namespace detail

/// Edge site with an optional migration phase and a destination queue.
///
/// A request holds the source server for phase 1 and, with probability r,
/// for the migration phase as well; a migrated request then queues FCFS at
/// the destination, served at mu_dest. Response time is
/// RTT + w1 + s1 + s_mig + w2 (+ destination service when
/// `count_destination_service`).
inline sim_metrics run_two_phase_sim(const sim_config& c, seeded_stream stream) {
    if (c.model != sim_model::two_phase_edge && c.model != sim_model::gg1_edge)
        throw config_error("run_two_phase_sim needs model two_phase_edge or gg1_edge, got " +
                           std::string(to_string(c.model)));
    analytic::validate(c.edge);
    if (c.mu_dest < 0.0 || c.dest_home_lambda < 0.0)
        throw config_error("mu_dest and dest_home_lambda must be non-negative");
    const auto warm = detail::warmup_rule::from(c);
    if (!warm.by_time && c.requests == 0)
        throw config_error("requests must be positive when no time horizon is given");

    const bool general = c.model == sim_model::gg1_edge;
    const double mu_dest = c.mu_dest > 0.0 ? c.mu_dest : c.edge.mu1;
    const bool instant_mig = std::isinf(c.edge.mu2);

    auto with_mean = [](renewal_spec s, double mean) {
        s.mean = mean;
        return s;
    };
    const renewal_sampler s1_law(general ? with_mean(c.service1, 1.0 / c.edge.mu1)
                                         : renewal_spec::exponential(1.0 / c.edge.mu1));
    const std::optional<renewal_sampler> s2_law =
        instant_mig ? std::nullopt
                    : std::optional<renewal_sampler>(general ? with_mean(c.service2, 1.0 / c.edge.mu2)
                                                             : renewal_spec::exponential(1.0 / c.edge.mu2));
    const renewal_sampler dest_law(general ? with_mean(c.service1, 1.0 / mu_dest)
                                           : renewal_spec::exponential(1.0 / mu_dest));

    detail::arrival_stream arrivals =
        general ? detail::arrival_stream(with_mean(c.interarrival, 1.0 / c.edge.lambda),
                                         random_source(stream, detail::arrivals))
                : detail::arrival_stream(c.edge.lambda, random_source(stream, detail::arrivals));
    random_source s1_rng(stream, detail::phase1), route_rng(stream, detail::routing),
        mig_rng(stream, detail::migration), dest_rng(stream, detail::destination);
    std::optional<poisson_process> home;
    if (c.dest_home_lambda > 0.0)
        home.emplace(c.dest_home_lambda, random_source(stream, detail::home));

    enum kind { arrival, source_done, dest_done, home_arrival };
    struct waiting { std::uint64_t id; double arrival; };
    struct dest_entry {
        std::uint64_t id;
        bool home;
        double arrival, w1, s1, s2, dest_arrival;
    };
    struct in_service {
        std::uint64_t id;
        double arrival, w1, s1, s2;
        bool migrated;
    };

    detail::event_queue ev;
    detail::event_log log(c.event_log);
    detail::occupancy occ;
    detail::wait_accumulator acc;
    sim_metrics m;

    std::deque<waiting> q1;
    std::deque<dest_entry> q2;
    std::optional<in_service> cur1;
    bool busy2 = false;
    double busy1 = 0.0;
    std::uint64_t next_id = 0, home_id = 0;
    const double horizon = warm.by_time ? c.horizon_s : std::numeric_limits<double>::infinity();
    double pending_arrival = arrivals.next();
    if (pending_arrival < horizon && (warm.by_time || c.requests > 0))
        ev.push(pending_arrival, arrival);
    if (home) {
        const double h = home->next();
        if (h < horizon)
            ev.push(h, home_arrival);
    }
    bool arrivals_open = true;

    auto finish = [&](std::uint64_t id, double arr, double w1, double s1, double s2, bool mig, double w2,
                      double s_dest) {
        if (!warm.measured(id, arr))
            return;
        const double resp = c.network.t_edge + w1 + s1 + s2 + (mig ? w2 : 0.0) +
                            (mig && c.count_destination_service ? s_dest : 0.0);
        const double soj = w1 + s1 + s2 + (mig ? w2 + s_dest : 0.0);
        acc.add(w1, mig, w2, resp, soj);
    };

    auto start_source = [&](std::uint64_t id, double arr, double now) {
        const double s1 = s1_law(s1_rng);
        const bool mig = route_rng.bernoulli(c.edge.r);
        const double s2 = mig && s2_law ? (*s2_law)(mig_rng) : 0.0;
        cur1 = in_service{id, arr, now - arr, s1, s2, mig};
        busy1 += std::min(now + s1 + s2, horizon) - now;
        log(now, "start", id, 1);
        ev.push(now + s1 + s2, source_done);
        if (!mig)
            finish(id, arr, now - arr, s1, 0.0, false, 0.0, 0.0);
    };

    auto start_dest = [&](const dest_entry& d, double now) {
        const double s = dest_law(dest_rng);
        busy2 = true;
        log(now, "start", d.home ? ~d.id : d.id, 2);
        ev.push(now + s, dest_done);
        if (!d.home)
            finish(d.id, d.arrival, d.w1, d.s1, d.s2, true, now - d.dest_arrival, s);
    };

    // The destination entry in service, needed to tell home departures apart.
    std::optional<dest_entry> cur2;
    double end = 0.0;

    while (!ev.empty()) {
        if (ev.top().time > horizon)
            break;
        const auto e = ev.pop();
        const double now = e.time;
        end = now;
        switch (e.kind) {
        case arrival: {
            const std::uint64_t id = next_id++;
            ++m.count_arrived;
            if (warm.measured(id, now))
                occ.start(now);
            occ.change(now, +1);
            detail::check_cap(c, occ.count(), now);
            log(now, "arrival", id, 1);
            if (!cur1)
                start_source(id, now, now);
            else
                q1.push_back({id, now});
            if (warm.by_time || next_id < c.requests) {
                pending_arrival = arrivals.next();
                if (pending_arrival < horizon)
                    ev.push(pending_arrival, arrival);
                else
                    arrivals_open = false;
            } else {
                arrivals_open = false;
            }
            break;
        }
        case source_done: {
            const in_service s = *cur1;
            cur1.reset();
            log(now, "depart", s.id, 1);
            ++m.count_served;
            if (s.migrated) {
                ++m.count_migrated;
                dest_entry d{s.id, false, s.arrival, s.w1, s.s1, s.s2, now};
                log(now, "arrival", s.id, 2);
                if (!busy2) {
                    cur2 = d;
                    start_dest(d, now);
                } else {
                    q2.push_back(d);
                }
            } else {
                occ.change(now, -1);
            }
            if (!q1.empty()) {
                const auto w = q1.front();
                q1.pop_front();
                start_source(w.id, w.arrival, now);
            }
            break;
        }
        case dest_done: {
            busy2 = false;
            if (cur2) {
                log(now, "depart", cur2->home ? ~cur2->id : cur2->id, 2);
                if (!cur2->home)
                    occ.change(now, -1);
                cur2.reset();
            }
            if (!q2.empty()) {
                cur2 = q2.front();
                q2.pop_front();
                start_dest(*cur2, now);
            }
            break;
        }
        case home_arrival: {
            const dest_entry d{home_id++, true, now, 0.0, 0.0, 0.0, now};
            log(now, "arrival", ~d.id, 2);
            if (!busy2) {
                cur2 = d;
                start_dest(d, now);
            } else {
                q2.push_back(d);
            }
            if (arrivals_open) {
                const double h = home->next();
                if (h < horizon)
                    ev.push(h, home_arrival);
            }
            break;
        }
        }
    }

    if (warm.by_time)
        end = c.horizon_s;
    m.sim_time = end;
    m.in_system_at_end = occ.count();
    m.utilization_observed = end > 0.0 ? busy1 / end : 0.0;
    m.migrated_fraction = m.count_served ? static_cast<double>(m.count_migrated) / m.count_served : 0.0;
    const double span = occ.measured_span(end);
    m.little_l = occ.average(end);
    acc.fill(m);
    m.arrival_rate_observed = span > 0.0 ? m.count_measured / span : 0.0;
    return m;
}

/// Pooled cloud: k identical exponential servers behind one FCFS queue, fed
/// by Poisson arrivals at k * mu_cloud * rho_cloud. Response time is
/// t_cloud + wait + service.
inline sim_metrics run_mmk_sim(const sim_config& c, seeded_stream stream) {
    if (c.model != sim_model::mmk_cloud)
        throw config_error("run_mmk_sim needs model mmk_cloud, got " + std::string(to_string(c.model)));
    analytic::validate(c.cloud);
    const auto warm = detail::warmup_rule::from(c);
    const double lambda = c.cloud.k * c.cloud.mu_cloud * c.cloud.rho_cloud;
    sim_metrics m;
    if (lambda <= 0.0)
        return m;

    detail::arrival_stream arrivals(lambda, random_source(stream, detail::arrivals));
    random_source srv(stream, detail::phase1);
    enum kind { arrival, departure };
    struct waiting { std::uint64_t id; double arrival; };

    detail::event_queue ev;
    detail::event_log log(c.event_log);
    detail::occupancy occ;
    detail::wait_accumulator acc;
    std::deque<waiting> q;
    int free = c.cloud.k;
    double busy = 0.0;
    std::uint64_t next_id = 0;
    const double horizon = warm.by_time ? c.horizon_s : std::numeric_limits<double>::infinity();
    {
        const double t = arrivals.next();
        if (t < horizon)
            ev.push(t, arrival);
    }

    auto start = [&](std::uint64_t id, double arr, double now) {
        --free;
        const double s = srv.exponential(c.cloud.mu_cloud);
        busy += std::min(now + s, horizon) - now;
        log(now, "start", id, 0);
        ev.push(now + s, departure);
        if (warm.measured(id, arr))
            acc.add(now - arr, false, 0.0, c.network.t_cloud + (now - arr) + s, (now - arr) + s);
    };

    double end = 0.0;
    while (!ev.empty()) {
        if (ev.top().time > horizon)
            break;
        const auto e = ev.pop();
        const double now = e.time;
        end = now;
        if (e.kind == arrival) {
            const std::uint64_t id = next_id++;
            ++m.count_arrived;
            if (warm.measured(id, now))
                occ.start(now);
            occ.change(now, +1);
            detail::check_cap(c, occ.count(), now);
            log(now, "arrival", id, 0);
            if (free > 0)
                start(id, now, now);
            else
                q.push_back({id, now});
            if (warm.by_time || next_id < c.requests) {
                const double t = arrivals.next();
                if (t < horizon)
                    ev.push(t, arrival);
            }
        } else {
            ++free;
            ++m.count_served;
            occ.change(now, -1);
            log(now, "depart", 0, 0);
            if (!q.empty()) {
                const auto w = q.front();
                q.pop_front();
                start(w.id, w.arrival, now);
            }
        }
    }

    if (warm.by_time)
        end = c.horizon_s;
    m.sim_time = end;
    m.in_system_at_end = occ.count();
    m.utilization_observed = end > 0.0 ? busy / (end * c.cloud.k) : 0.0;
    const double span = occ.measured_span(end);
    m.little_l = occ.average(end);
    acc.fill(m);
    m.arrival_rate_observed = span > 0.0 ? m.count_measured / span : 0.0;
    return m;
}

/// Single-server queue under sinusoidal Poisson arrivals. Runs `periods`
/// whole cycles, discards the first `warmup_periods`, then drains. Bins are
/// folded by phase, `bins_per_period` per cycle.
inline mtm1_result run_mtm1_sim(const sim_config& c, seeded_stream stream) {
    if (c.model != sim_model::mtm1_sinusoidal)
        throw config_error("run_mtm1_sim needs model mtm1_sinusoidal, got " + std::string(to_string(c.model)));
    analytic::validate(c.profile);
    if (!(c.edge.mu1 > 0.0 && c.edge.mu2 > 0.0 && c.edge.r >= 0.0 && c.edge.r <= 1.0))
        throw config_error("mtm1 needs mu1 > 0, mu2 > 0 and r in [0, 1]");
    if (c.periods < 1 || c.warmup_periods < 0 || c.warmup_periods >= c.periods)
        throw config_error("need periods >= 1 and 0 <= warmup_periods < periods");
    if (c.bins_per_period < 1)
        throw config_error("bins_per_period must be positive");

    const double mu_eff = analytic::effective_service_rate(c.edge.mu1, c.edge.mu2, c.edge.r);
    const double period = c.profile.period();
    const double horizon = period * c.periods;
    const double measure_from = period * c.warmup_periods;
    const int nb = c.bins_per_period;
    const double width = period / nb;

    detail::arrival_stream arrivals(c.profile, random_source(stream, detail::arrivals));
    random_source s1_rng(stream, detail::phase1), route_rng(stream, detail::routing),
        mig_rng(stream, detail::migration);

    mtm1_result out;
    auto& m = out.metrics;
    auto& ts = out.series;
    ts.period = period;

    std::optional<analytic::overload_window_t> window;
    if (c.profile.peak_rate() > mu_eff)
        window = analytic::overload_window(c.profile, mu_eff, c.rush_rule);
    auto fold = [&](double t) {
        const double x = std::fmod(t, period);
        return x < 0.0 ? x + period : x;
    };
    auto in_window = [&](double folded) {
        return folded >= window->t1 ? folded <= window->t2 : folded + period <= window->t2;
    };

    std::vector<compensated_sum> bin_wait(nb);
    std::vector<std::uint64_t> bin_n(nb, 0);
    compensated_sum win_wait;
    std::uint64_t win_n = 0;

    enum kind { arrival, departure };
    struct waiting { std::uint64_t id; double arrival; };
    detail::event_queue ev;
    detail::event_log log(c.event_log);
    detail::occupancy occ;
    detail::wait_accumulator acc;
    std::deque<waiting> q;
    bool busy = false;
    double busy_time = 0.0;
    std::uint64_t next_id = 0;
    {
        const double t = arrivals.next();
        if (t < horizon)
            ev.push(t, arrival);
    }

    auto start = [&](std::uint64_t id, double arr, double now) {
        busy = true;
        double s;
        bool mig = false;
        if (c.two_stage_service) {
            s = s1_rng.exponential(c.edge.mu1);
            mig = route_rng.bernoulli(c.edge.r);
            if (mig && !std::isinf(c.edge.mu2))
                s += mig_rng.exponential(c.edge.mu2);
        } else {
            s = s1_rng.exponential(mu_eff);
        }
        busy_time += s;
        log(now, "start", id, 1);
        ev.push(now + s, departure);
        if (arr < measure_from)
            return;
        const double w = now - arr;
        acc.add(w, false, 0.0, c.network.t_edge + w + s, w + s);
        const double fa = fold(arr);
        const int b = std::min(nb - 1, static_cast<int>(fa / width));
        bin_wait[b].add(w);
        ++bin_n[b];
        if (window) {
            const double ref = c.window_stat == window_statistic::arrivals_in_window ? fa : fold(now + s);
            if (in_window(ref)) {
                win_wait.add(w);
                ++win_n;
            }
        }
    };

    double end = 0.0;
    while (!ev.empty()) {
        const auto e = ev.pop();
        const double now = e.time;
        end = now;
        if (e.kind == arrival) {
            const std::uint64_t id = next_id++;
            ++m.count_arrived;
            if (now >= measure_from)
                occ.start(now);
            occ.change(now, +1);
            log(now, "arrival", id, 1);
            if (!busy)
                start(id, now, now);
            else
                q.push_back({id, now});
            const double t = arrivals.next();
            if (t < horizon)
                ev.push(t, arrival);
        } else {
            busy = false;
            ++m.count_served;
            occ.change(now, -1);
            log(now, "depart", 0, 1);
            if (!q.empty()) {
                const auto w = q.front();
                q.pop_front();
                start(w.id, w.arrival, now);
            }
        }
    }

    m.sim_time = end;
    m.utilization_observed = end > 0.0 ? busy_time / end : 0.0;
    const double span = occ.measured_span(end);
    m.little_l = occ.average(end);
    acc.fill(m);
    m.arrival_rate_observed = span > 0.0 ? m.count_measured / span : 0.0;

    const int measured_periods = c.periods - c.warmup_periods;
    ts.bins.resize(nb);
    for (int b = 0; b < nb; ++b) {
        auto& bin = ts.bins[b];
        bin.t_center = (b + 0.5) * width;
        bin.count = bin_n[b];
        bin.mean_wait = bin_n[b] ? bin_wait[b].value() / bin_n[b] : 0.0;
        bin.mean_rate = bin_n[b] / (width * measured_periods);
    }
    if (window) {
        rush_window_stats rw;
        rw.t1 = window->t1;
        rw.t2 = window->t2;
        rw.count = win_n;
        rw.mean_wait_in_window = win_n ? win_wait.value() / win_n : 0.0;
        for (const auto& bin : ts.bins)
            if (in_window(bin.t_center))
                rw.peak_bin_wait = std::max(rw.peak_bin_wait, bin.mean_wait);
        ts.rush_window = rw;
    }
    return out;
}

/// Per-metric summary across replications, in field order.
struct metric_summary {
    std::vector<std::pair<std::string, estimate>> fields;

    const estimate& operator[](std::string_view name) const {
        for (const auto& [n, e] : fields)
            if (n == name)
                return e;
        throw config_error("no metric named '" + std::string(name) + "'");
    }
};

inline metric_summary summarize_runs(std::span<const sim_metrics> runs) {
    metric_summary s;
    if (runs.empty())
        return s;
    std::vector<std::string> names;
    runs.front().for_each([&](const char* n, double) { names.emplace_back(n); });
    std::vector<std::vector<double>> cols(names.size());
    for (const auto& r : runs) {
        std::size_t i = 0;
        r.for_each([&](const char*, double v) { cols[i++].push_back(v); });
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        s.fields.emplace_back(names[i], summarize(cols[i]));
    return s;
}

struct replication_result {
    std::vector<sim_metrics> runs;
    metric_summary summary;
    /// mtm1 only: per-bin waits averaged over runs, and rush-window
    /// statistics recomputed on the averaged bins.
    std::optional<time_series_metrics> mean_series;
    std::optional<estimate> window_wait; ///< mtm1: mean_wait_in_window across runs
};

/// Largest number of replications a base stream can address without
/// overlapping a neighbouring base stream.
inline constexpr std::uint64_t replication_stride = 1u << 16;

/// Runs `n_runs` independent replications on substreams
/// base.child(i, replication_stride). Results do not depend on the worker
/// count.
inline replication_result replicate(const sim_config& c, int n_runs, seeded_stream base,
                                    unsigned workers = default_workers()) {
    if (n_runs < 1)
        throw config_error("n_runs must be at least 1");
    if (static_cast<std::uint64_t>(n_runs) > replication_stride)
        throw config_error("too many replications");
    if (c.event_log && n_runs > 1)
        throw config_error("event logging supports a single run only");
    replication_result out;
    out.runs.resize(n_runs);
    std::vector<time_series_metrics> series;
    const bool mtm1 = c.model == sim_model::mtm1_sinusoidal;
    if (mtm1)
        series.resize(n_runs);

    parallel_for(n_runs, workers, [&](std::size_t i) {
        const auto s = base.child(i, replication_stride);
        switch (c.model) {
        case sim_model::two_phase_edge:
        case sim_model::gg1_edge: out.runs[i] = run_two_phase_sim(c, s); break;
        case sim_model::mmk_cloud: out.runs[i] = run_mmk_sim(c, s); break;
        case sim_model::mtm1_sinusoidal: {
            auto r = run_mtm1_sim(c, s);
            out.runs[i] = r.metrics;
            series[i] = std::move(r.series);
            break;
        }
        }
    });
    out.summary = summarize_runs(out.runs);

    if (mtm1) {
        time_series_metrics avg = series.front();
        std::vector<double> col(n_runs);
        for (std::size_t b = 0; b < avg.bins.size(); ++b) {
            for (int i = 0; i < n_runs; ++i)
                col[i] = series[i].bins[b].mean_wait;
            avg.bins[b].mean_wait = summarize(col).mean;
            for (int i = 0; i < n_runs; ++i)
                col[i] = series[i].bins[b].mean_rate;
            avg.bins[b].mean_rate = summarize(col).mean;
            std::uint64_t n = 0;
            for (int i = 0; i < n_runs; ++i)
                n += series[i].bins[b].count;
            avg.bins[b].count = n;
        }
        if (avg.rush_window) {
            auto& rw = *avg.rush_window;
            for (int i = 0; i < n_runs; ++i)
                col[i] = series[i].rush_window->mean_wait_in_window;
            out.window_wait = summarize(col);
            rw.mean_wait_in_window = out.window_wait->mean;
            rw.count = 0;
            for (int i = 0; i < n_runs; ++i)
                rw.count += series[i].rush_window->count;
            rw.peak_bin_wait = 0.0;
            const double period = avg.period;
            for (const auto& bin : avg.bins) {
                const bool inside = bin.t_center >= rw.t1 ? bin.t_center <= rw.t2 : bin.t_center + period <= rw.t2;
                if (inside)
                    rw.peak_bin_wait = std::max(rw.peak_bin_wait, bin.mean_wait);
            }
        }
        out.mean_series = std::move(avg);
    }
    return out;
}

} // namespace edgeq

#endif // EDGEQ_DESIM_HPP
