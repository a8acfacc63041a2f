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

#ifndef EDGEQ_ANALYTIC_HPP
#define EDGEQ_ANALYTIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgeq/errors.hpp"

/// Closed-form latency and capacity relations for an edge site with
/// migrating users versus a pooled cloud.
///
/// Units throughout: rates per second, times in seconds, angles in radians.
namespace edgeq {

/// Sentinel for an instantaneous migration phase (mu2 = infinity). Every
/// mu2-dependent term evaluates to its analytic limit.
inline constexpr double instantaneous = std::numeric_limits<double>::infinity();

/// Utilizations at or above `1 - stability_margin` are rejected rather than
/// evaluated next to the 1/(1 - rho) singularity.
inline constexpr double stability_margin = 1e-9;

/// Edge site modeled as a single server with an optional second (migration)
/// service phase entered with probability r.
struct queue_spec {
    double lambda = 0.0; ///< arrivals per second
    double mu1 = 0.0;    ///< phase-1 service rate
    double mu2 = 0.0;    ///< migration phase rate, may be `instantaneous`
    double r = 0.0;      ///< migration probability
};

struct cloud_spec {
    int k = 1;              ///< server count
    double mu_cloud = 0.0;  ///< per-server service rate
    double rho_cloud = 0.0; ///< utilization in [0, 1)
};

struct network_spec {
    double t_edge = 0.0;  ///< edge round trip, seconds
    double t_cloud = 0.0; ///< cloud round trip, seconds

    double delta_t() const noexcept { return t_cloud - t_edge; }
};

/// Squared coefficients of variation of inter-arrival and service times.
struct variability_spec {
    double ca2 = 1.0;
    double cs2 = 1.0;
};

/// First two moments of both service phases.
struct phase_moments {
    double mean1 = 0.0;
    double var1 = 0.0;
    double mean2 = 0.0;
    double var2 = 0.0;
    double r = 0.0;
};

/// lambda(t) = lambda_bar * (1 + amplitude * sin(gamma * t + phase)).
struct sinusoid_profile {
    double lambda_bar = 0.0;
    double amplitude = 0.0;
    double gamma = 0.0; ///< angular frequency, rad/s
    double phase = 0.0;

    double rate_at(double t) const noexcept { return lambda_bar * (1.0 + amplitude * std::sin(gamma * t + phase)); }
    double peak_rate() const noexcept { return lambda_bar * (1.0 + amplitude); }
    double period() const noexcept { return 2.0 * std::numbers::pi / gamma; }
};

namespace analytic {

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok)
        throw domain_error(what);
}

inline void require_stable(double rho, const char* what) {
    if (!(rho < 1.0 - stability_margin))
        throw unstable_queue(std::string(what) + " (utilization " + std::to_string(rho) + ")");
}

/// 1/mu with 1/infinity = 0.
inline double inverse(double rate) noexcept { return std::isinf(rate) ? 0.0 : 1.0 / rate; }

} // namespace detail

inline void validate(const queue_spec& q) {
    detail::require(q.lambda > 0.0 && std::isfinite(q.lambda), "lambda must be positive and finite");
    detail::require(q.mu1 > 0.0 && std::isfinite(q.mu1), "mu1 must be positive and finite");
    detail::require(q.mu2 > 0.0, "mu2 must be positive (or instantaneous)");
    detail::require(q.r >= 0.0 && q.r <= 1.0, "r must lie in [0, 1]");
}

inline void validate(const cloud_spec& c) {
    detail::require(c.k >= 1, "k must be at least 1");
    detail::require(c.mu_cloud > 0.0 && std::isfinite(c.mu_cloud), "mu_cloud must be positive and finite");
    detail::require(c.rho_cloud >= 0.0, "rho_cloud must be non-negative");
    detail::require_stable(c.rho_cloud, "cloud utilization must be below 1");
}

inline void validate(const variability_spec& v) {
    detail::require(std::isfinite(v.ca2) && v.ca2 >= 0.0, "ca2 must be finite and non-negative");
    detail::require(std::isfinite(v.cs2) && v.cs2 >= 0.0, "cs2 must be finite and non-negative");
}

inline void validate(const sinusoid_profile& p) {
    detail::require(p.lambda_bar > 0.0 && std::isfinite(p.lambda_bar), "lambda_bar must be positive and finite");
    detail::require(p.amplitude >= 0.0 && p.amplitude <= 1.0, "amplitude must lie in [0, 1]");
    detail::require(p.gamma > 0.0 && std::isfinite(p.gamma), "gamma must be positive and finite");
    detail::require(std::isfinite(p.phase), "phase must be finite");
}

/// Busy fraction of the edge server: lambda/mu1 + r*lambda/mu2.
inline double edge_utilization(const queue_spec& q) noexcept {
    return q.lambda * (1.0 / q.mu1 + q.r * detail::inverse(q.mu2));
}

/// lambda * E[S^2] / 2 for the two-phase service, i.e. the numerator of the
/// Pollaczek-Khinchine wait: lambda(1/mu1^2 + r/mu2^2 + r/(mu1 mu2)).
inline double second_moment_load(const queue_spec& q) noexcept {
    const double i1 = 1.0 / q.mu1;
    const double i2 = detail::inverse(q.mu2);
    return q.lambda * (i1 * i1 + q.r * i2 * i2 + q.r * i1 * i2);
}

/// Expected migration work averaged over all requests, r/mu2.
inline double migration_service_time(double r, double mu2) {
    detail::require(mu2 > 0.0, "mu2 must be positive");
    detail::require(r >= 0.0 && r <= 1.0, "r must lie in [0, 1]");
    return r * detail::inverse(mu2);
}

/// Wait at the migration destination: r*lambda / (mu1 (mu1 - r*lambda)).
///
/// The destination serves migrated users at mu1. (One statement of this term
/// in the literature uses mu2 in both places; the derivation and the
/// utilization corollary both use mu1, which is what is implemented.)
inline double destination_wait(double lambda, double mu1, double r) {
    detail::require(lambda >= 0.0 && mu1 > 0.0 && r >= 0.0 && r <= 1.0, "invalid destination parameters");
    const double rho_dest = r * lambda / mu1;
    detail::require_stable(rho_dest, "destination queue unstable: r*lambda >= mu1");
    return rho_dest / (mu1 - r * lambda);
}

/// Source-queue and destination contributions to the edge wait.
struct edge_wait_terms {
    double source = 0.0;
    double destination = 0.0;

    double total() const noexcept { return source + destination; }
};

inline double source_wait(const queue_spec& q) {
    validate(q);
    const double rho = edge_utilization(q);
    detail::require_stable(rho, "edge queue unstable: lambda/mu1 + r*lambda/mu2 >= 1");
    return second_moment_load(q) / (1.0 - rho);
}

inline edge_wait_terms mm1_two_phase_wait_terms(const queue_spec& q) {
    return {source_wait(q), destination_wait(q.lambda, q.mu1, q.r)};
}

/// Total expected edge wait with migrations (M/M/1 with an optional second
/// phase plus the destination queue).
inline double mm1_two_phase_wait(const queue_spec& q) { return mm1_two_phase_wait_terms(q).total(); }

/// Conditional wait of delayed requests in a large M/M/k, in the
/// quality-and-efficiency-driven regime: 1/(mu (1 - rho) sqrt(k)).
///
/// This conditional wait upper-bounds the unconditional one, so it is the
/// conservative choice for the cloud side of the RTT bound.
inline double mmk_qed_wait(const cloud_spec& c) {
    validate(c);
    return 1.0 / (c.mu_cloud * (1.0 - c.rho_cloud) * std::sqrt(static_cast<double>(c.k)));
}

/// Erlang-C delay probability for k servers and offered load a = k*rho.
inline double erlang_c(int k, double rho) {
    detail::require(k >= 1, "k must be at least 1");
    detail::require(rho >= 0.0, "rho must be non-negative");
    detail::require_stable(rho, "Erlang-C requires rho < 1");
    const double a = k * rho;
    double b = 1.0; // Erlang-B by recursion
    for (int i = 1; i <= k; ++i)
        b = a * b / (i + a * b);
    return b / (1.0 - rho + rho * b);
}

/// Exact unconditional M/M/k wait, C(k, a) / (k mu (1 - rho)).
inline double mmk_erlang_c_wait(const cloud_spec& c) {
    validate(c);
    return erlang_c(c.k, c.rho_cloud) / (c.k * c.mu_cloud * (1.0 - c.rho_cloud));
}

/// Exact conditional M/M/k wait of delayed requests, 1/(k mu (1 - rho)).
inline double mmk_exact_conditional_wait(const cloud_spec& c) {
    validate(c);
    return 1.0 / (c.k * c.mu_cloud * (1.0 - c.rho_cloud));
}

enum class cloud_wait_form {
    qed_conditional, ///< 1/(mu (1-rho) sqrt(k)), the default
    erlang_c,        ///< exact unconditional wait, for comparison runs
};

inline double mmk_cloud_wait(const cloud_spec& c, cloud_wait_form form = cloud_wait_form::qed_conditional) {
    return form == cloud_wait_form::qed_conditional ? mmk_qed_wait(c) : mmk_erlang_c_wait(c);
}

/// Smallest RTT difference (t_cloud - t_edge) at which the edge answers
/// faster: w_edge + s_migration - w_cloud. May be negative.
inline double delta_t_bound_mmk(const queue_spec& edge, const cloud_spec& cloud,
                                cloud_wait_form form = cloud_wait_form::qed_conditional) {
    return mm1_two_phase_wait(edge) + migration_service_time(edge.r, edge.mu2) - mmk_cloud_wait(cloud, form);
}

inline bool edge_wins(const network_spec& net, double bound) noexcept { return net.delta_t() > bound; }

/// c_S^2 of S = v1 + B*v2 with B ~ Bernoulli(r), by the law of total variance.
inline double service_scv(const phase_moments& m) {
    detail::require(m.mean1 > 0.0 && m.mean2 > 0.0, "phase means must be positive");
    detail::require(m.var1 >= 0.0 && m.var2 >= 0.0, "phase variances must be non-negative");
    detail::require(m.r >= 0.0 && m.r <= 1.0, "r must lie in [0, 1]");
    const double mean = m.mean1 + m.r * m.mean2;
    const double var = m.var1 + m.r * m.var2 + m.r * (1.0 - m.r) * m.mean2 * m.mean2;
    return var / (mean * mean);
}

/// Allen-Cunneen style edge wait: the Markovian source and destination
/// terms scaled by (c_A^2 + c_S^2)/2, assuming both sites share the same
/// variability.
inline double gg1_two_phase_wait(const queue_spec& q, const variability_spec& v) {
    validate(v);
    return mm1_two_phase_wait(q) * (v.ca2 + v.cs2) / 2.0;
}

/// Probability that an arrival waits in a GI/G/k queue. The high-traffic
/// branch (rho^k + rho)/2 applies for rho >= 0.7, else rho^((k+1)/2).
inline double waiting_probability(int k, double rho) {
    detail::require(k >= 1, "k must be at least 1");
    detail::require(rho >= 0.0, "rho must be non-negative");
    if (rho >= 0.7)
        return (std::pow(rho, k) + rho) / 2.0;
    return std::pow(rho, (k + 1) / 2.0);
}

inline double ggk_cloud_wait(const cloud_spec& c, const variability_spec& v) {
    validate(c);
    validate(v);
    const double pw = waiting_probability(c.k, c.rho_cloud);
    return pw / (c.mu_cloud * (1.0 - c.rho_cloud)) * (v.ca2 + v.cs2) / (2.0 * c.k);
}

inline double delta_t_bound_ggk(const queue_spec& edge, const variability_spec& edge_var, const cloud_spec& cloud,
                                const variability_spec& cloud_var) {
    return gg1_two_phase_wait(edge, edge_var) + migration_service_time(edge.r, edge.mu2) -
           ggk_cloud_wait(cloud, cloud_var);
}

/// Largest arrival c_A^2 for which the edge still beats the cloud, ignoring
/// the destination term. Negative results mean no arrival variability keeps
/// the edge competitive.
inline double max_edge_arrival_scv(double delta_t, const queue_spec& q, double s_migration, double w_cloud,
                                   double cs2) {
    validate(q);
    const double spare = 1.0 - edge_utilization(q);
    detail::require_stable(1.0 - spare, "edge queue unstable: no remaining capacity");
    return 2.0 * (delta_t - s_migration + w_cloud) * spare / second_moment_load(q) - cs2;
}

/// mu_eff = (1/mu1 + r/mu2)^-1.
inline double effective_service_rate(double mu1, double mu2, double r) {
    detail::require(mu1 > 0.0 && mu2 > 0.0, "service rates must be positive");
    detail::require(r >= 0.0 && r <= 1.0, "r must lie in [0, 1]");
    return 1.0 / (1.0 / mu1 + r * detail::inverse(mu2));
}

/// Mean occupancy of the infinite-server queue under sinusoidal input, used
/// as the instantaneous utilization of a single-server edge.
inline double sinusoidal_offered_load(double t, const sinusoid_profile& p, double mu_eff) {
    validate(p);
    detail::require(mu_eff > 0.0, "mu_eff must be positive");
    const double beta = p.gamma / mu_eff;
    const double x = p.gamma * t + p.phase;
    return p.lambda_bar / mu_eff * (1.0 + p.amplitude / (1.0 + beta * beta) * (std::sin(x) - beta * std::cos(x)));
}

/// Lag of the occupancy behind the demand, acot(1/gamma)/gamma.
inline double offered_load_lag(double gamma) {
    detail::require(gamma > 0.0, "gamma must be positive");
    return std::atan(gamma) / gamma;
}

/// w(t) = m(t) / (mu_eff (1 - m(t))).
inline double sinusoidal_wait_profile(double t, const sinusoid_profile& p, double mu_eff) {
    const double m = sinusoidal_offered_load(t, p, mu_eff);
    if (!(m < 1.0 - stability_margin))
        throw overloaded_instant("offered load m(t) = " + std::to_string(m) + " >= 1 at t = " + std::to_string(t));
    return m / (mu_eff * (1.0 - m));
}

/// Second-order excess mean wait of an M_t/M/1 queue over the stationary one:
/// rho^2 A^2 / (2 mu_eff (1-rho)^3 (1 + (gamma/mu_eff)^2)).
///
/// Higher-order terms are dropped, so this underestimates simulated excess.
inline double excess_wait_sinusoidal(double rho, double amplitude, double gamma, double mu_eff) {
    detail::require(rho >= 0.0, "rho must be non-negative");
    detail::require(amplitude >= 0.0 && amplitude <= 1.0, "amplitude must lie in [0, 1]");
    detail::require(gamma >= 0.0 && mu_eff > 0.0, "gamma must be non-negative and mu_eff positive");
    detail::require_stable(rho, "mean utilization must be below 1");
    const double beta = gamma / mu_eff;
    const double spare = 1.0 - rho;
    return rho * rho * amplitude * amplitude / (2.0 * mu_eff * spare * spare * spare * (1.0 + beta * beta));
}

/// How the crossing angle theta of lambda(t) = mu_eff is computed.
enum class crossing_rule {
    /// theta = asin(mu_eff/lambda_bar - 1), the closed form used by the
    /// published rush-hour model.
    published,
    /// theta = asin((mu_eff/lambda_bar - 1)/A), the true crossing points.
    exact,
};

struct overload_window_t {
    double t1 = 0.0;    ///< start, seconds, in [0, period)
    double t2 = 0.0;    ///< end, seconds; t2 - t1 = (pi - 2 theta)/gamma
    double theta = 0.0; ///< crossing angle, radians
};

/// Overload interval [t1, t2] of the first cycle where lambda(t) exceeds
/// mu_eff, or nullopt when the peak rate never exceeds it (including the
/// tangent case).
///
/// A non-zero phase shifts the window by -phase/gamma modulo the period.
/// When mu_eff < lambda_bar the published rule evaluates asin at a negative
/// argument; this analytic extension is experimental.
inline std::optional<overload_window_t> overload_window(const sinusoid_profile& p, double mu_eff,
                                                        crossing_rule rule = crossing_rule::published) {
    validate(p);
    detail::require(mu_eff > 0.0, "mu_eff must be positive");
    if (!(p.peak_rate() > mu_eff))
        return std::nullopt;
    double arg = mu_eff / p.lambda_bar - 1.0;
    if (rule == crossing_rule::exact)
        arg /= p.amplitude;
    if (arg < -1.0 || arg > 1.0)
        throw domain_error("crossing angle argument " + std::to_string(arg) + " outside [-1, 1]");
    const double theta = std::asin(arg);
    const double period = p.period();
    double t1 = std::fmod((theta - p.phase) / p.gamma, period);
    if (t1 < 0.0)
        t1 += period;
    return overload_window_t{t1, t1 + (std::numbers::pi - 2.0 * theta) / p.gamma, theta};
}

/// Net fluid input over the overload window. `backlog()` is its positive
/// part; a profile that never overloads reports zero with `overloaded`
/// false.
struct fluid_backlog_t {
    double net_input = 0.0; ///< jobs
    bool overloaded = false;
    std::optional<overload_window_t> window;

    double backlog() const noexcept { return std::max(net_input, 0.0); }
};

/// V = ((lambda_bar - mu_eff)(pi - 2 theta) + 2 lambda_bar A cos(theta)) / gamma,
/// which equals the integral of lambda(t) - mu_eff over [t1, t2].
inline fluid_backlog_t fluid_backlog(const sinusoid_profile& p, double mu_eff,
                                     crossing_rule rule = crossing_rule::published) {
    auto w = overload_window(p, mu_eff, rule);
    if (!w)
        return {};
    const double v = ((p.lambda_bar - mu_eff) * (std::numbers::pi - 2.0 * w->theta) +
                      2.0 * p.lambda_bar * p.amplitude * std::cos(w->theta)) /
                     p.gamma;
    return {v, true, w};
}

/// Time to clear the rush-hour backlog at mu_eff; zero without overload.
inline double rush_hour_wait(const sinusoid_profile& p, double mu_eff, crossing_rule rule = crossing_rule::published) {
    return fluid_backlog(p, mu_eff, rule).backlog() / mu_eff;
}

/// Pointwise-stationary cloud wait at instantaneous utilization rho_t. An
/// upper bound on the time-averaged wait.
inline double psa_cloud_wait(double rho_t, const cloud_spec& c) {
    if (!(rho_t < 1.0 - stability_margin))
        throw overloaded_instant("instantaneous cloud utilization " + std::to_string(rho_t) + " >= 1");
    cloud_spec at = c;
    at.rho_cloud = rho_t;
    return mmk_qed_wait(at);
}

/// Sum of per-site sinusoidal rates seen by a pooled cloud.
class aggregate_profile {
public:
    explicit aggregate_profile(std::vector<sinusoid_profile> sites) : sites_(std::move(sites)) {
        detail::require(!sites_.empty(), "aggregate needs at least one site");
        for (const auto& s : sites_)
            validate(s);
    }

    double rate_at(double t) const noexcept {
        double sum = 0.0;
        for (const auto& s : sites_)
            sum += s.rate_at(t);
        return sum;
    }

    double mean_rate() const noexcept {
        double sum = 0.0;
        for (const auto& s : sites_)
            sum += s.lambda_bar;
        return sum;
    }

    bool common_period() const noexcept {
        return std::all_of(sites_.begin(), sites_.end(),
                           [&](const sinusoid_profile& s) { return s.gamma == sites_.front().gamma; });
    }

    /// (max - mean)/mean sampled over one common period.
    double relative_amplitude(int samples = 4096) const {
        if (!common_period())
            throw incompatible_periods("sites do not share a common angular frequency; pass a horizon");
        return relative_amplitude(sites_.front().period(), samples);
    }

    /// (max - mean)/mean sampled over [0, horizon).
    double relative_amplitude(double horizon, int samples) const {
        detail::require(horizon > 0.0 && samples > 0, "horizon and samples must be positive");
        double peak = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i)
            peak = std::max(peak, rate_at(horizon * i / samples));
        const double mean = mean_rate();
        return std::max(peak - mean, 0.0) / mean;
    }

    std::span<const sinusoid_profile> sites() const noexcept { return sites_; }

private:
    std::vector<sinusoid_profile> sites_;
};

inline aggregate_profile aggregate_cloud_profile(std::vector<sinusoid_profile> sites) {
    return aggregate_profile(std::move(sites));
}

struct peak_capacities {
    double edge = 0.0;
    double cloud = 0.0;
};

/// Two-sigma peak provisioning for k independent Poisson sites:
/// C_edge = k(lambda + 2 sqrt(lambda)), C_cloud = k lambda + 2 sqrt(k lambda).
inline peak_capacities empirical_rule_capacities(double lambda_site, int k) {
    detail::require(lambda_site > 0.0, "lambda must be positive");
    detail::require(k >= 1, "k must be at least 1");
    const double kl = k * lambda_site;
    return {k * (lambda_site + 2.0 * std::sqrt(lambda_site)), kl + 2.0 * std::sqrt(kl)};
}

} // namespace analytic
} // namespace edgeq

#endif // EDGEQ_ANALYTIC_HPP
