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

#ifndef EDGEQ_WORKLOAD_HPP
#define EDGEQ_WORKLOAD_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgeq/analytic.hpp"
#include "edgeq/errors.hpp"
#include "edgeq/rng.hpp"

namespace edgeq {

enum class renewal_family { exponential, hyperexponential2, erlang, deterministic, lognormal };

inline std::string_view to_string(renewal_family f) noexcept {
    switch (f) {
    case renewal_family::exponential: return "exponential";
    case renewal_family::hyperexponential2: return "hyperexponential2";
    case renewal_family::erlang: return "erlang";
    case renewal_family::deterministic: return "deterministic";
    case renewal_family::lognormal: return "lognormal";
    }
    return "?";
}

inline renewal_family parse_renewal_family(std::string_view s) {
    for (auto f : {renewal_family::exponential, renewal_family::hyperexponential2, renewal_family::erlang,
                   renewal_family::deterministic, renewal_family::lognormal})
        if (s == to_string(f))
            return f;
    throw domain_error("unknown renewal family '" + std::string(s) + "'");
}

struct renewal_spec {
    double mean = 1.0; ///< seconds
    double scv = 1.0;  ///< target c^2
    renewal_family family = renewal_family::exponential;

    static renewal_spec exponential(double mean) { return {mean, 1.0, renewal_family::exponential}; }
};

/// Draws i.i.d. samples from a renewal_spec. Construction fits the family to
/// the requested moments; `note()` carries the warning when the target c^2
/// had to be rounded (erlang only).
class renewal_sampler {
public:
    explicit renewal_sampler(const renewal_spec& spec) : spec_(spec) {
        if (!(spec.mean > 0.0) || !std::isfinite(spec.mean))
            throw domain_error("renewal mean must be positive and finite");
        if (!(spec.scv >= 0.0) || !std::isfinite(spec.scv))
            throw domain_error("renewal scv must be finite and non-negative");
        constexpr double tol = 1e-9;
        switch (spec.family) {
        case renewal_family::exponential:
            if (std::abs(spec.scv - 1.0) > tol)
                throw unreachable_scv("exponential family has c^2 = 1, requested " + std::to_string(spec.scv));
            rate1_ = 1.0 / spec.mean;
            break;
        case renewal_family::deterministic:
            if (spec.scv > tol)
                throw unreachable_scv("deterministic family has c^2 = 0, requested " + std::to_string(spec.scv));
            break;
        case renewal_family::hyperexponential2: {
            if (spec.scv < 1.0 - tol)
                throw unreachable_scv("hyperexponential2 needs c^2 >= 1, requested " + std::to_string(spec.scv));
            const double c2 = std::max(spec.scv, 1.0);
            p_ = 0.5 * (1.0 + std::sqrt((c2 - 1.0) / (c2 + 1.0)));
            rate1_ = 2.0 * p_ / spec.mean;
            rate2_ = 2.0 * (1.0 - p_) / spec.mean;
            break;
        }
        case renewal_family::erlang: {
            if (spec.scv <= 0.0)
                throw unreachable_scv("erlang family cannot reach c^2 = 0");
            const double exact = 1.0 / spec.scv;
            stages_ = std::max(1, static_cast<int>(std::lround(exact)));
            if (std::abs(exact - stages_) > 1e-6)
                note_ = "erlang c^2 " + std::to_string(spec.scv) + " is not 1/n; using n = " + std::to_string(stages_) +
                        " (c^2 = " + std::to_string(1.0 / stages_) + ")";
            rate1_ = stages_ / spec.mean;
            break;
        }
        case renewal_family::lognormal: {
            if (spec.scv <= 0.0)
                throw unreachable_scv("lognormal family cannot reach c^2 = 0");
            sigma_ = std::sqrt(std::log1p(spec.scv));
            location_ = std::log(spec.mean) - 0.5 * sigma_ * sigma_;
            break;
        }
        }
    }

    double operator()(random_source& rng) const {
        switch (spec_.family) {
        case renewal_family::exponential: return rng.exponential(rate1_);
        case renewal_family::deterministic: return spec_.mean;
        case renewal_family::hyperexponential2:
            return rng.uniform() < p_ ? rng.exponential(rate1_) : rng.exponential(rate2_);
        case renewal_family::erlang: {
            double x = 0.0;
            for (int i = 0; i < stages_; ++i)
                x += rng.exponential(rate1_);
            return x;
        }
        case renewal_family::lognormal: return std::exp(location_ + sigma_ * rng.normal());
        }
        return 0.0;
    }

    const renewal_spec& spec() const noexcept { return spec_; }
    double branch_probability() const noexcept { return p_; }
    int stages() const noexcept { return stages_; }
    const std::optional<std::string>& note() const noexcept { return note_; }

    /// c^2 the sampler actually produces.
    double effective_scv() const noexcept {
        return spec_.family == renewal_family::erlang ? 1.0 / stages_ : spec_.scv;
    }

private:
    renewal_spec spec_;
    double rate1_ = 0.0;
    double rate2_ = 0.0;
    double p_ = 0.0;
    int stages_ = 1;
    double sigma_ = 0.0;
    double location_ = 0.0;
    std::optional<std::string> note_;
};

inline std::vector<double> renewal_times(const renewal_spec& spec, std::size_t count, seeded_stream stream) {
    renewal_sampler draw(spec);
    random_source rng(stream);
    std::vector<double> out(count);
    for (auto& x : out)
        x = draw(rng);
    return out;
}

/// Homogeneous Poisson arrivals, generated one at a time.
class poisson_process {
public:
    poisson_process(double lambda, random_source rng) : lambda_(lambda), rng_(rng) {
        if (!(lambda > 0.0))
            throw domain_error("poisson rate must be positive");
    }

    double next() { return t_ += rng_.exponential(lambda_); }

private:
    double lambda_;
    random_source rng_;
    double t_ = 0.0;
};

/// Sinusoidal NHPP by thinning a rate lambda_bar(1 + A) Poisson envelope.
class nhpp_process {
public:
    nhpp_process(const sinusoid_profile& p, random_source rng) : profile_(p), rng_(rng) {
        analytic::validate(p);
        envelope_ = p.peak_rate();
    }

    double next() {
        for (;;) {
            t_ += rng_.exponential(envelope_);
            if (rng_.uniform() * envelope_ <= profile_.rate_at(t_))
                return t_;
        }
    }

private:
    sinusoid_profile profile_;
    random_source rng_;
    double envelope_ = 0.0;
    double t_ = 0.0;
};

/// Renewal arrivals with the given inter-arrival law.
class renewal_process {
public:
    renewal_process(const renewal_spec& spec, random_source rng) : draw_(spec), rng_(rng) {}

    double next() { return t_ += draw_(rng_); }

private:
    renewal_sampler draw_;
    random_source rng_;
    double t_ = 0.0;
};

template <class Process>
std::vector<double> collect_until(Process& proc, double horizon) {
    std::vector<double> out;
    if (!(horizon > 0.0))
        return out;
    for (double t = proc.next(); t < horizon; t = proc.next())
        out.push_back(t);
    return out;
}

inline std::vector<double> poisson_arrivals(double lambda, double horizon, seeded_stream stream) {
    if (!(horizon > 0.0))
        return {};
    poisson_process proc(lambda, random_source(stream));
    return collect_until(proc, horizon);
}

inline std::vector<double> nhpp_sinusoidal(const sinusoid_profile& profile, double horizon, seeded_stream stream) {
    nhpp_process proc(profile, random_source(stream));
    return collect_until(proc, horizon);
}

struct phase_law {
    enum class kind { uniform, fixed } law = kind::uniform;
    std::vector<double> phases; ///< used when law == fixed, one per site

    static phase_law uniform() { return {}; }
    static phase_law fixed(std::vector<double> p) { return {kind::fixed, std::move(p)}; }
};

/// k copies of `base` with phases drawn from the law. Uniform phases lie in
/// [0, 2 pi).
inline std::vector<sinusoid_profile> phase_shifted_sites(int k, const sinusoid_profile& base, const phase_law& law,
                                                         seeded_stream stream) {
    if (k < 1)
        throw domain_error("site count must be at least 1");
    if (law.law == phase_law::kind::fixed && law.phases.size() != static_cast<std::size_t>(k))
        throw domain_error("fixed phase list has " + std::to_string(law.phases.size()) + " entries for " +
                           std::to_string(k) + " sites");
    random_source rng(stream);
    std::vector<sinusoid_profile> out(k, base);
    for (int i = 0; i < k; ++i)
        out[i].phase =
            law.law == phase_law::kind::fixed ? law.phases[i] : 2.0 * std::numbers::pi * rng.uniform();
    return out;
}

} // namespace edgeq

#endif // EDGEQ_WORKLOAD_HPP
