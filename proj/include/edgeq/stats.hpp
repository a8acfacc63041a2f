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

#ifndef EDGEQ_STATS_HPP
#define EDGEQ_STATS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace edgeq {

/// Neumaier-compensated running sum.
class compensated_sum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean of replicated values with a normal-approximation 95% interval.
struct estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
    bool stderr_defined = false; ///< false for a single run

    double half_width() const noexcept { return 0.5 * (ci_high - ci_low); }
};

inline constexpr double z95 = 1.959963984540054;

/// Summarizes values in the given order, so equal inputs always give
/// bit-identical output.
inline estimate summarize(std::span<const double> xs) {
    estimate e;
    e.n = xs.size();
    if (xs.empty())
        return e;
    compensated_sum s;
    for (double x : xs)
        s.add(x);
    e.mean = s.value() / xs.size();
    if (xs.size() > 1) {
        compensated_sum ss;
        for (double x : xs)
            ss.add((x - e.mean) * (x - e.mean));
        e.stderr_ = std::sqrt(ss.value() / (xs.size() - 1) / xs.size());
        e.stderr_defined = true;
    }
    e.ci_low = e.mean - z95 * e.stderr_;
    e.ci_high = e.mean + z95 * e.stderr_;
    return e;
}

/// Nearest-rank percentile, p in (0, 1]. Reorders `xs`.
inline double percentile(std::vector<double>& xs, double p) {
    if (xs.empty())
        return 0.0;
    auto rank = static_cast<std::size_t>(std::ceil(p * xs.size()));
    rank = std::clamp<std::size_t>(rank, 1, xs.size());
    std::nth_element(xs.begin(), xs.begin() + (rank - 1), xs.end());
    return xs[rank - 1];
}

inline unsigned default_workers() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto body = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(m);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace edgeq

#endif // EDGEQ_STATS_HPP
