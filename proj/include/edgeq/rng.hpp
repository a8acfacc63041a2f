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

#ifndef EDGEQ_RNG_HPP
#define EDGEQ_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace edgeq {

/// Counter-based Philox4x64-10 block function (Salmon et al., SC'11).
///
/// Maps a 256-bit counter and a 128-bit key to 256 pseudo-random bits. The
/// same (counter, key) always yields the same block, which is what makes
/// substreams addressable without any shared state.
struct philox4x64 {
    using counter_type = std::array<std::uint64_t, 4>;
    using key_type = std::array<std::uint64_t, 2>;

    static constexpr std::uint64_t mul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t mul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73BULL;
    static constexpr int rounds = 10;

    static counter_type block(counter_type ctr, key_type key) noexcept {
        for (int i = 0; i < rounds; ++i) {
            if (i > 0) {
                key[0] += weyl0;
                key[1] += weyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) noexcept {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    static counter_type round(const counter_type& c, const key_type& k) noexcept {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(mul0, c[0], hi0, lo0);
        mulhilo(mul1, c[2], hi1, lo1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Identifies one reproducible random stream: the pair (seed, stream_id)
/// fully determines every draw.
struct seeded_stream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// The i-th child stream. Children of distinct parents never collide as
    /// long as parents are spaced by at least `stride` ids.
    seeded_stream child(std::uint64_t i, std::uint64_t stride = 1) const noexcept {
        return {seed, stream_id * stride + i};
    }

    friend bool operator==(const seeded_stream&, const seeded_stream&) = default;
};

/// Sequential reader over one Philox stream plus the handful of variates the
/// simulators need.
///
/// Layout (version 1, pinned): key = {seed, 0}; counter = {block, 0,
/// stream_id, lane} with `block` starting at 0 and incremented once per four
/// 64-bit outputs. Lanes split one stream into independent sub-sequences
/// (arrivals, service, routing) so that changing one input law leaves the
/// other draws untouched. Variates are produced by inversion or Box-Muller from
/// 53-bit uniforms, so draws are identical across compilers and platforms.
class random_source {
public:
    static constexpr int layout_version = 1;

    using result_type = std::uint64_t;

    explicit random_source(seeded_stream s, std::uint64_t lane = 0) noexcept
        : key_{s.seed, 0}, stream_id_(s.stream_id), lane_(lane) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            buf_ = philox4x64::block({block_++, 0, stream_id_, lane_}, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        const unsigned __int128 p = static_cast<unsigned __int128>((*this)()) * n;
        return static_cast<std::uint64_t>(p >> 64);
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t blocks_consumed() const noexcept { return block_; }

private:
    philox4x64::key_type key_;
    std::uint64_t stream_id_;
    std::uint64_t lane_;
    std::uint64_t block_ = 0;
    philox4x64::counter_type buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace edgeq

#endif // EDGEQ_RNG_HPP
