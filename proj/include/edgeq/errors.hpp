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

#ifndef EDGEQ_ERRORS_HPP
#define EDGEQ_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgeq {

/// Base class of every error raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A closed form was evaluated at (or beyond) a utilization of one.
struct unstable_queue : error {
    using error::error;
};

/// A time-varying quantity is saturated at the queried instant.
struct overloaded_instant : error {
    using error::error;
};

/// Arguments outside the mathematical domain of an operation.
struct domain_error : error {
    using error::error;
};

struct incompatible_periods : error {
    using error::error;
};

/// The requested squared coefficient of variation cannot be produced by the
/// chosen distribution family.
struct unreachable_scv : error {
    using error::error;
};

/// Inconsistent simulation or scenario configuration.
struct config_error : error {
    using error::error;
};

/// A simulated queue grew past its configured in-system cap.
struct runtime_instability : error {
    using error::error;
};

struct parse_error : error {
    parse_error(std::size_t line, const std::string& what)
        : error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct empty_trace : error {
    using error::error;
};

struct oversized_vm : error {
    using error::error;
};

} // namespace edgeq

#endif // EDGEQ_ERRORS_HPP
