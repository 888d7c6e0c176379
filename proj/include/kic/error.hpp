/*
 * Copyright 2026 The kic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments, inconsistent dimensions, or a bad hyperparameter combination.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Conjugate gradients ran out of iterations; carries the best residual reached.
class ConvergenceError : public NumericalError {
  public:
    ConvergenceError(const std::string &what, double best_residual, int iterations)
        : NumericalError(what), best_residual_(best_residual), iterations_(iterations) {}

    [[nodiscard]] double best_residual() const noexcept { return best_residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

  private:
    double best_residual_;
    int iterations_;
};

/// File could not be opened, read, parsed, or written.
class IoError : public Error {
  public:
    using Error::Error;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Process-wide sink for non-fatal warnings. Defaults to stderr.
inline WarningHandler &warning_handler() {
    static WarningHandler handler = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return handler;
}

inline void warn(std::string_view msg) {
    if (auto &h = warning_handler()) {
        h(msg);
    }
}

}  // namespace kic
