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

#include "kic/data_matrix.hpp"
#include "kic/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>

namespace kic {

enum class KernelFamily { Polynomial, RBF };

/// Polynomial kernel (1 + x'y)^d or RBF kernel exp(-|x-y|^2 / (2 sigma^2)).
class KernelSpec {
  public:
    static constexpr int max_degree = 64;

    static KernelSpec polynomial(int degree) {
        if (degree < 1 || degree > max_degree) {
            throw ConfigError("polynomial degree must be in [1, " + std::to_string(max_degree) + "], got " +
                              std::to_string(degree));
        }
        return KernelSpec(KernelFamily::Polynomial, degree, 0.0);
    }

    static KernelSpec rbf(double lengthscale) {
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
            throw ConfigError("RBF lengthscale must be positive and finite");
        }
        return KernelSpec(KernelFamily::RBF, 0, lengthscale);
    }

    [[nodiscard]] KernelFamily family() const noexcept { return family_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] double lengthscale() const noexcept { return lengthscale_; }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        if (family_ == KernelFamily::Polynomial) {
            os << "polynomial(degree=" << degree_ << ")";
        } else {
            os << "rbf(sigma=" << lengthscale_ << ")";
        }
        return os.str();
    }

  private:
    KernelSpec(KernelFamily f, int d, double s) : family_(f), degree_(d), lengthscale_(s) {}

    KernelFamily family_;
    int degree_;
    double lengthscale_;
};

/// Gram matrix G, cross-kernel vector g and self-kernel value gamma for one query.
struct KernelTriple {
    Matrix gram;
    Vector cross;
    double self_term = 0.0;
};

struct CrossKernel {
    Vector cross;
    double self_term = 0.0;
};

namespace detail {

/// base^exp by repeated squaring.
inline double ipow(double base, int exp) noexcept {
    double result = 1.0;
    while (exp > 0) {
        if (exp & 1) {
            result *= base;
        }
        exp >>= 1;
        if (exp > 0) {
            base *= base;
        }
    }
    return result;
}

// Both reductions run in index order, and each term is symmetric in (x, y),
// so k(x, y) and k(y, x) are bitwise identical.
inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i] - y[i];
        s += t * t;
    }
    return s;
}

/// Unchecked evaluation; callers validate dimensions and finiteness.
inline double kernel_value(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) noexcept {
    if (spec.family() == KernelFamily::Polynomial) {
        return ipow(1.0 + dot(x, y), spec.degree());
    }
    const double s = spec.lengthscale();
    return std::exp(-squared_distance(x, y) / (2.0 * s * s));
}

inline void check_finite(std::span<const double> x, const char *what) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw ConfigError(std::string(what) + " contains a non-finite coordinate");
        }
    }
}

}  // namespace detail

inline double eval_kernel(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ConfigError("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
    }
    if (x.empty()) {
        throw ConfigError("kernel arguments must have dimension >= 1");
    }
    detail::check_finite(x, "kernel argument x");
    detail::check_finite(y, "kernel argument y");
    return detail::kernel_value(spec, x, y);
}

/// Raw (unscaled) Gram matrix; the upper triangle is computed and mirrored.
inline Matrix gram_matrix(const KernelSpec &spec, const DataMatrix &X) {
    X.validate();
    const auto n = static_cast<Eigen::Index>(X.rows());
    Matrix G(n, n);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto xi = X.row(static_cast<std::size_t>(i));
        for (Eigen::Index j = i; j < n; ++j) {
            G(i, j) = detail::kernel_value(spec, xi, X.row(static_cast<std::size_t>(j)));
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            G(i, j) = G(j, i);
        }
    }
    return G;
}

/// g_i = k(x_i, x) over the training rows, and gamma = k(x, x).
inline CrossKernel cross_vector(const KernelSpec &spec, const DataMatrix &X, std::span<const double> x) {
    if (x.size() != X.cols()) {
        throw ConfigError("query dimension " + std::to_string(x.size()) + " does not match training dimension " +
                          std::to_string(X.cols()));
    }
    detail::check_finite(x, "query");
    CrossKernel out;
    out.cross.resize(static_cast<Eigen::Index>(X.rows()));
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out.cross(static_cast<Eigen::Index>(i)) = detail::kernel_value(spec, X.row(i), x);
    }
    out.self_term = detail::kernel_value(spec, x, x);
    return out;
}

inline KernelTriple kernel_triple(const KernelSpec &spec, const DataMatrix &X, std::span<const double> x) {
    auto c = cross_vector(spec, X, x);
    return {gram_matrix(spec, X), std::move(c.cross), c.self_term};
}

}  // namespace kic
