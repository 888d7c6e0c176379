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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace kic {

inline constexpr std::size_t default_feature_dim_limit = 20000;

/// binomial(p + d, d), saturating at SIZE_MAX.
inline std::size_t feature_dimension(std::size_t p, int d) noexcept {
    unsigned __int128 c = 1;
    for (int i = 1; i <= d; ++i) {
        c = c * (p + static_cast<std::size_t>(i)) / static_cast<unsigned>(i);
        if (c > std::numeric_limits<std::size_t>::max()) {
            return std::numeric_limits<std::size_t>::max();
        }
    }
    return static_cast<std::size_t>(c);
}

/**
 * Explicit feature map of the degree-d polynomial kernel: every monomial
 * x^alpha with |alpha| <= d, scaled by the square root of the multinomial
 * coefficient d! / (alpha_1! ... alpha_p! (d - |alpha|)!) so that
 * v(x)'v(y) = (1 + x'y)^d.
 *
 * Monomials are kept in graded lexicographic order (total degree ascending,
 * then x_1 before x_2 and so on). Scores never depend on the order.
 */
class FeatureMap {
  public:
    FeatureMap(std::size_t p, int d, std::vector<std::vector<int>> exponents, std::vector<double> coefficients)
        : p_(p), d_(d), exponents_(std::move(exponents)), coefficients_(std::move(coefficients)) {
        if (exponents_.size() != coefficients_.size()) {
            throw ConfigError("feature map exponent and coefficient lists differ in length");
        }
        for (const auto &a : exponents_) {
            if (a.size() != p_) {
                throw ConfigError("feature map exponent vector has wrong dimension");
            }
        }
    }

    [[nodiscard]] std::size_t input_dimension() const noexcept { return p_; }
    [[nodiscard]] int degree() const noexcept { return d_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return exponents_.size(); }
    [[nodiscard]] const std::vector<std::vector<int>> &exponent_list() const noexcept { return exponents_; }
    [[nodiscard]] const std::vector<double> &coefficient_list() const noexcept { return coefficients_; }

    /// Same basis with monomial k moved to position k' where perm[k'] = k.
    [[nodiscard]] FeatureMap permuted(const std::vector<std::size_t> &perm) const {
        if (perm.size() != dimension()) {
            throw ConfigError("permutation length does not match feature dimension");
        }
        std::vector<std::vector<int>> e;
        std::vector<double> c;
        e.reserve(perm.size());
        c.reserve(perm.size());
        for (std::size_t k : perm) {
            e.push_back(exponents_.at(k));
            c.push_back(coefficients_.at(k));
        }
        return {p_, d_, std::move(e), std::move(c)};
    }

  private:
    std::size_t p_;
    int d_;
    std::vector<std::vector<int>> exponents_;
    std::vector<double> coefficients_;
};

namespace detail {

inline double binomial(int n, int k) noexcept {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return c;
}

// All alpha with |alpha| == total, x_1's exponent descending first.
inline void enumerate_degree(std::size_t p, int total, std::vector<int> &current, std::size_t pos,
                             std::vector<std::vector<int>> &out) {
    if (pos + 1 == p) {
        current[pos] = total;
        out.push_back(current);
        current[pos] = 0;
        return;
    }
    for (int a = total; a >= 0; --a) {
        current[pos] = a;
        enumerate_degree(p, total - a, current, pos + 1, out);
    }
    current[pos] = 0;
}

}  // namespace detail

inline FeatureMap build_feature_map(std::size_t p, int d, std::size_t limit = default_feature_dim_limit) {
    if (p < 1 || d < 1) {
        throw ConfigError("feature map requires p >= 1 and d >= 1");
    }
    const std::size_t s = feature_dimension(p, d);
    if (s > limit) {
        throw ConfigError("feature dimension too large: binomial(" + std::to_string(p + static_cast<std::size_t>(d)) +
                          ", " + std::to_string(d) + ") = " + std::to_string(s) + " exceeds the limit of " +
                          std::to_string(limit));
    }
    std::vector<std::vector<int>> exponents;
    exponents.reserve(s);
    std::vector<int> current(p, 0);
    for (int t = 0; t <= d; ++t) {
        detail::enumerate_degree(p, t, current, 0, exponents);
    }
    std::vector<double> coefficients;
    coefficients.reserve(s);
    for (const auto &alpha : exponents) {
        int remaining = d;
        double c = 1.0;
        for (int a : alpha) {
            c *= detail::binomial(remaining, a);
            remaining -= a;
        }
        coefficients.push_back(std::sqrt(c));
    }
    return {p, d, std::move(exponents), std::move(coefficients)};
}

inline Vector apply_feature_map(const FeatureMap &fm, std::span<const double> x) {
    const std::size_t p = fm.input_dimension();
    if (x.size() != p) {
        throw ConfigError("feature map expects dimension " + std::to_string(p) + ", got " + std::to_string(x.size()));
    }
    const int d = fm.degree();
    // powers[i * (d + 1) + k] = x_i^k
    std::vector<double> powers(p * static_cast<std::size_t>(d + 1));
    for (std::size_t i = 0; i < p; ++i) {
        double v = 1.0;
        for (int k = 0; k <= d; ++k) {
            powers[i * static_cast<std::size_t>(d + 1) + static_cast<std::size_t>(k)] = v;
            v *= x[i];
        }
    }
    const auto &exps = fm.exponent_list();
    const auto &coef = fm.coefficient_list();
    Vector out(static_cast<Eigen::Index>(exps.size()));
    for (std::size_t k = 0; k < exps.size(); ++k) {
        double m = coef[k];
        for (std::size_t i = 0; i < p; ++i) {
            if (const int a = exps[k][i]; a != 0) {
                m *= powers[i * static_cast<std::size_t>(d + 1) + static_cast<std::size_t>(a)];
            }
        }
        out(static_cast<Eigen::Index>(k)) = m;
    }
    return out;
}

/// s x n matrix whose columns are v(x_i).
inline Matrix feature_columns(const FeatureMap &fm, const DataMatrix &X) {
    Matrix V(static_cast<Eigen::Index>(fm.dimension()), static_cast<Eigen::Index>(X.rows()));
    for (std::size_t i = 0; i < X.rows(); ++i) {
        V.col(static_cast<Eigen::Index>(i)) = apply_feature_map(fm, X.row(i));
    }
    return V;
}

}  // namespace kic
