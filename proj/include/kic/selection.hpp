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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "kic/error.hpp"

namespace kic {

/// ceil(alpha * n), guarded against alpha * n landing a hair above an integer.
inline std::size_t filter_size(double alpha, std::size_t n) {
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw ConfigError("filter fraction alpha must lie in (0, 1]");
    }
    const double raw = alpha * static_cast<double>(n);
    auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    m = std::min(m, n);
    if (m < 1) {
        throw ConfigError("filter fraction alpha keeps no samples");
    }
    return m;
}

/**
 * Indices of the `count` lowest scores, ties broken by index, returned in
 * ascending index order so the retained rows keep their original order.
 */
inline std::vector<std::size_t> lowest_indices(const std::vector<double> &scores, std::size_t count) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    order.resize(std::min(count, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace kic
