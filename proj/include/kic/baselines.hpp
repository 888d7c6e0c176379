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
#include "kic/kernels.hpp"
#include "kic/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace kic {

/// Seed of a randomized method. Trial t of a repeated experiment uses seed + t.
struct RngSeed {
    std::uint64_t value = 0;

    [[nodiscard]] RngSeed for_trial(std::uint64_t trial) const noexcept { return {value + trial}; }
};

/// Generator behind every randomized operation; its name goes into run metadata.
using Engine = std::mt19937_64;
inline constexpr const char *engine_name = "mt19937_64";

inline Engine make_engine(RngSeed seed) { return Engine(seed.value); }

/// k-th smallest Euclidean distance from each row to the other rows.
inline ScoreVector knn_scores(const DataMatrix &X, int k) {
    X.validate();
    const std::size_t n = X.rows();
    if (k < 1 || static_cast<std::size_t>(k) >= n) {
        throw ConfigError("knn requires 1 <= k <= n - 1 (k = " + std::to_string(k) + ", n = " + std::to_string(n) +
                          ")");
    }
    ScoreVector out(n);
    std::vector<double> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                dist[c++] = detail::squared_distance(X.row(i), X.row(j));
            }
        }
        auto kth = dist.begin() + (k - 1);
        std::nth_element(dist.begin(), kth, dist.end());
        out[i] = std::sqrt(*kth);
    }
    return out;
}

/// `count` indices drawn uniformly with replacement from [0, n).
inline std::vector<std::size_t> draw_sample(std::size_t n, std::size_t count, Engine &engine) {
    if (n == 0) {
        throw ConfigError("cannot sample from empty data");
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> out(count);
    for (auto &v : out) {
        v = pick(engine);
    }
    return out;
}

/// Distance from each row to its nearest sampled row; a sampled row scores 0.
inline ScoreVector distance_to_sample(const DataMatrix &X, const std::vector<std::size_t> &sample) {
    if (sample.empty()) {
        throw ConfigError("reference sample is empty");
    }
    ScoreVector out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s : sample) {
            best = std::min(best, detail::squared_distance(X.row(i), X.row(s)));
        }
        out[i] = std::sqrt(best);
    }
    return out;
}

inline ScoreVector ksp_scores(const DataMatrix &X, std::size_t sample_size, Engine &engine) {
    X.validate();
    if (sample_size < 1) {
        throw ConfigError("ksp sample size must be >= 1");
    }
    return distance_to_sample(X, draw_sample(X.rows(), sample_size, engine));
}

inline ScoreVector ksp_scores(const DataMatrix &X, std::size_t sample_size, RngSeed seed) {
    auto engine = make_engine(seed);
    return ksp_scores(X, sample_size, engine);
}

/// KSP, then resample the reference set from the ceil(alpha n) lowest-scoring rows.
inline ScoreVector ksp2_scores(const DataMatrix &X, std::size_t sample_size, double alpha, RngSeed seed) {
    X.validate();
    const std::size_t keep = filter_size(alpha, X.rows());
    auto engine = make_engine(seed);
    const ScoreVector stage1 = ksp_scores(X, sample_size, engine);
    const auto retained = lowest_indices(stage1, keep);
    auto picks = draw_sample(retained.size(), sample_size, engine);
    for (auto &p : picks) {
        p = retained[p];
    }
    return distance_to_sample(X, picks);
}

}  // namespace kic
