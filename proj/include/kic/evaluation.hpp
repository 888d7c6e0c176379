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

#include "kic/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace kic {

struct LabeledScores {
    std::vector<double> scores;
    std::vector<int> labels;  ///< 1 = outlier
};

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;

    friend bool operator==(const PRPoint &, const PRPoint &) = default;
};

struct PRCurve {
    std::vector<PRPoint> points;  ///< one point per distinct threshold, recall nondecreasing
    double auprc = 0.0;
};

/// Right Riemann sum over recall, starting from recall 0.
inline double auprc(const PRCurve &curve) noexcept {
    double area = 0.0;
    double prev = 0.0;
    for (const auto &pt : curve.points) {
        area += (pt.recall - prev) * pt.precision;
        prev = pt.recall;
    }
    return area;
}

/**
 * Precision and recall of the classifiers 1{score >= delta} for every distinct
 * score delta, visited from the largest threshold down. Samples sharing a
 * score cross the threshold together.
 */
inline PRCurve pr_curve(const LabeledScores &ls) {
    const std::size_t n = ls.scores.size();
    if (ls.labels.size() != n) {
        throw ConfigError("scores and labels differ in length");
    }
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ls.labels[i] != 0 && ls.labels[i] != 1) {
            throw ConfigError("labels must be 0 or 1");
        }
        if (!std::isfinite(ls.scores[i])) {
            throw ConfigError("scores must be finite");
        }
        positives += static_cast<std::size_t>(ls.labels[i]);
    }
    if (positives == 0 || positives == n) {
        throw ConfigError("degenerate labels: need at least one outlier and one inlier");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ls.scores[a] > ls.scores[b]; });

    PRCurve curve;
    std::size_t tp = 0;
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < n;) {
        const double threshold = ls.scores[order[i]];
        while (i < n && ls.scores[order[i]] == threshold) {
            tp += static_cast<std::size_t>(ls.labels[order[i]]);
            ++predicted;
            ++i;
        }
        curve.points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                                static_cast<double>(tp) / static_cast<double>(predicted)});
    }
    curve.auprc = auprc(curve);
    return curve;
}

/// Mean and population standard deviation of per-trial values.
struct TrialStats {
    double mean = 0.0;
    double stddev = 0.0;
    int trials = 0;
};

inline TrialStats trial_stats(const std::vector<double> &values) {
    if (values.empty()) {
        throw ConfigError("trial_stats needs at least one value");
    }
    TrialStats st;
    st.trials = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    st.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - st.mean) * (v - st.mean);
    }
    st.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    return st;
}

struct MethodSummary {
    std::optional<double> average;
    std::optional<double> average_rank;
    std::optional<double> rmsd;
    std::size_t datasets_used = 0;
};

/**
 * AUPRC per (dataset, method). A missing cell marks a method that could not
 * run on that dataset; it is left out of that method's aggregates and of the
 * dataset's ranking.
 */
struct BenchmarkTable {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::vector<std::optional<TrialStats>>> cells;  ///< [dataset][method]
    std::vector<std::vector<std::optional<double>>> ranks;      ///< [dataset][method], 1 = best
    std::vector<MethodSummary> summary;                         ///< [method]
};

/// Ranks 1 = highest value; tied values share the mean of the ranks they occupy.
inline std::vector<double> fractional_ranks_descending(const std::vector<double> &values) {
    const std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(m);
    for (std::size_t i = 0; i < m;) {
        std::size_t j = i;
        while (j < m && values[order[j]] == values[order[i]]) {
            ++j;
        }
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            ranks[order[t]] = shared;
        }
        i = j;
    }
    return ranks;
}

inline BenchmarkTable summarize(std::vector<std::string> datasets, std::vector<std::string> methods,
                                std::vector<std::vector<std::optional<TrialStats>>> cells) {
    if (datasets.empty() || methods.empty()) {
        throw ConfigError("summarize needs at least one dataset and one method");
    }
    if (cells.size() != datasets.size()) {
        throw ConfigError("summarize: cell rows do not match the dataset list");
    }
    for (const auto &row : cells) {
        if (row.size() != methods.size()) {
            throw ConfigError("summarize: cell columns do not match the method list");
        }
    }
    const std::size_t D = datasets.size();
    const std::size_t M = methods.size();

    BenchmarkTable table;
    table.ranks.assign(D, std::vector<std::optional<double>>(M));
    std::vector<double> sum(M, 0.0), rank_sum(M, 0.0), sq_gap(M, 0.0);
    std::vector<std::size_t> used(M, 0);

    for (std::size_t d = 0; d < D; ++d) {
        std::vector<double> vals;
        std::vector<std::size_t> who;
        for (std::size_t m = 0; m < M; ++m) {
            if (cells[d][m]) {
                vals.push_back(cells[d][m]->mean);
                who.push_back(m);
            }
        }
        if (vals.empty()) {
            continue;
        }
        const double best = *std::max_element(vals.begin(), vals.end());
        const auto r = fractional_ranks_descending(vals);
        for (std::size_t t = 0; t < who.size(); ++t) {
            const std::size_t m = who[t];
            table.ranks[d][m] = r[t];
            sum[m] += vals[t];
            rank_sum[m] += r[t];
            sq_gap[m] += (best - vals[t]) * (best - vals[t]);
            ++used[m];
        }
    }
    table.summary.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        auto &s = table.summary[m];
        s.datasets_used = used[m];
        if (used[m] > 0) {
            const auto cnt = static_cast<double>(used[m]);
            s.average = sum[m] / cnt;
            s.average_rank = rank_sum[m] / cnt;
            s.rmsd = std::sqrt(sq_gap[m] / cnt);
        }
    }
    table.datasets = std::move(datasets);
    table.methods = std::move(methods);
    table.cells = std::move(cells);
    return table;
}

}  // namespace kic
