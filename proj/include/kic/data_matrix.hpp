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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Sample-major storage: each row is one sample, contiguous in memory.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Outlierness per sample; larger means more outlying.
using ScoreVector = std::vector<double>;

/**
 * n samples by p features. `labels` holds the binary outlier annotation
 * (1 = outlier) when known; `raw_labels` keeps the untranslated label
 * column so class-based labeling rules can be applied after loading.
 */
struct DataMatrix {
    RowMatrix values;
    std::optional<std::vector<int>> labels;
    std::optional<std::vector<std::string>> raw_labels;
    std::vector<std::string> feature_names;
    std::string provenance;

    DataMatrix() = default;
    explicit DataMatrix(RowMatrix v, std::string source = {}) : values(std::move(v)), provenance(std::move(source)) {}

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {values.data() + i * cols(), cols()};
    }

    /// Throws ConfigError when the shape, finiteness or label invariants are violated.
    void validate() const {
        if (values.rows() < 1 || values.cols() < 1) {
            throw ConfigError("data matrix must have at least one row and one column");
        }
        if (!values.allFinite()) {
            throw ConfigError("data matrix contains non-finite values");
        }
        if (labels) {
            if (labels->size() != rows()) {
                throw ConfigError("label vector length does not match the number of rows");
            }
            for (int l : *labels) {
                if (l != 0 && l != 1) {
                    throw ConfigError("labels must be 0 or 1");
                }
            }
        }
    }

    /// Keeps the rows with mask[i] set, carrying labels along.
    [[nodiscard]] DataMatrix select_rows(const std::vector<bool> &mask) const {
        if (mask.size() != rows()) {
            throw ConfigError("row mask length does not match the number of rows");
        }
        std::vector<Eigen::Index> keep;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) {
                keep.push_back(static_cast<Eigen::Index>(i));
            }
        }
        DataMatrix out;
        out.values = values(keep, Eigen::all);
        out.feature_names = feature_names;
        out.provenance = provenance;
        auto pick = [&](const auto &src) {
            std::decay_t<decltype(src)> dst;
            dst.reserve(keep.size());
            for (auto k : keep) {
                dst.push_back(src[static_cast<std::size_t>(k)]);
            }
            return dst;
        };
        if (labels) {
            out.labels = pick(*labels);
        }
        if (raw_labels) {
            out.raw_labels = pick(*raw_labels);
        }
        return out;
    }
};

/// Wraps an n x p row-major matrix without labels.
inline DataMatrix make_data(RowMatrix values) { return DataMatrix(std::move(values)); }

/// Convenience for tests and small fixtures: rows given as nested initializer lists.
inline DataMatrix make_data(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = n > 0 ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
    RowMatrix m(n, p);
    Eigen::Index i = 0;
    for (const auto &r : rows) {
        if (static_cast<Eigen::Index>(r.size()) != p) {
            throw ConfigError("ragged rows in data literal");
        }
        Eigen::Index j = 0;
        for (double v : r) {
            m(i, j++) = v;
        }
        ++i;
    }
    return DataMatrix(std::move(m));
}

inline std::span<const double> as_span(const Vector &v) noexcept {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline std::span<const double> as_span(const std::vector<double> &v) noexcept { return {v.data(), v.size()}; }

}  // namespace kic
