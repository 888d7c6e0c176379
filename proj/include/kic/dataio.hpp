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

#include "kic/baselines.hpp"
#include "kic/data_matrix.hpp"
#include "kic/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kic {

// ---------------------------------------------------------------------------
// Formatting and metadata
// ---------------------------------------------------------------------------

/// Shortest-safe round-trip representation (17 significant digits).
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Ordered key/value pairs written as a '#'-prefixed header block.
using Metadata = std::vector<std::pair<std::string, std::string>>;

inline void write_metadata(std::ostream &os, const Metadata &md) {
    for (const auto &[k, v] : md) {
        os << "# " << k << ": " << v << '\n';
    }
}

/// Parses "# key: value" lines; other lines are ignored.
inline Metadata read_metadata(std::istream &is) {
    Metadata md;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) != 0) {
            continue;
        }
        const auto colon = line.find(": ", 2);
        if (colon == std::string::npos) {
            continue;
        }
        md.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
    }
    return md;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct CsvOptions {
    /// Column holding outlier labels or class names: a header name or a zero-based index.
    std::optional<std::string> label_column;
    char delimiter = ',';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

// Splits one record; double-quoted fields may contain the delimiter and "" escapes.
inline std::vector<std::string> split_record(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.emplace_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.emplace_back(trim(field));
    return out;
}

inline std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

}  // namespace detail

/**
 * Reads a delimited numeric table. Lines starting with '#' and blank lines are
 * skipped. The first record is a header when any of its feature cells fails to
 * parse as a number. Errors name the 1-based file line as the row.
 */
inline DataMatrix read_csv(std::istream &in, const CsvOptions &opts = {}, const std::string &source = "<stream>") {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        records.emplace_back(lineno, detail::split_record(line, opts.delimiter));
    }
    if (records.empty()) {
        throw IoError(source + ": no data rows");
    }

    const std::size_t width = records.front().second.size();
    std::optional<std::size_t> label_idx;
    bool label_by_name = false;
    if (opts.label_column) {
        if (auto idx = detail::parse_index(*opts.label_column)) {
            label_idx = *idx;
        } else {
            label_by_name = true;
        }
    }

    bool has_header = label_by_name;
    if (!has_header) {
        for (std::size_t c = 0; c < width; ++c) {
            if (label_idx && c == *label_idx) {
                continue;
            }
            if (!detail::parse_real(records.front().second[c])) {
                has_header = true;
                break;
            }
        }
    }

    std::vector<std::string> header;
    if (has_header) {
        header = records.front().second;
        records.erase(records.begin());
    }
    if (label_by_name) {
        const auto it = std::find(header.begin(), header.end(), *opts.label_column);
        if (it == header.end()) {
            // A name that is also a valid header-less index was handled above.
            throw IoError(source + ": label column '" + *opts.label_column + "' not found in header");
        }
        label_idx = static_cast<std::size_t>(it - header.begin());
    } else if (label_idx && has_header && *label_idx < header.size()) {
        // An all-digit name that matches a header entry wins over the index reading.
        const auto it = std::find(header.begin(), header.end(), *opts.label_column);
        if (it != header.end()) {
            label_idx = static_cast<std::size_t>(it - header.begin());
        }
    }
    if (label_idx && *label_idx >= width) {
        throw IoError(source + ": label column index " + std::to_string(*label_idx) + " out of range (" +
                      std::to_string(width) + " columns)");
    }
    if (records.empty()) {
        throw IoError(source + ": no data rows after header");
    }

    const std::size_t p = width - (label_idx ? 1 : 0);
    if (p == 0) {
        throw IoError(source + ": no feature columns");
    }
    RowMatrix values(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(p));
    std::vector<std::string> raw;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto &[ln, cells] = records[r];
        if (cells.size() != width) {
            throw IoError(source + ": row " + std::to_string(ln) + " has " + std::to_string(cells.size()) +
                          " fields, expected " + std::to_string(width));
        }
        std::size_t j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (label_idx && c == *label_idx) {
                raw.push_back(cells[c]);
                continue;
            }
            const auto v = detail::parse_real(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw IoError(source + ": row " + std::to_string(ln) + ", column " + std::to_string(c + 1) +
                              ": non-numeric or non-finite value '" + cells[c] + "'");
            }
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j++)) = *v;
        }
    }

    DataMatrix out(std::move(values), source);
    for (std::size_t c = 0; c < width; ++c) {
        if (label_idx && c == *label_idx) {
            continue;
        }
        out.feature_names.push_back(has_header ? header[c] : "f" + std::to_string(out.feature_names.size()));
    }
    if (label_idx) {
        std::vector<int> binary;
        binary.reserve(raw.size());
        for (const auto &s : raw) {
            const auto v = detail::parse_real(s);
            if (!v || (*v != 0.0 && *v != 1.0)) {
                break;
            }
            binary.push_back(*v == 1.0 ? 1 : 0);
        }
        if (binary.size() == raw.size()) {
            out.labels = std::move(binary);
        }
        out.raw_labels = std::move(raw);
    }
    return out;
}

inline DataMatrix load_csv(const std::string &path, const CsvOptions &opts = {}) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_csv(in, opts, path);
}

/// Feature columns (plus an `outlier` column when labels exist) at 17 significant digits.
inline void write_data_csv(std::ostream &os, const DataMatrix &X, const Metadata &md = {}) {
    write_metadata(os, md);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        os << (j ? "," : "") << (j < X.feature_names.size() ? X.feature_names[j] : "f" + std::to_string(j));
    }
    if (X.labels) {
        os << ",outlier";
    }
    os << '\n';
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto r = X.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            os << (j ? "," : "") << format_real(r[j]);
        }
        if (X.labels) {
            os << ',' << (*X.labels)[i];
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

inline constexpr const char *normalization_convention = "zscore-population (divide by n; constant features -> 0)";

/// Per-feature z-score with the population standard deviation. Constant features become 0.
inline DataMatrix normalize(const DataMatrix &X) {
    X.validate();
    const std::size_t n = X.rows();
    if (n < 2) {
        throw ConfigError("normalize requires at least 2 rows");
    }
    DataMatrix out = X;
    for (Eigen::Index j = 0; j < X.values.cols(); ++j) {
        auto col = out.values.col(j);
        const double mean = col.sum() / static_cast<double>(n);
        col.array() -= mean;
        const double var = col.squaredNorm() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        const double scale = std::max(1.0, X.values.col(j).cwiseAbs().maxCoeff());
        if (sd <= 1e-14 * scale) {
            col.setZero();
        } else {
            col /= sd;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Class-based outlier labeling
// ---------------------------------------------------------------------------

struct SmallestClassOutlier {};
struct LargestClassInlier {};
struct ExplicitClasses {
    std::set<std::string> inliers;
    std::set<std::string> outliers;
};
using LabelRule = std::variant<SmallestClassOutlier, LargestClassInlier, ExplicitClasses>;

struct ClassLabeling {
    std::vector<int> labels;  ///< 1 = outlier; meaningless where mask is false
    std::vector<bool> mask;   ///< rows that belong to the prepared dataset
};

inline ClassLabeling label_by_class(const std::vector<std::string> &classes, const LabelRule &rule) {
    std::map<std::string, std::size_t> counts;
    for (const auto &c : classes) {
        ++counts[c];
    }
    if (counts.size() < 2) {
        throw ConfigError("class labeling needs at least 2 distinct classes");
    }
    ClassLabeling out;
    out.labels.assign(classes.size(), 0);
    out.mask.assign(classes.size(), true);

    auto extreme_class = [&](bool smallest) {
        std::size_t target = smallest ? classes.size() + 1 : 0;
        for (const auto &[c, k] : counts) {
            target = smallest ? std::min(target, k) : std::max(target, k);
        }
        std::vector<std::string> hits;
        for (const auto &[c, k] : counts) {
            if (k == target) {
                hits.push_back(c);
            }
        }
        if (hits.size() > 1) {
            throw ConfigError(std::string("tie for the ") + (smallest ? "smallest" : "largest") +
                              " class; specify the classes explicitly");
        }
        return hits.front();
    };

    if (std::holds_alternative<SmallestClassOutlier>(rule)) {
        const auto cls = extreme_class(true);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            out.labels[i] = classes[i] == cls ? 1 : 0;
        }
    } else if (std::holds_alternative<LargestClassInlier>(rule)) {
        const auto cls = extreme_class(false);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            out.labels[i] = classes[i] == cls ? 0 : 1;
        }
    } else {
        const auto &ex = std::get<ExplicitClasses>(rule);
        if (ex.inliers.empty() || ex.outliers.empty()) {
            throw ConfigError("explicit class rule needs at least one inlier and one outlier class");
        }
        for (const auto &c : ex.inliers) {
            if (ex.outliers.count(c)) {
                throw ConfigError("class '" + c + "' listed as both inlier and outlier");
            }
        }
        for (const auto *set : {&ex.inliers, &ex.outliers}) {
            for (const auto &c : *set) {
                if (!counts.count(c)) {
                    throw ConfigError("class '" + c + "' not present in the label column");
                }
            }
        }
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (ex.outliers.count(classes[i])) {
                out.labels[i] = 1;
            } else if (!ex.inliers.count(classes[i])) {
                out.mask[i] = false;
            }
        }
    }
    return out;
}

/// "smallest", "largest", or "explicit:IN1,IN2;OUT1,OUT2".
inline LabelRule parse_label_rule(const std::string &text) {
    if (text == "smallest") {
        return SmallestClassOutlier{};
    }
    if (text == "largest") {
        return LargestClassInlier{};
    }
    if (text.rfind("explicit:", 0) == 0) {
        const std::string body = text.substr(9);
        const auto semi = body.find(';');
        if (semi == std::string::npos) {
            throw ConfigError("explicit label rule must look like explicit:3,9;5");
        }
        auto split = [](const std::string &s) {
            std::set<std::string> out;
            for (auto &f : detail::split_record(s, ',')) {
                if (!f.empty()) {
                    out.insert(f);
                }
            }
            return out;
        };
        return ExplicitClasses{split(body.substr(0, semi)), split(body.substr(semi + 1))};
    }
    throw ConfigError("unknown label rule '" + text + "' (expected smallest, largest or explicit:IN;OUT)");
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian benchmark
// ---------------------------------------------------------------------------

/// Standard-normal draws are not valid variances; this picks the repair.
enum class VarianceRepair { Abs, Square };

struct SynthGaussianConfig {
    int num_clusters = 5;
    int samples_per_cluster = 194;
    int num_outliers = 30;
    int dimension = 1000;
    RngSeed seed{};
    VarianceRepair repair = VarianceRepair::Abs;
};

/**
 * Inliers from num_clusters Gaussians with means ~ N(0, I) and diagonal
 * variances repaired from N(0, 1) draws; outliers uniform per coordinate
 * between the inlier minimum and maximum. Rows are the clusters in order,
 * then the outliers (label 1).
 */
inline DataMatrix synth_gaussian(const SynthGaussianConfig &cfg) {
    if (cfg.num_clusters < 1 || cfg.samples_per_cluster < 1 || cfg.num_outliers < 0 || cfg.dimension < 1) {
        throw ConfigError("synthetic Gaussian config needs clusters, samples and dimension >= 1 and outliers >= 0");
    }
    const auto p = static_cast<Eigen::Index>(cfg.dimension);
    const auto inliers = static_cast<Eigen::Index>(cfg.num_clusters) * cfg.samples_per_cluster;
    const auto n = inliers + cfg.num_outliers;

    auto engine = make_engine(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix values(n, p);
    Eigen::Index row = 0;
    for (int c = 0; c < cfg.num_clusters; ++c) {
        Vector mean(p), sd(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            mean(j) = normal(engine);
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            const double draw = normal(engine);
            const double var = cfg.repair == VarianceRepair::Abs ? std::abs(draw) : draw * draw;
            sd(j) = std::sqrt(var);
        }
        for (int s = 0; s < cfg.samples_per_cluster; ++s, ++row) {
            for (Eigen::Index j = 0; j < p; ++j) {
                values(row, j) = mean(j) + sd(j) * normal(engine);
            }
        }
    }
    const Vector lo = values.topRows(inliers).colwise().minCoeff().transpose();
    const Vector hi = values.topRows(inliers).colwise().maxCoeff().transpose();
    for (int o = 0; o < cfg.num_outliers; ++o, ++row) {
        for (Eigen::Index j = 0; j < p; ++j) {
            std::uniform_real_distribution<double> uni(lo(j), hi(j));
            values(row, j) = lo(j) == hi(j) ? lo(j) : std::min(uni(engine), hi(j));
        }
    }

    DataMatrix out(std::move(values), "synthetic-gaussian");
    out.labels = std::vector<int>(static_cast<std::size_t>(n), 0);
    std::fill(out.labels->begin() + inliers, out.labels->end(), 1);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.feature_names.push_back("f" + std::to_string(j));
    }
    return out;
}

}  // namespace kic
