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
#include "kic/feature_map.hpp"
#include "kic/kernels.hpp"
#include "kic/linalg.hpp"
#include "kic/selection.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kic {

// ---------------------------------------------------------------------------
// Non-kernelized inverse Christoffel function
// ---------------------------------------------------------------------------

/// q(x) = v(x)' M^{-1} v(x) with M = (1/n) sum_i v(x_i) v(x_i)'.
inline ScoreVector ic_scores(const FeatureMap &fm, const DataMatrix &X, const DataMatrix &queries) {
    X.validate();
    queries.validate();
    if (X.cols() != fm.input_dimension() || queries.cols() != fm.input_dimension()) {
        throw ConfigError("ic_scores: data dimension does not match the feature map");
    }
    const Matrix V = feature_columns(fm, X);
    const auto s = V.rows();
    Matrix M = Matrix::Zero(s, s);
    M.selfadjointView<Eigen::Lower>().rankUpdate(V, 1.0 / static_cast<double>(X.rows()));
    M = M.selfadjointView<Eigen::Lower>();

    std::optional<SpdFactorization> factor;
    try {
        factor.emplace(spd_factor(M, JitterPolicy::Strict));
    } catch (const NumericalError &) {
        throw NumericalError("moment matrix not positive definite; data may lie on a degree-" +
                             std::to_string(fm.degree()) + " variety");
    }
    const Matrix W = factor->whiten(feature_columns(fm, queries));
    ScoreVector out(queries.rows());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = W.col(static_cast<Eigen::Index>(j)).squaredNorm();
    }
    return out;
}

inline ScoreVector ic_scores(const DataMatrix &X, const DataMatrix &queries, int d,
                             std::size_t feature_dim_limit = default_feature_dim_limit) {
    return ic_scores(build_feature_map(X.cols(), d, feature_dim_limit), X, queries);
}

// ---------------------------------------------------------------------------
// Default hyperparameters
// ---------------------------------------------------------------------------

inline constexpr double default_C = 500.0;
inline constexpr double default_kic2_alpha = 0.6;

/// rho = |G_scaled|_F / (C sqrt(n)), G_scaled = V'V being the 1/n-scaled Gram.
inline double default_rho(const Matrix &gram_scaled, double C) {
    if (!(C > 0.0)) {
        throw ConfigError("C must be positive");
    }
    const double norm = frobenius_norm(gram_scaled);
    if (norm == 0.0) {
        throw NumericalError("degenerate Gram: zero Frobenius norm");
    }
    return norm / (C * std::sqrt(static_cast<double>(gram_scaled.rows())));
}

enum class SigmaVariant { KIC, KIC2 };

inline double default_sigma(std::size_t p, SigmaVariant variant) {
    if (p < 1) {
        throw ConfigError("default_sigma requires p >= 1");
    }
    const double root = std::sqrt(static_cast<double>(p));
    return variant == SigmaVariant::KIC ? root / 2.0 : root / 4.0;
}

// ---------------------------------------------------------------------------
// Kernelized inverse Christoffel function
// ---------------------------------------------------------------------------

/**
 * Fitted kernelized scorer. Holds the training rows and the Cholesky factor of
 * rho I + G/n; a query's score is gamma - g'(rho I + G/n)^{-1} g with
 * g = k(X, x) / sqrt(n) and gamma = k(x, x).
 */
class ChristoffelModel {
  public:
    ChristoffelModel(KernelSpec kernel, double rho, DataMatrix training, SpdFactorization factor)
        : kernel_(kernel), rho_(rho), training_(std::move(training)), factor_(std::move(factor)) {}

    [[nodiscard]] const KernelSpec &kernel() const noexcept { return kernel_; }
    [[nodiscard]] double rho() const noexcept { return rho_; }
    [[nodiscard]] const DataMatrix &training_data() const noexcept { return training_; }
    [[nodiscard]] const SpdFactorization &factorization() const noexcept { return factor_; }
    [[nodiscard]] std::size_t size() const noexcept { return training_.rows(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return training_.cols(); }

  private:
    KernelSpec kernel_;
    double rho_;
    DataMatrix training_;
    SpdFactorization factor_;
};

namespace detail {

inline ChristoffelModel fit_from_raw_gram(const DataMatrix &X, const KernelSpec &kernel, const Matrix &raw_gram,
                                          double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw ConfigError("rho must be positive and finite");
    }
    Matrix A = raw_gram / static_cast<double>(X.rows());
    A.diagonal().array() += rho;
    return {kernel, rho, X, spd_factor(A)};
}

// Scores the training rows themselves; column j of raw_gram is k(X, x_j).
inline ScoreVector score_training_rows(const ChristoffelModel &model, const Matrix &raw_gram) {
    const Matrix cross = raw_gram / std::sqrt(static_cast<double>(model.size()));
    const Matrix W = model.factorization().whiten(cross);
    ScoreVector out(model.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        out[j] = clamp_objective(raw_gram(jj, jj) - W.col(jj).squaredNorm(), raw_gram(jj, jj));
    }
    return out;
}

}  // namespace detail

inline ChristoffelModel fit_kic(const DataMatrix &X, const KernelSpec &kernel, double rho) {
    return detail::fit_from_raw_gram(X, kernel, gram_matrix(kernel, X), rho);
}

/// Fits with rho from default_rho(G / n, C).
inline ChristoffelModel fit_kic_default_rho(const DataMatrix &X, const KernelSpec &kernel, double C = default_C) {
    const Matrix G = gram_matrix(kernel, X);
    const double rho = default_rho(G / static_cast<double>(X.rows()), C);
    return detail::fit_from_raw_gram(X, kernel, G, rho);
}

inline double kic_score(const ChristoffelModel &model, std::span<const double> x) {
    auto [g, gamma] = cross_vector(model.kernel(), model.training_data(), x);
    g /= std::sqrt(static_cast<double>(model.size()));
    const Vector w = model.factorization().whiten(g);
    return clamp_objective(gamma - w.squaredNorm(), gamma);
}

inline ScoreVector kic_scores(const ChristoffelModel &model, const DataMatrix &queries) {
    ScoreVector out(queries.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = kic_score(model, queries.row(i));
    }
    return out;
}

/// Fits on X and scores every row of X with a single factorization.
inline ScoreVector kic_scores_all(const DataMatrix &X, const KernelSpec &kernel, double rho) {
    const Matrix G = gram_matrix(kernel, X);
    const auto model = detail::fit_from_raw_gram(X, kernel, G, rho);
    return detail::score_training_rows(model, G);
}

struct KicFit {
    ChristoffelModel model;
    ScoreVector scores;  ///< scores of the training rows
};

/// Fit with the C-rule (or an explicit rho) and score the training rows.
inline KicFit fit_and_score_kic(const DataMatrix &X, const KernelSpec &kernel, double C,
                                std::optional<double> rho_override = std::nullopt) {
    const Matrix G = gram_matrix(kernel, X);
    const double rho = rho_override ? *rho_override : default_rho(G / static_cast<double>(X.rows()), C);
    auto model = detail::fit_from_raw_gram(X, kernel, G, rho);
    auto scores = detail::score_training_rows(model, G);
    return {std::move(model), std::move(scores)};
}

struct Kic2Options {
    double C = default_C;
    double alpha = default_kic2_alpha;
    /// Used for both stages in place of the C-rule when set.
    std::optional<double> rho;
};

struct Kic2Result {
    ChristoffelModel model;                ///< stage-2 model, trained on the retained rows
    ScoreVector scores;                    ///< stage-2 scores of every original row
    std::vector<std::size_t> retained;     ///< indices of the rows kept by the filter
    double stage1_rho = 0.0;
};

/**
 * Two-stage scorer: fit on all rows, keep the ceil(alpha n) lowest-scoring
 * rows (ties by index), refit on them with rho recomputed from their Gram,
 * and score every original row with the refitted model.
 */
inline Kic2Result fit_kic2(const DataMatrix &X, const KernelSpec &kernel, const Kic2Options &opts = {}) {
    const std::size_t keep = filter_size(opts.alpha, X.rows());
    auto stage1 = fit_and_score_kic(X, kernel, opts.C, opts.rho);
    auto retained = lowest_indices(stage1.scores, keep);

    std::vector<bool> mask(X.rows(), false);
    for (auto i : retained) {
        mask[i] = true;
    }
    DataMatrix filtered = X.select_rows(mask);
    filtered.labels.reset();
    filtered.raw_labels.reset();

    const Matrix G2 = gram_matrix(kernel, filtered);
    const double rho2 = opts.rho ? *opts.rho : default_rho(G2 / static_cast<double>(filtered.rows()), opts.C);
    auto model = detail::fit_from_raw_gram(filtered, kernel, G2, rho2);

    // Retained rows reuse their Gram columns; the rest go through cross_vector.
    ScoreVector scores(X.rows());
    const ScoreVector inner = detail::score_training_rows(model, G2);
    std::size_t next = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (mask[i]) {
            scores[i] = inner[next++];
        } else {
            scores[i] = kic_score(model, X.row(i));
        }
    }
    return {std::move(model), std::move(scores), std::move(retained), stage1.model.rho()};
}

inline ScoreVector kic2_scores(const DataMatrix &X, const KernelSpec &kernel, double C = default_C,
                               double alpha = default_kic2_alpha) {
    return fit_kic2(X, kernel, Kic2Options{C, alpha, std::nullopt}).scores;
}

// ---------------------------------------------------------------------------
// Score fields on a 2-D grid
// ---------------------------------------------------------------------------

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int steps = 2;

    [[nodiscard]] double at(int k) const noexcept {
        return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
};

/// Grid points in row-major order: y index outer, x index inner.
inline DataMatrix grid_points(const GridAxis &x, const GridAxis &y) {
    if (x.steps < 2 || y.steps < 2) {
        throw ConfigError("grid axes need at least 2 steps");
    }
    if (!std::isfinite(x.lo) || !std::isfinite(x.hi) || !std::isfinite(y.lo) || !std::isfinite(y.hi)) {
        throw ConfigError("grid bounds must be finite");
    }
    RowMatrix pts(static_cast<Eigen::Index>(x.steps) * y.steps, 2);
    Eigen::Index r = 0;
    for (int i = 0; i < y.steps; ++i) {
        for (int j = 0; j < x.steps; ++j) {
            pts(r, 0) = x.at(j);
            pts(r, 1) = y.at(i);
            ++r;
        }
    }
    return DataMatrix(std::move(pts), "grid");
}

/// Entry (i, j) is the score at (x.at(j), y.at(i)).
inline Matrix grid_scores(const ChristoffelModel &model, const GridAxis &x, const GridAxis &y) {
    if (model.dimension() != 2) {
        throw ConfigError("grid scores require a model trained on 2-feature data, got p = " +
                          std::to_string(model.dimension()));
    }
    const DataMatrix pts = grid_points(x, y);
    Matrix out(y.steps, x.steps);
    for (std::size_t r = 0; r < pts.rows(); ++r) {
        out(static_cast<Eigen::Index>(r) / x.steps, static_cast<Eigen::Index>(r) % x.steps) =
            kic_score(model, pts.row(r));
    }
    return out;
}

}  // namespace kic
