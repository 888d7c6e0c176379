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

#include "kic/christoffel.hpp"
#include "kic/feature_map.hpp"
#include "kic/linalg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace kic {
namespace {

using testing::Rng;

// Random instance with an invertible moment matrix: n comfortably above s.
struct IcInstance {
    DataMatrix X;
    int degree;
};

IcInstance random_ic_instance(Rng &rng) {
    const auto p = static_cast<std::size_t>(testing::uniform_int(rng, 1, 3));
    const int d = testing::uniform_int(rng, 1, 2);
    const auto s = feature_dimension(p, d);
    const auto n = s + 5 + static_cast<std::size_t>(testing::uniform_int(rng, 0, 3 * static_cast<int>(s)));
    return {testing::gaussian_data(rng, n, p), d};
}

TEST(IcScores, SymmetricTwoPointSet) {
    const auto X = make_data({{-1}, {1}});
    const auto Q = make_data({{0}, {3}, {-3}, {0.5}});
    const auto q = ic_scores(X, Q, 1);
    EXPECT_NEAR(q[0], 1.0, 1e-14);
    EXPECT_NEAR(q[1], 10.0, 1e-12);
    EXPECT_NEAR(q[2], 10.0, 1e-12);
    EXPECT_NEAR(q[3], 1.25, 1e-14);
}

TEST(IcScores, MonotoneInDistanceForSymmetricSet) {
    const auto X = make_data({{-1}, {1}});
    RowMatrix grid(41, 1);
    for (int i = 0; i <= 40; ++i) {
        grid(i, 0) = 0.1 * i;
    }
    const auto q = ic_scores(X, DataMatrix(grid), 1);
    for (std::size_t i = 0; i < q.size(); ++i) {
        EXPECT_NEAR(q[i], 1.0 + grid(static_cast<Eigen::Index>(i), 0) * grid(static_cast<Eigen::Index>(i), 0), 1e-12);
        if (i > 0) {
            EXPECT_GT(q[i], q[i - 1]);
        }
    }
}

TEST(IcScores, SingularMomentMatrixIsReported) {
    // v(0) = (1, 0) only: M = diag(1, 0).
    const auto X = make_data({{0}});
    try {
        (void)ic_scores(X, X, 1);
        FAIL() << "expected failure";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("not positive definite"), std::string::npos);
    }
    // Points on a circle satisfy x^2 + y^2 - 1 = 0, a degree-2 variety.
    RowMatrix circle(20, 2);
    for (int i = 0; i < 20; ++i) {
        circle(i, 0) = std::cos(0.3 * i);
        circle(i, 1) = std::sin(0.3 * i);
    }
    EXPECT_THROW(ic_scores(DataMatrix(circle), DataMatrix(circle), 2), NumericalError);
}

TEST(IcScores, FeatureDimensionLimit) {
    Rng rng(81);
    const auto X = testing::gaussian_data(rng, 5, 784);
    try {
        (void)ic_scores(X, X, 2);
        FAIL() << "expected failure";
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("feature dimension too large"), std::string::npos);
    }
}

TEST(IcScores, InvariantToMonomialOrder) {
    Rng rng(82);
    for (int t = 0; t < 100; ++t) {
        const auto inst = random_ic_instance(rng);
        const auto fm = build_feature_map(inst.X.cols(), inst.degree);
        std::vector<std::size_t> perm(fm.dimension());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto Q = testing::gaussian_data(rng, 5, inst.X.cols());
        const auto a = ic_scores(fm, inst.X, Q);
        const auto b = ic_scores(fm.permuted(perm), inst.X, Q);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_LE(testing::rel_diff(a[i], b[i]), 1e-10);
        }
    }
}

TEST(DefaultRho, WorkedExamples) {
    EXPECT_DOUBLE_EQ(default_rho(Matrix::Identity(4, 4), 500.0), 0.002);
    Rng rng(83);
    const auto X = testing::gaussian_data(rng, 10, 3);
    const Matrix G = gram_matrix(KernelSpec::polynomial(2), X) / 10.0;
    EXPECT_DOUBLE_EQ(default_rho(G, 1000.0), default_rho(G, 500.0) / 2.0);
    const double norm = frobenius_norm(G);
    EXPECT_EQ(default_rho(G, 500.0), norm / (500.0 * std::sqrt(10.0)));
    EXPECT_THROW(default_rho(Matrix::Zero(3, 3), 500.0), NumericalError);
    EXPECT_THROW(default_rho(G, 0.0), ConfigError);
}

TEST(DefaultSigma, WorkedExamples) {
    EXPECT_EQ(default_sigma(4, SigmaVariant::KIC), 1.0);
    EXPECT_EQ(default_sigma(4, SigmaVariant::KIC2), 0.5);
    EXPECT_EQ(default_sigma(1, SigmaVariant::KIC), 0.5);
    EXPECT_THROW(default_sigma(0, SigmaVariant::KIC), ConfigError);
}

TEST(FitKic, WorkedExamples) {
    const auto one = make_data({{0}});
    const auto m = fit_kic(one, KernelSpec::polynomial(1), 1.0);
    EXPECT_DOUBLE_EQ(m.factorization().lower_triangular_factor()(0, 0), std::sqrt(2.0));
    EXPECT_EQ(m.rho(), 1.0);
    EXPECT_EQ(m.size(), 1u);

    Rng rng(84);
    const auto X = testing::gaussian_data(rng, 8, 3);
    const double rho = 0.05;
    const auto rbf = fit_kic(X, KernelSpec::rbf(1.0), rho);
    const Matrix A = rbf.factorization().reconstruct();
    for (Eigen::Index i = 0; i < 8; ++i) {
        EXPECT_NEAR(A(i, i) - rho, 1.0 / 8.0, 1e-14);
    }
    const auto poly = fit_kic(X, KernelSpec::polynomial(2), rho);
    Matrix expected = gram_matrix(KernelSpec::polynomial(2), X) / 8.0;
    expected.diagonal().array() += rho;
    EXPECT_LE((poly.factorization().reconstruct() - expected).norm() / expected.norm(), 1e-10);
    EXPECT_THROW(fit_kic(X, KernelSpec::rbf(1.0), 0.0), ConfigError);
}

TEST(KicScore, LargeRhoTendsToSelfKernel) {
    const auto X = make_data({{0, 1}, {1, 0}, {-1, -1}});
    const auto m = fit_kic(X, KernelSpec::polynomial(2), 1e12);
    const std::vector<double> x{1.0, 1.0};
    EXPECT_NEAR(kic_score(m, x), 9.0, 1e-9);
}

TEST(KicScore, SmallRhoRecoversInverseChristoffel) {
    const auto X = make_data({{-1}, {1}});
    const double rho = 1e-8;
    const auto m = fit_kic(X, KernelSpec::polynomial(1), rho);
    const std::vector<double> three{3.0}, zero{0.0};
    EXPECT_NEAR(kic_score(m, three) / rho, 10.0, 1e-4);
    EXPECT_NEAR(kic_score(m, zero) / rho, 1.0, 1e-5);
}

TEST(KicScore, DimensionMismatch) {
    const auto m = fit_kic(make_data({{0, 1}, {1, 0}}), KernelSpec::rbf(1.0), 0.1);
    const std::vector<double> x{1.0};
    EXPECT_THROW(kic_score(m, x), ConfigError);
}

TEST(KicScore, MatchesFeatureSpaceValue) {
    Rng rng(85);
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 1, 20));
        const auto p = static_cast<std::size_t>(testing::uniform_int(rng, 1, 4));
        const int d = testing::uniform_int(rng, 1, 3);
        const double rho = std::pow(10.0, testing::uniform(rng, -4.0, 0.0));
        const auto X = testing::gaussian_data(rng, n, p);
        const auto fm = build_feature_map(p, d);
        const Matrix V = feature_columns(fm, X) / std::sqrt(static_cast<double>(n));
        const auto model = fit_kic(X, KernelSpec::polynomial(d), rho);
        const auto x = testing::gaussian_vector(rng, p);
        const double expected = testing::feature_space_phi(V, apply_feature_map(fm, x), rho);
        EXPECT_LE(testing::rel_diff(kic_score(model, x), expected), 1e-8) << "n=" << n << " p=" << p << " d=" << d;
    }
}

TEST(KicScore, EqualsRidgeObjective) {
    Rng rng(86);
    for (int t = 0; t < 50; ++t) {
        const auto n = static_cast<std::size_t>(testing::uniform_int(rng, 2, 30));
        const auto X = testing::gaussian_data(rng, n, 3);
        const auto kernel = t % 2 ? KernelSpec::rbf(1.2) : KernelSpec::polynomial(2);
        const double rho = std::pow(10.0, testing::uniform(rng, -3.0, 0.0));
        const auto model = fit_kic(X, kernel, rho);
        const auto x = testing::gaussian_vector(rng, 3);
        auto [g, gamma] = cross_vector(kernel, X, x);
        g /= std::sqrt(static_cast<double>(n));
        const Matrix Gs = gram_matrix(kernel, X) / static_cast<double>(n);
        const auto sol = cg_ridge_solve(Gs, g, gamma, rho);
        EXPECT_LE(testing::rel_diff(kic_score(model, x), sol.objective_value), 1e-6);
    }
}

TEST(KicScore, LowerBoundAndConvergence) {
    Rng rng(87);
    for (int t = 0; t < 30; ++t) {
        const auto inst = random_ic_instance(rng);
        const auto Q = testing::gaussian_data(rng, 4, inst.X.cols(), 1.5);
        const auto q = ic_scores(inst.X, Q, inst.degree);
        std::vector<double> prev_gap(Q.rows(), std::numeric_limits<double>::infinity());
        for (int k = 1; k <= 8; ++k) {
            const double rho = std::pow(10.0, -k);
            const auto model = fit_kic(inst.X, KernelSpec::polynomial(inst.degree), rho);
            for (std::size_t i = 0; i < Q.rows(); ++i) {
                const double bound = kic_score(model, Q.row(i)) / rho;
                const double gap = q[i] - bound;
                // Below rho = 1e-6 rounding in phi / rho is comparable to the gap itself.
                if (k <= 6) {
                    EXPECT_LE(bound, q[i] + 1e-6) << "k=" << k;
                    EXPECT_LE(gap, prev_gap[i] + 1e-9 * q[i]) << "k=" << k;
                }
                prev_gap[i] = gap;
            }
        }
        for (std::size_t i = 0; i < Q.rows(); ++i) {
            EXPECT_LT(std::abs(prev_gap[i]), 1e-4 * q[i]);
        }
    }
}

TEST(KicScoresAll, SinglePointRbf) {
    const auto X = make_data({{0.3, -0.7}});
    for (double rho : {1e-3, 0.1, 2.0}) {
        const auto s = kic_scores_all(X, KernelSpec::rbf(1.0), rho);
        EXPECT_NEAR(s[0], 1.0 - 1.0 / (rho + 1.0), 1e-15);
    }
}

TEST(KicScoresAll, DuplicateRowsScoreIdentically) {
    const auto X = make_data({{0, 0}, {1, 2}, {1, 2}, {-1, 0.5}, {3, 1}});
    const auto s = kic_scores_all(X, KernelSpec::polynomial(2), 0.01);
    EXPECT_EQ(s[1], s[2]);
}

TEST(KicScoresAll, MatchesPerPointScoring) {
    Rng rng(88);
    for (int t = 0; t < 20; ++t) {
        const auto X = testing::gaussian_data(rng, static_cast<std::size_t>(testing::uniform_int(rng, 2, 40)), 3);
        const auto kernel = t % 2 ? KernelSpec::rbf(0.9) : KernelSpec::polynomial(2);
        const double rho = 0.01;
        const auto all = kic_scores_all(X, kernel, rho);
        const auto model = fit_kic(X, kernel, rho);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            EXPECT_LE(testing::rel_diff(all[i], kic_score(model, X.row(i)), 1e-300), 1e-12);
        }
    }
}

TEST(Kic2, AlphaOneWithFixedRhoIsKic) {
    Rng rng(89);
    const auto X = testing::gaussian_data(rng, 25, 3);
    const auto kernel = KernelSpec::polynomial(2);
    const double rho = default_rho(gram_matrix(kernel, X) / 25.0, 500.0);
    const auto k2 = fit_kic2(X, kernel, Kic2Options{500.0, 1.0, rho});
    EXPECT_EQ(k2.scores, kic_scores_all(X, kernel, rho));
    EXPECT_EQ(k2.retained.size(), 25u);
}

TEST(Kic2, FarOutlierIsFilteredOut) {
    Rng rng(90);
    RowMatrix m = testing::gaussian_matrix(rng, 10, 2, 0.3);
    m.row(9) << 25.0, -30.0;
    const DataMatrix X(m);
    for (const auto &kernel : {KernelSpec::polynomial(2), KernelSpec::rbf(default_sigma(2, SigmaVariant::KIC2))}) {
        const auto fit = fit_kic2(X, kernel, Kic2Options{500.0, 0.6, std::nullopt});
        EXPECT_EQ(fit.retained.size(), 6u);
        EXPECT_EQ(std::count(fit.retained.begin(), fit.retained.end(), std::size_t{9}), 0);
        EXPECT_EQ(std::max_element(fit.scores.begin(), fit.scores.end()) - fit.scores.begin(), 9);
        EXPECT_EQ(fit.model.size(), 6u);
        EXPECT_EQ(kic2_scores(X, kernel, 500.0, 0.6), fit.scores);
    }
}

TEST(Kic2, StageTwoRhoIsRecomputed) {
    Rng rng(91);
    const auto X = testing::gaussian_data(rng, 30, 2);
    const auto kernel = KernelSpec::polynomial(2);
    const auto fit = fit_kic2(X, kernel);
    DataMatrix kept = X.select_rows([&] {
        std::vector<bool> mask(30, false);
        for (auto i : fit.retained) {
            mask[i] = true;
        }
        return mask;
    }());
    EXPECT_EQ(fit.retained.size(), 18u);
    EXPECT_EQ(fit.model.rho(), default_rho(gram_matrix(kernel, kept) / 18.0, 500.0));
    EXPECT_EQ(fit.stage1_rho, default_rho(gram_matrix(kernel, X) / 30.0, 500.0));
}

TEST(GridScores, MatchesPointwiseScores) {
    const auto X = make_data({{0, 0}, {1, 0}, {0, 1}, {-1, -1}});
    const auto model = fit_kic(X, KernelSpec::rbf(1.0), 0.01);
    const GridAxis ax{-1.0, 1.0, 2}, ay{-2.0, 2.0, 2};
    const Matrix f = grid_scores(model, ax, ay);
    ASSERT_EQ(f.rows(), 2);
    ASSERT_EQ(f.cols(), 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const std::vector<double> pt{ax.at(j), ay.at(i)};
            EXPECT_EQ(f(i, j), kic_score(model, pt));
        }
    }
}

TEST(GridScores, MirrorSymmetricField) {
    // Data closed under x -> -x gives a field symmetric in the x index.
    const auto X = make_data({{-1, 0}, {1, 0}, {-0.5, 1}, {0.5, 1}, {-2, -1}, {2, -1}, {0, 0.3}});
    for (const auto &kernel : {KernelSpec::polynomial(2), KernelSpec::rbf(0.8)}) {
        const auto model = fit_kic(X, kernel, 0.01);
        const Matrix f = grid_scores(model, {-3.0, 3.0, 13}, {-2.0, 2.0, 9});
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index j = 0; j < f.cols(); ++j) {
                EXPECT_LE(testing::rel_diff(f(i, j), f(i, f.cols() - 1 - j), 1e-12), 1e-9);
            }
        }
    }
}

TEST(GridScores, RbfFarFieldApproachesOne) {
    const auto X = make_data({{0, 0}, {0.5, 0.2}, {-0.3, 0.4}});
    const auto model = fit_kic(X, KernelSpec::rbf(1.0), 0.002);
    const Matrix f = grid_scores(model, {-20.0, 20.0, 5}, {-20.0, 20.0, 5});
    for (auto [i, j] : {std::pair{0, 0}, {0, 4}, {4, 0}, {4, 4}}) {
        EXPECT_NEAR(f(i, j), 1.0, 1e-3);
    }
}

TEST(GridScores, Errors) {
    const auto m3 = fit_kic(make_data({{0, 0, 0}, {1, 1, 1}}), KernelSpec::rbf(1.0), 0.1);
    EXPECT_THROW(grid_scores(m3, {0, 1, 3}, {0, 1, 3}), ConfigError);
    const auto m2 = fit_kic(make_data({{0, 0}, {1, 1}}), KernelSpec::rbf(1.0), 0.1);
    EXPECT_THROW(grid_scores(m2, {0, 1, 1}, {0, 1, 3}), ConfigError);
}

}  // namespace
}  // namespace kic
