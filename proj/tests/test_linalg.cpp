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

#include "kic/kernels.hpp"
#include "kic/linalg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

namespace kic {
namespace {

using testing::Rng;

// A consistent ridge instance: G = V'V, g = V'v, gamma = v'v for a random s x n matrix V.
struct RidgeInstance {
    Matrix V;
    Vector v;
    Matrix G;
    Vector g;
    double gamma;
};

RidgeInstance random_instance(Rng &rng, Eigen::Index n, Eigen::Index s) {
    RidgeInstance r;
    std::normal_distribution<double> nd;
    r.V = Matrix::NullaryExpr(s, n, [&] { return nd(rng); }) / std::sqrt(static_cast<double>(n));
    r.v = Vector::NullaryExpr(s, [&] { return nd(rng); });
    r.G = r.V.transpose() * r.V;
    r.G = (r.G + r.G.transpose()) / 2.0;
    r.g = r.V.transpose() * r.v;
    r.gamma = r.v.squaredNorm();
    return r;
}

double closed_form(const Matrix &G, const Vector &g, double gamma, double rho) {
    Matrix A = G;
    A.diagonal().array() += rho;
    return gamma - g.dot(spd_solve(spd_factor(A), g));
}

class WarningCapture {
  public:
    WarningCapture() : saved_(warning_handler()) {
        warning_handler() = [this](std::string_view m) { messages.emplace_back(m); };
    }
    ~WarningCapture() { warning_handler() = saved_; }
    std::vector<std::string> messages;

  private:
    WarningHandler saved_;
};

TEST(FrobeniusNorm, WorkedExamples) {
    EXPECT_EQ(frobenius_norm(Matrix::Zero(3, 3)), 0.0);
    EXPECT_EQ(frobenius_norm(Matrix::Identity(4, 4)), 2.0);
    Matrix A(2, 2);
    A << 3, 4, 0, 0;
    EXPECT_EQ(frobenius_norm(A), 5.0);
}

TEST(SpdFactor, WorkedExamples) {
    const auto I = spd_factor(Matrix::Identity(3, 3));
    EXPECT_EQ(I.lower_triangular_factor(), Matrix::Identity(3, 3));
    EXPECT_EQ(I.jitter_applied(), 0.0);

    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 4, 9;
    Matrix L = Matrix::Zero(2, 2);
    L.diagonal() << 2, 3;
    EXPECT_EQ(spd_factor(D).lower_triangular_factor(), L);
}

TEST(SpdFactor, ReconstructsRbfGramPlusRidge) {
    Rng rng(41);
    const auto X = testing::gaussian_data(rng, 6, 2);
    Matrix A = gram_matrix(KernelSpec::rbf(1.0), X);
    A.diagonal().array() += 1e-3;
    const auto F = spd_factor(A);
    EXPECT_EQ(F.jitter_applied(), 0.0);
    EXPECT_LE((F.reconstruct() - A).norm() / A.norm(), 1e-10);
}

TEST(SpdFactor, JitterOnSingularInput) {
    // Rank-one PSD matrix: exact factorization fails, jitter rescues it.
    Vector u(3);
    u << 1, 2, 3;
    const Matrix A = u * u.transpose();
    WarningCapture w;
    const auto F = spd_factor(A);
    EXPECT_GT(F.jitter_applied(), 0.0);
    EXPECT_FALSE(w.messages.empty());
    Matrix shifted = A;
    shifted.diagonal().array() += F.jitter_applied();
    EXPECT_LE((F.reconstruct() - shifted).norm() / shifted.norm(), 1e-8);

    EXPECT_THROW(spd_factor(A, JitterPolicy::Strict), NumericalError);
}

TEST(SpdFactor, FailsOnIndefinite) {
    Matrix A(2, 2);
    A << 1, 0, 0, -1;
    try {
        (void)spd_factor(A);
        FAIL() << "expected failure";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("not positive definite"), std::string::npos);
    }
}

TEST(SpdFactor, RejectsAsymmetricAndEmpty) {
    Matrix A(2, 2);
    A << 2, 1, 0, 2;
    EXPECT_THROW(spd_factor(A), ConfigError);
    EXPECT_THROW(spd_factor(Matrix(0, 0)), ConfigError);
    EXPECT_THROW(spd_factor(Matrix(2, 3)), ConfigError);
}

TEST(SpdSolve, WorkedExamples) {
    Vector b(3);
    b << 1.5, -2, 7;
    EXPECT_EQ(spd_solve(spd_factor(Matrix::Identity(3, 3)), b), b);

    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 2, 4;
    Vector rhs(2);
    rhs << 2, 4;
    EXPECT_LE((spd_solve(spd_factor(D), rhs) - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-15);

    Rng rng(51);
    std::normal_distribution<double> nd;
    const Matrix B = Matrix::NullaryExpr(5, 5, [&] { return nd(rng); });
    const Matrix A = B * B.transpose() + 0.5 * Matrix::Identity(5, 5);
    const Vector r = Vector::NullaryExpr(5, [&] { return nd(rng); });
    const Vector x = spd_solve(spd_factor(A), r);
    EXPECT_LE((A * x - r).norm() / r.norm(), 1e-9);

    EXPECT_THROW(spd_solve(spd_factor(A), Vector::Ones(4)), ConfigError);
}

TEST(CgRidgeSolve, WorkedExamples) {
    const auto zero = cg_ridge_solve(Matrix::Identity(3, 3), Vector::Zero(3), 2.5, 0.1);
    EXPECT_EQ(zero.theta, Vector::Zero(3));
    EXPECT_EQ(zero.objective_value, 2.5);
    EXPECT_EQ(zero.iterations, 0);

    Vector g(2);
    g << 2, 0;
    const auto diag = cg_ridge_solve(Matrix::Identity(2, 2), g, 4.0, 1.0);
    EXPECT_NEAR(diag.theta(0), 1.0, 1e-12);
    EXPECT_NEAR(diag.theta(1), 0.0, 1e-12);
    EXPECT_NEAR(diag.objective_value, 2.0, 1e-12);
    EXPECT_LE(diag.residual_norm, 1e-8);
}

TEST(CgRidgeSolve, Errors) {
    const Vector g = Vector::Ones(2);
    EXPECT_THROW(cg_ridge_solve(Matrix::Identity(2, 2), g, 1.0, 0.0), ConfigError);
    EXPECT_THROW(cg_ridge_solve(Matrix::Identity(2, 2), g, 1.0, 1.0, {0.0, -1}), ConfigError);
    EXPECT_THROW(cg_ridge_solve(Matrix::Identity(3, 3), g, 1.0, 1.0), ConfigError);

    Rng rng(61);
    const auto inst = random_instance(rng, 30, 30);
    try {
        (void)cg_ridge_solve(inst.G, inst.g, inst.gamma, 1e-6, {1e-14, 2});
        FAIL() << "expected non-convergence";
    } catch (const ConvergenceError &e) {
        EXPECT_GT(e.best_residual(), 1e-14);
        EXPECT_EQ(e.iterations(), 2);
    }
}

TEST(CgRidgeSolve, AgreesWithCholeskyOnRandomInstances) {
    Rng rng(62);
    for (int t = 0; t < 100; ++t) {
        const auto n = testing::uniform_int(rng, 1, 50);
        const auto s = testing::uniform_int(rng, 1, 60);
        const double rho = std::pow(10.0, testing::uniform(rng, -4.0, 0.0));
        const auto inst = random_instance(rng, n, s);
        const auto sol = cg_ridge_solve(inst.G, inst.g, inst.gamma, rho);
        const double ref = closed_form(inst.G, inst.g, inst.gamma, rho);
        EXPECT_LE(testing::rel_diff(sol.objective_value, ref), 1e-6) << "n=" << n << " s=" << s << " rho=" << rho;
        EXPECT_LE(sol.residual_norm, 1e-8);
        EXPECT_GE(sol.objective_value, 0.0);
    }
}

TEST(CgRidgeSolve, OptimalAgainstRandomCompetitors) {
    // theta'(G + rho I)theta - 2 g'theta + gamma is the ridge objective in kernel space.
    Rng rng(63);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        const auto n = testing::uniform_int(rng, 1, 20);
        const auto inst = random_instance(rng, n, testing::uniform_int(rng, 1, 25));
        const double rho = std::pow(10.0, testing::uniform(rng, -3.0, 0.0));
        const auto sol = cg_ridge_solve(inst.G, inst.g, inst.gamma, rho);
        for (int c = 0; c < 5; ++c) {
            const Vector other = sol.theta + Vector::NullaryExpr(n, [&] { return nd(rng); }) * 0.1;
            const double value = other.dot(inst.G * other + rho * other) - 2.0 * inst.g.dot(other) + inst.gamma;
            EXPECT_GE(value, sol.objective_value - 1e-8);
        }
        // And the kernel-space objective at theta* matches its primal form.
        const double primal = (inst.V * sol.theta - inst.v).squaredNorm() + rho * sol.theta.squaredNorm();
        EXPECT_LE(testing::rel_diff(primal, sol.objective_value, 1e-12), 1e-6);
    }
}

TEST(CgRidgeSolve, ObjectiveMonotoneInRhoAndTendsToGamma) {
    Rng rng(64);
    for (int t = 0; t < 100; ++t) {
        const auto inst = random_instance(rng, testing::uniform_int(rng, 2, 15), testing::uniform_int(rng, 1, 20));
        double prev = -1.0;
        for (int e = -6; e <= 6; ++e) {
            const double phi = closed_form(inst.G, inst.g, inst.gamma, std::pow(10.0, e));
            EXPECT_GE(phi, prev - 1e-12 * inst.gamma) << "rho=1e" << e;
            prev = phi;
        }
        const double far = cg_ridge_solve(inst.G, inst.g, inst.gamma, 1e10).objective_value;
        EXPECT_LE(testing::rel_diff(far, inst.gamma), 1e-6);
    }
}

TEST(ClampObjective, WarnsOnlyBeyondRoundoff) {
    WarningCapture w;
    EXPECT_EQ(clamp_objective(-1e-12, 1.0), 0.0);
    EXPECT_TRUE(w.messages.empty());
    EXPECT_EQ(clamp_objective(-1e-3, 1.0), 0.0);
    EXPECT_EQ(w.messages.size(), 1u);
    EXPECT_EQ(clamp_objective(0.25, 1.0), 0.25);
}

}  // namespace
}  // namespace kic
