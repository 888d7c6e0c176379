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

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace kic {

inline double frobenius_norm(const Matrix &A) noexcept {
    double s = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            s += A(i, j) * A(i, j);
        }
    }
    return std::sqrt(s);
}

/// Lower Cholesky factor of A + jitter * I.
class SpdFactorization {
  public:
    SpdFactorization(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

    [[nodiscard]] const Matrix &lower_triangular_factor() const noexcept { return lower_; }
    [[nodiscard]] double jitter_applied() const noexcept { return jitter_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return lower_.rows(); }

    /// L^{-1} b, so that b' (A + jitter I)^{-1} b = |L^{-1} b|^2.
    [[nodiscard]] Vector whiten(const Vector &b) const {
        check_dim(b.size());
        return lower_.triangularView<Eigen::Lower>().solve(b);
    }

    [[nodiscard]] Matrix whiten(const Matrix &B) const {
        check_dim(B.rows());
        return lower_.triangularView<Eigen::Lower>().solve(B);
    }

    [[nodiscard]] Matrix reconstruct() const { return lower_ * lower_.transpose(); }

  private:
    void check_dim(Eigen::Index m) const {
        if (m != lower_.rows()) {
            throw ConfigError("right-hand side has " + std::to_string(m) + " rows, factorization has " +
                              std::to_string(lower_.rows()));
        }
    }

    Matrix lower_;
    double jitter_;
};

enum class JitterPolicy {
    Escalate,  ///< retry with increasing diagonal jitter before giving up
    Strict     ///< fail on the first non-positive-definite attempt
};

namespace detail {

// Cholesky succeeds and every pivot stays above roundoff level.
inline bool try_cholesky(const Matrix &A, Matrix &lower) {
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    lower = llt.matrixL();
    const double max_diag = A.diagonal().cwiseAbs().maxCoeff();
    const double floor = static_cast<double>(A.rows()) * std::numeric_limits<double>::epsilon() * max_diag;
    for (Eigen::Index i = 0; i < lower.rows(); ++i) {
        const double pivot = lower(i, i);
        if (!std::isfinite(pivot) || pivot * pivot <= floor) {
            return false;
        }
    }
    return true;
}

}  // namespace detail

/**
 * Cholesky factorization of a symmetric matrix. Under JitterPolicy::Escalate a
 * failed attempt is retried on A + t I with t = {1e-12, 1e-10, 1e-8} * |A|_F / sqrt(n).
 */
inline SpdFactorization spd_factor(const Matrix &A, JitterPolicy policy = JitterPolicy::Escalate) {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) {
        throw ConfigError("spd_factor requires a non-empty square matrix");
    }
    if (!A.allFinite()) {
        throw NumericalError("matrix contains non-finite entries");
    }
    const double norm = frobenius_norm(A);
    if (((A - A.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * std::max(norm, 1.0)) {
        throw ConfigError("spd_factor requires a symmetric matrix");
    }

    Matrix lower;
    if (detail::try_cholesky(A, lower)) {
        return {std::move(lower), 0.0};
    }
    if (policy == JitterPolicy::Escalate && norm > 0.0) {
        const double base = norm / std::sqrt(static_cast<double>(n));
        for (double scale : std::array{1e-12, 1e-10, 1e-8}) {
            const double jitter = scale * base;
            Matrix shifted = A;
            shifted.diagonal().array() += jitter;
            if (detail::try_cholesky(shifted, lower)) {
                std::ostringstream os;
                os << "matrix not numerically positive definite; added diagonal jitter " << jitter;
                warn(os.str());
                return {std::move(lower), jitter};
            }
        }
    }
    throw NumericalError("not positive definite");
}

/// Solves (A + jitter I) x = b with the stored factor.
inline Vector spd_solve(const SpdFactorization &F, const Vector &b) {
    if (b.size() != F.size()) {
        throw ConfigError("spd_solve: right-hand side length " + std::to_string(b.size()) +
                          " does not match factorization size " + std::to_string(F.size()));
    }
    const auto &L = F.lower_triangular_factor();
    Vector y = L.triangularView<Eigen::Lower>().solve(b);
    return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

/// Clamps gamma - g'theta at zero, warning when the negative excursion exceeds roundoff.
inline double clamp_objective(double value, double gamma) {
    if (value >= 0.0) {
        return value;
    }
    if (value < -1e-8 * std::abs(gamma)) {
        std::ostringstream os;
        os.precision(17);
        os << "ridge objective " << value << " is negative beyond roundoff (gamma = " << gamma << "); clamped to 0";
        warn(os.str());
    }
    return 0.0;
}

struct RidgeSolution {
    Vector theta;
    double objective_value = 0.0;
    int iterations = 0;
    /// |(G + rho I) theta - g| / |g|, recomputed from scratch at exit.
    double residual_norm = 0.0;
};

struct CgOptions {
    double tol = 1e-8;
    int max_iter = -1;  ///< -1 selects 10 n
};

/**
 * Minimizes |V theta - v|^2 + rho |theta|^2 in kernel space: conjugate gradients
 * on (G + rho I) theta = g, followed by the optimal value gamma - g'theta.
 */
inline RidgeSolution cg_ridge_solve(const Matrix &G, const Vector &g, double gamma, double rho, CgOptions opts = {}) {
    const auto n = G.rows();
    if (G.cols() != n || g.size() != n) {
        throw ConfigError("cg_ridge_solve: G must be n x n and g length n");
    }
    if (!(rho > 0.0)) {
        throw ConfigError("cg_ridge_solve: rho must be positive");
    }
    if (!(opts.tol > 0.0)) {
        throw ConfigError("cg_ridge_solve: tolerance must be positive");
    }
    const int max_iter = opts.max_iter < 0 ? static_cast<int>(10 * n) : opts.max_iter;

    RidgeSolution sol;
    sol.theta = Vector::Zero(n);
    const double g_norm = g.norm();
    if (g_norm == 0.0) {
        sol.objective_value = clamp_objective(gamma, gamma);
        return sol;
    }

    auto apply = [&](const Vector &x) -> Vector { return G * x + rho * x; };
    const double target = opts.tol * g_norm;

    Vector &theta = sol.theta;
    Vector r = g;
    double best = r.norm();
    int it = 0;
    // Restart from the true residual whenever the recurrence claims convergence
    // but the recomputed residual disagrees.
    while (it < max_iter) {
        const int start = it;
        Vector p = r;
        double rr = r.squaredNorm();
        while (it < max_iter && std::sqrt(rr) > target) {
            const Vector Ap = apply(p);
            const double pAp = p.dot(Ap);
            if (!(pAp > 0.0)) {
                break;
            }
            const double step = rr / pAp;
            theta += step * p;
            r -= step * Ap;
            const double rr_next = r.squaredNorm();
            p = r + (rr_next / rr) * p;
            rr = rr_next;
            ++it;
        }
        r = g - apply(theta);
        const double true_res = r.norm();
        best = std::min(best, true_res);
        if (true_res <= target) {
            sol.iterations = it;
            sol.residual_norm = true_res / g_norm;
            sol.objective_value = clamp_objective(gamma - g.dot(theta), gamma);
            return sol;
        }
        if (it >= max_iter || it == start) {
            break;
        }
    }
    std::ostringstream os;
    os << "conjugate gradients did not converge in " << max_iter << " iterations (best relative residual "
       << best / g_norm << ")";
    throw ConvergenceError(os.str(), best / g_norm, it);
}

}  // namespace kic
