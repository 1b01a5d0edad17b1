// stats.hpp — Least squares fits and order-independent summation helpers

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qbs/errors.hpp"

namespace qbs {

// Pairwise (cascade) summation; result depends only on the input order.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = x[0];
        for (std::size_t i = 1; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t m = n / 2;
    return pairwise_sum(x, m) + pairwise_sum(x + m, n - m);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

struct MeanStderr {
    double mean{0.0};
    double stderr_{0.0};
};

inline MeanStderr mean_and_stderr(const std::vector<double>& v) {
    require(!v.empty(), "mean_and_stderr: empty sample");
    const double n = static_cast<double>(v.size());
    const double m = pairwise_sum(v) / n;
    if (v.size() < 2) return {m, std::numeric_limits<double>::infinity()};
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - m) * (v[i] - m);
    const double var = pairwise_sum(d) / (n - 1.0);
    return {m, std::sqrt(var / n)};
}

struct LinearFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd stderr_;
    double residual_rms{0.0};
    double condition{0.0}; // of the column-normalised design matrix
};

// Ordinary least squares y ≈ X b.
inline LinearFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    require(X.rows() == y.size(), "ols: dimension mismatch");
    require(X.rows() >= X.cols() && X.cols() >= 1, "ols: need at least as many rows as columns");
    LinearFit fit;
    Eigen::VectorXd scale = X.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        require(scale[j] > 0.0, "ols: zero design column");
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    fit.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
    const Eigen::VectorXd bs = svd.solve(y);
    fit.coef = bs.cwiseQuotient(scale);

    const Eigen::VectorXd r = y - X * fit.coef;
    const auto n = X.rows(), p = X.cols();
    fit.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    fit.stderr_ = Eigen::VectorXd::Zero(p);
    if (n > p && std::isfinite(fit.condition)) {
        const double s2 = r.squaredNorm() / static_cast<double>(n - p);
        const Eigen::MatrixXd XtX = X.transpose() * X;
        const Eigen::MatrixXd cov = s2 * XtX.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
        fit.stderr_ = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    }
    return fit;
}

// Straight-line fit y = a + b x; coef = (a, b). The abscissa is centred
// internally, so stderr_[0] is the error of the value at the mean x.
inline LinearFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "line_fit: need >= 2 matching points");
    const double xm = pairwise_sum(x) / static_cast<double>(x.size());
    Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), 2);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = x[i] - xm;
        Y[static_cast<Eigen::Index>(i)] = y[i];
    }
    LinearFit fit = ols(X, Y);
    fit.coef[0] -= fit.coef[1] * xm;
    return fit;
}

} // namespace qbs
