#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spotrack {

inline constexpr int kStateDim = 8;
inline constexpr int kMeasDim = 4;

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;
using Vector8 = Eigen::Matrix<double, 8, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Matrix84 = Eigen::Matrix<double, 8, 4>;

/// Multivariate normal density with fixed dimension N.
template <int N>
struct Gaussian {
    using Vector = Eigen::Matrix<double, N, 1>;
    using Matrix = Eigen::Matrix<double, N, N>;

    Vector mean = Vector::Zero();
    Matrix cov = Matrix::Zero();

    Gaussian() = default;
    Gaussian(Vector m, Matrix c) : mean(std::move(m)), cov(std::move(c)) {}

    friend bool operator==(const Gaussian& a, const Gaussian& b) {
        return a.mean == b.mean && a.cov == b.cov;
    }
};

using StateDensity = Gaussian<kStateDim>;
using BoxDensity = Gaussian<kMeasDim>;

/// Weighted list of Gaussians. Used both as a normalized density and as an
/// unnormalized intensity, depending on context.
template <int N>
struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Gaussian<N>> components;

    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] bool empty() const { return components.empty(); }

    [[nodiscard]] double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void add(double weight, Gaussian<N> g) {
        weights.push_back(weight);
        components.push_back(std::move(g));
    }
};

/// (C + C^T) / 2, in place.
template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& c) {
    c = (0.5 * (c + c.transpose())).eval();
}

/// Symmetrizes `c` and clamps slightly negative eigenvalues to zero.
/// Throws if an eigenvalue is below -tol * trace.
template <int N>
void enforce_psd(Eigen::Matrix<double, N, N>& c, double tol = 1e-6) {
    symmetrize(c);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(c);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() >= 0.0) return;
    const double bound = -tol * std::max(std::abs(c.trace()), 1e-300);
    if (ev.minCoeff() < bound)
        throw std::runtime_error("covariance is not positive semi-definite");
    const Eigen::Matrix<double, N, 1> clamped = ev.cwiseMax(0.0);
    c = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
    symmetrize(c);
}

/// True if `c` is symmetric and its smallest eigenvalue is >= -rel_tol * trace.
template <int N>
[[nodiscard]] bool is_psd(const Eigen::Matrix<double, N, N>& c, double rel_tol = 1e-9) {
    const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(c, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -rel_tol * std::abs(c.trace());
}

/// log N(x; mean, cov). Throws if `cov` is not positive definite.
template <int N>
[[nodiscard]] double log_normal_pdf(const Eigen::Matrix<double, N, 1>& x,
                                    const Eigen::Matrix<double, N, 1>& mean,
                                    const Eigen::Matrix<double, N, N>& cov) {
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("covariance is not positive definite");
    const Eigen::Matrix<double, N, 1> white = llt.matrixL().solve(x - mean);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (white.squaredNorm() + log_det + N * std::log(2.0 * std::numbers::pi));
}

/// Moment-matches a weighted set of Gaussians into one. Weights need not be
/// normalized but must have a positive sum.
template <int N>
[[nodiscard]] Gaussian<N> moment_match(const std::vector<double>& weights,
                                       const std::vector<Gaussian<N>>& comps) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("moment_match: weights sum to zero");
    Gaussian<N> out;
    for (std::size_t i = 0; i < comps.size(); ++i) out.mean += (weights[i] / total) * comps[i].mean;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto d = (comps[i].mean - out.mean).eval();
        out.cov += (weights[i] / total) * (comps[i].cov + d * d.transpose());
    }
    symmetrize(out.cov);
    return out;
}

}  // namespace spotrack
