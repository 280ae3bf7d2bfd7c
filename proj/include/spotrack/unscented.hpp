#pragma once

#include "spotrack/bbox.hpp"
#include "spotrack/gaussian.hpp"
#include "spotrack/spo_model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spotrack {

/// Symmetric 2n+1 sigma-point set; spread sqrt(n + kappa).
struct UtConfig {
    double kappa = 0.0;
};

template <int N, int M>
struct UtResult {
    Gaussian<M> output;
    Eigen::Matrix<double, N, M> cross = Eigen::Matrix<double, N, M>::Zero();
};

namespace detail {

/// Some L with L * L^T = c, falling back to an eigen square root when the
/// Cholesky factorization fails on a singular PSD matrix.
template <int N>
Eigen::Matrix<double, N, N> matrix_sqrt(const Eigen::Matrix<double, N, N>& c) {
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(c);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(c);
    if (es.info() != Eigen::Success) throw std::runtime_error("covariance factorization failed");
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-6 * std::max(std::abs(c.trace()), 1e-300))
        throw std::runtime_error("covariance factorization failed: matrix is not PSD");
    return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace detail

/// Propagates `g` through `fn` with the unscented transform. Returns the
/// transformed moments and the input-output cross-covariance.
template <int N, int M, typename Fn>
[[nodiscard]] UtResult<N, M> unscented_transform(const Gaussian<N>& g, Fn&& fn, UtConfig cfg = {}) {
    const double lambda = N + cfg.kappa;
    if (!(lambda > 0.0)) throw std::invalid_argument("unscented_transform: n + kappa must be positive");
    const Eigen::Matrix<double, N, N> root = detail::matrix_sqrt<N>(lambda * g.cov);
    const double w0 = cfg.kappa / lambda;
    const double wi = 0.5 / lambda;

    std::array<Eigen::Matrix<double, N, 1>, 2 * N + 1> xs;
    std::array<Eigen::Matrix<double, M, 1>, 2 * N + 1> ys;
    xs[0] = g.mean;
    for (int i = 0; i < N; ++i) {
        xs[1 + i] = g.mean + root.col(i);
        xs[1 + N + i] = g.mean - root.col(i);
    }
    for (int i = 0; i < 2 * N + 1; ++i) ys[i] = fn(xs[i]);

    UtResult<N, M> r;
    r.output.mean = w0 * ys[0];
    for (int i = 1; i < 2 * N + 1; ++i) r.output.mean += wi * ys[i];
    for (int i = 0; i < 2 * N + 1; ++i) {
        const double w = i == 0 ? w0 : wi;
        const Eigen::Matrix<double, M, 1> dy = ys[i] - r.output.mean;
        r.output.cov += w * dy * dy.transpose();
        r.cross += w * (xs[i] - g.mean) * dy.transpose();
    }
    symmetrize(r.output.cov);
    return r;
}

/// Linear-Gaussian prediction: F x + offset + w, w ~ N(0, Q).
template <int N>
[[nodiscard]] Gaussian<N> ukf_predict(const Gaussian<N>& g, const Eigen::Matrix<double, N, N>& F,
                                      const Eigen::Matrix<double, N, 1>& offset,
                                      const Eigen::Matrix<double, N, N>& Q) {
    Gaussian<N> out{F * g.mean + offset, F * g.cov * F.transpose() + Q};
    symmetrize(out.cov);
    return out;
}

[[nodiscard]] inline StateDensity ukf_predict(const StateDensity& g, const Transition& t) {
    return ukf_predict<kStateDim>(g, t.F, t.offset, t.Q);
}

/// Predicted box distribution of one state density, reusable across many
/// candidate measurements.
struct MeasurementPrediction {
    Vector4 mean = Vector4::Zero();
    Matrix4 S = Matrix4::Identity();  // innovation covariance, R included
    Matrix84 cross = Matrix84::Zero();
    Eigen::LLT<Matrix4> S_llt;
    double log_det_2pi_S = 0.0;

    [[nodiscard]] double mahalanobis2(const Vector4& z) const {
        return S_llt.matrixL().solve(z - mean).squaredNorm();
    }
    [[nodiscard]] double log_likelihood(const Vector4& z) const {
        return -0.5 * (mahalanobis2(z) + log_det_2pi_S);
    }
};

[[nodiscard]] inline MeasurementPrediction predict_measurement(const StateDensity& g, const CameraModel& cam,
                                                               const Matrix4& R, double min_depth,
                                                               UtConfig cfg = {}) {
    const auto ut = unscented_transform<kStateDim, kMeasDim>(
        g, [&](const Vector8& s) { return project_clamped(s, cam, min_depth); }, cfg);
    MeasurementPrediction p;
    p.mean = ut.output.mean;
    p.S = ut.output.cov + R;
    symmetrize(p.S);
    p.cross = ut.cross;
    p.S_llt.compute(p.S);
    if (p.S_llt.info() != Eigen::Success) throw std::runtime_error("innovation covariance is not invertible");
    const double log_det = 2.0 * p.S_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    p.log_det_2pi_S = log_det + kMeasDim * std::log(2.0 * std::numbers::pi);
    return p;
}

[[nodiscard]] inline MeasurementPrediction predict_measurement(const StateDensity& g, const SpoModel& m,
                                                               UtConfig cfg = {}) {
    return predict_measurement(g, m.camera, m.R, m.params.min_depth, cfg);
}

/// Kalman correction using a precomputed measurement prediction.
[[nodiscard]] inline StateDensity ukf_correct(const StateDensity& g, const MeasurementPrediction& p,
                                              const Vector4& z) {
    const Matrix84 gain = p.S_llt.solve(p.cross.transpose()).transpose();
    StateDensity out;
    out.mean = g.mean + gain * (z - p.mean);
    out.cov = g.cov - gain * p.S * gain.transpose();
    enforce_psd(out.cov);
    return out;
}

struct UkfUpdate {
    StateDensity posterior;
    double log_likelihood = 0.0;
};

[[nodiscard]] inline UkfUpdate ukf_update(const StateDensity& g, const BBox2D& z, const CameraModel& cam,
                                          const Matrix4& R, double min_depth = 0.1, UtConfig cfg = {}) {
    const auto p = predict_measurement(g, cam, R, min_depth, cfg);
    return {ukf_correct(g, p, z.vec()), p.log_likelihood(z.vec())};
}

struct GateResult {
    bool pass = false;
    double mahalanobis2 = 0.0;
};

/// Ellipsoidal gate: passes iff the innovation Mahalanobis distance is at most
/// `threshold` (squared distance at most threshold^2).
[[nodiscard]] inline GateResult gate(const MeasurementPrediction& p, const Vector4& z, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("gate: threshold must be positive");
    const double d2 = p.mahalanobis2(z);
    return {d2 <= threshold * threshold, d2};
}

[[nodiscard]] inline GateResult gate(const StateDensity& g, const BBox2D& z, const CameraModel& cam,
                                     const Matrix4& R, double threshold, double min_depth = 0.1) {
    return gate(predict_measurement(g, cam, R, min_depth), z.vec(), threshold);
}

}  // namespace spotrack
