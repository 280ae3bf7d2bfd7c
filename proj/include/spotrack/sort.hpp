#pragma once

#include "spotrack/assignment.hpp"
#include "spotrack/bbox.hpp"
#include "spotrack/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace spotrack {

/// SORT-style tracker settings. Noise levels are in pixels and per frame.
struct SortConfig {
    double iou_threshold = 0.3;
    int min_hits = 3;
    int max_age = 1;
    double measurement_std_position = 4.0;
    double measurement_std_size = 8.0;
    double process_std_position = 1.0;
    double process_std_size = 1.0;
    double process_std_velocity = 0.5;
    double initial_std_velocity = 30.0;

    void validate() const {
        if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
            throw std::invalid_argument("sort: iou threshold must lie in (0, 1]");
        if (min_hits < 1) throw std::invalid_argument("sort: min_hits must be at least 1");
        if (max_age < 0) throw std::invalid_argument("sort: max_age must be non-negative");
        for (double v : {measurement_std_position, measurement_std_size, process_std_position, process_std_size,
                         process_std_velocity, initial_std_velocity})
            if (!(v > 0.0)) throw std::invalid_argument("sort: noise levels must be positive");
    }
};

/// Constant-velocity Kalman filter on [x, y, w, h] and their rates.
class SortTrack {
public:
    using Vec8 = Eigen::Matrix<double, 8, 1>;
    using Mat8 = Eigen::Matrix<double, 8, 8>;

    SortTrack(TrackLabel label, const BBox2D& z, const SortConfig& cfg) : label_(label) {
        x_.setZero();
        x_.head<4>() = z.vec();
        Eigen::Matrix<double, 8, 1> var;
        const double mp = cfg.measurement_std_position, ms = cfg.measurement_std_size;
        const double v0 = cfg.initial_std_velocity;
        var << mp * mp, mp * mp, ms * ms, ms * ms, v0 * v0, v0 * v0, v0 * v0, v0 * v0;
        P_ = var.asDiagonal();
    }

    void predict(const SortConfig& cfg) {
        Mat8 F = Mat8::Identity();
        F.topRightCorner<4, 4>().setIdentity();
        Eigen::Matrix<double, 8, 1> q;
        const double qp = cfg.process_std_position, qs = cfg.process_std_size, qv = cfg.process_std_velocity;
        q << qp * qp, qp * qp, qs * qs, qs * qs, qv * qv, qv * qv, qv * qv, qv * qv;
        x_ = F * x_;
        P_ = F * P_ * F.transpose();
        P_.diagonal() += q;
        ++age_;
        if (time_since_update_ > 0) hit_streak_ = 0;
        ++time_since_update_;
    }

    void update(const BBox2D& z, const SortConfig& cfg) {
        Eigen::Matrix<double, 4, 8> H = Eigen::Matrix<double, 4, 8>::Zero();
        H.leftCols<4>().setIdentity();
        Eigen::Vector4d r;
        const double mp = cfg.measurement_std_position, ms = cfg.measurement_std_size;
        r << mp * mp, mp * mp, ms * ms, ms * ms;
        const Eigen::Matrix4d S = H * P_ * H.transpose() + Eigen::Matrix4d(r.asDiagonal());
        const Eigen::Matrix<double, 8, 4> K = P_ * H.transpose() * S.inverse();
        x_ += K * (z.vec() - H * x_);
        P_ = (Mat8::Identity() - K * H) * P_;
        P_ = 0.5 * (P_ + P_.transpose());
        time_since_update_ = 0;
        ++hit_streak_;
    }

    [[nodiscard]] BBox2D box() const { return BBox2D::from_vec(x_.head<4>()); }
    [[nodiscard]] bool valid() const { return x_[2] > 0.0 && x_[3] > 0.0 && x_.allFinite(); }
    [[nodiscard]] TrackLabel label() const { return label_; }
    [[nodiscard]] int hit_streak() const { return hit_streak_; }
    [[nodiscard]] int time_since_update() const { return time_since_update_; }

private:
    TrackLabel label_;
    Vec8 x_;
    Mat8 P_;
    int age_ = 0;
    int hit_streak_ = 1;
    int time_since_update_ = 0;
};

/// Frame-by-frame SORT tracker. A track is reported in a frame when it was
/// updated in that frame and has at least min_hits consecutive hits; it is
/// dropped after more than max_age consecutive misses.
class SortTracker {
public:
    explicit SortTracker(SortConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    /// Processes one frame and returns the reported (label, box) pairs in
    /// ascending label order.
    std::vector<std::pair<TrackLabel, BBox2D>> step(const std::vector<BBox2D>& detections) {
        for (auto& t : tracks_) t.predict(cfg_);
        std::erase_if(tracks_, [](const SortTrack& t) { return !t.valid(); });

        const int nt = static_cast<int>(tracks_.size());
        const int nd = static_cast<int>(detections.size());
        std::vector<int> det_to_track(static_cast<std::size_t>(nd), -1);
        if (nt > 0 && nd > 0) {
            // Track rows; each track may stay unmatched through its own dummy.
            CostMatrix C = CostMatrix::Constant(nt, nd + nt, kForbidden);
            for (int i = 0; i < nt; ++i) {
                const BBox2D pb = tracks_[static_cast<std::size_t>(i)].box();
                for (int j = 0; j < nd; ++j) {
                    const double v = iou(pb, detections[static_cast<std::size_t>(j)]);
                    if (v >= cfg_.iou_threshold) C(i, j) = 1.0 - v;
                }
                C(i, nd + i) = 1.0;
            }
            const Assignment a = solve(C);
            for (int i = 0; i < nt; ++i) {
                const int j = a.row_to_col[static_cast<std::size_t>(i)];
                if (j < nd) det_to_track[static_cast<std::size_t>(j)] = i;
            }
        }
        for (int j = 0; j < nd; ++j) {
            const int i = det_to_track[static_cast<std::size_t>(j)];
            if (i >= 0) tracks_[static_cast<std::size_t>(i)].update(detections[static_cast<std::size_t>(j)], cfg_);
        }
        for (int j = 0; j < nd; ++j)
            if (det_to_track[static_cast<std::size_t>(j)] < 0)
                tracks_.emplace_back(next_label_++, detections[static_cast<std::size_t>(j)], cfg_);

        std::vector<std::pair<TrackLabel, BBox2D>> out;
        for (const auto& t : tracks_)
            if (t.time_since_update() == 0 && t.hit_streak() >= cfg_.min_hits) out.emplace_back(t.label(), t.box());
        std::erase_if(tracks_, [&](const SortTrack& t) { return t.time_since_update() > cfg_.max_age; });
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    [[nodiscard]] std::size_t live_tracks() const { return tracks_.size(); }

private:
    SortConfig cfg_;
    std::vector<SortTrack> tracks_;
    TrackLabel next_label_ = 1;
};

[[nodiscard]] inline TrajectorySet sort_track(const FrameDetections& detections, const SortConfig& cfg = {},
                                              int first_frame = 1) {
    SortTracker tracker(cfg);
    TrajectorySet out;
    out.first_frame = first_frame;
    out.num_frames = static_cast<int>(detections.size());
    for (std::size_t k = 0; k < detections.size(); ++k)
        for (const auto& [label, box] : tracker.step(detections[k]))
            out.add(label, first_frame + static_cast<int>(k), box);
    return out;
}

}  // namespace spotrack
