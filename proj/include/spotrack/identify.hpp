#pragma once

#include "spotrack/assignment.hpp"
#include "spotrack/bbox.hpp"
#include "spotrack/gaussian.hpp"
#include "spotrack/mot_io.hpp"
#include "spotrack/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spotrack {

/// Matching of one frame: (gt index, detection index) pairs plus the
/// leftovers on each side.
struct FrameMatch {
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> missed;   // unmatched gt indices
    std::vector<int> clutter;  // unmatched detection indices
};

/// Optimal assignment of one frame. Pairs need IoU > 0 and cost 1 - IoU; a
/// missed gt costs 1, so the solution maximises the summed IoU.
[[nodiscard]] inline FrameMatch match_frame(const std::vector<BBox2D>& gt, const std::vector<BBox2D>& det) {
    FrameMatch m;
    const int ng = static_cast<int>(gt.size()), nd = static_cast<int>(det.size());
    if (ng > 0) {
        CostMatrix C = CostMatrix::Constant(ng, nd + ng, kForbidden);
        for (int i = 0; i < ng; ++i) {
            for (int j = 0; j < nd; ++j) {
                const double v = iou(gt[static_cast<std::size_t>(i)], det[static_cast<std::size_t>(j)]);
                if (v > 0.0) C(i, j) = 1.0 - v;
            }
            C(i, nd + i) = 1.0;
        }
        const Assignment a = solve(C);
        for (int i = 0; i < ng; ++i) {
            const int j = a.row_to_col[static_cast<std::size_t>(i)];
            if (j < nd) m.pairs.emplace_back(i, j);
            else m.missed.push_back(i);
        }
    }
    std::vector<char> used(static_cast<std::size_t>(nd), 0);
    for (const auto& [i, j] : m.pairs) used[static_cast<std::size_t>(j)] = 1;
    for (int j = 0; j < nd; ++j)
        if (!used[static_cast<std::size_t>(j)]) m.clutter.push_back(j);
    return m;
}

[[nodiscard]] inline std::vector<FrameMatch> match_frames(const FrameDetections& gt, const FrameDetections& det) {
    if (gt.size() != det.size()) throw std::invalid_argument("match_frames: frame counts differ");
    std::vector<FrameMatch> out;
    out.reserve(gt.size());
    for (std::size_t k = 0; k < gt.size(); ++k) out.push_back(match_frame(gt[k], det[k]));
    return out;
}

/// Per-frame gt boxes of a trajectory set, in ascending label order.
[[nodiscard]] inline FrameDetections frame_boxes(const TrajectorySet& s) {
    FrameDetections out(static_cast<std::size_t>(std::max(s.num_frames, 0)));
    for (const auto& [id, t] : s.tracks)
        for (const auto& [k, b] : t) out[static_cast<std::size_t>(k - s.first_frame)].push_back(b);
    return out;
}

struct DetectionStats {
    double detection_probability = 0.0;
    double clutter_rate = 0.0;
    Matrix4 noise_shape = Matrix4::Zero();  // residual covariance divided by gamma^2
    std::size_t gt_count = 0;
    std::size_t matched = 0;
    std::size_t clutter = 0;
    std::size_t frames = 0;
};

/// Pools matched residuals across sequences. Residuals are divided by the
/// sequence's gamma = min(width, height) before pooling.
class DetectionStatsAccumulator {
public:
    void add(const FrameDetections& gt, const FrameDetections& det, const std::vector<FrameMatch>& matches,
             double gamma) {
        if (!(gamma > 0.0)) throw std::invalid_argument("detection stats: gamma must be positive");
        if (matches.size() != gt.size() || det.size() != gt.size())
            throw std::invalid_argument("detection stats: frame counts differ");
        for (std::size_t k = 0; k < matches.size(); ++k) {
            ++frames_;
            gt_count_ += gt[k].size();
            clutter_ += matches[k].clutter.size();
            for (const auto& [i, j] : matches[k].pairs) {
                const Vector4 r = (det[k][static_cast<std::size_t>(j)].vec() - gt[k][static_cast<std::size_t>(i)].vec()) / gamma;
                ++n_;
                // Welford update of mean and co-moment.
                const Vector4 delta = r - mean_;
                mean_ += delta / static_cast<double>(n_);
                comoment_ += delta * (r - mean_).transpose();
            }
        }
    }

    [[nodiscard]] DetectionStats result() const {
        if (gt_count_ == 0 || frames_ == 0) throw std::runtime_error("detection stats: no ground truth");
        if (n_ < 2) throw std::runtime_error("detection stats: insufficient matches for a covariance");
        DetectionStats s;
        s.gt_count = gt_count_;
        s.matched = n_;
        s.clutter = clutter_;
        s.frames = frames_;
        s.detection_probability = static_cast<double>(n_) / static_cast<double>(gt_count_);
        s.clutter_rate = static_cast<double>(clutter_) / static_cast<double>(frames_);
        s.noise_shape = comoment_ / static_cast<double>(n_ - 1);
        symmetrize(s.noise_shape);
        return s;
    }

private:
    std::size_t gt_count_ = 0, clutter_ = 0, frames_ = 0, n_ = 0;
    Vector4 mean_ = Vector4::Zero();
    Matrix4 comoment_ = Matrix4::Zero();
};

[[nodiscard]] inline DetectionStats detection_stats(const FrameDetections& gt, const FrameDetections& det,
                                                    const std::vector<FrameMatch>& matches, double gamma) {
    DetectionStatsAccumulator acc;
    acc.add(gt, det, matches, gamma);
    return acc.result();
}

// ---------------------------------------------------------------------------

struct VisibilityBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    std::size_t detected = 0;
    /// Absent when the bin holds no ground truth.
    [[nodiscard]] std::optional<double> detection_probability() const {
        if (count == 0) return std::nullopt;
        return static_cast<double>(detected) / static_cast<double>(count);
    }
};

/// Detection rate of ground truth binned by visibility ratio over [0, 1];
/// the last bin is closed.
class VisibilityCurve {
public:
    explicit VisibilityCurve(int bins) {
        if (bins < 1) throw std::invalid_argument("visibility curve: need at least one bin");
        for (int b = 0; b < bins; ++b)
            bins_.push_back({static_cast<double>(b) / bins, static_cast<double>(b + 1) / bins, 0, 0});
    }

    /// `visibility[k][i]` belongs to gt box i of frame k.
    void add(const std::vector<std::vector<double>>& visibility, const std::vector<FrameMatch>& matches) {
        if (visibility.size() != matches.size()) throw std::invalid_argument("visibility curve: frame counts differ");
        const int nb = static_cast<int>(bins_.size());
        for (std::size_t k = 0; k < matches.size(); ++k) {
            std::vector<char> hit(visibility[k].size(), 0);
            for (const auto& [i, j] : matches[k].pairs) hit[static_cast<std::size_t>(i)] = 1;
            for (std::size_t i = 0; i < visibility[k].size(); ++i) {
                const double v = visibility[k][i];
                if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
                const int b = std::min(static_cast<int>(v * nb), nb - 1);
                ++bins_[static_cast<std::size_t>(b)].count;
                bins_[static_cast<std::size_t>(b)].detected += hit[i];
            }
        }
    }

    [[nodiscard]] const std::vector<VisibilityBin>& bins() const { return bins_; }

private:
    std::vector<VisibilityBin> bins_;
};

/// Per-frame gt boxes and visibilities of parsed annotations, both in the
/// same order (ascending id within a frame).
struct GtFrames {
    FrameDetections boxes;
    std::vector<std::vector<double>> visibility;
};

[[nodiscard]] inline GtFrames gt_frames(std::vector<Annotation> rows, int num_frames, int first_frame = 1) {
    std::sort(rows.begin(), rows.end(),
              [](const Annotation& a, const Annotation& b) { return std::tie(a.frame, a.id) < std::tie(b.frame, b.id); });
    GtFrames g;
    g.boxes.resize(static_cast<std::size_t>(num_frames));
    g.visibility.resize(static_cast<std::size_t>(num_frames));
    for (const auto& a : rows) {
        if (a.frame < first_frame || a.frame >= first_frame + num_frames)
            throw std::out_of_range("gt frame " + std::to_string(a.frame) + " outside the sequence");
        g.boxes[static_cast<std::size_t>(a.frame - first_frame)].push_back(a.box);
        g.visibility[static_cast<std::size_t>(a.frame - first_frame)].push_back(a.visibility);
    }
    return g;
}

// ---------------------------------------------------------------------------

struct PopulationStats {
    double mean_lifespan = 0.0;  // L, s
    double birth_rate = 0.0;     // eta, objects / s
    double mean_count = 0.0;     // sample mean of per-frame cardinality
    double var_count = 0.0;      // sample variance of per-frame cardinality
    std::size_t objects = 0;
    std::size_t frames = 0;

    /// Stationary M/M/inf mean; compare with mean_count and var_count.
    [[nodiscard]] double stationary_mean() const { return mean_lifespan * birth_rate; }
};

/// Lifespans and cardinalities pooled over one or more sequences. A lifespan
/// is the inclusive span from first to last appearance times T. Every id
/// counts as one arrival, including those already present in the first
/// frame.
class PopulationAccumulator {
public:
    void add(const TrajectorySet& gt, double frame_rate) {
        if (!(frame_rate > 0.0)) throw std::invalid_argument("population stats: frame rate must be positive");
        const double T = 1.0 / frame_rate;
        for (const auto& [id, t] : gt.tracks) {
            if (t.empty()) continue;
            lifespan_sum_ += (t.rbegin()->first - t.begin()->first + 1) * T;
            ++objects_;
        }
        duration_ += gt.num_frames * T;
        for (std::size_t n : gt.per_frame_counts()) counts_.push_back(static_cast<double>(n));
    }

    [[nodiscard]] PopulationStats result() const {
        if (objects_ == 0) throw std::runtime_error("population stats: empty ground truth");
        PopulationStats s;
        s.objects = objects_;
        s.frames = counts_.size();
        s.mean_lifespan = lifespan_sum_ / static_cast<double>(objects_);
        s.birth_rate = static_cast<double>(objects_) / duration_;
        double sum = 0.0;
        for (double c : counts_) sum += c;
        s.mean_count = sum / static_cast<double>(counts_.size());
        double ss = 0.0;
        for (double c : counts_) ss += (c - s.mean_count) * (c - s.mean_count);
        s.var_count = counts_.size() > 1 ? ss / static_cast<double>(counts_.size() - 1) : 0.0;
        return s;
    }

private:
    double lifespan_sum_ = 0.0;
    double duration_ = 0.0;
    std::size_t objects_ = 0;
    std::vector<double> counts_;
};

[[nodiscard]] inline PopulationStats lifespan_birth_stats(const TrajectorySet& gt, double frame_rate) {
    PopulationAccumulator acc;
    acc.add(gt, frame_rate);
    return acc.result();
}

}  // namespace spotrack
