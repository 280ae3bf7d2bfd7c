#pragma once

#include "spotrack/bbox.hpp"
#include "spotrack/rfs.hpp"

#include <cstdlib>
#include <map>
#include <stdexcept>
#include <vector>

namespace spotrack {

/// Boxes of one labelled object keyed by frame number.
using Trajectory = std::map<int, BBox2D>;

/// Labelled per-frame boxes over frames [first_frame, first_frame + num_frames).
/// Used for ground truth, filter estimates and baseline output alike.
struct TrajectorySet {
    int first_frame = 1;
    int num_frames = 0;
    std::map<TrackLabel, Trajectory> tracks;

    [[nodiscard]] int last_frame() const { return first_frame + num_frames - 1; }
    [[nodiscard]] bool in_range(int frame) const { return frame >= first_frame && frame <= last_frame(); }

    void add(TrackLabel label, int frame, const BBox2D& box) {
        if (!in_range(frame)) throw std::out_of_range("frame outside trajectory set range");
        if (!tracks[label].emplace(frame, box).second)
            throw std::invalid_argument("trajectory already has a box in this frame");
    }

    [[nodiscard]] std::size_t box_count() const {
        std::size_t n = 0;
        for (const auto& [id, t] : tracks) n += t.size();
        return n;
    }

    /// Number of boxes in each frame, indexed from first_frame.
    [[nodiscard]] std::vector<std::size_t> per_frame_counts() const {
        std::vector<std::size_t> n(static_cast<std::size_t>(std::max(num_frames, 0)), 0);
        for (const auto& [id, t] : tracks)
            for (const auto& [k, b] : t) ++n[static_cast<std::size_t>(k - first_frame)];
        return n;
    }

    friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

/// Unlabelled detections per frame; index 0 is the set's first frame.
using FrameDetections = std::vector<std::vector<BBox2D>>;

}  // namespace spotrack
