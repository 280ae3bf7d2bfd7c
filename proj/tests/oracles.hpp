#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "spotrack/metrics.hpp"
#include "spotrack/pmbm.hpp"
#include "spotrack/simulate.hpp"
#include "spotrack/unscented.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace spotrack::testing {

/// A walking pedestrian at 8 m with no process noise and measurements drawn
/// from the model's noise covariance.
inline std::vector<BBox2D> straight_walk(const SpoModel& model, int frames, std::uint64_t seed, bool noisy = true) {
    SimRng rng(seed);
    const Matrix4 root = detail::matrix_sqrt<4>(model.R);
    Vector8 s = Vector8::Zero();
    s[idx::x] = -0.5;
    s[idx::vx] = 0.2;
    s[idx::y] = 0.3;
    s[idx::z] = 8.0;
    s[idx::width] = model.params.motion.mean_width;
    s[idx::height] = model.params.motion.mean_height;
    std::vector<BBox2D> out;
    for (int k = 0; k < frames; ++k) {
        if (k > 0) s[idx::x] += s[idx::vx] * model.period;
        const Vector4 z = model.measure(s);
        out.push_back(BBox2D::from_vec(noisy ? Vector4(detail::sample_gaussian<4>(rng, z, root)) : z));
    }
    return out;
}

/// The single-object model used for the degenerate comparison: certain
/// detection, no clutter and one birth component.
inline SpoModel degenerate_model() {
    ModelParams p;
    p.detection.detection_probability = 1.0;
    p.detection.clutter_rate = 0.0;
    p.birth.components = 1;
    return SpoModel::build(p, CameraModel::with_defaults(1920, 1080, 30.0));
}

struct DegenerateComparison {
    double max_mean_error = std::numeric_limits<double>::infinity();
    double max_cov_error = std::numeric_limits<double>::infinity();
    int frames_with_one_estimate = 0;
};

/// Runs the PMBM filter and a hand-written UKF chain side by side on one
/// object. Births are switched off after the first frame.
inline DegenerateComparison compare_with_ukf_chain(int frames, std::uint64_t seed) {
    const SpoModel model = degenerate_model();
    SpoModel no_birth = model;
    no_birth.birth.beta = 0.0;
    const FilterConfig cfg;
    const auto z = straight_walk(model, frames, seed);

    DegenerateComparison r{0.0, 0.0, 0};
    PmbmState state = initial_posterior(model.birth);
    StateDensity ukf = model.birth.mixture.components.front();
    for (int k = 0; k < frames; ++k) {
        const auto& m = k == 0 ? model : no_birth;
        if (k > 0) {
            state = predict(std::move(state), m);
            ukf = ukf_predict(ukf, m.motion);
        }
        state = update(std::move(state), {z[static_cast<std::size_t>(k)]}, m, cfg);
        ukf = ukf_update(ukf, z[static_cast<std::size_t>(k)], m.camera, m.R, m.params.min_depth, cfg.ut).posterior;

        const auto est = estimate(state.posterior, cfg, m);
        if (est.size() != 1) {
            r.max_mean_error = r.max_cov_error = std::numeric_limits<double>::infinity();
            continue;
        }
        ++r.frames_with_one_estimate;
        r.max_mean_error = std::max(r.max_mean_error, (est[0].state.mean - ukf.mean).cwiseAbs().maxCoeff());
        r.max_cov_error = std::max(r.max_cov_error, (est[0].state.cov - ukf.cov).cwiseAbs().maxCoeff());
    }
    return r;
}

/// GOSPA by enumerating every partial matching between X and Y.
inline double gospa_exhaustive(const std::vector<BBox2D>& X, const std::vector<BBox2D>& Y, double c, double p,
                               double alpha = 2.0) {
    const double cp = std::pow(c, p);
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(Y.size(), 0);
    auto rec = [&](auto&& self, std::size_t i, double cost, std::size_t pairs) -> void {
        if (i == X.size()) {
            const double unpaired = static_cast<double>(X.size() + Y.size() - 2 * pairs);
            best = std::min(best, cost + cp / alpha * unpaired);
            return;
        }
        self(self, i + 1, cost, pairs);
        for (std::size_t j = 0; j < Y.size(); ++j) {
            if (used[j]) continue;
            const double d = std::min(1.0 - iou(X[i], Y[j]), c);
            used[j] = 1;
            self(self, i + 1, cost + std::pow(d, p), pairs + 1);
            used[j] = 0;
        }
    };
    rec(rec, 0, 0.0, 0);
    return std::pow(best, 1.0 / p);
}

inline BBox2D random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.0, 60.0), size(10.0, 40.0);
    return {pos(rng), pos(rng) + 40.0, size(rng), size(rng)};
}

/// Small random labelled sets on a shared frame range, with gaps and
/// overlapping boxes so that switches are worth considering.
inline TrajectorySet random_trajectory_set(std::mt19937_64& rng, int frames, int max_tracks) {
    TrajectorySet s;
    s.first_frame = 1;
    s.num_frames = frames;
    std::uniform_int_distribution<int> n_tracks(0, max_tracks);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = n_tracks(rng);
    for (int t = 0; t < n; ++t) {
        BBox2D b = random_box(rng);
        for (int k = 1; k <= frames; ++k) {
            b.x += 4.0 * (u(rng) - 0.5);
            b.y += 4.0 * (u(rng) - 0.5);
            if (u(rng) < 0.75) s.add(t + 1, k, b);
        }
    }
    return s;
}

/// Random set whose top-left coordinates lie on the 0.01 px grid.
inline TrajectorySet random_grid_set(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_tracks(0, 6), frames(1, 30), cents(-50000, 250000), size(1, 60000);
    TrajectorySet s;
    s.num_frames = frames(rng);
    const int n = n_tracks(rng);
    for (int t = 0; t < n; ++t) {
        const TrackLabel label = 1 + static_cast<TrackLabel>(rng() % 1000);
        if (s.tracks.count(label)) continue;
        for (int k = 1; k <= s.num_frames; ++k) {
            if (rng() % 3 == 0) continue;
            s.add(label, k, BBox2D::from_top_left(cents(rng) / 100.0, cents(rng) / 100.0, size(rng) / 100.0,
                                                  size(rng) / 100.0));
        }
    }
    return s;
}

inline bool same_at_two_decimals(const TrajectorySet& a, const TrajectorySet& b) {
    if (a.tracks.size() != b.tracks.size()) return false;
    for (const auto& [id, t] : a.tracks) {
        if (!b.tracks.count(id) || b.tracks.at(id).size() != t.size()) return false;
        for (const auto& [k, box] : t) {
            const auto it = b.tracks.at(id).find(k);
            if (it == b.tracks.at(id).end()) return false;
            if ((it->second.vec() - box.vec()).cwiseAbs().maxCoeff() > 5e-3) return false;
        }
    }
    return true;
}

}  // namespace spotrack::testing
