#pragma once

#include "spotrack/bbox.hpp"
#include "spotrack/gaussian.hpp"
#include "spotrack/spo_model.hpp"
#include "spotrack/trajectory.hpp"
#include "spotrack/unscented.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace spotrack {

/// Random source of the simulator: 64-bit Mersenne Twister (MT19937-64)
/// with Boost's distributions, whose sampling algorithms are fixed across
/// platforms and standard libraries.
using SimRng = boost::random::mt19937_64;

struct SimulationOptions {
    /// Mean of the Poisson initial population; defaults to L * eta.
    std::optional<double> initial_mean;
    bool births = true;
    bool detections = true;
};

struct SimulatedObject {
    TrackLabel label = 0;
    int birth_step = 0;   // first step the object exists
    int death_step = -1;  // first step it no longer exists; -1 if alive at the end
    bool initial = false; // part of the step-0 population
};

struct Scenario {
    TrajectorySet gt;  // projected boxes, frames 1..K
    std::map<TrackLabel, std::map<int, Vector8>> gt3d;
    FrameDetections detections;
    std::vector<SimulatedObject> objects;
    std::vector<int> birth_counts;  // newborns per step; entry 0 is always 0
    std::vector<int> cardinality;   // objects per step
};

namespace detail {

inline int sample_poisson(SimRng& rng, double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson mean must be non-negative");
    if (mean == 0.0) return 0;
    return boost::random::poisson_distribution<int, double>(mean)(rng);
}

template <int N>
Eigen::Matrix<double, N, 1> sample_gaussian(SimRng& rng, const Eigen::Matrix<double, N, 1>& mean,
                                            const Eigen::Matrix<double, N, N>& root) {
    boost::random::normal_distribution<double> n01;
    Eigen::Matrix<double, N, 1> e;
    for (int i = 0; i < N; ++i) e[i] = n01(rng);
    return mean + root * e;
}

struct BirthSampler {
    std::vector<double> cumulative;
    std::vector<Vector8> means;
    std::vector<Matrix8> roots;

    explicit BirthSampler(const GaussianMixture<kStateDim>& m) {
        const double total = m.total_weight();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            acc += m.weights[i] / total;
            cumulative.push_back(acc);
            means.push_back(m.components[i].mean);
            roots.push_back(matrix_sqrt<kStateDim>(m.components[i].cov));
        }
        if (!cumulative.empty()) cumulative.back() = 1.0;
    }

    Vector8 operator()(SimRng& rng) const {
        if (cumulative.empty()) throw std::logic_error("birth mixture is empty");
        const double u = boost::random::uniform_01<double>()(rng);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), means.size() - 1);
        return sample_gaussian<kStateDim>(rng, means[i], roots[i]);
    }
};

}  // namespace detail

/// Draws a K-frame scenario from the full model. Step k of the scenario is
/// frame k + 1 of the returned sets. The same seed reproduces the same
/// scenario bit for bit.
[[nodiscard]] inline Scenario sample_scenario(const SpoModel& model, int K, std::uint64_t seed,
                                              const SimulationOptions& opt = {}) {
    if (K < 1) throw std::invalid_argument("sample_scenario: need at least one frame");
    SimRng rng(seed);
    const detail::BirthSampler birth(model.birth.mixture);
    const Matrix8 q_root = detail::matrix_sqrt<kStateDim>(model.motion.Q);
    const Matrix4 r_root = detail::matrix_sqrt<kMeasDim>(model.R);
    const double pd = model.detection_probability();
    const auto& cl = model.clutter;
    boost::random::uniform_01<double> u01;

    Scenario sc;
    sc.gt.first_frame = 1;
    sc.gt.num_frames = K;
    sc.detections.resize(static_cast<std::size_t>(K));
    sc.birth_counts.assign(static_cast<std::size_t>(K), 0);
    sc.cardinality.assign(static_cast<std::size_t>(K), 0);

    struct Live {
        std::size_t object;
        Vector8 state;
    };
    std::vector<Live> live;
    TrackLabel next_label = 1;
    auto spawn = [&](int step, bool initial) {
        sc.objects.push_back({next_label++, step, -1, initial});
        live.push_back({sc.objects.size() - 1, birth(rng)});
    };

    const double pop = model.params.population.mean_lifespan * model.params.population.birth_rate;
    const int n0 = detail::sample_poisson(rng, opt.initial_mean.value_or(pop));
    for (int i = 0; i < n0; ++i) spawn(0, true);

    for (int k = 0; k < K; ++k) {
        if (k > 0) {
            std::vector<Live> next;
            next.reserve(live.size());
            for (auto& o : live) {
                if (u01(rng) >= model.survival) {
                    sc.objects[o.object].death_step = k;
                    continue;
                }
                o.state = detail::sample_gaussian<kStateDim>(rng, model.motion.F * o.state + model.motion.offset,
                                                             q_root);
                next.push_back(o);
            }
            live = std::move(next);
            if (opt.births) {
                const int nb = detail::sample_poisson(rng, model.birth.beta);
                sc.birth_counts[static_cast<std::size_t>(k)] = nb;
                for (int i = 0; i < nb; ++i) spawn(k, false);
            }
        }
        sc.cardinality[static_cast<std::size_t>(k)] = static_cast<int>(live.size());

        auto& dets = sc.detections[static_cast<std::size_t>(k)];
        for (const auto& o : live) {
            const TrackLabel label = sc.objects[o.object].label;
            const Vector4 z = model.measure(o.state);
            sc.gt.add(label, k + 1, BBox2D::from_vec(z));
            sc.gt3d[label][k + 1] = o.state;
            if (opt.detections && u01(rng) < pd) {
                // Noise can flip the size of a small distant box; such a box
                // cannot be reported, so the detection is lost.
                const auto box = BBox2D::from_vec(detail::sample_gaussian<kMeasDim>(rng, z, r_root));
                if (box.width > 0.0 && box.height > 0.0) dets.push_back(box);
            }
        }
        if (opt.detections) {
            const int nc = detail::sample_poisson(rng, cl.rate);
            for (int i = 0; i < nc; ++i) {
                auto uni = [&](double lo, double hi) {
                    return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
                };
                const double x = uni(cl.x_lo, cl.x_hi);
                const double y = uni(cl.y_lo, cl.y_hi);
                const double w = uni(cl.w_lo, cl.w_hi);
                const double h = uni(cl.h_lo, cl.h_hi);
                dets.push_back({x, y, w, h});
            }
            // Canonical order hides which detections are object-originated.
            std::sort(dets.begin(), dets.end(), [](const BBox2D& a, const BBox2D& b) {
                return std::tie(a.x, a.y, a.width, a.height) < std::tie(b.x, b.y, b.width, b.height);
            });
        }
    }
    return sc;
}

}  // namespace spotrack
