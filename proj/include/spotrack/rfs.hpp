#pragma once

#include "spotrack/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spotrack {

using TrackLabel = std::int64_t;

/// Empty with probability 1 - existence, otherwise one object distributed
/// according to `spatial`.
struct BernoulliComponent {
    double existence = 0.0;
    StateDensity spatial;
};

/// Unnormalized Gaussian-mixture intensity of a Poisson point process. The
/// total weight is the expected number of points.
struct PoissonIntensity {
    GaussianMixture<kStateDim> mixture;

    [[nodiscard]] double mass() const { return mixture.total_weight(); }
    [[nodiscard]] std::size_t size() const { return mixture.size(); }
};

/// One potential object, with one local hypothesis per surviving
/// data-association history.
struct Track {
    TrackLabel label = 0;
    std::vector<BernoulliComponent> hypotheses;
};

/// Marks a track that does not exist under a given global hypothesis.
inline constexpr int kNotPresent = -1;

struct GlobalHypothesis {
    double log_weight = 0.0;
    /// One entry per track: index into that track's hypotheses, or kNotPresent.
    std::vector<int> assignment;
};

struct PmbmPosterior {
    PoissonIntensity undetected;
    std::vector<Track> tracks;
    std::vector<GlobalHypothesis> globals;
};

// ---------------------------------------------------------------------------

template <int N>
struct PoissonFit {
    double beta = 0.0;
    GaussianMixture<N> spatial;
    /// False when beta == 0 and the spatial density is undefined.
    bool defined = false;
};

/// Best Poisson approximation of a multi-Bernoulli set: expected count is the
/// sum of existence probabilities and the spatial density is the
/// existence-weighted mixture.
template <int N>
[[nodiscard]] PoissonFit<N> mb_to_poisson(const std::vector<std::pair<double, Gaussian<N>>>& components) {
    PoissonFit<N> out;
    for (const auto& [r, g] : components) {
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("mb_to_poisson: existence outside [0, 1]");
        out.beta += r;
    }
    if (out.beta <= 0.0) return out;
    for (const auto& [r, g] : components) out.spatial.add(r / out.beta, g);
    out.defined = true;
    return out;
}

struct NormalizedLogWeights {
    std::vector<double> log_weights;
    double log_normalizer = 0.0;
};

/// Shifts log-weights so that their exponentials sum to one (log-sum-exp with
/// max shift).
[[nodiscard]] inline NormalizedLogWeights normalize_log_weights(const std::vector<double>& log_weights) {
    if (log_weights.empty()) throw std::domain_error("degenerate hypothesis set");
    const double max = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(max)) throw std::domain_error("degenerate hypothesis set");
    double sum = 0.0;
    for (double l : log_weights) sum += std::exp(l - max);
    NormalizedLogWeights out;
    out.log_normalizer = max + std::log(sum);
    out.log_weights.reserve(log_weights.size());
    for (double l : log_weights) out.log_weights.push_back(l - out.log_normalizer);
    return out;
}

inline void normalize(std::vector<GlobalHypothesis>& globals) {
    std::vector<double> lw;
    lw.reserve(globals.size());
    for (const auto& g : globals) lw.push_back(g.log_weight);
    const auto n = normalize_log_weights(lw);
    for (std::size_t i = 0; i < globals.size(); ++i) globals[i].log_weight = n.log_weights[i];
}

/// Drops hypotheses whose normalized log-weight is below `log_threshold`,
/// keeps at most `cap` of the heaviest (ties keep input order) and
/// renormalizes. The best hypothesis always survives.
[[nodiscard]] inline std::vector<GlobalHypothesis> prune_and_cap(std::vector<GlobalHypothesis> globals,
                                                                 double log_threshold, std::size_t cap) {
    if (globals.empty()) return globals;
    cap = std::max<std::size_t>(cap, 1);
    normalize(globals);
    std::stable_sort(globals.begin(), globals.end(),
                     [](const GlobalHypothesis& a, const GlobalHypothesis& b) { return a.log_weight > b.log_weight; });
    std::size_t keep = 1;
    while (keep < globals.size() && keep < cap && globals[keep].log_weight >= log_threshold) ++keep;
    globals.resize(keep);
    normalize(globals);
    return globals;
}

/// Removes local hypotheses no global hypothesis references, then tracks whose
/// referenced hypotheses all have existence below `min_existence`. Globals
/// that become identical are merged (weights summed).
inline void collect_garbage(PmbmPosterior& post, double min_existence) {
    const std::size_t n_tracks = post.tracks.size();
    std::vector<Track> kept_tracks;
    std::vector<int> track_map(n_tracks, -1);
    std::vector<std::vector<int>> hyp_maps(n_tracks);

    for (std::size_t t = 0; t < n_tracks; ++t) {
        const auto& track = post.tracks[t];
        std::vector<char> used(track.hypotheses.size(), 0);
        bool alive = false;
        for (const auto& g : post.globals) {
            const int h = g.assignment[t];
            if (h == kNotPresent) continue;
            used[static_cast<std::size_t>(h)] = 1;
            if (track.hypotheses[static_cast<std::size_t>(h)].existence >= min_existence) alive = true;
        }
        if (!alive) continue;
        Track nt{track.label, {}};
        hyp_maps[t].assign(track.hypotheses.size(), kNotPresent);
        for (std::size_t h = 0; h < track.hypotheses.size(); ++h) {
            if (!used[h]) continue;
            hyp_maps[t][h] = static_cast<int>(nt.hypotheses.size());
            nt.hypotheses.push_back(track.hypotheses[h]);
        }
        track_map[t] = static_cast<int>(kept_tracks.size());
        kept_tracks.push_back(std::move(nt));
    }

    std::map<std::vector<int>, std::size_t> index;
    std::vector<GlobalHypothesis> merged;
    for (const auto& g : post.globals) {
        std::vector<int> a(kept_tracks.size(), kNotPresent);
        for (std::size_t t = 0; t < n_tracks; ++t) {
            if (track_map[t] < 0 || g.assignment[t] == kNotPresent) continue;
            a[static_cast<std::size_t>(track_map[t])] = hyp_maps[t][static_cast<std::size_t>(g.assignment[t])];
        }
        auto [it, inserted] = index.try_emplace(a, merged.size());
        if (inserted) {
            merged.push_back({g.log_weight, std::move(a)});
        } else {
            double& lw = merged[it->second].log_weight;
            const double hi = std::max(lw, g.log_weight);
            lw = hi + std::log(std::exp(lw - hi) + std::exp(g.log_weight - hi));
        }
    }
    post.tracks = std::move(kept_tracks);
    post.globals = std::move(merged);
}

/// Drops Poisson components lighter than `min_weight`, then keeps the
/// `max_components` heaviest. No merging.
inline void reduce_poisson(PoissonIntensity& p, double min_weight, std::size_t max_components) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < p.mixture.size(); ++i)
        if (p.mixture.weights[i] >= min_weight) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return p.mixture.weights[a] > p.mixture.weights[b]; });
    if (idx.size() > max_components) idx.resize(max_components);
    std::sort(idx.begin(), idx.end());
    GaussianMixture<kStateDim> out;
    for (std::size_t i : idx) out.add(p.mixture.weights[i], p.mixture.components[i]);
    p.mixture = std::move(out);
}

}  // namespace spotrack
