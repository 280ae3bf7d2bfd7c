#pragma once

#include "spotrack/assignment.hpp"
#include "spotrack/rfs.hpp"
#include "spotrack/spo_model.hpp"
#include "spotrack/trajectory.hpp"
#include "spotrack/unscented.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

namespace spotrack {

struct FilterConfig {
    double gate_threshold = 6.0;  // Mahalanobis distance, not squared
    std::size_t max_globals = 25;
    double prune_log_weight = -100.0;
    std::size_t murty_M = 3;
    double estimate_threshold = 0.5;
    double poisson_min_weight = 1e-5;
    std::size_t poisson_max_components = 50;
    double track_min_existence = 1e-4;
    UtConfig ut;

    void validate() const {
        if (!(gate_threshold > 0.0)) throw std::invalid_argument("filter: gate threshold must be positive");
        if (max_globals < 1) throw std::invalid_argument("filter: max_globals must be at least 1");
        if (murty_M < 1) throw std::invalid_argument("filter: murty_M must be at least 1");
        if (!(estimate_threshold >= 0.0 && estimate_threshold <= 1.0))
            throw std::invalid_argument("filter: estimate threshold must be in [0, 1]");
        if (!(kStateDim + ut.kappa > 0.0)) throw std::invalid_argument("filter: n + kappa must be positive");
    }
};

/// One reported object: the Bernoulli label, its 3D density and the
/// unscented projection of that density onto the image.
struct TrackedEstimate {
    TrackLabel label = 0;
    double existence = 0.0;
    StateDensity state;
    BBox2D bbox;
    Matrix4 bbox_cov = Matrix4::Zero();
};

/// PMBM density plus the label counter used for newly detected objects.
struct PmbmState {
    PmbmPosterior posterior;
    TrackLabel next_label = 1;
};

/// The Poisson initial density equals the birth intensity; there are no
/// detected objects and a single empty global hypothesis.
[[nodiscard]] inline PmbmState initial_posterior(const BirthModel& birth) {
    PmbmState s;
    if (birth.beta > 0.0)
        for (std::size_t i = 0; i < birth.mixture.size(); ++i)
            s.posterior.undetected.mixture.add(birth.beta * birth.mixture.weights[i], birth.mixture.components[i]);
    s.posterior.globals.push_back({0.0, {}});
    return s;
}

/// Survival thinning and linear motion for every component, then the birth
/// intensity is appended to the Poisson part. Global weights are unchanged.
[[nodiscard]] inline PmbmState predict(PmbmState s, const SpoModel& model) {
    auto& post = s.posterior;
    for (std::size_t i = 0; i < post.undetected.mixture.size(); ++i) {
        post.undetected.mixture.weights[i] *= model.survival;
        post.undetected.mixture.components[i] = ukf_predict(post.undetected.mixture.components[i], model.motion);
    }
    if (model.birth.beta > 0.0)
        for (std::size_t i = 0; i < model.birth.mixture.size(); ++i)
            post.undetected.mixture.add(model.birth.beta * model.birth.mixture.weights[i],
                                        model.birth.mixture.components[i]);
    for (auto& track : post.tracks)
        for (auto& h : track.hypotheses) {
            h.existence *= model.survival;
            h.spatial = ukf_predict(h.spatial, model.motion);
        }
    return s;
}

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
/// Stand-in log-weight for an event the model gives zero probability, so
/// every measurement stays explainable.
inline constexpr double kLogWeightFloor = -700.0;

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

/// Per local hypothesis: the predicted measurement and the gated detections.
struct HypothesisLikelihoods {
    std::optional<MeasurementPrediction> prediction;
    double log_miss = 0.0;                           // log(1 - r P_D), floored
    std::vector<std::pair<int, double>> detections;  // (measurement, log r P_D l(z))
};

/// Newly created children of one track's local hypotheses, created on demand.
struct ChildBuilder {
    const Track* parent = nullptr;
    const std::vector<HypothesisLikelihoods>* lik = nullptr;
    const std::vector<BBox2D>* measurements = nullptr;
    double pd = 0.0;
    Track out;
    std::map<std::pair<int, int>, int> index;  // (parent hyp, measurement or -1) -> child

    int child(int hyp, int meas) {
        auto [it, inserted] = index.try_emplace({hyp, meas}, static_cast<int>(out.hypotheses.size()));
        if (!inserted) return it->second;
        const auto& parent_hyp = parent->hypotheses[static_cast<std::size_t>(hyp)];
        BernoulliComponent c;
        if (meas < 0) {
            const double r = parent_hyp.existence;
            const double denom = 1.0 - r * pd;
            c.existence = denom > 0.0 ? r * (1.0 - pd) / denom : 0.0;
            c.spatial = parent_hyp.spatial;
        } else {
            const auto& p = *(*lik)[static_cast<std::size_t>(hyp)].prediction;
            c.existence = 1.0;
            c.spatial = ukf_correct(parent_hyp.spatial, p, (*measurements)[static_cast<std::size_t>(meas)].vec());
        }
        out.hypotheses.push_back(std::move(c));
        return it->second;
    }
};

}  // namespace detail

/// PMBM measurement update with Murty-expanded data association per prior
/// global hypothesis, followed by pruning, capping and housekeeping.
[[nodiscard]] inline PmbmState update(PmbmState s, const std::vector<BBox2D>& measurements, const SpoModel& model,
                                      const FilterConfig& cfg) {
    using detail::kNegInf;
    cfg.validate();
    auto& post = s.posterior;
    const double pd = model.detection_probability();
    const double log_pd = detail::safe_log(pd);
    const int m = static_cast<int>(measurements.size());
    std::vector<Vector4> z(measurements.size());
    for (int j = 0; j < m; ++j) z[static_cast<std::size_t>(j)] = measurements[static_cast<std::size_t>(j)].vec();

    // New potential objects: one per measurement, fed by gated Poisson components.
    std::vector<double> log_new(static_cast<std::size_t>(m), kNegInf);
    std::vector<std::optional<BernoulliComponent>> new_bernoulli(static_cast<std::size_t>(m));
    {
        const auto& mix = post.undetected.mixture;
        std::vector<MeasurementPrediction> preds;
        preds.reserve(mix.size());
        if (pd > 0.0)
            for (const auto& c : mix.components) preds.push_back(predict_measurement(c, model, cfg.ut));
        const double log_rate = detail::safe_log(model.clutter.rate);
        for (int j = 0; j < m; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            double log_e = kNegInf;
            std::vector<double> lw;
            std::vector<StateDensity> post_comps;
            for (std::size_t h = 0; h < preds.size(); ++h) {
                if (!(mix.weights[h] > 0.0) || !gate(preds[h], z[ju], cfg.gate_threshold).pass) continue;
                const double a = log_pd + std::log(mix.weights[h]) + preds[h].log_likelihood(z[ju]);
                log_e = detail::log_add(log_e, a);
                lw.push_back(a);
                post_comps.push_back(ukf_correct(mix.components[h], preds[h], z[ju]));
            }
            const double log_clutter = log_rate + model.clutter.log_density(measurements[ju]);
            log_new[ju] = detail::log_add(log_e, log_clutter);
            if (log_e != kNegInf) {
                std::vector<double> w;
                for (double a : lw) w.push_back(std::exp(a - log_e));
                BernoulliComponent b;
                b.existence = std::exp(log_e - log_new[ju]);
                b.spatial = post_comps.size() == 1 ? post_comps.front() : moment_match(w, post_comps);
                new_bernoulli[ju] = std::move(b);
            }
            log_new[ju] = std::max(log_new[ju], detail::kLogWeightFloor);
        }
    }

    // Likelihoods of every existing local hypothesis.
    const std::size_t n_tracks = post.tracks.size();
    std::vector<std::vector<detail::HypothesisLikelihoods>> lik(n_tracks);
    for (std::size_t t = 0; t < n_tracks; ++t) {
        const auto& hyps = post.tracks[t].hypotheses;
        lik[t].resize(hyps.size());
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            auto& L = lik[t][h];
            const double r = hyps[h].existence;
            L.log_miss = std::max(detail::safe_log(1.0 - r * pd), detail::kLogWeightFloor);
            if (!(r > 0.0) || !(pd > 0.0)) continue;
            L.prediction = predict_measurement(hyps[h].spatial, model, cfg.ut);
            for (int j = 0; j < m; ++j) {
                const auto g = gate(*L.prediction, z[static_cast<std::size_t>(j)], cfg.gate_threshold);
                if (!g.pass) continue;
                L.detections.emplace_back(
                    j, std::log(r) + log_pd - 0.5 * (g.mahalanobis2 + L.prediction->log_det_2pi_S));
            }
        }
    }

    std::vector<detail::ChildBuilder> builders(n_tracks);
    for (std::size_t t = 0; t < n_tracks; ++t) {
        builders[t].parent = &post.tracks[t];
        builders[t].lik = &lik[t];
        builders[t].measurements = &measurements;
        builders[t].pd = pd;
        builders[t].out.label = post.tracks[t].label;
    }
    // Measurement j's new track gets index new_track_index[j] (or -1 when no
    // Bernoulli could be formed).
    std::vector<int> new_track_index(static_cast<std::size_t>(m), -1);
    int n_new = 0;
    for (int j = 0; j < m; ++j)
        if (new_bernoulli[static_cast<std::size_t>(j)]) new_track_index[static_cast<std::size_t>(j)] = n_new++;

    std::vector<GlobalHypothesis> children;
    for (const auto& parent : post.globals) {
        // Rows: tracks present with positive existence.
        std::vector<int> row_track, row_hyp;
        for (std::size_t t = 0; t < n_tracks; ++t) {
            const int h = parent.assignment[t];
            if (h == kNotPresent) continue;
            if (lik[t][static_cast<std::size_t>(h)].prediction) {
                row_track.push_back(static_cast<int>(t));
                row_hyp.push_back(h);
            }
        }
        const int n_rows = static_cast<int>(row_track.size());

        // Connected components of the gating graph (rows + measurements).
        std::vector<int> parent_of(static_cast<std::size_t>(n_rows + m));
        std::iota(parent_of.begin(), parent_of.end(), 0);
        auto find = [&](int a) {
            while (parent_of[static_cast<std::size_t>(a)] != a) a = parent_of[static_cast<std::size_t>(a)];
            return a;
        };
        for (int i = 0; i < n_rows; ++i)
            for (const auto& [j, lw] : lik[static_cast<std::size_t>(row_track[static_cast<std::size_t>(i)])]
                                          [static_cast<std::size_t>(row_hyp[static_cast<std::size_t>(i)])]
                                              .detections) {
                (void)lw;
                parent_of[static_cast<std::size_t>(find(i))] = find(n_rows + j);
            }
        std::map<int, std::pair<std::vector<int>, std::vector<int>>> clusters;  // root -> (rows, meas)
        for (int i = 0; i < n_rows; ++i) clusters[find(i)].first.push_back(i);
        for (int j = 0; j < m; ++j) clusters[find(n_rows + j)].second.push_back(j);

        double base = parent.log_weight;
        struct ClusterSolutions {
            std::vector<int> rows, meas;
            std::vector<Assignment> options;
        };
        std::vector<ClusterSolutions> solved;
        bool feasible = true;
        for (auto& [root, members] : clusters) {
            auto& [rows, meas] = members;
            for (int j : meas) base += log_new[static_cast<std::size_t>(j)];
            if (rows.empty()) continue;
            const int nr = static_cast<int>(rows.size()), nm = static_cast<int>(meas.size());
            CostMatrix C = CostMatrix::Constant(nr, nm + nr, kForbidden);
            std::map<int, int> col_of;
            for (int c = 0; c < nm; ++c) col_of[meas[static_cast<std::size_t>(c)]] = c;
            for (int r = 0; r < nr; ++r) {
                const int i = rows[static_cast<std::size_t>(r)];
                const auto& L = lik[static_cast<std::size_t>(row_track[static_cast<std::size_t>(i)])]
                                   [static_cast<std::size_t>(row_hyp[static_cast<std::size_t>(i)])];
                for (const auto& [j, lw] : L.detections)
                    C(r, col_of.at(j)) = -(lw - log_new[static_cast<std::size_t>(j)]);
                C(r, nm + r) = -L.log_miss;
            }
            try {
                solved.push_back({rows, meas, murty_mbest(C, cfg.murty_M)});
            } catch (const InfeasibleAssignment&) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;

        std::vector<std::vector<double>> costs;
        for (const auto& cs : solved) {
            costs.emplace_back();
            for (const auto& a : cs.options) costs.back().push_back(a.cost);
        }
        for (const auto& choice : combine_mbest(costs, cfg.murty_M)) {
            GlobalHypothesis child;
            child.log_weight = base - choice.cost;
            child.assignment.assign(n_tracks + static_cast<std::size_t>(n_new), kNotPresent);
            std::vector<char> taken(static_cast<std::size_t>(m), 0);
            std::vector<int> row_meas(static_cast<std::size_t>(n_rows), -1);
            for (std::size_t c = 0; c < solved.size(); ++c) {
                const auto& cs = solved[c];
                const auto& a = cs.options[choice.picks[c]];
                const int nm = static_cast<int>(cs.meas.size());
                for (std::size_t r = 0; r < cs.rows.size(); ++r) {
                    const int col = a.row_to_col[r];
                    if (col < nm) {
                        const int j = cs.meas[static_cast<std::size_t>(col)];
                        row_meas[static_cast<std::size_t>(cs.rows[r])] = j;
                        taken[static_cast<std::size_t>(j)] = 1;
                    }
                }
            }
            // Rows outside every cluster with detections are plain misses.
            std::vector<int> row_of_track(n_tracks, -1);
            for (int i = 0; i < n_rows; ++i) row_of_track[static_cast<std::size_t>(row_track[static_cast<std::size_t>(i)])] = i;
            for (std::size_t t = 0; t < n_tracks; ++t) {
                const int h = parent.assignment[t];
                if (h == kNotPresent) continue;
                const int i = row_of_track[t];
                if (i < 0) {
                    // zero existence or zero detection probability: forced miss
                    child.log_weight += lik[t][static_cast<std::size_t>(h)].log_miss;
                    child.assignment[t] = builders[t].child(h, -1);
                    continue;
                }
                child.assignment[t] = builders[t].child(h, row_meas[static_cast<std::size_t>(i)]);
            }
            for (int j = 0; j < m; ++j) {
                const int nt = new_track_index[static_cast<std::size_t>(j)];
                if (nt >= 0 && !taken[static_cast<std::size_t>(j)]) child.assignment[n_tracks + static_cast<std::size_t>(nt)] = 0;
            }
            children.push_back(std::move(child));
        }
    }

    PmbmPosterior next;
    next.undetected = std::move(post.undetected);
    for (auto& w : next.undetected.mixture.weights) w *= (1.0 - pd);
    for (auto& b : builders) next.tracks.push_back(std::move(b.out));
    for (int j = 0; j < m; ++j)
        if (new_bernoulli[static_cast<std::size_t>(j)])
            next.tracks.push_back({s.next_label++, {*new_bernoulli[static_cast<std::size_t>(j)]}});

    if (children.empty()) throw std::runtime_error("PMBM update: no feasible data association");
    normalize(children);
    next.globals = prune_and_cap(std::move(children), cfg.prune_log_weight, cfg.max_globals);
    collect_garbage(next, cfg.track_min_existence);
    reduce_poisson(next.undetected, cfg.poisson_min_weight, cfg.poisson_max_components);
    s.posterior = std::move(next);
    return s;
}

/// Estimator 1: Bernoulli components with existence at or above the
/// threshold under the most likely global hypothesis, projected to 2D with
/// the unscented transform.
[[nodiscard]] inline std::vector<TrackedEstimate> estimate(const PmbmPosterior& post, const FilterConfig& cfg,
                                                           const SpoModel& model) {
    std::vector<TrackedEstimate> out;
    if (post.globals.empty()) return out;
    std::size_t best = 0;
    for (std::size_t g = 1; g < post.globals.size(); ++g)
        if (post.globals[g].log_weight > post.globals[best].log_weight) best = g;
    const auto& a = post.globals[best].assignment;
    for (std::size_t t = 0; t < post.tracks.size(); ++t) {
        if (a[t] == kNotPresent) continue;
        const auto& b = post.tracks[t].hypotheses[static_cast<std::size_t>(a[t])];
        if (b.existence < cfg.estimate_threshold) continue;
        const auto ut = unscented_transform<kStateDim, kMeasDim>(
            b.spatial, [&](const Vector8& x) { return model.measure(x); }, cfg.ut);
        out.push_back({post.tracks[t].label, b.existence, b.spatial, BBox2D::from_vec(ut.output.mean),
                       ut.output.cov});
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.label < r.label; });
    return out;
}

/// Predict (skipped on the first frame), update and estimate over a whole
/// sequence. Frame k of `detections` is labelled first_frame + k.
[[nodiscard]] inline TrajectorySet run_sequence(const FrameDetections& detections, const SpoModel& model,
                                                const FilterConfig& cfg, int first_frame = 1) {
    TrajectorySet out;
    out.first_frame = first_frame;
    out.num_frames = static_cast<int>(detections.size());
    auto state = initial_posterior(model.birth);
    for (std::size_t k = 0; k < detections.size(); ++k) {
        if (k > 0) state = predict(std::move(state), model);
        state = update(std::move(state), detections[k], model, cfg);
        for (const auto& e : estimate(state.posterior, cfg, model))
            out.add(e.label, first_frame + static_cast<int>(k), e.bbox);
    }
    return out;
}

}  // namespace spotrack
