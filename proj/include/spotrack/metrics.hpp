#pragma once

#include "spotrack/assignment.hpp"
#include "spotrack/bbox.hpp"
#include "spotrack/lp.hpp"
#include "spotrack/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spotrack {

/// Base distance between two boxes: 1 - IoU.
[[nodiscard]] inline double iou_distance(const BBox2D& a, const BBox2D& b) { return 1.0 - iou(a, b); }

// ---------------------------------------------------------------------------
// GOSPA

struct GospaResult {
    double value = 0.0;
    double localization = 0.0;  // sum of d^p over properly assigned pairs
    double missed = 0.0;        // unassigned or cut elements of Y
    double false_count = 0.0;   // unassigned or cut elements of X
};

/// GOSPA between single-frame box sets with d = min(1 - IoU, c).
[[nodiscard]] inline GospaResult gospa(const std::vector<BBox2D>& X, const std::vector<BBox2D>& Y, double c = 0.5,
                                       double p = 1.8, double alpha = 2.0) {
    if (!(c > 0.0) || !(p >= 1.0)) throw std::invalid_argument("gospa: requires c > 0 and p >= 1");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("gospa: alpha must lie in (0, 2]");
    const bool x_rows = X.size() <= Y.size();
    const auto& small = x_rows ? X : Y;
    const auto& large = x_rows ? Y : X;
    const double cp = std::pow(c, p);

    GospaResult r;
    double assigned_cost = 0.0;
    std::size_t matched = 0;
    if (!small.empty()) {
        CostMatrix C(static_cast<Eigen::Index>(small.size()), static_cast<Eigen::Index>(large.size()));
        for (std::size_t i = 0; i < small.size(); ++i)
            for (std::size_t j = 0; j < large.size(); ++j)
                C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::pow(std::min(iou_distance(small[i], large[j]), c), p);
        const Assignment a = solve(C);
        assigned_cost = a.cost;
        for (std::size_t i = 0; i < small.size(); ++i) {
            const double d = iou_distance(small[i], large[static_cast<std::size_t>(a.row_to_col[i])]);
            if (d < c) {
                ++matched;
                r.localization += std::pow(d, p);
            }
        }
    }
    const double unpaired = static_cast<double>(large.size() - small.size());
    r.value = std::pow(std::max(assigned_cost + cp / alpha * unpaired, 0.0), 1.0 / p);
    r.missed = static_cast<double>(Y.size() - matched);
    r.false_count = static_cast<double>(X.size() - matched);
    return r;
}

// ---------------------------------------------------------------------------
// Trajectory metric

struct TgospaParams {
    double cutoff = 0.5;
    double exponent = 1.8;
    double switch_penalty = 0.5 * std::pow(10.0, 1.0 / 1.8);

    /// Parameters with the switch penalty tied to the cutoff as c * 10^(1/p).
    static TgospaParams with(double c, double p) { return {c, p, c * std::pow(10.0, 1.0 / p)}; }

    void validate() const {
        if (!(cutoff > 0.0)) throw std::invalid_argument("tgospa: cutoff must be positive");
        if (!(exponent >= 1.0)) throw std::invalid_argument("tgospa: exponent must be at least 1");
        if (!(switch_penalty > 0.0)) throw std::invalid_argument("tgospa: switch penalty must be positive");
    }
};

struct TgospaReport {
    double total = 0.0;         // metric value, p-th root of the optimal LP objective
    double localization = 0.0;  // sum of d^p over properly assigned boxes
    double tp = 0.0;
    double fn = 0.0;
    double fp = 0.0;
    double switches = 0.0;  // half-integer at integral solutions, may be fractional
    double switch_cost = 0.0;
    std::size_t lp_variables = 0;
};

namespace detail {

struct PairCell {
    int frame;
    double gain;
    double dist_p;
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

inline double snap_unit(double v) {
    if (std::abs(v) < 1e-6) return 0.0;
    if (std::abs(v - 1.0) < 1e-6) return 1.0;
    return v;
}

}  // namespace detail

/// Trajectory metric between estimates A and ground truth B through its LP
/// relaxation. Written in gain form: pairing estimate i with truth j in frame
/// k earns c^p - min(d, c)^p, and changing a pairing weight costs gamma^p/2
/// per unit. Pairs that never earn anything are left out, and the problem
/// splits into connected components of the pairing graph. Each component is
/// solved only over its active frame span, with runs of frames that have
/// identical gains collapsed into one weighted block; each of these steps
/// preserves the optimal value.
[[nodiscard]] inline TgospaReport tgospa(const TrajectorySet& A, const TrajectorySet& B, const TgospaParams& params = {},
                                         const lp::Options& lp_options = {}) {
    params.validate();
    if (A.first_frame != B.first_frame || A.num_frames != B.num_frames)
        throw std::invalid_argument("tgospa: trajectory sets cover different frame ranges");
    const double c = params.cutoff;
    const double p = params.exponent;
    const double cp = std::pow(c, p);
    const double gp = std::pow(params.switch_penalty, p);

    std::vector<const Trajectory*> xs, ys;
    for (const auto& [id, t] : A.tracks) xs.push_back(&t);
    for (const auto& [id, t] : B.tracks) ys.push_back(&t);
    const int nx = static_cast<int>(xs.size());
    const int ny = static_cast<int>(ys.size());

    // Per frame, which trajectories are present.
    std::vector<std::vector<std::pair<int, const BBox2D*>>> fx(static_cast<std::size_t>(std::max(A.num_frames, 0))),
        fy(fx.size());
    auto fill = [](const TrajectorySet& set, const std::vector<const Trajectory*>& ts, auto& per_frame) {
        for (std::size_t i = 0; i < ts.size(); ++i)
            for (const auto& [k, b] : *ts[i]) {
                if (!set.in_range(k)) throw std::out_of_range("tgospa: box outside the trajectory set's frame range");
                per_frame[static_cast<std::size_t>(k - set.first_frame)].emplace_back(static_cast<int>(i), &b);
            }
    };
    fill(A, xs, fx);
    fill(B, ys, fy);

    std::map<std::pair<int, int>, std::vector<detail::PairCell>> cells;
    for (std::size_t k = 0; k < fx.size(); ++k)
        for (const auto& [i, bx] : fx[k])
            for (const auto& [j, by] : fy[k]) {
                const double d = std::min(iou_distance(*bx, *by), c);
                const double dp = std::pow(d, p);
                const double g = cp - dp;
                if (g > 0.0) cells[{i, j}].push_back({static_cast<int>(k), g, dp});
            }

    detail::UnionFind uf(nx + ny);
    for (const auto& [ij, v] : cells) uf.unite(ij.first, nx + ij.second);
    std::map<int, std::vector<std::pair<int, int>>> components;
    for (const auto& [ij, v] : cells) components[uf.find(ij.first)].push_back(ij);

    TgospaReport r;
    for (const auto& [root, pairs] : components) {
        const std::size_t P = pairs.size();
        int k0 = std::numeric_limits<int>::max(), k1 = -1;
        for (const auto& ij : pairs)
            for (const auto& cell : cells.at(ij)) {
                k0 = std::min(k0, cell.frame);
                k1 = std::max(k1, cell.frame);
            }
        const int F = k1 - k0 + 1;
        std::vector<std::vector<double>> gain(static_cast<std::size_t>(F), std::vector<double>(P, 0.0));
        std::vector<std::vector<double>> dist(static_cast<std::size_t>(F), std::vector<double>(P, 0.0));
        for (std::size_t q = 0; q < P; ++q)
            for (const auto& cell : cells.at(pairs[q])) {
                gain[static_cast<std::size_t>(cell.frame - k0)][q] = cell.gain;
                dist[static_cast<std::size_t>(cell.frame - k0)][q] = cell.dist_p;
            }
        // Blocks of consecutive frames with identical gains.
        std::vector<std::size_t> block_frame;
        std::vector<double> block_mult;
        for (int f = 0; f < F; ++f) {
            if (!block_frame.empty() && gain[block_frame.back()] == gain[static_cast<std::size_t>(f)]) {
                block_mult.back() += 1.0;
            } else {
                block_frame.push_back(static_cast<std::size_t>(f));
                block_mult.push_back(1.0);
            }
        }
        const std::size_t nb = block_frame.size();

        std::map<int, std::vector<std::size_t>> row_pairs, col_pairs;
        for (std::size_t q = 0; q < P; ++q) {
            row_pairs[pairs[q].first].push_back(q);
            col_pairs[pairs[q].second].push_back(q);
        }

        lp::Problem prob;
        std::vector<int> w(nb * P);
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t q = 0; q < P; ++q)
                w[b * P + q] = prob.add_var(block_mult[b] * gain[block_frame[b]][q]);
        for (std::size_t b = 0; b < nb; ++b) {
            for (const auto* group : {&row_pairs, &col_pairs})
                for (const auto& [node, qs] : *group) {
                    const int row = prob.add_row(1.0);
                    for (std::size_t q : qs) prob.set(row, w[b * P + q], 1.0);
                }
        }
        for (std::size_t b = 0; b + 1 < nb; ++b)
            for (std::size_t q = 0; q < P; ++q) {
                const int e = prob.add_var(-0.5 * gp);
                const int a = w[b * P + q], a2 = w[(b + 1) * P + q];
                int row = prob.add_row(0.0);
                prob.set(row, a, 1.0);
                prob.set(row, a2, -1.0);
                prob.set(row, e, -1.0);
                row = prob.add_row(0.0);
                prob.set(row, a2, 1.0);
                prob.set(row, a, -1.0);
                prob.set(row, e, -1.0);
            }
        r.lp_variables += static_cast<std::size_t>(prob.num_vars);
        const lp::Solution sol = lp::solve(prob, lp_options);

        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t q = 0; q < P; ++q) {
                const double v = detail::snap_unit(sol.x[static_cast<std::size_t>(w[b * P + q])]);
                if (gain[block_frame[b]][q] > 0.0) {
                    r.tp += block_mult[b] * v;
                    r.localization += block_mult[b] * v * dist[block_frame[b]][q];
                }
                if (b + 1 < nb) {
                    const double v2 = detail::snap_unit(sol.x[static_cast<std::size_t>(w[(b + 1) * P + q])]);
                    r.switches += 0.5 * std::abs(v - v2);
                }
            }
    }

    r.fn = static_cast<double>(B.box_count()) - r.tp;
    r.fp = static_cast<double>(A.box_count()) - r.tp;
    r.switch_cost = gp * r.switches;
    const double objective = r.localization + 0.5 * cp * (r.fn + r.fp) + r.switch_cost;
    r.total = std::pow(std::max(objective, 0.0), 1.0 / p);
    return r;
}

/// |sum_k |A_k| - sum_k |B_k||.
[[nodiscard]] inline std::size_t cardinality_mismatch(const TrajectorySet& A, const TrajectorySet& B) {
    if (A.first_frame != B.first_frame || A.num_frames != B.num_frames)
        throw std::invalid_argument("cardinality_mismatch: trajectory sets cover different frame ranges");
    const std::size_t a = A.box_count(), b = B.box_count();
    return a > b ? a - b : b - a;
}

}  // namespace spotrack
