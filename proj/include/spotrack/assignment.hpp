#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

namespace spotrack {

/// Rows are assigned to distinct columns. +infinity marks a forbidden pair.
using CostMatrix = Eigen::MatrixXd;

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

class InfeasibleAssignment : public std::runtime_error {
public:
    InfeasibleAssignment() : std::runtime_error("infeasible assignment") {}
};

namespace detail {

struct HungarianResult {
    std::vector<int> row_to_col;
    std::vector<double> u;  // row potentials
    std::vector<double> v;  // column potentials, 0 on unmatched columns
};

/// Shortest augmenting path Hungarian method for rows <= cols.
inline HungarianResult hungarian(const CostMatrix& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double c = a(i0 - 1, j - 1);
                if (c < inf) {
                    const double cur = c - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (j1 < 0) throw InfeasibleAssignment();
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else if (minv[j] < inf) {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    HungarianResult r;
    r.row_to_col.assign(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) r.row_to_col[p[j] - 1] = j - 1;
    r.u.assign(u.begin() + 1, u.end());
    r.v.assign(v.begin() + 1, v.end());
    return r;
}

/// Kuhn's augmenting-path matching restricted to `allowed` edges; returns the
/// number of `left` vertices that can be matched.
inline int max_matching(const std::vector<std::vector<int>>& adj, const std::vector<int>& left, int n_right,
                        const std::vector<char>& right_ok) {
    std::vector<int> match(n_right, -1);
    int count = 0;
    std::vector<char> seen;
    std::function<bool(int)> augment = [&](int l) {
        for (int r : adj[l]) {
            if (!right_ok[r] || seen[r]) continue;
            seen[r] = 1;
            if (match[r] < 0 || augment(match[r])) {
                match[r] = l;
                return true;
            }
        }
        return false;
    };
    for (int l : left) {
        seen.assign(n_right, 0);
        if (augment(l)) ++count;
    }
    return count;
}

/// Among all optimal assignments (edges tight under the dual potentials,
/// covering every column with a negative potential) picks the
/// lexicographically smallest row->column vector.
inline std::vector<int> lexicographic_optimum(const CostMatrix& a, const HungarianResult& h) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (std::isfinite(a(i, j))) scale = std::max(scale, std::abs(a(i, j)));
    const double tol = 1e-10 * scale * (n + 1);

    std::vector<std::vector<int>> row_adj(n), col_adj(m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (std::isfinite(a(i, j)) && a(i, j) - h.u[i] - h.v[j] <= tol) {
                row_adj[i].push_back(j);
                col_adj[j].push_back(i);
            }
    std::vector<char> required(m, 0);
    for (int j = 0; j < m; ++j) required[j] = h.v[j] < -tol;
    // The Hungarian matching itself must be admissible; otherwise fall back.
    for (int i = 0; i < n; ++i)
        if (std::find(row_adj[i].begin(), row_adj[i].end(), h.row_to_col[i]) == row_adj[i].end())
            return h.row_to_col;

    std::vector<char> col_free(m, 1);
    std::vector<int> out(n, -1);
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int j : row_adj[i]) {
            if (!col_free[j]) continue;
            col_free[j] = 0;
            std::vector<int> rows_left, req_left;
            for (int r = i + 1; r < n; ++r) rows_left.push_back(r);
            for (int c = 0; c < m; ++c)
                if (col_free[c] && required[c]) req_left.push_back(c);
            const bool rows_ok =
                max_matching(row_adj, rows_left, m, col_free) == static_cast<int>(rows_left.size());
            bool cols_ok = true;
            if (rows_ok && !req_left.empty()) {
                std::vector<char> row_ok(n, 0);
                for (int r : rows_left) row_ok[r] = 1;
                cols_ok = max_matching(col_adj, req_left, n, row_ok) == static_cast<int>(req_left.size());
            }
            if (rows_ok && cols_ok) {
                out[i] = j;
                placed = true;
                break;
            }
            col_free[j] = 1;
        }
        if (!placed) return h.row_to_col;  // numerical trouble; keep the solver's answer
    }
    return out;
}

inline double assignment_cost(const CostMatrix& a, const std::vector<int>& r2c) {
    double s = 0.0;
    for (std::size_t i = 0; i < r2c.size(); ++i) s += a(static_cast<Eigen::Index>(i), r2c[i]);
    return s;
}

}  // namespace detail

/// Minimum-cost injective row->column map. Ties are broken towards the
/// lexicographically smallest row->column vector.
[[nodiscard]] inline Assignment solve(const CostMatrix& cost) {
    if (cost.rows() == 0) return {{}, 0.0};
    if (cost.rows() > cost.cols()) throw InfeasibleAssignment();
    for (Eigen::Index i = 0; i < cost.rows(); ++i)
        for (Eigen::Index j = 0; j < cost.cols(); ++j)
            if (std::isnan(cost(i, j)) || cost(i, j) == -kForbidden)
                throw std::invalid_argument("cost matrix entries must be finite or +infinity");
    const auto h = detail::hungarian(cost);
    Assignment a;
    a.row_to_col = detail::lexicographic_optimum(cost, h);
    a.cost = detail::assignment_cost(cost, a.row_to_col);
    if (!std::isfinite(a.cost)) throw InfeasibleAssignment();
    return a;
}

namespace detail {

struct MurtyNode {
    CostMatrix cost;
    Assignment best;
    int fixed_rows = 0;  // rows [0, fixed_rows) are forced to best.row_to_col
};

struct MurtyOrder {
    bool operator()(const MurtyNode* a, const MurtyNode* b) const {
        if (a->best.cost != b->best.cost) return a->best.cost > b->best.cost;
        return a->best.row_to_col > b->best.row_to_col;
    }
};

}  // namespace detail

/// Murty's algorithm: the min(M, #feasible) cheapest distinct assignments in
/// nondecreasing cost order. Throws if no assignment is feasible.
[[nodiscard]] inline std::vector<Assignment> murty_mbest(const CostMatrix& cost, std::size_t M) {
    if (M == 0) throw std::invalid_argument("murty_mbest: M must be positive");
    std::vector<Assignment> out;
    std::vector<std::unique_ptr<detail::MurtyNode>> storage;
    std::priority_queue<detail::MurtyNode*, std::vector<detail::MurtyNode*>, detail::MurtyOrder> queue;

    storage.push_back(std::make_unique<detail::MurtyNode>(detail::MurtyNode{cost, solve(cost), 0}));
    queue.push(storage.back().get());
    const int n = static_cast<int>(cost.rows());

    while (!queue.empty() && out.size() < M) {
        detail::MurtyNode* node = queue.top();
        queue.pop();
        out.push_back(node->best);
        if (out.size() == M) break;
        // Partition the node's solution space: child k keeps rows < k fixed to
        // the current solution and forbids row k's current column.
        CostMatrix base = node->cost;
        for (int k = node->fixed_rows; k < n; ++k) {
            const int col = node->best.row_to_col[k];
            CostMatrix child = base;
            child(k, col) = kForbidden;
            try {
                Assignment a = solve(child);
                a.cost = detail::assignment_cost(cost, a.row_to_col);
                storage.push_back(std::make_unique<detail::MurtyNode>(detail::MurtyNode{std::move(child), a, k}));
                queue.push(storage.back().get());
            } catch (const InfeasibleAssignment&) {
            }
            // Fix row k to its current column for the following children.
            for (int j = 0; j < base.cols(); ++j)
                if (j != col) base(k, j) = kForbidden;
            for (int i = 0; i < n; ++i)
                if (i != k) base(i, col) = kForbidden;
        }
    }
    return out;
}

/// One joint solution made of per-problem choices.
struct CombinedChoice {
    std::vector<std::size_t> picks;  // index into each list
    double cost = 0.0;
};

/// The M cheapest ways to pick one entry from each of several independent
/// cost lists (each sorted nondecreasing).
[[nodiscard]] inline std::vector<CombinedChoice> combine_mbest(const std::vector<std::vector<double>>& lists,
                                                               std::size_t M) {
    std::vector<CombinedChoice> out;
    if (M == 0) return out;
    for (const auto& l : lists)
        if (l.empty()) return out;
    using Entry = std::pair<double, std::vector<std::size_t>>;
    auto greater = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> queue(greater);
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> start(lists.size(), 0);
    double c0 = 0.0;
    for (const auto& l : lists) c0 += l[0];
    queue.emplace(c0, start);
    seen.insert(start);
    while (!queue.empty() && out.size() < M) {
        auto [c, picks] = queue.top();
        queue.pop();
        out.push_back({picks, c});
        for (std::size_t k = 0; k < lists.size(); ++k) {
            if (picks[k] + 1 >= lists[k].size()) continue;
            auto next = picks;
            ++next[k];
            if (!seen.insert(next).second) continue;
            queue.emplace(c - lists[k][picks[k]] + lists[k][next[k]], std::move(next));
        }
    }
    return out;
}

}  // namespace spotrack
