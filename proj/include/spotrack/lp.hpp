#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spotrack::lp {

/// maximize  objective . x   subject to  A x <= rhs,  x >= 0,  rhs >= 0.
/// With a nonnegative right-hand side the origin is feasible, so the
/// problem is either bounded-feasible or unbounded.
struct Problem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<Eigen::Triplet<double>> entries;  // (row, col, value)
    std::vector<double> rhs;

    int add_row(double b) {
        rhs.push_back(b);
        return static_cast<int>(rhs.size()) - 1;
    }
    int add_var(double c) {
        objective.push_back(c);
        return num_vars++;
    }
    void set(int row, int col, double v) { entries.emplace_back(row, col, v); }
    [[nodiscard]] int num_rows() const { return static_cast<int>(rhs.size()); }
};

enum class Method { Simplex, InteriorPoint };

struct Solution {
    std::vector<double> x;
    double objective = 0.0;
    Method method = Method::Simplex;
    int iterations = 0;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    /// Dense tableaux up to this many entries use the simplex method.
    double max_tableau_entries = 2e5;
    int max_iterations = 1000000;
    double ipm_tolerance = 1e-11;
    int ipm_max_iterations = 300;
};

// ---------------------------------------------------------------------------

/// Primal simplex on a dense tableau, slack basis start. Dantzig pricing with
/// a switch to Bland's rule while pivots stay degenerate.
[[nodiscard]] inline Solution solve_simplex(const Problem& p, const Options& opt = {}) {
    const int m = p.num_rows();
    const int n = p.num_vars;
    const int cols = n + m + 1;  // structural, slack, rhs
    for (double b : p.rhs)
        if (!(b >= 0.0)) throw std::invalid_argument("lp: right-hand side must be nonnegative");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, cols);
    for (const auto& e : p.entries) T(e.row(), e.col()) += e.value();
    for (int i = 0; i < m; ++i) {
        T(i, n + i) = 1.0;
        T(i, cols - 1) = p.rhs[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < n; ++j) T(m, j) = -p.objective[static_cast<std::size_t>(j)];
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    double scale = 1.0;
    for (double c : p.objective) scale = std::max(scale, std::abs(c));
    const double eps_cost = 1e-11 * scale;
    constexpr double eps_pivot = 1e-11;
    int degenerate_run = 0;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const bool bland = degenerate_run > 50;
        int enter = -1;
        double best = -eps_cost;
        for (int j = 0; j < n + m; ++j) {
            const double rc = T(m, j);
            if (bland) {
                if (rc < -eps_cost) {
                    enter = j;
                    break;
                }
            } else if (rc < best) {
                best = rc;
                enter = j;
            }
        }
        if (enter < 0) break;
        int leave = -1;
        double ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double a = T(i, enter);
            if (a <= eps_pivot) continue;
            const double r = T(i, cols - 1) / a;
            if (r < ratio - 1e-12 ||
                (r <= ratio + 1e-12 && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                ratio = std::min(ratio, r);
                leave = i;
            }
        }
        if (leave < 0) throw SolverError("lp: problem is unbounded");
        degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;

        const double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    if (it == opt.max_iterations) throw SolverError("lp: simplex iteration limit reached");

    Solution s;
    s.method = Method::Simplex;
    s.iterations = it;
    s.x.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] < n)
            s.x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = std::max(T(i, cols - 1), 0.0);
    for (int j = 0; j < n; ++j) s.objective += p.objective[static_cast<std::size_t>(j)] * s.x[static_cast<std::size_t>(j)];
    return s;
}

/// Mehrotra predictor-corrector interior point method on the standard form
/// min -c.x  s.t.  [A I] (x, s) = b,  (x, s) >= 0, with sparse normal
/// equations.
[[nodiscard]] inline Solution solve_interior_point(const Problem& p, const Options& opt = {}) {
    using SpMat = Eigen::SparseMatrix<double>;
    using Vec = Eigen::VectorXd;
    const int m = p.num_rows();
    const int n = p.num_vars;
    const int N = n + m;
    if (m == 0) {
        for (double c : p.objective)
            if (c > 0.0) throw SolverError("lp: problem is unbounded");
        Solution s;
        s.method = Method::InteriorPoint;
        s.x.assign(static_cast<std::size_t>(n), 0.0);
        return s;
    }

    std::vector<Eigen::Triplet<double>> trip = p.entries;
    for (int i = 0; i < m; ++i) trip.emplace_back(i, n + i, 1.0);
    SpMat A(m, N);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    const SpMat At = A.transpose();
    Vec b = Eigen::Map<const Vec>(p.rhs.data(), m);
    Vec c = Vec::Zero(N);
    for (int j = 0; j < n; ++j) c[j] = -p.objective[static_cast<std::size_t>(j)];

    // Near convergence the scaling d spans many orders of magnitude, so a
    // ridge proportional to the largest diagonal entry keeps the factorization
    // alive and a few refinement steps against the unridged matrix recover
    // the accuracy it costs.
    SpMat M0;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool analyzed = false;
    auto factor_normal = [&](const Vec& d) {
        M0 = SpMat(A * d.asDiagonal()) * At;
        const double diag = std::max(M0.diagonal().cwiseAbs().maxCoeff(), 1.0);
        for (double ridge = 1e-13 * diag; ridge < 1e-3 * diag; ridge *= 100.0) {
            SpMat M = M0;
            for (int i = 0; i < m; ++i) M.coeffRef(i, i) += ridge;
            if (!analyzed) ldlt.analyzePattern(M);
            analyzed = true;
            ldlt.factorize(M);
            if (ldlt.info() == Eigen::Success) return;
        }
        throw SolverError("lp: normal equations factorization failed");
    };
    auto solve_normal = [&](const Vec& rhs) {
        Vec v = ldlt.solve(rhs);
        for (int k = 0; k < 3; ++k) v += ldlt.solve(rhs - M0 * v);
        return v;
    };

    // Mehrotra starting point.
    factor_normal(Vec::Ones(N));
    Vec x = At * solve_normal(b);
    Vec y = solve_normal(A * c);
    Vec z = c - At * y;
    double dx = std::max(-1.5 * x.minCoeff(), 0.0);
    double dz = std::max(-1.5 * z.minCoeff(), 0.0);
    x.array() += dx;
    z.array() += dz;
    const double xz = x.dot(z);
    dx = 0.5 * xz / std::max(z.sum(), 1e-300);
    dz = 0.5 * xz / std::max(x.sum(), 1e-300);
    x.array() += dx + 1e-8;
    z.array() += dz + 1e-8;

    const double b_norm = 1.0 + b.norm();
    const double c_norm = 1.0 + c.norm();
    int it = 0;
    for (; it < opt.ipm_max_iterations; ++it) {
        const Vec rp = b - A * x;
        const Vec rd = c - At * y - z;
        const double mu = x.dot(z) / N;
        const double pobj = c.dot(x), dobj = b.dot(y);
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        if (rp.norm() / b_norm < opt.ipm_tolerance && rd.norm() / c_norm < opt.ipm_tolerance &&
            gap < opt.ipm_tolerance)
            break;
        if (!std::isfinite(mu)) throw SolverError("lp: interior point diverged");

        const Vec d = x.cwiseQuotient(z);
        factor_normal(d);
        auto direction = [&](const Vec& rc) {
            // rc = complementarity target residual: sigma mu e - X Z e - dX dZ e
            const Vec rhs_y = rp + A * (d.cwiseProduct(rd) - rc.cwiseQuotient(z));
            Vec dy = solve_normal(rhs_y);
            Vec dzz = rd - At * dy;
            Vec dxx = (rc - x.cwiseProduct(dzz)).cwiseQuotient(z);
            return std::tuple<Vec, Vec, Vec>(dxx, dy, dzz);
        };
        auto step_length = [](const Vec& v, const Vec& dv) {
            double a = 1.0;
            for (Eigen::Index i = 0; i < v.size(); ++i)
                if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
            return a;
        };

        Vec rc = -x.cwiseProduct(z);
        auto [dx_a, dy_a, dz_a] = direction(rc);
        const double ap = step_length(x, dx_a), ad = step_length(z, dz_a);
        const double mu_aff = (x + ap * dx_a).dot(z + ad * dz_a) / N;
        const double sigma = std::min(1.0, std::pow(mu_aff / mu, 3));
        rc = (sigma * mu) - x.cwiseProduct(z).array() - dx_a.cwiseProduct(dz_a).array();
        auto [dxx, dyy, dzz] = direction(rc);
        const double eta = std::clamp(1.0 - 10.0 * mu, 0.9, 0.9995);
        const double sp = std::min(1.0, eta * step_length(x, dxx));
        const double sd = std::min(1.0, eta * step_length(z, dzz));
        x += sp * dxx;
        y += sd * dyy;
        z += sd * dzz;
    }
    if (it == opt.ipm_max_iterations) throw SolverError("lp: interior point did not converge");

    Solution s;
    s.method = Method::InteriorPoint;
    s.iterations = it;
    s.x.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        s.x[static_cast<std::size_t>(j)] = std::max(x[j], 0.0);
        s.objective += p.objective[static_cast<std::size_t>(j)] * s.x[static_cast<std::size_t>(j)];
    }
    return s;
}

/// Simplex for small problems, interior point beyond the dense tableau limit.
[[nodiscard]] inline Solution solve(const Problem& p, const Options& opt = {}) {
    const double entries = static_cast<double>(p.num_rows() + 1) * (p.num_vars + p.num_rows() + 1);
    if (entries <= opt.max_tableau_entries) return solve_simplex(p, opt);
    return solve_interior_point(p, opt);
}

}  // namespace spotrack::lp
