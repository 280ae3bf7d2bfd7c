// Acceptance checks. Each criterion prints exactly one PASS or FAIL line.
//
//   acceptance --criterion N    run criterion N (1..9)
//   acceptance                  run all of them
//
// Criteria 1 to 3 need the MOT-17 training set; point SPOTRACK_DATASET_ROOT at
// the directory holding the MOT17-XX-FRCNN folders.

#include "oracles.hpp"
#include "test_util.hpp"

#include "spotrack/spotrack.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spotrack;
using namespace spotrack::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Collects failed checks; the first few are kept for the report line.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        ++failed_;
        if (failed_ <= 3) first_ += (first_.empty() ? "" : "; ") + what;
    }
    [[nodiscard]] bool ok() const { return failed_ == 0; }
    [[nodiscard]] Outcome outcome(const std::string& summary) const {
        std::ostringstream s;
        s << summary << " (" << total_ - failed_ << "/" << total_ << " checks)";
        if (failed_ > 0) s << ": " << first_;
        return {ok(), s.str()};
    }

private:
    std::size_t total_ = 0, failed_ = 0;
    std::string first_;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_rel(double value, double ref, double rel) { return std::abs(value - ref) <= rel * std::abs(ref); }

// ---------------------------------------------------------------------------
// Dataset criteria

struct DatasetOrError {
    std::vector<fs::path> sequences;
    std::string error;
};

DatasetOrError find_dataset() {
    const char* env = std::getenv("SPOTRACK_DATASET_ROOT");
    if (!env || !*env) return {{}, "dataset not found (SPOTRACK_DATASET_ROOT is not set)"};
    try {
        auto seqs = list_sequences(env, "FRCNN");
        if (seqs.empty()) return {{}, std::string("dataset not found (no *-FRCNN sequences in ") + env + ")"};
        return {seqs, ""};
    } catch (const std::exception& e) {
        return {{}, std::string("dataset not found (") + e.what() + ")"};
    }
}

std::string base_name(const fs::path& p) { return std::string(sequence_base_name(p.filename().string())); }

struct PopulationRowRef {
    double mean, var, L, eta;
};

const std::map<std::string, PopulationRowRef> kPopulationTable = {
    {"MOT17-02", {30.968, 14.281, 9.990, 2.000}},  {"MOT17-04", {45.292, 10.680, 19.010, 1.171}},
    {"MOT17-05", {8.264, 4.599, 3.715, 2.124}},    {"MOT17-09", {10.143, 4.375, 6.827, 1.143}},
    {"MOT17-10", {19.632, 10.497, 7.508, 1.743}},  {"MOT17-11", {10.484, 4.822, 4.194, 1.933}},
    {"MOT17-13", {15.523, 73.831, 4.234, 2.933}},  {"entire", {21.124, 205.54, 7.481, 1.925}},
};

Outcome criterion_population() {
    const auto ds = find_dataset();
    if (!ds.error.empty()) return {false, ds.error};
    const auto t0 = std::chrono::steady_clock::now();
    LoadOptions lo;
    lo.detections = false;
    Checks checks;
    PopulationAccumulator all;
    auto compare = [&](const std::string& name, const PopulationStats& s) {
        const auto it = kPopulationTable.find(name);
        if (it == kPopulationTable.end()) return;
        const auto& ref = it->second;
        checks.expect(within_rel(s.mean_lifespan, ref.L, 0.02), name + " L " + fmt(s.mean_lifespan) + " vs " + fmt(ref.L));
        checks.expect(within_rel(s.birth_rate, ref.eta, 0.02), name + " eta " + fmt(s.birth_rate) + " vs " + fmt(ref.eta));
        checks.expect(within_rel(s.mean_count, ref.mean, 0.02),
                      name + " E[n] " + fmt(s.mean_count) + " vs " + fmt(ref.mean));
        checks.expect(within_rel(s.var_count, ref.var, 0.05),
                      name + " Var[n] " + fmt(s.var_count) + " vs " + fmt(ref.var));
    };
    for (const auto& dir : ds.sequences) {
        const auto data = load_sequence(dir, lo);
        compare(base_name(dir), lifespan_birth_stats(data.gt, data.meta.frame_rate));
        all.add(data.gt, data.meta.frame_rate);
    }
    const auto entire = all.result();
    compare("entire", entire);
    checks.expect(within_rel(entire.stationary_mean(), 14.396, 0.02),
                  "entire L*eta " + fmt(entire.stationary_mean()) + " vs 14.396");
    const double secs = seconds_since(t0);
    checks.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
    return checks.outcome(std::to_string(ds.sequences.size()) + " sequences, L=" + fmt(entire.mean_lifespan) +
                          " s, eta=" + fmt(entire.birth_rate) + ", " + fmt(secs, 3) + " s");
}

Outcome criterion_detection_stats() {
    const auto ds = find_dataset();
    if (!ds.error.empty()) return {false, ds.error};
    const auto t0 = std::chrono::steady_clock::now();
    DetectionStatsAccumulator acc;
    for (const auto& dir : ds.sequences) {
        const auto data = load_sequence(dir);
        const auto gt = gt_frames(data.gt_rows, data.meta.frame_count);
        acc.add(gt.boxes, data.detections, match_frames(gt.boxes, data.detections), noise_gamma(data.meta.camera()));
    }
    const auto s = acc.result();
    Checks checks;
    checks.expect(std::abs(s.detection_probability - 0.529) <= 0.03, "P_D " + fmt(s.detection_probability));
    checks.expect(std::abs(s.clutter_rate - 1.552) <= 0.15, "lambda " + fmt(s.clutter_rate));
    const double ref[4] = {2.029e-5, 3.051e-5, 4.880e-5, 2.032e-5};
    for (int i = 0; i < 4; ++i) {
        const double v = s.noise_shape(i, i);
        checks.expect(v >= ref[i] / 1.5 && v <= ref[i] * 1.5,
                      "R(" + std::to_string(i) + "," + std::to_string(i) + ")/gamma^2 " + fmt(v) + " vs " + fmt(ref[i]));
    }
    const double secs = seconds_since(t0);
    checks.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
    return checks.outcome("P_D=" + fmt(s.detection_probability) + ", lambda=" + fmt(s.clutter_rate) + ", " +
                          fmt(secs, 3) + " s");
}

struct TrackingRowRef {
    double tp, fn;
};

const std::map<std::string, TrackingRowRef> kTrackingTable = {
    {"MOT17-02", {6553, 12028}}, {"MOT17-04", {26996, 20561}}, {"MOT17-05", {3318, 3599}},
    {"MOT17-09", {3145, 2180}},  {"MOT17-10", {7025, 5814}},   {"MOT17-11", {5632, 3840}},
    {"MOT17-13", {5306, 6336}},
};

Outcome criterion_tracking() {
    const auto ds = find_dataset();
    if (!ds.error.empty()) return {false, ds.error};
    const AppConfig cfg;
    Checks checks;
    int lower_mismatch = 0, higher_tp = 0, evaluated = 0;
    for (const auto& dir : ds.sequences) {
        const std::string name = base_name(dir);
        const auto ref = kTrackingTable.find(name);
        if (ref == kTrackingTable.end()) continue;
        const auto data = load_sequence(dir);
        const auto t0 = std::chrono::steady_clock::now();
        const auto cam = cfg.camera(data.meta.image_width, data.meta.image_height, data.meta.frame_rate);
        const auto pmbm = run_sequence(data.detections, SpoModel::build(cfg.model, cam), cfg.filter);
        const double secs = seconds_since(t0);
        const auto sort = sort_track(data.detections, cfg.sort);
        const auto rp = tgospa(pmbm, data.gt, cfg.tgospa);
        const auto rs = tgospa(sort, data.gt, cfg.tgospa);
        ++evaluated;
        if (cardinality_mismatch(pmbm, data.gt) < cardinality_mismatch(sort, data.gt)) ++lower_mismatch;
        if (rp.tp > rs.tp) ++higher_tp;
        checks.expect(within_rel(rp.tp, ref->second.tp, 0.15), name + " TP " + fmt(rp.tp, 6));
        checks.expect(within_rel(rp.fn, ref->second.fn, 0.15), name + " FN " + fmt(rp.fn, 6));
        checks.expect(secs < 300.0, name + " runtime " + fmt(secs) + " s");
    }
    checks.expect(evaluated == 7, "found " + std::to_string(evaluated) + " of 7 sequences");
    checks.expect(lower_mismatch >= 5, "lower cardinality mismatch on " + std::to_string(lower_mismatch) + "/7");
    checks.expect(higher_tp >= 5, "higher TP on " + std::to_string(higher_tp) + "/7");
    return checks.outcome("mismatch better on " + std::to_string(lower_mismatch) + ", TP better on " +
                          std::to_string(higher_tp));
}

// ---------------------------------------------------------------------------
// Synthetic criteria

Outcome criterion_degenerate() {
    const auto r = compare_with_ukf_chain(500, 2024);
    Checks checks;
    checks.expect(r.frames_with_one_estimate == 500,
                  "one estimate in " + std::to_string(r.frames_with_one_estimate) + "/500 frames");
    checks.expect(r.max_mean_error <= 1e-9, "mean error " + fmt(r.max_mean_error));
    checks.expect(r.max_cov_error <= 1e-9, "covariance error " + fmt(r.max_cov_error));
    return checks.outcome("max |mean diff| " + fmt(r.max_mean_error, 3) + ", max |cov diff| " +
                          fmt(r.max_cov_error, 3));
}

Outcome criterion_murty() {
    std::mt19937_64 rng(5);
    Checks checks;
    std::size_t infeasible = 0;
    for (int t = 0; t < 1000; ++t) {
        const int rows = 1 + static_cast<int>(rng() % 5);
        const int cols = rows + static_cast<int>(rng() % static_cast<std::uint64_t>(9 - rows));
        const double forbidden = (rng() % 4 == 0) ? 0.3 : 0.0;
        const auto c = random_cost_matrix(rng, rows, cols, forbidden);
        const auto all = brute_force_assignments(c);
        const std::string tag = "matrix " + std::to_string(t) + " (" + std::to_string(rows) + "x" +
                                std::to_string(cols) + ")";
        if (all.empty()) {
            ++infeasible;
            bool threw = false;
            try {
                (void)murty_mbest(c, 10);
            } catch (const InfeasibleAssignment&) {
                threw = true;
            }
            checks.expect(threw, tag + " infeasible but no exception");
            continue;
        }
        const auto m = murty_mbest(c, 10);
        const std::size_t expected = std::min<std::size_t>(10, all.size());
        checks.expect(m.size() == expected, tag + " returned " + std::to_string(m.size()));
        if (m.size() != expected) continue;
        std::vector<double> got;
        std::set<std::vector<int>> distinct;
        for (std::size_t k = 0; k < m.size(); ++k) {
            got.push_back(m[k].cost);
            distinct.insert(m[k].row_to_col);
            checks.expect(std::abs(detail::assignment_cost(c, m[k].row_to_col) - m[k].cost) <= 1e-9,
                          tag + " cost does not match its assignment");
        }
        std::sort(got.begin(), got.end());
        for (std::size_t k = 0; k < expected; ++k)
            checks.expect(std::abs(got[k] - all[k].cost) <= 1e-9, tag + " cost " + std::to_string(k));
        checks.expect(distinct.size() == m.size(), tag + " repeats an assignment");
    }
    return checks.outcome("1000 matrices, " + std::to_string(infeasible) + " infeasible");
}

Outcome criterion_metric() {
    std::mt19937_64 rng(6);
    Checks checks;
    for (int t = 0; t < 500; ++t) {
        const int K = 1 + static_cast<int>(rng() % 5);
        const auto x = random_trajectory_set(rng, K, 3);
        const auto y = random_trajectory_set(rng, K, 3);
        const auto z = random_trajectory_set(rng, K, 3);
        const std::string tag = "triple " + std::to_string(t);
        const double dxy = tgospa(x, y).total, dyx = tgospa(y, x).total;
        checks.expect(tgospa(x, x).total <= 1e-6, tag + " d(x,x) > 0");
        if (x.box_count() + y.box_count() > 0) checks.expect(dxy > 1e-6, tag + " d(x,y) = 0 for distinct sets");
        checks.expect(std::abs(dxy - dyx) <= 1e-6, tag + " asymmetric");
        checks.expect(dxy <= tgospa(x, z).total + tgospa(z, y).total + 1e-6, tag + " triangle inequality");
    }
    std::uniform_int_distribution<int> n(0, 4);
    for (int t = 0; t < 500; ++t) {
        TrajectorySet a, b;
        a.num_frames = b.num_frames = 1;
        std::vector<BBox2D> X, Y;
        for (int i = n(rng); i > 0; --i) {
            X.push_back(random_box(rng));
            a.add(i, 1, X.back());
        }
        for (int i = n(rng); i > 0; --i) {
            Y.push_back(random_box(rng));
            b.add(i, 1, Y.back());
        }
        const double v = tgospa(a, b).total;
        checks.expect(std::abs(v - gospa_exhaustive(X, Y, 0.5, 1.8, 2.0)) <= 1e-9, "single frame " + std::to_string(t));
        checks.expect(std::abs(v - gospa(X, Y, 0.5, 1.8, 2.0).value) <= 1e-9, "gospa " + std::to_string(t));
    }
    TrajectorySet empty, one;
    empty.num_frames = one.num_frames = 1;
    one.add(1, 1, BBox2D{100, 100, 20, 40});
    const double single = tgospa(empty, one).total;
    checks.expect(std::round(single * 1000.0) == 340.0, "single missed box " + fmt(single, 6));
    return checks.outcome("500 triples, 500 single frames, missed box " + fmt(single, 3));
}

/// Asymptotic Kolmogorov distribution tail P(sqrt(n) D > lambda) with the
/// small-sample correction of Stephens.
double ks_p_value(double D, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * D;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

Outcome criterion_simulator() {
    const SpoModel model = SpoModel::build(ModelParams{}, CameraModel::with_defaults(1920, 1080, 30.0));
    const int K = 100000;
    SimulationOptions opt;
    opt.detections = false;
    const auto sc = sample_scenario(model, K, 77, opt);
    const double beta = model.birth.beta;
    const double ps = model.survival;
    const double T = model.period;
    const double L = model.params.population.mean_lifespan;
    const double mu = L * model.params.population.birth_rate;
    Checks checks;

    // Births per step against Poisson(beta), bins 0, 1 and 2+.
    double observed[3] = {0, 0, 0};
    for (int k = 1; k < K; ++k) observed[std::min(sc.birth_counts[static_cast<std::size_t>(k)], 2)] += 1.0;
    const double steps = K - 1;
    const double p0 = std::exp(-beta), p1 = beta * std::exp(-beta);
    const double expected[3] = {steps * p0, steps * p1, steps * (1.0 - p0 - p1)};
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    const double p_birth = boost::math::cdf(boost::math::complement(boost::math::chi_squared(2.0), chi2));
    checks.expect(p_birth > 0.01, "birth chi-square p=" + fmt(p_birth));

    // Lifespans: D steps with P(D = d) = ps^(d-1) (1 - ps). Adding
    // (-log(1 - V (1 - ps)) / rate), V uniform, makes (D - 1 + that) T an exact
    // draw from Exp(mean L).
    const double rate = -std::log(ps);
    const int cutoff = K - static_cast<int>(std::ceil(20.0 * L / T));
    std::mt19937_64 jitter_rng(78);
    std::uniform_real_distribution<double> v01(0.0, 1.0);
    std::vector<double> life;
    for (const auto& o : sc.objects) {
        if (o.initial || o.death_step < 0 || o.birth_step >= cutoff) continue;
        const double d = o.death_step - o.birth_step;
        const double frac = -std::log(1.0 - v01(jitter_rng) * (1.0 - ps)) / rate;
        life.push_back((d - 1.0 + frac) * T);
    }
    std::sort(life.begin(), life.end());
    double D = 0.0;
    const double n_life = static_cast<double>(life.size());
    for (std::size_t i = 0; i < life.size(); ++i) {
        const double F = 1.0 - std::exp(-life[i] / L);
        D = std::max({D, F - i / n_life, (i + 1) / n_life - F});
    }
    const double p_life = life.empty() ? 0.0 : ks_p_value(D, life.size());
    checks.expect(p_life > 0.01, "lifespan KS p=" + fmt(p_life) + " (n=" + std::to_string(life.size()) + ")");

    // Stationary cardinality against Poisson(L eta) with AR(1) effective
    // sample sizes.
    double mean = 0.0;
    for (int n : sc.cardinality) mean += n;
    mean /= K;
    double var = 0.0;
    for (int n : sc.cardinality) var += (n - mean) * (n - mean);
    var /= K - 1;
    const double n_mean = K * (1.0 - ps) / (1.0 + ps);
    const double n_var = K * (1.0 - ps * ps) / (1.0 + ps * ps);
    const double sd_mean = std::sqrt(mu / n_mean);
    const double sd_var = std::sqrt((2.0 * mu * mu + mu) / n_var);
    checks.expect(std::abs(mean - mu) <= 3.0 * sd_mean, "mean " + fmt(mean) + " vs " + fmt(mu) + " +- " + fmt(3 * sd_mean));
    checks.expect(std::abs(var - mu) <= 3.0 * sd_var, "variance " + fmt(var) + " vs " + fmt(mu) + " +- " + fmt(3 * sd_var));

    return checks.outcome("births p=" + fmt(p_birth, 3) + ", lifespans p=" + fmt(p_life, 3) + ", mean " +
                          fmt(mean) + ", var " + fmt(var) + " (L*eta " + fmt(mu) + ")");
}

// ---------------------------------------------------------------------------
// RFS algebra

std::vector<GlobalHypothesis> random_globals(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lw(-60.0, 5.0);
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<GlobalHypothesis> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)].log_weight = lw(rng);
        // Repeated weights exercise the tie rule.
        if (i > 0 && rng() % 5 == 0) g[static_cast<std::size_t>(i)].log_weight = g[static_cast<std::size_t>(i - 1)].log_weight;
        g[static_cast<std::size_t>(i)].assignment = {i, static_cast<int>(rng() % 3) - 1};
    }
    return g;
}

double log_sum_exp(const std::vector<GlobalHypothesis>& g) {
    double s = 0.0;
    for (const auto& h : g) s += std::exp(h.log_weight);
    return std::log(s);
}

Outcome criterion_rfs() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Checks checks;

    for (int t = 0; t < 2000; ++t) {
        std::vector<double> x(1 + rng() % 20);
        for (auto& v : x) v = 200.0 * (u(rng) - 0.5);
        const double shift = 2000.0 * (u(rng) - 0.5);
        std::vector<double> xs = x;
        for (auto& v : xs) v += shift;
        const auto a = normalize_log_weights(x);
        const auto b = normalize_log_weights(a.log_weights);
        const auto c = normalize_log_weights(xs);
        double sum = 0.0;
        for (double v : a.log_weights) sum += std::exp(v);
        const std::string tag = "log weights " + std::to_string(t);
        checks.expect(std::abs(sum - 1.0) <= 1e-12, tag + " not normalized");
        checks.expect(std::abs(b.log_normalizer) <= 1e-12, tag + " normalizing twice changes the normalizer");
        checks.expect(std::abs(c.log_normalizer - a.log_normalizer - shift) <= 1e-9, tag + " normalizer shift");
        for (std::size_t i = 0; i < x.size(); ++i) {
            checks.expect(std::abs(b.log_weights[i] - a.log_weights[i]) <= 1e-12, tag + " not idempotent");
            checks.expect(std::abs(c.log_weights[i] - a.log_weights[i]) <= 1e-9, tag + " not shift invariant");
        }
    }

    for (int t = 0; t < 2000; ++t) {
        const auto g = random_globals(rng);
        const double threshold = -30.0 * u(rng);
        const std::size_t cap = 1 + rng() % 8;
        const double shift = 100.0 * (u(rng) - 0.5);
        auto gs = g;
        for (auto& h : gs) h.log_weight += shift;
        const auto a = prune_and_cap(g, threshold, cap);
        const auto b = prune_and_cap(a, threshold, cap);
        const auto c = prune_and_cap(gs, threshold, cap);
        const std::string tag = "globals " + std::to_string(t);
        checks.expect(!a.empty() && a.size() <= cap, tag + " size " + std::to_string(a.size()));
        checks.expect(std::abs(log_sum_exp(a)) <= 1e-12, tag + " not normalized");
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> best_assignment;
        for (const auto& h : g)
            if (h.log_weight > best) {
                best = h.log_weight;
                best_assignment = h.assignment;
            }
        checks.expect(a.front().assignment == best_assignment, tag + " lost the best hypothesis");
        checks.expect(b.size() == a.size(), tag + " not idempotent");
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
            checks.expect(b[i].assignment == a[i].assignment && std::abs(b[i].log_weight - a[i].log_weight) <= 1e-12,
                          tag + " not idempotent");
        checks.expect(c.size() == a.size(), tag + " not shift invariant");
        for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i)
            checks.expect(c[i].assignment == a[i].assignment && std::abs(c[i].log_weight - a[i].log_weight) <= 1e-9,
                          tag + " not shift invariant");
    }

    for (int t = 0; t < 2000; ++t) {
        std::vector<std::pair<double, BoxDensity>> comps(rng() % 6);
        for (auto& [r, g] : comps) {
            r = u(rng);
            for (int i = 0; i < 4; ++i) g.mean[i] = 100.0 * u(rng);
            Matrix4 a = Matrix4::Random();
            g.cov = a * a.transpose() + Matrix4::Identity();
        }
        const auto fit = mb_to_poisson(comps);
        const std::string tag = "multi-Bernoulli " + std::to_string(t);
        double rsum = 0.0;
        for (const auto& [r, g] : comps) rsum += r;
        checks.expect(std::abs(fit.beta - rsum) <= 1e-12, tag + " beta");
        if (rsum <= 0.0) {
            checks.expect(!fit.defined, tag + " defined without mass");
            continue;
        }
        checks.expect(fit.defined && std::abs(fit.spatial.total_weight() - 1.0) <= 1e-12, tag + " not normalized");
        // Splitting every Bernoulli into two halves and permuting leaves the
        // fitted Poisson process unchanged.
        std::vector<std::pair<double, BoxDensity>> split;
        for (const auto& [r, g] : comps) {
            split.emplace_back(r / 2.0, g);
            split.emplace_back(r / 2.0, g);
        }
        std::shuffle(split.begin(), split.end(), rng);
        const auto fit2 = mb_to_poisson(split);
        checks.expect(std::abs(fit2.beta - fit.beta) <= 1e-12, tag + " split changes beta");
        const auto m1 = moment_match(fit.spatial.weights, fit.spatial.components);
        const auto m2 = moment_match(fit2.spatial.weights, fit2.spatial.components);
        checks.expect((m1.mean - m2.mean).cwiseAbs().maxCoeff() <= 1e-9 && (m1.cov - m2.cov).cwiseAbs().maxCoeff() <= 1e-7,
                      tag + " split changes the intensity");
        // Fitting the fitted intensity again, as Bernoullis of existence
        // beta * w_i, is the identity.
        if (fit.beta <= 1.0) {
            std::vector<std::pair<double, BoxDensity>> again;
            for (std::size_t i = 0; i < fit.spatial.size(); ++i)
                again.emplace_back(fit.beta * fit.spatial.weights[i], fit.spatial.components[i]);
            const auto fit3 = mb_to_poisson(again);
            checks.expect(std::abs(fit3.beta - fit.beta) <= 1e-12, tag + " refit changes beta");
            for (std::size_t i = 0; i < fit.spatial.size(); ++i)
                checks.expect(std::abs(fit3.spatial.weights[i] - fit.spatial.weights[i]) <= 1e-12,
                              tag + " refit changes weights");
        }
    }
    return checks.outcome("2000 weight vectors, 2000 hypothesis sets, 2000 multi-Bernoulli sets");
}

Outcome criterion_io() {
    std::mt19937_64 rng(9);
    Checks checks;
    for (int t = 0; t < 1000; ++t) {
        const auto s = random_grid_set(rng);
        const auto back = to_trajectory_set(parse_boxes(write_results(s), BoxKind::Result), s.num_frames);
        checks.expect(same_at_two_decimals(s, back) && same_at_two_decimals(back, s),
                      "results set " + std::to_string(t));
        const auto gt = to_trajectory_set(parse_boxes(write_ground_truth(s), BoxKind::GroundTruth), s.num_frames);
        checks.expect(same_at_two_decimals(s, gt) && same_at_two_decimals(gt, s),
                      "ground-truth set " + std::to_string(t));
    }
    return checks.outcome("1000 sets through the result and ground-truth writers");
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria = {
    {"population statistics", criterion_population},
    {"detection statistics", criterion_detection_stats},
    {"tracking results", criterion_tracking},
    {"degenerate filter equals UKF", criterion_degenerate},
    {"Murty equals brute force", criterion_murty},
    {"TGOSPA axioms", criterion_metric},
    {"simulator statistics", criterion_simulator},
    {"RFS algebra", criterion_rfs},
    {"I/O round trip", criterion_io},
};

bool run_one(std::size_t i) {
    const auto& c = kCriteria[i];
    Outcome o;
    try {
        o = c.run();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << c.name << "): " << o.detail
              << std::endl;
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> which;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--criterion" && a + 1 < argc) {
            const int n = std::atoi(argv[++a]);
            if (n < 1 || n > static_cast<int>(kCriteria.size())) {
                std::cerr << "criterion must be between 1 and " << kCriteria.size() << "\n";
                return 2;
            }
            which.push_back(static_cast<std::size_t>(n - 1));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (which.empty())
        for (std::size_t i = 0; i < kCriteria.size(); ++i) which.push_back(i);
    bool all = true;
    for (std::size_t i : which) all = run_one(i) && all;
    return all ? 0 : 1;
}
