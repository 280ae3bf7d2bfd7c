#include "spotrack/spotrack.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace spotrack;

namespace {

constexpr const char* kDatasetEnv = "SPOTRACK_DATASET_ROOT";

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

fs::path dataset_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kDatasetEnv); env && *env) return env;
    throw StageError(std::string("no dataset directory given; pass --dataset or set ") + kDatasetEnv);
}

std::vector<fs::path> sequences_or_throw(const fs::path& root, const std::string& detector) {
    auto seqs = list_sequences(root, detector);
    if (seqs.empty()) throw StageError("no sequences found in " + root.string());
    return seqs;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Common {
    std::string config_file;
    std::vector<std::string> overrides;
    bool print_config = false;
    int jobs = 1;

    AppConfig load() const {
        AppConfig cfg;
        if (!config_file.empty()) cfg = parse_config(read_file(config_file));
        for (const auto& o : overrides) apply_override(cfg, o);
        cfg.validate();
        return cfg;
    }
};

// ---------------------------------------------------------------------------

void run_identify(const AppConfig&, const Common& common, const std::string& dataset, const std::string& detector,
                  const fs::path& out, int bins, bool all_classes) {
    const auto root = dataset_root(dataset);
    const auto seqs = sequences_or_throw(root, detector);
    LoadOptions lo;
    lo.filter.pedestrians_only = !all_classes;

    struct PerSequence {
        SequenceData data;
        GtFrames gt;
        std::vector<FrameMatch> matches;
    };
    std::vector<PerSequence> per(seqs.size());
    parallel_for(seqs.size(), common.jobs, [&](std::size_t i) {
        auto& p = per[i];
        p.data = load_sequence(seqs[i], lo);
        if (p.data.gt_rows.empty()) throw StageError("sequence has no ground truth: " + seqs[i].string());
        p.gt = gt_frames(p.data.gt_rows, p.data.meta.frame_count);
        p.matches = match_frames(p.gt.boxes, p.data.detections);
    });

    std::vector<DetectionStatsRow> det_rows;
    std::vector<PopulationRow> pop_rows;
    DetectionStatsAccumulator det_all;
    PopulationAccumulator pop_all;
    VisibilityCurve curve(bins);
    for (std::size_t i = 0; i < per.size(); ++i) {
        const auto& p = per[i];
        const double gamma = noise_gamma(p.data.meta.camera());
        DetectionStatsAccumulator d;
        d.add(p.gt.boxes, p.data.detections, p.matches, gamma);
        det_all.add(p.gt.boxes, p.data.detections, p.matches, gamma);
        det_rows.push_back({p.data.meta.name, d.result()});
        pop_rows.push_back({p.data.meta.name, lifespan_birth_stats(p.data.gt, p.data.meta.frame_rate)});
        pop_all.add(p.data.gt, p.data.meta.frame_rate);
        curve.add(p.gt.visibility, p.matches);
    }
    det_rows.push_back({"entire", det_all.result()});
    pop_rows.push_back({"entire", pop_all.result()});
    write_file(out / "detection_stats.csv", detection_stats_csv(det_rows));
    write_file(out / "pd_visibility.csv", visibility_csv(curve.bins()));
    write_file(out / "population.csv", population_csv(pop_rows));
    std::cout << population_csv(pop_rows);
}

void run_track(const AppConfig& cfg, const Common& common, const std::string& dataset, const std::string& detector,
               const std::string& engine, const fs::path& out) {
    if (engine != "pmbm" && engine != "sort") throw StageError("unknown engine '" + engine + "' (expected pmbm or sort)");
    const auto root = dataset_root(dataset);
    const auto seqs = sequences_or_throw(root, detector);
    std::mutex log_mutex;
    parallel_for(seqs.size(), common.jobs, [&](std::size_t i) {
        LoadOptions lo;
        lo.ground_truth = false;
        const auto data = load_sequence(seqs[i], lo);
        const auto t0 = std::chrono::steady_clock::now();
        TrajectorySet result;
        if (engine == "pmbm") {
            const auto cam = cfg.camera(data.meta.image_width, data.meta.image_height, data.meta.frame_rate);
            result = run_sequence(data.detections, SpoModel::build(cfg.model, cam), cfg.filter);
        } else {
            result = sort_track(data.detections, cfg.sort);
        }
        const double secs = seconds_since(t0);
        write_file(out / (seqs[i].filename().string() + ".txt"), write_results(result));
        std::lock_guard lock(log_mutex);
        std::cerr << engine << " " << seqs[i].filename().string() << ": " << data.meta.frame_count << " frames in "
                  << secs << " s\n";
    });
}

void run_evaluate(const AppConfig& cfg, const Common& common, const std::string& dataset, const std::string& detector,
                  const std::vector<std::string>& results, const fs::path& out) {
    if (results.empty()) throw StageError("pass at least one --results engine=directory");
    const auto root = dataset_root(dataset);
    const auto seqs = sequences_or_throw(root, detector);
    std::vector<std::pair<std::string, fs::path>> engines;
    for (const auto& r : results) {
        const auto eq = r.find('=');
        if (eq == std::string::npos) engines.emplace_back(fs::path(r).filename().string(), r);
        else engines.emplace_back(r.substr(0, eq), r.substr(eq + 1));
    }
    std::vector<SequenceData> gts(seqs.size());
    LoadOptions lo;
    lo.detections = false;
    parallel_for(seqs.size(), common.jobs, [&](std::size_t i) { gts[i] = load_sequence(seqs[i], lo); });

    std::vector<EvaluationRow> rows(seqs.size() * engines.size());
    parallel_for(rows.size(), common.jobs, [&](std::size_t idx) {
        const std::size_t s = idx / engines.size(), e = idx % engines.size();
        const std::string seq = seqs[s].filename().string();
        const fs::path file = engines[e].second / (seq + ".txt");
        if (!fs::exists(file)) throw StageError("missing result for sequence " + seq + " (" + file.string() + ")");
        TrajectorySet est;
        try {
            est = to_trajectory_set(parse_boxes(read_file(file), BoxKind::Result), gts[s].meta.frame_count);
        } catch (const std::out_of_range&) {
            throw StageError("frame-range mismatch between " + file.string() + " and the ground truth of " + seq);
        }
        rows[idx] = {seq, engines[e].first, tgospa(est, gts[s].gt, cfg.tgospa),
                     cardinality_mismatch(est, gts[s].gt)};
    });
    write_file(out / "evaluation.csv", evaluation_csv(rows));

    auto chart = [&](const char* title, auto value) {
        BarChart c;
        c.title = title;
        for (const auto& seq : seqs) c.categories.push_back(std::string(sequence_base_name(seq.filename().string())));
        for (const auto& r : rows) c.series[r.engine].push_back(value(r));
        return bar_chart_svg(c);
    };
    write_file(out / "tgospa.svg", chart("TGOSPA", [](const EvaluationRow& r) { return r.tgospa.total; }));
    write_file(out / "true_positives.svg", chart("|TP|", [](const EvaluationRow& r) { return r.tgospa.tp; }));
    write_file(out / "cardinality_mismatch.svg", chart("Cardinality mismatch", [](const EvaluationRow& r) {
                   return static_cast<double>(r.cardinality_mismatch);
               }));
    std::cout << evaluation_csv(rows);
}

void run_simulate(AppConfig cfg, const fs::path& out, const std::string& name, std::optional<std::uint64_t> seed,
                  std::optional<int> frames) {
    if (seed) cfg.simulate.seed = *seed;
    if (frames) cfg.simulate.frames = *frames;
    cfg.simulate.validate();
    const auto& s = cfg.simulate;
    const auto cam = cfg.camera(s.image_width, s.image_height, s.frame_rate);
    const auto model = SpoModel::build(cfg.model, cam);
    SimulationOptions opt;
    opt.initial_mean = s.initial_mean;
    const auto sc = sample_scenario(model, s.frames, s.seed, opt);

    SequenceMeta meta{name, s.frame_rate, s.image_width, s.image_height, s.frames};
    const fs::path dir = out / name;
    write_file(dir / "seqinfo.ini", write_seqinfo(meta));
    write_file(dir / "gt" / "gt.txt", write_ground_truth(sc.gt));
    write_file(dir / "det" / "det.txt", write_detections(sc.detections));
    write_file(dir / "params.ini", print_config(cfg));
    std::cerr << "simulated " << s.frames << " frames, " << sc.objects.size() << " objects into " << dir.string()
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monocular pedestrian tracking with the standard point-object model"};
    app.require_subcommand(1);
    Common common;
    app.add_option("-c,--config", common.config_file, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", common.overrides, "Override a setting, e.g. --set filter.murty_M=5");
    app.add_flag("--print-config", common.print_config, "Print the effective configuration before running");
    app.add_option("-j,--jobs", common.jobs, "Sequences processed concurrently")->check(CLI::PositiveNumber);

    std::string dataset, detector = "FRCNN", engine = "pmbm", out = "out", name = "SIM-01-SIM";
    int bins = 10;
    bool all_classes = false;
    std::vector<std::string> results;
    std::optional<std::uint64_t> seed;
    std::optional<int> frames;

    auto* identify = app.add_subcommand("identify", "Estimate model parameters from ground truth and detections");
    auto* track = app.add_subcommand("track", "Run a tracker over every sequence");
    auto* evaluate = app.add_subcommand("evaluate", "Score tracker output against ground truth");
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic MOT-format sequence");
    for (auto* sub : {identify, track, evaluate}) {
        sub->add_option("-d,--dataset", dataset,
                        std::string("Directory of MOT sequence folders (default: $") + kDatasetEnv + ")");
        sub->add_option("--detector", detector, "Sequence folder suffix to select, e.g. FRCNN; empty selects all");
    }
    for (auto* sub : {identify, track, evaluate, simulate}) sub->add_option("-o,--out", out, "Output directory");
    identify->add_option("--bins", bins, "Visibility bins of the detection-probability curve")
        ->check(CLI::PositiveNumber);
    identify->add_flag("--all-classes", all_classes, "Keep non-pedestrian ground truth");
    track->add_option("-e,--engine", engine, "pmbm or sort");
    evaluate->add_option("-r,--results", results, "engine=directory holding <sequence>.txt files")->required();
    simulate->add_option("--seed", seed, "Random seed");
    simulate->add_option("--frames", frames, "Number of frames");
    simulate->add_option("--name", name, "Sequence folder name");

    CLI11_PARSE(app, argc, argv);

    std::string stage = "config";
    try {
        const AppConfig cfg = common.load();
        if (common.print_config) std::cout << print_config(cfg) << "\n";
        if (*identify) {
            stage = "identify";
            run_identify(cfg, common, dataset, detector, out, bins, all_classes);
        } else if (*track) {
            stage = "track";
            run_track(cfg, common, dataset, detector, engine, out);
        } else if (*evaluate) {
            stage = "evaluate";
            run_evaluate(cfg, common, dataset, detector, results, out);
        } else if (*simulate) {
            stage = "simulate";
            run_simulate(cfg, out, name, seed, frames);
        }
    } catch (const std::exception& e) {
        std::cerr << "spotrack " << stage << ": error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
