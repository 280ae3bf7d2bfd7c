#include <gtest/gtest.h>

#include "spotrack/spotrack.hpp"

#include <filesystem>
#include <string>

using namespace spotrack;
namespace fs = std::filesystem;

namespace {

/// Writes a simulated scenario as a MOT sequence folder and removes it again.
class SimulatedSequence {
public:
    SimulatedSequence(const std::string& name, const ModelParams& params, int frames, std::uint64_t seed) {
        dir_ = fs::temp_directory_path() / ("spotrack_pipeline_" + std::to_string(seed)) / name;
        fs::remove_all(dir_.parent_path());
        const auto cam = CameraModel::with_defaults(1920, 1080, 30.0);
        model_ = SpoModel::build(params, cam);
        scenario_ = sample_scenario(model_, frames, seed);
        write_file(dir_ / "seqinfo.ini", write_seqinfo({name, 30.0, 1920, 1080, frames}));
        write_file(dir_ / "gt" / "gt.txt", write_ground_truth(scenario_.gt));
        write_file(dir_ / "det" / "det.txt", write_detections(scenario_.detections));
    }
    ~SimulatedSequence() { fs::remove_all(dir_.parent_path()); }

    [[nodiscard]] const fs::path& dir() const { return dir_; }
    [[nodiscard]] const SpoModel& model() const { return model_; }
    [[nodiscard]] const Scenario& scenario() const { return scenario_; }

private:
    fs::path dir_;
    SpoModel model_;
    Scenario scenario_;
};

}  // namespace

TEST(Pipeline, LoadedSequenceMatchesTheScenario) {
    const SimulatedSequence seq("SIM-01-FRCNN", ModelParams{}, 200, 3);
    ASSERT_EQ(list_sequences(seq.dir().parent_path(), "FRCNN").size(), 1u);
    const auto data = load_sequence(seq.dir());
    EXPECT_EQ(data.meta.frame_count, 200);
    EXPECT_EQ(data.gt.box_count(), seq.scenario().gt.box_count());
    EXPECT_EQ(data.gt.tracks.size(), seq.scenario().gt.tracks.size());
    ASSERT_EQ(data.detections.size(), seq.scenario().detections.size());
    for (std::size_t k = 0; k < data.detections.size(); ++k)
        EXPECT_EQ(data.detections[k].size(), seq.scenario().detections[k].size());
}

TEST(Pipeline, IdentifyRecoversPopulationParameters) {
    const SimulatedSequence seq("SIM-02-FRCNN", ModelParams{}, 20000, 5);
    const auto data = load_sequence(seq.dir());
    const auto s = lifespan_birth_stats(data.gt, data.meta.frame_rate);
    // About 1300 lifespans: the sample mean has a relative spread near 3%.
    EXPECT_NEAR(s.mean_lifespan, 7.481, 0.1 * 7.481);
    EXPECT_NEAR(s.birth_rate, 1.925, 0.1 * 1.925);
    EXPECT_NEAR(s.mean_count, 7.481 * 1.925, 0.1 * 7.481 * 1.925);
    EXPECT_NEAR(s.mean_count, s.stationary_mean(), 1e-9 * s.mean_count);
}

TEST(Pipeline, IdentifyRecoversDetectionProbability) {
    const SimulatedSequence seq("SIM-03-FRCNN", ModelParams{}, 3000, 6);
    const auto data = load_sequence(seq.dir());
    const auto gt = gt_frames(data.gt_rows, data.meta.frame_count);
    const auto s = detection_stats(gt.boxes, data.detections, match_frames(gt.boxes, data.detections),
                                   noise_gamma(data.meta.camera()));
    std::size_t detections = 0;
    for (const auto& f : data.detections) detections += f.size();
    EXPECT_EQ(s.matched + s.clutter, detections);
    EXPECT_EQ(s.gt_count, data.gt.box_count());
    // Clutter that overlaps a missed object is counted as a detection of it.
    EXPECT_NEAR(s.detection_probability, 0.529, 0.03);
    EXPECT_LT(s.clutter_rate, 1.552);
}

TEST(Pipeline, PmbmBeatsSortOnASimulatedSequence) {
    const SimulatedSequence seq("SIM-04-FRCNN", ModelParams{}, 300, 7);
    const auto data = load_sequence(seq.dir());
    const AppConfig cfg;
    const auto cam = cfg.camera(data.meta.image_width, data.meta.image_height, data.meta.frame_rate);
    const auto pmbm = run_sequence(data.detections, SpoModel::build(cfg.model, cam), cfg.filter);
    const auto sort = sort_track(data.detections, cfg.sort);
    const auto pmbm_file = to_trajectory_set(parse_boxes(write_results(pmbm), BoxKind::Result), 300);
    const auto rp = tgospa(pmbm_file, data.gt, cfg.tgospa);
    const auto rs = tgospa(sort, data.gt, cfg.tgospa);
    EXPECT_GT(rp.tp, rs.tp);
    EXPECT_LT(rp.total, rs.total);
    EXPECT_LT(cardinality_mismatch(pmbm_file, data.gt), cardinality_mismatch(sort, data.gt));
}
