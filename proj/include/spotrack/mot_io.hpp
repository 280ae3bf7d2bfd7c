#pragma once

#include "spotrack/bbox.hpp"
#include "spotrack/spo_model.hpp"
#include "spotrack/trajectory.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace spotrack {

/// Sequence header from seqinfo.ini.
struct SequenceMeta {
    std::string name;
    double frame_rate = 0.0;
    int image_width = 0;
    int image_height = 0;
    int frame_count = 0;

    [[nodiscard]] CameraModel camera() const {
        return CameraModel::with_defaults(image_width, image_height, frame_rate);
    }

    friend bool operator==(const SequenceMeta&, const SequenceMeta&) = default;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] inline SequenceMeta parse_seqinfo(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(std::string("seqinfo: ") + e.what());
    }
    auto get = [&](const char* key) {
        const auto v = tree.get_optional<std::string>(std::string("Sequence.") + key);
        if (!v) throw ParseError(std::string("seqinfo: missing key ") + key);
        return *v;
    };
    auto number = [&](const char* key) {
        const std::string v = get(key);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || ptr != v.data() + v.size())
            throw ParseError(std::string("seqinfo: malformed value for ") + key);
        return x;
    };
    SequenceMeta m;
    m.name = get("name");
    m.frame_rate = number("frameRate");
    m.image_width = static_cast<int>(number("imWidth"));
    m.image_height = static_cast<int>(number("imHeight"));
    m.frame_count = static_cast<int>(number("seqLength"));
    if (!(m.frame_rate > 0.0) || m.image_width <= 0 || m.image_height <= 0 || m.frame_count <= 0)
        throw ParseError("seqinfo: frame rate, image size and sequence length must be positive");
    return m;
}

[[nodiscard]] inline std::string write_seqinfo(const SequenceMeta& m) {
    std::ostringstream out;
    out << "[Sequence]\nname=" << m.name << "\nimDir=img1\nframeRate=" << m.frame_rate
        << "\nseqLength=" << m.frame_count << "\nimWidth=" << m.image_width << "\nimHeight=" << m.image_height
        << "\nimExt=.jpg\n";
    return out.str();
}

enum class BoxKind {
    GroundTruth,  // frame, id, left, top, w, h, consider, class, visibility
    Detection,    // frame, -1, left, top, w, h, confidence, ...
    Result        // frame, id, left, top, w, h, ...
};

/// One parsed row, already in the bottom-centre convention.
struct Annotation {
    int frame = 0;
    TrackLabel id = -1;
    BBox2D box;
    double confidence = 1.0;
    int object_class = 1;
    double visibility = 1.0;
};

struct GtFilter {
    bool pedestrians_only = true;
    bool considered_only = true;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view field, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": malformed number '" + std::string(field) + "'");
    return v;
}

inline long long parse_integer(std::string_view field, std::size_t line) {
    const double v = parse_number(field, line);
    if (v != std::floor(v)) throw ParseError("line " + std::to_string(line) + ": expected an integer");
    return static_cast<long long>(v);
}

}  // namespace detail

/// Parses MOT-Challenge rows. Boxes are converted from top-left to the
/// bottom-centre convention; ground truth is filtered per `filter`.
[[nodiscard]] inline std::vector<Annotation> parse_boxes(const std::string& text, BoxKind kind, GtFilter filter = {}) {
    const std::size_t min_cols = kind == BoxKind::GroundTruth ? 9 : (kind == BoxKind::Detection ? 7 : 6);
    std::vector<Annotation> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::string_view> fields;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string_view line = detail::trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() < min_cols)
            throw ParseError("line " + std::to_string(line_no) + ": expected at least " + std::to_string(min_cols) +
                             " columns, found " + std::to_string(fields.size()));
        Annotation a;
        a.frame = static_cast<int>(detail::parse_integer(fields[0], line_no));
        a.id = detail::parse_integer(fields[1], line_no);
        const double left = detail::parse_number(fields[2], line_no);
        const double top = detail::parse_number(fields[3], line_no);
        const double w = detail::parse_number(fields[4], line_no);
        const double h = detail::parse_number(fields[5], line_no);
        if (w < 0.0 || h < 0.0) throw ParseError("line " + std::to_string(line_no) + ": negative box size");
        a.box = BBox2D::from_top_left(left, top, w, h);
        if (fields.size() > 6) a.confidence = detail::parse_number(fields[6], line_no);
        if (kind == BoxKind::GroundTruth) {
            a.object_class = static_cast<int>(detail::parse_integer(fields[7], line_no));
            a.visibility = detail::parse_number(fields[8], line_no);
            if (filter.considered_only && a.confidence != 1.0) continue;
            if (filter.pedestrians_only && a.object_class != 1) continue;
        }
        out.push_back(a);
    }
    return out;
}

/// Labelled trajectories of the annotations with frames in
/// [first_frame, first_frame + num_frames).
[[nodiscard]] inline TrajectorySet to_trajectory_set(const std::vector<Annotation>& rows, int num_frames,
                                                     int first_frame = 1) {
    TrajectorySet s;
    s.first_frame = first_frame;
    s.num_frames = num_frames;
    for (const auto& a : rows) s.add(a.id, a.frame, a.box);
    return s;
}

/// Unlabelled per-frame boxes; frame `first_frame` maps to index 0.
[[nodiscard]] inline FrameDetections to_frame_detections(const std::vector<Annotation>& rows, int num_frames,
                                                         int first_frame = 1) {
    FrameDetections d(static_cast<std::size_t>(num_frames));
    for (const auto& a : rows) {
        if (a.frame < first_frame || a.frame >= first_frame + num_frames)
            throw std::out_of_range("detection frame " + std::to_string(a.frame) + " outside the sequence");
        d[static_cast<std::size_t>(a.frame - first_frame)].push_back(a.box);
    }
    // Canonical order, so that row order in the file never matters.
    for (auto& frame : d)
        std::sort(frame.begin(), frame.end(), [](const BBox2D& a, const BBox2D& b) {
            return std::tie(a.x, a.y, a.width, a.height) < std::tie(b.x, b.y, b.width, b.height);
        });
    return d;
}

/// MOT result rows ordered by (frame, id), 2 decimals, top-left convention.
[[nodiscard]] inline std::string write_results(const TrajectorySet& s) {
    std::vector<std::tuple<int, TrackLabel, const BBox2D*>> rows;
    for (const auto& [id, t] : s.tracks)
        for (const auto& [k, b] : t) rows.emplace_back(k, id, &b);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::string out;
    char buf[160];
    for (const auto& [k, id, b] : rows) {
        const int n = std::snprintf(buf, sizeof buf, "%d,%lld,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n", k,
                                    static_cast<long long>(id), b->left(), b->top(), b->width, b->height);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

/// Ground-truth rows in the MOT layout, e.g. for simulated sequences.
[[nodiscard]] inline std::string write_ground_truth(const TrajectorySet& s) {
    std::string out;
    char buf[160];
    std::vector<std::tuple<int, TrackLabel, const BBox2D*>> rows;
    for (const auto& [id, t] : s.tracks)
        for (const auto& [k, b] : t) rows.emplace_back(k, id, &b);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    for (const auto& [k, id, b] : rows) {
        const int n = std::snprintf(buf, sizeof buf, "%d,%lld,%.2f,%.2f,%.2f,%.2f,1,1,1\n", k,
                                    static_cast<long long>(id), b->left(), b->top(), b->width, b->height);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

[[nodiscard]] inline std::string write_detections(const FrameDetections& d, int first_frame = 1) {
    std::string out;
    char buf[160];
    for (std::size_t k = 0; k < d.size(); ++k)
        for (const auto& b : d[k]) {
            const int n = std::snprintf(buf, sizeof buf, "%d,-1,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n",
                                        first_frame + static_cast<int>(k), b.left(), b.top(), b.width, b.height);
            out.append(buf, static_cast<std::size_t>(n));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Files

[[nodiscard]] inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

/// One MOT-Challenge sequence directory.
struct SequenceData {
    std::filesystem::path dir;
    SequenceMeta meta;
    std::vector<Annotation> gt_rows;  // empty when the sequence has no gt
    TrajectorySet gt;
    FrameDetections detections;
};

inline std::string_view sequence_base_name(std::string_view name) {
    // MOT17-02-FRCNN -> MOT17-02
    const auto first = name.find('-');
    if (first == std::string_view::npos) return name;
    const auto second = name.find('-', first + 1);
    return second == std::string_view::npos ? name : name.substr(0, second);
}

struct LoadOptions {
    bool ground_truth = true;
    bool detections = true;
    GtFilter filter;
};

[[nodiscard]] inline SequenceData load_sequence(const std::filesystem::path& dir, const LoadOptions& opt = {}) {
    SequenceData s;
    s.dir = dir;
    s.meta = parse_seqinfo(read_file(dir / "seqinfo.ini"));
    if (opt.detections) {
        const auto det_path = dir / "det" / "det.txt";
        try {
            s.detections = to_frame_detections(parse_boxes(read_file(det_path), BoxKind::Detection), s.meta.frame_count);
        } catch (const ParseError& e) {
            throw ParseError(det_path.string() + ": " + e.what());
        }
    }
    s.gt.num_frames = s.meta.frame_count;
    if (opt.ground_truth) {
        try {
            s.gt_rows = parse_boxes(read_file(dir / "gt" / "gt.txt"), BoxKind::GroundTruth, opt.filter);
        } catch (const ParseError& e) {
            throw ParseError((dir / "gt" / "gt.txt").string() + ": " + e.what());
        }
        s.gt = to_trajectory_set(s.gt_rows, s.meta.frame_count);
    }
    return s;
}

/// Sequence directories under `root` whose names end in "-<detector>"
/// (any name when `detector` is empty) and that contain a seqinfo.ini,
/// sorted by name.
[[nodiscard]] inline std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root,
                                                                       const std::string& detector) {
    if (!std::filesystem::is_directory(root)) throw std::runtime_error("dataset directory not found: " + root.string());
    std::vector<std::filesystem::path> out;
    const std::string suffix = detector.empty() ? "" : "-" + detector;
    for (const auto& e : std::filesystem::directory_iterator(root)) {
        if (!e.is_directory() || !std::filesystem::exists(e.path() / "seqinfo.ini")) continue;
        const std::string name = e.path().filename().string();
        if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace spotrack
