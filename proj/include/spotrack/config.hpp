#pragma once

#include "spotrack/metrics.hpp"
#include "spotrack/pmbm.hpp"
#include "spotrack/sort.hpp"
#include "spotrack/spo_model.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spotrack {

struct SimulateSettings {
    int frames = 1000;
    std::uint64_t seed = 1;
    int image_width = 1920;
    int image_height = 1080;
    double frame_rate = 30.0;
    /// Mean of the initial population; unset means L * eta.
    std::optional<double> initial_mean;

    void validate() const {
        if (frames < 1) throw std::invalid_argument("simulate: frames must be at least 1");
        if (image_width < 1 || image_height < 1) throw std::invalid_argument("simulate: image size must be positive");
        if (!(frame_rate > 0.0)) throw std::invalid_argument("simulate: frame rate must be positive");
        if (initial_mean && !(*initial_mean >= 0.0))
            throw std::invalid_argument("simulate: initial mean must be non-negative");
    }
};

/// Every tunable of the toolkit, one INI section per area.
struct AppConfig {
    double focal_length = CameraModel{}.focal_length;
    double pixel_size = CameraModel{}.pixel_size;
    ModelParams model;
    FilterConfig filter;
    SortConfig sort;
    TgospaParams tgospa;
    SimulateSettings simulate;

    [[nodiscard]] CameraModel camera(double width, double height, double frame_rate) const {
        CameraModel c = CameraModel::with_defaults(width, height, frame_rate);
        c.focal_length = focal_length;
        c.pixel_size = pixel_size;
        return c;
    }

    void validate() const {
        if (!(focal_length > 0.0) || !(pixel_size > 0.0))
            throw std::invalid_argument("camera: focal length and pixel size must be positive");
        model.validate();
        filter.validate();
        sort.validate();
        tgospa.validate();
        simulate.validate();
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T parse_value(const std::string& s, const std::string& name) {
    T v{};
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError("config: bad value '" + s + "' for " + name);
    return v;
}

template <typename T>
std::string format_value(T v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct ConfigEntry {
    std::string section;
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

template <typename T>
ConfigEntry bind(const char* section, const char* key, T& ref) {
    const std::string name = std::string(section) + "." + key;
    return {section, key, [&ref, name](const std::string& s) { ref = parse_value<T>(s, name); },
            [&ref] { return format_value(ref); }};
}

inline ConfigEntry bind_optional(const char* section, const char* key, std::optional<double>& ref) {
    const std::string name = std::string(section) + "." + key;
    return {section, key,
            [&ref, name](const std::string& s) {
                if (s == "auto") ref.reset();
                else ref = parse_value<double>(s, name);
            },
            [&ref] { return ref ? format_value(*ref) : std::string("auto"); }};
}

inline std::vector<ConfigEntry> config_entries(AppConfig& c) {
    auto& m = c.model;
    auto& f = c.filter;
    auto& s = c.sort;
    return {
        bind("camera", "focal_length", c.focal_length),
        bind("camera", "pixel_size", c.pixel_size),
        bind("motion", "q_x", m.motion.q_x),
        bind("motion", "q_y", m.motion.q_y),
        bind("motion", "q_z", m.motion.q_z),
        bind("motion", "mean_width", m.motion.mean_width),
        bind("motion", "mean_height", m.motion.mean_height),
        bind("motion", "tau_width", m.motion.tau_width),
        bind("motion", "tau_height", m.motion.tau_height),
        bind("motion", "sigma_width", m.motion.sigma_width),
        bind("motion", "sigma_height", m.motion.sigma_height),
        bind("population", "mean_lifespan", m.population.mean_lifespan),
        bind("population", "birth_rate", m.population.birth_rate),
        bind("detection", "detection_probability", m.detection.detection_probability),
        bind("detection", "clutter_rate", m.detection.clutter_rate),
        bind("detection", "noise_scale", m.detection.noise_scale),
        bind("birth", "z_min", m.birth.z_min),
        bind("birth", "z_max", m.birth.z_max),
        bind("birth", "components", m.birth.components),
        bind("birth", "max_speed", m.birth.max_speed),
        bind("model", "min_depth", m.min_depth),
        bind("filter", "gate_threshold", f.gate_threshold),
        bind("filter", "max_globals", f.max_globals),
        bind("filter", "prune_log_weight", f.prune_log_weight),
        bind("filter", "murty_M", f.murty_M),
        bind("filter", "estimate_threshold", f.estimate_threshold),
        bind("filter", "poisson_min_weight", f.poisson_min_weight),
        bind("filter", "poisson_max_components", f.poisson_max_components),
        bind("filter", "track_min_existence", f.track_min_existence),
        bind("filter", "ut_kappa", f.ut.kappa),
        bind("sort", "iou_threshold", s.iou_threshold),
        bind("sort", "min_hits", s.min_hits),
        bind("sort", "max_age", s.max_age),
        bind("sort", "measurement_std_position", s.measurement_std_position),
        bind("sort", "measurement_std_size", s.measurement_std_size),
        bind("sort", "process_std_position", s.process_std_position),
        bind("sort", "process_std_size", s.process_std_size),
        bind("sort", "process_std_velocity", s.process_std_velocity),
        bind("sort", "initial_std_velocity", s.initial_std_velocity),
        bind("tgospa", "cutoff", c.tgospa.cutoff),
        bind("tgospa", "exponent", c.tgospa.exponent),
        bind("tgospa", "switch_penalty", c.tgospa.switch_penalty),
        bind("simulate", "frames", c.simulate.frames),
        bind("simulate", "seed", c.simulate.seed),
        bind("simulate", "image_width", c.simulate.image_width),
        bind("simulate", "image_height", c.simulate.image_height),
        bind("simulate", "frame_rate", c.simulate.frame_rate),
        bind_optional("simulate", "initial_mean", c.simulate.initial_mean),
    };
}

inline void set_entry(AppConfig& c, const std::string& section, const std::string& key, const std::string& value) {
    for (auto& e : config_entries(c))
        if (e.section == section && e.key == key) {
            e.set(value);
            return;
        }
    throw ConfigError("config: unknown key " + section + "." + key);
}

}  // namespace detail

/// Applies INI text on top of `base`. Unknown sections or keys are errors.
[[nodiscard]] inline AppConfig parse_config(const std::string& text, AppConfig base = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    // The INI reader drops empty sections, so headers are checked on the raw text.
    {
        AppConfig probe;
        const auto entries = detail::config_entries(probe);
        std::istringstream lines(text);
        for (std::string line; std::getline(lines, line);) {
            const auto b = line.find_first_not_of(" \t\r");
            const auto e = line.find_last_not_of(" \t\r");
            if (b == std::string::npos || line[b] != '[' || line[e] != ']') continue;
            const std::string section = line.substr(b + 1, e - b - 1);
            if (std::none_of(entries.begin(), entries.end(), [&](const auto& x) { return x.section == section; }))
                throw ConfigError("config: unknown section " + section);
        }
    }
    for (const auto& [section, keys] : tree) {
        if (!keys.data().empty()) throw ConfigError("config: key outside any section: " + section);
        for (const auto& [key, value] : keys) detail::set_entry(base, section, key, value.data());
    }
    base.validate();
    return base;
}

/// Applies one "section.key=value" override.
inline void apply_override(AppConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("config: override must look like section.key=value, got '" + assignment + "'");
    detail::set_entry(c, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
                      assignment.substr(eq + 1));
}

/// The effective configuration as INI text; parse_config reads it back.
[[nodiscard]] inline std::string print_config(const AppConfig& c) {
    AppConfig copy = c;
    std::string out, section;
    for (const auto& e : detail::config_entries(copy)) {
        if (e.section != section) {
            if (!section.empty()) out += "\n";
            section = e.section;
            out += "[" + section + "]\n";
        }
        out += e.key + " = " + e.get() + "\n";
    }
    return out;
}

}  // namespace spotrack
