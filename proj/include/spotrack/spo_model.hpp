#pragma once

#include "spotrack/bbox.hpp"
#include "spotrack/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spotrack {

// State layout: [x, vx, y, vy, z, vz, width, height], metres and m/s.
namespace idx {
inline constexpr int x = 0, vx = 1, y = 2, vy = 3, z = 4, vz = 5, width = 6, height = 7;
}

/// Depths at or below this are rejected by `project`.
inline constexpr double kDepthEpsilon = 1e-9;

/// Static pinhole camera.
struct CameraModel {
    double focal_length = 1e-3;  // m
    double pixel_size = 1e-6;    // m
    double principal_x = 0.0;    // px
    double principal_y = 0.0;    // px
    double image_width = 0.0;    // px
    double image_height = 0.0;   // px
    double frame_rate = 30.0;    // Hz

    /// Hand-picked intrinsics with the principal point at the image centre.
    static CameraModel with_defaults(double width, double height, double frame_rate) {
        CameraModel c;
        c.image_width = width;
        c.image_height = height;
        c.principal_x = 0.5 * width;
        c.principal_y = 0.5 * height;
        c.frame_rate = frame_rate;
        return c;
    }

    [[nodiscard]] double period() const { return 1.0 / frame_rate; }
    /// focal length expressed in pixels
    [[nodiscard]] double focal_px() const { return focal_length / pixel_size; }

    void validate() const {
        if (!(focal_length > 0.0) || !(pixel_size > 0.0) || !(image_width > 0.0) || !(image_height > 0.0) ||
            !(frame_rate > 0.0))
            throw std::invalid_argument("camera: focal length, pixel size, image size and frame rate must be positive");
    }
};

struct MotionParams {
    double q_x = 1.0, q_y = 1.0, q_z = 1.0;  // m^2 s^-3
    double mean_width = 0.85;                 // m
    double mean_height = 1.65;                // m
    double tau_width = 0.4;                   // s
    double tau_height = 4.0;                  // s
    double sigma_width = 0.45 / 3.0;          // m
    double sigma_height = 0.3 / 3.0;          // m

    void validate() const {
        for (double v : {q_x, q_y, q_z, mean_width, mean_height, tau_width, tau_height, sigma_width, sigma_height})
            if (!(v > 0.0)) throw std::invalid_argument("motion parameters must be strictly positive");
    }
};

/// M/M/inf population parameters.
struct SurvivalBirthParams {
    double mean_lifespan = 7.481;  // s
    double birth_rate = 1.925;     // objects / s

    void validate() const {
        if (!(mean_lifespan > 0.0)) throw std::invalid_argument("mean lifespan must be positive");
        if (!(birth_rate >= 0.0)) throw std::invalid_argument("birth rate must be non-negative");
    }
};

struct DetectionParams {
    double detection_probability = 0.529;
    double clutter_rate = 1.552;  // expected clutter detections per frame
    /// Multiplies the identified noise covariance; 1 reproduces it.
    double noise_scale = 1.0;

    void validate() const {
        if (!(detection_probability >= 0.0 && detection_probability <= 1.0))
            throw std::invalid_argument("detection probability must be in [0, 1]");
        if (!(clutter_rate >= 0.0)) throw std::invalid_argument("clutter rate must be non-negative");
        if (!(noise_scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
    }
};

struct BirthDesign {
    double z_min = 2.0;   // m
    double z_max = 15.0;  // m
    int components = 10;
    double max_speed = 3.0;  // m/s

    void validate() const {
        if (!(z_min > 0.0 && z_min < z_max)) throw std::invalid_argument("birth: require 0 < z_min < z_max");
        if (components < 1) throw std::invalid_argument("birth: need at least one component");
        if (!(max_speed > 0.0)) throw std::invalid_argument("birth: max speed must be positive");
    }
};

struct BirthModel {
    double beta = 0.0;  // expected newborn count per step
    GaussianMixture<kStateDim> mixture;
};

/// Uniform clutter over an enlarged box space, so partially visible boxes
/// are covered.
struct ClutterModel {
    double rate = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
    double w_lo = 0.0, w_hi = 0.0;
    double h_lo = 0.0, h_hi = 0.0;

    static ClutterModel for_camera(const CameraModel& cam, double rate) {
        const double W = cam.image_width, H = cam.image_height;
        return {rate, -0.25 * W, 1.25 * W, 0.0, 1.5 * H, 0.0, 0.5 * W, 0.0, 4.0 / 3.0 * H};
    }

    [[nodiscard]] double log_volume() const {
        return std::log(x_hi - x_lo) + std::log(y_hi - y_lo) + std::log(w_hi - w_lo) + std::log(h_hi - h_lo);
    }

    [[nodiscard]] bool contains(const BBox2D& z) const {
        return z.x >= x_lo && z.x <= x_hi && z.y >= y_lo && z.y <= y_hi && z.width >= w_lo && z.width <= w_hi &&
               z.height >= h_lo && z.height <= h_hi;
    }

    [[nodiscard]] double log_density(const BBox2D& z) const {
        return contains(z) ? -log_volume() : -std::numeric_limits<double>::infinity();
    }
};

// ---------------------------------------------------------------------------

/// Perspective projection of the planar 3D box to a bottom-centre 2D box.
[[nodiscard]] inline Vector4 project(const Vector8& s, const CameraModel& cam) {
    const double z = s[idx::z];
    if (!(z > kDepthEpsilon)) throw std::domain_error("non-positive depth");
    const double k = cam.focal_length / (cam.pixel_size * z);
    return {k * s[idx::x] + cam.principal_x, k * s[idx::y] + cam.principal_y, k * s[idx::width],
            k * s[idx::height]};
}

/// `project` with the depth clamped from below. Used wherever sigma points or
/// sampled states may fall behind the camera.
[[nodiscard]] inline Vector4 project_clamped(const Vector8& s, const CameraModel& cam, double min_depth) {
    Vector8 c = s;
    c[idx::z] = std::max(c[idx::z], min_depth);
    return project(c, cam);
}

/// Identified FRCNN noise shape; scaled by min(width, height)^2 * 1e-5.
[[nodiscard]] inline Matrix4 measurement_noise_shape() {
    Matrix4 m;
    m << 2.029, 0.223, 0.073, 0.248,  //
        0.223, 3.051, 2.549, 0.285,   //
        0.073, 2.549, 4.880, 0.179,   //
        0.248, 0.285, 0.179, 2.032;
    return m;
}

[[nodiscard]] inline double noise_gamma(const CameraModel& cam) { return std::min(cam.image_width, cam.image_height); }

[[nodiscard]] inline Matrix4 measurement_covariance(const CameraModel& cam) {
    const double g = noise_gamma(cam);
    return g * g * 1e-5 * measurement_noise_shape();
}

struct Transition {
    Matrix8 F = Matrix8::Identity();
    Vector8 offset = Vector8::Zero();
    Matrix8 Q = Matrix8::Zero();
};

/// Exact discretization of the continuous-time pedestrian model over `T`
/// seconds: nearly-constant velocity in x, y, z and first-order decay of
/// width/height towards their means.
[[nodiscard]] inline Transition transition(double T, const MotionParams& p) {
    if (!(T >= 0.0)) throw std::invalid_argument("transition: negative period");
    Transition t;
    const double a_w = std::exp(-T / p.tau_width);
    const double a_h = std::exp(-T / p.tau_height);
    Eigen::Matrix2d block_q;
    block_q << T * T * T / 3.0, T * T / 2.0, T * T / 2.0, T;
    const double q[3] = {p.q_x, p.q_y, p.q_z};
    for (int a = 0; a < 3; ++a) {
        t.F(2 * a, 2 * a + 1) = T;
        t.Q.block<2, 2>(2 * a, 2 * a) = q[a] * block_q;
    }
    t.F(idx::width, idx::width) = a_w;
    t.F(idx::height, idx::height) = a_h;
    t.offset[idx::width] = (1.0 - a_w) * p.mean_width;
    t.offset[idx::height] = (1.0 - a_h) * p.mean_height;
    t.Q(idx::width, idx::width) = p.sigma_width * p.sigma_width * (1.0 - a_w * a_w);
    t.Q(idx::height, idx::height) = p.sigma_height * p.sigma_height * (1.0 - a_h * a_h);
    return t;
}

/// Exponential-lifespan survival over T seconds.
[[nodiscard]] inline double survival_probability(double T, double mean_lifespan) {
    if (!(T >= 0.0) || !(mean_lifespan > 0.0)) throw std::invalid_argument("survival_probability: bad arguments");
    return std::exp(-T / mean_lifespan);
}

/// Expected newborns per step under Poisson arrivals with rate `eta` that
/// survive to the end of the step.
[[nodiscard]] inline double birth_expected_count(double T, double mean_lifespan, double eta) {
    if (!(eta >= 0.0)) throw std::invalid_argument("birth_expected_count: negative rate");
    return eta * mean_lifespan * (1.0 - survival_probability(T, mean_lifespan));
}

[[nodiscard]] inline double clutter_log_density(const BBox2D& z, const CameraModel& cam) {
    return ClutterModel::for_camera(cam, 1.0).log_density(z);
}

/// Depth means of the birth components, uniform in inverse depth.
[[nodiscard]] inline std::vector<double> birth_depths(const BirthDesign& d) {
    d.validate();
    std::vector<double> z;
    const double a = 1.0 / d.z_min, b = 1.0 / d.z_max;
    if (d.components == 1) return {2.0 / (a + b)};
    for (int i = 0; i < d.components; ++i) z.push_back(1.0 / (a + (b - a) * i / (d.components - 1)));
    return z;
}

/// Gaussian-mixture birth spanning the optical axis. Each component is
/// diagonal: its sqrt(8)-sigma points in x and y land on the image borders at
/// the component's depth, and its sqrt(8)-sigma z interval stops halfway to
/// the nearest neighbouring depth.
[[nodiscard]] inline BirthModel build_birth(const CameraModel& cam, const BirthDesign& design,
                                            const MotionParams& motion, double beta) {
    cam.validate();
    motion.validate();
    const auto depths = birth_depths(design);
    const double spread = std::sqrt(static_cast<double>(kStateDim));
    const double n = static_cast<double>(depths.size());
    BirthModel out;
    out.beta = beta;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const double z = depths[i];
        const double m_per_px = z / cam.focal_px();
        double gap = design.z_max - design.z_min;  // single component: whole range
        if (i > 0) gap = std::min(gap, std::abs(z - depths[i - 1]));
        if (i + 1 < depths.size()) gap = std::min(gap, std::abs(depths[i + 1] - z));

        StateDensity g;
        g.mean[idx::x] = (0.5 * cam.image_width - cam.principal_x) * m_per_px;
        g.mean[idx::y] = (0.5 * cam.image_height - cam.principal_y) * m_per_px;
        g.mean[idx::z] = z;
        g.mean[idx::width] = motion.mean_width;
        g.mean[idx::height] = motion.mean_height;

        const double sx = 0.5 * cam.image_width * m_per_px / spread;
        const double sy = 0.5 * cam.image_height * m_per_px / spread;
        const double sz = 0.5 * gap / spread;
        const double sv = design.max_speed / 3.0;
        Vector8 var;
        var << sx * sx, sv * sv, sy * sy, sv * sv, sz * sz, sv * sv, motion.sigma_width * motion.sigma_width,
            motion.sigma_height * motion.sigma_height;
        g.cov = var.asDiagonal();
        out.mixture.add(1.0 / n, std::move(g));
    }
    return out;
}

/// Every model parameter that is not derived from the camera.
struct ModelParams {
    MotionParams motion;
    SurvivalBirthParams population;
    DetectionParams detection;
    BirthDesign birth;
    /// Depth floor used when projecting sigma points and simulated states.
    double min_depth = 0.1;

    void validate() const {
        motion.validate();
        population.validate();
        detection.validate();
        birth.validate();
        if (!(min_depth > kDepthEpsilon)) throw std::invalid_argument("min_depth must be positive");
    }
};

/// The full standard point-object model specialised to one camera (and
/// therefore one sampling period).
struct SpoModel {
    CameraModel camera;
    ModelParams params;

    double period = 0.0;
    double survival = 1.0;
    Transition motion;
    Matrix4 R = Matrix4::Identity();
    BirthModel birth;
    ClutterModel clutter;

    [[nodiscard]] double detection_probability() const { return params.detection.detection_probability; }

    [[nodiscard]] Vector4 measure(const Vector8& s) const { return project_clamped(s, camera, params.min_depth); }

    static SpoModel build(const ModelParams& params, const CameraModel& camera) {
        params.validate();
        camera.validate();
        SpoModel m;
        m.camera = camera;
        m.params = params;
        m.period = camera.period();
        m.survival = survival_probability(m.period, params.population.mean_lifespan);
        m.motion = transition(m.period, params.motion);
        m.R = params.detection.noise_scale * measurement_covariance(camera);
        const double beta =
            birth_expected_count(m.period, params.population.mean_lifespan, params.population.birth_rate);
        m.birth = build_birth(camera, params.birth, params.motion, beta);
        m.clutter = ClutterModel::for_camera(camera, params.detection.clutter_rate);
        return m;
    }
};

}  // namespace spotrack
