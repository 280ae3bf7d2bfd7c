#pragma once

#include "spotrack/gaussian.hpp"

#include <algorithm>

namespace spotrack {

/// Image-plane box in the bottom-center convention: (x, y) is the middle of
/// the bottom edge, in pixels.
struct BBox2D {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    [[nodiscard]] double left() const { return x - 0.5 * width; }
    [[nodiscard]] double right() const { return x + 0.5 * width; }
    [[nodiscard]] double top() const { return y - height; }
    [[nodiscard]] double bottom() const { return y; }
    [[nodiscard]] double area() const { return width * height; }

    [[nodiscard]] Vector4 vec() const { return {x, y, width, height}; }
    static BBox2D from_vec(const Vector4& v) { return {v[0], v[1], v[2], v[3]}; }
    static BBox2D from_top_left(double left, double top, double w, double h) {
        return {left + 0.5 * w, top + h, w, h};
    }

    friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

/// Intersection over union; 0 when both boxes are degenerate and exactly 1
/// for identical boxes of positive area.
[[nodiscard]] inline double iou(const BBox2D& a, const BBox2D& b) {
    if (a == b && a.area() > 0.0) return 1.0;
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace spotrack
