#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "ork/common.hpp"

namespace ork::koopman {

struct PolarPose {
    double r = 0.0;      // m
    double theta = 0.0;  // rad, (-pi, pi]
};

using LiftedState = Eigen::Matrix<double, 7, 1>;
inline constexpr int kLiftDim = 7;

/// Monomial dictionary [1, r cos, r sin, r^2 cos, r^2 sin, r^3 cos, r^3 sin].
inline LiftedState lift(const PolarPose& x) {
    const double c = std::cos(x.theta), s = std::sin(x.theta);
    LiftedState z;
    z << 1.0, x.r * c, x.r * s, x.r * x.r * c, x.r * x.r * s, x.r * x.r * x.r * c,
        x.r * x.r * x.r * s;
    return z;
}

inline PolarPose to_polar(double x, double y) {
    PolarPose p;
    p.r = std::hypot(x, y);
    p.theta = (p.r > 0.0) ? std::atan2(y, x) : 0.0;
    if (p.theta <= -std::numbers::pi) p.theta += 2.0 * std::numbers::pi;
    return p;
}

struct Pose2d {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

/// World point expressed as (range, bearing) in the anchor's body frame.
inline PolarPose world_to_anchor_polar(const Pose2d& anchor, double wx, double wy) {
    const double dx = wx - anchor.x, dy = wy - anchor.y;
    const double c = std::cos(anchor.yaw), s = std::sin(anchor.yaw);
    return to_polar(c * dx + s * dy, -s * dx + c * dy);
}

inline std::pair<double, double> anchor_polar_to_world(const Pose2d& anchor, const PolarPose& p) {
    const double lx = p.r * std::cos(p.theta), ly = p.r * std::sin(p.theta);
    const double c = std::cos(anchor.yaw), s = std::sin(anchor.yaw);
    return {anchor.x + c * lx - s * ly, anchor.y + s * lx + c * ly};
}

/// Rotate a world-frame vector (e.g. a terrain gradient) into a body frame.
inline Eigen::Vector2d rotate_into_frame(double yaw, const Eigen::Vector2d& v) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

}  // namespace ork::koopman
