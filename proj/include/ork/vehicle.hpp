#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "ork/common.hpp"
#include "ork/grid.hpp"

namespace ork::sim {

/// Two-piece cubic tire friction curve. Segment 1 runs from the origin anchor
/// to the extremum with zero slope (and zero curvature) at the extremum;
/// segment 2 eases from the extremum to the asymptote with zero slope at both
/// ends. Beyond the asymptote the force stays at the asymptote value.
struct TireSpline {
    double s0 = 0.0, f0 = 0.0;
    double se = 0.25, fe = 1.0;
    double sa = 0.8, fa = 0.6;

    void validate() const {
        if (!(s0 < se && se < sa)) throw ParameterError("TireSpline: need S0 < Se < Sa");
    }

    double eval(double s) const {
        if (s <= s0) return f0;
        if (s >= sa) return fa;
        if (s < se) {
            // Hermite with end tangent 0; start tangent 3*secant makes the
            // curve a pure cubic in (s - se), monotone on the segment.
            const double d = s - se;
            const double c = (f0 - fe) / ((s0 - se) * (s0 - se) * (s0 - se));
            return fe + c * d * d * d;
        }
        // smoothstep between extremum and asymptote
        const double t = (s - se) / (sa - se);
        const double w = t * t * (3.0 - 2.0 * t);
        return fe + (fa - fe) * w;
    }
};

struct VehicleParams {
    double wheelbase = 0.55;   // m
    double track = 0.4;        // m
    double v_max = 4.8;        // m/s
    double delta_lim = 0.35;   // rad
    double steer_rate = 1.6;          // kappa_delta, rad/s
    double steer_rate_speed_gain = 0.8;  // kappa_v, rad/s
    double mass = 11.0;        // kg
    double velocity_tau = 0.3;  // s, first-order throttle lag
    double gravity_coupling = 0.6;    // scales gravity terms from terrain slope
    double lateral_slide_time = 0.15;  // s, converts side-slope accel to drift speed
    TireSpline tire;

    void validate() const {
        if (wheelbase <= 0.0 || track <= 0.0) throw ParameterError("VehicleParams: geometry must be > 0");
        if (v_max <= 0.0) throw ParameterError("VehicleParams: v_max must be > 0");
        if (!(delta_lim > 0.0 && delta_lim < deg2rad(90.0)))
            throw ParameterError("VehicleParams: delta_lim must be in (0, pi/2)");
        if (velocity_tau <= 0.0) throw ParameterError("VehicleParams: velocity_tau must be > 0");
        tire.validate();
    }

    double max_curvature() const { return std::tan(delta_lim) / wheelbase; }
};

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;    // rad, kept unwrapped
    double v = 0.0;      // m/s
    double delta = 0.0;  // actual steering angle, rad
    double t = 0.0;      // s
};

struct ControlInput {
    double v_cmd = 0.0;      // m/s
    double delta_cmd = 0.0;  // rad

    static ControlInput from_throttle(double tau, double delta_cmd, const VehicleParams& p) {
        if (tau < 0.0 || tau > 1.0) throw ParameterError("ControlInput: throttle must be in [0,1]");
        return {tau * p.v_max, delta_cmd};
    }
};

/// Front wheel angles under the Ackermann constraint; the inner wheel of a
/// turn gets the larger magnitude. Returns (left, right).
inline std::pair<double, double> ackermann_split(double delta, double l, double w) {
    if (!(std::abs(delta) < deg2rad(90.0)))
        throw std::domain_error("ackermann_split: |delta| must be < pi/2");
    if (delta == 0.0) return {0.0, 0.0};
    const double td = std::tan(delta);
    const double left = std::atan(2.0 * l * td / (2.0 * l - w * td));
    const double right = std::atan(2.0 * l * td / (2.0 * l + w * td));
    return {left, right};
}

/// Rate-limited steering actuator: rate kappa_delta + kappa_v * v / v_max,
/// clamped to +-delta_lim, never overshooting the command.
inline double steering_step(double delta_actual, double delta_cmd, double v,
                            const VehicleParams& p, double dt) {
    if (dt <= 0.0) throw ParameterError("steering_step: dt must be > 0");
    const double target = clamp(delta_cmd, -p.delta_lim, p.delta_lim);
    const double rate = p.steer_rate + p.steer_rate_speed_gain * std::abs(v) / p.v_max;
    const double max_move = rate * dt;
    double next = delta_actual;
    if (target > delta_actual)
        next = std::min(delta_actual + max_move, target);
    else if (target < delta_actual)
        next = std::max(delta_actual - max_move, target);
    return clamp(next, -p.delta_lim, p.delta_lim);
}

inline double tire_force(double slip, const TireSpline& spline) { return spline.eval(slip); }

struct StepResult {
    VehicleState state;
    bool in_bounds = true;
};

namespace detail {

struct Deriv {
    double dx, dy, dyaw, dv;
};

inline Deriv dynamics(double yaw, double v, double delta, const ControlInput& u,
                      const Eigen::Vector2d& grad, const VehicleParams& p) {
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double g_along = grad.x() * cy + grad.y() * sy;
    const double g_perp = -grad.x() * sy + grad.y() * cy;
    // gravity pulls the vehicle downhill: braking along the heading, drifting
    // across it with the drift moderated by available tire friction
    const double v_lat = -p.lateral_slide_time * kGravity * p.gravity_coupling * g_perp *
                         p.tire.eval(std::abs(g_perp));
    Deriv d;
    d.dx = v * cy - v_lat * sy;
    d.dy = v * sy + v_lat * cy;
    d.dyaw = v * std::tan(delta) / p.wheelbase;
    d.dv = (clamp(u.v_cmd, 0.0, p.v_max) - v) / p.velocity_tau -
           kGravity * p.gravity_coupling * g_along;
    return d;
}

}  // namespace detail

/// One RK4 step of the kinematic bicycle with terrain-gradient coupling.
/// The steering actuator advances once per step and is held through the
/// integration; the terrain gradient is sampled at the entry pose.
inline StepResult step(const VehicleState& s, const ControlInput& u, const terrain::LayerStack& stack,
                       const VehicleParams& p, double dt) {
    if (!(dt > 0.0 && dt <= 0.1)) throw ParameterError("step: dt must be in (0, 0.1]");
    if (!stack.contains(s.x, s.y)) throw BoundsError("step: state outside terrain extent");

    const Eigen::Vector2d grad = stack.query_gradient(s.x, s.y);
    const double delta = steering_step(s.delta, u.delta_cmd, s.v, p, dt);

    auto f = [&](double yaw, double v) { return detail::dynamics(yaw, v, delta, u, grad, p); };
    const detail::Deriv k1 = f(s.yaw, s.v);
    const detail::Deriv k2 = f(s.yaw + 0.5 * dt * k1.dyaw, s.v + 0.5 * dt * k1.dv);
    const detail::Deriv k3 = f(s.yaw + 0.5 * dt * k2.dyaw, s.v + 0.5 * dt * k2.dv);
    const detail::Deriv k4 = f(s.yaw + dt * k3.dyaw, s.v + dt * k3.dv);

    VehicleState n = s;
    n.x += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    n.y += dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    n.yaw += dt / 6.0 * (k1.dyaw + 2.0 * k2.dyaw + 2.0 * k3.dyaw + k4.dyaw);
    n.v = clamp(s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv), 0.0, p.v_max);
    n.delta = delta;
    n.t += dt;

    return {n, stack.contains(n.x, n.y)};
}

}  // namespace ork::sim
