#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ork/common.hpp"
#include "ork/model_family.hpp"
#include "ork/polar.hpp"
#include "ork/vehicle.hpp"

namespace ork::local_planner {

using koopman::LiftedState;
using koopman::ModelFamily;
using koopman::PolarPose;
using koopman::Pose2d;

/// One forward-reachable rollout per curvature bin, anchored at the current
/// vehicle pose. Polar states are positions in the anchor frame; the world
/// points are the same states rigidly transformed by the anchor pose.
struct CandidateTrajectory {
    int bin_index = -1;
    double kappa_mid = 0.0;
    bool valid = true;
    Eigen::Vector2d u_internal = Eigen::Vector2d::Zero();  // [v(t-1), delta_i]
    std::vector<PolarPose> polar;
    std::vector<std::pair<double, double>> world;
};

/// Steering angle meeting a bin's curvature constraint, clamped to the
/// permissible range: delta_i = atan(l * kappa_mid).
inline double bin_steering(double v_prev, int bin, const koopman::FamilyGeometry& geometry,
                           const sim::VehicleParams& vehicle) {
    (void)v_prev;  // the curvature constraint fixes delta independent of speed
    if (bin < 0 || bin >= geometry.q) throw ConfigError("bin_steering: bin index out of range");
    const double delta = std::atan(vehicle.wheelbase * geometry.midpoint(bin));
    return clamp(delta, -vehicle.delta_lim, vehicle.delta_lim);
}

/// Anchor-frame polar states to world Cartesian points.
inline std::vector<std::pair<double, double>> polar_to_cartesian(std::span<const PolarPose> states,
                                                                 const Pose2d& anchor) {
    std::vector<std::pair<double, double>> out;
    out.reserve(states.size());
    for (const PolarPose& p : states) out.push_back(anchor_polar_to_world(anchor, p));
    return out;
}

/// Roll each bin's model forward N_lp steps from the anchor (r = 0 seed) with
/// that bin's internal control held and the terrain gradient frozen at its
/// anchor value. Candidates that go non-finite are flagged invalid.
inline std::vector<CandidateTrajectory> rollout_candidates(const ModelFamily& family,
                                                           const sim::VehicleState& anchor_state,
                                                           const sim::ControlInput& u_prev,
                                                           const Eigen::Vector2d& g_world, int n_lp,
                                                           const sim::VehicleParams& vehicle) {
    if (!family.complete()) throw ConfigError("rollout_candidates: incomplete model family");
    if (n_lp < 1) throw ConfigError("rollout_candidates: N_lp must be >= 1");

    const Pose2d anchor{anchor_state.x, anchor_state.y, anchor_state.yaw};
    const Eigen::Vector2d g_body = koopman::rotate_into_frame(anchor.yaw, g_world);

    std::vector<CandidateTrajectory> out;
    out.reserve(family.geometry.q);
    for (int b = 0; b < family.geometry.q; ++b) {
        const koopman::KoopmanModel& m = family.models[b];
        CandidateTrajectory cand;
        cand.bin_index = b;
        cand.kappa_mid = family.geometry.midpoint(b);
        cand.u_internal = {u_prev.v_cmd, bin_steering(u_prev.v_cmd, b, family.geometry, vehicle)};

        LiftedState z = koopman::lift({0.0, 0.0});
        cand.polar.reserve(n_lp);
        for (int k = 0; k < n_lp; ++k) {
            z = m.A * z + m.B * cand.u_internal + m.Bg * g_body;
            if (!z.allFinite()) {
                cand.valid = false;
                break;
            }
            const Eigen::Vector2d x = m.C * z;
            if (!x.allFinite()) {
                cand.valid = false;
                break;
            }
            cand.polar.push_back({x(0), x(1)});
        }
        if (cand.valid) cand.world = polar_to_cartesian(cand.polar, anchor);
        out.push_back(std::move(cand));
    }
    return out;
}

struct Selection {
    int phi = -1;                    // winning bin
    double cross_track = 0.0;        // mean point-to-plan distance of the winner
    std::vector<PolarPose> reference;  // x_phi(t -> t+N_lp), anchor frame
};

namespace detail {

inline double point_segment_distance(double px, double py, double ax, double ay, double bx,
                                     double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
    return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

}  // namespace detail

/// Mean cross-track error of a candidate against the plan polyline, matched
/// only inside a lookahead window starting at the plan vertex nearest the
/// anchor.
inline double candidate_cross_track(const CandidateTrajectory& cand,
                                    std::span<const std::pair<double, double>> plan_points,
                                    const Pose2d& anchor, double lookahead) {
    if (cand.world.empty() || plan_points.empty())
        return std::numeric_limits<double>::infinity();

    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < plan_points.size(); ++i) {
        const double d = std::hypot(plan_points[i].first - anchor.x, plan_points[i].second - anchor.y);
        if (d < best) {
            best = d;
            nearest = i;
        }
    }
    std::size_t last = nearest;
    double arc = 0.0;
    while (last + 1 < plan_points.size() && arc < lookahead) {
        arc += std::hypot(plan_points[last + 1].first - plan_points[last].first,
                          plan_points[last + 1].second - plan_points[last].second);
        ++last;
    }

    double acc = 0.0;
    for (const auto& [px, py] : cand.world) {
        double d = std::numeric_limits<double>::infinity();
        if (last == nearest) {
            d = std::hypot(px - plan_points[nearest].first, py - plan_points[nearest].second);
        } else {
            for (std::size_t i = nearest; i < last; ++i)
                d = std::min(d, detail::point_segment_distance(
                                    px, py, plan_points[i].first, plan_points[i].second,
                                    plan_points[i + 1].first, plan_points[i + 1].second));
        }
        acc += d;
    }
    return acc / static_cast<double>(cand.world.size());
}

/// Candidate with the least cross-track error against the mission plan; ties
/// go to the gentler curvature bin. Returns nothing when every candidate is
/// invalid (the caller must stop the vehicle).
inline std::optional<Selection> select_candidate(
    const std::vector<CandidateTrajectory>& candidates,
    std::span<const std::pair<double, double>> plan_points, const Pose2d& anchor,
    double lookahead = 5.0) {
    if (plan_points.empty()) throw ConfigError("select_candidate: empty mission plan");

    int best_bin = -1;
    double best_err = std::numeric_limits<double>::infinity();
    double best_abs_kappa = std::numeric_limits<double>::infinity();
    const CandidateTrajectory* best_cand = nullptr;
    for (const CandidateTrajectory& c : candidates) {
        if (!c.valid) continue;
        const double err = candidate_cross_track(c, plan_points, anchor, lookahead);
        const double ak = std::abs(c.kappa_mid);
        if (err < best_err || (err == best_err && ak < best_abs_kappa)) {
            best_err = err;
            best_abs_kappa = ak;
            best_bin = c.bin_index;
            best_cand = &c;
        }
    }
    if (best_cand == nullptr) return std::nullopt;

    Selection sel;
    sel.phi = best_bin;
    sel.cross_track = best_err;
    sel.reference = best_cand->polar;
    return sel;
}

}  // namespace ork::local_planner
