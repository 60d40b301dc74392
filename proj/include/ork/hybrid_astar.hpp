#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ork/common.hpp"
#include "ork/grid.hpp"
#include "ork/vehicle.hpp"

namespace ork::planner {

struct PlanState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // rad
};

enum class CostMode { kDefault, kElevationAware, kGradientAware, kRolloverAware };

inline CostMode parse_cost_mode(const std::string& name) {
    if (name == "DFT") return CostMode::kDefault;
    if (name == "EAT") return CostMode::kElevationAware;
    if (name == "GAT") return CostMode::kGradientAware;
    if (name == "RAT") return CostMode::kRolloverAware;
    throw ConfigError("unknown planner mode: " + name);
}

inline std::string cost_mode_name(CostMode m) {
    switch (m) {
        case CostMode::kDefault: return "DFT";
        case CostMode::kElevationAware: return "EAT";
        case CostMode::kGradientAware: return "GAT";
        case CostMode::kRolloverAware: return "RAT";
    }
    throw ConfigError("unknown planner mode");
}

struct PlannerParams {
    CostMode mode = CostMode::kDefault;
    double w = 1.0;                // terrain-term weight
    double arc_length = 1.0;       // m, motion primitive length
    int heading_bins = 16;
    int steering_angles = 5;       // odd; spans [-delta_lim, +delta_lim]
    double collision_step = 0.25;  // m, sub-sampling along primitives
    double goal_pos_tol = 0.5;     // m
    double goal_heading_tol = deg2rad(30.0);
    long max_expansions = 300000;
    double cost_floor_frac = 0.01;  // edges floored at this fraction of length

    void validate() const {
        if (arc_length <= 0.0 || collision_step <= 0.0)
            throw ConfigError("PlannerParams: lengths must be > 0");
        if (heading_bins < 4) throw ConfigError("PlannerParams: need >= 4 heading bins");
        if (steering_angles < 3 || steering_angles % 2 == 0)
            throw ConfigError("PlannerParams: steering_angles must be odd and >= 3");
        if (max_expansions < 1) throw ConfigError("PlannerParams: max_expansions must be >= 1");
    }
};

struct MissionPlan {
    std::vector<PlanState> poses;
    std::vector<double> edge_costs;  // poses.size()-1 entries
    CostMode mode = CostMode::kDefault;
    double w = 0.0;
    double total_cost = 0.0;
    long expansions = 0;
};

namespace detail {

inline PlanState advance_arc(const PlanState& s, double kappa, double ds) {
    PlanState n;
    if (std::abs(kappa) < 1e-12) {
        n.x = s.x + ds * std::cos(s.heading);
        n.y = s.y + ds * std::sin(s.heading);
        n.heading = s.heading;
    } else {
        n.heading = wrap_pi(s.heading + kappa * ds);
        n.x = s.x + (std::sin(s.heading + kappa * ds) - std::sin(s.heading)) / kappa;
        n.y = s.y - (std::cos(s.heading + kappa * ds) - std::cos(s.heading)) / kappa;
    }
    return n;
}

inline bool cell_free(const terrain::LayerStack& stack, double x, double y) {
    if (!stack.contains(x, y)) return false;
    auto [i, j] = stack.height.nearest_cell(x, y);
    return stack.is_free(i, j);
}

inline bool arc_collision_free(const terrain::LayerStack& stack, const PlanState& s, double kappa,
                               double arc_length, double step) {
    const int samples = std::max(1, static_cast<int>(std::ceil(arc_length / step)));
    for (int k = 1; k <= samples; ++k) {
        const PlanState p = advance_arc(s, kappa, arc_length * k / samples);
        if (!cell_free(stack, p.x, p.y)) return false;
    }
    return true;
}

}  // namespace detail

/// Forward arc successors for the steering primitive set, collision-checked
/// against the mask layer. Returns (state, straight-line edge length).
inline std::vector<std::pair<PlanState, double>> successors(const PlanState& s,
                                                            const sim::VehicleParams& vehicle,
                                                            const PlannerParams& params,
                                                            const terrain::LayerStack& stack) {
    std::vector<std::pair<PlanState, double>> out;
    out.reserve(params.steering_angles);
    const int half = params.steering_angles / 2;
    for (int k = -half; k <= half; ++k) {
        const double delta = vehicle.delta_lim * k / half;
        const double kappa = std::tan(delta) / vehicle.wheelbase;
        if (!detail::arc_collision_free(stack, s, kappa, params.arc_length, params.collision_step))
            continue;
        PlanState n = detail::advance_arc(s, kappa, params.arc_length);
        out.emplace_back(n, std::hypot(n.x - s.x, n.y - s.y));
    }
    return out;
}

/// Edge cost under the selected heuristic mode. Terrain gradients are sampled
/// at the edge midpoint; all outputs are floored at a fraction of the edge
/// length so downhill elevation credit cannot produce non-positive costs.
inline double edge_cost(const PlanState& s1, const PlanState& s2, CostMode mode,
                        const terrain::LayerStack& stack, double w,
                        double cost_floor_frac = 0.01) {
    const double len = std::hypot(s2.x - s1.x, s2.y - s1.y);
    if (len <= 0.0) return 0.0;
    double cost = len;
    switch (mode) {
        case CostMode::kDefault:
            break;
        case CostMode::kElevationAware: {
            const double z1 = stack.query_height(s1.x, s1.y);
            const double z2 = stack.query_height(s2.x, s2.y);
            cost += w * (z2 - z1);
            break;
        }
        case CostMode::kGradientAware:
        case CostMode::kRolloverAware: {
            const double mx = 0.5 * (s1.x + s2.x), my = 0.5 * (s1.y + s2.y);
            const Eigen::Vector2d g = stack.query_gradient(mx, my);
            const double ux = (s2.x - s1.x) / len, uy = (s2.y - s1.y) / len;
            const double proj = (mode == CostMode::kGradientAware)
                                    ? g.x() * ux + g.y() * uy        // along heading
                                    : g.x() * -uy + g.y() * ux;      // perpendicular
            cost += w * len * terrain::gradient_cost(proj, stack.g_max);
            break;
        }
        default:
            throw ConfigError("edge_cost: unknown mode");
    }
    return std::max(cost, cost_floor_frac * len);
}

/// Hybrid A* over (cell, heading-bin) buckets with deterministic
/// lexicographic (f, h, insertion) tie-breaking.
inline MissionPlan plan(const terrain::LayerStack& stack, const PlanState& start,
                        const PlanState& goal, const sim::VehicleParams& vehicle,
                        const PlannerParams& params) {
    params.validate();
    vehicle.validate();
    if (!detail::cell_free(stack, start.x, start.y)) throw NoPathError("plan: start cell not free");
    if (!detail::cell_free(stack, goal.x, goal.y)) throw NoPathError("plan: goal cell not free");

    MissionPlan result;
    result.mode = params.mode;
    result.w = params.w;

    auto at_goal = [&](const PlanState& s) {
        return std::hypot(s.x - goal.x, s.y - goal.y) <= params.goal_pos_tol &&
               std::abs(wrap_pi(s.heading - goal.heading)) <= params.goal_heading_tol;
    };
    if (at_goal(start)) {
        result.poses = {start};
        return result;
    }

    struct Node {
        PlanState state;
        double g = 0.0;
        long parent = -1;
        double edge_cost = 0.0;
    };
    struct QueueEntry {
        double f, h;
        long seq;
        long node;
        bool operator>(const QueueEntry& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return seq > o.seq;
        }
    };

    const int hb = params.heading_bins;
    auto bucket = [&](const PlanState& s) -> std::int64_t {
        auto [i, j] = stack.height.nearest_cell(s.x, s.y);
        double a = wrap_pi(s.heading) + std::numbers::pi;  // [0, 2pi)
        int hbin = static_cast<int>(a / (2.0 * std::numbers::pi) * hb);
        if (hbin >= hb) hbin = hb - 1;
        return (static_cast<std::int64_t>(i) * stack.cols() + j) * hb + hbin;
    };
    auto heuristic = [&](const PlanState& s) { return std::hypot(s.x - goal.x, s.y - goal.y); };

    std::vector<Node> arena;
    std::vector<double> best_g(static_cast<std::size_t>(stack.rows()) * stack.cols() * hb,
                               std::numeric_limits<double>::infinity());
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;

    arena.push_back({start, 0.0, -1, 0.0});
    best_g[bucket(start)] = 0.0;
    long seq = 0;
    open.push({heuristic(start), heuristic(start), seq++, 0});

    long expansions = 0;
    long found = -1;
    while (!open.empty()) {
        const QueueEntry top = open.top();
        open.pop();
        const Node node = arena[top.node];  // copy: arena may reallocate below
        if (node.g > best_g[bucket(node.state)] + 1e-12) continue;  // stale entry
        if (at_goal(node.state)) {
            found = top.node;
            break;
        }
        if (++expansions > params.max_expansions)
            throw ResourceError("plan: node expansion cap exceeded");

        for (const auto& [succ, len] : successors(node.state, vehicle, params, stack)) {
            (void)len;
            const double ec =
                edge_cost(node.state, succ, params.mode, stack, params.w, params.cost_floor_frac);
            const double g2 = node.g + ec;
            const std::int64_t b = bucket(succ);
            if (g2 + 1e-12 < best_g[b]) {
                best_g[b] = g2;
                arena.push_back({succ, g2, top.node, ec});
                open.push({g2 + heuristic(succ), heuristic(succ), seq++, static_cast<long>(arena.size()) - 1});
            }
        }
    }
    result.expansions = expansions;
    if (found < 0) throw NoPathError("plan: open set exhausted without reaching goal");

    std::vector<long> chain;
    for (long n = found; n >= 0; n = arena[n].parent) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());
    for (long n : chain) {
        result.poses.push_back(arena[n].state);
        if (arena[n].parent >= 0) result.edge_costs.push_back(arena[n].edge_cost);
    }
    result.total_cost = arena[found].g;
    return result;
}

}  // namespace ork::planner
