// Plans the same mission under all four cost modes on a slanted ridge and
// prints the resulting costs and terrain exposure.

#include <cstdio>

#include "ork/grid.hpp"
#include "ork/hybrid_astar.hpp"
#include "ork/terrain_synth.hpp"

int main() {
    using namespace ork;
    using namespace ork::terrain;

    TerrainRecipe ridge = TerrainRecipe::ridge(1.5, 2.5, deg2rad(20.0));
    ridge.saddle_depth = 0.8;
    ridge.saddle_pos = 8.0;
    ridge.saddle_width = 3.0;
    const HeightGrid h = generate_synthetic_terrain(ridge, 1);
    const LayerStack stack = build_layer_stack(h, {});

    sim::VehicleParams vehicle;
    planner::PlanState start{-15.0, 0.0, 0.0};
    planner::PlanState goal{15.0, 0.0, 0.0};

    for (const char* mode : {"DFT", "EAT", "GAT", "RAT"}) {
        planner::PlannerParams params;
        params.mode = planner::parse_cost_mode(mode);
        params.w = 2.0;
        const planner::MissionPlan plan = planner::plan(stack, start, goal, vehicle, params);
        double climb = 0.0;
        for (std::size_t i = 1; i < plan.poses.size(); ++i) {
            const double dz = stack.query_height(plan.poses[i].x, plan.poses[i].y) -
                              stack.query_height(plan.poses[i - 1].x, plan.poses[i - 1].y);
            if (dz > 0.0) climb += dz;
        }
        std::printf("%s: poses=%zu cost=%.3f expansions=%ld climb=%.2f m\n", mode,
                    plan.poses.size(), plan.total_cost, plan.expansions, climb);
    }
    return 0;
}
