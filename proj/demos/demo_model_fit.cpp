// Collects a short scripted dataset on a ramp, fits the curvature-binned
// model family, and reports per-bin sample counts and one-step fit error.

#include <cstdio>

#include "ork/edmd.hpp"
#include "ork/excitation.hpp"
#include "ork/snapshots.hpp"
#include "ork/terrain_synth.hpp"

int main() {
    using namespace ork;

    const auto grid = terrain::generate_synthetic_terrain(
        terrain::TerrainRecipe::ramp(deg2rad(8.0)), 2);
    const auto stack = terrain::build_layer_stack(grid, {});
    sim::VehicleParams vehicle;

    std::vector<sim::EpisodeLog> logs;
    for (int e = 0; e < 6; ++e) {
        sim::ExcitationScript script;
        script.throttle = 0.1 * (1 + e % 5);
        script.steering = e % 2 ? sim::SteerScriptKind::kChirp : sim::SteerScriptKind::kPwcRandom;
        script.duration_s = 30.0;
        logs.push_back(sim::collect_episode(script, stack, vehicle, 1.0 / 30.0, 100 + e));
    }

    const auto dataset = koopman::build_snapshots(logs, {}, {});
    for (int b = 0; b < dataset.geometry.q; ++b) {
        const auto& bin = dataset.bins[b];
        if (bin.count() == 0) {
            std::printf("bin %d: empty\n", b);
            continue;
        }
        const auto model = koopman::fit_edmd(bin, 1e-8);
        std::printf("bin %d: samples=%ld one-step rmse=%.3e\n", b,
                    static_cast<long>(bin.count()), koopman::one_step_rmse(model, bin));
    }
    return 0;
}
