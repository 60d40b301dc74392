#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ork/common.hpp"
#include "ork/curvature.hpp"
#include "ork/grid.hpp"
#include "ork/vehicle.hpp"

namespace ork::sim {

// Scripted steering excitation stands in for human teleoperation. Two script
// families with distinct randomization (periodic sweeps vs. piecewise-constant
// holds) mirror the two-driver split of the source datasets.

enum class SteerScriptKind { kNone, kSineSweep, kPwcRandom, kChirp };

inline SteerScriptKind parse_steer_script(const std::string& name) {
    if (name == "none") return SteerScriptKind::kNone;
    if (name == "sine_sweep") return SteerScriptKind::kSineSweep;
    if (name == "pwc_random") return SteerScriptKind::kPwcRandom;
    if (name == "chirp") return SteerScriptKind::kChirp;
    throw ConfigError("unknown steering script: " + name);
}

inline std::string steer_script_name(SteerScriptKind k) {
    switch (k) {
        case SteerScriptKind::kNone: return "none";
        case SteerScriptKind::kSineSweep: return "sine_sweep";
        case SteerScriptKind::kPwcRandom: return "pwc_random";
        case SteerScriptKind::kChirp: return "chirp";
    }
    return "none";
}

struct ExcitationScript {
    double throttle = 0.3;  // norm%, 0..1
    SteerScriptKind steering = SteerScriptKind::kNone;
    double duration_s = 40.0;
    double sine_freq_hz = 0.15;
    double chirp_f0_hz = 0.03;
    double chirp_f1_hz = 0.35;
    double pwc_min_hold_s = 0.4;
    double pwc_max_hold_s = 1.6;
};

struct EpisodeRow {
    double t, x, y, yaw, v, delta, v_cmd, delta_cmd, gx, gy, kappa;
};

struct EpisodeLog {
    std::vector<EpisodeRow> rows;
    bool truncated = false;  // vehicle left the terrain extent
    std::uint64_t seed = 0;
};

namespace detail {

class SteerSchedule {
public:
    SteerSchedule(const ExcitationScript& script, double delta_lim, std::uint64_t seed)
        : script_(script), delta_lim_(delta_lim), rng_(seed) {
        phase_sign_ = rng_.uniform() < 0.5 ? 1.0 : -1.0;
    }

    double command(double t) {
        switch (script_.steering) {
            case SteerScriptKind::kNone:
                return 0.0;
            case SteerScriptKind::kSineSweep: {
                // amplitude ramps over the episode so curvature sweeps bins
                const double amp = delta_lim_ * std::min(1.0, 0.2 + 0.8 * t / script_.duration_s);
                return phase_sign_ * amp * std::sin(2.0 * std::numbers::pi * script_.sine_freq_hz * t);
            }
            case SteerScriptKind::kChirp: {
                const double f0 = script_.chirp_f0_hz, f1 = script_.chirp_f1_hz;
                const double sweep = f0 + 0.5 * (f1 - f0) * t / script_.duration_s;
                return phase_sign_ * delta_lim_ * std::sin(2.0 * std::numbers::pi * sweep * t);
            }
            case SteerScriptKind::kPwcRandom: {
                if (t >= hold_until_) {
                    level_ = rng_.uniform(-delta_lim_, delta_lim_);
                    hold_until_ = t + rng_.uniform(script_.pwc_min_hold_s, script_.pwc_max_hold_s);
                }
                return level_;
            }
        }
        return 0.0;
    }

private:
    ExcitationScript script_;
    double delta_lim_;
    Rng rng_;
    double phase_sign_ = 1.0;
    double level_ = 0.0;
    double hold_until_ = -1.0;
};

}  // namespace detail

/// Run one scripted episode at a fixed rate and log state, commands, local
/// gradients, and instantaneous curvature per tick. Deterministic per seed.
inline EpisodeLog collect_episode(const ExcitationScript& script, const terrain::LayerStack& stack,
                                  const VehicleParams& params, double dt, std::uint64_t seed,
                                  VehicleState start = {}) {
    params.validate();
    if (script.throttle < 0.0 || script.throttle > 1.0)
        throw ParameterError("collect_episode: throttle must be in [0,1]");
    if (script.duration_s <= 0.0) throw ParameterError("collect_episode: duration must be > 0");

    detail::SteerSchedule steer(script, params.delta_lim, derive_seed(seed, 1));
    EpisodeLog log;
    log.seed = seed;
    const int ticks = static_cast<int>(std::lround(script.duration_s / dt));
    log.rows.reserve(ticks);

    VehicleState s = start;
    s.t = 0.0;
    const double v_cmd = script.throttle * params.v_max;
    for (int k = 0; k < ticks; ++k) {
        if (!stack.contains(s.x, s.y)) {
            log.truncated = true;
            break;
        }
        const Eigen::Vector2d g = stack.query_gradient(s.x, s.y);
        const ControlInput u{v_cmd, steer.command(s.t)};
        log.rows.push_back({s.t, s.x, s.y, s.yaw, s.v, s.delta, u.v_cmd, u.delta_cmd, g.x(), g.y(), 0.0});
        const StepResult r = step(s, u, stack, params, dt);
        s = r.state;
        if (!r.in_bounds) {
            log.truncated = true;
            break;
        }
    }

    // curvature column is a post-pass over the completed log
    if (log.rows.size() >= 3) {
        std::vector<double> yaw(log.rows.size()), v(log.rows.size());
        for (std::size_t i = 0; i < log.rows.size(); ++i) {
            yaw[i] = log.rows[i].yaw;
            v[i] = log.rows[i].v;
        }
        try {
            const std::vector<double> kappa = koopman::instantaneous_curvature(yaw, v, dt);
            for (std::size_t i = 0; i < log.rows.size(); ++i) log.rows[i].kappa = kappa[i];
        } catch (const DataError&) {
            // stationary episode: kappa stays zero
        }
    }
    return log;
}

}  // namespace ork::sim
