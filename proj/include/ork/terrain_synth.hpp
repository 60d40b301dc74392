#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ork/common.hpp"
#include "ork/grid.hpp"

namespace ork::terrain {

// Recipes: flat | ramp(angle) | ridge(height, width) | noise(amplitude,
// correlation length) | sum of recipes. Ramp and ridge accept an optional
// azimuth; ridge additionally accepts a saddle notch so fixture terrains can
// expose a low crossing point. Default extent is a 40 m x 40 m map at 0.5 m
// resolution centered on the origin.

enum class TerrainKind { kFlat, kRamp, kRidge, kNoise, kSum };

struct TerrainRecipe {
    TerrainKind kind = TerrainKind::kFlat;

    // grid geometry (shared by all kinds; parts of a sum inherit the parent's)
    double extent_x = 40.0;
    double extent_y = 40.0;
    double resolution = 0.5;

    // ramp: height rises along the azimuth direction at tan(angle)
    double ramp_angle = 0.0;    // rad
    double azimuth = 0.0;       // rad, ccw from +x; ridge crest runs along it

    // ridge: gaussian cross-section around a crest line through the center
    double ridge_height = 0.0;  // m
    double ridge_width = 0.0;   // gaussian sigma, m
    double saddle_depth = 0.0;  // 0..1 fraction of crest height removed
    double saddle_pos = 0.0;    // along-crest coordinate of the notch, m
    double saddle_width = 1.0;  // gaussian sigma of the notch, m

    // noise: smoothed white noise rescaled to the given max |height|
    double noise_amplitude = 0.0;      // m
    double correlation_length = 0.0;   // m

    std::vector<TerrainRecipe> parts;  // kSum

    static TerrainRecipe flat() { return {}; }

    static TerrainRecipe ramp(double angle_rad, double azimuth_rad = 0.0) {
        TerrainRecipe r;
        r.kind = TerrainKind::kRamp;
        r.ramp_angle = angle_rad;
        r.azimuth = azimuth_rad;
        return r;
    }

    static TerrainRecipe ridge(double height_m, double width_m, double azimuth_rad = 0.0) {
        TerrainRecipe r;
        r.kind = TerrainKind::kRidge;
        r.ridge_height = height_m;
        r.ridge_width = width_m;
        r.azimuth = azimuth_rad;
        return r;
    }

    static TerrainRecipe noise(double amplitude_m, double correlation_length_m) {
        TerrainRecipe r;
        r.kind = TerrainKind::kNoise;
        r.noise_amplitude = amplitude_m;
        r.correlation_length = correlation_length_m;
        return r;
    }

    static TerrainRecipe sum(std::vector<TerrainRecipe> parts) {
        TerrainRecipe r;
        r.kind = TerrainKind::kSum;
        r.parts = std::move(parts);
        return r;
    }
};

namespace detail {

inline HeightGrid empty_grid(const TerrainRecipe& spec) {
    if (spec.extent_x <= 0.0 || spec.extent_y <= 0.0)
        throw ParameterError("terrain: extent must be > 0");
    if (spec.resolution <= 0.0) throw ParameterError("terrain: resolution must be > 0");
    HeightGrid g;
    g.resolution = spec.resolution;
    g.cols = static_cast<int>(std::lround(spec.extent_x / spec.resolution)) + 1;
    g.rows = static_cast<int>(std::lround(spec.extent_y / spec.resolution)) + 1;
    if (g.rows < 3 || g.cols < 3) throw ParameterError("terrain: extent too small for resolution");
    g.origin_x = -0.5 * spec.resolution * (g.cols - 1);
    g.origin_y = -0.5 * spec.resolution * (g.rows - 1);
    g.heights.assign(static_cast<std::size_t>(g.rows) * g.cols, 0.0);
    return g;
}

inline void add_ramp(HeightGrid& g, const TerrainRecipe& spec) {
    if (std::abs(spec.ramp_angle) >= deg2rad(90.0))
        throw ParameterError("terrain: ramp angle must be inside (-90, 90) deg");
    const double slope = std::tan(spec.ramp_angle);
    const double cx = std::cos(spec.azimuth), sy = std::sin(spec.azimuth);
    // offset so the lowest corner sits at height 0
    double dmin = 0.0;
    bool first = true;
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            auto [x, y] = g.cell_center(i, j);
            const double d = x * cx + y * sy;
            if (first || d < dmin) dmin = d, first = false;
        }
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            auto [x, y] = g.cell_center(i, j);
            g.at(i, j) += slope * (x * cx + y * sy - dmin);
        }
}

inline void add_ridge(HeightGrid& g, const TerrainRecipe& spec) {
    if (spec.ridge_width <= 0.0) throw ParameterError("terrain: ridge width must be > 0");
    if (spec.saddle_width <= 0.0) throw ParameterError("terrain: saddle width must be > 0");
    if (spec.saddle_depth < 0.0 || spec.saddle_depth > 1.0)
        throw ParameterError("terrain: saddle depth must be in [0, 1]");
    const double ca = std::cos(spec.azimuth), sa = std::sin(spec.azimuth);
    const double inv2w2 = 1.0 / (2.0 * spec.ridge_width * spec.ridge_width);
    const double inv2s2 = 1.0 / (2.0 * spec.saddle_width * spec.saddle_width);
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            auto [x, y] = g.cell_center(i, j);
            const double along = x * ca + y * sa;
            const double across = -x * sa + y * ca;
            double h = spec.ridge_height * std::exp(-across * across * inv2w2);
            if (spec.saddle_depth > 0.0) {
                const double da = along - spec.saddle_pos;
                h *= 1.0 - spec.saddle_depth * std::exp(-da * da * inv2s2);
            }
            g.at(i, j) += h;
        }
}

inline void add_noise(HeightGrid& g, const TerrainRecipe& spec, std::uint64_t seed) {
    if (spec.noise_amplitude <= 0.0) throw ParameterError("terrain: noise amplitude must be > 0");
    if (spec.correlation_length <= 0.0)
        throw ParameterError("terrain: correlation length must be > 0");
    Rng rng(seed);
    const std::size_t n = static_cast<std::size_t>(g.rows) * g.cols;
    std::vector<double> white(n);
    for (double& w : white) w = rng.normal();

    // separable gaussian blur, reflected borders
    const double sigma = spec.correlation_length / g.resolution;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
    double ksum = 0.0;
    for (int k = 0; k <= radius; ++k) {
        kernel[k] = std::exp(-0.5 * (k / sigma) * (k / sigma));
        ksum += (k == 0) ? kernel[k] : 2.0 * kernel[k];
    }
    for (double& k : kernel) k /= ksum;

    auto reflect = [](int idx, int n_) {
        if (idx < 0) idx = -idx;
        if (idx >= n_) idx = 2 * n_ - 2 - idx;
        return idx;
    };
    std::vector<double> tmp(n, 0.0);
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            double acc = kernel[0] * white[static_cast<std::size_t>(i) * g.cols + j];
            for (int k = 1; k <= radius; ++k)
                acc += kernel[k] *
                       (white[static_cast<std::size_t>(i) * g.cols + reflect(j - k, g.cols)] +
                        white[static_cast<std::size_t>(i) * g.cols + reflect(j + k, g.cols)]);
            tmp[static_cast<std::size_t>(i) * g.cols + j] = acc;
        }
    std::vector<double> smooth(n, 0.0);
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            double acc = kernel[0] * tmp[static_cast<std::size_t>(i) * g.cols + j];
            for (int k = 1; k <= radius; ++k)
                acc += kernel[k] *
                       (tmp[static_cast<std::size_t>(reflect(i - k, g.rows)) * g.cols + j] +
                        tmp[static_cast<std::size_t>(reflect(i + k, g.rows)) * g.cols + j]);
            smooth[static_cast<std::size_t>(i) * g.cols + j] = acc;
        }

    double peak = 0.0;
    for (double v : smooth) peak = std::max(peak, std::abs(v));
    const double scale = peak > 0.0 ? spec.noise_amplitude / peak : 0.0;
    for (std::size_t k = 0; k < n; ++k) g.heights[k] += scale * smooth[k];
}

inline void apply_recipe(HeightGrid& g, const TerrainRecipe& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case TerrainKind::kFlat:
            break;
        case TerrainKind::kRamp:
            add_ramp(g, spec);
            break;
        case TerrainKind::kRidge:
            add_ridge(g, spec);
            break;
        case TerrainKind::kNoise:
            add_noise(g, spec, seed);
            break;
        case TerrainKind::kSum: {
            std::uint64_t part_idx = 0;
            for (const TerrainRecipe& p : spec.parts)
                apply_recipe(g, p, derive_seed(seed, part_idx++));
            break;
        }
    }
}

}  // namespace detail

/// Deterministic synthetic terrain for a (recipe, seed) pair.
inline HeightGrid generate_synthetic_terrain(const TerrainRecipe& spec, std::uint64_t seed) {
    HeightGrid g = detail::empty_grid(spec);
    detail::apply_recipe(g, spec, seed);
    g.validate();
    return g;
}

}  // namespace ork::terrain
