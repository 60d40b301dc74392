#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ork/common.hpp"

namespace ork::terrain {

// Grid convention: row index i runs along +y, column index j along +x.
// Cell (i, j) is centered at (origin_x + j*resolution, origin_y + i*resolution).

struct HeightGrid {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double resolution = 0.0;  // cell edge length, m
    int rows = 0;
    int cols = 0;
    std::vector<double> heights;  // row-major, rows*cols

    double& at(int i, int j) { return heights[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return heights[static_cast<std::size_t>(i) * cols + j]; }

    double min_x() const { return origin_x; }
    double min_y() const { return origin_y; }
    double max_x() const { return origin_x + resolution * (cols - 1); }
    double max_y() const { return origin_y + resolution * (rows - 1); }

    bool contains(double x, double y) const {
        return x >= min_x() && x <= max_x() && y >= min_y() && y <= max_y();
    }

    /// Nearest cell for a position inside the extent.
    std::pair<int, int> nearest_cell(double x, double y) const {
        int j = static_cast<int>(std::lround((x - origin_x) / resolution));
        int i = static_cast<int>(std::lround((y - origin_y) / resolution));
        if (i < 0) i = 0;
        if (j < 0) j = 0;
        if (i >= rows) i = rows - 1;
        if (j >= cols) j = cols - 1;
        return {i, j};
    }

    std::pair<double, double> cell_center(int i, int j) const {
        return {origin_x + resolution * j, origin_y + resolution * i};
    }

    void validate() const {
        if (resolution <= 0.0) throw ParameterError("HeightGrid: resolution must be > 0");
        if (rows < 3 || cols < 3)
            throw DimensionError("HeightGrid: need at least 3x3 cells for central differences");
        if (heights.size() != static_cast<std::size_t>(rows) * cols)
            throw DimensionError("HeightGrid: heights size does not match rows*cols");
        for (double h : heights)
            if (!std::isfinite(h)) throw ParameterError("HeightGrid: non-finite height");
    }
};

struct GradientGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> gx;  // dimensionless slope, row-major
    std::vector<double> gy;

    double gx_at(int i, int j) const { return gx[static_cast<std::size_t>(i) * cols + j]; }
    double gy_at(int i, int j) const { return gy[static_cast<std::size_t>(i) * cols + j]; }
};

inline int clamp_interior(int idx, int n) {
    if (idx < 1) return 1;
    if (idx > n - 2) return n - 2;
    return idx;
}

/// Central differences on the interior, divided by resolution so the result
/// is dimensionless slope. Border cells replicate the nearest interior value.
inline GradientGrid compute_gradient_map(const HeightGrid& h) {
    h.validate();
    GradientGrid g;
    g.rows = h.rows;
    g.cols = h.cols;
    g.gx.assign(static_cast<std::size_t>(h.rows) * h.cols, 0.0);
    g.gy.assign(static_cast<std::size_t>(h.rows) * h.cols, 0.0);
    const double inv_res = 1.0 / h.resolution;
    for (int i = 0; i < h.rows; ++i) {
        const int ic = clamp_interior(i, h.rows);
        for (int j = 0; j < h.cols; ++j) {
            const int jc = clamp_interior(j, h.cols);
            const std::size_t k = static_cast<std::size_t>(i) * h.cols + j;
            g.gx[k] = 0.5 * (h.at(ic, jc + 1) - h.at(ic, jc - 1)) * inv_res;
            g.gy[k] = 0.5 * (h.at(ic + 1, jc) - h.at(ic - 1, jc)) * inv_res;
        }
    }
    return g;
}

inline double default_g_max() { return std::tan(deg2rad(15.0)); }
inline double default_restrict_threshold() { return std::tan(deg2rad(25.0)); }

/// Gradient cost C_g: linear up to g_max, exponential beyond. Continuous at
/// |g| = g_max where both branches evaluate to 1.
inline double gradient_cost(double g, double g_max) {
    if (g_max <= 0.0) throw ParameterError("gradient_cost: g_max must be > 0");
    const double a = std::abs(g);
    if (a <= g_max) return a / g_max;
    return std::exp(a / g_max - 1.0);
}

enum class CellFlag : std::uint8_t { kFree = 0, kObstacle = 1, kGradientRestricted = 2 };

/// Inclusive cell-index rectangle.
struct CellRegion {
    int row0 = 0;
    int col0 = 0;
    int row1 = 0;
    int col1 = 0;
};

struct LayerStack {
    HeightGrid height;
    GradientGrid gradients;
    std::vector<double> cost_x;         // C_g of gx
    std::vector<double> cost_y;         // C_g of gy
    std::vector<double> cost_diag_pos;  // C_g of (gx+gy)/sqrt(2)
    std::vector<double> cost_diag_neg;  // C_g of (gx-gy)/sqrt(2)
    std::vector<CellFlag> mask;
    double g_max = 0.0;
    double restrict_threshold = 0.0;

    int rows() const { return height.rows; }
    int cols() const { return height.cols; }

    CellFlag flag(int i, int j) const { return mask[static_cast<std::size_t>(i) * cols() + j]; }
    bool is_free(int i, int j) const { return flag(i, j) == CellFlag::kFree; }

    bool contains(double x, double y) const { return height.contains(x, y); }

    /// Nearest-cell gradient lookup; throws if the position is outside the extent.
    Eigen::Vector2d query_gradient(double x, double y) const {
        if (!height.contains(x, y)) throw BoundsError("query_gradient: position outside grid extent");
        auto [i, j] = height.nearest_cell(x, y);
        return {gradients.gx_at(i, j), gradients.gy_at(i, j)};
    }

    double query_height(double x, double y) const {
        if (!height.contains(x, y)) throw BoundsError("query_height: position outside grid extent");
        auto [i, j] = height.nearest_cell(x, y);
        return height.at(i, j);
    }
};

/// Assemble the synchronized multi-layer map: heights, gradients, directional
/// gradient costs, and the traversability mask.
inline LayerStack build_layer_stack(const HeightGrid& h, const std::vector<CellRegion>& obstacles,
                                    double g_max = default_g_max(),
                                    double restrict_threshold = default_restrict_threshold()) {
    h.validate();
    if (g_max <= 0.0) throw ParameterError("build_layer_stack: g_max must be > 0");
    if (restrict_threshold <= 0.0)
        throw ParameterError("build_layer_stack: restrict_threshold must be > 0");

    LayerStack s;
    s.height = h;
    s.gradients = compute_gradient_map(h);
    s.g_max = g_max;
    s.restrict_threshold = restrict_threshold;
    const std::size_t n = static_cast<std::size_t>(h.rows) * h.cols;
    s.cost_x.resize(n);
    s.cost_y.resize(n);
    s.cost_diag_pos.resize(n);
    s.cost_diag_neg.resize(n);
    s.mask.assign(n, CellFlag::kFree);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double gx = s.gradients.gx[k];
        const double gy = s.gradients.gy[k];
        const double dp = (gx + gy) * inv_sqrt2;
        const double dn = (gx - gy) * inv_sqrt2;
        s.cost_x[k] = gradient_cost(gx, g_max);
        s.cost_y[k] = gradient_cost(gy, g_max);
        s.cost_diag_pos[k] = gradient_cost(dp, g_max);
        s.cost_diag_neg[k] = gradient_cost(dn, g_max);
        const double worst = std::max(std::max(std::abs(gx), std::abs(gy)),
                                      std::max(std::abs(dp), std::abs(dn)));
        if (worst > restrict_threshold) s.mask[k] = CellFlag::kGradientRestricted;
    }

    for (const CellRegion& r : obstacles) {
        if (r.row0 < 0 || r.col0 < 0 || r.row1 >= h.rows || r.col1 >= h.cols || r.row0 > r.row1 ||
            r.col0 > r.col1)
            throw BoundsError("build_layer_stack: obstacle region outside grid bounds");
        for (int i = r.row0; i <= r.row1; ++i)
            for (int j = r.col0; j <= r.col1; ++j)
                s.mask[static_cast<std::size_t>(i) * h.cols + j] = CellFlag::kObstacle;
    }
    return s;
}

/// Cell-wise sum of two grids sharing geometry; used to compose fixture terrains.
inline HeightGrid add_heights(const HeightGrid& a, const HeightGrid& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.resolution != b.resolution ||
        a.origin_x != b.origin_x || a.origin_y != b.origin_y)
        throw DimensionError("add_heights: grid geometries differ");
    HeightGrid out = a;
    for (std::size_t k = 0; k < out.heights.size(); ++k) out.heights[k] += b.heights[k];
    return out;
}

}  // namespace ork::terrain
