#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ork/common.hpp"

namespace ork::koopman {

/// Curvature-bin geometry: q contiguous half-open bins over [-kappa_max,
/// kappa_max], with out-of-range curvatures clamped to the edge bins and
/// kappa = +kappa_max assigned to the last bin.
struct FamilyGeometry {
    int q = 8;
    double kappa_max = 0.8;  // 1/m

    void validate() const {
        if (q < 1) throw ConfigError("FamilyGeometry: q must be >= 1");
        if (kappa_max <= 0.0) throw ConfigError("FamilyGeometry: kappa_max must be > 0");
    }

    double edge(int i) const { return -kappa_max + 2.0 * kappa_max * i / q; }

    double midpoint(int bin) const { return 0.5 * (edge(bin) + edge(bin + 1)); }

    int assign_bin(double kappa) const {
        if (kappa < -kappa_max) return 0;
        if (kappa >= kappa_max) return q - 1;
        int bin = static_cast<int>(std::floor((kappa + kappa_max) * q / (2.0 * kappa_max)));
        if (bin < 0) bin = 0;
        if (bin > q - 1) bin = q - 1;
        // floor on the scaled coordinate can land one bin high at an exact edge
        if (kappa < edge(bin)) --bin;
        if (bin + 1 <= q && kappa >= edge(bin + 1)) ++bin;
        return bin;
    }
};

/// Instantaneous trajectory curvature yaw_rate / v from sampled yaw and speed.
/// Yaw is unwrapped, differentiated centrally (one-sided at the ends); samples
/// slower than v_eps hold the last valid curvature, and leading invalid
/// samples are backfilled from the first valid one.
inline std::vector<double> instantaneous_curvature(std::span<const double> yaw,
                                                   std::span<const double> v, double dt,
                                                   double v_eps = 0.05) {
    const std::size_t n = yaw.size();
    if (n < 3) throw DimensionError("instantaneous_curvature: need at least 3 samples");
    if (v.size() != n) throw DimensionError("instantaneous_curvature: yaw/v size mismatch");
    if (dt <= 0.0) throw ParameterError("instantaneous_curvature: dt must be > 0");

    std::vector<double> unwrapped(n);
    unwrapped[0] = yaw[0];
    for (std::size_t k = 1; k < n; ++k)
        unwrapped[k] = unwrapped[k - 1] + wrap_pi(yaw[k] - yaw[k - 1]);

    std::vector<double> kappa(n, 0.0);
    bool any_valid = false;
    double last_valid = 0.0;
    std::size_t first_valid = n;
    for (std::size_t k = 0; k < n; ++k) {
        double yaw_rate;
        if (k == 0)
            yaw_rate = (unwrapped[1] - unwrapped[0]) / dt;
        else if (k == n - 1)
            yaw_rate = (unwrapped[n - 1] - unwrapped[n - 2]) / dt;
        else
            yaw_rate = (unwrapped[k + 1] - unwrapped[k - 1]) / (2.0 * dt);

        if (v[k] > v_eps) {
            last_valid = yaw_rate / v[k];
            if (!any_valid) first_valid = k;
            any_valid = true;
        }
        kappa[k] = last_valid;
    }
    if (!any_valid)
        throw DataError("instantaneous_curvature: trajectory is stationary, curvature undefined");
    for (std::size_t k = 0; k < first_valid; ++k) kappa[k] = kappa[first_valid];
    return kappa;
}

}  // namespace ork::koopman
