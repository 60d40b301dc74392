#pragma once

#include <vector>

#include <Eigen/Core>

#include "ork/common.hpp"
#include "ork/curvature.hpp"
#include "ork/excitation.hpp"
#include "ork/polar.hpp"

namespace ork::koopman {

/// Anchor policy for snapshot extraction. Every `stride` rows an anchor frame
/// is planted at the vehicle pose; the following `window` poses are expressed
/// in that frame, giving training pairs at every depth a rollout will visit.
struct AnchorPolicy {
    int window = 30;
    int stride = 3;

    void validate() const {
        if (window < 1) throw ConfigError("AnchorPolicy: window must be >= 1");
        if (stride < 1) throw ConfigError("AnchorPolicy: stride must be >= 1");
    }
};

struct BinData {
    Eigen::Matrix2Xd X;  // polar pose at step j, anchor frame
    Eigen::Matrix2Xd Y;  // polar pose one step later, same frame
    Eigen::Matrix2Xd U;  // command driving the transition
    Eigen::Matrix2Xd H;  // terrain gradient at the pose, anchor frame

    Eigen::Index count() const { return X.cols(); }
};

struct SnapshotDataset {
    FamilyGeometry geometry;
    std::vector<BinData> bins;
    std::vector<int> underdetermined_bins;  // fewer samples than N*(N+m+2)

    std::vector<long> counts() const {
        std::vector<long> c;
        c.reserve(bins.size());
        for (const BinData& b : bins) c.push_back(static_cast<long>(b.count()));
        return c;
    }
};

/// Partition anchored snapshot tuples into curvature bins. `zero_gradients`
/// trains the non-augmented baseline by forcing H to zero.
inline SnapshotDataset build_snapshots(const std::vector<sim::EpisodeLog>& logs,
                                       const AnchorPolicy& policy, const FamilyGeometry& geometry,
                                       bool zero_gradients = false) {
    policy.validate();
    geometry.validate();

    struct Cols {
        std::vector<Eigen::Vector2d> x, y, u, h;
    };
    std::vector<Cols> acc(geometry.q);

    for (const sim::EpisodeLog& log : logs) {
        const auto& rows = log.rows;
        if (rows.size() < 2) continue;
        const std::size_t n = rows.size();
        for (std::size_t a = 0; a + 1 < n; a += policy.stride) {
            const Pose2d anchor{rows[a].x, rows[a].y, rows[a].yaw};
            const std::size_t jmax = std::min<std::size_t>(policy.window, n - 2 - a + 1);
            for (std::size_t j = 0; j < jmax; ++j) {
                const std::size_t k = a + j;  // sample row: pose, command, gradient
                if (k + 1 >= n) break;
                const PolarPose x = world_to_anchor_polar(anchor, rows[k].x, rows[k].y);
                const PolarPose y = world_to_anchor_polar(anchor, rows[k + 1].x, rows[k + 1].y);
                Eigen::Vector2d h = Eigen::Vector2d::Zero();
                if (!zero_gradients)
                    h = rotate_into_frame(anchor.yaw, {rows[k].gx, rows[k].gy});
                const int bin = geometry.assign_bin(rows[k].kappa);
                Cols& c = acc[bin];
                c.x.emplace_back(x.r, x.theta);
                c.y.emplace_back(y.r, y.theta);
                c.u.emplace_back(rows[k].v_cmd, rows[k].delta_cmd);
                c.h.push_back(h);
            }
        }
    }

    SnapshotDataset out;
    out.geometry = geometry;
    out.bins.resize(geometry.q);
    const long min_samples = kLiftDim * (kLiftDim + 2 + 2);
    for (int b = 0; b < geometry.q; ++b) {
        const Cols& c = acc[b];
        const Eigen::Index t = static_cast<Eigen::Index>(c.x.size());
        BinData& bd = out.bins[b];
        bd.X.resize(2, t);
        bd.Y.resize(2, t);
        bd.U.resize(2, t);
        bd.H.resize(2, t);
        for (Eigen::Index i = 0; i < t; ++i) {
            bd.X.col(i) = c.x[i];
            bd.Y.col(i) = c.y[i];
            bd.U.col(i) = c.u[i];
            bd.H.col(i) = c.h[i];
        }
        if (t < min_samples) out.underdetermined_bins.push_back(b);
    }
    return out;
}

}  // namespace ork::koopman
