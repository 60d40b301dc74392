#pragma once

#include <Eigen/Dense>

#include "ork/common.hpp"
#include "ork/polar.hpp"
#include "ork/snapshots.hpp"

namespace ork::koopman {

struct KoopmanModel {
    Eigen::Matrix<double, 7, 7> A;
    Eigen::Matrix<double, 7, 2> B;
    Eigen::Matrix<double, 7, 2> Bg;
    Eigen::Matrix<double, 2, 7> C;
    int bin_index = -1;
    double kappa_lo = 0.0;
    double kappa_hi = 0.0;

    bool finite() const {
        return A.allFinite() && B.allFinite() && Bg.allFinite() && C.allFinite();
    }
};

inline Eigen::Matrix<double, 7, Eigen::Dynamic> lift_columns(const Eigen::Matrix2Xd& poses) {
    Eigen::Matrix<double, 7, Eigen::Dynamic> z(7, poses.cols());
    for (Eigen::Index i = 0; i < poses.cols(); ++i)
        z.col(i) = lift({poses(0, i), poses(1, i)});
    return z;
}

namespace detail {

/// Ridge least squares for M in min ||T - M G||_F^2 + lambda ||M||_F^2,
/// solved through a QR factorization of the stacked regressor. With
/// lambda = 0 the regressor must have full row rank.
inline Eigen::MatrixXd ridge_fit(const Eigen::MatrixXd& G, const Eigen::MatrixXd& T,
                                 double lambda) {
    const Eigen::Index p = G.rows();   // regressor dimension
    const Eigen::Index t = G.cols();   // samples
    const Eigen::Index m = T.rows();   // target dimension
    if (T.cols() != t) throw DimensionError("ridge_fit: sample counts differ");
    if (t < 1) throw DataError("ridge_fit: empty snapshot matrices");
    if (lambda < 0.0) throw ParameterError("ridge_fit: lambda must be >= 0");

    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G.transpose());
        if (qr.rank() < p)
            throw SingularityError(
                "ridge_fit: rank-deficient Gram matrix; refit with lambda > 0");
        return qr.solve(T.transpose()).transpose();
    }

    Eigen::MatrixXd stacked(t + p, p);
    stacked.topRows(t) = G.transpose();
    stacked.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t + p, m);
    rhs.topRows(t) = T.transpose();
    return stacked.householderQr().solve(rhs).transpose();
}

}  // namespace detail

/// EDMD fit in lifted coordinates: finds [A B Bg] minimizing the ridge
/// Frobenius objective against the stacked regressor [ZX; U; H]. Exposed
/// separately from the pose-level fit so exactly-linear lifted systems can be
/// fitted (and recovered) without projecting targets back to poses.
inline void fit_edmd_lifted(const Eigen::Matrix<double, 7, Eigen::Dynamic>& zx,
                            const Eigen::Matrix<double, 7, Eigen::Dynamic>& zy,
                            const Eigen::Matrix2Xd& u, const Eigen::Matrix2Xd& h, double lambda,
                            bool with_gradients, KoopmanModel& model) {
    const Eigen::Index t = zx.cols();
    if (zy.cols() != t || u.cols() != t || (with_gradients && h.cols() != t))
        throw DimensionError("fit_edmd_lifted: snapshot column counts differ");
    const Eigen::Index p = with_gradients ? 11 : 9;
    Eigen::MatrixXd g(p, t);
    g.topRows(7) = zx;
    g.middleRows(7, 2) = u;
    if (with_gradients) g.bottomRows(2) = h;

    const Eigen::MatrixXd m = detail::ridge_fit(g, zy, lambda);
    model.A = m.leftCols(7);
    model.B = m.middleCols(7, 2);
    model.Bg = with_gradients ? Eigen::Matrix<double, 7, 2>(m.rightCols(2))
                              : Eigen::Matrix<double, 7, 2>::Zero().eval();
    if (!model.A.allFinite() || !model.B.allFinite() || !model.Bg.allFinite())
        throw SingularityError("fit_edmd_lifted: non-finite fit result");
}

/// Projection fit for C in min ||X - C Psi(X)||_F^2 + lambda ||C||_F^2.
inline Eigen::Matrix<double, 2, 7> fit_projection(
    const Eigen::Matrix<double, 7, Eigen::Dynamic>& zx, const Eigen::Matrix2Xd& x,
    double lambda) {
    return detail::ridge_fit(zx, x, lambda);
}

/// Pose-level EDMD fit for one curvature bin.
inline KoopmanModel fit_edmd(const BinData& bin, double lambda, bool with_gradients = true) {
    KoopmanModel model;
    const auto zx = lift_columns(bin.X);
    const auto zy = lift_columns(bin.Y);
    fit_edmd_lifted(zx, zy, bin.U, bin.H, lambda, with_gradients, model);
    model.C = fit_projection(zx, bin.X, lambda);
    return model;
}

/// Frobenius norm of (ZY - [A B Bg] G) G^T; the fitted minimizer satisfies
/// this up to lambda * ||[A B Bg]||_F (normal-equation orthogonality).
inline double edmd_normal_residual(const KoopmanModel& model,
                                   const Eigen::Matrix<double, 7, Eigen::Dynamic>& zx,
                                   const Eigen::Matrix2Xd& u, const Eigen::Matrix2Xd& h,
                                   const Eigen::Matrix<double, 7, Eigen::Dynamic>& zy) {
    Eigen::MatrixXd g(11, zx.cols());
    g.topRows(7) = zx;
    g.middleRows(7, 2) = u;
    g.bottomRows(2) = h;
    Eigen::MatrixXd m(7, 11);
    m << model.A, model.B, model.Bg;
    return ((zy - m * g) * g.transpose()).norm();
}

/// Ridge objective of the lifted fit; used by optimality probes.
inline double edmd_objective(const KoopmanModel& model,
                             const Eigen::Matrix<double, 7, Eigen::Dynamic>& zx,
                             const Eigen::Matrix2Xd& u, const Eigen::Matrix2Xd& h,
                             const Eigen::Matrix<double, 7, Eigen::Dynamic>& zy, double lambda) {
    Eigen::MatrixXd g(11, zx.cols());
    g.topRows(7) = zx;
    g.middleRows(7, 2) = u;
    g.bottomRows(2) = h;
    Eigen::MatrixXd m(7, 11);
    m << model.A, model.B, model.Bg;
    return (zy - m * g).squaredNorm() + lambda * m.squaredNorm();
}

/// One-step polar prediction RMSE of a fitted model over its bin data.
inline double one_step_rmse(const KoopmanModel& model, const BinData& bin) {
    if (bin.count() == 0) return 0.0;
    const auto zx = lift_columns(bin.X);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < bin.count(); ++i) {
        const Eigen::Matrix<double, 7, 1> zn =
            model.A * zx.col(i) + model.B * bin.U.col(i) + model.Bg * bin.H.col(i);
        acc += (model.C * zn - bin.Y.col(i)).squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(bin.count()));
}

}  // namespace ork::koopman
