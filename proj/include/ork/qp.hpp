#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "ork/common.hpp"

namespace ork::qp {

struct BoxQpResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double pg_norm = 0.0;  // || x - proj(x - grad f(x)) || at the solution
    bool converged = false;
    double cost = 0.0;
};

namespace detail {

inline Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace detail

/// Accelerated projected gradient for min 1/2 x'Hx + c'x over a box. H must
/// be symmetric PSD. The step is the exact Lipschitz step 1/lambda_max(H),
/// acceleration restarts on objective increase, and the certificate is the
/// unit-step projected-gradient norm at the returned point.
inline BoxQpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& c,
                                const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                const Eigen::VectorXd& x0, double tol = 1e-8,
                                int max_iters = 500) {
    const Eigen::Index n = h.rows();
    if (h.cols() != n || c.size() != n || lo.size() != n || hi.size() != n || x0.size() != n)
        throw DimensionError("solve_box_qp: dimension mismatch");
    if ((lo.array() > hi.array()).any()) throw ConfigError("solve_box_qp: lo exceeds hi");

    auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return h * x + c; };
    auto cost = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(h * x) + c.dot(x); };
    auto pg_norm = [&](const Eigen::VectorXd& x) {
        return (x - detail::project_box(x - grad(x), lo, hi)).norm();
    };

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double lam_max = eig.eigenvalues().maxCoeff();
    const double step = 1.0 / std::max(lam_max, 1e-12);

    BoxQpResult res;
    Eigen::VectorXd x = detail::project_box(x0, lo, hi);
    Eigen::VectorXd y = x;
    Eigen::VectorXd x_prev = x;
    double t_acc = 1.0;
    double f_prev = cost(x);

    res.pg_norm = pg_norm(x);
    if (res.pg_norm <= tol) {
        res.x = x;
        res.converged = true;
        res.cost = f_prev;
        return res;
    }

    for (int k = 0; k < max_iters; ++k) {
        x_prev = x;
        x = detail::project_box(y - step * grad(y), lo, hi);
        const double f = cost(x);
        if (f > f_prev) {  // restart acceleration and retake a plain step
            t_acc = 1.0;
            y = x_prev;
            x = detail::project_box(y - step * grad(y), lo, hi);
        }
        f_prev = cost(x);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
        y = x + ((t_acc - 1.0) / t_next) * (x - x_prev);
        t_acc = t_next;

        res.iterations = k + 1;
        res.pg_norm = pg_norm(x);
        if (res.pg_norm <= tol) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.cost = cost(x);
    return res;
}

}  // namespace ork::qp
