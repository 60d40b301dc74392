#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ork/common.hpp"
#include "ork/grid.hpp"
#include "ork/local_planner.hpp"
#include "ork/model_family.hpp"
#include "ork/polar.hpp"
#include "ork/qp.hpp"
#include "ork/vehicle.hpp"

namespace ork::mpc {

using koopman::LiftedState;
using koopman::PolarPose;

struct MpcConfig {
    int horizon = 10;  // N_p
    Eigen::Matrix2d Q = (Eigen::Matrix2d() << 10.0, 0.0, 0.0, 10.0).finished();
    Eigen::Matrix2d P = (Eigen::Matrix2d() << 0.1, 0.0, 0.0, 0.1).finished();
    Eigen::Vector2d u_min{0.0, -0.35};
    Eigen::Vector2d u_max{4.8, 0.35};
    double dt = 1.0 / 30.0;
    double tol = 1e-8;
    int max_iters = 500;
    int n_lp = 30;  // local-planner rollout horizon feeding the reference
    double lookahead = 5.0;

    static MpcConfig for_vehicle(const sim::VehicleParams& p) {
        MpcConfig c;
        c.u_min = {0.0, -p.delta_lim};
        c.u_max = {p.v_max, p.delta_lim};
        return c;
    }

    void validate() const {
        if (horizon < 1) throw ConfigError("MpcConfig: horizon must be >= 1");
        if (n_lp < horizon) throw ConfigError("MpcConfig: n_lp must cover the horizon");
        if (dt <= 0.0) throw ConfigError("MpcConfig: dt must be > 0");
        if (tol <= 0.0 || max_iters < 1) throw ConfigError("MpcConfig: bad solver settings");
        if (!((u_min.array() < u_max.array()).all()))
            throw ConfigError("MpcConfig: u_min must be below u_max");
        auto check_psd = [](const Eigen::Matrix2d& m, const char* name) {
            if ((m - m.transpose()).norm() > 1e-12)
                throw ConfigError(std::string("MpcConfig: ") + name + " must be symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m);
            if (eig.eigenvalues().minCoeff() < -1e-12)
                throw ConfigError(std::string("MpcConfig: ") + name + " must be PSD");
        };
        check_psd(Q, "Q");
        check_psd(P, "P");
    }
};

/// Lift the first N_p poses of a polar reference.
inline std::vector<LiftedState> lift_reference(std::span<const PolarPose> ref, int n_p) {
    if (static_cast<int>(ref.size()) < n_p)
        throw DimensionError("lift_reference: reference shorter than the horizon");
    std::vector<LiftedState> out;
    out.reserve(n_p);
    for (int k = 0; k < n_p; ++k) out.push_back(koopman::lift(ref[k]));
    return out;
}

struct MpcSolution {
    Eigen::Matrix2Xd u;          // optimal inputs, column t = u*(t)
    Eigen::MatrixXd z_pred;      // 7 x N_p, predicted lifted states under u
    int iterations = 0;
    double pg_norm = 0.0;
    bool converged = true;       // false: iteration cap hit, result suboptimal
    double cost = 0.0;
};

/// Condense the lifted dynamics into a box-constrained QP over the input
/// sequence and solve it. The gradient is frozen over the horizon.
inline MpcSolution solve(const koopman::KoopmanModel& model, const LiftedState& z0,
                         std::span<const LiftedState> z_ref, const Eigen::Vector2d& u_prev,
                         const Eigen::Vector2d& g, const MpcConfig& cfg) {
    cfg.validate();
    const int n = cfg.horizon;
    if (static_cast<int>(z_ref.size()) != n)
        throw DimensionError("mpc::solve: reference length must equal the horizon");

    const int nu = 2 * n;
    // output prediction blocks: block (t-1, s) of Theta is C A^(t-1-s) B
    std::vector<Eigen::Matrix<double, 2, 7>> ca(n);  // C A^k
    ca[0] = model.C;
    for (int k = 1; k < n; ++k) ca[k] = ca[k - 1] * model.A;
    std::vector<Eigen::Matrix2d> cab(n);  // C A^k B
    for (int k = 0; k < n; ++k) cab[k] = ca[k] * model.B;

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(nu, nu);
    for (int t = 1; t <= n; ++t)
        for (int s = 0; s < t; ++s)
            theta.block<2, 2>(2 * (t - 1), 2 * s) = cab[t - 1 - s];

    // free response: C A^t z0 + C d_t with d accumulating the frozen gradient
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nu);
    Eigen::Matrix<double, 7, 1> z_pow = z0;
    Eigen::Matrix<double, 7, 1> d = Eigen::Matrix<double, 7, 1>::Zero();
    for (int t = 1; t <= n; ++t) {
        z_pow = model.A * z_pow;
        d = model.A * d + model.Bg * g;
        f.segment<2>(2 * (t - 1)) = model.C * (z_pow + d) - model.C * z_ref[t - 1];
    }

    // rate-difference operator with u(-1) = u_prev
    Eigen::MatrixXd diff = Eigen::MatrixXd::Identity(nu, nu);
    for (int t = 1; t < n; ++t) diff.block<2, 2>(2 * t, 2 * (t - 1)) = -Eigen::Matrix2d::Identity();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nu);
    r.segment<2>(0) = -u_prev;

    Eigen::MatrixXd qbar = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::MatrixXd pbar = Eigen::MatrixXd::Zero(nu, nu);
    for (int t = 0; t < n; ++t) {
        qbar.block<2, 2>(2 * t, 2 * t) = cfg.Q;
        pbar.block<2, 2>(2 * t, 2 * t) = cfg.P;
    }
    const double inv_dt2 = 1.0 / (cfg.dt * cfg.dt);

    Eigen::MatrixXd h = 2.0 * (theta.transpose() * qbar * theta + inv_dt2 * diff.transpose() * pbar * diff);
    h = 0.5 * (h + h.transpose());  // enforce exact symmetry
    Eigen::VectorXd c =
        2.0 * (theta.transpose() * qbar * f + inv_dt2 * diff.transpose() * pbar * r);

    Eigen::VectorXd lo(nu), hi(nu);
    for (int t = 0; t < n; ++t) {
        lo.segment<2>(2 * t) = cfg.u_min;
        hi.segment<2>(2 * t) = cfg.u_max;
    }

    // start from the better of "hold the previous input" and "zero input"
    auto qp_cost = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(h * x) + c.dot(x); };
    Eigen::VectorXd hold(nu), zero(nu);
    for (int t = 0; t < n; ++t) hold.segment<2>(2 * t) = u_prev;
    hold = hold.cwiseMax(lo).cwiseMin(hi);
    zero = Eigen::VectorXd::Zero(nu).cwiseMax(lo).cwiseMin(hi);
    const Eigen::VectorXd x0 = qp_cost(hold) <= qp_cost(zero) ? hold : zero;

    const qp::BoxQpResult qr = qp::solve_box_qp(h, c, lo, hi, x0, cfg.tol, cfg.max_iters);

    MpcSolution sol;
    sol.u.resize(2, n);
    for (int t = 0; t < n; ++t) sol.u.col(t) = qr.x.segment<2>(2 * t);
    sol.iterations = qr.iterations;
    sol.pg_norm = qr.pg_norm;
    sol.converged = qr.converged;
    sol.cost = qr.cost;

    sol.z_pred.resize(7, n);
    Eigen::Matrix<double, 7, 1> z = z0;
    for (int t = 0; t < n; ++t) {
        z = model.A * z + model.B * sol.u.col(t) + model.Bg * g;
        sol.z_pred.col(t) = z;
    }
    return sol;
}

struct ControlDecision {
    sim::ControlInput u;      // applied command (first optimal input)
    bool planner_ok = false;  // false: stop command issued
    int phi = -1;
    double cross_track = 0.0;
    double kappa_prev = 0.0;
    int qp_iterations = 0;
    double qp_residual = 0.0;
};

/// One full control cycle: gradient query, reachable-set rollout, candidate
/// selection, reference lift, QP solve; returns the first optimal input, or
/// a stop command when the local planner has no valid candidate.
inline ControlDecision control_step(const koopman::ModelFamily& family,
                                    const sim::VehicleState& feedback,
                                    std::span<const std::pair<double, double>> plan_points,
                                    const terrain::LayerStack& stack,
                                    const sim::ControlInput& u_prev, const MpcConfig& cfg,
                                    const sim::VehicleParams& vehicle) {
    cfg.validate();
    if (plan_points.empty()) throw ConfigError("control_step: empty mission plan");

    ControlDecision dec;
    dec.kappa_prev = std::tan(u_prev.delta_cmd) / vehicle.wheelbase;

    const Eigen::Vector2d g_world = stack.query_gradient(feedback.x, feedback.y);
    const auto candidates =
        local_planner::rollout_candidates(family, feedback, u_prev, g_world, cfg.n_lp, vehicle);
    const auto selection = local_planner::select_candidate(
        candidates, plan_points, {feedback.x, feedback.y, feedback.yaw}, cfg.lookahead);
    if (!selection) {
        dec.u = {0.0, 0.0};  // stop the vehicle
        return dec;
    }

    const auto z_ref = lift_reference(selection->reference, cfg.horizon);
    const LiftedState z0 = koopman::lift({0.0, 0.0});
    const Eigen::Vector2d g_body = koopman::rotate_into_frame(feedback.yaw, g_world);
    const Eigen::Vector2d up{u_prev.v_cmd, u_prev.delta_cmd};
    const MpcSolution sol = solve(family.models[selection->phi], z0, z_ref, up, g_body, cfg);

    dec.planner_ok = true;
    dec.phi = selection->phi;
    dec.cross_track = selection->cross_track;
    dec.qp_iterations = sol.iterations;
    dec.qp_residual = sol.pg_norm;
    dec.u = {sol.u(0, 0), sol.u(1, 0)};
    return dec;
}

}  // namespace ork::mpc
