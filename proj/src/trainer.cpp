#include "ntklab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "ntklab/errors.hpp"

namespace ntklab {

namespace {

void check_compatible(const NetworkParams& params, const LabeledDataset& data,
                      const char* where) {
    if (data.dim() != params.input_dim())
        throw std::invalid_argument(std::string(where) +
                                    ": dataset/network dimension mismatch");
}

}  // namespace

double gd_step(NetworkParams& params, const LabeledDataset& data, double eta) {
    check_compatible(params, data, "gd_step");
    if (!(eta >= 0.0)) throw std::invalid_argument("gd_step: eta must be >= 0");

    const double scale = 1.0 / std::sqrt(static_cast<double>(params.width()));
    const Eigen::MatrixXd pre = params.weights * data.augmented.transpose();
    const Eigen::VectorXd f =
        (pre.cwiseMax(0.0).transpose() * params.signs) * scale;
    const Eigen::VectorXd res = f - data.labels;
    const double loss = res.squaredNorm();
    if (!std::isfinite(loss)) throw divergence_error(0, "divergence: non-finite loss");

    Eigen::MatrixXd g = (pre.array() >= 0.0).cast<double>();
    g.array().rowwise() *= res.transpose().array();
    g.array().colwise() *= (params.signs * scale).array();
    params.weights.noalias() -= eta * g * data.augmented;
    return loss;
}

Trajectory train(NetworkParams& params, const LabeledDataset& data,
                 const TrainConfig& config, const GradientFeatures& feat,
                 const MinNormSolution& sol) {
    check_compatible(params, data, "train");
    if (!(config.step_size > 0.0))
        throw std::invalid_argument("train: step_size must be positive");
    if (config.record_every < 1)
        throw std::invalid_argument("train: record_every must be >= 1");
    if (config.loss_tol < 0.0)
        throw std::invalid_argument("train: loss_tol must be >= 0");
    if (config.max_iters < 0)
        throw std::invalid_argument("train: max_iters must be >= 0");

    const Eigen::Index m = params.width();
    const Eigen::Index n = data.n();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const Eigen::VectorXd signs_scaled = params.signs * scale;
    const Eigen::MatrixXd xa_t = data.augmented.transpose();
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask0 =
        ((params.init_weights * xa_t).array() >= 0.0);

    Trajectory traj;
    const auto t_start = std::chrono::steady_clock::now();

    Eigen::MatrixXd pre(m, n), g(m, n);
    Eigen::VectorXd f(n), res(n);

    auto record = [&](long iter, double loss) {
        TrajectoryRecord rec;
        rec.iter = iter;
        rec.loss = loss;
        const LyapunovPair lp = lyapunov(feat, sol, params.flat());
        rec.v_perp = lp.v_perp;
        rec.v_par = lp.v_par;
        rec.dist_minnorm_sq = (params.flat() - sol.w_star).squaredNorm();
        const WeightMatrix drift = params.weights - params.init_weights;
        rec.dist_init_sq = drift.squaredNorm();
        rec.max_unit_drift = drift.rowwise().norm().maxCoeff();
        rec.sign_flips =
            ((pre.array() >= 0.0) != mask0.array()).cast<long>().sum();
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t_start)
                          .count();
        traj.records.push_back(rec);
    };

    double prev_loss = std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
        pre.noalias() = params.weights * xa_t;
        f.noalias() = pre.cwiseMax(0.0).transpose() * signs_scaled;
        res = f - data.labels;
        const double loss = res.squaredNorm();

        if (!std::isfinite(loss)) {
            traj.final_iter = k;
            traj.final_loss = loss;
            std::ostringstream msg;
            msg << "divergence at iteration " << k << ": non-finite loss";
            throw training_diverged(k, msg.str(), std::move(traj));
        }
        if (loss > prev_loss * (1.0 + 1e-12)) ++traj.monotonicity_violations;
        prev_loss = loss;

        const bool done = loss <= config.loss_tol || k >= config.max_iters;
        if (k % config.record_every == 0 || done) record(k, loss);
        if (done) {
            traj.final_iter = k;
            traj.final_loss = loss;
            traj.reached_tol = loss <= config.loss_tol;
            break;
        }

        g = (pre.array() >= 0.0).cast<double>();
        g.array().rowwise() *= res.transpose().array();
        g.array().colwise() *= signs_scaled.array();
        params.weights.noalias() -= config.step_size * g * data.augmented;
    }
    return traj;
}

}  // namespace ntklab
