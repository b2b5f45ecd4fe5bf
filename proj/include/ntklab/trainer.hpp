#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/errors.hpp"
#include "ntklab/linearized.hpp"
#include "ntklab/network.hpp"

namespace ntklab {

enum class TrainMode { discrete, fine_step_flow };

struct TrainConfig {
    double step_size = 0.01;  // eta; in fine_step_flow mode the Euler step
    long max_iters = 50000;
    double loss_tol = 1e-3;    // stop once ||f - Y||^2 <= loss_tol
    long record_every = 10;    // stride for the expensive distance diagnostics
    TrainMode mode = TrainMode::discrete;
    std::uint64_t seed = 0;    // recorded in manifests; training itself is deterministic
};

struct TrajectoryRecord {
    long iter = 0;
    double loss = 0.0;             // ||f(w(k)) - Y||^2
    double v_perp = 0.0;           // ||P0_perp (w - w*)||^2
    double v_par = 0.0;            // ||P0 (w - w*)||^2
    double dist_minnorm_sq = 0.0;  // ||w - w*||^2
    double dist_init_sq = 0.0;     // ||w - w(0)||^2
    double max_unit_drift = 0.0;   // max_k ||w_k - w_k(0)||
    long sign_flips = 0;           // sum over training points
    double wall_ms = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    long final_iter = 0;
    double final_loss = 0.0;
    bool reached_tol = false;
    long monotonicity_violations = 0;  // steps where the loss went up
};

// Divergence during train(); carries whatever was recorded up to the blowup.
class training_diverged : public divergence_error {
public:
    training_diverged(long iteration, const std::string& what, Trajectory partial)
        : divergence_error(iteration, what), partial_(std::move(partial)) {}
    const Trajectory& partial_trajectory() const { return partial_; }

private:
    Trajectory partial_;
};

// One full-batch GD update w <- w - eta * sum_i grad f(x_i,w) (f(x_i,w)-y_i).
// Returns the loss at the pre-update weights. Output signs are untouched.
double gd_step(NetworkParams& params, const LabeledDataset& data, double eta);

// Runs GD until loss_tol or max_iters, recording diagnostics every
// record_every steps (plus first and last). Throws divergence_error if the
// loss or weights go non-finite; the partial trajectory is attached.
Trajectory train(NetworkParams& params, const LabeledDataset& data,
                 const TrainConfig& config, const GradientFeatures& feat,
                 const MinNormSolution& sol);

}  // namespace ntklab
