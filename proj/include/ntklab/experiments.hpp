#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ntklab/dataset.hpp"
#include "ntklab/kernel.hpp"
#include "ntklab/network.hpp"
#include "ntklab/rng.hpp"
#include "ntklab/trainer.hpp"

namespace ntklab {

// Synthetic data law: x uniform on [-1,1]^d rescaled to input_radius,
// y = (x . beta)^p with beta uniform on [-1,1]^d rescaled into the unit ball,
// optionally standardized to zero mean / unit sd.
struct SyntheticSpec {
    int n = 100;
    int d = 5;
    int poly_degree = 2;          // p
    bool standardize = true;
    double input_radius = 1.0;    // 1 or sqrt(d)
    std::uint64_t seed = 0;
};

// A realized dataset together with everything needed to evaluate the
// noiseless target on fresh inputs.
struct Synthesized {
    SyntheticSpec spec;
    LabeledDataset data;
    Eigen::VectorXd beta;
    double label_mean = 0.0;  // standardization applied to the raw targets
    double label_sd = 1.0;

    // fresh input from the same law
    Eigen::VectorXd sample_input(Rng& rng) const;
    // noiseless target at a raw input, with the same standardization as labels
    double target(const Eigen::VectorXd& x) const;
};

Synthesized synthesize(const SyntheticSpec& spec);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n_samples = 0;
};

// Monte-Carlo estimate of E_x (target(x) - predictor(x))^2 on fresh samples.
MonteCarloEstimate generalization_error(
    const std::function<double(const Eigen::VectorXd&)>& predictor,
    const Synthesized& synth, int n_test, std::uint64_t seed);

// Monte-Carlo estimate of E_x (f(x,w) - f_KR(x))^2 on fresh inputs.
MonteCarloEstimate f_vs_fkr_gap(const NetworkParams& params,
                                const Synthesized& synth, int n_test,
                                std::uint64_t seed);

struct CellKey {
    long m = 0;
    int n = 0;
    int p = 0;
    std::uint64_t seed = 0;
};

struct CellResult {
    CellKey key;
    Trajectory trajectory;
    double jitter = 0.0;
    double wall_ms = 0.0;
    std::optional<MonteCarloEstimate> gen_error;
    std::optional<MonteCarloEstimate> fkr_gap;
    std::string error;  // empty on success
};

struct Figure1Result {
    std::vector<long> widths;
    std::vector<CellResult> cells;  // widths-major, seeds-minor
    // 5-seed medians of the terminal diagnostics, one entry per width
    std::vector<double> median_terminal_v_perp;
    std::vector<double> median_terminal_dist_minnorm;
    std::vector<double> median_terminal_dist_init;
    bool v_perp_nonincreasing = false;
    bool dist_minnorm_nonincreasing = false;
    bool every_cell_reached_tol = false;
    long total_monotonicity_violations = 0;
};

struct Figure1Config {
    std::vector<long> widths = {1000, 2000, 5000, 10000};
    int seeds = 5;
    SyntheticSpec data_spec;      // defaults match the synthetic experiment
    double step_size = 0.01;
    double loss_tol = 1e-3;
    long max_iters = 50000;
    long record_every = 50;
    double kappa = 1.0;
    std::uint64_t base_seed = 0;
    int threads = 0;              // 0 = hardware concurrency
};

// Trains one network per (width, seed) cell on a shared dataset per seed and
// aggregates the trajectory diagnostics across seeds. Cell failures are
// recorded, not thrown.
Figure1Result reproduce_figure1(const Figure1Config& config);

// Runs fn(i) for i in [0, count) on a small worker pool. Results must be
// written to per-index slots; the schedule is not deterministic but the
// work is.
void run_cells(int count, int threads, const std::function<void(int)>& fn);

int resolve_threads(int requested);

}  // namespace ntklab
