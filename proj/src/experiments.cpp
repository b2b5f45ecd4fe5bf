#include "ntklab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "ntklab/errors.hpp"
#include "ntklab/rng.hpp"

namespace ntklab {

namespace {

Eigen::VectorXd draw_cube_point(Rng& rng, int d, double radius) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = rng.uniform(-1.0, 1.0);
        const double nrm = x.norm();
        if (nrm > 1e-6) return x * (radius / nrm);
    }
    throw std::runtime_error("draw_cube_point: degenerate draws");
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

Eigen::VectorXd Synthesized::sample_input(Rng& rng) const {
    return draw_cube_point(rng, spec.d, spec.input_radius);
}

double Synthesized::target(const Eigen::VectorXd& x) const {
    const double raw = std::pow(x.dot(beta), spec.poly_degree);
    return (raw - label_mean) / label_sd;
}

Synthesized synthesize(const SyntheticSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("synthesize: n must be >= 2");
    if (spec.d < 1) throw std::invalid_argument("synthesize: d must be >= 1");
    if (spec.poly_degree < 0)
        throw std::invalid_argument("synthesize: poly degree must be >= 0");
    if (!(spec.input_radius > 0.0))
        throw std::invalid_argument("synthesize: input_radius must be positive");

    Rng rng(spec.seed);

    Eigen::VectorXd beta(spec.d);
    for (int j = 0; j < spec.d; ++j) beta[j] = rng.uniform(-1.0, 1.0);
    if (beta.norm() > 1.0) beta /= beta.norm();

    // points are accepted one by one; a candidate too close to parallel with
    // any accepted point is redrawn
    Eigen::MatrixXd X(spec.n, spec.d);
    const double cos_cap = 1.0 - 1e-9;
    for (int i = 0; i < spec.n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 512 && !placed; ++attempt) {
            const Eigen::VectorXd cand = draw_cube_point(rng, spec.d, spec.input_radius);
            bool ok = true;
            for (int j = 0; j < i; ++j) {
                const double c = std::abs(cand.dot(X.row(j)) /
                                          (spec.input_radius * spec.input_radius));
                if (c >= cos_cap) { ok = false; break; }
            }
            if (ok) {
                X.row(i) = cand;
                placed = true;
            }
        }
        if (!placed)
            throw std::runtime_error(
                "synthesize: retry budget exhausted while avoiding parallel points");
    }

    Eigen::VectorXd raw(spec.n);
    for (int i = 0; i < spec.n; ++i)
        raw[i] = std::pow(X.row(i).dot(beta), spec.poly_degree);

    Synthesized out;
    out.spec = spec;
    out.beta = beta;
    if (spec.standardize) {
        out.label_mean = raw.mean();
        const double var = (raw.array() - out.label_mean).square().mean();
        if (var < 1e-28)
            throw std::invalid_argument(
                "synthesize: zero variance labels cannot be standardized");
        out.label_sd = std::sqrt(var);
    }
    const Eigen::VectorXd labels =
        (raw.array() - out.label_mean) / out.label_sd;
    out.data = make_dataset(X, labels);
    return out;
}

MonteCarloEstimate generalization_error(
    const std::function<double(const Eigen::VectorXd&)>& predictor,
    const Synthesized& synth, int n_test, std::uint64_t seed) {
    if (n_test < 1)
        throw std::invalid_argument("generalization_error: n_test must be >= 1");
    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_test; ++i) {
        const Eigen::VectorXd x = synth.sample_input(rng);
        const double err = synth.target(x) - predictor(x);
        const double sq = err * err;
        sum += sq;
        sum_sq += sq * sq;
    }
    MonteCarloEstimate est;
    est.n_samples = n_test;
    est.mean = sum / n_test;
    const double var = std::max(0.0, sum_sq / n_test - est.mean * est.mean);
    est.std_error = std::sqrt(var / n_test);
    return est;
}

MonteCarloEstimate f_vs_fkr_gap(const NetworkParams& params,
                                const Synthesized& synth, int n_test,
                                std::uint64_t seed) {
    if (n_test < 1) throw std::invalid_argument("f_vs_fkr_gap: n_test must be >= 1");
    const KernelRegressor kr(synth.data);

    Rng rng(seed);
    Eigen::MatrixXd Xta(n_test, synth.spec.d + 1);
    for (int i = 0; i < n_test; ++i) {
        Xta.row(i).head(synth.spec.d) = synth.sample_input(rng);
        Xta(i, synth.spec.d) = 1.0;
    }
    const Eigen::VectorXd fnet = forward_batch(params, Xta);

    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_test; ++i) {
        const double diff = fnet[i] - kr.predict_augmented(Xta.row(i));
        const double sq = diff * diff;
        sum += sq;
        sum_sq += sq * sq;
    }
    MonteCarloEstimate est;
    est.n_samples = n_test;
    est.mean = sum / n_test;
    const double var = std::max(0.0, sum_sq / n_test - est.mean * est.mean);
    est.std_error = std::sqrt(var / n_test);
    return est;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_cells(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::min(std::max(1, threads), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

Figure1Result reproduce_figure1(const Figure1Config& config) {
    Figure1Result result;
    result.widths = config.widths;

    const Synthesized synth = synthesize(config.data_spec);
    const int n_widths = static_cast<int>(config.widths.size());
    const int n_cells = n_widths * config.seeds;
    result.cells.resize(n_cells);

    run_cells(n_cells, resolve_threads(config.threads), [&](int idx) {
        const int wi = idx / config.seeds;
        const int si = idx % config.seeds;
        CellResult& cell = result.cells[idx];
        cell.key = {config.widths[wi], config.data_spec.n,
                    config.data_spec.poly_degree,
                    Rng::derive(config.base_seed, static_cast<std::uint64_t>(idx))};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            NetworkParams params = initialize(config.widths[wi],
                                              config.data_spec.d, config.kappa,
                                              cell.key.seed);
            const GradientFeatures feat = build_features(params, synth.data);
            cell.jitter = feat.jitter;
            const MinNormSolution sol =
                min_norm_solution(feat, params, synth.data.labels);
            TrainConfig tc;
            tc.step_size = config.step_size;
            tc.max_iters = config.max_iters;
            tc.loss_tol = config.loss_tol;
            tc.record_every = config.record_every;
            tc.seed = cell.key.seed;
            cell.trajectory = train(params, synth.data, tc, feat, sol);
        } catch (const training_diverged& e) {
            cell.trajectory = e.partial_trajectory();
            cell.error = e.what();
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cell.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
        (void)si;
    });

    result.every_cell_reached_tol = true;
    for (int wi = 0; wi < n_widths; ++wi) {
        std::vector<double> vperp, dmin, dinit;
        for (int si = 0; si < config.seeds; ++si) {
            const CellResult& cell = result.cells[wi * config.seeds + si];
            if (!cell.error.empty() || cell.trajectory.records.empty()) {
                result.every_cell_reached_tol = false;
                continue;
            }
            const TrajectoryRecord& last = cell.trajectory.records.back();
            vperp.push_back(last.v_perp);
            dmin.push_back(last.dist_minnorm_sq);
            dinit.push_back(last.dist_init_sq);
            result.every_cell_reached_tol &= cell.trajectory.reached_tol;
            result.total_monotonicity_violations +=
                cell.trajectory.monotonicity_violations;
        }
        result.median_terminal_v_perp.push_back(median(vperp));
        result.median_terminal_dist_minnorm.push_back(median(dmin));
        result.median_terminal_dist_init.push_back(median(dinit));
    }

    auto nonincreasing = [](const std::vector<double>& v) {
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[i - 1]) return false;
        return true;
    };
    result.v_perp_nonincreasing = nonincreasing(result.median_terminal_v_perp);
    result.dist_minnorm_nonincreasing =
        nonincreasing(result.median_terminal_dist_minnorm);
    return result;
}

}  // namespace ntklab
