#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ntklab/config.hpp"
#include "ntklab/errors.hpp"
#include "ntklab/experiments.hpp"
#include "ntklab/kernel.hpp"
#include "ntklab/linearized.hpp"
#include "ntklab/manifest.hpp"
#include "ntklab/network.hpp"
#include "ntklab/report_io.hpp"
#include "ntklab/svg.hpp"
#include "ntklab/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ntklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

int effective_threads(int cli_threads) {
    if (const char* env = std::getenv("NTKLAB_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw config_error("NTKLAB_THREADS is not an integer");
        }
    }
    return cli_threads;
}

struct ResolvedTrainSetup {
    SyntheticSpec data_spec;
    long width = 5000;
    double kappa = 1.0;
    std::uint64_t net_seed = 0;
    TrainConfig train_cfg;

    std::string canonical() const {
        std::ostringstream out;
        out << "data.d = " << data_spec.d << "\n"
            << "data.input_radius = " << format_double(data_spec.input_radius) << "\n"
            << "data.n = " << data_spec.n << "\n"
            << "data.poly_degree = " << data_spec.poly_degree << "\n"
            << "data.seed = " << data_spec.seed << "\n"
            << "data.standardize = " << (data_spec.standardize ? "true" : "false") << "\n"
            << "network.kappa = " << format_double(kappa) << "\n"
            << "network.seed = " << net_seed << "\n"
            << "network.width = " << width << "\n"
            << "train.loss_tol = " << format_double(train_cfg.loss_tol) << "\n"
            << "train.max_iters = " << train_cfg.max_iters << "\n"
            << "train.mode = "
            << (train_cfg.mode == TrainMode::discrete ? "discrete" : "fine-step-flow")
            << "\n"
            << "train.record_every = " << train_cfg.record_every << "\n"
            << "train.step_size = " << format_double(train_cfg.step_size) << "\n";
        return out.str();
    }
};

ResolvedTrainSetup resolve_train_setup(Config& cfg) {
    ResolvedTrainSetup s;
    s.data_spec.n = static_cast<int>(cfg.get_long("data.n", 100));
    s.data_spec.d = static_cast<int>(cfg.get_long("data.d", 5));
    s.data_spec.poly_degree = static_cast<int>(cfg.get_long("data.poly_degree", 2));
    s.data_spec.standardize = cfg.get_bool("data.standardize", true);
    const std::string radius = cfg.get_string("data.input_radius", "1");
    if (radius == "sqrt_d" || radius == "sqrt(d)")
        s.data_spec.input_radius = std::sqrt(static_cast<double>(s.data_spec.d));
    else
        s.data_spec.input_radius = std::stod(radius);
    s.data_spec.seed = cfg.get_seed("data.seed", 0);

    s.width = cfg.get_long("network.width", 5000);
    s.kappa = cfg.get_double("network.kappa", 1.0);
    s.net_seed = cfg.get_seed("network.seed", 1);

    s.train_cfg.step_size = cfg.get_double("train.step_size", 0.01);
    s.train_cfg.max_iters = cfg.get_long("train.max_iters", 50000);
    s.train_cfg.loss_tol = cfg.get_double("train.loss_tol", 1e-3);
    s.train_cfg.record_every = cfg.get_long("train.record_every", 10);
    const std::string mode = cfg.get_string("train.mode", "discrete");
    if (mode == "discrete") {
        s.train_cfg.mode = TrainMode::discrete;
    } else if (mode == "fine-step-flow") {
        s.train_cfg.mode = TrainMode::fine_step_flow;
        const double guide =
            1e-3 / (static_cast<double>(s.data_spec.d) * s.data_spec.n);
        if (s.train_cfg.step_size > guide)
            std::cerr << "warning: fine-step-flow step_size above the Euler "
                         "guidance "
                      << guide << "\n";
    } else {
        throw config_error("config: train.mode must be discrete or fine-step-flow");
    }
    s.train_cfg.seed = s.net_seed;
    cfg.reject_unknown();

    if (!(s.train_cfg.step_size > 0.0))
        throw config_error("config: train.step_size must be positive");
    return s;
}

SvgChart trajectory_chart(const Trajectory& traj) {
    SvgChart chart;
    chart.title = "weight-space diagnostics";
    chart.x_label = "iteration";
    chart.y_label = "squared distance";
    chart.y_log = true;
    SvgSeries vp{"v_perp"}, vpar{"v_par"}, dmin{"dist_minnorm_sq"},
        dinit{"dist_init_sq"};
    for (const TrajectoryRecord& r : traj.records) {
        const double it = static_cast<double>(r.iter);
        vp.x.push_back(it);
        vp.y.push_back(r.v_perp);
        vpar.x.push_back(it);
        vpar.y.push_back(r.v_par);
        dmin.x.push_back(it);
        dmin.y.push_back(r.dist_minnorm_sq);
        dinit.x.push_back(it);
        dinit.y.push_back(r.dist_init_sq);
    }
    chart.series = {vp, vpar, dmin, dinit};
    return chart;
}

int run_train_setup(const ResolvedTrainSetup& setup, const std::string& out_dir) {
    const Synthesized synth = synthesize(setup.data_spec);
    NetworkParams params = initialize(setup.width, setup.data_spec.d,
                                      setup.kappa, setup.net_seed);
    const GradientFeatures feat = build_features(params, synth.data);
    const MinNormSolution sol = min_norm_solution(feat, params, synth.data.labels);

    json manifest = manifest_base(setup.canonical(), setup.net_seed);
    manifest["jitter"] = feat.jitter;

    Trajectory traj;
    bool diverged = false;
    std::string divergence_msg;
    try {
        traj = train(params, synth.data, setup.train_cfg, feat, sol);
    } catch (const training_diverged& e) {
        traj = e.partial_trajectory();
        diverged = true;
        divergence_msg = e.what();
    }

    const std::string csv_path = (fs::path(out_dir) / "trajectory.csv").string();
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    write_text_atomic(trajectory_csv(traj), csv_path);

    SvgChart loss_chart;
    loss_chart.title = "training loss";
    loss_chart.x_label = "iteration";
    loss_chart.y_label = "||f - Y||^2";
    loss_chart.y_log = true;
    SvgSeries loss_series{"loss"};
    for (const TrajectoryRecord& r : traj.records) {
        loss_series.x.push_back(static_cast<double>(r.iter));
        loss_series.y.push_back(r.loss);
    }
    loss_chart.series = {loss_series};
    const std::string loss_svg = (fs::path(out_dir) / "loss.svg").string();
    const std::string traj_svg = (fs::path(out_dir) / "trajectory.svg").string();
    write_text_atomic(loss_chart.render(), loss_svg);
    write_text_atomic(trajectory_chart(traj).render(), traj_svg);

    double total_wall = traj.records.empty() ? 0.0 : traj.records.back().wall_ms;
    manifest["terminal_loss"] = traj.final_loss;
    manifest["final_iter"] = traj.final_iter;
    manifest["reached_tol"] = traj.reached_tol;
    manifest["monotonicity_violations"] = traj.monotonicity_violations;
    manifest["wall_ms"] = total_wall;
    manifest["diverged"] = diverged;
    if (diverged) manifest["divergence"] = divergence_msg;
    manifest["outputs"] = {csv_path, loss_svg, traj_svg};
    write_manifest(manifest, manifest_path);

    if (diverged) {
        std::cerr << divergence_msg << "\n";
        return kExitNumeric;
    }
    std::cout << "final_iter=" << traj.final_iter
              << " loss=" << format_double(traj.final_loss)
              << " reached_tol=" << (traj.reached_tol ? "yes" : "no") << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& replay_path,
              const std::string& out_dir, long seed_override, bool have_seed) {
    ResolvedTrainSetup setup;
    if (!replay_path.empty()) {
        std::ifstream in(replay_path);
        if (!in) throw std::runtime_error("cannot open manifest: " + replay_path);
        json manifest;
        in >> manifest;
        Config cfg = Config::parse_string(manifest.at("config").get<std::string>());
        setup = resolve_train_setup(cfg);
    } else {
        Config cfg = config_path.empty() ? Config::parse_string("")
                                         : Config::parse_file(config_path);
        if (have_seed && cfg.has("network.seed"))
            cfg.get_string("network.seed");  // consume; CLI flag wins
        setup = resolve_train_setup(cfg);
        if (have_seed) {
            setup.net_seed = static_cast<std::uint64_t>(seed_override);
            setup.train_cfg.seed = setup.net_seed;
        }
    }
    return run_train_setup(setup, out_dir);
}

int cmd_figure1(const std::string& out_dir, const std::vector<long>& widths,
                int seeds, long max_iters, double loss_tol,
                std::uint64_t base_seed, int threads) {
    Figure1Config cfg;
    if (!widths.empty()) cfg.widths = widths;
    cfg.seeds = seeds;
    cfg.max_iters = max_iters;
    cfg.loss_tol = loss_tol;
    cfg.base_seed = base_seed;
    cfg.threads = threads;
    cfg.data_spec.seed = base_seed;

    const Figure1Result result = reproduce_figure1(cfg);

    // one row per recorded iterate of every cell
    std::vector<std::vector<double>> rows;
    for (size_t ci = 0; ci < result.cells.size(); ++ci) {
        const CellResult& cell = result.cells[ci];
        const double seed_idx = static_cast<double>(ci % cfg.seeds);
        for (const TrajectoryRecord& r : cell.trajectory.records) {
            rows.push_back({static_cast<double>(cell.key.m), seed_idx,
                            static_cast<double>(r.iter), r.loss, r.v_perp,
                            r.v_par, r.dist_minnorm_sq, r.dist_init_sq,
                            r.max_unit_drift});
        }
    }
    const std::string csv = table_csv(
        {"width", "seed", "iter", "loss", "v_perp", "v_par", "dist_minnorm_sq",
         "dist_init_sq", "max_unit_drift"},
        rows);
    write_text_atomic(csv, (fs::path(out_dir) / "figure1.csv").string());

    // per-width mean +- std bands over seeds, series held at their terminal
    // value once a cell stops early
    auto band_chart = [&](const std::string& title, auto field) {
        SvgChart chart;
        chart.title = title;
        chart.x_label = "iteration";
        chart.y_label = title;
        chart.y_log = true;
        for (size_t wi = 0; wi < result.widths.size(); ++wi) {
            std::vector<const Trajectory*> trajs;
            for (int si = 0; si < cfg.seeds; ++si) {
                const CellResult& cell = result.cells[wi * cfg.seeds + si];
                if (cell.error.empty() && !cell.trajectory.records.empty())
                    trajs.push_back(&cell.trajectory);
            }
            if (trajs.empty()) continue;
            size_t grid_len = 0;
            const Trajectory* longest = trajs.front();
            for (const Trajectory* t : trajs)
                if (t->records.size() > grid_len) {
                    grid_len = t->records.size();
                    longest = t;
                }
            SvgSeries series;
            series.label = "m=" + std::to_string(result.widths[wi]);
            for (size_t gi = 0; gi < grid_len; ++gi) {
                double sum = 0, sum_sq = 0;
                for (const Trajectory* t : trajs) {
                    const TrajectoryRecord& r =
                        gi < t->records.size() ? t->records[gi] : t->records.back();
                    const double v = field(r);
                    sum += v;
                    sum_sq += v * v;
                }
                const double nn = static_cast<double>(trajs.size());
                const double mean = sum / nn;
                const double sd = std::sqrt(std::max(0.0, sum_sq / nn - mean * mean));
                series.x.push_back(static_cast<double>(longest->records[gi].iter));
                series.y.push_back(mean);
                series.y_lo.push_back(mean - sd);
                series.y_hi.push_back(mean + sd);
            }
            chart.series.push_back(series);
        }
        return chart;
    };

    write_text_atomic(
        band_chart("v_perp", [](const TrajectoryRecord& r) { return r.v_perp; })
            .render(),
        (fs::path(out_dir) / "v_perp.svg").string());
    write_text_atomic(
        band_chart("dist_minnorm_sq",
                   [](const TrajectoryRecord& r) { return r.dist_minnorm_sq; })
            .render(),
        (fs::path(out_dir) / "dist_minnorm.svg").string());
    write_text_atomic(
        band_chart("dist_init_sq",
                   [](const TrajectoryRecord& r) { return r.dist_init_sq; })
            .render(),
        (fs::path(out_dir) / "dist_init.svg").string());

    std::ostringstream canonical;
    canonical << "figure1.base_seed = " << base_seed << "\n"
              << "figure1.loss_tol = " << format_double(loss_tol) << "\n"
              << "figure1.max_iters = " << max_iters << "\n"
              << "figure1.seeds = " << seeds << "\n"
              << "figure1.widths =";
    for (long w : cfg.widths) canonical << " " << w;
    canonical << "\n";

    json manifest = manifest_base(canonical.str(), base_seed);
    manifest["trends"] = {
        {"v_perp_nonincreasing", result.v_perp_nonincreasing},
        {"dist_minnorm_nonincreasing", result.dist_minnorm_nonincreasing},
        {"every_cell_reached_tol", result.every_cell_reached_tol},
    };
    manifest["median_terminal_v_perp"] = result.median_terminal_v_perp;
    manifest["median_terminal_dist_minnorm"] = result.median_terminal_dist_minnorm;
    manifest["median_terminal_dist_init"] = result.median_terminal_dist_init;
    manifest["monotonicity_violations"] = result.total_monotonicity_violations;
    json cells = json::array();
    for (const CellResult& cell : result.cells) {
        cells.push_back({{"m", cell.key.m},
                         {"seed", cell.key.seed},
                         {"jitter", cell.jitter},
                         {"terminal_loss", cell.trajectory.final_loss},
                         {"final_iter", cell.trajectory.final_iter},
                         {"reached_tol", cell.trajectory.reached_tol},
                         {"wall_ms", cell.wall_ms},
                         {"error", cell.error}});
    }
    manifest["cells"] = cells;
    write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());

    std::cout << "v_perp nonincreasing: "
              << (result.v_perp_nonincreasing ? "yes" : "no") << "\n"
              << "dist_minnorm nonincreasing: "
              << (result.dist_minnorm_nonincreasing ? "yes" : "no") << "\n"
              << "every cell reached tol: "
              << (result.every_cell_reached_tol ? "yes" : "no") << "\n";
    bool any_error = false;
    for (const CellResult& cell : result.cells)
        if (!cell.error.empty()) {
            std::cerr << "cell m=" << cell.key.m << " failed: " << cell.error << "\n";
            any_error = true;
        }
    return any_error ? kExitNumeric : kExitOk;
}

int cmd_kernel_check(int d, int trials, const std::string& out_dir,
                     std::uint64_t seed, int threads) {
    if (trials <= 0) throw config_error("kernel-check: --trials must be positive");

    Rng rng(seed);
    json report;
    report["d"] = d;
    report["trials"] = trials;
    report["seed"] = seed;

    // closed form vs series, |t| <= 0.9
    double series_max_err = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Eigen::VectorXd x(d + 1), y(d + 1);
        double t;
        do {
            for (int j = 0; j <= d; ++j) x[j] = rng.normal();
            for (int j = 0; j <= d; ++j) y[j] = rng.normal();
            t = x.dot(y) / (x.norm() * y.norm());
        } while (std::abs(t) > 0.9);
        series_max_err =
            std::max(series_max_err, std::abs(ntk_series(x, y, 500) - ntk(x, y)));
    }
    report["series_max_err"] = series_max_err;

    // feature map vs the fixed-norm closed form on unit-ball inner products
    const FeatureMapCoefficients fc = feature_coefficients(d, 40, 400);
    double recon_max_err = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const double s = rng.uniform(-1.0, 1.0);
        recon_max_err =
            std::max(recon_max_err, std::abs(fc.reconstruct(s) - ntk_fixed_norm(s, d)));
    }
    report["feature_map_max_err"] = recon_max_err;
    report["feature_map_tail_bound"] = fc.tail_bound;

    bool dp_ok = true;
    json dp = json::array();
    for (int p = 2; p <= 8; ++p) {
        const double bound =
            1.0 / (10.0 * std::pow(p + 1.0, 1.5) * std::pow(d + 1.0, p));
        dp.push_back({{"p", p}, {"d_p", fc.coeffs[p]}, {"bound", bound}});
        dp_ok &= fc.coeffs[p] >= bound;
    }
    report["d_p"] = dp;
    report["d_p_bound_ok"] = dp_ok;

    // empirical kernel convergence: max-entry error vs width, 5 seeds
    const std::vector<long> widths = {1000, 10000, 100000};
    const int n_slope_seeds = 5;
    std::vector<double> slopes(n_slope_seeds);
    std::vector<std::uint64_t> slope_seeds(n_slope_seeds);
    SyntheticSpec spec;
    spec.n = 20;
    spec.d = d;
    spec.standardize = false;
    spec.poly_degree = 1;
    run_cells(n_slope_seeds, resolve_threads(threads), [&](int si) {
        slope_seeds[si] = Rng::derive(seed, 100 + si);
        SyntheticSpec s = spec;
        s.seed = slope_seeds[si];
        const Synthesized synth = synthesize(s);
        const Eigen::MatrixXd H = gram_H(synth.data);
        std::vector<double> errs;
        for (size_t mi = 0; mi < widths.size(); ++mi) {
            const NetworkParams params =
                initialize(widths[mi], d, 1.0, Rng::derive(slope_seeds[si], mi));
            errs.push_back(
                (empirical_ntk_gram(params, synth.data) - H).cwiseAbs().maxCoeff());
        }
        std::vector<double> wd(widths.begin(), widths.end());
        slopes[si] = loglog_slope(wd, errs);
    });
    std::vector<double> sorted = slopes;
    std::sort(sorted.begin(), sorted.end());
    report["empirical_slopes"] = slopes;
    report["empirical_slope_seeds"] = slope_seeds;
    report["empirical_slope_median"] = sorted[sorted.size() / 2];

    write_manifest(report, (fs::path(out_dir) / "report.json").string());
    std::cout << "series_max_err=" << format_double(series_max_err)
              << " feature_map_max_err=" << format_double(recon_max_err)
              << " d_p_bound_ok=" << (dp_ok ? "yes" : "no")
              << " empirical_slope_median="
              << format_double(sorted[sorted.size() / 2]) << "\n";
    return kExitOk;
}

int cmd_eig_bounds(const std::string& data_path, int n, int d,
                   std::uint64_t seed, const std::string& out_dir) {
    LabeledDataset data;
    if (!data_path.empty()) {
        // rows: x_1,...,x_d,y
        std::ifstream in(data_path);
        if (!in) throw std::runtime_error("cannot open dataset: " + data_path);
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(row);
        }
        if (rows.empty()) throw config_error("eig-bounds: empty dataset file");
        const size_t cols = rows.front().size();
        if (cols < 2) throw config_error("eig-bounds: need at least one x column and y");
        Eigen::MatrixXd X(rows.size(), cols - 1);
        Eigen::VectorXd Y(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols)
                throw config_error("eig-bounds: ragged dataset file");
            for (size_t j = 0; j + 1 < cols; ++j) X(i, j) = rows[i][j];
            Y[i] = rows[i].back();
        }
        data = make_dataset(X, Y);
    } else {
        SyntheticSpec spec;
        spec.n = n;
        spec.d = d;
        spec.input_radius = std::sqrt(static_cast<double>(d));
        spec.seed = seed;
        spec.standardize = true;
        data = synthesize(spec).data;
    }

    const EigenBoundReport rep = eigen_bounds(data);
    json out;
    out["n"] = data.n();
    out["d"] = data.dim();
    out["cos_theta_min"] = rep.cos_theta_min;
    out["theta_min"] = rep.theta_min;
    out["theta_exceeds_one"] = rep.theta_exceeds_one;
    out["lower_bound"] = rep.lower_bound;
    out["exact_lambda_min"] = rep.exact_lambda_min;
    out["upper_bound"] = rep.upper_bound;
    out["sandwich_ok"] = rep.sandwich_ok;
    if (!out_dir.empty())
        write_manifest(out, (fs::path(out_dir) / "eig_bounds.json").string());

    std::cout << "theta_min=" << format_double(rep.theta_min)
              << " lower=" << format_double(rep.lower_bound)
              << " exact=" << format_double(rep.exact_lambda_min)
              << " upper=" << format_double(rep.upper_bound)
              << " sandwich=" << (rep.sandwich_ok ? "ok" : "VIOLATED") << "\n";
    if (rep.theta_exceeds_one)
        std::cerr << "warning: theta_min >= 1 rad; the paper's simplified "
                     "bounds assume theta_min < 1\n";
    return rep.sandwich_ok ? kExitOk : kExitNumeric;
}

int cmd_generalize(int p, const std::vector<int>& n_list, const std::string& out_dir,
                   long width, int seeds, double kappa, double eta, double tol,
                   long max_iters, int n_test, bool standardize,
                   std::uint64_t base_seed, int threads) {
    if (n_list.empty()) throw config_error("generalize: empty n list");

    struct Cell {
        int n = 0, seed_idx = 0;
        MonteCarloEstimate err;
        double final_loss = 0.0;
        long iters = 0;
        std::string error;
    };
    const int n_cells = static_cast<int>(n_list.size()) * seeds;
    std::vector<Cell> cells(n_cells);

    run_cells(n_cells, resolve_threads(threads), [&](int idx) {
        Cell& cell = cells[idx];
        cell.n = n_list[idx / seeds];
        cell.seed_idx = idx % seeds;
        try {
            SyntheticSpec spec;
            spec.n = cell.n;
            spec.d = 5;
            spec.poly_degree = p;
            spec.standardize = standardize;
            spec.seed = Rng::derive(base_seed, 7000 + cell.seed_idx);
            const Synthesized synth = synthesize(spec);

            NetworkParams params = initialize(
                width, spec.d, kappa, Rng::derive(base_seed, idx));
            const GradientFeatures feat = build_features(params, synth.data);
            const MinNormSolution sol =
                min_norm_solution(feat, params, synth.data.labels);
            TrainConfig tc;
            tc.step_size = eta;
            tc.loss_tol = tol;
            tc.max_iters = max_iters;
            tc.record_every = 100000;
            const Trajectory traj = train(params, synth.data, tc, feat, sol);
            cell.final_loss = traj.final_loss;
            cell.iters = traj.final_iter;
            cell.err = generalization_error(
                [&](const Eigen::VectorXd& x) {
                    Eigen::VectorXd xa(x.size() + 1);
                    xa << x, 1.0;
                    return forward(params, xa);
                },
                synth, n_test, Rng::derive(base_seed, 9000 + cell.seed_idx));
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    std::vector<std::vector<double>> rows;
    std::vector<double> per_seed_slope;
    for (int si = 0; si < seeds; ++si) {
        std::vector<double> xs, ys;
        for (int ni = 0; ni < static_cast<int>(n_list.size()); ++ni) {
            const Cell& cell = cells[ni * seeds + si];
            if (!cell.error.empty()) continue;
            xs.push_back(cell.n);
            ys.push_back(cell.err.mean);
        }
        if (xs.size() == n_list.size()) per_seed_slope.push_back(loglog_slope(xs, ys));
    }
    for (const Cell& cell : cells)
        rows.push_back({static_cast<double>(cell.n),
                        static_cast<double>(cell.seed_idx), cell.err.mean,
                        cell.err.std_error, static_cast<double>(cell.iters),
                        cell.final_loss});
    write_text_atomic(
        table_csv({"n", "seed", "test_error", "std_error", "iters", "final_loss"},
                  rows),
        (fs::path(out_dir) / "gen_error.csv").string());

    std::vector<double> medians;
    for (int ni = 0; ni < static_cast<int>(n_list.size()); ++ni) {
        std::vector<double> v;
        for (int si = 0; si < seeds; ++si)
            if (cells[ni * seeds + si].error.empty())
                v.push_back(cells[ni * seeds + si].err.mean);
        std::sort(v.begin(), v.end());
        medians.push_back(v.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : v[v.size() / 2]);
    }

    double median_slope = std::numeric_limits<double>::quiet_NaN();
    if (!per_seed_slope.empty()) {
        std::sort(per_seed_slope.begin(), per_seed_slope.end());
        median_slope = per_seed_slope[per_seed_slope.size() / 2];
    }

    SvgChart chart;
    chart.title = "test error vs n (p=" + std::to_string(p) + ")";
    chart.x_label = "n";
    chart.y_label = "E(y - f)^2";
    chart.x_log = true;
    chart.y_log = true;
    SvgSeries med{"median"};
    for (size_t i = 0; i < n_list.size(); ++i) {
        med.x.push_back(n_list[i]);
        med.y.push_back(medians[i]);
    }
    chart.series = {med};
    write_text_atomic(chart.render(),
                      (fs::path(out_dir) / "gen_error.svg").string());

    std::ostringstream canonical;
    canonical << "generalize.base_seed = " << base_seed << "\n"
              << "generalize.eta = " << format_double(eta) << "\n"
              << "generalize.kappa = " << format_double(kappa) << "\n"
              << "generalize.max_iters = " << max_iters << "\n"
              << "generalize.n_list =";
    for (int nv : n_list) canonical << " " << nv;
    canonical << "\n"
              << "generalize.n_test = " << n_test << "\n"
              << "generalize.p = " << p << "\n"
              << "generalize.seeds = " << seeds << "\n"
              << "generalize.standardize = " << (standardize ? "true" : "false")
              << "\n"
              << "generalize.tol = " << format_double(tol) << "\n"
              << "generalize.width = " << width << "\n";
    json manifest = manifest_base(canonical.str(), base_seed);
    manifest["median_errors"] = medians;
    manifest["per_seed_slopes"] = per_seed_slope;
    manifest["median_slope"] = median_slope;
    manifest["slope_window"] = {-0.9, -0.25};
    manifest["slope_in_window"] =
        std::isfinite(median_slope) && median_slope >= -0.9 && median_slope <= -0.25;
    json errors = json::array();
    for (const Cell& cell : cells)
        if (!cell.error.empty())
            errors.push_back({{"n", cell.n}, {"seed", cell.seed_idx},
                              {"error", cell.error}});
    manifest["cell_errors"] = errors;
    write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());

    std::cout << "median_slope=" << format_double(median_slope)
              << " in_window=" << (manifest["slope_in_window"].get<bool>() ? "yes" : "no")
              << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ntklab: shallow ReLU network training next to its tangent-kernel theory"};
    app.require_subcommand(1);

    std::string config_path, replay_path, out_dir = ".", data_path;
    long seed_flag = 0;
    int threads = 0;

    auto* train_cmd = app.add_subcommand("train", "train one network from a config file");
    train_cmd->add_option("--config", config_path, "config file");
    train_cmd->add_option("--replay", replay_path, "rerun from a manifest.json");
    train_cmd->add_option("--out", out_dir, "output directory");
    auto* seed_opt = train_cmd->add_option("--seed", seed_flag, "override network.seed");
    train_cmd->add_option("--threads", threads, "worker threads (unused; single run)");

    std::vector<long> widths;
    int fig_seeds = 5;
    long fig_max_iters = 50000;
    double fig_tol = 1e-3;
    std::uint64_t fig_seed = 0;
    auto* fig_cmd = app.add_subcommand("figure1", "width sweep of the synthetic experiment");
    fig_cmd->add_option("--out", out_dir, "output directory");
    fig_cmd->add_option("--widths", widths, "widths to sweep")->delimiter(',');
    fig_cmd->add_option("--seeds", fig_seeds, "number of seeds");
    fig_cmd->add_option("--max-iters", fig_max_iters, "iteration cap per cell");
    fig_cmd->add_option("--loss-tol", fig_tol, "loss tolerance");
    fig_cmd->add_option("--seed", fig_seed, "base seed");
    fig_cmd->add_option("--threads", threads, "worker threads");

    int kc_d = 5, kc_trials = 200;
    std::uint64_t kc_seed = 0;
    auto* kc_cmd = app.add_subcommand("kernel-check", "kernel identity and rate checks");
    kc_cmd->add_option("--d", kc_d, "input dimension");
    kc_cmd->add_option("--trials", kc_trials, "random pairs per identity");
    kc_cmd->add_option("--seed", kc_seed, "seed");
    kc_cmd->add_option("--out", out_dir, "output directory");
    kc_cmd->add_option("--threads", threads, "worker threads");

    int eb_n = 100, eb_d = 5;
    std::uint64_t eb_seed = 0;
    auto* eb_cmd = app.add_subcommand("eig-bounds", "smallest-eigenvalue bounds for H");
    eb_cmd->add_option("--data", data_path, "dataset csv (x columns then y)");
    eb_cmd->add_option("--n", eb_n, "synthetic n");
    eb_cmd->add_option("--d", eb_d, "synthetic d");
    eb_cmd->add_option("--seed", eb_seed, "synthetic seed");
    eb_cmd->add_option("--out", out_dir, "output directory");

    int gen_p = 1, gen_seeds = 5, gen_ntest = 5000;
    std::vector<int> gen_n_list = {25, 50, 100, 200};
    long gen_width = 5000, gen_max_iters = 200000;
    double gen_kappa = 0.01, gen_eta = 0.01, gen_tol = 1e-7;
    bool gen_standardize = false;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("generalize", "test-error scaling in n");
    gen_cmd->add_option("--p", gen_p, "target polynomial degree");
    gen_cmd->add_option("--n-list", gen_n_list, "sample sizes")->delimiter(',');
    gen_cmd->add_option("--width", gen_width, "network width");
    gen_cmd->add_option("--seeds", gen_seeds, "number of seeds");
    gen_cmd->add_option("--kappa", gen_kappa, "init scale");
    gen_cmd->add_option("--eta", gen_eta, "step size");
    gen_cmd->add_option("--tol", gen_tol, "training loss tolerance");
    gen_cmd->add_option("--max-iters", gen_max_iters, "iteration cap");
    gen_cmd->add_option("--n-test", gen_ntest, "Monte-Carlo test points");
    gen_cmd->add_flag("--standardize", gen_standardize, "standardize labels");
    gen_cmd->add_option("--seed", gen_seed, "base seed");
    gen_cmd->add_option("--threads", threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        const int eff_threads = effective_threads(threads);
        if (train_cmd->parsed())
            return cmd_train(config_path, replay_path, out_dir, seed_flag,
                             seed_opt->count() > 0);
        if (fig_cmd->parsed())
            return cmd_figure1(out_dir, widths, fig_seeds, fig_max_iters, fig_tol,
                               fig_seed, eff_threads);
        if (kc_cmd->parsed())
            return cmd_kernel_check(kc_d, kc_trials, out_dir, kc_seed, eff_threads);
        if (eb_cmd->parsed())
            return cmd_eig_bounds(data_path, eb_n, eb_d, eb_seed, out_dir);
        if (gen_cmd->parsed())
            return cmd_generalize(gen_p, gen_n_list, out_dir, gen_width, gen_seeds,
                                  gen_kappa, gen_eta, gen_tol, gen_max_iters,
                                  gen_ntest, gen_standardize, gen_seed, eff_threads);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const degenerate_gram_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
