#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "ntklab/dataset.hpp"
#include "ntklab/errors.hpp"
#include "ntklab/kernel.hpp"
#include "ntklab/linearized.hpp"
#include "ntklab/network.hpp"
#include "ntklab/power_iteration.hpp"
#include "ntklab/rng.hpp"

using namespace ntklab;

namespace {

LabeledDataset sphere_data(int n, int d, std::uint64_t seed, double radius = 1.0) {
    Rng rng(seed);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(d);
        do {
            for (int j = 0; j < d; ++j) x[j] = rng.normal();
        } while (x.norm() < 1e-8);
        X.row(i) = x.transpose() * (radius / x.norm());
        Y[i] = rng.uniform(-1.0, 1.0);
    }
    return make_dataset(X, Y);
}

// dense init Jacobian, built column by column through the public accessor
Eigen::MatrixXd dense_jacobian(const GradientFeatures& feat) {
    Eigen::MatrixXd J(feat.m * feat.cols, feat.gram.rows());
    for (Eigen::Index i = 0; i < feat.gram.rows(); ++i) J.col(i) = feat.column(i);
    return J;
}

}  // namespace

TEST_CASE("gram of a single data point") {
    const LabeledDataset data = sphere_data(1, 3, 5);
    const NetworkParams p = initialize(512, 3, 1.0, 6);
    const GradientFeatures feat = build_features(p, data);
    double active = 0.0;
    for (Eigen::Index k = 0; k < 512; ++k) active += feat.mask(k, 0);
    const double expected =
        data.augmented.row(0).squaredNorm() * active / 512.0;
    CHECK(feat.gram(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gram diagonal bound and symmetry") {
    const LabeledDataset data = sphere_data(12, 4, 7);
    const NetworkParams p = initialize(256, 4, 1.0, 8);
    const GradientFeatures feat = build_features(p, data);
    CHECK((feat.gram - feat.gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < 12; ++i)
        CHECK(feat.gram(i, i) <= data.augmented.row(i).squaredNorm() + 1e-12);
}

TEST_CASE("f0 equals the init Jacobian applied to w(0)") {
    const LabeledDataset data = sphere_data(9, 3, 9);
    const NetworkParams p = initialize(128, 3, 1.0, 10);
    const GradientFeatures feat = build_features(p, data);
    const Eigen::VectorXd via_jac = feat.apply_jacobian_transpose(p.flat_init());
    for (Eigen::Index i = 0; i < 9; ++i)
        CHECK(via_jac[i] ==
              doctest::Approx(feat.f0[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("gram entries approach the analytic kernel as width grows") {
    const LabeledDataset data = sphere_data(10, 5, 11);
    const Eigen::MatrixXd H = gram_H(data);
    const NetworkParams p = initialize(100000, 5, 1.0, 12);
    const GradientFeatures feat = build_features(p, data);
    const double err = (feat.gram - H).cwiseAbs().maxCoeff();
    const double bound = 3.0 * std::sqrt(std::log(10.0) / 100000.0) * 6.0;
    CHECK(err < bound);
}

TEST_CASE("min-norm solution trivial cases") {
    const LabeledDataset data = sphere_data(6, 2, 13);
    const NetworkParams p = initialize(64, 2, 1.0, 14);
    const GradientFeatures feat = build_features(p, data);

    // already interpolating: Y = f0
    const MinNormSolution sol = min_norm_solution(feat, p, feat.f0);
    CHECK((sol.w_star - p.flat_init()).norm() == 0.0);
}

TEST_CASE("min-norm solution against the pseudoinverse oracle") {
    const LabeledDataset data = sphere_data(5, 2, 15);
    const NetworkParams p = initialize(50, 2, 1.0, 16);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);

    // independent route: SVD pseudoinverse of J^T on the constraint
    // J^T (w - w0) = Y - f0
    const Eigen::MatrixXd Jt = dense_jacobian(feat).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        Jt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd u = svd.solve(data.labels - feat.f0);
    const Eigen::VectorXd w_oracle = p.flat_init() + u;

    CHECK((sol.w_star - w_oracle).norm() <=
          1e-8 * std::max(1.0, w_oracle.norm()));
}

TEST_CASE("min-norm solution against long-run GD on the linearized loss") {
    const LabeledDataset data = sphere_data(5, 2, 17);
    const NetworkParams p = initialize(50, 2, 1.0, 18);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);

    // gradient descent on sum_i (J_i . w - y_i)^2 from w(0); stays in
    // w(0) + span(J), hence converges to the min-norm-from-init solution
    const Eigen::MatrixXd J = dense_jacobian(feat);
    const double eta = 0.5 / feat.gram.trace();
    Eigen::VectorXd w = p.flat_init();
    for (int step = 0; step < 1000000; ++step) {
        w -= eta * (J * (J.transpose() * w - data.labels));
    }
    CHECK((sol.w_star - w).norm() <= 1e-6 * std::max(1.0, w.norm()));
}

TEST_CASE("min-norm feasibility and optimality invariants") {
    const LabeledDataset data = sphere_data(7, 3, 19);
    NetworkParams p = initialize(120, 3, 1.0, 20);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);

    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double fl = linearized_forward(p, sol.w_star, data.augmented.row(i));
        CHECK(std::abs(fl - data.labels[i]) <=
              1e-8 * std::max(1.0, data.label_bound));
    }
    const Eigen::VectorXd diff = sol.w_star - p.flat_init();
    const Eigen::VectorXd perp = diff - project_parallel(feat, diff);
    CHECK(perp.norm() <= 1e-8 * diff.norm());
}

TEST_CASE("min-norm dominance over random feasible points") {
    const LabeledDataset data = sphere_data(6, 3, 21);
    const NetworkParams p = initialize(80, 3, 1.0, 22);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);
    const double base = (sol.w_star - p.flat_init()).norm();

    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd v(p.weight_count());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const Eigen::VectorXd null_dir = v - project_parallel(feat, v);
        const Eigen::VectorXd w_feas = sol.w_star + null_dir;
        CHECK(base <= (w_feas - p.flat_init()).norm() + 1e-9);
    }
}

TEST_CASE("projection onto the Jacobian column space") {
    const LabeledDataset data = sphere_data(8, 3, 25);
    const NetworkParams p = initialize(96, 3, 1.0, 26);
    const GradientFeatures feat = build_features(p, data);
    Rng rng(27);

    // columns are fixed points
    const Eigen::VectorXd col = feat.column(3);
    CHECK((project_parallel(feat, col) - col).norm() <= 1e-10 * col.norm());

    for (int trial = 0; trial < 8; ++trial) {
        Eigen::VectorXd v(p.weight_count());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const Eigen::VectorXd pv = project_parallel(feat, v);
        // idempotence
        CHECK((project_parallel(feat, pv) - pv).norm() <=
              1e-10 * std::max(1.0, pv.norm()));
        // annihilates the orthogonal complement
        const Eigen::VectorXd perp = v - pv;
        CHECK(project_parallel(feat, perp).norm() <= 1e-10 * v.norm());
    }
}

TEST_CASE("projection is symmetric as a quadratic form") {
    const LabeledDataset data = sphere_data(6, 2, 29);
    const NetworkParams p = initialize(64, 2, 1.0, 30);
    const GradientFeatures feat = build_features(p, data);
    Rng rng(31);
    for (int trial = 0; trial < 8; ++trial) {
        Eigen::VectorXd u(p.weight_count()), v(p.weight_count());
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const double lhs = u.dot(project_parallel(feat, v));
        const double rhs = project_parallel(feat, u).dot(v);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("closed-form equivalence through the homogeneity identity") {
    const LabeledDataset data = sphere_data(7, 3, 33);
    const NetworkParams p = initialize(100, 3, 1.0, 34);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);

    const Eigen::VectorXd w0 = p.flat_init();
    const Eigen::VectorXd alt = (w0 - project_parallel(feat, w0)) +
                                feat.apply_jacobian(feat.solve_gram(data.labels));
    CHECK((sol.w_star - alt).norm() <= 1e-9 * sol.w_star.norm());
}

TEST_CASE("lyapunov quantities") {
    const LabeledDataset data = sphere_data(6, 3, 35);
    const NetworkParams p = initialize(72, 3, 1.0, 36);
    const GradientFeatures feat = build_features(p, data);
    const MinNormSolution sol = min_norm_solution(feat, p, data.labels);

    const LyapunovPair at_star = lyapunov(feat, sol, sol.w_star);
    CHECK(at_star.v_perp == 0.0);
    CHECK(at_star.v_par <= 1e-18);

    // w(0) - w* lies in the Jacobian column space
    const LyapunovPair at_init = lyapunov(feat, sol, p.flat_init());
    const double scale = (p.flat_init() - sol.w_star).squaredNorm();
    CHECK(at_init.v_perp <= 1e-10 * scale);

    Rng rng(37);
    for (int trial = 0; trial < 8; ++trial) {
        Eigen::VectorXd w(p.weight_count());
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
        const LyapunovPair lp = lyapunov(feat, sol, w);
        const double total = (w - sol.w_star).squaredNorm();
        CHECK(lp.v_perp + lp.v_par == doctest::Approx(total).epsilon(1e-10));
    }
}

TEST_CASE("spectral gap ||G - H|| shrinks like m^-1/2") {
    std::vector<double> widths = {1000, 10000, 100000};
    std::vector<double> slopes;
    for (int seed = 0; seed < 5; ++seed) {
        const LabeledDataset data = sphere_data(10, 4, 100 + seed);
        const Eigen::MatrixXd H = gram_H(data);
        std::vector<double> errs;
        for (size_t mi = 0; mi < widths.size(); ++mi) {
            const NetworkParams p = initialize(
                static_cast<Eigen::Index>(widths[mi]), 4, 1.0,
                Rng::derive(200 + seed, mi));
            const GradientFeatures feat = build_features(p, data);
            errs.push_back(spectral_norm_sym(feat.gram - H, 200));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < widths.size(); ++i) {
            const double lx = std::log(widths[i]), ly = std::log(errs[i]);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        const double nn = static_cast<double>(widths.size());
        slopes.push_back((nn * sxy - sx * sy) / (nn * sxx - sx * sx));
    }
    std::sort(slopes.begin(), slopes.end());
    const double median = slopes[slopes.size() / 2];
    CHECK(median >= -0.65);
    CHECK(median <= -0.35);
}

TEST_CASE("degenerate gram reported with the smallest eigenvalue") {
    // duplicated data point makes G singular in exact arithmetic; the
    // dataset validator rejects it, so build the degenerate case directly
    const LabeledDataset base = sphere_data(3, 2, 39);
    LabeledDataset data = base;
    data.inputs.row(2) = data.inputs.row(1) * (1.0 + 1e-14);
    data.inputs.row(2) *= data.input_radius / data.inputs.row(2).norm();
    data.augmented.leftCols(2) = data.inputs;
    const NetworkParams p = initialize(32, 2, 1.0, 40);
    try {
        const GradientFeatures feat = build_features(p, data);
        // jitter may rescue the factorization; then it must be recorded
        CHECK(feat.jitter >= 0.0);
    } catch (const degenerate_gram_error& e) {
        CHECK(std::string(e.what()).find("smallest eigenvalue") !=
              std::string::npos);
    }
}
