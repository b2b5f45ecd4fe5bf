#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ntklab/dataset.hpp"
#include "ntklab/errors.hpp"
#include "ntklab/kernel.hpp"
#include "ntklab/network.hpp"
#include "ntklab/rng.hpp"

using namespace ntklab;

namespace {

Eigen::VectorXd unit(const Eigen::VectorXd& v) { return v / v.norm(); }

Eigen::MatrixXd sphere_points(Rng& rng, int n, int d, double radius) {
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(d);
        do {
            for (int j = 0; j < d; ++j) x[j] = rng.normal();
        } while (x.norm() < 1e-8);
        X.row(i) = x.transpose() * (radius / x.norm());
    }
    return X;
}

// augmented sqrt(d)-sphere pair whose raw inner product is s
std::pair<Eigen::VectorXd, Eigen::VectorXd> sphere_pair(int d, double s) {
    const double r = std::sqrt(static_cast<double>(d));
    const double cosine = s / (r * r);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d + 1);
    x[0] = r;
    y[0] = r * cosine;
    y[1] = r * std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
    x[d] = 1.0;
    y[d] = 1.0;
    return {x, y};
}

}  // namespace

TEST_CASE("ntk closed form special values") {
    const int d = 4;
    Eigen::VectorXd x(d + 1);
    x << 1.0, 1.0, 1.0, 1.0, 1.0;  // |x|^2 = d+1
    CHECK(ntk(x, x) == doctest::Approx((d + 1) / 2.0).epsilon(1e-12));

    Eigen::VectorXd a(3), b(3);
    a << 1.0, 2.0, -0.5;
    b << 2.0, -0.75, 0.5;
    b -= a * (a.dot(b) / a.squaredNorm());  // exact orthogonal projection
    CHECK(ntk(a, b) == doctest::Approx(0.0).epsilon(1e-15));

    const Eigen::VectorXd neg = -a;
    CHECK(ntk(a, neg) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(ntk(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("series matches the closed form for |t| <= 0.9") {
    Rng rng(3);
    double max_err = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd x(6), y(6);
        double t;
        do {
            for (int j = 0; j < 6; ++j) x[j] = rng.normal();
            for (int j = 0; j < 6; ++j) y[j] = rng.normal();
            t = x.dot(y) / (x.norm() * y.norm());
        } while (std::abs(t) > 0.9);
        max_err = std::max(max_err, std::abs(ntk_series(x, y, 500) - ntk(x, y)));
    }
    CHECK(max_err <= 1e-10);
}

TEST_CASE("series at t=0 and the leading quadratic coefficient") {
    Eigen::VectorXd x(3), y(3);
    x << 1.0, 0.0, 1.0;
    y << 0.0, 1.0, 0.0;
    CHECK(ntk_series(x, y, 100) == 0.0);

    // for small t: ntk - rho^2 t/4 ~ rho^2 t^2 / (2 pi)
    const auto [xa, ya] = sphere_pair(5, 0.05);  // t = 0.05/6 ~ 0.0083
    const double rho2 = xa.norm() * ya.norm();
    const double t = xa.dot(ya) / rho2;
    const double remainder = ntk(xa, ya) - rho2 * t / 4.0;
    const double leading = rho2 * t * t / (2.0 * M_PI);
    CHECK(remainder == doctest::Approx(leading).epsilon(0.01));
}

TEST_CASE("feature map reconstructs the kernel for unit-ball inner products") {
    for (int d : {2, 5, 10}) {
        const FeatureMapCoefficients fc = feature_coefficients(d, 40, 400);
        CHECK(fc.coeffs[0] >= 0.25);
        CHECK(fc.coeffs[1] >= 0.25);
        CHECK(fc.coeffs.minCoeff() >= 0.0);

        Rng rng(100 + d);
        double max_err = 0.0;
        for (int trial = 0; trial < 400; ++trial) {
            const double s = rng.uniform(-1.0, 1.0);
            max_err = std::max(max_err,
                               std::abs(fc.reconstruct(s) - ntk_fixed_norm(s, d)));
        }
        CHECK(max_err <= std::max(1e-6, fc.tail_bound));
        CHECK(fc.tail_bound < 1e-8);

        // the same values come out of the angle-form kernel evaluated on
        // sqrt(d)-sphere representatives with the prescribed inner product
        for (double s : {-0.8, -0.2, 0.0, 0.4, 0.97}) {
            const auto [xa, ya] = sphere_pair(d, s);
            CHECK(ntk(xa, ya) ==
                  doctest::Approx(ntk_fixed_norm(s, d)).epsilon(1e-10));
        }
    }
}

TEST_CASE("feature coefficient lower bound for p = 2..8") {
    const int d = 5;
    const FeatureMapCoefficients fc = feature_coefficients(d, 10, 400);
    for (int p = 2; p <= 8; ++p) {
        const double bound =
            1.0 / (10.0 * std::pow(p + 1.0, 1.5) * std::pow(d + 1.0, p));
        CHECK(fc.coeffs[p] >= bound);
    }
}

TEST_CASE("feature coefficients reject K_max > 2 P_max") {
    CHECK_THROWS_AS(feature_coefficients(5, 30, 10), std::invalid_argument);
}

TEST_CASE("gram_H diagonal and the d=1 antiparallel pair") {
    Rng rng(7);
    const int d = 5;
    const Eigen::MatrixXd X =
        sphere_points(rng, 8, d, std::sqrt(static_cast<double>(d)));
    const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Ones(8));
    const Eigen::MatrixXd H = gram_H(data);
    for (int i = 0; i < 8; ++i)
        CHECK(H(i, i) == doctest::Approx((d + 1) / 2.0).epsilon(1e-12));
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // d=1: x2 = -x1 on the unit circle gives orthogonal augmented vectors
    // (the raw points are antiparallel, so this never forms a valid dataset;
    // the kernel value itself is still defined)
    Eigen::VectorXd a1(2), a2(2);
    a1 << 1.0, 1.0;
    a2 << -1.0, 1.0;
    CHECK(ntk(a1, a2) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("empirical kernel basics") {
    const NetworkParams p1 = initialize(1, 3, 1.0, 9);
    Rng rng(10);
    Eigen::VectorXd xa(4), ya(4);
    for (int j = 0; j < 4; ++j) xa[j] = rng.normal();
    for (int j = 0; j < 4; ++j) ya[j] = rng.normal();
    const double v = empirical_ntk(p1, xa, ya);
    const bool zero_or_dot =
        v == 0.0 || v == doctest::Approx(xa.dot(ya)).epsilon(1e-15);
    CHECK(zero_or_dot);

    const NetworkParams p = initialize(100000, 3, 1.0, 11);
    const double diag = empirical_ntk(p, xa, xa);
    CHECK(diag == doctest::Approx(xa.squaredNorm() / 2.0).epsilon(0.03));
}

TEST_CASE("empirical kernel concentrates around the analytic one") {
    Rng rng(13);
    std::vector<double> devs;
    for (int seed = 0; seed < 5; ++seed) {
        const NetworkParams p = initialize(100000, 4, 1.0, 500 + seed);
        Eigen::VectorXd xa(5), ya(5);
        for (int j = 0; j < 5; ++j) xa[j] = rng.normal();
        for (int j = 0; j < 5; ++j) ya[j] = rng.normal();
        const double rho2 = xa.norm() * ya.norm();
        devs.push_back(std::abs(empirical_ntk(p, xa, ya) - ntk(xa, ya)) / rho2);
    }
    std::sort(devs.begin(), devs.end());
    CHECK(devs[2] <= 5.0 / std::sqrt(100000.0));
}

TEST_CASE("empirical gram equals the pairwise empirical kernel") {
    Rng rng(15);
    const Eigen::MatrixXd X = sphere_points(rng, 6, 3, 1.0);
    const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Zero(6));
    const NetworkParams p = initialize(128, 3, 1.0, 16);
    const Eigen::MatrixXd Km = empirical_ntk_gram(p, data);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(Km(i, j) ==
                  doctest::Approx(empirical_ntk(p, data.augmented.row(i),
                                                data.augmented.row(j)))
                      .epsilon(1e-12));
}

TEST_CASE("eigen bounds on three mutually orthogonal points") {
    // orthogonal sqrt(3)-sphere points: every augmented cosine is 1/4
    const int d = 3;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, d);
    const double r = std::sqrt(3.0);
    X(0, 0) = r;
    X(1, 1) = r;
    X(2, 2) = r;
    const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Ones(3));
    const EigenBoundReport rep = eigen_bounds(data);

    // H = 2 I + b (J - I), smallest eigenvalue 2 - b
    const double b = (M_PI - std::acos(0.25)) / (2.0 * M_PI);
    CHECK(rep.exact_lambda_min == doctest::Approx(2.0 - b).epsilon(1e-10));
    CHECK(rep.cos_theta_min == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rep.lower_bound <= rep.exact_lambda_min + 1e-9);
    CHECK(rep.exact_lambda_min <= rep.upper_bound + 1e-9);
    CHECK(rep.sandwich_ok);
}

TEST_CASE("lower bound vanishes as the closest pair closes up") {
    const int d = 2;
    double prev = std::numeric_limits<double>::infinity();
    for (double angle : {0.8, 0.4, 0.2, 0.1, 0.05, 0.02}) {
        Eigen::MatrixXd X(2, d);
        const double r = std::sqrt(2.0);
        X.row(0) << r, 0.0;
        X.row(1) << r * std::cos(angle), r * std::sin(angle);
        const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Ones(2));
        const EigenBoundReport rep = eigen_bounds(data);
        CHECK(rep.lower_bound < prev);
        prev = rep.lower_bound;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("eigen bounds reject parallel points and off-sphere data") {
    LabeledDataset data;  // built by hand to bypass the dataset validator
    data.inputs.resize(2, 2);
    data.inputs << 1.0, 1.0, 1.0, 1.0;
    data.labels.resize(2);
    data.labels << 1.0, 2.0;
    data.input_radius = std::sqrt(2.0);
    data.label_bound = 2.0;
    data.augmented.resize(2, 3);
    data.augmented << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_WITH_AS(eigen_bounds(data), doctest::Contains("parallel"),
                         std::invalid_argument);

    Rng rng(17);
    const Eigen::MatrixXd Xu = sphere_points(rng, 4, 3, 1.0);  // unit, not sqrt(3)
    const LabeledDataset unit_data = make_dataset(Xu, Eigen::VectorXd::Ones(4));
    CHECK_THROWS_AS(eigen_bounds(unit_data), std::invalid_argument);
}

TEST_CASE("eigen bounds sandwich on synthetic sqrt(d)-sphere datasets") {
    for (int seed = 0; seed < 5; ++seed) {
        Rng rng(700 + seed);
        const int d = 5;
        const Eigen::MatrixXd X =
            sphere_points(rng, 40, d, std::sqrt(static_cast<double>(d)));
        const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Ones(40));
        CHECK(eigen_bounds(data).sandwich_ok);
    }
}

TEST_CASE("kernel regression interpolates") {
    Rng rng(19);
    const Eigen::MatrixXd X = sphere_points(rng, 12, 4, 1.0);
    Eigen::VectorXd Y(12);
    for (int i = 0; i < 12; ++i) Y[i] = rng.uniform(-2.0, 2.0);
    const LabeledDataset data = make_dataset(X, Y);
    const KernelRegressor kr(data);
    for (int i = 0; i < 12; ++i)
        CHECK(std::abs(kr.predict(data.inputs.row(i)) - Y[i]) <=
              1e-8 * std::max(1.0, data.label_bound));
}

TEST_CASE("kernel regression with zero labels is zero") {
    Rng rng(23);
    const Eigen::MatrixXd X = sphere_points(rng, 6, 3, 1.0);
    const LabeledDataset data = make_dataset(X, Eigen::VectorXd::Zero(6));
    const KernelRegressor kr(data);
    for (int trial = 0; trial < 8; ++trial) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x[j] = rng.normal();
        CHECK(kr.predict(unit(x)) == 0.0);
    }
}

TEST_CASE("two-point kernel regression against the adjugate inverse") {
    Rng rng(29);
    const Eigen::MatrixXd X = sphere_points(rng, 2, 3, 1.0);
    Eigen::VectorXd Y(2);
    Y << 0.7, -1.3;
    const LabeledDataset data = make_dataset(X, Y);

    const Eigen::MatrixXd H = gram_H(data);
    const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    Eigen::Matrix2d Hinv;
    Hinv << H(1, 1), -H(0, 1), -H(1, 0), H(0, 0);
    Hinv /= det;
    const Eigen::Vector2d alpha = Hinv * Y;

    for (int trial = 0; trial < 8; ++trial) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x[j] = rng.normal();
        x = unit(x);
        Eigen::VectorXd xa(4);
        xa << x, 1.0;
        const double oracle = alpha[0] * ntk(xa, data.augmented.row(0)) +
                              alpha[1] * ntk(xa, data.augmented.row(1));
        CHECK(kernel_regression(data, x) ==
              doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("gram_H is positive definite across random on-sphere datasets") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng.raw() % 9);
        const int n = 5 + static_cast<int>(rng.raw() % 30);
        const Eigen::MatrixXd X = sphere_points(rng, n, d, 1.0);
        LabeledDataset data;
        try {
            data = make_dataset(X, Eigen::VectorXd::Zero(n));
        } catch (const std::invalid_argument&) {
            continue;  // near-parallel draw, screened by the validator
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_H(data),
                                                          Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}
