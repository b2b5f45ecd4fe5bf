#include "ntklab/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ntklab/errors.hpp"

namespace ntklab {

namespace {

double clamped_arccos_arg(double t) {
    if (t > 1.0) return 1.0;
    if (t < -1.0) return -1.0;
    return t;
}

}  // namespace

double ntk(const Eigen::VectorXd& xa, const Eigen::VectorXd& ya) {
    if (xa.size() != ya.size())
        throw std::invalid_argument("ntk: dimension mismatch");
    const double na = xa.norm();
    const double nb = ya.norm();
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("ntk: zero-norm input");
    // 2 atan2(|u-v|, |u+v|) is the angle between unit vectors without the
    // arccos blowup near +-1; identical inputs give exactly zero
    const Eigen::VectorXd u = xa / na;
    const Eigen::VectorXd v = ya / nb;
    const double theta = 2.0 * std::atan2((u - v).norm(), (u + v).norm());
    return xa.dot(ya) * (M_PI - theta) / (2.0 * M_PI);
}

double ntk_series(const Eigen::VectorXd& xa, const Eigen::VectorXd& ya,
                  int p_max) {
    if (xa.size() != ya.size())
        throw std::invalid_argument("ntk_series: dimension mismatch");
    const double rho2 = xa.norm() * ya.norm();
    if (rho2 == 0.0) throw std::invalid_argument("ntk_series: zero-norm input");
    const double t = clamped_arccos_arg(xa.dot(ya) / rho2);

    double acc = 0.0;
    double cbar = 1.0 / (2.0 * M_PI);  // cbar_2
    const double t2 = t * t;
    double tpow = t2;
    for (int p = 1; p <= p_max; ++p) {
        acc += cbar * tpow;
        cbar *= static_cast<double>((2 * p - 1) * (2 * p - 1)) /
                static_cast<double>(2 * p * (2 * p + 1));
        tpow *= t2;
    }
    return rho2 * (0.25 * t + acc);
}

double ntk_fixed_norm(double s, int d) {
    const double t = clamped_arccos_arg((1.0 + s) / (d + 1.0));
    return (1.0 + s) * (M_PI - std::acos(t)) / (2.0 * M_PI);
}

double FeatureMapCoefficients::reconstruct(double s) const {
    // Horner on d_0 + d_1 s + ... + d_K s^K
    double acc = 0.0;
    for (int k = degree_cap; k >= 0; --k) acc = acc * s + coeffs[k];
    return acc;
}

FeatureMapCoefficients feature_coefficients(int d, int k_max, int p_max) {
    if (d < 1) throw std::invalid_argument("feature_coefficients: d must be >= 1");
    if (k_max < 0) throw std::invalid_argument("feature_coefficients: K_max must be >= 0");
    if (k_max > 2 * p_max)
        throw std::invalid_argument("feature_coefficients: K_max > 2*P_max");

    // log cbar_{2p}; the raw values underflow long before p_max for large p
    Eigen::VectorXd lcb(p_max + 1);
    lcb[0] = 0.0;  // unused
    if (p_max >= 1) lcb[1] = -std::log(2.0 * M_PI);
    for (int p = 1; p < p_max; ++p)
        lcb[p + 1] = lcb[p] + 2.0 * std::log(2.0 * p - 1.0) -
                     std::log(2.0 * p) - std::log(2.0 * p + 1.0);

    const double log_d1 = std::log(d + 1.0);
    auto log_term = [&](int p, int k) {
        // cbar_{2p} * C(2p,k) / (d+1)^{2p-1}
        return lcb[p] + std::lgamma(2.0 * p + 1.0) - std::lgamma(k + 1.0) -
               std::lgamma(2.0 * p - k + 1.0) - (2.0 * p - 1.0) * log_d1;
    };

    FeatureMapCoefficients fc;
    fc.degree_cap = k_max;
    fc.series_cap = p_max;
    fc.coeffs = Eigen::VectorXd::Zero(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
        double acc = (k <= 1) ? 0.25 : 0.0;
        for (int p = std::max(1, (k + 1) / 2); p <= p_max; ++p)
            acc += std::exp(log_term(p, k));
        fc.coeffs[k] = acc;
    }

    // Every dropped term (p beyond P_max inside each d_k, and every d_k with
    // k beyond K_max) is nonnegative, so the missing mass at s=1 bounds the
    // reconstruction error for any |s| <= 1.
    fc.tail_bound =
        std::max(0.0, ntk_fixed_norm(1.0, d) - fc.coeffs.sum()) + 1e-14;
    return fc;
}

Eigen::MatrixXd gram_H(const LabeledDataset& data) {
    const Eigen::Index n = data.n();
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = ntk(data.augmented.row(i), data.augmented.row(j));
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw degenerate_gram_error(
            "degenerate H: kernel Gram matrix is not positive definite "
            "(parallel or near-parallel data points)");
    return H;
}

double empirical_ntk(const NetworkParams& params, const Eigen::VectorXd& xa,
                     const Eigen::VectorXd& ya) {
    if (xa.size() != params.weights.cols() || ya.size() != params.weights.cols())
        throw std::invalid_argument("empirical_ntk: dimension mismatch");
    const Eigen::VectorXd px = params.init_weights * xa;
    const Eigen::VectorXd py = params.init_weights * ya;
    Eigen::Index both = 0;
    for (Eigen::Index k = 0; k < params.width(); ++k)
        both += (px[k] >= 0.0) && (py[k] >= 0.0);
    return xa.dot(ya) * static_cast<double>(both) /
           static_cast<double>(params.width());
}

Eigen::MatrixXd empirical_ntk_gram(const NetworkParams& params,
                                   const LabeledDataset& data) {
    const Eigen::MatrixXd mask =
        ((params.init_weights * data.augmented.transpose()).array() >= 0.0)
            .cast<double>();
    return (data.augmented * data.augmented.transpose())
               .cwiseProduct(mask.transpose() * mask) /
           static_cast<double>(params.width());
}

EigenBoundReport eigen_bounds(const LabeledDataset& data) {
    const Eigen::Index n = data.n();
    const int d = static_cast<int>(data.dim());
    if (n < 2) throw std::invalid_argument("eigen_bounds: need at least 2 points");
    if (std::abs(data.input_radius - std::sqrt(static_cast<double>(d))) >
        1e-9 * std::sqrt(static_cast<double>(d)))
        throw std::invalid_argument(
            "eigen_bounds: bounds assume |x_i| = sqrt(d); rescale the dataset");
    if (n > 2000)
        throw std::invalid_argument("eigen_bounds: dense eigensolve supports n <= 2000");

    double max_dot = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            max_dot = std::max(max_dot,
                               data.augmented.row(i).dot(data.augmented.row(j)));

    EigenBoundReport rep;
    rep.cos_theta_min = max_dot / (d + 1.0);
    if (rep.cos_theta_min >= 1.0)
        throw std::invalid_argument("eigen_bounds: parallel points (cos theta_min >= 1)");
    if (rep.cos_theta_min <= 0.0)
        throw std::domain_error(
            "eigen_bounds: cos theta_min <= 0; the stated bounds only cover "
            "datasets with a positive maximal augmented inner product");
    rep.theta_min = std::acos(rep.cos_theta_min);
    rep.theta_exceeds_one = rep.theta_min >= 1.0;

    const double ct = rep.cos_theta_min;
    rep.lower_bound = (d + 1.0) / (8.0 * M_PI) *
                      std::sqrt(std::log(1.0 / ct) / std::log(2.0 * n / ct));
    rep.upper_bound =
        0.5 * (d + 1.0) * (1.0 - (1.0 - rep.theta_min / M_PI) * ct);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_H(data),
                                                      Eigen::EigenvaluesOnly);
    rep.exact_lambda_min = es.eigenvalues().minCoeff();
    rep.sandwich_ok = rep.lower_bound <= rep.exact_lambda_min + 1e-9 &&
                      rep.exact_lambda_min <= rep.upper_bound + 1e-9;
    return rep;
}

KernelRegressor::KernelRegressor(const LabeledDataset& data)
    : x_aug_(data.augmented) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram_H(data));
    if (llt.info() != Eigen::Success)
        throw degenerate_gram_error("degenerate H: cannot fit kernel regression");
    alpha_ = llt.solve(data.labels);
}

double KernelRegressor::predict(const Eigen::VectorXd& x) const {
    Eigen::VectorXd xa(x.size() + 1);
    xa << x, 1.0;
    return predict_augmented(xa);
}

double KernelRegressor::predict_augmented(const Eigen::VectorXd& xa) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x_aug_.rows(); ++i)
        acc += alpha_[i] * ntk(xa, x_aug_.row(i));
    return acc;
}

double kernel_regression(const LabeledDataset& data, const Eigen::VectorXd& x) {
    return KernelRegressor(data).predict(x);
}

}  // namespace ntklab
