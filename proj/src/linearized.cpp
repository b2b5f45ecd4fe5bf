#include "ntklab/linearized.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ntklab/errors.hpp"

namespace ntklab {

Eigen::VectorXd GradientFeatures::column(Eigen::Index i) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m * cols);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (mask(k, i) != 0.0)
            out.segment(k * cols, cols) = signs_scaled[k] * x_aug.row(i).transpose();
    }
    return out;
}

Eigen::VectorXd GradientFeatures::apply_jacobian(const Eigen::VectorXd& coef) const {
    // block k of the result: a_k/sqrt(m) * sum_i mask_ki coef_i xa_i
    WeightMatrix delta =
        signs_scaled.asDiagonal() * (mask * coef.asDiagonal()) * x_aug;
    return Eigen::Map<const Eigen::VectorXd>(delta.data(), delta.size());
}

Eigen::VectorXd GradientFeatures::apply_jacobian_transpose(
    const Eigen::VectorXd& v) const {
    Eigen::Map<const WeightMatrix> vm(v.data(), m, cols);
    const Eigen::MatrixXd pre = vm * x_aug.transpose();  // m x n
    return mask.cwiseProduct(pre).transpose() * signs_scaled;
}

Eigen::VectorXd GradientFeatures::solve_gram(const Eigen::VectorXd& rhs) const {
    return gram_llt.solve(rhs);
}

GradientFeatures build_features(const NetworkParams& params,
                                const LabeledDataset& data) {
    if (data.dim() != params.input_dim())
        throw std::invalid_argument("build_features: dataset/network dimension mismatch");

    GradientFeatures feat;
    feat.m = params.width();
    feat.cols = params.weights.cols();
    feat.x_aug = data.augmented;
    feat.signs_scaled =
        params.signs / std::sqrt(static_cast<double>(params.width()));

    const Eigen::MatrixXd pre0 =
        params.init_weights * data.augmented.transpose();  // m x n
    feat.mask = (pre0.array() >= 0.0).cast<double>();
    feat.gram = (data.augmented * data.augmented.transpose())
                    .cwiseProduct(feat.mask.transpose() * feat.mask) /
                static_cast<double>(params.width());
    feat.f0 = pre0.cwiseMax(0.0).transpose() * feat.signs_scaled;

    const double base = feat.gram.trace() / static_cast<double>(data.n());
    const double levels[] = {0.0, 1e-12, 1e-10, 1e-8};
    for (double lvl : levels) {
        Eigen::MatrixXd shifted = feat.gram;
        shifted.diagonal().array() += lvl * base;
        feat.gram_llt.compute(shifted);
        if (feat.gram_llt.info() == Eigen::Success) {
            feat.jitter = lvl * base;
            return feat;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(feat.gram,
                                                      Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "degenerate Gram: factorization failed after jitter escalation, "
        << "smallest eigenvalue " << es.eigenvalues().minCoeff();
    throw degenerate_gram_error(msg.str());
}

MinNormSolution min_norm_solution(const GradientFeatures& feat,
                                  const NetworkParams& params,
                                  const Eigen::VectorXd& Y) {
    if (Y.size() != feat.gram.rows())
        throw std::invalid_argument("min_norm_solution: label length mismatch");
    MinNormSolution sol;
    sol.dual = feat.solve_gram(Y - feat.f0);
    sol.w_star = params.flat_init() + feat.apply_jacobian(sol.dual);
    return sol;
}

Eigen::VectorXd project_parallel(const GradientFeatures& feat,
                                 const Eigen::VectorXd& v) {
    if (v.size() != feat.m * feat.cols)
        throw std::invalid_argument("project_parallel: vector has wrong length");
    return feat.apply_jacobian(feat.solve_gram(feat.apply_jacobian_transpose(v)));
}

LyapunovPair lyapunov(const GradientFeatures& feat, const MinNormSolution& sol,
                      const Eigen::VectorXd& w_flat) {
    const Eigen::VectorXd diff = w_flat - sol.w_star;
    LyapunovPair out;
    out.v_par = project_parallel(feat, diff).squaredNorm();
    out.v_perp = std::max(0.0, diff.squaredNorm() - out.v_par);
    return out;
}

}  // namespace ntklab
