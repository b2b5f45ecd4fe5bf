#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ntklab/dataset.hpp"
#include "ntklab/network.hpp"

namespace ntklab {

// Jacobian of the network at initialization, kept in factored form: the
// activation mask plus the data matrix reproduce any column or product
// exactly, so the m(d+1) x n matrix never has to be stored densely.
// gram = J^T J with J the init Jacobian; gram_llt factors gram + jitter*I.
struct GradientFeatures {
    Eigen::MatrixXd mask;          // m x n, 1{w_k(0) . xa_i >= 0}
    Eigen::VectorXd signs_scaled;  // a_k / sqrt(m)
    Eigen::MatrixXd x_aug;         // n x (d+1)
    Eigen::MatrixXd gram;          // n x n
    Eigen::LLT<Eigen::MatrixXd> gram_llt;
    double jitter = 0.0;           // jitter added to make the LLT succeed
    Eigen::VectorXd f0;            // network outputs at w(0)

    Eigen::Index m = 0;     // width
    Eigen::Index cols = 0;  // d+1

    // one explicit weight-space Jacobian column (training point i)
    Eigen::VectorXd column(Eigen::Index i) const;
    // J * coef for an n-vector of dual coefficients
    Eigen::VectorXd apply_jacobian(const Eigen::VectorXd& coef) const;
    // J^T * v for a flat weight-space vector
    Eigen::VectorXd apply_jacobian_transpose(const Eigen::VectorXd& v) const;
    // (gram + jitter I)^{-1} rhs
    Eigen::VectorXd solve_gram(const Eigen::VectorXd& rhs) const;
};

struct MinNormSolution {
    Eigen::VectorXd w_star;  // flat m(d+1)
    Eigen::VectorXd dual;    // G^{-1} (Y - f0)
};

struct LyapunovPair {
    double v_perp = 0.0;
    double v_par = 0.0;
};

// Assembles mask, Gram matrix, f0 and the jittered factorization.
// Jitter escalates through {0, 1e-12, 1e-10, 1e-8} * tr(G)/n; if every level
// fails a degenerate_gram_error names the smallest eigenvalue.
GradientFeatures build_features(const NetworkParams& params,
                                const LabeledDataset& data);

// Closed-form minimizer of ||w - w(0)|| subject to the linearized network
// interpolating Y: w* = w(0) + J G^{-1} (Y - f0).
MinNormSolution min_norm_solution(const GradientFeatures& feat,
                                  const NetworkParams& params,
                                  const Eigen::VectorXd& Y);

// Orthogonal projection onto the column space of the init Jacobian, applied
// matrix-free through the n-dimensional Gram system.
Eigen::VectorXd project_parallel(const GradientFeatures& feat,
                                 const Eigen::VectorXd& v);

// V_perp = ||P0_perp (w - w*)||^2, V_par = ||P0 (w - w*)||^2.
// Cancellation can push V_perp a hair negative; it is clamped at zero.
LyapunovPair lyapunov(const GradientFeatures& feat, const MinNormSolution& sol,
                      const Eigen::VectorXd& w_flat);

}  // namespace ntklab
