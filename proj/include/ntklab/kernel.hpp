#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ntklab/dataset.hpp"
#include "ntklab/network.hpp"

namespace ntklab {

// Infinite-width tangent kernel of the shallow ReLU net with bias, in angle
// form: K(x,y) = xa.ya * (pi - angle(xa,ya)) / (2 pi). On the sqrt(d)-sphere
// this reduces to the (d+1)-normalized arc-cosine expression.
double ntk(const Eigen::VectorXd& xa, const Eigen::VectorXd& ya);

// Power-series evaluation of the same kernel:
//   t*rho^2/4 + rho^2 * sum_{p=1}^{p_max} cbar_{2p} t^{2p},
// t = xa.ya/rho^2, rho^2 = |xa||ya|. The cbar coefficients come from the
// ratio recurrence cbar_2 = 1/(2pi), cbar_{2p+2} = cbar_{2p}(2p-1)^2/(2p(2p+1)).
double ntk_series(const Eigen::VectorXd& xa, const Eigen::VectorXd& ya,
                  int p_max);

// Polynomial feature-map coefficients: K restricted to the sqrt(d)-sphere
// equals sum_k coeffs[k] (x.y)^k. tail_bound certifies the truncation of the
// inner p-sums at series_cap.
struct FeatureMapCoefficients {
    int degree_cap = 0;     // K_max
    int series_cap = 0;     // P_max
    Eigen::VectorXd coeffs; // d_0 .. d_{K_max}, all nonnegative
    double tail_bound = 0.0;

    // sum_k d_k s^k for s = x.y
    double reconstruct(double s) const;
};

FeatureMapCoefficients feature_coefficients(int d, int k_max, int p_max);

// The paper's closed form with the fixed (d+1) normalization inside arccos;
// equal to ntk() exactly when both points lie on the sqrt(d)-sphere, and the
// function the feature map reproduces for any x.y = s with |s| <= d.
double ntk_fixed_norm(double s, int d);

// n x n kernel Gram matrix H_ij = ntk(xa_i, xa_j).
Eigen::MatrixXd gram_H(const LabeledDataset& data);

// Finite-width kernel at initialization:
// 1/m sum_k xa.ya 1{w_k(0).xa>=0} 1{w_k(0).ya>=0}.
double empirical_ntk(const NetworkParams& params, const Eigen::VectorXd& xa,
                     const Eigen::VectorXd& ya);

// All pairs at once; equals J0^T J0 restricted to the dataset.
Eigen::MatrixXd empirical_ntk_gram(const NetworkParams& params,
                                   const LabeledDataset& data);

struct EigenBoundReport {
    double cos_theta_min = 0.0;  // max_{i!=j} xa_i.xa_j / (d+1)
    double theta_min = 0.0;      // arccos of the above
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double exact_lambda_min = 0.0;
    bool sandwich_ok = false;
    bool theta_exceeds_one = false;  // the paper's simplified regime needs theta_min < 1
};

// Smallest-eigenvalue bounds for H on sqrt(d)-sphere data:
//   lower = (d+1)/(8 pi) sqrt(log(1/ct) / log(2n/ct)),   ct = cos(theta_min)
//   upper = (d+1)/2 * (1 - (1 - theta_min/pi) ct)
// plus the exact value from a dense symmetric eigensolve.
EigenBoundReport eigen_bounds(const LabeledDataset& data);

// Interpolating kernel regression f(x) = h(x)^T H^{-1} Y, factored once.
class KernelRegressor {
public:
    explicit KernelRegressor(const LabeledDataset& data);
    // query with a raw d-dimensional point (augmented internally)
    double predict(const Eigen::VectorXd& x) const;
    double predict_augmented(const Eigen::VectorXd& xa) const;
    const Eigen::VectorXd& dual() const { return alpha_; }

private:
    Eigen::MatrixXd x_aug_;
    Eigen::VectorXd alpha_;  // H^{-1} Y
};

// One-shot form of the above.
double kernel_regression(const LabeledDataset& data, const Eigen::VectorXd& x);

}  // namespace ntklab
