#include "ntklab/network.hpp"

#include <cmath>
#include <stdexcept>

#include "ntklab/rng.hpp"

namespace ntklab {

namespace {

void check_dim(const NetworkParams& params, const Eigen::VectorXd& xa,
               const char* where) {
    if (xa.size() != params.weights.cols())
        throw std::invalid_argument(std::string(where) +
                                    ": input dimension does not match d+1");
}

}  // namespace

NetworkParams initialize(Eigen::Index m, Eigen::Index d, double kappa,
                         std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("initialize: width m must be >= 1");
    if (d < 1) throw std::invalid_argument("initialize: input dim d must be >= 1");
    if (!(kappa > 0.0))
        throw std::invalid_argument("initialize: init scale kappa must be positive");

    Rng rng(seed);
    NetworkParams params;
    params.init_scale = kappa;
    params.init_weights.resize(m, d + 1);
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index j = 0; j <= d; ++j)
            params.init_weights(k, j) = kappa * rng.normal();
    params.signs.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) params.signs[k] = rng.sign();
    params.weights = params.init_weights;
    return params;
}

double forward(const NetworkParams& params, const Eigen::VectorXd& xa) {
    check_dim(params, xa, "forward");
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.width()));
    return scale * params.signs.dot((params.weights * xa).cwiseMax(0.0));
}

Eigen::VectorXd forward_batch(const NetworkParams& params,
                              const Eigen::MatrixXd& Xa) {
    if (Xa.cols() != params.weights.cols())
        throw std::invalid_argument("forward_batch: input dimension does not match d+1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.width()));
    // (n x (d+1)) * ((d+1) x m) -> relu -> weighted by signs
    return scale * ((Xa * params.weights.transpose()).cwiseMax(0.0) * params.signs);
}

Eigen::VectorXd gradient_features(const NetworkParams& params,
                                  const Eigen::VectorXd& xa, bool at_init) {
    check_dim(params, xa, "gradient_features");
    const WeightMatrix& w = at_init ? params.init_weights : params.weights;
    const Eigen::Index m = params.width();
    const Eigen::Index cols = params.weights.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    const Eigen::VectorXd pre = w * xa;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m * cols);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (pre[k] >= 0.0)
            out.segment(k * cols, cols) = (params.signs[k] * scale) * xa;
    }
    return out;
}

double linearized_forward(const NetworkParams& params,
                          const Eigen::VectorXd& w_query,
                          const Eigen::VectorXd& xa) {
    check_dim(params, xa, "linearized_forward");
    if (w_query.size() != params.weight_count())
        throw std::invalid_argument("linearized_forward: w_query has wrong length");

    const Eigen::Index m = params.width();
    const Eigen::Index cols = params.weights.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const Eigen::VectorXd pre0 = params.init_weights * xa;

    double acc = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (pre0[k] >= 0.0)
            acc += params.signs[k] * w_query.segment(k * cols, cols).dot(xa);
    }
    return scale * acc;
}

Eigen::Index sign_flip_count(const NetworkParams& params,
                             const Eigen::VectorXd& xa) {
    check_dim(params, xa, "sign_flip_count");
    const Eigen::VectorXd pre0 = params.init_weights * xa;
    const Eigen::VectorXd pre = params.weights * xa;
    Eigen::Index flips = 0;
    for (Eigen::Index k = 0; k < params.width(); ++k)
        flips += (pre0[k] >= 0.0) != (pre[k] >= 0.0);
    return flips;
}

}  // namespace ntklab
