#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace ntklab {

// Row-major so that .data() is the flattened weight vector in unit-major,
// coordinate-minor order. That layout is relied on by the projection algebra
// in linearized.hpp.
using WeightMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shallow ReLU network f(x,w) = sum_k a_k/sqrt(m) * relu(w_k . xa), with the
// bias absorbed into the last coordinate of each w_k. Output signs a_k are
// frozen at +-1; init_weights keeps the w(0) snapshot for the whole run.
struct NetworkParams {
    WeightMatrix weights;       // m x (d+1), current w
    WeightMatrix init_weights;  // m x (d+1), w(0), never mutated
    Eigen::VectorXd signs;      // m entries, exactly +-1
    double init_scale = 1.0;    // kappa

    Eigen::Index width() const { return weights.rows(); }
    Eigen::Index input_dim() const { return weights.cols() - 1; }  // d
    Eigen::Index weight_count() const { return weights.size(); }   // m(d+1)

    Eigen::Map<const Eigen::VectorXd> flat() const {
        return {weights.data(), weights.size()};
    }
    Eigen::Map<const Eigen::VectorXd> flat_init() const {
        return {init_weights.data(), init_weights.size()};
    }
    Eigen::Map<Eigen::VectorXd> flat_mut() {
        return {weights.data(), weights.size()};
    }
};

// w_k(0) ~ N(0, kappa^2 I_{d+1}) (bias coordinate included), a_k uniform +-1.
// Deterministic for a given seed.
NetworkParams initialize(Eigen::Index m, Eigen::Index d, double kappa,
                         std::uint64_t seed);

// f(x,w) for one augmented input.
double forward(const NetworkParams& params, const Eigen::VectorXd& xa);

// f(x_i, w) for every row of Xa (n x (d+1)), as an n-vector.
Eigen::VectorXd forward_batch(const NetworkParams& params,
                              const Eigen::MatrixXd& Xa);

// grad_w f(x, w) as a flat m(d+1)-vector. Block k is
// a_k/sqrt(m) * 1{w_k . xa >= 0} * xa, with w taken at init when at_init.
// The indicator is active at exactly zero.
Eigen::VectorXd gradient_features(const NetworkParams& params,
                                  const Eigen::VectorXd& xa, bool at_init);

// First-order expansion around w(0), evaluated at an arbitrary flat weight
// vector: 1/sqrt(m) sum_k a_k 1{w_k(0) . xa >= 0} (w_query)_k . xa.
double linearized_forward(const NetworkParams& params,
                          const Eigen::VectorXd& w_query,
                          const Eigen::VectorXd& xa);

// Number of units whose activation indicator at xa differs between w(0) and
// the current weights.
Eigen::Index sign_flip_count(const NetworkParams& params,
                             const Eigen::VectorXd& xa);

}  // namespace ntklab
