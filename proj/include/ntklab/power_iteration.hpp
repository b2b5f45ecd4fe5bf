#pragma once

#include <cmath>

#include <Eigen/Core>

namespace ntklab {

// Spectral norm of a symmetric matrix by plain power iteration with a fixed
// deterministic start vector.
inline double spectral_norm_sym(const Eigen::MatrixXd& A, int iters = 100) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i + 1));
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd w = A * v;
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        v = w / nrm;
        lambda = nrm;
    }
    return lambda;
}

}  // namespace ntklab
