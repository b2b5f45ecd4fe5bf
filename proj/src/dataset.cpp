#include "ntklab/dataset.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ntklab {

LabeledDataset make_dataset(const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& labels) {
    if (inputs.rows() == 0 || inputs.cols() == 0)
        throw std::invalid_argument("make_dataset: empty input matrix");
    if (labels.size() != inputs.rows())
        throw std::invalid_argument("make_dataset: label count does not match rows");

    LabeledDataset data;
    data.inputs = inputs;
    data.labels = labels;
    data.input_radius = inputs.row(0).norm();
    data.label_bound = labels.cwiseAbs().maxCoeff();

    data.augmented.resize(inputs.rows(), inputs.cols() + 1);
    data.augmented.leftCols(inputs.cols()) = inputs;
    data.augmented.rightCols<1>().setOnes();

    validate_dataset(data);
    return data;
}

void validate_dataset(const LabeledDataset& data) {
    const Eigen::Index n = data.n();
    const double r = data.input_radius;
    if (!(r > 0.0)) throw std::invalid_argument("dataset: input radius must be positive");

    for (Eigen::Index i = 0; i < n; ++i) {
        const double ni = data.inputs.row(i).norm();
        if (std::abs(ni - r) > 1e-9 * std::max(1.0, r)) {
            std::ostringstream msg;
            msg << "dataset: row " << i << " has norm " << ni
                << ", expected common radius " << r;
            throw std::invalid_argument(msg.str());
        }
        if (std::abs(data.labels[i]) > data.label_bound + 1e-15)
            throw std::invalid_argument("dataset: label exceeds recorded bound");
    }

    // pairwise parallel check: |x_i . x_j| must stay strictly below the norm product
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dot = data.inputs.row(i).dot(data.inputs.row(j));
            const double lim = data.inputs.row(i).norm() * data.inputs.row(j).norm() - 1e-12;
            if (std::abs(dot) >= lim) {
                std::ostringstream msg;
                msg << "dataset: points " << i << " and " << j << " are parallel";
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

}  // namespace ntklab
