#pragma once

#include <Eigen/Core>

namespace ntklab {

// Training set with the augmented coordinate baked in. Rows of `inputs` all
// share the same norm `input_radius`; `augmented` appends a constant 1 so a
// network bias can live inside the weight vector.
struct LabeledDataset {
    Eigen::MatrixXd inputs;     // n x d
    Eigen::MatrixXd augmented;  // n x (d+1), row i = [x_i, 1]
    Eigen::VectorXd labels;     // n
    double input_radius = 1.0;
    double label_bound = 0.0;  // C_y, max |y_i| recorded at construction

    Eigen::Index n() const { return inputs.rows(); }
    Eigen::Index dim() const { return inputs.cols(); }
};

// Builds the augmented matrix, records C_y, and enforces the dataset
// invariants: common input norm, no (anti)parallel pairs.
// Throws std::invalid_argument on violation.
LabeledDataset make_dataset(const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& labels);

// Re-checks the invariants of an existing dataset.
void validate_dataset(const LabeledDataset& data);

}  // namespace ntklab
