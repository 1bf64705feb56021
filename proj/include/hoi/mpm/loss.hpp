#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace hoi::mpm {

/// Probabilities below this are clamped before taking the log.
inline constexpr double kLogFloor = 1e-12;

class InvalidLabel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cross-entropy summed over time steps: -sum_t sum_k label[k,t] log(pred[k,t]).
/// Both arguments are (classes x steps); every label column must be one-hot.
double cross_entropy(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels);

/// One-hot column for class `label` out of `classes`.
Eigen::VectorXd one_hot(int label, int classes);

} // namespace hoi::mpm
