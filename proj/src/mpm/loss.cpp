#include "hoi/mpm/loss.hpp"

#include <algorithm>
#include <cmath>

namespace hoi::mpm {

double cross_entropy(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& labels)
{
    if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols())
        throw std::invalid_argument("prediction and label shapes differ");

    double loss = 0.0;
    for (Eigen::Index t = 0; t < labels.cols(); ++t) {
        int hot = -1;
        for (Eigen::Index k = 0; k < labels.rows(); ++k) {
            const double v = labels(k, t);
            if (v == 1.0) {
                if (hot >= 0)
                    throw InvalidLabel("label column has more than one hot entry");
                hot = static_cast<int>(k);
            } else if (v != 0.0) {
                throw InvalidLabel("label entries must be 0 or 1");
            }
        }
        if (hot < 0)
            throw InvalidLabel("label column has no hot entry");
        loss -= std::log(std::max(predictions(hot, t), kLogFloor));
    }
    return loss;
}

Eigen::VectorXd one_hot(int label, int classes)
{
    if (label < 0 || label >= classes)
        throw InvalidLabel("label outside class range");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(classes);
    v(label) = 1.0;
    return v;
}

} // namespace hoi::mpm
