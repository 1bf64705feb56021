#pragma once

#include "hoi/dataset/dataset.hpp"
#include "hoi/mpm/network.hpp"

#include <cstdint>
#include <vector>

namespace hoi::mpm {

enum class Optimizer { GradientDescent, Adam };

struct TrainingConfig {
    int epochs = 100;
    double learning_rate = 2.5e-4;
    int batch_size = 512;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    int hidden = 64;
    int layers = 2;
    /// Fit a per-feature standardization on the training windows.
    bool standardize = true;

    /// Throws std::invalid_argument on epochs < 1, batch_size < 1 or
    /// learning_rate < 0.
    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_loss = 0.0;
    double validation_accuracy = 0.0;
};

struct TrainingResult {
    MpmNetwork network;
    std::vector<EpochStats> trace;

    double final_validation_accuracy() const { return trace.empty() ? 0.0 : trace.back().validation_accuracy; }
};

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    Eigen::MatrixXi confusion; ///< rows: true class, columns: predicted
};

/// Loss, accuracy and confusion matrix over a dataset, in fixed order.
Evaluation evaluate(const MpmNetwork& network, const dataset::LabeledDataset& data, int batch_size = 512);

/// Per-feature mean and inverse standard deviation over every frame of every window.
void fit_standardization(MpmNetwork& network, const dataset::LabeledDataset& data);

/// Mini-batch training with a seeded shuffle schedule. Loss and accuracy in
/// the trace are measured after each epoch over the full sets.
TrainingResult train_mpm(const dataset::LabeledDataset& train, const dataset::LabeledDataset& validation,
                         const TrainingConfig& config);

/// Adam state for a flat parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8);
    void step(VectorXd& params, const VectorXd& grad);

private:
    double lr_, beta1_, beta2_, eps_;
    VectorXd m_, v_;
    long t_ = 0;
};

} // namespace hoi::mpm
