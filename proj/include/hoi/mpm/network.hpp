#pragma once

#include "hoi/posekit/window.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hoi::mpm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct NetworkShape {
    int input = posekit::kFeatureCount;
    int hidden = 64;
    int layers = 2;
    int classes = 4;

    bool operator==(const NetworkShape&) const = default;
};

enum class Direction : int { Forward = 0, Backward = 1 };

class ShapeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Offsets of every parameter block inside the flat parameter vector.
///
/// Order: for each layer, for forward then backward direction: input
/// weights (4H x I_l), recurrent weights (4H x H), bias (4H); gate rows are
/// stacked input, forget, cell, output. Then the head weights (K x 2H) and
/// head bias (K). Matrices are stored column-major.
class ParameterLayout {
public:
    explicit ParameterLayout(const NetworkShape& shape);

    struct Block {
        Eigen::Index offset = 0;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        Eigen::Index size() const { return rows * cols; }
    };

    const NetworkShape& shape() const { return shape_; }
    Eigen::Index size() const { return size_; }
    int layer_input(int layer) const { return layer == 0 ? shape_.input : 2 * shape_.hidden; }

    Block input_weights(int layer, Direction d) const { return blocks_[index(layer, d) + 0]; }
    Block recurrent_weights(int layer, Direction d) const { return blocks_[index(layer, d) + 1]; }
    Block bias(int layer, Direction d) const { return blocks_[index(layer, d) + 2]; }
    Block head_weights() const { return blocks_[blocks_.size() - 2]; }
    Block head_bias() const { return blocks_.back(); }

private:
    std::size_t index(int layer, Direction d) const
    {
        return static_cast<std::size_t>(3 * (2 * layer + static_cast<int>(d)));
    }

    NetworkShape shape_;
    std::vector<Block> blocks_;
    Eigen::Index size_ = 0;
};

/// A batch of equal-length sequences stored time-major: steps[t] is
/// (input x batch).
struct SequenceBatch {
    std::vector<MatrixXd> steps;

    Eigen::Index batch() const { return steps.empty() ? 0 : steps.front().cols(); }
    Eigen::Index length() const { return static_cast<Eigen::Index>(steps.size()); }
};

/// Stacked bidirectional LSTM with a dense softmax head.
///
/// The head reads the last forward hidden state and the first-step backward
/// hidden state of the top layer. Inputs pass through a fixed per-feature
/// affine standardization (identity unless fitted) before the first layer.
class MpmNetwork {
public:
    MpmNetwork() : MpmNetwork(NetworkShape{}) {}
    explicit MpmNetwork(const NetworkShape& shape);

    /// Uniform +-1/sqrt(fan-in) weights, zero biases, forget-gate bias +1.
    static MpmNetwork initialized(const NetworkShape& shape, std::uint64_t seed);

    const NetworkShape& shape() const { return layout_.shape(); }
    const ParameterLayout& layout() const { return layout_; }

    VectorXd& parameters() { return params_; }
    const VectorXd& parameters() const { return params_; }

    VectorXd& input_mean() { return input_mean_; }
    const VectorXd& input_mean() const { return input_mean_; }
    VectorXd& input_scale() { return input_scale_; }
    const VectorXd& input_scale() const { return input_scale_; }

    Eigen::Map<MatrixXd> block(const ParameterLayout::Block& b)
    {
        return {params_.data() + b.offset, b.rows, b.cols};
    }
    Eigen::Map<const MatrixXd> block(const ParameterLayout::Block& b) const
    {
        return {params_.data() + b.offset, b.rows, b.cols};
    }

    /// Class logits (classes x batch).
    MatrixXd logits(const SequenceBatch& batch) const;
    /// Softmax probabilities (classes x batch).
    MatrixXd probabilities(const SequenceBatch& batch) const;

private:
    ParameterLayout layout_;
    VectorXd params_;
    VectorXd input_mean_;
    VectorXd input_scale_;
};

/// Column-wise softmax, max-shifted.
MatrixXd softmax(const MatrixXd& logits);

/// Pack windows into a time-major batch.
SequenceBatch to_batch(const std::vector<const posekit::FeatureWindow*>& windows);
SequenceBatch to_batch(const posekit::FeatureWindow& window);

/// Probability distribution over the classes for one window.
VectorXd classify(const MpmNetwork& network, const posekit::FeatureWindow& window);

/// Index of the largest probability (the decision a_t).
int decide(const VectorXd& probabilities);

struct LossAndGradient {
    double loss = 0.0;   ///< batch-mean cross-entropy
    VectorXd gradient;   ///< same layout as the parameters
};

/// Backpropagation through time for the batch-mean cross-entropy.
LossAndGradient gradient(const MpmNetwork& network, const SequenceBatch& batch,
                         const std::vector<int>& labels);

/// Batch-mean cross-entropy without the gradient (used by finite differences).
double batch_loss(const MpmNetwork& network, const SequenceBatch& batch, const std::vector<int>& labels);

} // namespace hoi::mpm
