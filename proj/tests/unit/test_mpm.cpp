#include "hoi/dataset/dataset_io.hpp"
#include "hoi/mpm/checkpoint.hpp"
#include "hoi/mpm/gate.hpp"
#include "hoi/mpm/loss.hpp"
#include "hoi/mpm/network.hpp"
#include "hoi/mpm/training.hpp"

#include "../support/gradient_oracle.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hoi;
using namespace hoi::mpm;
using Catch::Approx;

namespace {

posekit::FeatureWindow random_window(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.3, 0.7);
    posekit::FeatureWindow w;
    w.frames = posekit::WindowMatrix::NullaryExpr([&] { return u(rng); });
    for (int t = 0; t < 10; ++t)
        w.timestamps[std::size_t(t)] = t / 30.0;
    return w;
}

void randomize(MpmNetwork& net, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i)
        net.parameters()(i) = u(rng);
}

dataset::LabeledDataset small_dataset(std::uint64_t seed, std::size_t per_class)
{
    const auto d = dataset::generate_dataset(seed, 300, 0.001, 10, per_class);
    return dataset::build_dataset(d.trajectories, 10, per_class);
}

} // namespace

TEST_CASE("zero network predicts the uniform distribution", "[mpm][classify]")
{
    MpmNetwork net;
    std::mt19937_64 rng(1);
    const auto p = classify(net, random_window(rng));
    REQUIRE(p.size() == 4);
    for (int k = 0; k < 4; ++k)
        REQUIRE(p(k) == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("classify returns a distribution for any finite input", "[mpm][classify][property]")
{
    std::mt19937_64 rng(2);
    NetworkShape small;
    small.hidden = 8;
    MpmNetwork net(small);
    for (int trial = 0; trial < 40; ++trial) {
        randomize(net, rng, 0.1 + trial * 0.1);
        const auto p = classify(net, random_window(rng));
        REQUIRE(std::abs(p.sum() - 1.0) < 1e-9);
        REQUIRE((p.array() > 0.0).all());
        REQUIRE((p.array() < 1.0).all());
    }
}

TEST_CASE("classify rejects shape mismatches", "[mpm][classify]")
{
    NetworkShape shape;
    shape.input = 5;
    MpmNetwork net(shape);
    posekit::FeatureWindow w;
    REQUIRE_THROWS_AS(classify(net, w), ShapeMismatch);
    SequenceBatch wrong;
    wrong.steps.push_back(Eigen::MatrixXd::Zero(4, 1));
    REQUIRE_THROWS_AS(net.logits(wrong), ShapeMismatch);
}

TEST_CASE("cross-entropy values", "[mpm][loss]")
{
    Eigen::MatrixXd perfect(4, 1);
    perfect << 1, 0, 0, 0;
    REQUIRE(cross_entropy(perfect, perfect) == 0.0);

    const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(4, 1, 0.25);
    REQUIRE(cross_entropy(uniform, one_hot(2, 4)) == Approx(1.386294361).epsilon(1e-9));

    Eigen::MatrixXd labels2(4, 2);
    labels2 << 1, 0, 0, 0, 0, 1, 0, 0;
    REQUIRE(cross_entropy(Eigen::MatrixXd::Constant(4, 2, 0.25), labels2) == Approx(2.772588722).epsilon(1e-9));

    // Zero probability on the true class is clamped, not infinite.
    Eigen::MatrixXd wrong(4, 1);
    wrong << 0, 1, 0, 0;
    REQUIRE(cross_entropy(wrong, one_hot(0, 4)) == Approx(-std::log(kLogFloor)));

    Eigen::MatrixXd not_hot = Eigen::MatrixXd::Constant(4, 1, 0.5);
    REQUIRE_THROWS_AS(cross_entropy(uniform, not_hot), InvalidLabel);
    REQUIRE_THROWS_AS(cross_entropy(uniform, Eigen::MatrixXd::Zero(4, 1)), InvalidLabel);
}

TEST_CASE("analytic gradient matches central differences", "[mpm][gradient]")
{
    for (std::uint64_t seed = 100; seed < 106; ++seed) {
        const auto p = testing::random_problem(seed);
        const auto check = testing::check_gradient(p.network, p.batch, p.labels);
        INFO("seed " << seed << " worst parameter " << check.worst_index);
        REQUIRE(check.max_relative_error < 1e-4);
    }

    // Hidden size 3, two classes, a single sample.
    NetworkShape tiny;
    tiny.input = 4;
    tiny.hidden = 3;
    tiny.classes = 2;
    MpmNetwork net(tiny);
    std::mt19937_64 rng(9);
    randomize(net, rng, 0.5);
    SequenceBatch batch;
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 5; ++t)
        batch.steps.push_back(Eigen::MatrixXd::NullaryExpr(4, 1, [&] { return n(rng); }));
    REQUIRE(testing::check_gradient(net, batch, {1}).max_relative_error < 1e-4);
}

TEST_CASE("head bias gradient of the zero network is mean prediction minus mean label", "[mpm][gradient]")
{
    MpmNetwork net;
    std::mt19937_64 rng(4);
    std::vector<posekit::FeatureWindow> windows;
    for (int i = 0; i < 6; ++i)
        windows.push_back(random_window(rng));
    std::vector<const posekit::FeatureWindow*> ptrs;
    for (const auto& w : windows)
        ptrs.push_back(&w);
    const auto batch = to_batch(ptrs);

    // Unbalanced: labels 0,0,0,1,2,3 -> mean one-hot (1/2, 1/6, 1/6, 1/6).
    const auto g = gradient(net, batch, {0, 0, 0, 1, 2, 3}).gradient;
    const auto hb = net.layout().head_bias();
    REQUIRE(g(hb.offset + 0) == Approx(0.25 - 0.5).margin(1e-15));
    for (int k = 1; k < 4; ++k)
        REQUIRE(g(hb.offset + k) == Approx(0.25 - 1.0 / 6.0).margin(1e-15));

    // Balanced batch: the head bias gradient vanishes.
    std::vector<const posekit::FeatureWindow*> four(ptrs.begin(), ptrs.begin() + 4);
    const auto gb = gradient(net, to_batch(four), {0, 1, 2, 3}).gradient;
    for (int k = 0; k < 4; ++k)
        REQUIRE(std::abs(gb(hb.offset + k)) < 1e-15);
    // Hidden states are exactly zero, so the head weight gradient is zero too.
    const auto hw = net.layout().head_weights();
    REQUIRE(g.segment(hw.offset, hw.size()).isZero());
}

TEST_CASE("duplicated batch has the single-sample gradient", "[mpm][gradient]")
{
    NetworkShape shape;
    shape.hidden = 6;
    MpmNetwork net(shape);
    std::mt19937_64 rng(8);
    randomize(net, rng, 0.3);
    const auto w = random_window(rng);
    const auto single = gradient(net, to_batch(w), {2});
    const auto triple = gradient(net, to_batch({&w, &w, &w}), {2, 2, 2});
    REQUIRE(triple.loss == Approx(single.loss).epsilon(1e-14));
    REQUIRE((triple.gradient - single.gradient).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("reversing time and swapping directions preserves the logits", "[mpm][property]")
{
    std::mt19937_64 rng(12);
    NetworkShape shape;
    shape.input = 5;
    shape.hidden = 4;
    shape.classes = 3;
    for (int trial = 0; trial < 10; ++trial) {
        MpmNetwork net(shape);
        randomize(net, rng, 0.7);
        SequenceBatch batch;
        std::normal_distribution<double> n(0, 1);
        for (int t = 0; t < 7; ++t)
            batch.steps.push_back(Eigen::MatrixXd::NullaryExpr(5, 2, [&] { return n(rng); }));

        MpmNetwork mirrored = net;
        const auto& L = net.layout();
        const Eigen::Index H = shape.hidden;
        for (int l = 0; l < shape.layers; ++l) {
            using D = Direction;
            mirrored.block(L.input_weights(l, D::Forward)) = net.block(L.input_weights(l, D::Backward));
            mirrored.block(L.input_weights(l, D::Backward)) = net.block(L.input_weights(l, D::Forward));
            mirrored.block(L.recurrent_weights(l, D::Forward)) = net.block(L.recurrent_weights(l, D::Backward));
            mirrored.block(L.recurrent_weights(l, D::Backward)) = net.block(L.recurrent_weights(l, D::Forward));
            mirrored.block(L.bias(l, D::Forward)) = net.block(L.bias(l, D::Backward));
            mirrored.block(L.bias(l, D::Backward)) = net.block(L.bias(l, D::Forward));
            if (l > 0) {
                // Upper layers read [forward; backward] of the layer below.
                for (auto d : {D::Forward, D::Backward}) {
                    auto w = mirrored.block(L.input_weights(l, d));
                    const Eigen::MatrixXd left = w.leftCols(H);
                    w.leftCols(H) = w.rightCols(H);
                    w.rightCols(H) = left;
                }
            }
        }
        auto head = mirrored.block(L.head_weights());
        const Eigen::MatrixXd left = head.leftCols(H);
        head.leftCols(H) = head.rightCols(H);
        head.rightCols(H) = left;

        SequenceBatch reversed;
        reversed.steps.assign(batch.steps.rbegin(), batch.steps.rend());
        REQUIRE((net.logits(batch) - mirrored.logits(reversed)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("gate confirms only a full, uniform queue", "[mpm][gate]")
{
    StabilityGate gate(10);
    for (int i = 0; i < 9; ++i)
        REQUIRE_FALSE(gate.push(1));
    REQUIRE(gate.push(1) == 1);

    StabilityGate mixed(10);
    for (int i = 0; i < 9; ++i)
        mixed.push(1);
    REQUIRE_FALSE(mixed.push(2));

    StabilityGate partial(10);
    for (int i = 0; i < 3; ++i)
        REQUIRE_FALSE(partial.push(0));
    REQUIRE(partial.size() == 3);
}

TEST_CASE("gate brute force over all short sequences", "[mpm][gate][property]")
{
    constexpr int N = 4, K = 3, maxlen = 8;
    long checked = 0;
    for (int len = 1; len <= maxlen; ++len) {
        long total = 1;
        for (int i = 0; i < len; ++i)
            total *= K;
        for (long code = 0; code < total; ++code) {
            std::vector<int> seq;
            long c = code;
            for (int i = 0; i < len; ++i, c /= K)
                seq.push_back(int(c % K));
            StabilityGate gate(N);
            for (int i = 0; i < len; ++i) {
                const auto out = gate.push(seq[std::size_t(i)]);
                bool expect = i + 1 >= N;
                for (int k = 1; expect && k < N; ++k)
                    expect = seq[std::size_t(i - k)] == seq[std::size_t(i)];
                REQUIRE(out.has_value() == expect);
                if (out)
                    REQUIRE(*out == seq[std::size_t(i)]);
                ++checked;
            }
        }
    }
    REQUIRE(checked > 0);
}

TEST_CASE("training config invariants", "[mpm][training]")
{
    TrainingConfig c;
    REQUIRE_NOTHROW(c.validate());
    c.epochs = 0;
    REQUIRE_THROWS(c.validate());
    c = {};
    c.batch_size = 0;
    REQUIRE_THROWS(c.validate());
    c = {};
    c.learning_rate = -1;
    REQUIRE_THROWS(c.validate());
    REQUIRE_THROWS(train_mpm({}, {}, TrainingConfig{}));
}

TEST_CASE("zero learning rate leaves parameters and loss unchanged", "[mpm][training]")
{
    const auto data = small_dataset(3, 8);
    const auto [train, val] = dataset::stratified_split(data, 0.75, 0);
    TrainingConfig c;
    c.epochs = 3;
    c.learning_rate = 0.0;
    c.hidden = 8;
    c.batch_size = 7;
    const auto result = train_mpm(train, val, c);
    NetworkShape shape;
    shape.hidden = 8;
    REQUIRE(result.network.parameters() == MpmNetwork::initialized(shape, c.seed).parameters());
    for (const auto& e : result.trace)
        REQUIRE(e.train_loss == result.trace.front().train_loss);
}

TEST_CASE("training is deterministic and reduces the loss", "[mpm][training]")
{
    const auto data = small_dataset(4, 20);
    const auto [train, val] = dataset::stratified_split(data, 0.8, 0);
    TrainingConfig c;
    c.epochs = 15;
    c.hidden = 12;
    c.batch_size = 16;
    c.learning_rate = 5e-3;
    const auto a = train_mpm(train, val, c);
    const auto b = train_mpm(train, val, c);
    REQUIRE(serialize(a.network) == serialize(b.network));
    REQUIRE(a.trace.back().train_loss < a.trace.front().train_loss);

    c.optimizer = Optimizer::GradientDescent;
    c.learning_rate = 0.05;
    const auto sgd = train_mpm(train, val, c);
    REQUIRE(sgd.trace.back().train_loss < sgd.trace.front().train_loss);
}

TEST_CASE("checkpoint round-trip and corruption", "[mpm][checkpoint]")
{
    NetworkShape shape;
    shape.hidden = 5;
    auto net = MpmNetwork::initialized(shape, 3);
    net.input_mean().setConstant(0.25);
    net.input_scale().setConstant(4.0);
    const auto bytes = serialize(net);
    REQUIRE(bytes.size() == 28 + 8 * (2 * 63 + std::size_t(net.parameters().size())));
    REQUIRE(bytes[0] == 'H');
    const auto back = deserialize(bytes);
    REQUIRE(back.shape() == net.shape());
    REQUIRE(back.parameters() == net.parameters());
    REQUIRE(back.input_scale() == net.input_scale());
    REQUIRE(serialize(back) == bytes);

    auto bad = bytes;
    bad[0] = 'X';
    REQUIRE_THROWS_AS(deserialize(bad), CheckpointError);
    bad = bytes;
    bad.pop_back();
    REQUIRE_THROWS_AS(deserialize(bad), CheckpointError);
    bad = bytes;
    bad[4] = 9;
    REQUIRE_THROWS_AS(deserialize(bad), CheckpointError);
}
