#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/optim.hpp"
#include "prunekit/rng.hpp"
#include "prunekit/train.hpp"

using namespace prunekit;

namespace {

Model single_layer(Tensor w, Tensor b, Activation act) {
    const std::size_t out = w.dim(0), in = w.dim(1);
    Model m;
    m.layers.push_back({{"l0", in, out, act, true}, std::move(w), std::move(b)});
    return m;
}

Tensor row(std::initializer_list<float> v) { return Tensor({1, v.size()}, std::vector<float>(v)); }

}  // namespace

TEST(Rng, SameSeedSameStream) {
    Lcg64 a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
}

TEST(Rng, UniformInRangeAndBelowUnbiasedBounds) {
    Lcg64 r(5);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        ASSERT_LT(r.below(7), 7u);
    }
    EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Tensor, RejectsMismatchedData) {
    EXPECT_THROW(Tensor({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
    EXPECT_THROW(Tensor({0, 2}), ShapeError);
}

TEST(InitModel, BiasesZeroAndDeterministic) {
    const std::vector<LayerSpec> specs{{"a", 4, 3, Activation::identity, true}};
    const Model m1 = init_model(specs, 7);
    const Model m2 = init_model(specs, 7);
    for (float b : m1.layers[0].bias.values()) EXPECT_EQ(b, 0.0f);
    EXPECT_TRUE(m1.bit_equal(m2));
    EXPECT_FALSE(m1.bit_equal(init_model(specs, 8)));
}

TEST(InitModel, GlorotBounds) {
    const Model m = init_model(mlp_specs(16, {64}, 3), 1);
    const double limit = std::sqrt(6.0 / (16 + 64));
    for (float w : m.layers[0].weight.values()) EXPECT_LE(std::fabs(w), limit);
}

TEST(InitModel, DimensionMismatchIsConfigError) {
    const std::vector<LayerSpec> specs{{"a", 4, 3, Activation::relu, true}, {"b", 5, 1, Activation::identity, true}};
    EXPECT_THROW(init_model(specs, 0), ConfigError);
}

TEST(InitModel, RejectsDuplicateNamesAndReluHead) {
    EXPECT_THROW(init_model({{"a", 2, 2, Activation::relu, true}, {"a", 2, 1, Activation::identity, true}}, 0),
                 ConfigError);
    EXPECT_THROW(init_model({{"a", 2, 1, Activation::relu, true}}, 0), ConfigError);
}

TEST(Forward, IdentityLayer) {
    const Model m = single_layer(Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}), Tensor({3}), Activation::identity);
    const Tensor y = forward(m, row({1, 2, 3}));
    EXPECT_EQ(y[0], 1.0f);
    EXPECT_EQ(y[1], 2.0f);
    EXPECT_EQ(y[2], 3.0f);
}

TEST(Forward, Relu) {
    const Model m = single_layer(Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor({2}), Activation::relu);
    const Tensor y = forward(m, row({-1, 2}));
    EXPECT_EQ(y[0], 0.0f);
    EXPECT_EQ(y[1], 2.0f);
}

TEST(Forward, HandMultiply) {
    const Model m = single_layer(Tensor::matrix(2, 2, {1, 1, 0, 1}), Tensor::vector({0.5f, 0.0f}), Activation::identity);
    const Tensor y = forward(m, row({1, 2}));
    EXPECT_EQ(y[0], 3.5f);
    EXPECT_EQ(y[1], 2.0f);
}

TEST(Forward, ShapeMismatch) {
    const Model m = single_layer(Tensor::matrix(2, 2, {1, 0, 0, 1}), Tensor({2}), Activation::identity);
    EXPECT_THROW(forward(m, row({1, 2, 3})), ShapeError);
}

TEST(Mae, Examples) {
    EXPECT_FLOAT_EQ(mae(row({1, 2, 3}), row({2, 2, 5})), 1.0f);
    EXPECT_EQ(mae(row({1, 2, 3}), row({1, 2, 3})), 0.0f);
    EXPECT_FLOAT_EQ(mae(Tensor({2, 2}), Tensor::matrix(2, 2, {1, -1, 2, -2})), 1.5f);
    EXPECT_THROW(mae(row({1, 2}), row({1, 2, 3})), ShapeError);
}

TEST(Mae, NonNegativeAndZeroOnSelf) {
    Lcg64 r(3);
    for (int t = 0; t < 50; ++t) {
        Tensor a({4, 3}), b({4, 3});
        for (float& v : a.values()) v = static_cast<float>(r.uniform(-5, 5));
        for (float& v : b.values()) v = static_cast<float>(r.uniform(-5, 5));
        EXPECT_GE(mae(a, b), 0.0f);
        EXPECT_EQ(mae(a, a), 0.0f);
    }
}

TEST(Backward, ZeroWhenPredictionIsExact) {
    const Model m = init_model(mlp_specs(3, {4}, 2), 11);
    const Tensor x = Tensor::matrix(2, 3, {0.1f, -0.2f, 0.3f, 0.5f, 0.4f, -0.9f});
    const Tensor y = forward(m, x);
    const Gradients g = backward(m, x, y);
    for (const auto& t : g.weight)
        for (float v : t.values()) EXPECT_EQ(v, 0.0f);
    for (const auto& t : g.bias)
        for (float v : t.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Backward, SingleLinearLayerOverPrediction) {
    // pred > target in every output: dL/dW = (1/K) * outer(ones, x).
    const Model m = single_layer(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}), Tensor({3}), Activation::identity);
    const Tensor x = row({0.5f, -2.0f});
    const Tensor target = row({-100, -100, -100});
    const Gradients g = backward(m, x, target);
    for (std::size_t o = 0; o < 3; ++o) {
        EXPECT_FLOAT_EQ(g.weight[0].at(o, 0), 0.5f / 3.0f);
        EXPECT_FLOAT_EQ(g.weight[0].at(o, 1), -2.0f / 3.0f);
        EXPECT_FLOAT_EQ(g.bias[0][o], 1.0f / 3.0f);
    }
}

// Central differences (h = 1e-3) in double precision vs analytic gradients.
TEST(Backward, MatchesFiniteDifferences) {
    Lcg64 r(2024);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + r.below(6);
        const std::size_t n_hidden = r.below(3);
        std::vector<std::size_t> hidden;
        for (std::size_t i = 0; i < n_hidden; ++i) hidden.push_back(1 + r.below(8));
        const std::size_t out = 1 + r.below(4);
        const Model m = init_model(mlp_specs(in, hidden, out), r.next_u64());
        const std::size_t batch = 1 + r.below(4);
        Tensor x({batch, in}), y({batch, out});
        for (float& v : x.values()) v = static_cast<float>(r.uniform(-1, 1));
        for (float& v : y.values()) v = static_cast<float>(r.uniform(-1, 1));

        const auto ref = oracle::to_ref(m);
        if (oracle::evaluate(ref, x, y).min_abs_residual < 1e-4) continue;
        const Gradients g = backward(m, x, y);
        constexpr double h = 1e-3;
    // Below this magnitude float32 accumulation noise (~1e-8) dominates, so
    // relative error is measured against it instead.
    constexpr double kGradFloor = 1e-5;
        for (std::size_t k = 0; k < ref.size(); ++k) {
            for (int which = 0; which < 2; ++which) {
                const std::size_t n = which == 0 ? ref[k].w.size() : ref[k].b.size();
                for (std::size_t i = 0; i < n; ++i) {
                    auto plus = ref, minus = ref;
                    (which == 0 ? plus[k].w : plus[k].b)[i] += h;
                    (which == 0 ? minus[k].w : minus[k].b)[i] -= h;
                    const auto ep = oracle::evaluate(plus, x, y);
                    const auto em = oracle::evaluate(minus, x, y);
                    if (ep.pattern != em.pattern) continue;  // straddles a kink
                    const double numeric = (ep.loss - em.loss) / (2 * h);
                    const double analytic = which == 0 ? g.weight[k][i] : g.bias[k][i];
                    const double denom = std::max({std::fabs(numeric), std::fabs(analytic), kGradFloor});
                    EXPECT_LE(std::fabs(numeric - analytic) / denom, 1e-3)
                        << "trial " << trial << " layer " << k << (which ? " bias " : " weight ") << i;
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    Model m = init_model(mlp_specs(3, {4}, 2), 1);
    const Model before = m;
    AdamState s = AdamState::for_model(m);
    adam_step(m, zeros_like(m), s, 1e-3f);
    EXPECT_TRUE(m.bit_equal(before));
    EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Model m = single_layer(Tensor({1, 1}), Tensor({1}), Activation::identity);
    AdamState s = AdamState::for_model(m);
    Gradients g = zeros_like(m);
    g.weight[0][0] = 1.0f;
    adam_step(m, g, s, 0.001f);
    EXPECT_NEAR(m.layers[0].weight[0], -0.001f, 1e-8);
    EXPECT_EQ(m.layers[0].bias[0], 0.0f);
}

TEST(Adam, NonFiniteGradientAborts) {
    Model m = init_model(mlp_specs(2, {}, 1), 1);
    const Model before = m;
    AdamState s = AdamState::for_model(m);
    Gradients g = zeros_like(m);
    g.weight[0][1] = std::nanf("");
    EXPECT_THROW(adam_step(m, g, s, 1e-3f), NumericError);
    EXPECT_TRUE(m.bit_equal(before));
    EXPECT_EQ(s.step, 0u);
}

TEST(Adam, AllOnesMaskMatchesUnmasked) {
    Model a = init_model(mlp_specs(3, {5}, 2), 4);
    Model b = a;
    AdamState sa = AdamState::for_model(a), sb = AdamState::for_model(b);
    const Tensor x = Tensor::matrix(2, 3, {0.1f, 0.2f, 0.3f, -0.4f, 0.5f, -0.6f});
    const Tensor y = Tensor::matrix(2, 2, {1, -1, 0.5f, 2});
    const Tensor ones0(a.layers[0].weight.shape(), 1.0f), ones1(a.layers[1].weight.shape(), 1.0f);
    for (int i = 0; i < 5; ++i) {
        adam_step(a, backward(a, x, y), sa, 1e-2f);
        adam_step(b, backward(b, x, y), sb, 1e-2f, {&ones0, &ones1});
    }
    EXPECT_TRUE(a.bit_equal(b));
}

TEST(Plateau, HalvesAfterPatienceNonImprovingEpochs) {
    PlateauState s = PlateauState::start({});
    s = plateau_update(s, 5.0f);
    EXPECT_FLOAT_EQ(s.lr, 0.001f);
    s = plateau_update(s, 5.0f);
    s = plateau_update(s, 5.0f);
    EXPECT_FLOAT_EQ(s.lr, 0.001f);
    s = plateau_update(s, 5.0f);
    EXPECT_FLOAT_EQ(s.lr, 0.0005f);
    EXPECT_EQ(s.wait, 0);
}

TEST(Plateau, DecreasingSequenceKeepsRate) {
    PlateauState s = PlateauState::start({});
    for (int i = 0; i < 20; ++i) s = plateau_update(s, 10.0f - float(i));
    EXPECT_FLOAT_EQ(s.lr, 0.001f);
}

TEST(Plateau, ClampsAtMinimum) {
    PlateauState s = PlateauState::start({});
    s.lr = 1e-5f;
    s = plateau_update(s, 1.0f);
    for (int i = 0; i < 3; ++i) s = plateau_update(s, 1.0f);
    EXPECT_FLOAT_EQ(s.lr, 1e-5f);
}

TEST(Plateau, NonIncreasingAndFloored) {
    Lcg64 r(8);
    PlateauState s = PlateauState::start({});
    float prev = s.lr;
    for (int i = 0; i < 500; ++i) {
        s = plateau_update(s, static_cast<float>(r.uniform(0, 1)));
        EXPECT_LE(s.lr, prev);
        EXPECT_GE(s.lr, s.config.min_lr);
        EXPECT_GE(s.wait, 0);
        EXPECT_LE(s.wait, s.config.patience);
        prev = s.lr;
    }
}

TEST(Training, DeterministicAndReducesLoss) {
    TrainingData d;
    Lcg64 r(1);
    auto make = [&](std::size_t n) {
        Split s{Tensor({n, 4}), Tensor({n, 2})};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 4; ++j) s.x.at(i, j) = static_cast<float>(r.uniform(-1, 1));
            s.y.at(i, 0) = s.x.at(i, 0) + 0.5f * s.x.at(i, 1);
            s.y.at(i, 1) = std::fabs(s.x.at(i, 2));
        }
        return s;
    };
    d.train = make(256);
    d.val = make(64);
    d.test = make(64);
    Hyperparams hp;
    hp.epochs = 10;
    hp.batch_size = 32;
    hp.lr = 1e-2f;
    const Model init = init_model(mlp_specs(4, {16}, 2), 3);
    const TrainRun a = train(init, d, hp);
    const TrainRun b = train(init, d, hp);
    EXPECT_TRUE(a.model.bit_equal(b.model));
    EXPECT_EQ(a.val_curve.size(), 10u);
    EXPECT_LT(a.val_curve.back(), evaluate_mae(init, d.val));

    hp.shuffle_seed = 9;
    const TrainRun c = train(init, d, hp);
    const TrainRun e = train(init, d, hp);
    EXPECT_TRUE(c.model.bit_equal(e.model));
    EXPECT_FALSE(c.model.bit_equal(a.model));
}

TEST(Training, EpochBatchesCoverEveryRowOnce) {
    for (auto seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{5}}) {
        const auto batches = epoch_batches(300, 128, seed, 2);
        ASSERT_EQ(batches.size(), 3u);
        EXPECT_EQ(batches.back().size(), 44u);
        std::vector<int> seen(300, 0);
        for (const auto& b : batches)
            for (auto i : b) ++seen[i];
        for (int c : seen) EXPECT_EQ(c, 1);
    }
}
