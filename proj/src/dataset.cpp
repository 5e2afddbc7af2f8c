#include "prunekit/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "prunekit/errors.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {

namespace {

// Independent streams per purpose.
enum Stream : std::uint64_t { kTeacherStream = 1, kInputStream = 2, kNoiseStream = 3 };

Tensor uniform_tensor(std::vector<std::size_t> shape, Lcg64& rng, double limit) {
    Tensor t(std::move(shape));
    for (float& v : t.values()) v = static_cast<float>(rng.uniform(-limit, limit));
    return t;
}

}  // namespace

void validate(const DatasetConfig& c, std::size_t batch_size) {
    if (c.in_dim == 0 || c.out_dim == 0 || c.teacher_hidden == 0)
        throw ConfigError("dataset dimensions must be positive");
    if (c.n_train < batch_size || c.n_val < batch_size || c.n_test < batch_size)
        throw ConfigError("dataset split sizes must be at least the batch size (" + std::to_string(batch_size) + ")");
    if (!(c.noise_std >= 0.0) || !std::isfinite(c.noise_std)) throw ConfigError("noise_std must be >= 0");
}

Teacher make_teacher(const DatasetConfig& c) {
    Lcg64 rng(derive_seed(c.seed, kTeacherStream));
    // Hidden pre-activations have std ~1.5 so tanh works in its nonlinear range.
    const double w1_limit = 1.5 * std::sqrt(3.0 / static_cast<double>(c.in_dim));
    const double w2_limit = std::sqrt(3.0 / static_cast<double>(c.teacher_hidden));
    Teacher t;
    t.w1 = uniform_tensor({c.teacher_hidden, c.in_dim}, rng, w1_limit);
    t.b1 = uniform_tensor({c.teacher_hidden}, rng, 0.5);
    t.w2 = uniform_tensor({c.out_dim, c.teacher_hidden}, rng, w2_limit);
    t.b2 = uniform_tensor({c.out_dim}, rng, 0.1);
    return t;
}

Tensor Teacher::apply(const Tensor& x) const {
    const std::size_t n = x.dim(0);
    const std::size_t in = w1.dim(1);
    const std::size_t hidden = w1.dim(0);
    const std::size_t out = w2.dim(0);
    if (x.dim(1) != in) throw ShapeError("teacher input width mismatch");
    Tensor y({n, out});
    std::vector<float> h(hidden);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < hidden; ++j) {
            float acc = b1[j];
            for (std::size_t i = 0; i < in; ++i) acc += w1.at(j, i) * x.at(r, i);
            h[j] = std::tanh(acc);
        }
        for (std::size_t o = 0; o < out; ++o) {
            float acc = b2[o];
            for (std::size_t j = 0; j < hidden; ++j) acc += w2.at(o, j) * h[j];
            y.at(r, o) = acc;
        }
    }
    return y;
}

TrainingData make_dataset(const DatasetConfig& c) {
    const Teacher teacher = make_teacher(c);
    const std::size_t total = c.n_train + c.n_val + c.n_test;

    Lcg64 inputs(derive_seed(c.seed, kInputStream));
    Tensor x = uniform_tensor({total, c.in_dim}, inputs, 1.0);
    Tensor y = teacher.apply(x);
    if (c.noise_std > 0.0) {
        Lcg64 noise(derive_seed(c.seed, kNoiseStream));
        for (float& v : y.values()) v += static_cast<float>(c.noise_std * noise.normal());
    }

    auto slice = [&](std::size_t begin, std::size_t count) {
        Split s{Tensor({count, c.in_dim}), Tensor({count, c.out_dim})};
        std::copy_n(x.data() + begin * c.in_dim, count * c.in_dim, s.x.data());
        std::copy_n(y.data() + begin * c.out_dim, count * c.out_dim, s.y.data());
        return s;
    };
    return {slice(0, c.n_train), slice(c.n_train, c.n_val), slice(c.n_train + c.n_val, c.n_test)};
}

}  // namespace prunekit
