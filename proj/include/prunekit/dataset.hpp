#pragma once

#include <cstdint>

#include "prunekit/train.hpp"

namespace prunekit {

/// Synthetic multi-output regression task. Inputs are uniform in [-1, 1]^in_dim;
/// targets are a frozen random teacher network
///
///   y = W2 * tanh(W1 * x + b1) + b2 + noise,   noise ~ N(0, noise_std^2)
///
/// with every teacher parameter drawn from the dataset seed.
struct DatasetConfig {
    std::size_t n_train = 8192;
    std::size_t n_val = 1024;
    std::size_t n_test = 1024;
    std::size_t in_dim = 16;
    std::size_t out_dim = 3;  // yaw, pitch, roll analogs
    std::size_t teacher_hidden = 32;
    double noise_std = 0.05;
    std::uint64_t seed = 1;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

void validate(const DatasetConfig& c, std::size_t batch_size);

struct Teacher {
    Tensor w1, b1, w2, b2;

    Tensor apply(const Tensor& x) const;
};

Teacher make_teacher(const DatasetConfig& c);

/// Rows are generated in one sequence and split contiguously into
/// train | val | test, so the splits never share a sample.
TrainingData make_dataset(const DatasetConfig& c);

}  // namespace prunekit
