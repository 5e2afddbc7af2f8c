#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "prunekit/nn.hpp"
#include "prunekit/optim.hpp"

namespace prunekit {

struct Split {
    Tensor x;  // [n x in_dim]
    Tensor y;  // [n x out_dim]

    std::size_t rows() const { return x.rank() ? x.dim(0) : 0; }
};

struct TrainingData {
    Split train, val, test;
};

struct Hyperparams {
    float lr = 1e-3f;
    std::size_t batch_size = 128;
    int epochs = 80;
    int patience = 3;
    float factor = 0.5f;
    float min_lr = 1e-5f;
    // Unset: batches are visited in fixed order every epoch.
    std::optional<std::uint64_t> shuffle_seed;

    PlateauConfig plateau() const { return {lr, patience, factor, min_lr}; }

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

void validate(const Hyperparams& hp);

/// Row ranges for one epoch. The last batch may be short.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t rows, std::size_t batch_size,
                                                    const std::optional<std::uint64_t>& shuffle_seed,
                                                    int epoch);

Split gather_rows(const Split& s, const std::vector<std::size_t>& rows);

float evaluate_mae(const Model& model, const Split& split);

/// One forward/backward/Adam update on a batch.
void train_step(Model& model, const Tensor& batch, const Tensor& target, AdamState& adam, float lr);

struct TrainRun {
    Model model;
    std::vector<float> val_curve;  // one entry per epoch
};

/// Plain (unpruned) training loop with plateau LR decay on validation MAE.
TrainRun train(Model model, const TrainingData& data, const Hyperparams& hp);

}  // namespace prunekit
