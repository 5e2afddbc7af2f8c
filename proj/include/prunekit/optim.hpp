#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "prunekit/nn.hpp"

namespace prunekit {

struct AdamState {
    static constexpr float beta1 = 0.9f;
    static constexpr float beta2 = 0.999f;
    static constexpr float epsilon = 1e-8f;

    std::vector<Tensor> m_weight, v_weight, m_bias, v_bias;
    std::uint64_t step = 0;

    static AdamState for_model(const Model& model);
};

/// One bias-corrected Adam update. Throws NumericError on a non-finite
/// gradient before touching any parameter.
void adam_step(Model& model, const Gradients& grads, AdamState& state, float lr);

/// Adam update that skips weight entries whose mask value is 0: the parameter
/// and both moments stay as they are. weight_masks[k] may be null (no mask for
/// layer k). Biases are never masked. With all-ones masks the arithmetic is
/// identical to adam_step.
void adam_step(Model& model, const Gradients& grads, AdamState& state, float lr,
               const std::vector<const Tensor*>& weight_masks);

struct PlateauConfig {
    float initial_lr = 1e-3f;
    int patience = 3;
    float factor = 0.5f;
    float min_lr = 1e-5f;
};

/// ReduceLROnPlateau on validation MAE.
struct PlateauState {
    PlateauConfig config;
    float best_val = std::numeric_limits<float>::infinity();
    int wait = 0;
    float lr = 1e-3f;

    static PlateauState start(const PlateauConfig& config) { return {config, std::numeric_limits<float>::infinity(), 0, config.initial_lr}; }
};

PlateauState plateau_update(PlateauState state, float val_mae);

}  // namespace prunekit
