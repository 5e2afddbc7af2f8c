#include "prunekit/optim.hpp"

#include <algorithm>
#include <cmath>

#include "prunekit/errors.hpp"

namespace prunekit {

AdamState AdamState::for_model(const Model& model) {
    AdamState s;
    for (const auto& l : model.layers) {
        s.m_weight.emplace_back(l.weight.shape());
        s.v_weight.emplace_back(l.weight.shape());
        s.m_bias.emplace_back(l.bias.shape());
        s.v_bias.emplace_back(l.bias.shape());
    }
    return s;
}

namespace {

void check_finite(const Gradients& g) {
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
        if (!g.weight[k].all_finite() || !g.bias[k].all_finite())
            throw NumericError("non-finite gradient in layer " + std::to_string(k));
    }
}

struct Corrections {
    float c1, c2;
};

void update(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, float lr, Corrections c, const Tensor* mask) {
    constexpr float b1 = AdamState::beta1;
    constexpr float b2 = AdamState::beta2;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask && (*mask)[i] == 0.0f) continue;
        const float gi = g[i];
        m[i] = b1 * m[i] + (1.0f - b1) * gi;
        v[i] = b2 * v[i] + (1.0f - b2) * gi * gi;
        const float mhat = m[i] / c.c1;
        const float vhat = v[i] / c.c2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::epsilon);
    }
}

}  // namespace

void adam_step(Model& model, const Gradients& grads, AdamState& state, float lr) {
    adam_step(model, grads, state, lr, std::vector<const Tensor*>(model.layers.size(), nullptr));
}

void adam_step(Model& model, const Gradients& grads, AdamState& state, float lr,
               const std::vector<const Tensor*>& weight_masks) {
    const std::size_t n = model.layers.size();
    if (grads.weight.size() != n || grads.bias.size() != n || state.m_weight.size() != n ||
        weight_masks.size() != n)
        throw ShapeError("adam_step: parameter/gradient/state layer counts differ");
    if (!(lr > 0.0f)) throw NumericError("adam_step: learning rate must be positive");
    check_finite(grads);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = model.layers[k];
        if (grads.weight[k].shape() != l.weight.shape() || grads.bias[k].shape() != l.bias.shape() ||
            state.m_weight[k].shape() != l.weight.shape() || state.m_bias[k].shape() != l.bias.shape())
            throw ShapeError("adam_step: shape mismatch in layer '" + l.spec.name + "'");
        if (weight_masks[k] && weight_masks[k]->shape() != l.weight.shape())
            throw ShapeError("adam_step: mask shape mismatch in layer '" + l.spec.name + "'");
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const Corrections c{static_cast<float>(1.0 - std::pow(double(AdamState::beta1), t)),
                        static_cast<float>(1.0 - std::pow(double(AdamState::beta2), t))};
    for (std::size_t k = 0; k < n; ++k) {
        auto& l = model.layers[k];
        update(l.weight, grads.weight[k], state.m_weight[k], state.v_weight[k], lr, c, weight_masks[k]);
        update(l.bias, grads.bias[k], state.m_bias[k], state.v_bias[k], lr, c, nullptr);
    }
}

PlateauState plateau_update(PlateauState s, float val_mae) {
    if (val_mae < s.best_val) {
        s.best_val = val_mae;
        s.wait = 0;
        return s;
    }
    s.wait += 1;
    if (s.wait >= s.config.patience) {
        s.lr = std::max(s.lr * s.config.factor, s.config.min_lr);
        s.wait = 0;
    }
    return s;
}

}  // namespace prunekit
