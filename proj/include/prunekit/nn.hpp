#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prunekit/tensor.hpp"

namespace prunekit {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct LayerSpec {
    std::string name;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::identity;
    bool prunable = true;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
    LayerSpec spec;
    Tensor weight;  // [out_dim x in_dim]
    Tensor bias;    // [out_dim]
};

/// Ordered stack of dense layers.
struct Model {
    std::vector<Layer> layers;

    std::size_t in_dim() const { return layers.front().spec.in_dim; }
    std::size_t out_dim() const { return layers.back().spec.out_dim; }
    std::size_t parameter_count() const;

    const Layer* find(std::string_view name) const;
    Layer* find(std::string_view name);

    // Bitwise comparison of specs, weights and biases.
    bool bit_equal(const Model& other) const;
};

/// Gradients with the same layout as the model parameters.
struct Gradients {
    std::vector<Tensor> weight;
    std::vector<Tensor> bias;
};

// Checks names are unique, dimensions are positive and chain, and the last
// layer is identity. Throws ConfigError.
void validate_specs(const std::vector<LayerSpec>& specs);

/// Dense MLP specs: in -> hidden... -> out, relu on hidden layers, identity head.
/// Layers are named dense_0, dense_1, ..., head.
std::vector<LayerSpec> mlp_specs(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                                 std::size_t out_dim);

/// Glorot-uniform weights U(-sqrt(6/(in+out)), +sqrt(6/(in+out))) drawn from
/// Lcg64(seed) layer by layer in row-major order; biases zero.
Model init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed);

Tensor forward(const Model& model, const Tensor& batch);

/// Mean absolute error over all entries.
float mae(const Tensor& pred, const Tensor& target);

/// Exact gradients of mae(forward(model, batch), target). The subgradient of
/// |x| at 0 and the relu derivative at 0 are both taken as 0.
Gradients backward(const Model& model, const Tensor& batch, const Tensor& target);

/// Same as backward() but also returns the loss of the forward pass.
Gradients backward(const Model& model, const Tensor& batch, const Tensor& target, float* loss);

Gradients zeros_like(const Model& model);

}  // namespace prunekit
