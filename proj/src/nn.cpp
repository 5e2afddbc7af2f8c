#include "prunekit/nn.hpp"

#include <cmath>
#include <set>

#include "prunekit/errors.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {

std::string_view to_string(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "identity" || s == "linear") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

const Layer* Model::find(std::string_view name) const {
    for (const auto& l : layers)
        if (l.spec.name == name) return &l;
    return nullptr;
}

Layer* Model::find(std::string_view name) {
    for (auto& l : layers)
        if (l.spec.name == name) return &l;
    return nullptr;
}

bool Model::bit_equal(const Model& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& a = layers[i];
        const auto& b = other.layers[i];
        if (!(a.spec == b.spec) || !a.weight.bit_equal(b.weight) || !a.bias.bit_equal(b.bias))
            return false;
    }
    return true;
}

void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw ConfigError("model needs at least one layer");
    std::set<std::string> names;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        if (s.name.empty()) throw ConfigError("layer " + std::to_string(k) + " has an empty name");
        if (!names.insert(s.name).second) throw ConfigError("duplicate layer name '" + s.name + "'");
        if (s.in_dim == 0 || s.out_dim == 0)
            throw ConfigError("layer '" + s.name + "' has a zero dimension");
        if (k > 0 && specs[k - 1].out_dim != s.in_dim)
            throw ConfigError("layer '" + specs[k - 1].name + "' outputs " +
                              std::to_string(specs[k - 1].out_dim) + " but layer '" + s.name +
                              "' expects " + std::to_string(s.in_dim));
    }
    if (specs.back().activation != Activation::identity)
        throw ConfigError("output layer '" + specs.back().name + "' must use identity activation");
}

std::vector<LayerSpec> mlp_specs(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                                 std::size_t out_dim) {
    std::vector<LayerSpec> specs;
    std::size_t prev = in_dim;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        specs.push_back({"dense_" + std::to_string(i), prev, hidden[i], Activation::relu, true});
        prev = hidden[i];
    }
    specs.push_back({"head", prev, out_dim, Activation::identity, true});
    return specs;
}

Model init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    validate_specs(specs);
    Lcg64 rng(seed);
    Model m;
    m.layers.reserve(specs.size());
    for (const auto& s : specs) {
        Layer l{s, Tensor({s.out_dim, s.in_dim}), Tensor({s.out_dim})};
        const double limit = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
        for (float& w : l.weight.values()) w = static_cast<float>(rng.uniform(-limit, limit));
        m.layers.push_back(std::move(l));
    }
    return m;
}

namespace {

void check_batch(const Model& model, const Tensor& batch) {
    if (model.layers.empty()) throw ShapeError("empty model");
    if (batch.rank() != 2 || batch.dim(1) != model.in_dim())
        throw ShapeError("batch shape " + shape_string(batch.shape()) + " incompatible with input width " +
                         std::to_string(model.in_dim()));
}

// y[b, o] = act(sum_i x[b, i] * w[o, i] + bias[o]); also stores the pre-activation.
void dense_forward(const Layer& layer, const Tensor& x, Tensor& pre, Tensor& y) {
    const std::size_t batch = x.dim(0);
    const std::size_t in = layer.spec.in_dim;
    const std::size_t out = layer.spec.out_dim;
    pre = Tensor({batch, out});
    y = Tensor({batch, out});
    const float* w = layer.weight.data();
    const float* bias = layer.bias.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const float* xr = x.data() + b * in;
        float* zr = pre.data() + b * out;
        float* yr = y.data() + b * out;
        for (std::size_t o = 0; o < out; ++o) {
            const float* wr = w + o * in;
            float acc = 0.0f;
            for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
            zr[o] = acc + bias[o];
            yr[o] = layer.spec.activation == Activation::relu ? (zr[o] > 0.0f ? zr[o] : 0.0f) : zr[o];
        }
    }
}

}  // namespace

Tensor forward(const Model& model, const Tensor& batch) {
    check_batch(model, batch);
    Tensor x = batch;
    Tensor pre, y;
    for (const auto& layer : model.layers) {
        dense_forward(layer, x, pre, y);
        x = std::move(y);
    }
    return x;
}

float mae(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw ShapeError("mae: prediction " + shape_string(pred.shape()) + " vs target " +
                         shape_string(target.shape()));
    if (pred.size() == 0) throw ShapeError("mae: empty tensors");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::fabs(double(pred[i]) - double(target[i]));
    return static_cast<float>(sum / static_cast<double>(pred.size()));
}

Gradients zeros_like(const Model& model) {
    Gradients g;
    for (const auto& l : model.layers) {
        g.weight.emplace_back(l.weight.shape());
        g.bias.emplace_back(l.bias.shape());
    }
    return g;
}

Gradients backward(const Model& model, const Tensor& batch, const Tensor& target) {
    return backward(model, batch, target, nullptr);
}

Gradients backward(const Model& model, const Tensor& batch, const Tensor& target, float* loss) {
    check_batch(model, batch);
    const std::size_t n_layers = model.layers.size();
    const std::size_t bs = batch.dim(0);
    if (target.rank() != 2 || target.dim(0) != bs || target.dim(1) != model.out_dim())
        throw ShapeError("target shape " + shape_string(target.shape()) + " incompatible with output " +
                         std::to_string(bs) + " x " + std::to_string(model.out_dim()));

    // inputs[k] feeds layer k; pre[k] is its pre-activation.
    std::vector<Tensor> inputs(n_layers + 1), pre(n_layers);
    inputs[0] = batch;
    for (std::size_t k = 0; k < n_layers; ++k) dense_forward(model.layers[k], inputs[k], pre[k], inputs[k + 1]);

    const Tensor& pred = inputs[n_layers];
    if (loss) *loss = mae(pred, target);

    // dL/dpred = sign(pred - target) / (B*K), sign(0) = 0.
    const float inv_count = 1.0f / static_cast<float>(pred.size());
    Tensor delta(pred.shape());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const float d = pred[i] - target[i];
        delta[i] = d > 0.0f ? inv_count : (d < 0.0f ? -inv_count : 0.0f);
    }

    Gradients g = zeros_like(model);
    for (std::size_t k = n_layers; k-- > 0;) {
        const Layer& layer = model.layers[k];
        const std::size_t in = layer.spec.in_dim;
        const std::size_t out = layer.spec.out_dim;
        if (layer.spec.activation == Activation::relu) {
            for (std::size_t i = 0; i < delta.size(); ++i)
                if (!(pre[k][i] > 0.0f)) delta[i] = 0.0f;
        }
        const Tensor& x = inputs[k];
        float* gw = g.weight[k].data();
        float* gb = g.bias[k].data();
        for (std::size_t b = 0; b < bs; ++b) {
            const float* dr = delta.data() + b * out;
            const float* xr = x.data() + b * in;
            for (std::size_t o = 0; o < out; ++o) {
                const float d = dr[o];
                gb[o] += d;
                if (d == 0.0f) continue;
                float* gwr = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) gwr[i] += d * xr[i];
            }
        }
        if (k == 0) break;
        Tensor next({bs, in});
        const float* w = layer.weight.data();
        for (std::size_t b = 0; b < bs; ++b) {
            const float* dr = delta.data() + b * out;
            float* nr = next.data() + b * in;
            for (std::size_t o = 0; o < out; ++o) {
                const float d = dr[o];
                if (d == 0.0f) continue;
                const float* wr = w + o * in;
                for (std::size_t i = 0; i < in; ++i) nr[i] += d * wr[i];
            }
        }
        delta = std::move(next);
    }
    return g;
}

}  // namespace prunekit
