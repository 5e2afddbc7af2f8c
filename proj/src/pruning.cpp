#include "prunekit/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prunekit/errors.hpp"

namespace prunekit {

std::string_view to_string(ScheduleKind k) {
    return k == ScheduleKind::constant ? "constant" : "dynamic";
}

ScheduleKind parse_schedule_kind(std::string_view s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "dynamic") return ScheduleKind::dynamic;
    throw ConfigError("unknown schedule kind '" + std::string(s) + "' (expected constant or dynamic)");
}

PruningSchedule PruningSchedule::constant(double s_c, int t0, int tf, int delta_t) {
    PruningSchedule s;
    s.kind = ScheduleKind::constant;
    s.s_c = s_c;
    s.s_i = 0.0;
    s.s_f = s_c;
    s.t0 = t0;
    s.tf = tf;
    s.delta_t = delta_t;
    return s;
}

PruningSchedule PruningSchedule::dynamic(double s_i, double s_f, int t0, int tf, int delta_t) {
    PruningSchedule s;
    s.kind = ScheduleKind::dynamic;
    s.s_i = s_i;
    s.s_f = s_f;
    s.t0 = t0;
    s.tf = tf;
    s.delta_t = delta_t;
    return s;
}

namespace {

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void validate(const PruningSchedule& s) {
    if (s.kind == ScheduleKind::constant) {
        if (!is_fraction(s.s_c)) throw ConfigError("s_c must be in [0, 1]");
    } else {
        if (!is_fraction(s.s_i) || !is_fraction(s.s_f)) throw ConfigError("s_i and s_f must be in [0, 1]");
        if (s.s_i > s.s_f) throw ConfigError("s_i must not exceed s_f");
    }
    if (s.t0 < 0) throw ConfigError("t0 must be >= 0");
    if (s.tf <= s.t0) throw ConfigError("tf must be greater than t0");
    if (s.delta_t < 1) throw ConfigError("delta_t must be >= 1");
}

double schedule_sparsity(const PruningSchedule& s, int epoch) {
    validate(s);
    if (epoch < s.t0) return 0.0;
    if (s.kind == ScheduleKind::constant) return s.s_c;
    if (epoch >= s.tf) return s.s_f;
    const double progress = static_cast<double>(epoch - s.t0) / static_cast<double>(s.tf - s.t0);
    const double remaining = 1.0 - progress;
    return s.s_f + (s.s_i - s.s_f) * remaining * remaining * remaining;
}

bool should_update_mask(const PruningSchedule& s, int epoch) {
    return epoch >= s.t0 && epoch <= s.tf && (epoch - s.t0) % s.delta_t == 0;
}

std::size_t pruned_count(std::size_t n, double sparsity) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw ConfigError("sparsity must be in [0, 1]");
    const auto z = static_cast<std::size_t>(std::ceil(sparsity * static_cast<double>(n)));
    return std::min(z, n);
}

Tensor compute_mask(const Tensor& weights, double sparsity) {
    const std::size_t n = weights.size();
    const std::size_t z = pruned_count(n, sparsity);
    Tensor mask(weights.shape(), 1.0f);
    if (z == 0) return mask;
    if (z == n) {
        mask.fill(0.0f);
        return mask;
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const float* w = weights.data();
    // Strict total order: magnitude, then flat index.
    auto smaller = [w](std::uint32_t a, std::uint32_t b) {
        const float fa = std::fabs(w[a]);
        const float fb = std::fabs(w[b]);
        return fa < fb || (fa == fb && a < b);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(z - 1), order.end(), smaller);
    for (std::size_t i = 0; i < z; ++i) mask[order[i]] = 0.0f;
    return mask;
}

const Tensor* MaskSet::find(std::string_view layer) const {
    auto it = masks.find(layer);
    return it == masks.end() ? nullptr : &it->second;
}

void apply_masks_inplace(Model& model, const MaskSet& masks) {
    for (const auto& [name, mask] : masks.masks) {
        Layer* layer = model.find(name);
        if (!layer) throw ShapeError("mask for unknown layer '" + name + "'");
        if (mask.shape() != layer->weight.shape())
            throw ShapeError("mask " + shape_string(mask.shape()) + " does not match weights " +
                             shape_string(layer->weight.shape()) + " of layer '" + name + "'");
        float* w = layer->weight.data();
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] == 0.0f) w[i] = 0.0f;
    }
}

Model apply_masks(Model model, const MaskSet& masks) {
    apply_masks_inplace(model, masks);
    return model;
}

void pruned_train_step(Model& model, const MaskSet& masks, const Tensor& batch, const Tensor& target,
                       AdamState& adam, float lr) {
    const Gradients g = backward(model, batch, target);
    std::vector<const Tensor*> per_layer(model.layers.size(), nullptr);
    for (std::size_t k = 0; k < model.layers.size(); ++k) per_layer[k] = masks.find(model.layers[k].spec.name);
    adam_step(model, g, adam, lr, per_layer);
    apply_masks_inplace(model, masks);
}

SparsityReport achieved_sparsity(const Model& model, const std::vector<std::string>& layer_names) {
    SparsityReport r;
    for (const auto& name : layer_names) {
        const Layer* layer = model.find(name);
        if (!layer) throw ShapeError("unknown layer '" + name + "'");
        const std::size_t zeros = layer->weight.count_zeros();
        const std::size_t total = layer->weight.size();
        r.per_layer.emplace_back(name, static_cast<double>(zeros) / static_cast<double>(total));
        r.zeros += zeros;
        r.total += total;
    }
    return r;
}

void validate(const PruneRunConfig& c) {
    validate(c.schedule);
    if (c.total_epochs <= 0) throw ConfigError("total_epochs must be positive");
    if (c.schedule.tf > c.total_epochs)
        throw ConfigError("tf (" + std::to_string(c.schedule.tf) + ") exceeds total epochs (" +
                          std::to_string(c.total_epochs) + ")");
}

std::vector<std::string> prunable_layers(const Model& model, const PruneRunConfig& config) {
    std::set<std::string, std::less<>> excluded(config.excluded_layer_names.begin(),
                                                config.excluded_layer_names.end());
    for (const auto& name : excluded)
        if (!model.find(name)) throw ConfigError("excluded layer '" + name + "' is not in the model");
    std::vector<std::string> names;
    for (const auto& l : model.layers)
        if (l.spec.prunable && !excluded.contains(l.spec.name)) names.push_back(l.spec.name);
    return names;
}

PrunedRun run_pruned_training(Model model, const PruneRunConfig& config, const TrainingData& data,
                              const Hyperparams& hp) {
    validate(config);
    validate(hp);
    if (hp.epochs != config.total_epochs)
        throw ConfigError("hyperparameter epochs (" + std::to_string(hp.epochs) + ") differ from total_epochs (" +
                          std::to_string(config.total_epochs) + ")");

    PrunedRun run;
    run.prunable = prunable_layers(model, config);
    AdamState adam = AdamState::for_model(model);
    PlateauState plateau = PlateauState::start(hp.plateau());

    auto update_masks = [&](int boundary) {
        if (!should_update_mask(config.schedule, boundary)) return;
        const double s = schedule_sparsity(config.schedule, boundary);
        for (const auto& name : run.prunable) run.masks.masks[name] = compute_mask(model.find(name)->weight, s);
        apply_masks_inplace(model, run.masks);
    };

    const bool shuffled = hp.shuffle_seed.has_value();
    std::vector<Split> fixed_batches;
    if (!shuffled)
        for (const auto& rows : epoch_batches(data.train.rows(), hp.batch_size, std::nullopt, 0))
            fixed_batches.push_back(gather_rows(data.train, rows));

    run.val_curve.reserve(static_cast<std::size_t>(hp.epochs));
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        update_masks(epoch);
        if (shuffled) {
            for (const auto& rows : epoch_batches(data.train.rows(), hp.batch_size, hp.shuffle_seed, epoch)) {
                const Split b = gather_rows(data.train, rows);
                pruned_train_step(model, run.masks, b.x, b.y, adam, plateau.lr);
            }
        } else {
            for (const auto& b : fixed_batches) pruned_train_step(model, run.masks, b.x, b.y, adam, plateau.lr);
        }
        const float val = evaluate_mae(model, data.val);
        if (!std::isfinite(val)) throw NumericError("validation MAE is not finite at epoch " + std::to_string(epoch));
        run.val_curve.push_back(val);
        run.sparsity_curve.push_back(achieved_sparsity(model, run.prunable).global());
        plateau = plateau_update(plateau, val);
    }
    update_masks(hp.epochs);
    run.model = std::move(model);
    return run;
}

}  // namespace prunekit
