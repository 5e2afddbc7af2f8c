#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prunekit/nn.hpp"
#include "prunekit/optim.hpp"
#include "prunekit/train.hpp"

namespace prunekit {

enum class ScheduleKind { constant, dynamic };

std::string_view to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(std::string_view s);

/// Sparsity as a function of epoch.
///
/// constant: s_c from t0 on (0 before t0).
/// dynamic:  s_f + (s_i - s_f) * (1 - (t - t0) / (tf - t0))^3 on [t0, tf],
///           0 before t0 and s_f after tf.
///
/// delta_t only controls how often masks are recomputed.
struct PruningSchedule {
    ScheduleKind kind = ScheduleKind::dynamic;
    double s_c = 0.0;
    double s_i = 0.0;
    double s_f = 0.5;
    int t0 = 0;
    int tf = 60;
    int delta_t = 1;

    static PruningSchedule constant(double s_c, int t0, int tf, int delta_t = 1);
    static PruningSchedule dynamic(double s_i, double s_f, int t0, int tf, int delta_t = 1);

    // s_c for constant schedules, s_f for dynamic ones.
    double final_sparsity() const { return kind == ScheduleKind::constant ? s_c : s_f; }

    friend bool operator==(const PruningSchedule&, const PruningSchedule&) = default;
};

// Throws ConfigError when the schedule violates its invariants.
void validate(const PruningSchedule& s);

double schedule_sparsity(const PruningSchedule& s, int epoch);
bool should_update_mask(const PruningSchedule& s, int epoch);

/// Number of entries a mask at this sparsity zeroes: ceil(sparsity * n).
std::size_t pruned_count(std::size_t n, double sparsity);

/// Binary mask zeroing the ceil(sparsity * n) entries of smallest |w|. Equal
/// magnitudes are pruned lowest flat index first.
Tensor compute_mask(const Tensor& weights, double sparsity);

/// Masks keyed by layer name; only prunable layers have one.
struct MaskSet {
    std::map<std::string, Tensor, std::less<>> masks;

    bool empty() const { return masks.empty(); }
    const Tensor* find(std::string_view layer) const;
};

// Sets masked weights to +0.0. Biases and unmasked layers are untouched.
void apply_masks_inplace(Model& model, const MaskSet& masks);
Model apply_masks(Model model, const MaskSet& masks);

/// Forward/backward on the (already masked) model, then an Adam step that
/// leaves masked weights and their moments untouched, then the masks are
/// re-applied.
void pruned_train_step(Model& model, const MaskSet& masks, const Tensor& batch, const Tensor& target,
                       AdamState& adam, float lr);

struct SparsityReport {
    std::vector<std::pair<std::string, double>> per_layer;
    std::size_t zeros = 0;
    std::size_t total = 0;

    double global() const { return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0; }
};

/// Fraction of exact zeros per named weight tensor and over all of them.
SparsityReport achieved_sparsity(const Model& model, const std::vector<std::string>& layer_names);

struct PruneRunConfig {
    PruningSchedule schedule;
    int total_epochs = 80;
    std::vector<std::string> excluded_layer_names;
};

void validate(const PruneRunConfig& c);

/// Layers with prunable = true that are not excluded by the run config.
std::vector<std::string> prunable_layers(const Model& model, const PruneRunConfig& config);

struct PrunedRun {
    Model model;
    MaskSet masks;
    std::vector<float> val_curve;         // validation MAE after each epoch
    std::vector<double> sparsity_curve;   // global prunable sparsity after each epoch
    std::vector<std::string> prunable;
};

/// Pruned training. Mask updates happen at epoch boundaries 0..total_epochs:
/// boundary e runs before epoch e trains, and boundary total_epochs runs after
/// the last epoch, so a schedule ending at tf = total_epochs still reaches its
/// final sparsity.
PrunedRun run_pruned_training(Model model, const PruneRunConfig& config, const TrainingData& data,
                              const Hyperparams& hp);

}  // namespace prunekit
