#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "prunekit/dataset.hpp"
#include "prunekit/model_io.hpp"
#include "prunekit/pruning.hpp"
#include "prunekit/train.hpp"

namespace prunekit {

struct ModelConfig {
    std::vector<std::size_t> hidden{64, 64};
    std::vector<std::string> excluded_layers;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Defaults: 16 -> 64 -> 64 -> 3 MLP, Adam lr 1e-3, batch 128, 80 epochs,
/// plateau patience 3 / factor 0.5 / min lr 1e-5, dynamic pruning 0 -> 0.5
/// over epochs 0..60.
struct ExperimentConfig {
    DatasetConfig dataset;
    ModelConfig model;
    Hyperparams hp;
    PruningSchedule schedule = PruningSchedule::dynamic(0.0, 0.5, 0, 60);
    std::uint64_t seed = 42;
    std::size_t trace_samples = 20;
    std::size_t trace_output = 1;  // pitch

    std::vector<LayerSpec> layer_specs() const;
    PruneRunConfig prune_config() const;
    // Seed for model initialization, derived from the run seed.
    std::uint64_t init_seed() const;
};

void validate(const ExperimentConfig& c);

struct VariantMetrics {
    double test_mae = 0.0;
    std::size_t raw_size = 0;
    std::size_t gzip_size = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    bool ok = true;
    std::string error;

    double baseline_mae = 0.0;
    VariantMetrics pruned, sparse, quantized;
    double achieved_sparsity = 0.0;
    std::vector<float> val_curve;
    std::vector<double> sparsity_curve;
    double wall_seconds = 0.0;

    // First trace_samples test rows, output trace_output.
    std::vector<float> trace_true, trace_baseline, trace_pruned, trace_sparse, trace_quantized;
};

struct ExperimentArtifacts {
    ModelArtifact pruned, sparse, quantized;
};

/// Trains the unpruned baseline and the pruned model from the same
/// initialization, builds the three artifacts and evaluates each decoded
/// artifact on the test split. data may be supplied to skip regeneration; it
/// must equal make_dataset(config.dataset).
ExperimentResult run_experiment(const ExperimentConfig& config, ExperimentArtifacts* artifacts = nullptr,
                                const TrainingData* data = nullptr);

struct SweepGrid {
    std::vector<ScheduleKind> kinds{ScheduleKind::dynamic, ScheduleKind::constant};
    std::vector<double> final_sparsities{0.5, 0.75, 0.875};
    std::vector<int> t0s{0, 20, 40, 60, 80};
    std::vector<int> tfs{20, 40, 60, 80};
    std::vector<double> initial_sparsities{0.0};  // dynamic only

    friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

struct GridPoint {
    ScheduleKind kind = ScheduleKind::dynamic;
    double s_i = 0.0;
    double s_f = 0.0;
    int t0 = 0;
    int tf = 0;

    PruningSchedule schedule() const;
    auto operator<=>(const GridPoint&) const = default;
};

/// Valid points (t0 < tf <= epochs, s_i <= s_f) in canonical order: constant
/// before dynamic, then s_i, s_f, t0, tf ascending.
/// Duplicated grid values are collapsed.
std::vector<GridPoint> enumerate_grid(const SweepGrid& grid, int epochs);

std::uint64_t point_seed(std::uint64_t base_seed, const GridPoint& p);

struct SweepOptions {
    unsigned parallelism = 1;
    // Called once per finished point (from worker threads, serialized).
    std::function<void(const ExperimentResult&, std::size_t done, std::size_t total)> on_result;
};

/// One result per grid point in canonical order, independent of parallelism.
/// A failing point is recorded (ok = false) and the sweep continues.
std::vector<ExperimentResult> run_sweep(const SweepGrid& grid, const ExperimentConfig& base,
                                        const SweepOptions& options = {});

}  // namespace prunekit
