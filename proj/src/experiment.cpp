#include "prunekit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>

#include "prunekit/errors.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {

std::vector<LayerSpec> ExperimentConfig::layer_specs() const {
    return mlp_specs(dataset.in_dim, model.hidden, dataset.out_dim);
}

PruneRunConfig ExperimentConfig::prune_config() const {
    return {schedule, hp.epochs, model.excluded_layers};
}

std::uint64_t ExperimentConfig::init_seed() const { return derive_seed(seed, 0x696E6974ULL); }

void validate(const ExperimentConfig& c) {
    validate(c.hp);
    validate(c.dataset, c.hp.batch_size);
    for (std::size_t h : c.model.hidden)
        if (h == 0) throw ConfigError("hidden layer widths must be positive");
    validate_specs(c.layer_specs());
    validate(c.prune_config());
    if (c.trace_output >= c.dataset.out_dim) throw ConfigError("trace_output must index a model output");
    if (c.trace_samples > c.dataset.n_test) throw ConfigError("trace_samples exceeds the test split");
}

namespace {

std::vector<float> trace(const Tensor& outputs, std::size_t samples, std::size_t column) {
    std::vector<float> t(samples);
    for (std::size_t r = 0; r < samples; ++r) t[r] = outputs.at(r, column);
    return t;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, ExperimentArtifacts* artifacts,
                                const TrainingData* data) {
    const auto started = std::chrono::steady_clock::now();
    validate(config);
    TrainingData owned;
    if (!data) {
        owned = make_dataset(config.dataset);
        data = &owned;
    }

    ExperimentResult r;
    r.config = config;
    const Model initial = init_model(config.layer_specs(), config.init_seed());
    const std::size_t n_trace = config.trace_samples;
    const std::size_t col = config.trace_output;

    {
        const TrainRun baseline = train(initial, *data, config.hp);
        const Tensor out = forward(baseline.model, data->test.x);
        r.baseline_mae = mae(out, data->test.y);
        r.trace_baseline = trace(out, n_trace, col);
    }

    PrunedRun pruned = run_pruned_training(initial, config.prune_config(), *data, config.hp);
    r.val_curve = std::move(pruned.val_curve);
    r.sparsity_curve = std::move(pruned.sparsity_curve);
    r.achieved_sparsity = achieved_sparsity(pruned.model, pruned.prunable).global();

    ModelArtifact dense = make_artifact(Variant::dense, serialize_dense(pruned.model));
    ModelArtifact sparse = make_artifact(Variant::sparse, serialize_sparse(pruned.model));
    ModelArtifact quant = make_artifact(Variant::quantized, serialize_quantized(quantize(pruned.model)));

    auto evaluate = [&](const ModelArtifact& a, VariantMetrics& m, std::vector<float>& tr) {
        const Model decoded = load_as_model(a.payload);
        const Tensor out = forward(decoded, data->test.x);
        m.test_mae = mae(out, data->test.y);
        m.raw_size = a.raw_size;
        m.gzip_size = a.gzip_size;
        tr = trace(out, n_trace, col);
    };
    evaluate(dense, r.pruned, r.trace_pruned);
    evaluate(sparse, r.sparse, r.trace_sparse);
    evaluate(quant, r.quantized, r.trace_quantized);
    r.trace_true = trace(data->test.y, n_trace, col);

    if (artifacts) *artifacts = {std::move(dense), std::move(sparse), std::move(quant)};
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

PruningSchedule GridPoint::schedule() const {
    return kind == ScheduleKind::constant ? PruningSchedule::constant(s_f, t0, tf)
                                          : PruningSchedule::dynamic(s_i, s_f, t0, tf);
}

std::vector<GridPoint> enumerate_grid(const SweepGrid& grid, int epochs) {
    std::set<GridPoint> points;
    for (ScheduleKind kind : grid.kinds) {
        const std::vector<double> initial =
            kind == ScheduleKind::constant ? std::vector<double>{0.0} : grid.initial_sparsities;
        for (double s_i : initial)
            for (double s_f : grid.final_sparsities)
                for (int t0 : grid.t0s)
                    for (int tf : grid.tfs) {
                        if (!(t0 >= 0 && t0 < tf && tf <= epochs)) continue;
                        if (kind == ScheduleKind::dynamic && s_i > s_f) continue;
                        points.insert({kind, s_i, s_f, t0, tf});
                    }
    }
    return {points.begin(), points.end()};
}

std::uint64_t point_seed(std::uint64_t base_seed, const GridPoint& p) {
    std::uint64_t h = derive_seed(base_seed, static_cast<std::uint64_t>(p.kind));
    h = derive_seed(h, std::bit_cast<std::uint64_t>(p.s_i));
    h = derive_seed(h, std::bit_cast<std::uint64_t>(p.s_f));
    h = derive_seed(h, static_cast<std::uint64_t>(p.t0));
    return derive_seed(h, static_cast<std::uint64_t>(p.tf));
}

std::vector<ExperimentResult> run_sweep(const SweepGrid& grid, const ExperimentConfig& base,
                                        const SweepOptions& options) {
    const std::vector<GridPoint> points = enumerate_grid(grid, base.hp.epochs);
    if (points.empty()) throw UsageError("sweep grid has no valid points");
    validate(base.hp);
    validate(base.dataset, base.hp.batch_size);
    const TrainingData data = make_dataset(base.dataset);

    std::vector<ExperimentResult> results(points.size());
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex report_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            ExperimentConfig cfg = base;
            cfg.schedule = points[i].schedule();
            cfg.seed = point_seed(base.seed, points[i]);
            ExperimentResult r;
            try {
                r = run_experiment(cfg, nullptr, &data);
            } catch (const std::exception& e) {
                r = ExperimentResult{};
                r.config = cfg;
                r.ok = false;
                r.error = e.what();
            }
            std::lock_guard lock(report_mutex);
            results[i] = std::move(r);
            ++done;
            if (options.on_result) options.on_result(results[i], done, points.size());
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.parallelism, static_cast<unsigned>(points.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return results;
}

}  // namespace prunekit
