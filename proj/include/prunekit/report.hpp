#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prunekit/experiment.hpp"

namespace prunekit {

/// Columns of sweep.csv, in order.
inline constexpr const char* kSweepCsvHeader =
    "schedule_kind,s_i,s_f,t0,tf,mae_pruned,size_pruned_gz,mae_sparse,size_sparse_gz,"
    "mae_quant,size_quant_gz,achieved_sparsity,baseline_mae";

/// Full per-run record: sweep.csv columns plus seed, raw sizes, status and timing.
inline constexpr const char* kRunsCsvHeader =
    "schedule_kind,s_i,s_f,t0,tf,seed,mae_pruned,size_pruned_raw,size_pruned_gz,mae_sparse,"
    "size_sparse_raw,size_sparse_gz,mae_quant,size_quant_raw,size_quant_gz,achieved_sparsity,"
    "baseline_mae,wall_seconds,status,error";

std::string sweep_csv(const std::vector<ExperimentResult>& results);
std::string runs_csv(const std::vector<ExperimentResult>& results);

/// Parses runs.csv back into results (tables only: no curves or traces).
std::vector<ExperimentResult> parse_runs_csv(const std::string& text);

struct BestRows {
    ScheduleKind kind;
    std::size_t best_accuracy;  // index into results
    std::size_t best_size;
};

/// Per schedule kind present: best accuracy = min mae_pruned (ties: smaller
/// size_sparse_gz, then earlier row); best size = min size_sparse_gz (ties:
/// smaller mae_pruned, then earlier row). Failed runs are ignored.
std::vector<BestRows> select_best(const std::vector<ExperimentResult>& results);

/// Markdown report: best-model table, non-compressed size table, failures.
/// Throws UsageError on empty input.
std::string report_markdown(const std::vector<ExperimentResult>& results);

/// Plain-text rendering of the best rows for terminal output.
std::string best_rows_text(const std::vector<ExperimentResult>& results);

enum class CurveAxis { sparsity, start_epoch, end_epoch, validation, variant_trace, model_trace };

const char* curve_file_name(CurveAxis axis);

/// CSV for one figure analog. Throws UsageError naming the axis when the
/// results do not cover it.
///
///   fig_sparsity.csv   per kind and s_f at the full window (min t0, max tf)
///   fig_t0.csv         per kind, s_f = min, tf = max, every t0
///   fig_tf.csv         per kind, s_f = min, t0 = min, every tf
///   fig_validation.csv validation MAE per epoch for each kind's best-accuracy
///                      and best-size runs
///   fig_trace_variants.csv  true vs pruned/sparse/quantized outputs of the
///                      overall best-accuracy run
///   fig_trace_models.csv    true vs baseline/best/worst pruned outputs
std::string emit_curve(const std::vector<ExperimentResult>& results, CurveAxis axis);

/// Every axis the results cover, as (file name, contents).
std::vector<std::pair<std::string, std::string>> emit_curves(const std::vector<ExperimentResult>& results,
                                                             std::vector<std::string>* skipped = nullptr);

// Shortest round-trip decimal text.
std::string format_double(double v);
std::string format_float(float v);

}  // namespace prunekit
