#include "prunekit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "prunekit/errors.hpp"

namespace prunekit {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string format_float(float v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw UsageError("unterminated quoted CSV field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

double parse_number(const std::string& s, const std::string& column) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw UsageError("column " + column + ": '" + s + "' is not a number");
    return v;
}

std::string mae_or_empty(const ExperimentResult& r, double v) { return r.ok ? format_double(v) : ""; }
std::string size_or_empty(const ExperimentResult& r, std::size_t v) { return r.ok ? std::to_string(v) : ""; }

std::string kb(std::size_t bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(bytes) / 1024.0);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    out << kSweepCsvHeader << "\n";
    for (const auto& r : results) {
        const auto& s = r.config.schedule;
        out << to_string(s.kind) << ',' << format_double(s.kind == ScheduleKind::constant ? 0.0 : s.s_i) << ','
            << format_double(s.final_sparsity()) << ',' << s.t0 << ',' << s.tf << ','
            << mae_or_empty(r, r.pruned.test_mae) << ',' << size_or_empty(r, r.pruned.gzip_size) << ','
            << mae_or_empty(r, r.sparse.test_mae) << ',' << size_or_empty(r, r.sparse.gzip_size) << ','
            << mae_or_empty(r, r.quantized.test_mae) << ',' << size_or_empty(r, r.quantized.gzip_size) << ','
            << mae_or_empty(r, r.achieved_sparsity) << ',' << mae_or_empty(r, r.baseline_mae) << "\n";
    }
    return out.str();
}

std::string runs_csv(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    out << kRunsCsvHeader << "\n";
    for (const auto& r : results) {
        const auto& s = r.config.schedule;
        out << to_string(s.kind) << ',' << format_double(s.kind == ScheduleKind::constant ? 0.0 : s.s_i) << ','
            << format_double(s.final_sparsity()) << ',' << s.t0 << ',' << s.tf << ',' << r.config.seed << ','
            << mae_or_empty(r, r.pruned.test_mae) << ',' << size_or_empty(r, r.pruned.raw_size) << ','
            << size_or_empty(r, r.pruned.gzip_size) << ',' << mae_or_empty(r, r.sparse.test_mae) << ','
            << size_or_empty(r, r.sparse.raw_size) << ',' << size_or_empty(r, r.sparse.gzip_size) << ','
            << mae_or_empty(r, r.quantized.test_mae) << ',' << size_or_empty(r, r.quantized.raw_size) << ','
            << size_or_empty(r, r.quantized.gzip_size) << ',' << mae_or_empty(r, r.achieved_sparsity) << ','
            << mae_or_empty(r, r.baseline_mae) << ',' << fixed(r.wall_seconds, 3) << ','
            << (r.ok ? "ok" : "failed") << ',' << csv_field(r.error) << "\n";
    }
    return out.str();
}

std::vector<ExperimentResult> parse_runs_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw UsageError("runs CSV is empty");
    std::vector<std::string> header;
    {
        std::istringstream h(kRunsCsvHeader);
        for (std::string col; std::getline(h, col, ',');) header.push_back(col);
    }
    if (rows[0] != header) throw UsageError("runs CSV header does not match the expected columns");
    std::vector<ExperimentResult> results;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i];
        if (f.size() != header.size())
            throw UsageError("runs CSV row " + std::to_string(i + 1) + " has " + std::to_string(f.size()) +
                             " fields, expected " + std::to_string(header.size()));
        auto num = [&](std::size_t c) { return parse_number(f[c], header[c]); };
        auto size = [&](std::size_t c) { return f[c].empty() ? std::size_t{0} : static_cast<std::size_t>(num(c)); };
        auto val = [&](std::size_t c) { return f[c].empty() ? 0.0 : num(c); };
        ExperimentResult r;
        const ScheduleKind kind = parse_schedule_kind(f[0]);
        r.config.schedule = kind == ScheduleKind::constant
                                ? PruningSchedule::constant(num(2), static_cast<int>(num(3)), static_cast<int>(num(4)))
                                : PruningSchedule::dynamic(num(1), num(2), static_cast<int>(num(3)),
                                                           static_cast<int>(num(4)));
        r.config.seed = std::stoull(f[5]);
        r.pruned = {val(6), size(7), size(8)};
        r.sparse = {val(9), size(10), size(11)};
        r.quantized = {val(12), size(13), size(14)};
        r.achieved_sparsity = val(15);
        r.baseline_mae = val(16);
        r.wall_seconds = num(17);
        if (f[18] != "ok" && f[18] != "failed") throw UsageError("runs CSV row " + std::to_string(i + 1) + ": bad status");
        r.ok = f[18] == "ok";
        r.error = f[19];
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<BestRows> select_best(const std::vector<ExperimentResult>& results) {
    std::vector<BestRows> out;
    for (ScheduleKind kind : {ScheduleKind::dynamic, ScheduleKind::constant}) {
        std::optional<std::size_t> acc, size;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            if (!r.ok || r.config.schedule.kind != kind) continue;
            if (!acc) {
                acc = size = i;
                continue;
            }
            const auto& a = results[*acc];
            if (r.pruned.test_mae < a.pruned.test_mae ||
                (r.pruned.test_mae == a.pruned.test_mae && r.sparse.gzip_size < a.sparse.gzip_size))
                acc = i;
            const auto& s = results[*size];
            if (r.sparse.gzip_size < s.sparse.gzip_size ||
                (r.sparse.gzip_size == s.sparse.gzip_size && r.pruned.test_mae < s.pruned.test_mae))
                size = i;
        }
        if (acc) out.push_back({kind, *acc, *size});
    }
    return out;
}

namespace {

std::string kind_title(ScheduleKind k) { return k == ScheduleKind::constant ? "Constant" : "Dynamic"; }

void best_row(std::ostringstream& out, const std::string& label, const ExperimentResult& r) {
    const auto& s = r.config.schedule;
    out << "| " << label << " | " << fixed(s.kind == ScheduleKind::constant ? 0.0 : s.s_i, 2) << " | "
        << fixed(s.final_sparsity(), 3) << " | " << s.t0 << " | " << s.tf << " | " << fixed(r.pruned.test_mae, 4)
        << " | " << kb(r.pruned.gzip_size) << " | " << fixed(r.sparse.test_mae, 4) << " | " << kb(r.sparse.gzip_size)
        << " | " << fixed(r.quantized.test_mae, 4) << " | " << kb(r.quantized.gzip_size) << " |\n";
}

}  // namespace

std::string report_markdown(const std::vector<ExperimentResult>& results) {
    if (results.empty()) throw UsageError("no results to report");
    std::ostringstream out;
    out << "# Pruning sweep report\n\n";
    std::size_t ok = 0;
    double baseline_sum = 0.0;
    for (const auto& r : results)
        if (r.ok) {
            ++ok;
            baseline_sum += r.baseline_mae;
        }
    out << "Runs: " << results.size() << " (" << ok << " succeeded, " << results.size() - ok << " failed)\n\n";
    if (ok) out << "Mean unpruned baseline MAE: " << fixed(baseline_sum / static_cast<double>(ok), 4) << "\n\n";

    out << "## Best models\n\n"
        << "Sizes are gzip-compressed, in KiB. Pruned = dense float32 artifact, post-pruned = sparse-encoded "
           "artifact, post-quantized = 8-bit artifact.\n\n"
        << "| Model | Initial sparsity | Final sparsity | Start epoch | End epoch | Pruned MAE | Pruned size "
           "| Post-pruned MAE | Post-pruned size | Post-quantized MAE | Post-quantized size |\n"
        << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& b : select_best(results)) {
        best_row(out, kind_title(b.kind) + " (best accuracy)", results[b.best_accuracy]);
        best_row(out, kind_title(b.kind) + " (best model size)", results[b.best_size]);
    }

    out << "\n## Non-compressed model sizes\n\n"
        << "Raw artifact sizes in bytes (min-max over runs).\n\n"
        << "| Schedule | Pruned | Post-pruned | Post-quantized |\n|---|---|---|---|\n";
    for (ScheduleKind kind : {ScheduleKind::dynamic, ScheduleKind::constant}) {
        std::size_t lo[3] = {SIZE_MAX, SIZE_MAX, SIZE_MAX}, hi[3] = {0, 0, 0};
        bool any = false;
        for (const auto& r : results) {
            if (!r.ok || r.config.schedule.kind != kind) continue;
            any = true;
            const std::size_t v[3] = {r.pruned.raw_size, r.sparse.raw_size, r.quantized.raw_size};
            for (int i = 0; i < 3; ++i) {
                lo[i] = std::min(lo[i], v[i]);
                hi[i] = std::max(hi[i], v[i]);
            }
        }
        if (!any) continue;
        out << "| " << kind_title(kind);
        for (int i = 0; i < 3; ++i)
            out << " | " << (lo[i] == hi[i] ? std::to_string(lo[i]) : std::to_string(lo[i]) + "-" + std::to_string(hi[i]));
        out << " |\n";
    }

    if (ok != results.size()) {
        out << "\n## Failed runs\n\n";
        for (const auto& r : results) {
            if (r.ok) continue;
            const auto& s = r.config.schedule;
            out << "- " << to_string(s.kind) << " s_f=" << format_double(s.final_sparsity()) << " t0=" << s.t0
                << " tf=" << s.tf << ": " << r.error << "\n";
        }
    }
    return out.str();
}

std::string best_rows_text(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    for (const auto& b : select_best(results)) {
        for (auto [label, idx] : {std::pair{"best accuracy", b.best_accuracy}, std::pair{"best size", b.best_size}}) {
            const auto& r = results[idx];
            const auto& s = r.config.schedule;
            out << kind_title(b.kind) << " (" << label << "): s_i=" << fixed(s.kind == ScheduleKind::constant ? 0.0 : s.s_i, 2)
                << " s_f=" << fixed(s.final_sparsity(), 3) << " t0=" << s.t0 << " tf=" << s.tf
                << " | pruned MAE " << fixed(r.pruned.test_mae, 4) << " " << kb(r.pruned.gzip_size) << " KiB"
                << " | post-pruned MAE " << fixed(r.sparse.test_mae, 4) << " " << kb(r.sparse.gzip_size) << " KiB"
                << " | quantized MAE " << fixed(r.quantized.test_mae, 4) << " " << kb(r.quantized.gzip_size)
                << " KiB\n";
        }
    }
    return out.str();
}

const char* curve_file_name(CurveAxis axis) {
    switch (axis) {
        case CurveAxis::sparsity: return "fig_sparsity.csv";
        case CurveAxis::start_epoch: return "fig_t0.csv";
        case CurveAxis::end_epoch: return "fig_tf.csv";
        case CurveAxis::validation: return "fig_validation.csv";
        case CurveAxis::variant_trace: return "fig_trace_variants.csv";
        case CurveAxis::model_trace: return "fig_trace_models.csv";
    }
    return "";
}

namespace {

const char* axis_name(CurveAxis axis) {
    switch (axis) {
        case CurveAxis::sparsity: return "final sparsity";
        case CurveAxis::start_epoch: return "start epoch (t0)";
        case CurveAxis::end_epoch: return "end epoch (tf)";
        case CurveAxis::validation: return "validation curve";
        case CurveAxis::variant_trace: return "variant prediction trace";
        case CurveAxis::model_trace: return "model prediction trace";
    }
    return "";
}

constexpr const char* kPointColumns =
    "schedule_kind,s_i,s_f,t0,tf,mae_pruned,mae_sparse,mae_quant,size_pruned_gz,size_sparse_gz,size_quant_gz,"
    "achieved_sparsity";

void point_row(std::ostringstream& out, const ExperimentResult& r) {
    const auto& s = r.config.schedule;
    out << to_string(s.kind) << ',' << format_double(s.kind == ScheduleKind::constant ? 0.0 : s.s_i) << ','
        << format_double(s.final_sparsity()) << ',' << s.t0 << ',' << s.tf << ',' << format_double(r.pruned.test_mae)
        << ',' << format_double(r.sparse.test_mae) << ',' << format_double(r.quantized.test_mae) << ','
        << r.pruned.gzip_size << ',' << r.sparse.gzip_size << ',' << r.quantized.gzip_size << ','
        << format_double(r.achieved_sparsity) << "\n";
}

// Successful runs of one kind, s_i = 0 (dynamic) so the axis plots vary one parameter.
std::vector<const ExperimentResult*> runs_of(const std::vector<ExperimentResult>& results, ScheduleKind kind) {
    std::vector<const ExperimentResult*> v;
    double s_i = std::numeric_limits<double>::infinity();
    for (const auto& r : results)
        if (r.ok && r.config.schedule.kind == kind) s_i = std::min(s_i, r.config.schedule.s_i);
    for (const auto& r : results)
        if (r.ok && r.config.schedule.kind == kind && (kind == ScheduleKind::constant || r.config.schedule.s_i == s_i))
            v.push_back(&r);
    return v;
}

std::string parameter_axis(const std::vector<ExperimentResult>& results, CurveAxis axis) {
    std::ostringstream out;
    out << kPointColumns << "\n";
    std::size_t rows = 0;
    for (ScheduleKind kind : {ScheduleKind::dynamic, ScheduleKind::constant}) {
        const auto runs = runs_of(results, kind);
        if (runs.empty()) continue;
        int min_t0 = INT32_MAX, max_tf = INT32_MIN;
        double min_sf = std::numeric_limits<double>::infinity();
        std::set<double> sfs;
        for (const auto* r : runs) {
            min_t0 = std::min(min_t0, r->config.schedule.t0);
            max_tf = std::max(max_tf, r->config.schedule.tf);
            min_sf = std::min(min_sf, r->config.schedule.final_sparsity());
        }
        std::vector<const ExperimentResult*> picked;
        for (const auto* r : runs) {
            const auto& s = r->config.schedule;
            bool take = false;
            switch (axis) {
                case CurveAxis::sparsity: take = s.t0 == min_t0 && s.tf == max_tf; break;
                case CurveAxis::start_epoch: take = s.final_sparsity() == min_sf && s.tf == max_tf; break;
                case CurveAxis::end_epoch: take = s.final_sparsity() == min_sf && s.t0 == min_t0; break;
                default: break;
            }
            if (take) picked.push_back(r);
        }
        for (const auto* r : picked) point_row(out, *r);
        rows += picked.size();
    }
    if (rows < 2) throw UsageError(std::string("results do not cover the ") + axis_name(axis) + " axis");
    return out.str();
}

const ExperimentResult* overall(const std::vector<ExperimentResult>& results, bool best) {
    const ExperimentResult* pick = nullptr;
    for (const auto& r : results) {
        if (!r.ok || r.trace_true.empty()) continue;
        if (!pick || (best ? r.pruned.test_mae < pick->pruned.test_mae : r.pruned.test_mae > pick->pruned.test_mae))
            pick = &r;
    }
    return pick;
}

}  // namespace

std::string emit_curve(const std::vector<ExperimentResult>& results, CurveAxis axis) {
    switch (axis) {
        case CurveAxis::sparsity:
        case CurveAxis::start_epoch:
        case CurveAxis::end_epoch:
            return parameter_axis(results, axis);
        case CurveAxis::validation: {
            std::ostringstream out;
            out << "run,schedule_kind,s_i,s_f,t0,tf,epoch,val_mae,sparsity\n";
            std::size_t rows = 0;
            for (const auto& b : select_best(results)) {
                for (auto [label, idx] : {std::pair{"best_accuracy", b.best_accuracy}, std::pair{"best_size", b.best_size}}) {
                    const auto& r = results[idx];
                    const auto& s = r.config.schedule;
                    for (std::size_t e = 0; e < r.val_curve.size(); ++e) {
                        out << label << ',' << to_string(s.kind) << ','
                            << format_double(s.kind == ScheduleKind::constant ? 0.0 : s.s_i) << ','
                            << format_double(s.final_sparsity()) << ',' << s.t0 << ',' << s.tf << ',' << e << ','
                            << format_double(r.val_curve[e]) << ','
                            << (e < r.sparsity_curve.size() ? format_double(r.sparsity_curve[e]) : "") << "\n";
                        ++rows;
                    }
                }
            }
            if (!rows) throw UsageError(std::string("results do not cover the ") + axis_name(axis) + " axis");
            return out.str();
        }
        case CurveAxis::variant_trace: {
            const ExperimentResult* best = overall(results, true);
            if (!best) throw UsageError(std::string("results do not cover the ") + axis_name(axis) + " axis");
            std::ostringstream out;
            out << "sample,true,pruned,sparse,quantized\n";
            for (std::size_t i = 0; i < best->trace_true.size(); ++i)
                out << i << ',' << format_double(best->trace_true[i]) << ',' << format_double(best->trace_pruned[i])
                    << ',' << format_double(best->trace_sparse[i]) << ',' << format_double(best->trace_quantized[i])
                    << "\n";
            return out.str();
        }
        case CurveAxis::model_trace: {
            const ExperimentResult* best = overall(results, true);
            const ExperimentResult* worst = overall(results, false);
            if (!best) throw UsageError(std::string("results do not cover the ") + axis_name(axis) + " axis");
            std::ostringstream out;
            out << "sample,true,baseline,best,worst\n";
            for (std::size_t i = 0; i < best->trace_true.size(); ++i)
                out << i << ',' << format_double(best->trace_true[i]) << ',' << format_double(best->trace_baseline[i])
                    << ',' << format_double(best->trace_pruned[i]) << ',' << format_double(worst->trace_pruned[i])
                    << "\n";
            return out.str();
        }
    }
    throw UsageError("unknown curve axis");
}

std::vector<std::pair<std::string, std::string>> emit_curves(const std::vector<ExperimentResult>& results,
                                                             std::vector<std::string>* skipped) {
    std::vector<std::pair<std::string, std::string>> files;
    for (CurveAxis axis : {CurveAxis::sparsity, CurveAxis::start_epoch, CurveAxis::end_epoch, CurveAxis::validation,
                           CurveAxis::variant_trace, CurveAxis::model_trace}) {
        try {
            files.emplace_back(curve_file_name(axis), emit_curve(results, axis));
        } catch (const UsageError& e) {
            if (skipped) skipped->push_back(std::string(curve_file_name(axis)) + ": " + e.what());
        }
    }
    return files;
}

}  // namespace prunekit
