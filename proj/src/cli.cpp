#include "prunekit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include "prunekit/config.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/experiment.hpp"
#include "prunekit/model_io.hpp"
#include "prunekit/report.hpp"

namespace prunekit {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string in;
    std::optional<std::uint64_t> seed;
    unsigned parallelism = 1;
    std::string artifact_a, artifact_b;
};

fs::path output_dir(const Options& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("PRUNEKIT_OUT"); env && *env) return env;
    return "prunekit-out";
}

bool explicit_output(const Options& o) {
    const char* env = std::getenv("PRUNEKIT_OUT");
    return !o.out.empty() || (env && *env);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& p, const std::string& s) { write_text_atomic(p, s); }

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

ConfigFile read_config(const Options& o) {
    ConfigFile cfg = load_config(o.config);
    if (o.seed) cfg.experiment.seed = *o.seed;
    return cfg;
}

int cmd_train(const Options& o, std::ostream& out) {
    const ConfigFile cfg = read_config(o);
    validate(cfg.experiment);
    const fs::path dir = output_dir(o);
    out << "seed: " << cfg.experiment.seed << "\n";

    ExperimentArtifacts artifacts;
    const ExperimentResult r = run_experiment(cfg.experiment, &artifacts);

    // Everything is computed before the first write; each file lands via rename.
    ensure_dir(dir);
    const std::pair<const char*, const ModelArtifact*> files[] = {
        {"pruned.pmk", &artifacts.pruned}, {"sparse.pmk", &artifacts.sparse}, {"quant.pmk", &artifacts.quantized}};
    for (const auto& [name, a] : files) {
        write_file_atomic(dir / name, a->payload);
        write_file_atomic(dir / (std::string(name) + ".gz"), gzip_compress(a->payload));
    }
    write_text(dir / "result.csv", runs_csv({r}));

    const auto& s = r.config.schedule;
    out << "schedule: " << to_string(s.kind) << " s_i=" << format_double(s.s_i)
        << " s_f=" << format_double(s.final_sparsity()) << " t0=" << s.t0 << " tf=" << s.tf << "\n"
        << "baseline MAE: " << fixed(r.baseline_mae, 6) << "\n"
        << "achieved sparsity: " << fixed(r.achieved_sparsity, 4) << "\n";
    const std::pair<const char*, const VariantMetrics*> rows[] = {
        {"pruned", &r.pruned}, {"sparse", &r.sparse}, {"quantized", &r.quantized}};
    for (const auto& [name, m] : rows)
        out << std::left << std::setw(10) << name << " MAE " << fixed(m->test_mae, 6) << "  raw " << m->raw_size
            << " B  gzip " << m->gzip_size << " B\n";
    out << "wrote " << dir.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const ConfigFile cfg = read_config(o);
    const fs::path dir = output_dir(o);
    out << "seed: " << cfg.experiment.seed << "\n";
    const auto points = enumerate_grid(cfg.grid, cfg.experiment.hp.epochs);
    if (points.empty()) throw UsageError("sweep grid has no valid points (need t0 < tf <= epochs)");
    out << "grid points: " << points.size() << ", parallelism: " << o.parallelism << "\n";

    SweepOptions opts;
    opts.parallelism = o.parallelism;
    opts.on_result = [&err](const ExperimentResult& r, std::size_t done, std::size_t total) {
        const auto& s = r.config.schedule;
        err << "[" << done << "/" << total << "] " << to_string(s.kind) << " s_f=" << format_double(s.final_sparsity())
            << " t0=" << s.t0 << " tf=" << s.tf << (r.ok ? " ok" : " FAILED: " + r.error) << "\n";
    };
    const auto results = run_sweep(cfg.grid, cfg.experiment, opts);

    ensure_dir(dir);
    write_text(dir / "sweep.csv", sweep_csv(results));
    write_text(dir / "runs.csv", runs_csv(results));
    write_text(dir / "report.md", report_markdown(results));
    std::vector<std::string> skipped;
    for (const auto& [name, text] : emit_curves(results, &skipped)) write_text(dir / name, text);
    for (const auto& s : skipped) err << "skipped " << s << "\n";

    out << best_rows_text(results);
    out << "wrote " << dir.string() << "\n";
    const bool failed = std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.ok; });
    return failed ? kExitPartial : kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    const fs::path in = o.in;
    const Bytes raw = read_file(in / "runs.csv");
    const auto results = parse_runs_csv(std::string(raw.begin(), raw.end()));
    if (results.empty()) throw UsageError("runs.csv has no rows");
    const fs::path dir = o.out.empty() ? in : fs::path(o.out);
    ensure_dir(dir);
    write_text(dir / "report.md", report_markdown(results));
    write_text(dir / "sweep.csv", sweep_csv(results));
    if (o.seed) out << "seed: " << *o.seed << "\n";
    out << best_rows_text(results) << "wrote " << dir.string() << "\n";
    return kExitOk;
}

int cmd_inspect(const Options& o, std::ostream& out) {
    const Bytes bytes = read_file(o.artifact_a);
    const ArtifactInfo info = inspect(bytes);
    if (o.seed) out << "seed: " << *o.seed << "\n";
    out << "file: " << o.artifact_a << "\n"
        << "variant: " << to_string(info.variant) << "\n"
        << "raw size: " << info.raw_size << " B\n"
        << "gzip size: " << info.gzip_size << " B\n"
        << "global sparsity: " << fixed(info.global_zero_fraction(), 4) << "\n"
        << "layers:\n";
    for (const auto& l : info.layers) {
        out << "  " << std::left << std::setw(10) << l.name << " " << std::setw(10) << to_string(l.dtype) << " "
            << shape_string(l.shape) << " " << to_string(l.activation) << (l.prunable ? " prunable" : " fixed")
            << " zeros " << fixed(l.zero_fraction, 4);
        if (l.dtype == DType::q8) out << " scale " << format_float(l.scale) << " zero_point " << l.zero_point;
        out << "\n";
    }
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const ConfigFile cfg = read_config(o);
    validate(cfg.experiment.dataset, 1);
    const Model a = load_as_model(read_file(o.artifact_a));
    const Model b = load_as_model(read_file(o.artifact_b));
    const auto& ds = cfg.experiment.dataset;
    if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
        throw UsageError("artifacts have incompatible shapes: " + std::to_string(a.in_dim()) + "->" +
                         std::to_string(a.out_dim()) + " vs " + std::to_string(b.in_dim()) + "->" +
                         std::to_string(b.out_dim()));
    if (a.in_dim() != ds.in_dim || a.out_dim() != ds.out_dim)
        throw UsageError("artifacts do not match the dataset dimensions " + std::to_string(ds.in_dim) + "->" +
                         std::to_string(ds.out_dim));
    const std::size_t samples = std::min<std::size_t>(cfg.experiment.trace_samples, ds.n_test);
    const std::size_t col = cfg.experiment.trace_output;
    if (col >= ds.out_dim) throw ConfigError("trace.output must index a model output");

    const TrainingData data = make_dataset(ds);
    const Tensor pa = forward(a, data.test.x);
    const Tensor pb = forward(b, data.test.x);
    out << "seed: " << cfg.experiment.seed << " (dataset seed " << ds.seed << ")\n"
        << "A " << o.artifact_a << " test MAE " << fixed(mae(pa, data.test.y), 6) << "\n"
        << "B " << o.artifact_b << " test MAE " << fixed(mae(pb, data.test.y), 6) << "\n";

    std::ostringstream csv;
    csv << "sample,true,a,b,diff\n";
    float max_diff = 0.0f;
    for (std::size_t i = 0; i < samples; ++i) {
        const float diff = pb.at(i, col) - pa.at(i, col);
        max_diff = std::max(max_diff, std::fabs(diff));
        csv << i << ',' << format_float(data.test.y.at(i, col)) << ',' << format_float(pa.at(i, col)) << ','
            << format_float(pb.at(i, col)) << ',' << format_float(diff) << "\n";
    }
    out << "max |B - A| over trace: " << format_float(max_diff) << "\n" << csv.str();
    if (explicit_output(o)) {
        const fs::path dir = output_dir(o);
        ensure_dir(dir);
        write_text(dir / "compare_trace.csv", csv.str());
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"prunekit: magnitude pruning, compression and sweep harness", "prunekit"};
    app.require_subcommand(1);
    Options o;
    auto add_seed = [&o](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Override the run seed");
    };

    auto* train = app.add_subcommand("train", "Train one pruned model and write its three artifacts");
    train->add_option("--config", o.config, "Experiment config file")->required();
    train->add_option("--out", o.out, "Output directory");
    add_seed(train);

    auto* sweep = app.add_subcommand("sweep", "Run the pruning-parameter grid");
    sweep->add_option("--config", o.config, "Experiment + grid config file")->required();
    sweep->add_option("--out", o.out, "Output directory");
    sweep->add_option("--parallelism,-j", o.parallelism, "Worker threads")->check(CLI::Range(1u, 256u));
    add_seed(sweep);

    auto* report = app.add_subcommand("report", "Rebuild report.md and sweep.csv from runs.csv");
    report->add_option("--in", o.in, "Directory holding runs.csv")->required();
    report->add_option("--out", o.out, "Output directory (defaults to --in)");
    add_seed(report);

    auto* inspect_cmd = app.add_subcommand("inspect", "Describe a .pmk artifact");
    inspect_cmd->add_option("artifact", o.artifact_a, "Path to .pmk file")->required();
    add_seed(inspect_cmd);

    auto* compare = app.add_subcommand("compare", "Compare two artifacts on the test split");
    compare->add_option("a", o.artifact_a, "First .pmk file")->required();
    compare->add_option("b", o.artifact_b, "Second .pmk file")->required();
    compare->add_option("--config", o.config, "Config file describing the dataset")->required();
    compare->add_option("--out", o.out, "Directory for compare_trace.csv");
    add_seed(compare);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train) return cmd_train(o, out);
        if (*sweep) return cmd_sweep(o, out, err);
        if (*report) return cmd_report(o, out);
        if (*inspect_cmd) return cmd_inspect(o, out);
        if (*compare) return cmd_compare(o, out);
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace prunekit
