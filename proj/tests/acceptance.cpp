// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Progress goes to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "prunekit/dataset.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/experiment.hpp"
#include "prunekit/model_io.hpp"
#include "prunekit/pruning.hpp"
#include "prunekit/report.hpp"
#include "prunekit/rng.hpp"

using namespace prunekit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) detail << "[" << why << "] ";
        pass = pass && ok;
    }
};

std::map<int, std::pair<bool, std::string>> g_lines;

void record(int id, const std::string& title, Outcome& o) {
    g_lines[id] = {o.pass, title + ": " + o.detail.str()};
    std::cerr << (o.pass ? "PASS " : "FAIL ") << id << " " << title << ": " << o.detail.str() << std::endl;
}

// Every experiment run by the suite, for the cross-run identities.
std::vector<ExperimentResult> g_all_runs;

// ---------------------------------------------------------------------------

void schedule_closed_form() {
    Outcome o;
    const auto start = Clock::now();
    Lcg64 r(1001);
    double worst = 0.0;
    bool endpoints = true;
    for (int i = 0; i < 1000; ++i) {
        double a = r.uniform(), b = r.uniform();
        if (a > b) std::swap(a, b);
        const int t0 = static_cast<int>(r.below(100));
        const int tf = t0 + 1 + static_cast<int>(r.below(100));
        const auto s = PruningSchedule::dynamic(a, b, t0, tf);
        const int t = static_cast<int>(r.below(static_cast<std::uint64_t>(tf + 20)));
        worst = std::max(worst, std::fabs(schedule_sparsity(s, t) - oracle::dynamic_sparsity(a, b, t0, tf, t)));
        endpoints = endpoints && schedule_sparsity(s, t0) == a && schedule_sparsity(s, tf) == b;
    }
    const double secs = seconds_since(start);
    o.require(worst <= 1e-12, "closed form");
    o.require(endpoints, "endpoints");
    o.require(secs < 1.0, "runtime");
    o.detail << "1000 schedules, max |diff| " << worst << ", endpoints exact " << (endpoints ? "yes" : "no") << ", "
             << secs << " s";
    record(1, "schedule closed form", o);
}

void mask_oracle() {
    Outcome o;
    const auto start = Clock::now();
    Lcg64 r(2002);
    int mismatched = 0, bad_count = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + r.below(10000);
        Tensor w({n});
        const int style = static_cast<int>(r.below(3));
        for (float& v : w.values()) {
            if (style == 0) v = static_cast<float>(r.normal());
            else if (style == 1) v = static_cast<float>(static_cast<int>(r.below(11)) - 5) * 0.125f;  // heavy ties
            else v = r.below(4) == 0 ? 0.0f : static_cast<float>(r.uniform(-1, 1));
        }
        const double s = i % 50 == 0 ? 0.0 : i % 50 == 1 ? 1.0 : r.uniform();
        const Tensor m = compute_mask(w, s);
        const auto ref = oracle::brute_force_mask({w.values().begin(), w.values().end()}, s);
        std::size_t zeros = 0;
        bool same = true;
        for (std::size_t k = 0; k < n; ++k) {
            same = same && static_cast<int>(m[k]) == ref[k];
            zeros += m[k] == 0.0f;
        }
        mismatched += !same;
        bad_count += zeros != static_cast<std::size_t>(std::ceil(s * static_cast<double>(n)));
    }
    const double secs = seconds_since(start);
    o.require(mismatched == 0, "kept set");
    o.require(bad_count == 0, "zero count");
    o.require(secs < 10.0, "runtime");
    o.detail << "500 tensors, kept-set mismatches " << mismatched << ", zero-count mismatches " << bad_count << ", "
             << secs << " s";
    record(2, "mask oracle", o);
}

void gradient_check() {
    Outcome o;
    const auto start = Clock::now();
    Lcg64 r(3003);
    constexpr double h = 1e-3;
    // Below this magnitude float32 accumulation noise (~1e-8) dominates, so
    // relative error is measured against it instead.
    constexpr double kGradFloor = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    for (int model = 0; model < 50; ++model) {
        const std::size_t in = 1 + r.below(8);
        std::vector<std::size_t> hidden;
        for (std::size_t i = 0, n = 1 + r.below(2); i < n; ++i) hidden.push_back(2 + r.below(10));
        const std::size_t out = 1 + r.below(4);
        Model m = init_model(mlp_specs(in, hidden, out), r.next_u64());
        for (auto& l : m.layers)
            for (float& b : l.bias.values()) b = static_cast<float>(r.uniform(-0.1, 0.1));
        const std::size_t batch = 1 + r.below(8);
        Tensor x({batch, in}), y({batch, out});
        for (float& v : x.values()) v = static_cast<float>(r.uniform(-1, 1));
        for (float& v : y.values()) v = static_cast<float>(r.uniform(-1, 1));

        const auto ref = oracle::to_ref(m);
        const auto base = oracle::evaluate(ref, x, y);
        const Gradients g = backward(m, x, y);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            for (int which = 0; which < 2; ++which) {
                const std::size_t n = which == 0 ? ref[k].w.size() : ref[k].b.size();
                for (std::size_t i = 0; i < n; ++i) {
                    auto plus = ref, minus = ref;
                    (which == 0 ? plus[k].w : plus[k].b)[i] += h;
                    (which == 0 ? minus[k].w : minus[k].b)[i] -= h;
                    const auto ep = oracle::evaluate(plus, x, y);
                    const auto em = oracle::evaluate(minus, x, y);
                    // Near a kink the loss is not differentiable over [-h, h].
                    if (ep.pattern != base.pattern || em.pattern != base.pattern) {
                        ++skipped;
                        continue;
                    }
                    const double numeric = (ep.loss - em.loss) / (2 * h);
                    const double analytic = which == 0 ? g.weight[k][i] : g.bias[k][i];
                    const double denom = std::max({std::fabs(numeric), std::fabs(analytic), kGradFloor});
                    worst = std::max(worst, std::fabs(numeric - analytic) / denom);
                    ++checked;
                }
            }
        }
    }
    const double secs = seconds_since(start);
    o.require(worst <= 1e-3, "relative error");
    o.require(checked > 10 * skipped, "too many kink exclusions");
    o.require(secs < 30.0, "runtime");
    o.detail << "50 models, " << checked << " parameters checked (" << skipped << " near kinks excluded), max rel err "
             << worst << ", " << secs << " s";
    record(3, "gradient check", o);
}

// ---------------------------------------------------------------------------

ExperimentConfig default_config() { return ExperimentConfig{}; }

const ExperimentResult& remember(ExperimentResult r) {
    if (!r.ok) std::cerr << "run failed: " << r.error << std::endl;
    g_all_runs.push_back(std::move(r));
    return g_all_runs.back();
}

struct DefaultRuns {
    std::map<double, ExperimentResult> by_sf;  // tf = 60
    ExperimentResult tf80;
    double seconds_sf = 0.0;
};

DefaultRuns default_runs() {
    DefaultRuns d;
    const TrainingData data = make_dataset(default_config().dataset);
    const auto start = Clock::now();
    for (double sf : {0.5, 0.75, 0.875}) {
        ExperimentConfig c = default_config();
        c.schedule = PruningSchedule::dynamic(0.0, sf, 0, 60);
        std::cerr << "default run s_f=" << sf << "..." << std::endl;
        d.by_sf[sf] = remember(run_experiment(c, nullptr, &data));
    }
    d.seconds_sf = seconds_since(start);
    ExperimentConfig c = default_config();
    c.schedule = PruningSchedule::dynamic(0.0, 0.5, 0, 80);
    std::cerr << "default run tf=80..." << std::endl;
    d.tf80 = remember(run_experiment(c, nullptr, &data));
    return d;
}

void trend(const DefaultRuns& d) {
    Outcome o;
    const auto& a = d.by_sf.at(0.5);
    const auto& b = d.by_sf.at(0.75);
    const auto& c = d.by_sf.at(0.875);
    o.require(a.ok && b.ok && c.ok, "runs failed");
    o.require(a.pruned.gzip_size > b.pruned.gzip_size && b.pruned.gzip_size > c.pruned.gzip_size, "gzip decreasing");
    o.require(c.pruned.test_mae >= a.pruned.test_mae, "MAE at 0.875 >= MAE at 0.5");
    o.require(d.seconds_sf <= 600.0, "runtime");
    o.detail << "gzip " << a.pruned.gzip_size << " > " << b.pruned.gzip_size << " > " << c.pruned.gzip_size
             << " B, MAE " << a.pruned.test_mae << " / " << b.pruned.test_mae << " / " << c.pruned.test_mae << ", "
             << d.seconds_sf << " s";
    record(5, "final sparsity trend", o);
}

void recovery_window(const DefaultRuns& d) {
    Outcome o;
    const auto& a = d.by_sf.at(0.5);
    o.require(a.ok && d.tf80.ok, "runs failed");
    o.require(a.pruned.test_mae <= d.tf80.pruned.test_mae, "MAE(tf=60) <= MAE(tf=80)");
    o.detail << "seed 42: MAE tf=60 " << a.pruned.test_mae << ", tf=80 " << d.tf80.pruned.test_mae;
    record(6, "recovery window", o);
}

// ---------------------------------------------------------------------------

void quantization(const DefaultRuns& d) {
    Outcome o;
    Lcg64 r(7007);
    double worst_excess = -1.0;
    bool zeros_exact = true;
    for (int i = 0; i < 200; ++i) {
        // Weight-scale tensors: |w| <= 1, random offset and spread, some exact zeros.
        Tensor t({1 + r.below(5000)});
        const double lo = -r.uniform(), hi = r.uniform();
        const bool shifted = i % 4 == 1;
        for (float& v : t.values()) v = static_cast<float>(shifted ? r.uniform(0.1, 1.0) : r.uniform(lo, hi));
        if (i % 3 == 0)
            for (std::size_t k = 0; k < t.size(); k += 3) t[k] = 0.0f;
        const QuantizedTensor q = quantize(t);
        const Tensor back = dequantize(q);
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double err = std::fabs(static_cast<double>(back[k]) - static_cast<double>(t[k]));
            worst_excess = std::max(worst_excess, err - (q.scale / 2.0 + 1e-7));
            if (t[k] == 0.0f) zeros_exact = zeros_exact && back[k] == 0.0f;
        }
    }
    o.require(worst_excess <= 0.0, "error bound");
    o.require(zeros_exact, "zero preservation");

    // Per default layer: a one-layer artifact holding just that layer.
    const Model m = init_model(default_config().layer_specs(), 5);
    double lo_ratio = 1.0, hi_ratio = 0.0;
    for (const auto& layer : m.layers) {
        Model single;
        single.layers.push_back(layer);
        single.layers[0].spec.activation = Activation::identity;
        const double dense = static_cast<double>(serialize_dense(single).size() - 8);
        const double quant = static_cast<double>(serialize_quantized(quantize(single)).size() - 8);
        lo_ratio = std::min(lo_ratio, quant / dense);
        hi_ratio = std::max(hi_ratio, quant / dense);
    }
    o.require(lo_ratio >= 0.24 && hi_ratio <= 0.30, "size ratio");

    const auto& run = d.by_sf.at(0.5);
    const double drift = std::fabs(run.quantized.test_mae - run.pruned.test_mae) / run.pruned.test_mae;
    o.require(run.ok && drift <= 0.10, "MAE drift");
    o.detail << "200 tensors, max (err - scale/2 - 1e-7) " << worst_excess << ", per-layer q8/dense raw ratio ["
             << lo_ratio << ", " << hi_ratio << "], default-config MAE drift " << drift * 100.0 << "%";
    record(7, "quantization bounds", o);
}

// ---------------------------------------------------------------------------

Model random_model(Lcg64& r, double sparsity) {
    const std::size_t in = 1 + r.below(24);
    std::vector<std::size_t> hidden;
    for (std::size_t i = 0, n = r.below(4); i < n; ++i) hidden.push_back(1 + r.below(40));
    auto specs = mlp_specs(in, hidden, 1 + r.below(5));
    for (auto& s : specs) s.prunable = r.below(5) != 0;
    Model m = init_model(specs, r.next_u64());
    for (auto& l : m.layers)
        for (float& b : l.bias.values()) b = static_cast<float>(r.normal() * 0.1);
    if (sparsity > 0.0) {
        MaskSet masks;
        for (const auto& l : m.layers) masks.masks[l.spec.name] = compute_mask(l.weight, sparsity);
        apply_masks_inplace(m, masks);
    }
    return m;
}

std::uint32_t rd32(const Bytes& b, std::size_t at) {
    return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 | std::uint32_t(b[at + 2]) << 16 |
           std::uint32_t(b[at + 3]) << 24;
}

void wr16(Bytes& b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<std::uint8_t>(v);
    b[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void wr32(Bytes& b, std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Field offsets of one layer record, found by walking the documented layout.
struct LayerOffsets {
    std::size_t start, flags, dtype, rank, dims, payload;
    std::size_t out, in;
    std::size_t payload_size;
};

std::vector<LayerOffsets> walk(const Bytes& b) {
    std::vector<LayerOffsets> layers;
    const std::size_t count = b[6] | b[7] << 8;
    std::size_t p = 8;
    for (std::size_t i = 0; i < count; ++i) {
        LayerOffsets l{};
        l.start = p;
        const std::size_t name_len = b[p] | b[p + 1] << 8;
        l.flags = p + 2 + name_len;
        l.dtype = l.flags + 1;
        l.rank = l.dtype + 1;
        l.dims = l.rank + 1;
        l.out = rd32(b, l.dims);
        l.in = rd32(b, l.dims + 4);
        l.payload = l.dims + 8;
        const std::size_t n = l.out * l.in;
        std::size_t size = 0;
        switch (b[l.dtype]) {
            case 0: size = 4 * n + 4 * l.out; break;
            case 1: {
                std::size_t set = 0;
                for (std::size_t k = 0; k < (n + 7) / 8; ++k) set += std::popcount(b[l.payload + k]);
                size = (n + 7) / 8 + 4 * set + 4 * l.out;
                break;
            }
            default: size = 5 + n + 5 + l.out; break;
        }
        l.payload_size = size;
        layers.push_back(l);
        p = l.payload + size;
    }
    return layers;
}

// A mutation that always leaves the file invalid.
Bytes structural_mutation(Bytes b, Lcg64& r, std::string& kind) {
    const auto layers = walk(b);
    const auto& l = layers[r.below(layers.size())];
    const auto byte = [&](std::uint32_t lo) { return static_cast<std::uint8_t>(lo + r.below(256 - lo)); };
    switch (r.below(12)) {
        case 0: kind = "truncate"; b.resize(r.below(b.size())); break;
        case 1:
            kind = "trailing";
            for (std::size_t i = 0, n = 1 + r.below(16); i < n; ++i) b.push_back(static_cast<std::uint8_t>(r.next_u32()));
            break;
        case 2: kind = "magic"; b[r.below(4)] ^= static_cast<std::uint8_t>(1 + r.below(255)); break;
        case 3: kind = "version"; wr16(b, 4, static_cast<std::uint16_t>(2 + r.below(65534))); break;
        case 4: {
            kind = "layer count";
            const std::uint16_t count = static_cast<std::uint16_t>(layers.size());
            const std::uint16_t next = r.below(2) && count > 0 ? static_cast<std::uint16_t>(r.below(count))
                                                               : static_cast<std::uint16_t>(count + 1 + r.below(100));
            wr16(b, 6, next);
            break;
        }
        case 5: {
            kind = "name length";
            const std::size_t beyond = b.size() - l.start;
            wr16(b, l.start, r.below(2) ? 0 : static_cast<std::uint16_t>(std::min<std::size_t>(65535, beyond + r.below(100))));
            if (beyond > 65535) wr16(b, l.start, 0);
            break;
        }
        case 6: kind = "flags"; b[l.flags] |= static_cast<std::uint8_t>(4u << r.below(6)); break;
        case 7: kind = "dtype"; b[l.dtype] = byte(3); break;
        case 8: kind = "rank"; b[l.rank] = r.below(2) ? static_cast<std::uint8_t>(r.below(2)) : byte(3); break;
        case 9: {
            kind = "dims";
            if (&l == &layers.front() || r.below(3) == 0) {
                wr32(b, l.dims + 4 * r.below(2), 0);
            } else {
                // Breaks the in/out chain with the previous layer.
                wr32(b, l.dims + 4, static_cast<std::uint32_t>(l.in + 1 + r.below(50)));
            }
            break;
        }
        case 10: {
            if (b[l.dtype] == 2) {
                kind = "q8 scale";
                const float bad[] = {0.0f, -1.0f, NAN, INFINITY, -0.0f};
                std::uint32_t u;
                std::memcpy(&u, &bad[r.below(5)], 4);
                wr32(b, l.payload, u);
            } else if (b[l.dtype] == 1 && (l.out * l.in) % 8 != 0) {
                kind = "bitmap padding";
                const std::size_t n = l.out * l.in;
                b[l.payload + n / 8] |= static_cast<std::uint8_t>(0x80u);
            } else {
                kind = "truncate layer";
                b.resize(l.payload + r.below(l.payload_size));
            }
            break;
        }
        default: {
            kind = "garbage";
            Bytes g(r.below(200));
            for (auto& x : g) x = static_cast<std::uint8_t>(r.next_u32());
            if (g.size() >= 1) g[0] = 'Z';
            b = g;
            break;
        }
    }
    return b;
}

void round_trips() {
    Outcome o;
    Lcg64 r(9009);
    int dense_bad = 0, sparse_bad = 0, quant_bad = 0;
    std::vector<Bytes> corpus;
    for (int i = 0; i < 100; ++i) {
        const Model m = random_model(r, static_cast<double>(i % 5) * 0.2);
        const Bytes dense = serialize_dense(m);
        try {
            const Model d = std::get<Model>(load(dense));
            dense_bad += !(d.bit_equal(m) && serialize_dense(d) == dense);
        } catch (const std::exception&) {
            ++dense_bad;
        }
        const Bytes sparse = serialize_sparse(m);
        try {
            const Model s = std::get<Model>(load(sparse));
            sparse_bad += !(s.bit_equal(m) && serialize_sparse(s) == sparse);
        } catch (const std::exception&) {
            ++sparse_bad;
        }
        const QuantizedModel q = quantize(m);
        const Bytes qb = serialize_quantized(q);
        try {
            const QuantizedModel back = std::get<QuantizedModel>(load(qb));
            quant_bad += !(back == q && serialize_quantized(back) == qb);
        } catch (const std::exception&) {
            ++quant_bad;
        }
        corpus.push_back(dense);
        corpus.push_back(sparse);
        corpus.push_back(qb);
    }
    o.require(dense_bad + sparse_bad + quant_bad == 0, "round trip");

    std::map<std::string, int> kinds;
    int not_rejected = 0, other_exception = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string kind;
        const Bytes bad = structural_mutation(corpus[r.below(corpus.size())], r, kind);
        ++kinds[kind];
        try {
            (void)load(bad);
            ++not_rejected;
            std::cerr << "mutation '" << kind << "' was accepted" << std::endl;
        } catch (const FormatError&) {
        } catch (const std::exception& e) {
            ++other_exception;
            std::cerr << "mutation '" << kind << "' raised non-format error: " << e.what() << std::endl;
        }
    }
    o.require(not_rejected == 0 && other_exception == 0, "corruption rejected");

    // Unconstrained byte flips may still form a valid file; they must not crash.
    int flip_loaded = 0, flip_rejected = 0, flip_other = 0;
    for (int i = 0; i < 1000; ++i) {
        Bytes b = corpus[r.below(corpus.size())];
        for (std::size_t k = 0, n = 1 + r.below(4); k < n; ++k) b[r.below(b.size())] ^= static_cast<std::uint8_t>(1 + r.below(255));
        try {
            (void)load(b);
            ++flip_loaded;
        } catch (const FormatError&) {
            ++flip_rejected;
        } catch (const std::exception&) {
            ++flip_other;
        }
    }
    o.require(flip_other == 0, "byte flips");

    o.detail << "100 models round-trip failures dense/sparse/q8 " << dense_bad << "/" << sparse_bad << "/" << quant_bad
             << "; 1000 structural mutations, " << (1000 - not_rejected - other_exception)
             << " format errors, " << kinds.size() << " kinds; 1000 byte flips: " << flip_rejected
             << " format errors, " << flip_loaded << " still valid, " << flip_other << " other";
    record(9, "serialization round trips and corruption", o);
}

// ---------------------------------------------------------------------------

struct SweepOutputs {
    std::string sweep_csv, report_md, runs_csv_no_time;
    std::vector<std::pair<std::string, std::string>> curves;
    std::vector<ExperimentResult> results;
    double seconds = 0.0;

    bool operator==(const SweepOutputs& o) const {
        return sweep_csv == o.sweep_csv && report_md == o.report_md && runs_csv_no_time == o.runs_csv_no_time &&
               curves == o.curves;
    }
};

SweepGrid reduced_grid() {
    SweepGrid g;
    g.t0s = {0, 10, 20, 30, 40};
    g.tfs = {10, 20, 30, 40};
    return g;
}

ExperimentConfig reduced_config() {
    ExperimentConfig c;
    c.dataset.n_train = 2048;
    c.hp.epochs = 40;
    c.schedule = PruningSchedule::dynamic(0.0, 0.5, 0, 40);
    return c;
}

SweepOutputs run_reduced_sweep(unsigned parallelism) {
    SweepOutputs s;
    SweepOptions opts;
    opts.parallelism = parallelism;
    opts.on_result = [](const ExperimentResult&, std::size_t done, std::size_t total) {
        if (done % 10 == 0 || done == total) std::cerr << "  " << done << "/" << total << std::endl;
    };
    std::cerr << "reduced sweep, parallelism " << parallelism << "..." << std::endl;
    const auto start = Clock::now();
    s.results = run_sweep(reduced_grid(), reduced_config(), opts);
    s.seconds = seconds_since(start);
    s.sweep_csv = sweep_csv(s.results);
    s.report_md = report_markdown(s.results);
    s.curves = emit_curves(s.results);
    auto timeless = s.results;
    for (auto& r : timeless) r.wall_seconds = 0.0;
    s.runs_csv_no_time = runs_csv(timeless);
    return s;
}

void sweep_determinism(const SweepOutputs& a, const SweepOutputs& b, const SweepOutputs& c) {
    Outcome o;
    std::size_t failed = 0;
    for (const auto& r : a.results) failed += !r.ok;
    o.require(a.results.size() == 60, "60 runs");
    o.require(failed == 0, "all runs succeed");
    o.require(a.seconds <= 1800.0, "runtime");
    o.require(a == b, "repeat identical");
    o.require(a == c, "parallelism identical");
    bool curves_same = true;
    for (std::size_t i = 0; i < a.results.size() && i < c.results.size(); ++i)
        curves_same = curves_same && a.results[i].val_curve == c.results[i].val_curve &&
                      a.results[i].trace_quantized == c.results[i].trace_quantized;
    o.require(curves_same, "validation curves identical");
    o.detail << a.results.size() << " runs (" << failed << " failed), single-threaded " << a.seconds
             << " s; outputs identical across repeat: " << (a == b ? "yes" : "no")
             << ", across parallelism 1 vs 4: " << (a == c ? "yes" : "no") << " (" << a.curves.size()
             << " figure files compared)";
    record(10, "sweep determinism", o);
}

void raw_sizes(const SweepOutputs& a) {
    Outcome o;
    std::set<std::size_t> raw, gz, sparse_raw;
    for (const auto& r : a.results) {
        raw.insert(r.pruned.raw_size);
        gz.insert(r.pruned.gzip_size);
        sparse_raw.insert(r.sparse.raw_size);
    }
    // The default-config runs share the architecture too.
    std::set<std::size_t> raw_default;
    for (const auto& r : g_all_runs) raw_default.insert(r.pruned.raw_size);
    o.require(raw.size() == 1, "dense raw size constant");
    o.require(raw_default.size() == 1 && *raw_default.begin() == *raw.begin(), "default runs same raw size");
    o.require(gz.size() > 1, "gzip sizes vary");
    o.detail << "dense raw size " << *raw.begin() << " B at all " << a.results.size() + g_all_runs.size()
             << " runs; " << gz.size() << " distinct gzip sizes, " << sparse_raw.size() << " distinct sparse raw sizes";
    record(8, "non-compressed size constancy", o);
}

void reductions() {
    Outcome o;
    // Sparsity-0 pruned training vs plain training, 5 epochs, default architecture.
    ExperimentConfig c = default_config();
    c.hp.epochs = 5;
    c.dataset.n_train = 2048;
    const TrainingData data = make_dataset(c.dataset);
    const Model init = init_model(c.layer_specs(), c.init_seed());
    const TrainRun plain = train(init, data, c.hp);
    bool identical = true;
    for (const auto& schedule : {PruningSchedule::constant(0.0, 0, 5), PruningSchedule::dynamic(0.0, 0.0, 0, 5)}) {
        const PrunedRun pruned = run_pruned_training(init, {schedule, 5, {}}, data, c.hp);
        identical = identical && pruned.model.bit_equal(plain.model) && pruned.val_curve == plain.val_curve;
    }
    o.require(identical, "sparsity-0 identity");

    std::size_t unequal = 0;
    for (const auto& r : g_all_runs) unequal += !(r.ok && r.pruned.test_mae == r.sparse.test_mae && r.trace_pruned == r.trace_sparse);
    o.require(unequal == 0, "pruned == sparse");
    o.detail << "sparsity-0 training bit-identical over 5 epochs: " << (identical ? "yes" : "no") << "; pruned vs sparse MAE equal in "
             << g_all_runs.size() - unequal << "/" << g_all_runs.size() << " runs";
    record(4, "reduction identities", o);
}

}  // namespace

int main() {
    try {
        schedule_closed_form();
        mask_oracle();
        gradient_check();
        round_trips();

        const DefaultRuns d = default_runs();
        trend(d);
        recovery_window(d);
        quantization(d);

        const SweepOutputs a = run_reduced_sweep(1);
        const SweepOutputs b = run_reduced_sweep(1);
        const SweepOutputs c = run_reduced_sweep(4);
        sweep_determinism(a, b, c);
        raw_sizes(a);
        for (const auto& r : a.results) g_all_runs.push_back(r);
        reductions();
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << std::endl;
    }

    bool all = g_lines.size() == 10;
    std::ostringstream report;
    for (int id = 1; id <= 10; ++id) {
        const auto it = g_lines.find(id);
        if (it == g_lines.end()) {
            report << "FAIL criterion " << id << ": not evaluated\n";
            all = false;
            continue;
        }
        all = all && it->second.first;
        report << (it->second.first ? "PASS" : "FAIL") << " criterion " << id << ": " << it->second.second << "\n";
    }
    std::cout << report.str() << std::flush;
    // Kept next to the binary so a test driver can show it even on success.
    std::ofstream("acceptance_results.txt") << report.str();
    return all ? 0 : 1;
}
