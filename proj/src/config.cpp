#include "prunekit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "prunekit/errors.hpp"
#include "prunekit/report.hpp"

namespace prunekit {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (true) {
        const auto comma = v.find(',', start);
        const auto item = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (item.empty()) throw ConfigError("empty list element");
        items.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename T>
T parse_int(std::string_view v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + std::string(v) + "' is not a valid integer");
    return out;
}

double parse_real(std::string_view v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("'" + std::string(v) + "' is not a valid number");
    return out;
}

std::size_t parse_count(std::string_view v) { return parse_int<std::size_t>(v); }

template <typename T, typename F>
std::vector<T> parse_list(std::string_view v, F one) {
    std::vector<T> out;
    for (auto item : split_list(v)) out.push_back(one(item));
    return out;
}

using Setter = std::function<void(ConfigFile&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"seed", [](ConfigFile& c, std::string_view v) { c.experiment.seed = parse_int<std::uint64_t>(v); }},
        {"dataset.n_train", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.n_train = parse_count(v); }},
        {"dataset.n_val", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.n_val = parse_count(v); }},
        {"dataset.n_test", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.n_test = parse_count(v); }},
        {"dataset.in_dim", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.in_dim = parse_count(v); }},
        {"dataset.out_dim", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.out_dim = parse_count(v); }},
        {"dataset.teacher_hidden",
         [](ConfigFile& c, std::string_view v) { c.experiment.dataset.teacher_hidden = parse_count(v); }},
        {"dataset.noise_std", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.noise_std = parse_real(v); }},
        {"dataset.seed", [](ConfigFile& c, std::string_view v) { c.experiment.dataset.seed = parse_int<std::uint64_t>(v); }},
        {"model.hidden",
         [](ConfigFile& c, std::string_view v) {
             c.experiment.model.hidden = trim(v) == "none" ? std::vector<std::size_t>{}
                                                           : parse_list<std::size_t>(v, parse_count);
         }},
        {"model.excluded",
         [](ConfigFile& c, std::string_view v) {
             c.experiment.model.excluded_layers.clear();
             if (trim(v) == "none" || trim(v).empty()) return;
             for (auto item : split_list(v)) c.experiment.model.excluded_layers.emplace_back(item);
         }},
        {"train.lr", [](ConfigFile& c, std::string_view v) { c.experiment.hp.lr = static_cast<float>(parse_real(v)); }},
        {"train.batch_size", [](ConfigFile& c, std::string_view v) { c.experiment.hp.batch_size = parse_count(v); }},
        {"train.epochs", [](ConfigFile& c, std::string_view v) { c.experiment.hp.epochs = parse_int<int>(v); }},
        {"train.patience", [](ConfigFile& c, std::string_view v) { c.experiment.hp.patience = parse_int<int>(v); }},
        {"train.factor", [](ConfigFile& c, std::string_view v) { c.experiment.hp.factor = static_cast<float>(parse_real(v)); }},
        {"train.min_lr", [](ConfigFile& c, std::string_view v) { c.experiment.hp.min_lr = static_cast<float>(parse_real(v)); }},
        {"train.shuffle_seed",
         [](ConfigFile& c, std::string_view v) {
             if (v == "none")
                 c.experiment.hp.shuffle_seed.reset();
             else
                 c.experiment.hp.shuffle_seed = parse_int<std::uint64_t>(v);
         }},
        {"schedule.kind", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.kind = parse_schedule_kind(v); }},
        {"schedule.s_c", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.s_c = parse_real(v); }},
        {"schedule.s_i", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.s_i = parse_real(v); }},
        {"schedule.s_f", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.s_f = parse_real(v); }},
        {"schedule.t0", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.t0 = parse_int<int>(v); }},
        {"schedule.tf", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.tf = parse_int<int>(v); }},
        {"schedule.delta_t", [](ConfigFile& c, std::string_view v) { c.experiment.schedule.delta_t = parse_int<int>(v); }},
        {"trace.samples", [](ConfigFile& c, std::string_view v) { c.experiment.trace_samples = parse_count(v); }},
        {"trace.output", [](ConfigFile& c, std::string_view v) { c.experiment.trace_output = parse_count(v); }},
        {"sweep.kinds",
         [](ConfigFile& c, std::string_view v) { c.grid.kinds = parse_list<ScheduleKind>(v, parse_schedule_kind); }},
        {"sweep.s_f", [](ConfigFile& c, std::string_view v) { c.grid.final_sparsities = parse_list<double>(v, parse_real); }},
        {"sweep.s_i",
         [](ConfigFile& c, std::string_view v) { c.grid.initial_sparsities = parse_list<double>(v, parse_real); }},
        {"sweep.t0", [](ConfigFile& c, std::string_view v) { c.grid.t0s = parse_list<int>(v, parse_int<int>); }},
        {"sweep.tf", [](ConfigFile& c, std::string_view v) { c.grid.tfs = parse_list<int>(v, parse_int<int>); }},
    };
    return table;
}

}  // namespace

ConfigFile parse_config(std::string_view text) {
    ConfigFile cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + "missing key");
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (!seen.insert(std::string(key)).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        if (value.empty() && key != "model.excluded") throw ConfigError(where + "missing value for '" + std::string(key) + "'");
        if (key.starts_with("sweep.")) cfg.has_sweep_keys = true;
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + std::string(key) + ": " + e.what());
        }
    }
    // Constant schedules carry their target in s_c; mirror it so s_f-based code agrees.
    if (cfg.experiment.schedule.kind == ScheduleKind::constant) {
        if (!seen.contains("schedule.s_c") && seen.contains("schedule.s_f"))
            cfg.experiment.schedule.s_c = cfg.experiment.schedule.s_f;
        cfg.experiment.schedule.s_f = cfg.experiment.schedule.s_c;
        cfg.experiment.schedule.s_i = 0.0;
    }
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt(v[i]);
    }
    return s;
}

}  // namespace

std::string render_config(const ExperimentConfig& c, const SweepGrid* grid) {
    std::ostringstream o;
    const auto num = [](double v) { return format_double(v); };
    const auto count = [](auto v) { return std::to_string(v); };
    o << "seed = " << c.seed << "\n"
      << "dataset.n_train = " << c.dataset.n_train << "\n"
      << "dataset.n_val = " << c.dataset.n_val << "\n"
      << "dataset.n_test = " << c.dataset.n_test << "\n"
      << "dataset.in_dim = " << c.dataset.in_dim << "\n"
      << "dataset.out_dim = " << c.dataset.out_dim << "\n"
      << "dataset.teacher_hidden = " << c.dataset.teacher_hidden << "\n"
      << "dataset.noise_std = " << num(c.dataset.noise_std) << "\n"
      << "dataset.seed = " << c.dataset.seed << "\n"
      << "model.hidden = " << (c.model.hidden.empty() ? std::string("none") : join(c.model.hidden, count)) << "\n"
      << "model.excluded = "
      << (c.model.excluded_layers.empty() ? std::string("none")
                                          : join(c.model.excluded_layers, [](const std::string& s) { return s; }))
      << "\n"
      << "train.lr = " << format_float(c.hp.lr) << "\n"
      << "train.batch_size = " << c.hp.batch_size << "\n"
      << "train.epochs = " << c.hp.epochs << "\n"
      << "train.patience = " << c.hp.patience << "\n"
      << "train.factor = " << format_float(c.hp.factor) << "\n"
      << "train.min_lr = " << format_float(c.hp.min_lr) << "\n"
      << "train.shuffle_seed = " << (c.hp.shuffle_seed ? std::to_string(*c.hp.shuffle_seed) : "none") << "\n"
      << "schedule.kind = " << to_string(c.schedule.kind) << "\n"
      << "schedule.s_c = " << num(c.schedule.s_c) << "\n"
      << "schedule.s_i = " << num(c.schedule.s_i) << "\n"
      << "schedule.s_f = " << num(c.schedule.s_f) << "\n"
      << "schedule.t0 = " << c.schedule.t0 << "\n"
      << "schedule.tf = " << c.schedule.tf << "\n"
      << "schedule.delta_t = " << c.schedule.delta_t << "\n"
      << "trace.samples = " << c.trace_samples << "\n"
      << "trace.output = " << c.trace_output << "\n";
    if (grid) {
        o << "sweep.kinds = " << join(grid->kinds, [](ScheduleKind k) { return std::string(to_string(k)); }) << "\n"
          << "sweep.s_f = " << join(grid->final_sparsities, num) << "\n"
          << "sweep.s_i = " << join(grid->initial_sparsities, num) << "\n"
          << "sweep.t0 = " << join(grid->t0s, count) << "\n"
          << "sweep.tf = " << join(grid->tfs, count) << "\n";
    }
    return o.str();
}

}  // namespace prunekit
