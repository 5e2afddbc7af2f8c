#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "prunekit/experiment.hpp"

namespace prunekit {

/// Plain-text experiment configuration.
///
///   # comment
///   key = value
///
/// One assignment per line; '#' starts a comment anywhere on a line; lists are
/// comma-separated. Unknown or repeated keys are errors. Every key is optional
/// and falls back to the ExperimentConfig / SweepGrid defaults.
///
///   seed                    run seed (unsigned)
///   dataset.n_train / n_val / n_test / in_dim / out_dim / teacher_hidden
///   dataset.noise_std       >= 0
///   dataset.seed
///   model.hidden            e.g. 64,64
///   model.excluded          layer names kept dense (dense_0, ..., head)
///   train.lr / batch_size / epochs / patience / factor / min_lr
///   train.shuffle_seed      "none" (default) or an unsigned seed
///   schedule.kind           dynamic | constant
///   schedule.s_c / s_i / s_f / t0 / tf / delta_t
///   trace.samples / trace.output
///   sweep.kinds             e.g. dynamic,constant
///   sweep.s_f / sweep.s_i   fraction lists
///   sweep.t0 / sweep.tf     epoch lists
struct ConfigFile {
    ExperimentConfig experiment;
    SweepGrid grid;
    bool has_sweep_keys = false;
};

/// Throws ConfigError("line N: ...") on malformed input.
ConfigFile parse_config(std::string_view text);
ConfigFile load_config(const std::filesystem::path& path);

/// Renders every key with its current value; parse_config(render_config(c))
/// reproduces c.
std::string render_config(const ExperimentConfig& c, const SweepGrid* grid = nullptr);

}  // namespace prunekit
