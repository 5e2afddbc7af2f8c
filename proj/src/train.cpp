#include "prunekit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prunekit/errors.hpp"
#include "prunekit/rng.hpp"

namespace prunekit {

void validate(const Hyperparams& hp) {
    if (!(hp.lr > 0.0f)) throw ConfigError("learning rate must be positive");
    if (hp.batch_size == 0) throw ConfigError("batch size must be positive");
    if (hp.epochs <= 0) throw ConfigError("epochs must be positive");
    if (hp.patience <= 0) throw ConfigError("plateau patience must be positive");
    if (!(hp.factor > 0.0f && hp.factor < 1.0f))
        throw ConfigError("plateau factor must be in (0, 1)");
    if (!(hp.min_lr > 0.0f) || hp.min_lr > hp.lr)
        throw ConfigError("plateau min_lr must be in (0, lr]");
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t rows, std::size_t batch_size,
                                                    const std::optional<std::uint64_t>& shuffle_seed,
                                                    int epoch) {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle_seed) {
        // Fisher-Yates with a per-epoch stream.
        Lcg64 rng(derive_seed(*shuffle_seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < rows; start += batch_size) {
        const std::size_t end = std::min(rows, start + batch_size);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

Split gather_rows(const Split& s, const std::vector<std::size_t>& rows) {
    const std::size_t in = s.x.dim(1);
    const std::size_t out = s.y.dim(1);
    Split b{Tensor({rows.size(), in}), Tensor({rows.size(), out})};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(s.x.data() + rows[r] * in, in, b.x.data() + r * in);
        std::copy_n(s.y.data() + rows[r] * out, out, b.y.data() + r * out);
    }
    return b;
}

float evaluate_mae(const Model& model, const Split& split) {
    return mae(forward(model, split.x), split.y);
}

void train_step(Model& model, const Tensor& batch, const Tensor& target, AdamState& adam, float lr) {
    const Gradients g = backward(model, batch, target);
    adam_step(model, g, adam, lr);
}

TrainRun train(Model model, const TrainingData& data, const Hyperparams& hp) {
    validate(hp);
    AdamState adam = AdamState::for_model(model);
    PlateauState plateau = PlateauState::start(hp.plateau());
    TrainRun run;
    run.val_curve.reserve(static_cast<std::size_t>(hp.epochs));
    std::vector<Split> fixed_batches;
    if (!hp.shuffle_seed)
        for (const auto& rows : epoch_batches(data.train.rows(), hp.batch_size, std::nullopt, 0))
            fixed_batches.push_back(gather_rows(data.train, rows));

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        if (hp.shuffle_seed) {
            for (const auto& rows : epoch_batches(data.train.rows(), hp.batch_size, hp.shuffle_seed, epoch)) {
                const Split b = gather_rows(data.train, rows);
                train_step(model, b.x, b.y, adam, plateau.lr);
            }
        } else {
            for (const auto& b : fixed_batches) train_step(model, b.x, b.y, adam, plateau.lr);
        }
        const float val = evaluate_mae(model, data.val);
        if (!std::isfinite(val)) throw NumericError("validation MAE is not finite at epoch " + std::to_string(epoch));
        run.val_curve.push_back(val);
        plateau = plateau_update(plateau, val);
    }
    run.model = std::move(model);
    return run;
}

}  // namespace prunekit
