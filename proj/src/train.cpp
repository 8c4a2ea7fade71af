#include "stonet/train.hpp"

#include "stonet/checkpoint.hpp"
#include "stonet/error.hpp"
#include "stonet/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace stonet {

void TrainConfig::validate() const
{
    if (epochs < 1)
        throw ConfigError("train: epochs must be at least 1");
    if (batch_size < 1)
        throw ConfigError("train: batch size must be at least 1");
    if (batches_per_epoch < 0)
        throw ConfigError("train: batches_per_epoch must be non-negative");
    if (!(lr >= 0.0) || !(weight_decay >= 0.0) || lr_decay_every < 0 || !(lr_decay > 0.0))
        throw ConfigError("train: invalid learning-rate settings");
    model.validate();
}

Json TrainConfig::to_json() const
{
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"batches_per_epoch", batches_per_epoch},
            {"lr", lr},
            {"lr_decay_every", lr_decay_every},
            {"lr_decay", lr_decay},
            {"weight_decay", weight_decay},
            {"seed", seed},
            {"checkpoint_every", checkpoint_every},
            {"model", model.to_json()}};
}

TrainConfig TrainConfig::from_json(const Json& j)
{
    reject_unknown_keys(j, {"epochs", "batch_size", "batches_per_epoch", "lr", "lr_decay_every", "lr_decay",
                            "weight_decay", "seed", "checkpoint_every", "model"},
                        "train");
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.batches_per_epoch = j.value("batches_per_epoch", c.batches_per_epoch);
    c.lr = j.value("lr", c.lr);
    c.lr_decay_every = j.value("lr_decay_every", c.lr_decay_every);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    if (j.contains("model"))
        c.model = OperatorConfig::from_json(j.at("model"));
    c.validate();
    return c;
}

double TrainResult::final_window_loss(int window) const
{
    if (loss_history.empty())
        return std::nan("");
    const std::size_t w = std::min(loss_history.size(), static_cast<std::size_t>(std::max(window, 1)));
    return std::accumulate(loss_history.end() - static_cast<long>(w), loss_history.end(), 0.0) /
           static_cast<double>(w);
}

namespace {

/// Normalized copies of all features, row-major for cheap row gathers.
struct NormalizedData {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> branch;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> trunk;
    Eigen::VectorXd target;
};

NormalizedData normalize_all(const Dataset& ds, const NormalizationStats& stats)
{
    const std::size_t n = ds.size();
    const int nb = ds.manifest.branch_dim;
    NormalizedData out;
    out.branch.resize(static_cast<Eigen::Index>(n), nb);
    out.trunk.resize(static_cast<Eigen::Index>(n), kTrunkDim);
    out.target.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = ds.row(i);
        const auto ii = static_cast<Eigen::Index>(i);
        for (int j = 0; j < nb; ++j)
            out.branch(ii, j) = (r[j] - stats.branch_mean[j]) / stats.branch_std[j];
        for (int j = 0; j < kTrunkDim; ++j)
            out.trunk(ii, j) = (r[nb + j] - stats.trunk_mean[j]) / stats.trunk_std[j];
        out.target[ii] = stats.normalize_target(r[nb + kTrunkDim + 1]);
    }
    return out;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::uint64_t pass)
{
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    CounterRng rng{seed, static_cast<std::uint64_t>(RngTag::Shuffle), pass};
    for (std::size_t i = n; i > 1; --i)
        std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

} // namespace

TrainResult train(OperatorModel& model, const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch)
{
    config.validate();
    if (dataset.size() == 0)
        throw TrainingError("train: empty dataset");
    if (dataset.stats.branch_mean.size() == 0)
        throw TrainingError("train: dataset has no normalization statistics");
    model.set_stats(dataset.stats);
    const NormalizedData data = normalize_all(dataset, dataset.stats);

    AdamConfig adam_config;
    adam_config.lr = config.lr;
    adam_config.weight_decay = config.weight_decay;
    Adam adam(model.parameters(), adam_config);

    const std::size_t n = dataset.size();
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
    std::uint64_t pass = 0;
    std::vector<std::size_t> order = permutation(n, config.seed, pass);
    std::size_t cursor = 0;

    TrainResult result;
    const auto start = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.lr_decay_every > 0 && epoch > 0 && epoch % config.lr_decay_every == 0)
            adam.set_lr(adam.config().lr * config.lr_decay);
        if (config.batches_per_epoch == 0 && cursor != 0) {
            order = permutation(n, config.seed, ++pass);
            cursor = 0;
        }
        const std::size_t batches =
            config.batches_per_epoch > 0 ? static_cast<std::size_t>(config.batches_per_epoch) : (n + batch - 1) / batch;

        double loss_sum = 0.0;
        std::size_t epoch_samples = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            if (cursor >= n) {
                order = permutation(n, config.seed, ++pass);
                cursor = 0;
            }
            const std::size_t m = std::min(batch, n - cursor);
            Eigen::MatrixXd xb(static_cast<Eigen::Index>(m), data.branch.cols());
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(m), kTrunkDim);
            Eigen::MatrixXd y(static_cast<Eigen::Index>(m), 1);
            for (std::size_t r = 0; r < m; ++r) {
                const auto src = static_cast<Eigen::Index>(order[cursor + r]);
                const auto dst = static_cast<Eigen::Index>(r);
                xb.row(dst) = data.branch.row(src);
                xt.row(dst) = data.trunk.row(src);
                y(dst, 0) = data.target[src];
            }
            cursor += m;

            Tape tape;
            const Var pred = model.forward(tape, tape.constant(std::move(xb)), tape.constant(std::move(xt)));
            const Var loss = tape.mse(pred, tape.constant(std::move(y)));
            const double value = tape.value(loss)(0, 0);
            if (!std::isfinite(value))
                throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(b));
            adam.zero_grad();
            tape.backward(loss);
            adam.step();
            loss_sum += value * static_cast<double>(m);
            epoch_samples += m;
            result.samples_seen += static_cast<long>(m);
        }
        const double mean = loss_sum / static_cast<double>(epoch_samples);
        result.loss_history.push_back(mean);
        if (on_epoch)
            on_epoch(epoch, mean);

        if (config.checkpoint_every > 0 && !config.checkpoint_dir.empty() &&
            ((epoch + 1) % config.checkpoint_every == 0 || epoch + 1 == config.epochs)) {
            save_checkpoint(config.checkpoint_dir, model,
                            {{"optimizer", "adam"}, {"steps", adam.step_count()}, {"lr", adam.config().lr},
                             {"beta1", adam.config().beta1}, {"beta2", adam.config().beta2},
                             {"eps", adam.config().eps}, {"weight_decay", adam.config().weight_decay},
                             {"epoch", epoch + 1}});
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

double evaluate_loss(const OperatorModel& model, const Dataset& dataset, std::size_t chunk)
{
    const NormalizedData data = normalize_all(dataset, model.stats());
    const std::size_t n = dataset.size();
    auto* m = const_cast<OperatorModel*>(&model);  // forward reads parameters only
    double sum = 0.0;
    for (std::size_t start = 0; start < n; start += chunk) {
        const auto len = static_cast<Eigen::Index>(std::min(chunk, n - start));
        const auto s = static_cast<Eigen::Index>(start);
        Tape tape;
        const Var pred = m->forward(tape, tape.constant(data.branch.middleRows(s, len)),
                                    tape.constant(data.trunk.middleRows(s, len)));
        sum += (tape.value(pred).col(0) - data.target.segment(s, len)).squaredNorm();
    }
    return sum / static_cast<double>(n);
}

void write_loss_history(const std::filesystem::path& path, const std::vector<double>& history)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < history.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, history[i]);
        out << buf;
    }
}

} // namespace stonet
