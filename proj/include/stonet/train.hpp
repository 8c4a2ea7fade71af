/**
 * @file train.hpp
 * @brief Mini-batch Adam training of an operator model on normalized rate targets.
 */
#pragma once

#include "stonet/adam.hpp"
#include "stonet/dataset.hpp"
#include "stonet/json_io.hpp"
#include "stonet/operator_model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace stonet {

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 256;
    /// 0 = one full pass over the shuffled records per epoch. Otherwise each
    /// epoch takes this many batches from a cursor over a sequence of seeded
    /// permutations, reshuffling whenever a permutation is exhausted.
    int batches_per_epoch = 0;
    double lr = 1e-3;
    /// Constant learning rate when 0; otherwise lr is multiplied by lr_decay every lr_decay_every epochs.
    int lr_decay_every = 0;
    double lr_decay = 1.0;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;
    std::filesystem::path checkpoint_dir;
    OperatorConfig model;

    void validate() const;
    Json to_json() const;
    static TrainConfig from_json(const Json& j);
};

struct TrainResult {
    std::vector<double> loss_history;  // per-epoch sample-weighted mean batch loss (normalized units)
    double seconds = 0.0;
    long samples_seen = 0;

    /// Mean of the last `window` epochs (all epochs when fewer).
    double final_window_loss(int window) const;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Trains `model` in place. The dataset statistics are copied into the model.
TrainResult train(OperatorModel& model, const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Normalized loss of `model` on every record of `dataset`.
double evaluate_loss(const OperatorModel& model, const Dataset& dataset, std::size_t chunk = 4096);

void write_loss_history(const std::filesystem::path& path, const std::vector<double>& history);

} // namespace stonet
