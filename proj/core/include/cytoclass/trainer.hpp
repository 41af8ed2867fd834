#pragma once

#include "cytoclass/classifier.hpp"
#include "cytoclass/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cyto {

struct TrainConfig {
    int batch_size = 32;
    int epochs = 5;
    std::string optimizer = "adam";
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::string loss = "categorical_cross_entropy";
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
};

struct TrainOptions {
    /// When set, a checkpoint is written per epoch as `epoch_<k>` here.
    std::optional<std::filesystem::path> checkpoint_dir;
    /// Progress lines per epoch on stderr.
    bool verbose = false;
};

/// Number of optimizer steps one epoch takes: ceil(n_samples / batch_size).
long steps_per_epoch(std::size_t n_samples, int batch_size);

/// Runs the epoch/batch loop: shuffles the train order each epoch from the
/// seed, takes one Adam step per batch, evaluates the validation set after
/// every epoch. Train loss/accuracy are running means over the epoch's
/// batches. A non-finite loss aborts with an error naming the epoch and step.
TrainHistory train(ClassifierModel& model, const DatasetIndex& train_idx,
                   const DatasetIndex& val_idx, const TrainConfig& config,
                   const TrainOptions& options = {});

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
TrainHistory read_history_csv(const std::filesystem::path& path);

} // namespace cyto
