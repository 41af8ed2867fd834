#pragma once

#include "cytoclass/classifier.hpp"
#include "cytoclass/metrics.hpp"
#include "cytoclass/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cyto {

/// Parsed run configuration document (JSON with sections dataset, model,
/// training, evaluation, output). Unknown sections or keys are rejected;
/// missing keys fall back to defaults and are reported as notices.
struct RunConfig {
    // dataset
    std::string dataset_root;
    std::optional<std::string> taxonomy_file;
    double subset_fraction = 1.0;
    std::uint64_t subset_seed = 0;
    bool subset_stratified = false;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;

    // model
    ModelConfig model;
    std::optional<std::string> backbone_weights;
    bool allow_random_backbone = false;

    // training
    TrainConfig training;

    // evaluation
    Averaging averaging = Averaging::macro;
    int eval_batch_size = 32;

    // output
    std::string run_dir;

    void validate() const;
};

RunConfig parse_run_config(const std::filesystem::path& path,
                           std::vector<std::string>* notices = nullptr);

/// Writes the config back out (used to snapshot the effective config into
/// the run directory).
void write_run_config(const RunConfig& config, const std::filesystem::path& path);

} // namespace cyto
