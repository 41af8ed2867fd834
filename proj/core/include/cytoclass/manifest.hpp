#pragma once

#include "cytoclass/classifier.hpp"
#include "cytoclass/dataset.hpp"
#include "cytoclass/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cyto {

/// Complete reproducibility record for one run. Written before training
/// starts; only checkpoint paths are appended afterwards.
struct RunManifest {
    std::string run_id;
    std::string timestamp; // ISO 8601 UTC
    std::string artifact_version;
    std::string taxonomy_hash;

    std::string dataset_root;
    Lineage train_lineage;
    Lineage val_lineage;

    ModelConfig model;
    bool backbone_random_standin = false;
    TrainConfig training;

    std::vector<std::string> checkpoints;

    bool operator==(const RunManifest&) const = default;
};

std::string make_run_id(std::uint64_t entropy);
std::string current_timestamp_utc();

/// Writes `<run_dir>/manifest`.
void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& run_dir);

} // namespace cyto
