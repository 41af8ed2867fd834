#pragma once

#include "cytoclass/classifier.hpp"

#include <filesystem>

namespace cyto {

/// Serializes the full model (architecture description + every parameter
/// tensor) in the library's native binary format.
void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path);

/// Rebuilds a model from a checkpoint. The passed config must agree with the
/// stored architecture (backbone name, input size, class count, head shape);
/// its freeze policy is applied to the restored model.
ClassifierModel load_checkpoint(const std::filesystem::path& path, const ModelConfig& config);

/// Reads just the architecture-bearing config stored in a checkpoint, so
/// callers can restore a model without re-stating it.
ModelConfig read_checkpoint_config(const std::filesystem::path& path);

/// Exports the current backbone (arch + weights) as a standalone backbone
/// weight file usable as a pretrained source for later builds.
void export_backbone(const ClassifierModel& model, const std::filesystem::path& path);

} // namespace cyto
