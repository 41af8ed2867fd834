#pragma once

#include "cytoclass/layers.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cyto {

/// A convolutional feature extractor: a named sequential layer stack plus,
/// optionally, pretrained weights (one flat tensor per parameter, in layer
/// order). Backbones are pluggable by name; anything not built in must come
/// from a serialized weight file.
struct BackboneDef {
    std::string name;
    std::vector<LayerSpec> arch;
    std::vector<std::vector<float>> weights; // empty: random init requested

    bool has_weights() const { return !weights.empty(); }
};

/// Name of the built-in test backbone (small conv stack, seeded random
/// weights, no external inputs).
inline constexpr const char* kTinyConvBackbone = "tiny-conv";

/// Architecture of the built-in tiny backbone (weights unset).
BackboneDef tiny_conv_def();

/// Number of channels in the feature map a backbone architecture produces.
int backbone_output_channels(const std::vector<LayerSpec>& arch);

BackboneDef load_backbone_file(const std::filesystem::path& path);
void save_backbone_file(const BackboneDef& def, const std::filesystem::path& path);

} // namespace cyto
