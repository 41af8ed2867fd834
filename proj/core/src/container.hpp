#pragma once

// Internal binary container shared by backbone weight files and model
// checkpoints: magic, little-endian u32 header length, JSON header, then the
// raw float32 payload of every tensor in header order.

#include "cytoclass/layers.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cyto::detail {

inline constexpr char kBlobMagic[8] = {'C', 'Y', 'T', 'O', 'B', 'L', 'B', '1'};

struct Blob {
    nlohmann::json header;
    std::vector<std::vector<float>> tensors;
};

void write_blob(const Blob& blob, const std::filesystem::path& path);
Blob read_blob(const std::filesystem::path& path);

nlohmann::json layer_spec_to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);
nlohmann::json arch_to_json(const std::vector<LayerSpec>& arch);
std::vector<LayerSpec> arch_from_json(const nlohmann::json& j);

} // namespace cyto::detail
