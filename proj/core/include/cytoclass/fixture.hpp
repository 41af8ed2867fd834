#pragma once

#include "cytoclass/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace cyto {

/// Writes a class-folder tree of procedurally generated images so the
/// pipeline can be exercised without the real dataset. Each class gets a
/// distinct color/texture signature plus seeded noise, which makes the
/// fixture learnable by construction. Identical (spec, size, seed) produce
/// byte-identical files.
std::filesystem::path generate_synthetic_fixture(const std::map<std::string, int>& per_class_counts,
                                                 int image_size, std::uint64_t seed,
                                                 const std::filesystem::path& out,
                                                 const ClassTaxonomy& taxonomy);

} // namespace cyto
