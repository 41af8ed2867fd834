#include "cytoclass/backbone.hpp"

#include "container.hpp"
#include "cytoclass/errors.hpp"

namespace cyto {

BackboneDef tiny_conv_def() {
    BackboneDef def;
    def.name = kTinyConvBackbone;
    def.arch = {
        {"conv", {{"in", 3}, {"out", 8}, {"kernel", 3}, {"pad", 1}}},
        {"relu", {}},
        {"avgpool2", {}},
        {"conv", {{"in", 8}, {"out", 16}, {"kernel", 3}, {"pad", 1}}},
        {"relu", {}},
        {"avgpool2", {}},
    };
    return def;
}

int backbone_output_channels(const std::vector<LayerSpec>& arch) {
    int channels = 3;
    for (const auto& spec : arch) {
        if (spec.kind == "conv") {
            auto it = spec.attrs.find("out");
            if (it == spec.attrs.end())
                throw DataError("conv layer spec missing 'out'");
            channels = static_cast<int>(it->second);
        } else if (spec.kind == "dense" || spec.kind == "flatten" ||
                   spec.kind == "global_avg_pool") {
            throw DataError("backbone must stay spatial; found layer kind: " + spec.kind);
        }
    }
    return channels;
}

BackboneDef load_backbone_file(const std::filesystem::path& path) {
    detail::Blob blob = detail::read_blob(path);
    if (blob.header.value("container", "") != "backbone")
        throw DataError("not a backbone weight file: " + path.string());

    BackboneDef def;
    def.name = blob.header.at("name").get<std::string>();
    def.arch = detail::arch_from_json(blob.header.at("arch"));
    def.weights = std::move(blob.tensors);

    // Sanity: weight count must match the parameterized layers.
    std::size_t expected = 0;
    for (const auto& spec : def.arch)
        if (spec.kind == "conv" || spec.kind == "dense") expected += 2;
    if (def.weights.size() != expected)
        throw DataError("backbone file " + path.string() + " has " +
                        std::to_string(def.weights.size()) + " tensors, expected " +
                        std::to_string(expected));
    return def;
}

void save_backbone_file(const BackboneDef& def, const std::filesystem::path& path) {
    detail::Blob blob;
    blob.header["container"] = "backbone";
    blob.header["version"] = 1;
    blob.header["name"] = def.name;
    blob.header["arch"] = detail::arch_to_json(def.arch);
    blob.tensors = def.weights;
    detail::write_blob(blob, path);
}

} // namespace cyto
