#include "container.hpp"

#include "cytoclass/errors.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace cyto::detail {

void write_blob(const Blob& blob, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());

    nlohmann::json header = blob.header;
    nlohmann::json tensor_meta = nlohmann::json::array();
    for (const auto& t : blob.tensors)
        tensor_meta.push_back({{"size", t.size()}});
    header["tensors"] = std::move(tensor_meta);

    const std::string header_str = header.dump();
    out.write(kBlobMagic, sizeof(kBlobMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    unsigned char len_le[4] = {static_cast<unsigned char>(len & 0xff),
                               static_cast<unsigned char>((len >> 8) & 0xff),
                               static_cast<unsigned char>((len >> 16) & 0xff),
                               static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_le), 4);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& t : blob.tensors)
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!out) throw IoError("failed writing file: " + path.string());
}

Blob read_blob(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kBlobMagic, sizeof(magic)) != 0)
        throw DataError("not a cytoclass weight file: " + path.string());

    unsigned char len_le[4];
    in.read(reinterpret_cast<char*>(len_le), 4);
    if (!in) throw DataError("truncated weight file: " + path.string());
    const std::uint32_t len = static_cast<std::uint32_t>(len_le[0]) |
                              (static_cast<std::uint32_t>(len_le[1]) << 8) |
                              (static_cast<std::uint32_t>(len_le[2]) << 16) |
                              (static_cast<std::uint32_t>(len_le[3]) << 24);
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated weight file: " + path.string());

    Blob blob;
    try {
        blob.header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("corrupt weight file header in " + path.string() + ": " + e.what());
    }

    if (!blob.header.contains("tensors") || !blob.header["tensors"].is_array())
        throw DataError("weight file header missing tensor list: " + path.string());
    for (const auto& meta : blob.header["tensors"]) {
        const auto n = meta.at("size").get<std::size_t>();
        std::vector<float> t(n);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw DataError("truncated tensor payload in " + path.string());
        blob.tensors.push_back(std::move(t));
    }
    return blob;
}

nlohmann::json layer_spec_to_json(const LayerSpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind;
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [k, v] : spec.attrs) attrs[k] = v;
    j["attrs"] = std::move(attrs);
    return j;
}

LayerSpec layer_spec_from_json(const nlohmann::json& j) {
    LayerSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    if (j.contains("attrs"))
        for (const auto& [k, v] : j.at("attrs").items())
            spec.attrs[k] = v.get<double>();
    return spec;
}

nlohmann::json arch_to_json(const std::vector<LayerSpec>& arch) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& spec : arch) arr.push_back(layer_spec_to_json(spec));
    return arr;
}

std::vector<LayerSpec> arch_from_json(const nlohmann::json& j) {
    std::vector<LayerSpec> arch;
    for (const auto& item : j) arch.push_back(layer_spec_from_json(item));
    return arch;
}

} // namespace cyto::detail
