#include "cytoclass/checkpoint.hpp"

#include "container.hpp"
#include "cytoclass/errors.hpp"

namespace cyto {

namespace {

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {
        {"backbone_name", c.backbone_name},
        {"input_size", c.input_size},
        {"num_classes", c.num_classes},
        {"head_dense_units", c.head_dense_units},
        {"dropout_rate", c.dropout_rate},
        {"freeze_policy", to_string(c.freeze_policy)},
        {"unfreeze_top_n", c.unfreeze_top_n},
    };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.backbone_name = j.at("backbone_name").get<std::string>();
    c.input_size = j.at("input_size").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.head_dense_units = j.at("head_dense_units").get<int>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.freeze_policy = freeze_policy_from_string(j.at("freeze_policy").get<std::string>());
    c.unfreeze_top_n = j.at("unfreeze_top_n").get<int>();
    return c;
}

void check_architecture_match(const ModelConfig& requested, const ModelConfig& stored,
                              const std::filesystem::path& path) {
    auto mismatch = [&path](const std::string& field, const std::string& got,
                            const std::string& stored_v) {
        throw DataError("checkpoint " + path.string() + ": " + field + " mismatch (config " +
                        got + ", checkpoint " + stored_v + ")");
    };
    if (requested.num_classes != stored.num_classes)
        mismatch("num_classes", std::to_string(requested.num_classes),
                 std::to_string(stored.num_classes));
    if (requested.input_size != stored.input_size)
        mismatch("input_size", std::to_string(requested.input_size),
                 std::to_string(stored.input_size));
    if (requested.head_dense_units != stored.head_dense_units)
        mismatch("head_dense_units", std::to_string(requested.head_dense_units),
                 std::to_string(stored.head_dense_units));
    if (requested.backbone_name != stored.backbone_name)
        mismatch("backbone_name", requested.backbone_name, stored.backbone_name);
}

} // namespace

void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path) {
    detail::Blob blob;
    blob.header["container"] = "checkpoint";
    blob.header["version"] = 1;
    blob.header["model"] = model_config_to_json(model.config());
    blob.header["backbone_standin"] = model.backbone_is_random_standin();
    blob.header["backbone_arch"] = detail::arch_to_json(model.backbone_arch());
    for (ParamTensor* p : model.all_parameters()) blob.tensors.push_back(p->values);
    detail::write_blob(blob, path);
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
    detail::Blob blob = detail::read_blob(path);
    if (blob.header.value("container", "") != "checkpoint")
        throw DataError("not a model checkpoint: " + path.string());
    return model_config_from_json(blob.header.at("model"));
}

ClassifierModel load_checkpoint(const std::filesystem::path& path, const ModelConfig& config) {
    detail::Blob blob = detail::read_blob(path);
    if (blob.header.value("container", "") != "checkpoint")
        throw DataError("not a model checkpoint: " + path.string());

    const ModelConfig stored = model_config_from_json(blob.header.at("model"));
    check_architecture_match(config, stored, path);

    BackboneDef def;
    def.name = stored.backbone_name;
    def.arch = detail::arch_from_json(blob.header.at("backbone_arch"));

    ModelConfig effective = stored;
    effective.freeze_policy = config.freeze_policy;
    effective.unfreeze_top_n = config.unfreeze_top_n;
    effective.dropout_rate = config.dropout_rate;

    ClassifierModel model(effective, std::move(def), /*seed=*/0,
                          blob.header.value("backbone_standin", false));
    auto params = model.all_parameters();
    if (params.size() != blob.tensors.size())
        throw DataError("checkpoint " + path.string() + " holds " +
                        std::to_string(blob.tensors.size()) + " tensors, model needs " +
                        std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->size() != blob.tensors[i].size())
            throw DataError("checkpoint tensor " + std::to_string(i) + " size mismatch in " +
                            path.string());
        params[i]->values = std::move(blob.tensors[i]);
    }
    return model;
}

void export_backbone(const ClassifierModel& model, const std::filesystem::path& path) {
    BackboneDef def;
    def.name = model.backbone_name();
    def.arch = model.backbone_arch();

    const std::size_t backbone_params = [&model] {
        std::size_t count = 0;
        for (const auto& spec : model.backbone_arch())
            if (spec.kind == "conv" || spec.kind == "dense") count += 2;
        return count;
    }();
    auto params = model.all_parameters();
    for (std::size_t i = 0; i < backbone_params && i < params.size(); ++i)
        def.weights.push_back(params[i]->values);
    save_backbone_file(def, path);
}

} // namespace cyto
