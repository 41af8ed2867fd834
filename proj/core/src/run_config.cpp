#include "cytoclass/run_config.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/taxonomy.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cyto {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& section) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
}

template <typename T>
T take(const json& obj, const char* key, const T& fallback, const std::string& section,
       std::vector<std::string>* notices) {
    if (obj.contains(key)) return obj.at(key).get<T>();
    if (notices) {
        std::ostringstream note;
        note << section << "." << key << " not set; using default";
        notices->push_back(note.str());
    }
    return fallback;
}

} // namespace

void RunConfig::validate() const {
    if (dataset_root.empty()) throw ConfigError("config: dataset.root is required");
    if (run_dir.empty()) throw ConfigError("config: output.run_dir is required");
    if (!(subset_fraction > 0.0) || subset_fraction > 1.0)
        throw ConfigError("config: dataset.subset_fraction must be in (0, 1]");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("config: dataset.train_fraction must be in (0, 1)");
    if (eval_batch_size < 1) throw ConfigError("config: evaluation.batch_size must be >= 1");
    model.validate();
    training.validate();
}

RunConfig parse_run_config(const std::filesystem::path& path,
                           std::vector<std::string>* notices) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();

    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + path.string() + ": expected an object");

    reject_unknown_keys(j, {"dataset", "model", "training", "evaluation", "output"}, "(top)");

    RunConfig config;
    config.model.num_classes = ClassTaxonomy::kNumClasses;

    if (!j.contains("dataset") || !j["dataset"].is_object())
        throw ConfigError("config: missing 'dataset' section");
    {
        const json& ds = j["dataset"];
        reject_unknown_keys(ds,
                            {"root", "taxonomy_file", "subset_fraction", "subset_seed",
                             "subset_stratified", "train_fraction", "split_seed"},
                            "dataset");
        if (!ds.contains("root")) throw ConfigError("config: dataset.root is required");
        config.dataset_root = ds.at("root").get<std::string>();
        if (ds.contains("taxonomy_file"))
            config.taxonomy_file = ds.at("taxonomy_file").get<std::string>();
        config.subset_fraction = take(ds, "subset_fraction", 1.0, "dataset", notices);
        config.subset_seed = take<std::uint64_t>(ds, "subset_seed", 0, "dataset", notices);
        config.subset_stratified = take(ds, "subset_stratified", false, "dataset", notices);
        config.train_fraction = take(ds, "train_fraction", 0.8, "dataset", notices);
        config.split_seed = take<std::uint64_t>(ds, "split_seed", 0, "dataset", notices);
    }

    if (j.contains("model")) {
        const json& mo = j["model"];
        reject_unknown_keys(mo,
                            {"backbone_name", "backbone_weights", "allow_random_backbone",
                             "input_size", "head_dense_units", "dropout_rate", "freeze_policy",
                             "unfreeze_top_n"},
                            "model");
        ModelConfig defaults;
        config.model.backbone_name =
            take(mo, "backbone_name", defaults.backbone_name, "model", notices);
        if (mo.contains("backbone_weights"))
            config.backbone_weights = mo.at("backbone_weights").get<std::string>();
        config.allow_random_backbone =
            take(mo, "allow_random_backbone", false, "model", notices);
        config.model.input_size = take(mo, "input_size", defaults.input_size, "model", notices);
        config.model.head_dense_units =
            take(mo, "head_dense_units", defaults.head_dense_units, "model", notices);
        config.model.dropout_rate =
            take(mo, "dropout_rate", defaults.dropout_rate, "model", notices);
        config.model.freeze_policy = freeze_policy_from_string(
            take<std::string>(mo, "freeze_policy", "freeze_backbone", "model", notices));
        config.model.unfreeze_top_n = take(mo, "unfreeze_top_n", 0, "model", notices);
    } else if (notices) {
        notices->push_back("model section not set; using defaults");
    }

    if (j.contains("training")) {
        const json& tr = j["training"];
        reject_unknown_keys(tr,
                            {"batch_size", "epochs", "optimizer", "learning_rate", "beta1",
                             "beta2", "epsilon", "loss", "seed"},
                            "training");
        TrainConfig defaults;
        config.training.batch_size = take(tr, "batch_size", defaults.batch_size, "training", notices);
        config.training.epochs = take(tr, "epochs", defaults.epochs, "training", notices);
        config.training.optimizer =
            take<std::string>(tr, "optimizer", defaults.optimizer, "training", notices);
        config.training.learning_rate =
            take(tr, "learning_rate", defaults.learning_rate, "training", notices);
        config.training.beta1 = take(tr, "beta1", defaults.beta1, "training", notices);
        config.training.beta2 = take(tr, "beta2", defaults.beta2, "training", notices);
        config.training.epsilon = take(tr, "epsilon", defaults.epsilon, "training", notices);
        config.training.loss = take<std::string>(tr, "loss", defaults.loss, "training", notices);
        config.training.seed = take<std::uint64_t>(tr, "seed", 0, "training", notices);
    } else if (notices) {
        notices->push_back("training section not set; using defaults");
    }

    if (j.contains("evaluation")) {
        const json& ev = j["evaluation"];
        reject_unknown_keys(ev, {"averaging", "batch_size"}, "evaluation");
        config.averaging =
            averaging_from_string(take<std::string>(ev, "averaging", "macro", "evaluation", notices));
        config.eval_batch_size = take(ev, "batch_size", 32, "evaluation", notices);
    }

    if (!j.contains("output") || !j["output"].is_object())
        throw ConfigError("config: missing 'output' section");
    {
        const json& out = j["output"];
        reject_unknown_keys(out, {"run_dir"}, "output");
        if (!out.contains("run_dir")) throw ConfigError("config: output.run_dir is required");
        config.run_dir = out.at("run_dir").get<std::string>();
    }

    config.validate();
    return config;
}

void write_run_config(const RunConfig& config, const std::filesystem::path& path) {
    json j;
    j["dataset"] = {{"root", config.dataset_root},
                    {"subset_fraction", config.subset_fraction},
                    {"subset_seed", config.subset_seed},
                    {"subset_stratified", config.subset_stratified},
                    {"train_fraction", config.train_fraction},
                    {"split_seed", config.split_seed}};
    if (config.taxonomy_file) j["dataset"]["taxonomy_file"] = *config.taxonomy_file;
    j["model"] = {{"backbone_name", config.model.backbone_name},
                  {"allow_random_backbone", config.allow_random_backbone},
                  {"input_size", config.model.input_size},
                  {"head_dense_units", config.model.head_dense_units},
                  {"dropout_rate", config.model.dropout_rate},
                  {"freeze_policy", to_string(config.model.freeze_policy)},
                  {"unfreeze_top_n", config.model.unfreeze_top_n}};
    if (config.backbone_weights) j["model"]["backbone_weights"] = *config.backbone_weights;
    j["training"] = {{"batch_size", config.training.batch_size},
                     {"epochs", config.training.epochs},
                     {"optimizer", config.training.optimizer},
                     {"learning_rate", config.training.learning_rate},
                     {"beta1", config.training.beta1},
                     {"beta2", config.training.beta2},
                     {"epsilon", config.training.epsilon},
                     {"loss", config.training.loss},
                     {"seed", config.training.seed}};
    j["evaluation"] = {{"averaging", to_string(config.averaging)},
                       {"batch_size", config.eval_batch_size}};
    j["output"] = {{"run_dir", config.run_dir}};

    std::ofstream out(path);
    if (!out) throw IoError("cannot write config: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing config: " + path.string());
}

} // namespace cyto
