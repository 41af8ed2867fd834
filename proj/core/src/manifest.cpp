#include "cytoclass/manifest.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace cyto {

namespace {

using nlohmann::json;

json lineage_to_json(const Lineage& lin) {
    json j;
    j["source_root"] = lin.source_root;
    if (lin.subset_fraction) j["subset_fraction"] = *lin.subset_fraction;
    if (lin.subset_seed) j["subset_seed"] = *lin.subset_seed;
    if (!lin.split_name.empty()) j["split"] = lin.split_name;
    if (lin.train_fraction) j["train_fraction"] = *lin.train_fraction;
    if (lin.split_seed) j["split_seed"] = *lin.split_seed;
    return j;
}

Lineage lineage_from_json(const json& j) {
    Lineage lin;
    lin.source_root = j.value("source_root", "");
    if (j.contains("subset_fraction")) lin.subset_fraction = j["subset_fraction"].get<double>();
    if (j.contains("subset_seed")) lin.subset_seed = j["subset_seed"].get<std::uint64_t>();
    lin.split_name = j.value("split", "");
    if (j.contains("train_fraction")) lin.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("split_seed")) lin.split_seed = j["split_seed"].get<std::uint64_t>();
    return lin;
}

const json& require_field(const json& j, const char* field, const char* context) {
    if (!j.contains(field))
        throw DataError(std::string(context) + ": missing required field '" + field + "'");
    return j.at(field);
}

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace

std::string make_run_id(std::uint64_t entropy) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "run-%04d%02d%02d-%02d%02d%02d-%04x", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<unsigned>(entropy & 0xffff));
    return buf;
}

std::string current_timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    if (ec) throw IoError("cannot create run directory: " + run_dir.string());

    json j;
    j["run_id"] = m.run_id;
    j["timestamp"] = m.timestamp;
    j["artifact_version"] = m.artifact_version;
    j["taxonomy_hash"] = m.taxonomy_hash;
    j["dataset"] = {{"root", m.dataset_root},
                    {"train_lineage", lineage_to_json(m.train_lineage)},
                    {"val_lineage", lineage_to_json(m.val_lineage)}};
    j["model"] = {{"backbone_name", m.model.backbone_name},
                  {"input_size", m.model.input_size},
                  {"num_classes", m.model.num_classes},
                  {"head_dense_units", m.model.head_dense_units},
                  {"dropout_rate", m.model.dropout_rate},
                  {"freeze_policy", to_string(m.model.freeze_policy)},
                  {"unfreeze_top_n", m.model.unfreeze_top_n}};
    j["backbone_random_standin"] = m.backbone_random_standin;
    j["training"] = {{"batch_size", m.training.batch_size},
                     {"epochs", m.training.epochs},
                     {"optimizer", m.training.optimizer},
                     {"learning_rate", m.training.learning_rate},
                     {"beta1", m.training.beta1},
                     {"beta2", m.training.beta2},
                     {"epsilon", m.training.epsilon},
                     {"loss", m.training.loss},
                     {"seed", m.training.seed}};
    j["checkpoints"] = m.checkpoints;

    const std::filesystem::path path = run_dir / "manifest";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest: " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
    const std::filesystem::path path = run_dir / "manifest";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("manifest " + path.string() + " line " +
                        std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
    }

    RunManifest m;
    m.run_id = require_field(j, "run_id", "manifest").get<std::string>();
    m.timestamp = require_field(j, "timestamp", "manifest").get<std::string>();
    m.artifact_version = require_field(j, "artifact_version", "manifest").get<std::string>();
    m.taxonomy_hash = require_field(j, "taxonomy_hash", "manifest").get<std::string>();

    const json& ds = require_field(j, "dataset", "manifest");
    m.dataset_root = require_field(ds, "root", "manifest.dataset").get<std::string>();
    m.train_lineage = lineage_from_json(require_field(ds, "train_lineage", "manifest.dataset"));
    m.val_lineage = lineage_from_json(require_field(ds, "val_lineage", "manifest.dataset"));

    const json& mo = require_field(j, "model", "manifest");
    m.model.backbone_name = require_field(mo, "backbone_name", "manifest.model").get<std::string>();
    m.model.input_size = require_field(mo, "input_size", "manifest.model").get<int>();
    m.model.num_classes = require_field(mo, "num_classes", "manifest.model").get<int>();
    m.model.head_dense_units =
        require_field(mo, "head_dense_units", "manifest.model").get<int>();
    m.model.dropout_rate = require_field(mo, "dropout_rate", "manifest.model").get<double>();
    m.model.freeze_policy = freeze_policy_from_string(
        require_field(mo, "freeze_policy", "manifest.model").get<std::string>());
    m.model.unfreeze_top_n = mo.value("unfreeze_top_n", 0);
    m.backbone_random_standin = j.value("backbone_random_standin", false);

    const json& tr = require_field(j, "training", "manifest");
    m.training.batch_size = require_field(tr, "batch_size", "manifest.training").get<int>();
    m.training.epochs = require_field(tr, "epochs", "manifest.training").get<int>();
    m.training.optimizer = tr.value("optimizer", "adam");
    m.training.learning_rate =
        require_field(tr, "learning_rate", "manifest.training").get<double>();
    m.training.beta1 = tr.value("beta1", 0.9);
    m.training.beta2 = tr.value("beta2", 0.999);
    m.training.epsilon = tr.value("epsilon", 1e-7);
    m.training.loss = tr.value("loss", "categorical_cross_entropy");
    m.training.seed = require_field(tr, "seed", "manifest.training").get<std::uint64_t>();

    if (j.contains("checkpoints"))
        for (const auto& c : j["checkpoints"]) m.checkpoints.push_back(c.get<std::string>());
    return m;
}

} // namespace cyto
