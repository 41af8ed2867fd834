// cytoclass: bone marrow cell classification pipeline CLI.
//
// Subcommands: dataset (scan|subset|split|fixture), train, evaluate, predict.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 training error, 5 I/O error.

#include "cytoclass/checkpoint.hpp"
#include "cytoclass/classifier.hpp"
#include "cytoclass/dataset.hpp"
#include "cytoclass/errors.hpp"
#include "cytoclass/fixture.hpp"
#include "cytoclass/image_io.hpp"
#include "cytoclass/manifest.hpp"
#include "cytoclass/metrics.hpp"
#include "cytoclass/report.hpp"
#include "cytoclass/rng.hpp"
#include "cytoclass/run_config.hpp"
#include "cytoclass/taxonomy.hpp"
#include "cytoclass/trainer.hpp"
#include "cytoclass/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> run_dir;
    std::optional<std::string> config;
};

cyto::ClassTaxonomy load_taxonomy(const std::optional<std::string>& file) {
    return file ? cyto::ClassTaxonomy::from_file(*file) : cyto::ClassTaxonomy::builtin();
}

void print_class_counts(const cyto::DatasetIndex& index, const cyto::ClassTaxonomy& taxonomy) {
    auto counts = index.class_counts();
    for (const auto& [label, count] : counts)
        std::cout << "  " << taxonomy.code(label) << "  " << count << "\n";
    std::cout << "  total  " << index.size() << "\n";
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void write_warnings_log(const std::vector<std::string>& warnings, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw cyto::IoError("cannot write warnings log: " + path.string());
    for (const auto& w : warnings) out << w << "\n";
}

std::uint64_t runtime_entropy() {
    std::random_device rd;
    const auto now = std::chrono::steady_clock::now().time_since_epoch().count();
    return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(now);
}

// ------------------------------------------------------------------ train

int cmd_train(const GlobalFlags& globals, const std::string& config_flag) {
    const std::string config_path =
        !config_flag.empty() ? config_flag : globals.config.value_or("");
    if (config_path.empty())
        throw cyto::ConfigError("train needs a config file (--config)");

    std::vector<std::string> notices;
    cyto::RunConfig config = cyto::parse_run_config(config_path, &notices);
    for (const auto& n : notices) std::cerr << "notice: " << n << "\n";

    if (globals.run_dir) config.run_dir = *globals.run_dir;
    if (globals.seed) {
        config.training.seed = *globals.seed;
        config.subset_seed = *globals.seed;
        config.split_seed = *globals.seed;
    }
    config.validate();

    const cyto::ClassTaxonomy taxonomy = load_taxonomy(config.taxonomy_file);
    config.model.num_classes = taxonomy.size();

    cyto::ScanResult scan = cyto::scan_dataset(config.dataset_root, taxonomy);
    print_warnings(scan.warnings);

    cyto::DatasetIndex working = scan.index;
    if (config.subset_fraction < 1.0)
        working = cyto::sample_subset(working, config.subset_fraction, config.subset_seed,
                                      config.subset_stratified);

    cyto::SplitResult split =
        cyto::stratified_split(working, config.train_fraction, config.split_seed);
    print_warnings(split.warnings);
    std::cout << "train samples: " << split.train.size()
              << ", val samples: " << split.val.size() << "\n";

    cyto::WeightSource weights;
    if (config.backbone_weights) weights.path = *config.backbone_weights;
    weights.allow_random_init = config.allow_random_backbone;
    cyto::ClassifierModel model =
        cyto::build_classifier(config.model, weights, config.training.seed);
    if (model.backbone_is_random_standin())
        std::cerr << "notice: backbone '" << config.model.backbone_name
                  << "' initialized with random weights (no weight file given)\n";

    const fs::path run_dir(config.run_dir);
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) throw cyto::IoError("cannot create run directory: " + run_dir.string());

    // Manifest goes down before training starts; checkpoints appended after.
    cyto::RunManifest manifest;
    manifest.run_id = cyto::make_run_id(runtime_entropy());
    manifest.timestamp = cyto::current_timestamp_utc();
    manifest.artifact_version = cyto::kVersion;
    manifest.taxonomy_hash = taxonomy.hash_hex();
    manifest.dataset_root = config.dataset_root;
    manifest.train_lineage = split.train.lineage();
    manifest.val_lineage = split.val.lineage();
    manifest.model = config.model;
    manifest.backbone_random_standin = model.backbone_is_random_standin();
    manifest.training = config.training;
    cyto::write_manifest(run_dir, manifest);
    cyto::write_run_config(config, run_dir / "run_config.json");
    cyto::write_index_manifest(split.train, taxonomy, run_dir / "train.index");
    cyto::write_index_manifest(split.val, taxonomy, run_dir / "val.index");

    cyto::TrainOptions options;
    options.checkpoint_dir = run_dir / "checkpoints";
    options.verbose = true;
    cyto::TrainHistory history =
        cyto::train(model, split.train, split.val, config.training, options);
    cyto::write_history_csv(history, run_dir / "history.csv");

    for (int epoch = 1; epoch <= config.training.epochs; ++epoch)
        manifest.checkpoints.push_back(
            (fs::path("checkpoints") / ("epoch_" + std::to_string(epoch))).string());
    cyto::write_manifest(run_dir, manifest);

    std::vector<std::string> eval_warnings;
    std::vector<cyto::MetricsReport> reports;
    reports.push_back(cyto::evaluate(model, split.train, "Training", config.eval_batch_size,
                                     config.averaging, &eval_warnings));
    reports.push_back(cyto::evaluate(model, split.val, "Validation", config.eval_batch_size,
                                     config.averaging, &eval_warnings));
    cyto::write_report_text(reports, run_dir / "report.txt");
    cyto::write_report_struct(reports, run_dir / "report.struct");
    write_warnings_log(eval_warnings, run_dir / "warnings.log");

    std::cout << cyto::render_report(reports);
    if (auto gap = cyto::train_val_accuracy_gap(reports)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", *gap * 100.0);
        std::cout << "train/val accuracy gap: " << buf << " percentage points\n";
    }
    std::cout << "run directory: " << run_dir.string() << "\n";
    return 0;
}

// --------------------------------------------------------------- evaluate

int cmd_evaluate(const std::string& checkpoint, const std::string& index_path,
                 const std::string& set_name, const std::string& inject,
                 const std::string& out_dir, int batch_size, const std::string& averaging,
                 const std::optional<std::string>& taxonomy_file) {
    std::vector<cyto::MetricsReport> reports;
    std::vector<std::string> warnings;

    if (!inject.empty()) {
        // Injection mode: render a report from an existing structured report
        // file instead of running inference.
        reports = cyto::read_report_struct(inject);
    } else {
        if (checkpoint.empty() || index_path.empty())
            throw cyto::ConfigError("evaluate needs --checkpoint and --index (or --inject)");
        const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
        const cyto::ModelConfig stored = cyto::read_checkpoint_config(checkpoint);
        if (stored.num_classes != taxonomy.size())
            throw cyto::DataError("checkpoint has " + std::to_string(stored.num_classes) +
                                  " classes, taxonomy has " + std::to_string(taxonomy.size()));
        cyto::ClassifierModel model = cyto::load_checkpoint(checkpoint, stored);
        cyto::DatasetIndex index = cyto::read_index_manifest(index_path, taxonomy);
        reports.push_back(cyto::evaluate(model, index, set_name, batch_size,
                                         cyto::averaging_from_string(averaging), &warnings));
        print_warnings(warnings);
    }

    const std::string table = cyto::render_report(reports);
    std::cout << table;
    if (auto gap = cyto::train_val_accuracy_gap(reports)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", *gap * 100.0);
        std::cout << "train/val accuracy gap: " << buf << " percentage points\n";
    }

    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw cyto::IoError("cannot create output directory: " + dir.string());
        cyto::write_report_text(reports, dir / "report.txt");
        cyto::write_report_struct(reports, dir / "report.struct");
        write_warnings_log(warnings, dir / "warnings.log");
    }
    return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(const std::string& checkpoint, const std::vector<std::string>& images,
                const std::optional<std::string>& taxonomy_file) {
    const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
    const cyto::ModelConfig stored = cyto::read_checkpoint_config(checkpoint);
    if (stored.num_classes != taxonomy.size())
        throw cyto::DataError("checkpoint has " + std::to_string(stored.num_classes) +
                              " classes, taxonomy has " + std::to_string(taxonomy.size()));
    cyto::ClassifierModel model = cyto::load_checkpoint(checkpoint, stored);

    int failures = 0;
    for (const auto& image : images) {
        cyto::SampleRecord rec;
        rec.id = image;
        rec.path = image;
        rec.label = 0; // unused for prediction
        try {
            cyto::ImageBatch batch = cyto::load_batch({rec}, stored.input_size);
            cyto::ProbabilityMatrix probs = model.predict(batch);
            const int top = probs.argmax(0);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", static_cast<double>(probs.at(0, top)));
            std::cout << image << "\t" << taxonomy.code(top) << "\t" << buf << "\n";
        } catch (const cyto::Error& e) {
            std::cout << image << "\terror[" << e.class_name() << "]: " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures > 0)
        throw cyto::DataError(std::to_string(failures) + " image(s) could not be scored");
    return 0;
}

// ---------------------------------------------------------------- dataset

int cmd_dataset_scan(const std::string& root, const std::string& out,
                     const std::optional<std::string>& taxonomy_file) {
    const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
    cyto::ScanResult scan = cyto::scan_dataset(root, taxonomy);
    print_warnings(scan.warnings);
    if (!out.empty()) cyto::write_index_manifest(scan.index, taxonomy, out);
    std::cout << "scanned " << root << ":\n";
    print_class_counts(scan.index, taxonomy);
    return 0;
}

int cmd_dataset_subset(const std::string& index_path, double fraction, std::uint64_t seed,
                       bool stratified, const std::string& out,
                       const std::optional<std::string>& taxonomy_file) {
    const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
    cyto::DatasetIndex index = cyto::read_index_manifest(index_path, taxonomy);
    cyto::DatasetIndex subset = cyto::sample_subset(index, fraction, seed, stratified);
    cyto::write_index_manifest(subset, taxonomy, out);
    std::cout << "subset of " << index.size() << " samples:\n";
    print_class_counts(subset, taxonomy);
    return 0;
}

int cmd_dataset_split(const std::string& index_path, double train_fraction, std::uint64_t seed,
                      const std::string& out_train, const std::string& out_val,
                      const std::optional<std::string>& taxonomy_file) {
    const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
    cyto::DatasetIndex index = cyto::read_index_manifest(index_path, taxonomy);
    cyto::SplitResult split = cyto::stratified_split(index, train_fraction, seed);
    print_warnings(split.warnings);
    cyto::write_index_manifest(split.train, taxonomy, out_train);
    cyto::write_index_manifest(split.val, taxonomy, out_val);
    std::cout << "train:\n";
    print_class_counts(split.train, taxonomy);
    std::cout << "val:\n";
    print_class_counts(split.val, taxonomy);
    return 0;
}

int cmd_dataset_fixture(const std::string& out, int per_class, const std::string& classes,
                        int image_size, std::uint64_t seed,
                        const std::optional<std::string>& taxonomy_file) {
    const cyto::ClassTaxonomy taxonomy = load_taxonomy(taxonomy_file);
    std::map<std::string, int> spec;
    if (classes == "all") {
        for (const auto& e : taxonomy.entries()) spec[e.code] = per_class;
    } else {
        std::istringstream ss(classes);
        std::string code;
        while (std::getline(ss, code, ',')) {
            if (code.empty()) continue;
            spec[code] = per_class;
        }
        if (spec.empty()) throw cyto::ConfigError("--classes must be 'all' or a comma list");
    }
    cyto::generate_synthetic_fixture(spec, image_size, seed, out, taxonomy);
    long total = 0;
    for (const auto& [code, count] : spec) total += count;
    std::cout << "wrote " << total << " images across " << spec.size() << " classes to " << out
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bone marrow cell classification pipeline"};
    app.set_version_flag("--version", std::string(cyto::kVersion));
    app.require_subcommand(1);

    GlobalFlags globals;
    app.add_option_function<std::uint64_t>(
        "--seed", [&globals](const std::uint64_t& v) { globals.seed = v; },
        "override every seed in the run config");
    app.add_option_function<std::string>(
        "--run-dir", [&globals](const std::string& v) { globals.run_dir = v; },
        "override the output run directory");
    app.add_option_function<std::string>(
        "--config", [&globals](const std::string& v) { globals.config = v; },
        "run configuration file");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "index, subset, split and fixture tools");
    dataset->require_subcommand(1);
    std::string ds_taxonomy;

    auto* scan = dataset->add_subcommand("scan", "index a class-folder image tree");
    std::string scan_root, scan_out;
    scan->add_option("--root", scan_root, "dataset root directory")->required();
    scan->add_option("--out", scan_out, "index manifest to write");
    scan->add_option("--taxonomy", ds_taxonomy, "taxonomy override file");

    auto* subset = dataset->add_subcommand("subset", "draw a random subset of an index");
    std::string subset_index, subset_out;
    double subset_fraction = 0.2;
    std::uint64_t subset_seed = 0;
    bool subset_stratified = false;
    subset->add_option("--index", subset_index, "input index manifest")->required();
    subset->add_option("--fraction", subset_fraction, "fraction in (0, 1]")->required();
    subset->add_option("--seed", subset_seed, "draw seed");
    subset->add_flag("--stratified", subset_stratified, "sample per class instead of globally");
    subset->add_option("--out", subset_out, "output index manifest")->required();
    subset->add_option("--taxonomy", ds_taxonomy, "taxonomy override file");

    auto* split = dataset->add_subcommand("split", "stratified train/val split of an index");
    std::string split_index, split_out_train, split_out_val;
    double split_train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    split->add_option("--index", split_index, "input index manifest")->required();
    split->add_option("--train-fraction", split_train_fraction, "fraction in (0, 1)");
    split->add_option("--seed", split_seed, "shuffle seed");
    split->add_option("--out-train", split_out_train, "train index manifest")->required();
    split->add_option("--out-val", split_out_val, "val index manifest")->required();
    split->add_option("--taxonomy", ds_taxonomy, "taxonomy override file");

    auto* fixture = dataset->add_subcommand("fixture", "generate a synthetic desk-scale dataset");
    std::string fixture_out, fixture_classes = "all";
    int fixture_per_class = 10, fixture_image_size = 64;
    std::uint64_t fixture_seed = 0;
    fixture->add_option("--out", fixture_out, "output directory")->required();
    fixture->add_option("--per-class", fixture_per_class, "images per class");
    fixture->add_option("--classes", fixture_classes, "'all' or comma-separated codes");
    fixture->add_option("--image-size", fixture_image_size, "square image size in pixels");
    fixture->add_option("--seed", fixture_seed, "generation seed");
    fixture->add_option("--taxonomy", ds_taxonomy, "taxonomy override file");

    // train
    auto* train = app.add_subcommand("train", "run the training pipeline from a config file");
    std::string train_config;
    train->add_option("--config", train_config, "run configuration file");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint against an index");
    std::string eval_checkpoint, eval_index, eval_set = "Validation", eval_inject, eval_out;
    std::string eval_averaging = "macro", eval_taxonomy;
    int eval_batch = 32;
    evaluate->add_option("--checkpoint", eval_checkpoint, "model checkpoint");
    evaluate->add_option("--index", eval_index, "index manifest to evaluate");
    evaluate->add_option("--set-name", eval_set, "report row name");
    evaluate->add_option("--inject", eval_inject, "render an existing structured report file");
    evaluate->add_option("--out-dir", eval_out, "directory for report.txt/report.struct");
    evaluate->add_option("--batch-size", eval_batch, "inference batch size");
    evaluate->add_option("--averaging", eval_averaging, "macro or micro");
    evaluate->add_option("--taxonomy", eval_taxonomy, "taxonomy override file");

    // predict
    auto* predict = app.add_subcommand("predict", "classify individual images");
    std::string predict_checkpoint, predict_taxonomy;
    std::vector<std::string> predict_images;
    predict->add_option("--checkpoint", predict_checkpoint, "model checkpoint")->required();
    predict->add_option("images", predict_images, "image files")->required();
    predict->add_option("--taxonomy", predict_taxonomy, "taxonomy override file");

    try {
        app.parse(argc, argv);

        auto opt_taxonomy = [](const std::string& s) {
            return s.empty() ? std::optional<std::string>{} : std::optional<std::string>{s};
        };

        if (scan->parsed())
            return cmd_dataset_scan(scan_root, scan_out, opt_taxonomy(ds_taxonomy));
        if (subset->parsed())
            return cmd_dataset_subset(subset_index, subset_fraction,
                                      globals.seed.value_or(subset_seed), subset_stratified,
                                      subset_out, opt_taxonomy(ds_taxonomy));
        if (split->parsed())
            return cmd_dataset_split(split_index, split_train_fraction,
                                     globals.seed.value_or(split_seed), split_out_train,
                                     split_out_val, opt_taxonomy(ds_taxonomy));
        if (fixture->parsed())
            return cmd_dataset_fixture(fixture_out, fixture_per_class, fixture_classes,
                                       fixture_image_size, globals.seed.value_or(fixture_seed),
                                       opt_taxonomy(ds_taxonomy));
        if (train->parsed()) return cmd_train(globals, train_config);
        if (evaluate->parsed())
            return cmd_evaluate(eval_checkpoint, eval_index, eval_set, eval_inject, eval_out,
                                eval_batch, eval_averaging, opt_taxonomy(eval_taxonomy));
        if (predict->parsed())
            return cmd_predict(predict_checkpoint, predict_images,
                               opt_taxonomy(predict_taxonomy));
        std::cerr << "error[config]: no subcommand given\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        std::cerr << "error[config]: " << e.what() << "\n";
        return 2;
    } catch (const cyto::Error& e) {
        std::cerr << "error[" << e.class_name() << "]: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
}
