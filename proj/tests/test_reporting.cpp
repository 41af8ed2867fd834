#include "cytoclass/report.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/manifest.hpp"
#include "cytoclass/rng.hpp"
#include "cytoclass/version.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace cyto;

namespace {

std::vector<MetricsReport> reference_reports() {
    MetricsReport train;
    train.set_name = "Training";
    train.loss = 5.7916;
    train.accuracy = 0.9639;
    train.precision = 0.6214;
    train.recall = 0.6171;
    train.auc = 0.8472;
    MetricsReport val;
    val.set_name = "Validation";
    val.loss = 7.2734;
    val.accuracy = 0.9619;
    val.precision = 0.6;
    val.recall = 0.5968;
    val.auc = 0.8297;
    return {train, val};
}

RunManifest sample_manifest() {
    RunManifest m;
    m.run_id = "run-20260101-000000-abcd";
    m.timestamp = "2026-01-01T00:00:00Z";
    m.artifact_version = kVersion;
    m.taxonomy_hash = "0123456789abcdef";
    m.dataset_root = "/data/cells";
    m.train_lineage.source_root = "/data/cells";
    m.train_lineage.subset_fraction = 0.2;
    m.train_lineage.subset_seed = 7;
    m.train_lineage.split_name = "train";
    m.train_lineage.train_fraction = 0.8;
    m.train_lineage.split_seed = 9;
    m.val_lineage = m.train_lineage;
    m.val_lineage.split_name = "val";
    m.model.backbone_name = "tiny-conv";
    m.model.input_size = 32;
    m.model.num_classes = 21;
    m.model.head_dense_units = 64;
    m.model.dropout_rate = 0.25;
    m.model.freeze_policy = FreezePolicy::unfreeze_all;
    m.training.batch_size = 32;
    m.training.epochs = 5;
    m.training.learning_rate = 1e-4;
    m.training.seed = 11;
    m.checkpoints = {"checkpoints/epoch_1", "checkpoints/epoch_2"};
    return m;
}

} // namespace

TEST_CASE("render_report formats the reference rows") {
    const std::string table = render_report(reference_reports());
    CHECK(table.find("Set") != std::string::npos);
    CHECK(table.find("Training   | 5.7916 | 96.39%") != std::string::npos);
    CHECK(table.find("Validation | 7.2734 | 96.19% | 0.6000 | 0.5968 | 0.8297") !=
          std::string::npos);
}

TEST_CASE("render_report is byte-stable") {
    CHECK(render_report(reference_reports()) == render_report(reference_reports()));
}

TEST_CASE("a perfect classifier row renders as 100.00% and 1.0000") {
    MetricsReport perfect;
    perfect.set_name = "Validation";
    perfect.loss = 0.0;
    perfect.accuracy = 1.0;
    perfect.precision = 1.0;
    perfect.recall = 1.0;
    perfect.auc = 1.0;
    const std::string table = render_report({perfect});
    CHECK(table.find("100.00%") != std::string::npos);
    CHECK(table.find("1.0000") != std::string::npos);
    CHECK(table.find("0.0000") != std::string::npos);
}

TEST_CASE("render then parse recovers values at printed precision") {
    auto reports = reference_reports();
    auto parsed = parse_report_table(render_report(reports));
    REQUIRE(parsed.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(parsed[i].set_name == reports[i].set_name);
        CHECK(parsed[i].loss == doctest::Approx(reports[i].loss).epsilon(1e-12));
        CHECK(parsed[i].accuracy == doctest::Approx(reports[i].accuracy).epsilon(1e-12));
        CHECK(parsed[i].precision == doctest::Approx(reports[i].precision).epsilon(1e-12));
        CHECK(parsed[i].recall == doctest::Approx(reports[i].recall).epsilon(1e-12));
        CHECK(parsed[i].auc == doctest::Approx(reports[i].auc).epsilon(1e-12));
    }

    SUBCASE("random reports also survive the round trip") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            MetricsReport r;
            r.set_name = "Validation";
            r.loss = 10.0 * rng.next_double();
            r.accuracy = rng.next_double();
            r.precision = rng.next_double();
            r.recall = rng.next_double();
            r.auc = rng.next_double();
            auto round = parse_report_table(render_report({r}));
            REQUIRE(round.size() == 1);
            CHECK(std::abs(round[0].loss - r.loss) < 5e-5);
            CHECK(std::abs(round[0].accuracy - r.accuracy) < 5e-5);
            CHECK(std::abs(round[0].auc - r.auc) < 5e-5);
        }
    }
}

TEST_CASE("render_report rejects empty input") {
    CHECK_THROWS_AS((void)render_report({}), ConfigError);
}

TEST_CASE("report struct round trip") {
    testutil::TempDir dir("report");
    const auto path = dir.path() / "report.struct";
    auto reports = reference_reports();
    write_report_struct(reports, path);
    auto loaded = read_report_struct(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == reports[0]);
    CHECK(loaded[1] == reports[1]);

    SUBCASE("missing field is named in the error") {
        const auto bad = dir.path() / "bad.struct";
        std::ofstream(bad) << R"({"reports":[{"set":"Training","loss":1.0}]})";
        try {
            (void)read_report_struct(bad);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("accuracy") != std::string::npos);
        }
    }
}

TEST_CASE("manifest round trip is field-for-field") {
    testutil::TempDir dir("manifest_rt");
    RunManifest m = sample_manifest();
    write_manifest(dir.path(), m);
    RunManifest loaded = read_manifest(dir.path());
    CHECK(loaded == m);
}

TEST_CASE("manifest round trip over randomized field values") {
    testutil::TempDir dir("manifest_rand");
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        RunManifest m = sample_manifest();
        m.run_id = "run-" + std::to_string(rng.next_u64());
        m.training.seed = rng.next_u64();
        m.training.learning_rate = rng.next_double() + 1e-6;
        m.train_lineage.subset_fraction = rng.next_double() + 1e-3;
        m.model.input_size = 1 + static_cast<int>(rng.next_below(512));
        m.checkpoints.clear();
        const int n_ckpt = static_cast<int>(rng.next_below(6));
        for (int i = 0; i < n_ckpt; ++i)
            m.checkpoints.push_back("checkpoints/epoch_" + std::to_string(i + 1));
        write_manifest(dir.path(), m);
        CHECK(read_manifest(dir.path()) == m);
    }
}

TEST_CASE("manifest parse errors") {
    testutil::TempDir dir("manifest_err");

    SUBCASE("missing required field is named") {
        std::ofstream(dir.path() / "manifest")
            << R"({"run_id":"x","timestamp":"t","artifact_version":"v"})";
        try {
            (void)read_manifest(dir.path());
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("taxonomy_hash") != std::string::npos);
        }
    }
    SUBCASE("malformed document reports the line") {
        std::ofstream(dir.path() / "manifest") << "{\n  \"run_id\": \"x\",\n  broken\n}\n";
        try {
            (void)read_manifest(dir.path());
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("missing manifest file is an io error") {
        CHECK_THROWS_AS((void)read_manifest(dir.path() / "nowhere"), IoError);
    }
}
