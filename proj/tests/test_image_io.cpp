#include "cytoclass/image_io.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/fixture.hpp"
#include "cytoclass/taxonomy.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <fstream>

using namespace cyto;

namespace {

std::filesystem::path write_flat_png(const std::filesystem::path& dir, const char* name,
                                     unsigned char value, int size = 8) {
    cv::Mat img(size, size, CV_8UC3, cv::Scalar(value, value, value));
    const auto path = dir / name;
    cv::imwrite(path.string(), img);
    return path;
}

SampleRecord record(const std::filesystem::path& path, int label) {
    return {path.string(), path, label};
}

} // namespace

TEST_CASE("load_batch normalizes to [-1, 1]") {
    testutil::TempDir dir("imgio");
    const auto black = write_flat_png(dir.path(), "black.png", 0);
    const auto white = write_flat_png(dir.path(), "white.png", 255);

    ImageBatch batch = load_batch({record(black, 0), record(white, 1)}, 8);
    REQUIRE(batch.pixels.shape == std::array<int, 4>{2, 8, 8, 3});
    for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w)
            for (int c = 0; c < 3; ++c) {
                CHECK(batch.pixels.at(0, h, w, c) == doctest::Approx(-1.0f));
                CHECK(batch.pixels.at(1, h, w, c) == doctest::Approx(1.0f));
            }
    CHECK(batch.labels == std::vector<int>{0, 1});
}

TEST_CASE("load_batch resizes and keeps values bounded") {
    testutil::TempDir dir("imgio_resize");
    const auto tax = ClassTaxonomy::builtin();
    generate_synthetic_fixture({{"BAS", 3}}, 37, 5, dir.path(), tax);

    std::vector<SampleRecord> records;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "BAS"))
        records.push_back(record(entry.path(), 2));
    REQUIRE(records.size() == 3);

    ImageBatch batch = load_batch(records, 24);
    CHECK(batch.pixels.shape == std::array<int, 4>{3, 24, 24, 3});
    CHECK(batch.labels.size() == 3);
    for (float v : batch.pixels.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("undecodable file aborts the batch naming the path") {
    testutil::TempDir dir("imgio_bad");
    const auto bad = dir.path() / "broken.png";
    std::ofstream(bad) << "this is not an image";
    try {
        (void)load_batch({record(bad, 0)}, 8);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("broken.png") != std::string::npos);
    }
}

TEST_CASE("augmentation is deterministic per seed and stays bounded") {
    testutil::TempDir dir("imgio_aug");
    const auto tax = ClassTaxonomy::builtin();
    generate_synthetic_fixture({{"MON", 4}}, 16, 9, dir.path(), tax);
    std::vector<SampleRecord> records;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "MON"))
        records.push_back(record(entry.path(), 12));

    AugmentOptions aug;
    aug.enabled = true;
    aug.seed = 77;
    ImageBatch a = load_batch(records, 16, aug);
    ImageBatch b = load_batch(records, 16, aug);
    CHECK(a.pixels.data == b.pixels.data);
    for (float v : a.pixels.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
    CHECK(a.pixels.shape == std::array<int, 4>{4, 16, 16, 3});
}
