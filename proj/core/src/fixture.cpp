#include "cytoclass/fixture.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/rng.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <cstdio>

namespace cyto {

namespace fs = std::filesystem;

namespace {

struct Rgb {
    float r, g, b;
};

Rgb hsv_to_rgb(float h, float s, float v) {
    float c = v * s;
    float hp = h / 60.0f;
    float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
    float r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    float m = v - c;
    return {r + m, g + m, b + m};
}

unsigned char clamp_u8(float v) {
    if (v < 0.0f) return 0;
    if (v > 255.0f) return 255;
    return static_cast<unsigned char>(v + 0.5f);
}

} // namespace

fs::path generate_synthetic_fixture(const std::map<std::string, int>& per_class_counts,
                                    int image_size, std::uint64_t seed, const fs::path& out,
                                    const ClassTaxonomy& taxonomy) {
    if (image_size <= 0)
        throw ConfigError("image size must be positive, got " + std::to_string(image_size));
    for (const auto& [code, count] : per_class_counts) {
        if (!taxonomy.has_code(code))
            throw ConfigError("fixture spec names unknown class code: " + code);
        if (count < 0)
            throw ConfigError("fixture spec has negative count for class " + code);
    }

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out))
        throw IoError("cannot create fixture directory: " + out.string());

    const int k = taxonomy.size();
    for (const auto& [code, count] : per_class_counts) {
        const int label = taxonomy.index_of(code);
        const fs::path class_dir = out / code;
        fs::create_directories(class_dir, ec);
        if (ec) throw IoError("cannot create class directory: " + class_dir.string());

        // Class signature: a golden-angle hue slot (keeps neighbouring label
        // indices far apart on the wheel), a per-label saturation/value step,
        // and an oriented stripe pattern. Together these separate class means
        // enough for a small classifier to learn the fixture.
        const float hue = std::fmod(static_cast<float>(label) * 222.492f, 360.0f);
        const float sat = 0.55f + 0.35f * static_cast<float>((label * 7) % 3) / 2.0f;
        const float val = 0.62f + 0.28f * static_cast<float>((label * 5) % 4) / 3.0f;
        const Rgb base = hsv_to_rgb(hue, sat, val);
        const float angle = static_cast<float>(label) * 3.14159265f / static_cast<float>(k);
        const float freq = (2.0f + static_cast<float>(label % 5)) * 6.2831853f /
                           static_cast<float>(image_size);
        const float ca = std::cos(angle), sa = std::sin(angle);

        for (int i = 0; i < count; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label) * 1000003ULL +
                                          static_cast<std::uint64_t>(i)));
            cv::Mat img(image_size, image_size, CV_8UC3);
            const float phase = rng.next_float(0.0f, 6.2831853f);
            for (int y = 0; y < image_size; ++y) {
                cv::Vec3b* row = img.ptr<cv::Vec3b>(y);
                for (int x = 0; x < image_size; ++x) {
                    const float t = (ca * static_cast<float>(x) + sa * static_cast<float>(y)) * freq + phase;
                    const float stripe = 24.0f * std::sin(t);
                    const float noise = rng.next_float(-14.0f, 14.0f);
                    row[x][0] = clamp_u8(base.b * 255.0f + stripe + noise); // BGR for imwrite
                    row[x][1] = clamp_u8(base.g * 255.0f + stripe + noise);
                    row[x][2] = clamp_u8(base.r * 255.0f + stripe + noise);
                }
            }
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%04d.png", code.c_str(), i);
            const fs::path file = class_dir / name;
            if (!cv::imwrite(file.string(), img))
                throw IoError("cannot write fixture image: " + file.string());
        }
    }
    return out;
}

} // namespace cyto
