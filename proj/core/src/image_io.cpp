#include "cytoclass/image_io.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/rng.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace cyto {

ImageBatch load_batch(const std::vector<SampleRecord>& records, int input_size,
                      const AugmentOptions& augment) {
    if (input_size <= 0)
        throw ConfigError("input size must be positive, got " + std::to_string(input_size));

    ImageBatch batch;
    batch.pixels = Tensor(static_cast<int>(records.size()), input_size, input_size, 3);
    batch.labels.reserve(records.size());

    Rng rng(augment.seed);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        cv::Mat img = cv::imread(rec.path.string(), cv::IMREAD_COLOR);
        if (img.empty())
            throw DataError("cannot decode image: " + rec.path.string());

        cv::Mat resized;
        if (img.rows == input_size && img.cols == input_size)
            resized = img;
        else
            cv::resize(img, resized, cv::Size(input_size, input_size), 0, 0, cv::INTER_LINEAR);

        const bool flip = augment.enabled && rng.next_double() < 0.5;
        if (flip) cv::flip(resized, resized, 1);

        // OpenCV decodes BGR; store RGB, mapped to [-1, 1] via x / 127.5 - 1.
        float* dst = &batch.pixels.at(static_cast<int>(i), 0, 0, 0);
        for (int y = 0; y < input_size; ++y) {
            const cv::Vec3b* row = resized.ptr<cv::Vec3b>(y);
            for (int x = 0; x < input_size; ++x) {
                const cv::Vec3b& px = row[x];
                *dst++ = static_cast<float>(px[2]) / 127.5f - 1.0f;
                *dst++ = static_cast<float>(px[1]) / 127.5f - 1.0f;
                *dst++ = static_cast<float>(px[0]) / 127.5f - 1.0f;
            }
        }
        batch.labels.push_back(rec.label);
    }
    return batch;
}

} // namespace cyto
