#pragma once

#include "cytoclass/dataset.hpp"
#include "cytoclass/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cyto {

/// A decoded, normalized batch: pixels are NHWC float32 in [-1, 1]
/// (x / 127.5 - 1), labels aligned positionally with the pixel rows.
struct ImageBatch {
    Tensor pixels;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

struct AugmentOptions {
    bool enabled = false;       // default off: the reference run uses none
    std::uint64_t seed = 0;     // horizontal flips are drawn from this seed
};

/// Decodes each record as RGB, resizes to input_size x input_size with
/// bilinear interpolation and normalizes intensities to [-1, 1].
/// An undecodable file aborts the batch with an error naming the path.
ImageBatch load_batch(const std::vector<SampleRecord>& records, int input_size,
                      const AugmentOptions& augment = {});

} // namespace cyto
