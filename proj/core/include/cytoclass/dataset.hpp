#pragma once

#include "cytoclass/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cyto {

/// One labelled cell image.
struct SampleRecord {
    std::string id;             // unique within an index; the path relative to the root
    std::filesystem::path path; // absolute path to the image file
    int label = -1;             // index into the taxonomy
};

/// Provenance of an index: where it came from and which randomized
/// operations produced it.
struct Lineage {
    std::string source_root;
    std::optional<double> subset_fraction;
    std::optional<std::uint64_t> subset_seed;
    std::string split_name; // "", "train" or "val"
    std::optional<double> train_fraction;
    std::optional<std::uint64_t> split_seed;

    bool operator==(const Lineage&) const = default;
};

/// Immutable manifest of samples. All randomized operations on an index are
/// pure functions of (inputs, seed).
class DatasetIndex {
public:
    DatasetIndex() = default;
    DatasetIndex(std::vector<SampleRecord> samples, Lineage lineage);

    const std::vector<SampleRecord>& samples() const { return samples_; }
    const Lineage& lineage() const { return lineage_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    /// Per-class sample counts keyed by label index.
    std::map<int, std::size_t> class_counts() const;

private:
    std::vector<SampleRecord> samples_;
    Lineage lineage_;
};

struct ScanResult {
    DatasetIndex index;
    std::vector<std::string> warnings; // e.g. folders not in the taxonomy
};

/// Walks `<root>/<CLASS_CODE>/<image>` and indexes every readable image file
/// under a recognized class folder. Unrecognized folders are reported in the
/// scan warnings, never silently dropped.
ScanResult scan_dataset(const std::filesystem::path& root, const ClassTaxonomy& taxonomy);

/// Draws floor(fraction * N) samples uniformly without replacement.
/// When `stratified` is set the draw is per class instead (floor per class).
DatasetIndex sample_subset(const DatasetIndex& index, double fraction, std::uint64_t seed,
                           bool stratified = false);

struct SplitResult {
    DatasetIndex train;
    DatasetIndex val;
    std::vector<std::string> warnings; // degenerate single-sample classes
};

/// Per class, floor(train_fraction * n_c) samples go to train and the rest
/// to val. A class with a single sample goes to train with a warning.
SplitResult stratified_split(const DatasetIndex& index, double train_fraction,
                             std::uint64_t seed);

/// Line-delimited text manifest: a '#'-prefixed lineage header block followed
/// by one `id<TAB>relative path<TAB>class code` row per sample.
void write_index_manifest(const DatasetIndex& index, const ClassTaxonomy& taxonomy,
                          const std::filesystem::path& path);
DatasetIndex read_index_manifest(const std::filesystem::path& path,
                                 const ClassTaxonomy& taxonomy);

} // namespace cyto
