#pragma once

#include "cytoclass/dataset.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                ("cytoclass_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// In-memory index with `count` samples spread over the given labels.
inline cyto::DatasetIndex make_index(const std::vector<int>& labels_per_sample,
                                     const std::string& root = "/synthetic") {
    std::vector<cyto::SampleRecord> samples;
    for (std::size_t i = 0; i < labels_per_sample.size(); ++i) {
        cyto::SampleRecord rec;
        rec.id = "s" + std::to_string(i);
        rec.path = std::filesystem::path(root) / rec.id;
        rec.label = labels_per_sample[i];
        samples.push_back(std::move(rec));
    }
    cyto::Lineage lineage;
    lineage.source_root = root;
    return cyto::DatasetIndex(std::move(samples), std::move(lineage));
}

inline std::vector<std::string> id_set(const cyto::DatasetIndex& index) {
    std::vector<std::string> ids;
    for (const auto& s : index.samples()) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace testutil
