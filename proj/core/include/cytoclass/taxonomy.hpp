#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cyto {

/// Fixed, ordered 21-entry table of cell classes. Every label index used by
/// the dataset, model and metrics code is an index into this table.
class ClassTaxonomy {
public:
    struct Entry {
        std::string code; // three-letter class code, e.g. "BAS"
        std::string name; // human-readable name, e.g. "Basophil"
    };

    static constexpr int kNumClasses = 21;

    // The built-in class list, ordered alphabetically by code.
    static ClassTaxonomy builtin();

    // Override from a text file: one entry per line, "CODE Name...",
    // '#' starts a comment. Must contain exactly 21 unique codes.
    static ClassTaxonomy from_file(const std::filesystem::path& path);

    explicit ClassTaxonomy(std::vector<Entry> entries);

    int size() const { return static_cast<int>(entries_.size()); }
    const std::vector<Entry>& entries() const { return entries_; }

    const Entry& entry(int index) const;

    /// Index for a class code, or a data error for an unknown code.
    int index_of(const std::string& code) const;
    std::optional<int> try_index_of(const std::string& code) const;

    const std::string& code(int index) const { return entry(index).code; }
    const std::string& name(int index) const { return entry(index).name; }

    bool has_code(const std::string& code) const { return try_index_of(code).has_value(); }

    /// FNV-1a over the ordered (code, name) pairs; stamped into run manifests.
    std::uint64_t hash() const;
    std::string hash_hex() const;

private:
    std::vector<Entry> entries_;
    std::vector<std::pair<std::string, int>> index_; // sorted code -> index
};

} // namespace cyto
