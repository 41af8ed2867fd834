#include "cytoclass/taxonomy.hpp"

#include "cytoclass/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cyto {

namespace {

std::string trim(const std::string& s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

} // namespace

ClassTaxonomy ClassTaxonomy::builtin() {
    return ClassTaxonomy({
        {"ABE", "Abnormal eosinophil"},
        {"ART", "Artefact"},
        {"BAS", "Basophil"},
        {"BLA", "Blast"},
        {"EBO", "Erythroblast"},
        {"EOS", "Eosinophil"},
        {"FGC", "Faggott cell"},
        {"HAC", "Hairy cell"},
        {"KSC", "Smudge cell"},
        {"LYI", "Immature lymphocyte"},
        {"LYT", "Lymphocyte"},
        {"MMZ", "Metamyelocyte"},
        {"MON", "Monocyte"},
        {"MYB", "Myelocyte"},
        {"NGB", "Band neutrophil"},
        {"NGS", "Segmented neutrophil"},
        {"NIF", "Not identifiable"},
        {"OTH", "Other cells"},
        {"PEB", "Proerythroblast"},
        {"PLM", "Plasma cell"},
        {"PMO", "Promyelocyte"},
    });
}

ClassTaxonomy ClassTaxonomy::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open taxonomy file: " + path.string());

    std::vector<Entry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        Entry e;
        ls >> e.code;
        std::string rest;
        std::getline(ls, rest);
        e.name = trim(rest);
        if (e.code.empty() || e.name.empty())
            throw DataError("taxonomy file " + path.string() + " line " +
                            std::to_string(lineno) + ": expected 'CODE Name'");
        entries.push_back(std::move(e));
    }
    return ClassTaxonomy(std::move(entries));
}

ClassTaxonomy::ClassTaxonomy(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (static_cast<int>(entries_.size()) != kNumClasses)
        throw DataError("taxonomy must have exactly " + std::to_string(kNumClasses) +
                        " entries, got " + std::to_string(entries_.size()));
    index_.reserve(entries_.size());
    for (int i = 0; i < static_cast<int>(entries_.size()); ++i)
        index_.emplace_back(entries_[i].code, i);
    std::sort(index_.begin(), index_.end());
    for (std::size_t i = 1; i < index_.size(); ++i)
        if (index_[i].first == index_[i - 1].first)
            throw DataError("taxonomy has duplicate code: " + index_[i].first);
}

const ClassTaxonomy::Entry& ClassTaxonomy::entry(int index) const {
    if (index < 0 || index >= size())
        throw DataError("class index out of range: " + std::to_string(index));
    return entries_[static_cast<std::size_t>(index)];
}

std::optional<int> ClassTaxonomy::try_index_of(const std::string& code) const {
    auto it = std::lower_bound(index_.begin(), index_.end(),
                               std::make_pair(code, 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it == index_.end() || it->first != code) return std::nullopt;
    return it->second;
}

int ClassTaxonomy::index_of(const std::string& code) const {
    auto idx = try_index_of(code);
    if (!idx) throw DataError("unknown class code: " + code);
    return *idx;
}

std::uint64_t ClassTaxonomy::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    };
    for (const auto& e : entries_) {
        mix(e.code);
        mix(e.name);
    }
    return h;
}

std::string ClassTaxonomy::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return std::string(buf);
}

} // namespace cyto
