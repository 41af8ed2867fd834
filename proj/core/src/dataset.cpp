#include "cytoclass/dataset.hpp"

#include "cytoclass/errors.hpp"
#include "cytoclass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cyto {

namespace fs = std::filesystem;

namespace {

const char* kManifestMagic = "# cytoclass index v1";

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".tif" || ext == ".tiff";
}

std::vector<SampleRecord> sorted_by_id(const std::vector<SampleRecord>& in) {
    std::vector<SampleRecord> out = in;
    std::sort(out.begin(), out.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

DatasetIndex::DatasetIndex(std::vector<SampleRecord> samples, Lineage lineage)
    : samples_(std::move(samples)), lineage_(std::move(lineage)) {
    std::set<std::string> ids;
    for (const auto& s : samples_) {
        if (s.label < 0)
            throw DataError("sample '" + s.id + "' has no valid label");
        if (!ids.insert(s.id).second)
            throw DataError("duplicate sample id: " + s.id);
    }
}

std::map<int, std::size_t> DatasetIndex::class_counts() const {
    std::map<int, std::size_t> counts;
    for (const auto& s : samples_) ++counts[s.label];
    return counts;
}

ScanResult scan_dataset(const fs::path& root, const ClassTaxonomy& taxonomy) {
    if (!fs::exists(root) || !fs::is_directory(root))
        throw IoError("dataset root does not exist: " + root.string());

    // Directory iteration order is unspecified; sort for reproducible ids.
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    ScanResult result;
    std::vector<SampleRecord> samples;
    for (const auto& dir : class_dirs) {
        const std::string code = dir.filename().string();
        auto label = taxonomy.try_index_of(code);

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && has_image_extension(entry.path()))
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());

        if (!label) {
            result.warnings.push_back("folder '" + code + "' is not a known class code; " +
                                      std::to_string(files.size()) + " file(s) skipped");
            continue;
        }
        for (const auto& f : files) {
            SampleRecord rec;
            rec.id = code + "/" + f.filename().string();
            rec.path = f;
            rec.label = *label;
            samples.push_back(std::move(rec));
        }
    }

    if (samples.empty())
        throw DataError("no samples found under dataset root: " + root.string());

    Lineage lineage;
    lineage.source_root = root.string();
    result.index = DatasetIndex(std::move(samples), std::move(lineage));
    return result;
}

DatasetIndex sample_subset(const DatasetIndex& index, double fraction, std::uint64_t seed,
                           bool stratified) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ConfigError("subset fraction must be in (0, 1], got " + format_double(fraction));

    std::vector<SampleRecord> picked;
    if (!stratified) {
        auto pool = sorted_by_id(index.samples());
        Rng rng(seed);
        rng.shuffle(pool);
        auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool.size())));
        picked.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
        std::map<int, std::vector<SampleRecord>> by_class;
        for (const auto& s : sorted_by_id(index.samples())) by_class[s.label].push_back(s);
        for (auto& [label, pool] : by_class) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
            rng.shuffle(pool);
            auto take = static_cast<std::size_t>(
                std::floor(fraction * static_cast<double>(pool.size())));
            picked.insert(picked.end(), pool.begin(),
                          pool.begin() + static_cast<std::ptrdiff_t>(take));
        }
    }

    Lineage lineage = index.lineage();
    lineage.subset_fraction = fraction;
    lineage.subset_seed = seed;
    return DatasetIndex(std::move(picked), std::move(lineage));
}

SplitResult stratified_split(const DatasetIndex& index, double train_fraction,
                             std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("train fraction must be in (0, 1), got " + format_double(train_fraction));

    std::map<int, std::vector<SampleRecord>> by_class;
    for (const auto& s : sorted_by_id(index.samples())) by_class[s.label].push_back(s);

    SplitResult result;
    std::vector<SampleRecord> train, val;
    for (auto& [label, pool] : by_class) {
        if (pool.size() == 1) {
            result.warnings.push_back("class index " + std::to_string(label) +
                                      " has a single sample; assigned to train");
            train.push_back(pool.front());
            continue;
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        rng.shuffle(pool);
        auto n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(pool.size())));
        train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
        val.insert(val.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
    }

    Lineage base = index.lineage();
    base.train_fraction = train_fraction;
    base.split_seed = seed;

    Lineage train_lineage = base;
    train_lineage.split_name = "train";
    Lineage val_lineage = base;
    val_lineage.split_name = "val";

    result.train = DatasetIndex(std::move(train), std::move(train_lineage));
    result.val = DatasetIndex(std::move(val), std::move(val_lineage));
    return result;
}

void write_index_manifest(const DatasetIndex& index, const ClassTaxonomy& taxonomy,
                          const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write index manifest: " + path.string());

    const Lineage& lin = index.lineage();
    out << kManifestMagic << "\n";
    out << "# root: " << lin.source_root << "\n";
    if (lin.subset_fraction)
        out << "# subset_fraction: " << format_double(*lin.subset_fraction) << "\n";
    if (lin.subset_seed) out << "# subset_seed: " << *lin.subset_seed << "\n";
    if (!lin.split_name.empty()) out << "# split: " << lin.split_name << "\n";
    if (lin.train_fraction)
        out << "# train_fraction: " << format_double(*lin.train_fraction) << "\n";
    if (lin.split_seed) out << "# split_seed: " << *lin.split_seed << "\n";
    out << "# samples: " << index.size() << "\n";

    const fs::path root(lin.source_root);
    for (const auto& s : index.samples()) {
        std::string rel = s.path.lexically_relative(root).generic_string();
        if (rel.empty() || rel.front() == '.') rel = s.path.generic_string();
        out << s.id << "\t" << rel << "\t" << taxonomy.code(s.label) << "\n";
    }
    if (!out) throw IoError("failed writing index manifest: " + path.string());
}

DatasetIndex read_index_manifest(const fs::path& path, const ClassTaxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open index manifest: " + path.string());

    Lineage lineage;
    std::vector<SampleRecord> samples;
    std::string line;
    int lineno = 0;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (lineno == 1) {
                if (line != kManifestMagic)
                    throw DataError(path.string() + ": not a cytoclass index manifest");
                saw_magic = true;
                continue;
            }
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(2, colon - 2);
            std::string value = line.substr(colon + 1);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            try {
                if (key == "root") lineage.source_root = value;
                else if (key == "subset_fraction") lineage.subset_fraction = std::stod(value);
                else if (key == "subset_seed") lineage.subset_seed = std::stoull(value);
                else if (key == "split") lineage.split_name = value;
                else if (key == "train_fraction") lineage.train_fraction = std::stod(value);
                else if (key == "split_seed") lineage.split_seed = std::stoull(value);
            } catch (const std::exception&) {
                throw DataError(path.string() + " line " + std::to_string(lineno) +
                                ": bad value for '" + key + "'");
            }
            continue;
        }
        if (!saw_magic)
            throw DataError(path.string() + ": not a cytoclass index manifest");

        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw DataError(path.string() + " line " + std::to_string(lineno) +
                            ": expected 'id<TAB>path<TAB>code'");
        SampleRecord rec;
        rec.id = line.substr(0, t1);
        fs::path rel(line.substr(t1 + 1, t2 - t1 - 1));
        rec.path = rel.is_absolute() || lineage.source_root.empty()
                       ? rel
                       : fs::path(lineage.source_root) / rel;
        rec.label = taxonomy.index_of(line.substr(t2 + 1));
        samples.push_back(std::move(rec));
    }
    return DatasetIndex(std::move(samples), std::move(lineage));
}

} // namespace cyto
