#pragma once

#include "cytoclass/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cyto {

/// Aligned text table with columns Set | Loss | Accuracy | Precision |
/// Recall | AUC. Accuracy prints as a percentage with 2 decimals, the other
/// metrics as reals with 4 decimals. Identical inputs give identical bytes.
std::string render_report(const std::vector<MetricsReport>& reports);

/// Inverse of render_report at printed precision.
std::vector<MetricsReport> parse_report_table(const std::string& table);

/// Structured twin of the table (JSON document with one record per set).
void write_report_struct(const std::vector<MetricsReport>& reports,
                         const std::filesystem::path& path);
std::vector<MetricsReport> read_report_struct(const std::filesystem::path& path);

void write_report_text(const std::vector<MetricsReport>& reports,
                       const std::filesystem::path& path);

} // namespace cyto
