#include "cytoclass/report.hpp"

#include "cytoclass/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cyto {

namespace {

std::string fmt_real(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt_percent(double fraction) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        std::size_t bar = line.find('|', start);
        if (bar == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, bar - start)));
        start = bar + 1;
    }
    return cells;
}

} // namespace

std::string render_report(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ConfigError("cannot render an empty report list");

    const std::vector<std::string> headers = {"Set",       "Loss",   "Accuracy",
                                              "Precision", "Recall", "AUC"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports)
        rows.push_back({r.set_name, fmt_real(r.loss), fmt_percent(r.accuracy),
                        fmt_real(r.precision), fmt_real(r.recall), fmt_real(r.auc)});

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }

    std::ostringstream out;
    auto emit = [&out, &widths](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << " | ";
            out << cells[c];
            if (c + 1 < cells.size())
                out << std::string(widths[c] - cells[c].size(), ' ');
        }
        out << "\n";
    };
    emit(headers);
    for (const auto& row : rows) emit(row);
    return out.str();
}

std::vector<MetricsReport> parse_report_table(const std::string& table) {
    std::istringstream in(table);
    std::string line;
    std::vector<MetricsReport> reports;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (!header_seen) {
            if (cells.size() != 6 || cells[0] != "Set")
                throw DataError("report table: unexpected header row");
            header_seen = true;
            continue;
        }
        if (cells.size() != 6)
            throw DataError("report table: expected 6 columns, got " +
                            std::to_string(cells.size()));
        MetricsReport r;
        r.set_name = cells[0];
        try {
            r.loss = std::stod(cells[1]);
            std::string acc = cells[2];
            if (acc.empty() || acc.back() != '%')
                throw DataError("report table: accuracy must end in '%'");
            acc.pop_back();
            r.accuracy = std::stod(acc) / 100.0;
            r.precision = std::stod(cells[3]);
            r.recall = std::stod(cells[4]);
            r.auc = std::stod(cells[5]);
        } catch (const std::invalid_argument&) {
            throw DataError("report table: non-numeric cell in row '" + cells[0] + "'");
        }
        reports.push_back(std::move(r));
    }
    if (!header_seen) throw DataError("report table: missing header");
    return reports;
}

void write_report_struct(const std::vector<MetricsReport>& reports,
                         const std::filesystem::path& path) {
    if (reports.empty()) throw ConfigError("cannot write an empty report list");
    nlohmann::json doc;
    doc["reports"] = nlohmann::json::array();
    for (const auto& r : reports)
        doc["reports"].push_back({{"set", r.set_name},
                                  {"loss", r.loss},
                                  {"accuracy", r.accuracy},
                                  {"precision", r.precision},
                                  {"recall", r.recall},
                                  {"auc", r.auc},
                                  {"averaging", to_string(r.averaging)}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing report: " + path.string());
}

std::vector<MetricsReport> read_report_struct(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("report " + path.string() + ": " + e.what());
    }
    std::vector<MetricsReport> reports;
    if (!doc.contains("reports") || !doc["reports"].is_array())
        throw DataError("report " + path.string() + ": missing 'reports' array");
    for (const auto& j : doc["reports"]) {
        MetricsReport r;
        for (const char* field : {"set", "loss", "accuracy", "precision", "recall", "auc"})
            if (!j.contains(field))
                throw DataError("report " + path.string() + ": record missing field '" +
                                field + "'");
        r.set_name = j.at("set").get<std::string>();
        r.loss = j.at("loss").get<double>();
        r.accuracy = j.at("accuracy").get<double>();
        r.precision = j.at("precision").get<double>();
        r.recall = j.at("recall").get<double>();
        r.auc = j.at("auc").get<double>();
        r.averaging = averaging_from_string(j.value("averaging", "macro"));
        reports.push_back(std::move(r));
    }
    return reports;
}

void write_report_text(const std::vector<MetricsReport>& reports,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << render_report(reports);
    if (!out) throw IoError("failed writing report: " + path.string());
}

} // namespace cyto
