#include "csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace fqm::cli {

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string escape_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_line(header);
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CSV row width does not match header of " + path_.string());
    std::vector<std::string> fields;
    fields.reserve(cells.size());
    for (const auto& cell : cells) {
        if (const auto* s = std::get_if<std::string>(&cell)) fields.push_back(*s);
        else if (const auto* d = std::get_if<double>(&cell)) fields.push_back(format_number(*d));
        else fields.push_back(std::to_string(std::get<long>(cell)));
    }
    write_line(fields);
}

void CsvWriter::write_line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape_field(fields[i]);
    }
    out_ << "\r\n";
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
    out_.close();
}

}  // namespace fqm::cli
