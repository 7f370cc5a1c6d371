#ifndef FQM_TOOLS_CSV_HPP
#define FQM_TOOLS_CSV_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace fqm::cli {

using CsvCell = std::variant<std::string, double, long>;

/// RFC 4180 writer: CRLF line ends, fields quoted only when needed, doubles
/// printed with 17 significant digits so they round-trip exactly.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<CsvCell>& cells);
    /// Flushes and reports write failures as std::runtime_error.
    void close();

private:
    void write_line(const std::vector<std::string>& fields);

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
};

std::string format_number(double value);
std::string escape_field(const std::string& field);

}  // namespace fqm::cli

#endif
