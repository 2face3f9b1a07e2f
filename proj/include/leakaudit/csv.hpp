#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakaudit::csv {

// A parsed comma-separated file: header plus string cells. Quoting follows
// RFC 4180 (double quotes, "" escapes, embedded newlines allowed).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or nullopt.
    std::optional<std::size_t> find(std::string_view name) const;
};

Table parse(std::istream& in);
Table read_file(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Numeric cell parsing: empty or unparseable text yields nullopt.
std::optional<double> to_double(std::string_view cell);

}  // namespace leakaudit::csv
