#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ff::csv {

// In-memory CSV table. All cells kept as strings; typed parsing happens at
// the call site where the column semantics are known.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return header.size(); }
    // Index of a header name, -1 if absent.
    int find(std::string_view name) const;
};

// RFC-4180-style parse: quoted fields with "" escapes, CRLF tolerated,
// header row required. Throws ParseError (with a line number) on ragged rows
// or unterminated quotes.
Table parse(std::string_view text);
Table read_file(const std::string& path);

// Field quoting applied only where needed (comma, quote, newline).
std::string serialize(const Table& table);
void write_file(const std::string& path, const Table& table);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);
// Strict double parse of a whole field; `context` names the cell in errors.
double parse_double(std::string_view field, const std::string& context);
long long parse_int(std::string_view field, const std::string& context);

// Missing-value convention: empty field or the literal "NA".
bool is_missing(std::string_view field);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace ff::csv
