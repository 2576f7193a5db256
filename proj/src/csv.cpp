#include "failfoundry/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "failfoundry/errors.hpp"

namespace ff::csv {

int Table::find(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<int>(j);
    }
    return -1;
}

namespace {

// One record per call; handles quotes and embedded newlines. `pos` advances
// past the record's terminator. `line` counts physical lines for errors.
std::vector<std::string> parse_record(std::string_view text, std::size_t& pos,
                                      std::size_t& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    const std::size_t start_line = line;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cur.push_back(c);
            }
            ++pos;
        } else if (c == '"') {
            in_quotes = true;
            ++pos;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++pos;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            ++line;
            fields.push_back(std::move(cur));
            return fields;
        } else {
            cur.push_back(c);
            ++pos;
        }
    }
    if (in_quotes) {
        throw ParseError("csv: unterminated quote in record starting at line " +
                         std::to_string(start_line));
    }
    fields.push_back(std::move(cur));
    ++line;
    return fields;
}

bool needs_quoting(std::string_view s) {
    return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
    if (!needs_quoting(s)) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

Table parse(std::string_view text) {
    Table t;
    std::size_t pos = 0;
    std::size_t line = 1;
    if (text.empty()) throw ParseError("csv: empty input, header row required");
    t.header = parse_record(text, pos, line);
    while (pos < text.size()) {
        std::size_t record_line = line;
        auto fields = parse_record(text, pos, line);
        // A lone trailing newline produces one empty field; skip it.
        if (fields.size() == 1 && fields[0].empty() && pos >= text.size()) break;
        if (fields.size() != t.header.size()) {
            throw ParseError("csv: line " + std::to_string(record_line) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write: " + path);
}

Table read_file(const std::string& path) { return parse(read_text_file(path)); }

std::string serialize(const Table& table) {
    std::string out;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j) out.push_back(',');
        append_field(out, table.header[j]);
    }
    out.push_back('\n');
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out.push_back(',');
            append_field(out, row[j]);
        }
        out.push_back('\n');
    }
    return out;
}

void write_file(const std::string& path, const Table& table) {
    write_text_file(path, serialize(table));
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
    double v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || field.empty()) {
        throw ParseError("expected a number " + context + ", got \"" +
                         std::string(field) + "\"");
    }
    return v;
}

long long parse_int(std::string_view field, const std::string& context) {
    long long v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || field.empty()) {
        throw ParseError("expected an integer " + context + ", got \"" +
                         std::string(field) + "\"");
    }
    return v;
}

bool is_missing(std::string_view field) { return field.empty() || field == "NA"; }

}  // namespace ff::csv
