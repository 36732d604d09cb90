#pragma once

// RFC-4180 CSV writer/reader (LF line endings) plus the number formats used
// by every file the toolkit writes. Lines starting with '#' before or
// between records are comments; "# key=value" comments carry metadata.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace quadbench {

/// Shortest string that parses back to the same double.
inline std::string format_roundtrip(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, res.ptr};
}

/// Fixed-point with `decimals` places ("1.066666666666667" for 16/15).
inline std::string format_fixed(double v, int decimals = 15) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    // avoid "-0.000..." for values that round to zero
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void comment(const std::string& text) { os_ << "# " << text << '\n'; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ',';
            write_field(fields[i]);
        }
        os_ << '\n';
    }

private:
    void write_field(const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos && (f.empty() || f[0] != '#')) {
            os_ << f;
            return;
        }
        os_ << '"';
        for (char c : f) {
            if (c == '"') os_ << '"';
            os_ << c;
        }
        os_ << '"';
    }

    std::ostream& os_;
};

struct CsvTable {
    std::vector<std::string> comments;  // without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Value of a "key=value" comment, if present.
    std::optional<std::string> comment_value(const std::string& key) const {
        for (const auto& c : comments) {
            if (c.rfind(key + "=", 0) == 0) return c.substr(key.size() + 1);
        }
        return std::nullopt;
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw std::out_of_range("no CSV column named " + name);
    }
};

/// Parses a whole stream. The first record is the header; every record must
/// have as many fields as the header.
inline CsvTable read_csv(std::istream& is) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool at_record_start = true;
    bool have_record = false;

    auto finish_record = [&]() {
        record.push_back(field);
        field.clear();
        if (table.header.empty() && table.rows.empty()) {
            table.header = record;
        } else {
            if (record.size() != table.header.size()) {
                throw std::runtime_error("CSV record has " + std::to_string(record.size()) + " fields, expected " +
                                         std::to_string(table.header.size()));
            }
            table.rows.push_back(record);
        }
        record.clear();
        at_record_start = true;
        have_record = false;
    };

    char c;
    while (is.get(c)) {
        if (at_record_start && !in_quotes && c == '#') {
            std::string line;
            std::getline(is, line);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line[0] == ' ') line.erase(0, 1);
            table.comments.push_back(line);
            continue;
        }
        at_record_start = false;
        have_record = true;
        if (in_quotes) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            record.push_back(field);
            field.clear();
        } else if (c == '\r' && is.peek() == '\n') {
            // CRLF accepted on input
        } else if (c == '\n') {
            finish_record();
        } else {
            field += c;
        }
    }
    if (in_quotes) throw std::runtime_error("unterminated quoted CSV field");
    if (have_record) finish_record();
    if (table.header.empty()) throw std::runtime_error("CSV input has no header");
    return table;
}

}  // namespace quadbench
