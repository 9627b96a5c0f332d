#include "dietcost/csv.h"
#include "dietcost/year_month.h"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dietcost {

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    auto dash = text.find('-');
    if (dash == std::string_view::npos) {
        throw std::invalid_argument("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    YearMonth ym{};
    auto y = std::from_chars(text.data(), text.data() + dash, ym.year);
    auto m = std::from_chars(text.data() + dash + 1, text.data() + text.size(), ym.month);
    if (y.ec != std::errc{} || m.ec != std::errc{} || y.ptr != text.data() + dash ||
        m.ptr != text.data() + text.size() || !ym.valid()) {
        throw std::invalid_argument("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    return ym;
}

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::schema:
        return "schema violation";
    case ErrorKind::referential:
        return "referential violation";
    case ErrorKind::unit:
        return "unit violation";
    case ErrorKind::rule:
        return "rule violation";
    }
    return "violation";
}

namespace {

std::string describe(ErrorKind kind, const std::string &file, std::size_t row,
                     const std::string &rule) {
    std::ostringstream os;
    os << to_string(kind) << " in " << file;
    if (row > 0) {
        os << " row " << row;
    }
    os << ": " << rule;
    return os.str();
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// RFC 4180 style: fields may be double-quoted, "" escapes a quote inside.
std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? current : trim(current));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(was_quoted ? current : trim(current));
    return fields;
}

} // namespace

ValidationError::ValidationError(ErrorKind kind, std::string file, std::size_t row,
                                 std::string rule)
    : std::runtime_error(describe(kind, file, row, rule)), kind_{kind}, file_{std::move(file)},
      row_{row}, rule_{std::move(rule)} {}

CsvTable CsvTable::read(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(ErrorKind::schema, path.filename().string(), 0,
                              "file cannot be opened");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.filename().string());
}

CsvTable CsvTable::parse(std::string_view text, std::string file_name) {
    CsvTable table;
    table.file_name_ = std::move(file_name);
    // UTF-8 byte-order mark
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        auto line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        auto fields = split_record(line);
        if (!have_header) {
            table.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header_.size()) {
            throw table.error(ErrorKind::schema, line_no,
                              "expected " + std::to_string(table.header_.size()) +
                                  " fields, found " + std::to_string(fields.size()));
        }
        table.rows_.push_back(std::move(fields));
        table.lines_.push_back(line_no);
    }
    if (!have_header) {
        throw table.error(ErrorKind::schema, 0, "missing header row");
    }
    return table;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
    auto idx = find_column(name);
    if (!idx) {
        throw error(ErrorKind::schema, 1, "missing column '" + std::string(name) + "'");
    }
    return *idx;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    auto value = optional_number(row, col);
    if (!value) {
        throw error(ErrorKind::schema, lines_[row], "column '" + header_[col] + "' is empty");
    }
    return *value;
}

std::optional<double> CsvTable::optional_number(std::size_t row, std::size_t col) const {
    const auto &text = rows_[row][col];
    if (text.empty()) {
        return std::nullopt;
    }
    double value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw error(ErrorKind::schema, lines_[row],
                    "column '" + header_[col] + "' is not a finite number: '" + text + "'");
    }
    return value;
}

long CsvTable::integer(std::size_t row, std::size_t col) const {
    const auto &text = rows_[row][col];
    long value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw error(ErrorKind::schema, lines_[row],
                    "column '" + header_[col] + "' is not an integer: '" + text + "'");
    }
    return value;
}

ValidationError CsvTable::error(ErrorKind kind, std::size_t row, const std::string &rule) const {
    return ValidationError(kind, file_name_, row, rule);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, ptr);
}

void write_csv_row(std::ostream &out, const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        const auto &f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos ||
            (!f.empty() && (f.front() == ' ' || f.back() == ' '))) {
            out << '"';
            for (char c : f) {
                if (c == '"') {
                    out << '"';
                }
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

} // namespace dietcost
