#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dietcost {

enum class ErrorKind { schema, referential, unit, rule };

std::string_view to_string(ErrorKind kind) noexcept;

/// Input data failed validation. Carries the offending file, 1-based row
/// (0 when the error is file-level) and the violated rule.
class ValidationError : public std::runtime_error {
  public:
    ValidationError(ErrorKind kind, std::string file, std::size_t row, std::string rule);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string &file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    const std::string &rule() const noexcept { return rule_; }

  private:
    ErrorKind kind_;
    std::string file_;
    std::size_t row_;
    std::string rule_;
};

/// Parsed CSV file with a mandatory header. Row numbers are file line numbers
/// (header is line 1) so errors can point at the source.
class CsvTable {
  public:
    static CsvTable read(const std::filesystem::path &path);
    static CsvTable parse(std::string_view text, std::string file_name);

    const std::string &file_name() const noexcept { return file_name_; }
    const std::vector<std::string> &header() const noexcept { return header_; }
    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<std::string> &row(std::size_t i) const { return rows_[i]; }
    std::size_t line_of(std::size_t i) const { return lines_[i]; }

    std::optional<std::size_t> find_column(std::string_view name) const;
    /// Throws a schema ValidationError when the column is missing.
    std::size_t column(std::string_view name) const;

    const std::string &cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    /// Typed accessors; schema errors cite the file line.
    double number(std::size_t row, std::size_t col) const;
    std::optional<double> optional_number(std::size_t row, std::size_t col) const;
    long integer(std::size_t row, std::size_t col) const;

    ValidationError error(ErrorKind kind, std::size_t row, const std::string &rule) const;

  private:
    std::string file_name_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

/// Writes one CSV record, quoting fields that need it.
void write_csv_row(std::ostream &out, const std::vector<std::string> &fields);

} // namespace dietcost
