#pragma once

// Minimal RFC-4180 reader/writer used by every tabular interface.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace loanhazard::csv {

class Table {
  public:
    Table() = default;
    Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows);

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    /// Index of a mandatory column; throws Error{Schema} naming the column.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;

    /// Throws Error{Schema} listing the first missing column, if any.
    void require_columns(const std::vector<std::string_view>& names) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Parses a whole document. A UTF-8 BOM is skipped; CRLF and LF are accepted.
/// Every record must have as many fields as the header (Error{Schema}).
Table parse(std::string_view text);
Table read_file(const std::string& path);

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

  private:
    std::ostream& out_;
};

std::string escape(std::string_view field);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);
/// Fixed two-decimal rendering for currency columns.
std::string format_money(double v);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

}  // namespace loanhazard::csv
