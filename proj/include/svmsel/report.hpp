#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace svmsel {

inline constexpr int kReportSchemaVersion = 1;

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double value);
std::string format_number(long long value);
std::string format_number(unsigned long long value);

/// RFC 4180 field quoting (quotes only when needed).
std::string csv_field(std::string_view text);

/// Header plus string cells; rows are written in insertion order.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void add_row(std::vector<std::string> cells);
  void append(const Table& other);

  std::size_t column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;

  /// Parses RFC 4180 text (first record is the header).
  static Table parse_csv(std::string_view text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Builds a row from mixed cells.
class RowBuilder {
 public:
  RowBuilder& add(std::string_view text) {
    cells_.emplace_back(text);
    return *this;
  }
  RowBuilder& add(const char* text) { return add(std::string_view(text)); }
  RowBuilder& add(const std::string& text) { return add(std::string_view(text)); }
  RowBuilder& add(double value) {
    cells_.push_back(format_number(value));
    return *this;
  }
  RowBuilder& add(int value) { return add(static_cast<long long>(value)); }
  RowBuilder& add(long long value) {
    cells_.push_back(format_number(value));
    return *this;
  }
  RowBuilder& add(std::size_t value) {
    cells_.push_back(format_number(static_cast<unsigned long long>(value)));
    return *this;
  }
  RowBuilder& add(unsigned long long value) {
    cells_.push_back(format_number(value));
    return *this;
  }
  RowBuilder& add(bool value) {
    cells_.emplace_back(value ? "1" : "0");
    return *this;
  }
  std::vector<std::string> take() { return std::move(cells_); }

 private:
  std::vector<std::string> cells_;
};

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// JSON with schema_version at the top level, 2-space indented, trailing newline.
std::string dump_json(const nlohmann::json& doc);

}  // namespace svmsel
