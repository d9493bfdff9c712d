#include "svmsel/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "svmsel/error.hpp"

namespace svmsel {
namespace {

constexpr const char* kModule = "report";

template <class T>
std::string to_chars_string(T value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  return to_chars_string(value);
}

std::string format_number(long long value) { return to_chars_string(value); }
std::string format_number(unsigned long long value) { return to_chars_string(value); }

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void Table::add_row(std::vector<std::string> cells) {
  require(cells.size() == header_.size(), kModule,
          "row has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

void Table::append(const Table& other) {
  if (header_.empty() && rows_.empty()) header_ = other.header_;
  require(other.header_ == header_, kModule, "appending a table with a different header");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  fail(ErrorCode::invalid_argument, kModule, "no column named " + std::string(name));
}

const std::string& Table::cell(std::size_t row, std::string_view name) const { return rows_.at(row)[column(name)]; }

double Table::number(std::size_t row, std::string_view name) const {
  const std::string& text = cell(row, name);
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    fail(ErrorCode::invalid_argument, kModule, "cell '" + text + "' in column " + std::string(name) + " is not a number");
  return value;
}

void Table::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_field(cells[i]);
    }
    out << "\r\n";
  };
  line(header_);
  for (const auto& row : rows_) line(row);
}

std::string Table::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

Table Table::parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      ++i;
      continue;
    }
    if (ch == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r' || ch == '\n') {
      end_record();
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      field += ch;
      field_started = true;
    }
    ++i;
  }
  if (quoted) fail(ErrorCode::invalid_argument, kModule, "unterminated quoted CSV field");
  if (field_started || !record.empty()) end_record();
  if (records.empty()) fail(ErrorCode::invalid_argument, kModule, "CSV has no header");
  Table table(std::move(records.front()));
  for (std::size_t r = 1; r < records.size(); ++r) table.add_row(std::move(records[r]));
  return table;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::io, kModule, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, kModule, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io, kModule, "write to " + path.string() + " failed");
}

std::string dump_json(const nlohmann::json& doc) {
  nlohmann::json out = doc;
  out["schema_version"] = kReportSchemaVersion;
  return out.dump(2) + "\n";
}

}  // namespace svmsel
