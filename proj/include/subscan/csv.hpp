#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subscan/dataset.hpp"
#include "subscan/error.hpp"

namespace subscan {

inline constexpr std::string_view kMissingLabel = "<missing>";

struct CsvRecord {
  std::size_t line = 0;  // physical line on which the record starts, 1-based
  std::vector<std::string> fields;
};

// RFC-4180 reader: comma separated, double-quote quoting with "" escapes,
// CRLF or LF line endings, quoted fields may span lines.
inline std::vector<CsvRecord> parse_csv(std::istream& in) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool after_quote = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line is not a record.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  char ch;
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(ch);
        ++line;
        end_record();
        break;
      case '\n':
        ++line;
        end_record();
        break;
      case '"':
        if (field_started) {
          throw InputError("line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      default:
        if (after_quote) {
          throw InputError("line " + std::to_string(line) + ": unexpected character after closing quote");
        }
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw InputError("unterminated quoted field at end of input");
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

struct CsvOptions {
  // Also accept "false"/"true" (case-insensitive) as outcome values.
  bool boolean_aliases = false;
};

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

inline std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

// Builds a Dataset from CSV text. Every column except `outcome_column` is a
// categorical feature; categories are numbered in order of first appearance.
inline Dataset read_csv(std::istream& in, std::string_view outcome_column, const CsvOptions& options = {}) {
  auto records = parse_csv(in);
  if (records.empty()) throw InputError("CSV input is empty (header row required)");
  const auto& header = records.front().fields;

  std::size_t outcome_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == outcome_column) {
      outcome_idx = c;
      break;
    }
  }
  if (outcome_idx == header.size()) {
    throw InputError("outcome column '" + std::string(outcome_column) + "' not found in header");
  }

  std::vector<Schema::Feature> features;
  std::vector<std::size_t> source_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == outcome_idx) continue;
    features.push_back({header[c], {}});
    source_col.push_back(c);
  }

  const std::size_t n = records.size() - 1;
  std::vector<Dataset::Column> columns(features.size(), Dataset::Column(n));
  std::vector<std::unordered_map<std::string, CategoryIndex>> lookup(features.size());
  std::vector<std::uint8_t> outcomes(n);

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    const std::string where = "row " + std::to_string(r + 1) + " (line " + std::to_string(rec.line) + ")";
    if (rec.fields.size() != header.size()) {
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(rec.fields.size()));
    }
    const auto& y = rec.fields[outcome_idx];
    if (y == "1" || (options.boolean_aliases && detail::iequals(y, "true"))) {
      outcomes[r] = 1;
    } else if (y == "0" || (options.boolean_aliases && detail::iequals(y, "false"))) {
      outcomes[r] = 0;
    } else {
      throw InputError(where + ", column '" + std::string(outcome_column) + "': non-binary outcome value '" + y + "'");
    }
    for (std::size_t f = 0; f < features.size(); ++f) {
      std::string label = rec.fields[source_col[f]];
      if (label.empty()) label = kMissingLabel;
      auto [it, inserted] = lookup[f].try_emplace(label, static_cast<CategoryIndex>(features[f].categories.size()));
      if (inserted) features[f].categories.push_back(label);
      columns[f][r] = it->second;
    }
  }
  if (n == 0) throw InputError("CSV input has a header but no data rows");

  try {
    return Dataset(Schema(std::move(features)), std::move(columns), std::move(outcomes));
  } catch (const ContractError& e) {
    throw InputError(e.what());
  }
}

inline Dataset load_csv(const std::string& path, std::string_view outcome_column, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return read_csv(in, outcome_column, options);
}

// Writes features in schema order followed by the outcome column.
inline void write_csv(const Dataset& data, std::ostream& out, std::string_view outcome_column) {
  const auto& schema = data.schema();
  for (std::size_t f = 0; f < schema.size(); ++f) out << detail::quote_field(schema.feature(f).name) << ',';
  out << detail::quote_field(outcome_column) << "\r\n";
  for (std::size_t i = 0; i < data.n_records(); ++i) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      out << detail::quote_field(schema.label(f, data.value(i, f))) << ',';
    }
    out << (data.outcome(i) ? '1' : '0') << "\r\n";
  }
}

inline void save_csv(const Dataset& data, const std::string& path, std::string_view outcome_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file '" + path + "'");
  write_csv(data, out, outcome_column);
}

}  // namespace subscan
