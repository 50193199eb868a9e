#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "idfc/error.hpp"

namespace idfc {

// Minimal RFC-4180 CSV reader: quoted fields, doubled-quote escapes, LF or
// CRLF line endings. Quoted fields may span lines.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw DataError("cannot open file: " + path);
  }

  // Reads the next record into `fields`. Returns false at end of input.
  // `row()` reports the 1-based record number of the last record read.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    ++row_;
    std::string field;
    bool quoted = false;
    for (;;) {
      if (quoted) {
        if (c == EOF) throw DataError(path_ + ": unterminated quote (row " + std::to_string(row_) + ")");
        if (c == '"') {
          const int peek = in_.get();
          if (peek == '"') {
            field.push_back('"');
          } else {
            quoted = false;
            c = peek;
            continue;
          }
        } else {
          field.push_back(static_cast<char>(c));
        }
      } else {
        if (c == EOF || c == '\n') {
          if (!field.empty() && field.back() == '\r') field.pop_back();
          fields.push_back(std::move(field));
          return true;
        }
        if (c == ',') {
          fields.push_back(std::move(field));
          field.clear();
        } else if (c == '"' && field.empty()) {
          quoted = true;
        } else {
          field.push_back(static_cast<char>(c));
        }
      }
      c = in_.get();
    }
  }

  std::int64_t row() const { return row_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::int64_t row_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw DataError("cannot open file for writing: " + path);
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_.put(',');
      write_field(fields[i]);
    }
    out_.put('\n');
  }

  void flush() { out_.flush(); }

 private:
  void write_field(std::string_view f) {
    const bool needs_quote = f.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quote) {
      out_ << f;
      return;
    }
    out_.put('"');
    for (char ch : f) {
      if (ch == '"') out_.put('"');
      out_.put(ch);
    }
    out_.put('"');
  }

  std::ofstream out_;
  std::string path_;
};

}  // namespace idfc
