#ifndef HIERVIS_CSV_HPP
#define HIERVIS_CSV_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hiervis/error.hpp"

namespace hiervis {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

// Splits one CSV line. Fields containing the delimiter are double-quoted;
// embedded quotes are doubled (RFC 4180 style). Comma-bearing parameter
// names like u[region,eastern,int] rely on this.
inline std::vector<std::string> split_csv_line(const std::string& line,
                                               char delim = ',') {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delim) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

inline std::string csv_quote(const std::string& field, char delim = ',') {
  if (field.find(delim) == std::string::npos &&
      field.find('"') == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // file order preserved
  std::vector<std::string> comments;           // leading '#' lines

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return static_cast<int>(j);
    }
    return -1;
  }

  int require_column(const std::string& name, const std::string& path) const {
    int j = column(name);
    if (j < 0) fail("schema", "missing column '" + name + "' in " + path);
    return j;
  }
};

inline CsvTable read_csv(const std::string& path, char delim = ',') {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    auto fields = split_csv_line(line, delim);
    if (!have_header) {
      for (auto& f : fields) f = trim(f);
      table.header = fields;
      have_header = true;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) fail("schema", "empty file (no header): " + path);
  return table;
}

// Strict numeric parse; rejects trailing junk so "12x" is caught.
inline double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    fail("parse", "non-numeric value '" + s + "' " + context);
  }
  return value;
}

inline long parse_long(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  long value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    fail("parse", "non-integer value '" + s + "' " + context);
  }
  return value;
}

}  // namespace hiervis

#endif  // HIERVIS_CSV_HPP
