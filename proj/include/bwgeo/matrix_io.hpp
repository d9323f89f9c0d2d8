#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bwgeo/errors.hpp"
#include "bwgeo/matrix_kernel.hpp"
#include "json.hpp"

// Matrix files for the command line tools. Two formats:
//
//   *.csv       n lines of comma separated values
//   everything  {"shape":[rows,cols],"rows":[[...],...]}
//   else
//
// Values are written with 17 significant digits, which round-trips every
// double exactly and keeps the output byte-identical across runs.
namespace bwgeo::io {

inline std::string format_double(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string to_json(const Matrix& m) {
  std::string out = "{\"shape\":[" + std::to_string(m.rows()) + "," +
                    std::to_string(m.cols()) + "],\"rows\":[";
  for (int i = 0; i < m.rows(); ++i) {
    out += i == 0 ? "[" : ",[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ",";
      out += format_double(m(i, j));
    }
    out += "]";
  }
  out += "]}";
  return out;
}

inline std::string to_csv(const Matrix& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ",";
      out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

inline Matrix parse_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("matrix file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("shape") || !doc.contains("rows")) {
    throw ParseError("matrix file: expected an object with shape and rows");
  }
  const auto& shape = doc["shape"];
  if (!shape.is_array() || shape.size() != 2 ||
      !shape[0].is_number_integer() || !shape[1].is_number_integer()) {
    throw ParseError("matrix file: shape must be two integers");
  }
  const long rows = shape[0].get<long>();
  const long cols = shape[1].get<long>();
  if (rows < 0 || cols < 0) {
    throw ParseError("matrix file: negative shape");
  }
  const auto& data = doc["rows"];
  if (!data.is_array() || static_cast<long>(data.size()) != rows) {
    throw ParseError("matrix file: row count does not match the shape");
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto& row = data[i];
    if (!row.is_array() || static_cast<long>(row.size()) != cols) {
      throw ParseError("matrix file: row length does not match the shape");
    }
    for (long j = 0; j < cols; ++j) {
      if (!row[j].is_number()) {
        throw ParseError("matrix file: entries must be numbers");
      }
      const double v = row[j].get<double>();
      if (!std::isfinite(v)) {
        throw ParseError("matrix file: entries must be finite");
      }
      m(i, j) = v;
    }
  }
  return m;
}

inline Matrix parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::size_t a = pos;
      std::size_t b = comma;
      while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
      while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) --b;
      double v = 0.0;
      const auto res = std::from_chars(line.data() + a, line.data() + b, v);
      if (res.ec != std::errc() || res.ptr != line.data() + b) {
        throw ParseError("matrix file: bad csv value '" +
                         line.substr(pos, comma - pos) + "'");
      }
      if (!std::isfinite(v)) {
        throw ParseError("matrix file: entries must be finite");
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("matrix file: csv rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file: empty csv");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline bool has_csv_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return has_csv_extension(path) ? parse_csv(text) : parse_json(text);
}

inline void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  if (has_csv_extension(path)) {
    out << to_csv(m);
  } else {
    out << to_json(m) << "\n";
  }
}

}  // namespace bwgeo::io
