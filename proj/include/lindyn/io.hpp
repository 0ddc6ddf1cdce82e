#pragma once

#include "lindyn/types.hpp"

#include <map>
#include <string>

namespace lindyn::io {

/// Reads CSV (one sample per row, no header) or little-endian float64 preceded by a
/// one-line JSON header {"rows":n,"cols":d}.
[[nodiscard]] MatrixXd read_matrix(const std::string& path);

void write_matrix_binary(const std::string& path, const MatrixXd& m);
void write_matrix_csv(const std::string& path, const MatrixXd& m);

/// 17 significant digits; round-trips every double.
[[nodiscard]] std::string fmt(double x);

/// Flat `key = value` lines; `#` starts a comment. Throws ValidationError on malformed lines.
[[nodiscard]] std::map<std::string, std::string> parse_config_text(const std::string& text);
[[nodiscard]] std::map<std::string, std::string> read_config_file(const std::string& path);

[[nodiscard]] std::vector<double> parse_list(const std::string& s, const std::string& field);
[[nodiscard]] double parse_double(const std::string& s, const std::string& field);
[[nodiscard]] long long parse_int(const std::string& s, const std::string& field);
[[nodiscard]] bool parse_bool(const std::string& s, const std::string& field);

/// Column table emitted as CSV or as a JSON array of records.
struct Table {
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  void write(const std::string& path, const std::string& format) const;
};

}  // namespace lindyn::io
