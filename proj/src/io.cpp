#include "lindyn/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lindyn::io {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open data file: " + path);
  std::string first;
  std::getline(in, first);
  if (!trim(first).empty() && trim(first)[0] == '{') {
    nlohmann::json h;
    try {
      h = nlohmann::json::parse(first);
    } catch (const std::exception& e) {
      throw ValidationError(std::string("bad binary header: ") + e.what());
    }
    const long long rows = h.at("rows").get<long long>(), cols = h.at("cols").get<long long>();
    if (rows < 0 || cols < 0) throw ValidationError("bad binary header: negative shape");
    std::vector<double> buf(std::size_t(rows * cols));
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(double)));
    if (in.gcount() != std::streamsize(buf.size() * sizeof(double)))
      throw ValidationError("binary data shorter than header shape");
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : buf) {
        auto u = std::bit_cast<std::uint64_t>(v);
        u = __builtin_bswap64(u);
        v = std::bit_cast<double>(u);
      }
    }
    MatrixXd m(rows, cols);
    for (long long i = 0; i < rows; ++i)
      for (long long j = 0; j < cols; ++j) m(i, j) = buf[std::size_t(i * cols + j)];
    return m;
  }
  std::vector<std::vector<double>> rows;
  std::string line = first;
  long lineno = 1;
  do {
    const std::string t = trim(line);
    if (!t.empty()) {
      std::vector<double> r;
      std::stringstream ss(t);
      std::string cell;
      while (std::getline(ss, cell, ',')) r.push_back(parse_double(trim(cell), path + ":" + std::to_string(lineno)));
      if (!rows.empty() && r.size() != rows.front().size())
        throw ValidationError(path + ":" + std::to_string(lineno) + ": ragged CSV row");
      rows.push_back(std::move(r));
    }
    ++lineno;
  } while (std::getline(in, line));
  if (rows.empty()) throw ValidationError("empty data file: " + path);
  MatrixXd m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_binary(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  out << "{\"rows\":" << m.rows() << ",\"cols\":" << m.cols() << "}\n";
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
    out << "\n";
  }
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(n) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

double parse_double(const std::string& s, const std::string& field) {
  const std::string t = trim(s);
  double v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw ValidationError(field + ": not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& field) {
  const std::string t = trim(s);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw ValidationError(field + ": not an integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const std::string& field) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ValidationError(field + ": not a boolean: '" + s + "'");
}

std::vector<double> parse_list(const std::string& s, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!trim(cell).empty()) out.push_back(parse_double(cell, field));
  return out;
}

namespace {

// numbers as numbers, non-finite as null, anything else verbatim
nlohmann::ordered_json cell(const std::string& s) {
  if (s == "nan" || s == "inf" || s == "-inf") return nullptr;
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) {
    if (s.find_first_of(".eE") == std::string::npos) return std::stoll(s);
    return v;
  }
  return s;
}

}  // namespace

void Table::write(const std::string& path, const std::string& format) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write output file: " + path);
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json o;
      for (std::size_t j = 0; j < headers.size(); ++j) o[headers[j]] = cell(r[j]);
      arr.push_back(std::move(o));
    }
    out << arr.dump(1) << "\n";
    return;
  }
  for (std::size_t j = 0; j < headers.size(); ++j) out << (j ? "," : "") << headers[j];
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << r[j];
    out << "\n";
  }
}

}  // namespace lindyn::io
