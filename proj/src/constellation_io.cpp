#include "gshape/constellation_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace gshape {

namespace {

std::string line_message(int line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t next = s.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? s.size() : next;
    out.push_back(s.substr(pos, end - pos));
    pos = end + 1;
    if (next == std::string_view::npos) break;
  }
  return out;
}

std::optional<long long> parse_int(std::string_view token) {
  long long v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return v;
}

long long parse_field(std::string_view token, std::string_view key, int line) {
  if (token.substr(0, key.size()) != key || token.size() <= key.size() || token[key.size()] != '=') {
    throw ParseError(line, "expected '" + std::string(key) + "=<int>'");
  }
  auto v = parse_int(token.substr(key.size() + 1));
  if (!v) throw ParseError(line, "invalid integer for " + std::string(key));
  return *v;
}

}  // namespace

ParseError::ParseError(int line, const std::string& what) : Error(line_message(line, what)), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  if (ec != std::errc()) throw Error("float formatting failed");
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view token) {
  if (token.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

void write_constellation(std::ostream& os, const Constellation& c, const BitLabeling* labeling) {
  const int m = labeling != nullptr ? labeling->bits() : 0;
  os << "GSHAPE v1\n";
  os << "name=" << c.name() << '\n';
  os << "M=" << c.num_points() << " N=" << c.dims() << " m=" << m << '\n';
  const Points& p = c.points();
  for (int i = 0; i < c.num_points(); ++i) {
    for (int d = 0; d < c.dims(); ++d) {
      if (d > 0) os << ' ';
      os << format_double(p(i, d));
    }
    os << '\n';
  }
  if (labeling != nullptr) {
    for (int i = 0; i < labeling->num_labels(); ++i) os << labeling->row_string(i) << '\n';
  }
}

LabeledConstellation read_constellation(std::istream& is) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  auto at = [&](int lineno) -> const std::string& {
    if (lineno > static_cast<int>(lines.size())) throw ParseError(lineno, "unexpected end of file");
    return lines[static_cast<std::size_t>(lineno - 1)];
  };

  if (at(1) != "GSHAPE v1") throw ParseError(1, "expected header 'GSHAPE v1'");
  const std::string& name_line = at(2);
  if (name_line.rfind("name=", 0) != 0) throw ParseError(2, "expected 'name=<string>'");
  std::string name = name_line.substr(5);

  const auto dims_tokens = split_spaces(at(3));
  if (dims_tokens.size() != 3) throw ParseError(3, "expected 'M=<int> N=<int> m=<int>'");
  const long long num_points = parse_field(dims_tokens[0], "M", 3);
  const long long dims = parse_field(dims_tokens[1], "N", 3);
  const long long bits = parse_field(dims_tokens[2], "m", 3);
  if (num_points < 1) throw ParseError(3, "M must be positive");
  if (dims < 1) throw ParseError(3, "N must be positive");
  if (bits < 0 || bits > 62) throw ParseError(3, "m out of range");
  if (bits > 0 && (1LL << bits) != num_points) throw ParseError(3, "M must equal 2^m when labels are present");

  Points points(num_points, dims);
  for (long long i = 0; i < num_points; ++i) {
    const int lineno = static_cast<int>(4 + i);
    const auto tokens = split_spaces(at(lineno));
    if (static_cast<long long>(tokens.size()) != dims) {
      throw ParseError(lineno, "expected " + std::to_string(dims) + " coordinates");
    }
    for (long long d = 0; d < dims; ++d) {
      auto v = parse_double(tokens[static_cast<std::size_t>(d)]);
      if (!v || !std::isfinite(*v)) throw ParseError(lineno, "invalid coordinate");
      points(i, d) = *v;
    }
  }

  LabeledConstellation out{Constellation(std::move(points), std::move(name)), std::nullopt};
  long long next = 4 + num_points;
  if (bits > 0) {
    std::vector<std::string> rows;
    rows.reserve(static_cast<std::size_t>(num_points));
    for (long long i = 0; i < num_points; ++i) {
      const int lineno = static_cast<int>(next + i);
      const std::string& row = at(lineno);
      if (static_cast<long long>(row.size()) != bits ||
          row.find_first_not_of("01") != std::string::npos) {
        throw ParseError(lineno, "expected " + std::to_string(bits) + "-character bit string");
      }
      rows.push_back(row);
    }
    out.labeling = BitLabeling::from_strings(rows);
    next += num_points;
  }
  if (static_cast<long long>(lines.size()) >= next) {
    throw ParseError(static_cast<int>(next), "unexpected trailing content");
  }
  return out;
}

void save_constellation(const std::filesystem::path& path, const Constellation& c, const BitLabeling* labeling) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_constellation(os, c, labeling);
  if (!os) throw Error("write failed: " + path.string());
}

LabeledConstellation load_constellation(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_constellation(is);
}

}  // namespace gshape
