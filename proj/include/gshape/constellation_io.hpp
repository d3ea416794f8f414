#pragma once

#include "gshape/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace gshape {

/// Thrown for malformed constellation or config text; carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct LabeledConstellation {
  Constellation constellation;
  std::optional<BitLabeling> labeling;
};

/// Text format:
///   GSHAPE v1
///   name=<string>
///   M=<int> N=<int> m=<int|0>
///   M lines of N floats, then (m > 0) M lines of m-character bit strings.
void write_constellation(std::ostream& os, const Constellation& c, const BitLabeling* labeling = nullptr);
LabeledConstellation read_constellation(std::istream& is);

void save_constellation(const std::filesystem::path& path, const Constellation& c,
                        const BitLabeling* labeling = nullptr);
LabeledConstellation load_constellation(const std::filesystem::path& path);

/// Locale-independent float rendering with 17 significant digits.
std::string format_double(double v);
/// Locale-independent parse of a complete token; nullopt on any trailing junk.
std::optional<double> parse_double(std::string_view token);

}  // namespace gshape
