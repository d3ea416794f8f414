#pragma once

#include "gshape/air.hpp"
#include "gshape/constellation_io.hpp"
#include "gshape/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace gshape {

inline constexpr const char* kVersion = "gshape 1.0.0";

/// Where the initial constellation comes from.
struct ConstellationSource {
  std::string generator = "random";  // random|bpsk|qpsk|qam|apsk|sp12|file
  int num_points = 16;
  int dims = 2;
  std::uint64_t seed = 1;
  int ring_inner = 4;
  int ring_outer = 4;
  double radius_ratio = 2.0;
  double phase_offset = -1.0;  // < 0: pi / ring_outer
  std::string path;
  int repeat = 1;              // Cartesian power of the generated constellation
};

/// Builds the constellation (and its labels where the generator defines them;
/// random constellations get natural labels).
LabeledConstellation make_constellation(const ConstellationSource& source);

struct OutputSpec {
  std::string directory;
  bool write_trace = true;
};

struct RunConfig {
  ConstellationSource constellation;
  double snr_db = 4.0;
  Metric metric = Metric::MI;
  OptimizerConfig optimizer;
  OutputSpec output;
};

/// `key = value` lines under [constellation], [channel], [metric],
/// [optimizer] and [output]. Unknown sections or keys are rejected with the
/// line number.
RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every field, defaults included, so the copy fully describes a run.
void write_run_config(std::ostream& os, const RunConfig& config);

/// OptimizerConfig with the [channel] and [metric] values folded in.
OptimizerConfig effective_optimizer_config(const RunConfig& config);

}  // namespace gshape
