#pragma once

#include "gshape/air.hpp"
#include "gshape/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gshape {

struct SweepRow {
  double snr_db = 0.0;
  double air = 0.0;         // bits per N-dim symbol
  double air_per_2d = 0.0;
  double ngmi = 0.0;
  std::optional<double> std_error;
};

struct SweepResult {
  std::string constellation;
  Metric metric = Metric::MI;
  int dims = 0;
  int bits = 0;  // m used for NGMI
  std::string estimator;
  std::vector<SweepRow> rows;  // strictly ascending SNR
};

/// Ascending grid from "A:B:STEP" (inclusive of B within STEP/1e6) or a single value.
std::vector<double> parse_snr_grid(std::string_view token);

SweepResult snr_sweep(const Constellation& c, const BitLabeling* lab, Metric metric,
                      const std::vector<double>& snr_grid, const EstimatorSpec& estimator);

/// SNR (dB) at which the sweep first reaches target_air, by piecewise-linear
/// interpolation in (SNR dB, AIR). Throws if the target is outside the range.
double snr_at_air(const SweepResult& sweep, double target_air);

/// snr_at_air(b) - snr_at_air(a): positive when a reaches the target earlier.
double gain_db(const SweepResult& a, const SweepResult& b, double target_air);

/// Operating point where NGMI = 1 / (1 + overhead), i.e. AIR = m / (1 + overhead).
std::pair<double, double> overhead_operating_point(const SweepResult& sweep, int bits, double overhead);

struct GaussianityStats {
  std::vector<double> bin_edges;  // bins + 1, symmetric about zero
  std::vector<double> density;    // normalised histogram (integrates to 1)
  double ks_distance = 0.0;
  double excess_kurtosis = 0.0;
  double sigma = 0.0;             // matched standard deviation
};

/// Pools all M·N coordinates and compares them with N(0, sigma^2), where
/// sigma^2 is the pooled mean square.
GaussianityStats coordinate_gaussianity(const Constellation& c, int bins);

/// Writes one CSV row per sweep point; with `with_capacity` adds the AWGN
/// capacity reference columns used for plotting.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep, bool with_capacity = false);
SweepResult read_sweep_csv(std::istream& is);

}  // namespace gshape
