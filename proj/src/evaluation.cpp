#include "gshape/evaluation.hpp"

#include "gshape/constellation_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace gshape {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double require_double(std::string_view token, const std::string& what) {
  auto v = parse_double(token);
  if (!v) throw Error("invalid " + what + " '" + std::string(token) + "'");
  return *v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

constexpr const char* kHeader = "snr_db,air,air_per_2d,ngmi,std_error,metric,estimator,dims,bits";

}  // namespace

std::vector<double> parse_snr_grid(std::string_view token) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = token.find(':', pos);
    parts.push_back(token.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (parts.size() == 1) return {require_double(parts[0], "SNR")};
  if (parts.size() != 3) throw Error("SNR grid must be 'A:B:STEP' or a single value");
  const double lo = require_double(parts[0], "SNR start");
  const double hi = require_double(parts[1], "SNR stop");
  const double step = require_double(parts[2], "SNR step");
  if (!(step > 0.0) || !(hi >= lo)) throw Error("SNR grid needs STEP > 0 and B >= A");
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + step * 1e-6) break;
    grid.push_back(v);
  }
  return grid;
}

SweepResult snr_sweep(const Constellation& c, const BitLabeling* lab, Metric metric,
                      const std::vector<double>& snr_grid, const EstimatorSpec& estimator) {
  if (snr_grid.empty()) throw Error("snr_sweep: empty SNR grid");
  for (std::size_t k = 1; k < snr_grid.size(); ++k) {
    if (!(snr_grid[k] > snr_grid[k - 1])) throw Error("snr_sweep: SNR grid must be strictly ascending");
  }
  SweepResult out;
  out.constellation = c.name();
  out.metric = metric;
  out.dims = c.dims();
  out.bits = lab != nullptr ? lab->bits() : static_cast<int>(std::lround(std::log2(c.num_points())));
  out.estimator = estimator.to_string();
  for (double snr : snr_grid) {
    const AirEstimate air = estimate_air(c, lab, metric, ChannelSpec(snr, c.dims()), estimator);
    SweepRow row;
    row.snr_db = snr;
    row.air = air.value;
    row.air_per_2d = air.value_per_2d();
    row.ngmi = out.bits > 0 ? air.value / out.bits : 0.0;
    row.std_error = air.std_error;
    out.rows.push_back(row);
  }
  return out;
}

double snr_at_air(const SweepResult& sweep, double target_air) {
  const auto& rows = sweep.rows;
  if (rows.empty()) throw Error("snr_at_air: empty sweep");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].air == target_air) return rows[k].snr_db;
    if (k + 1 < rows.size()) {
      const double a0 = rows[k].air;
      const double a1 = rows[k + 1].air;
      if (a0 < target_air && target_air < a1) {
        const double t = (target_air - a0) / (a1 - a0);
        return rows[k].snr_db + t * (rows[k + 1].snr_db - rows[k].snr_db);
      }
    }
  }
  std::ostringstream os;
  os << "snr_at_air: target " << target_air << " outside the sweep range";
  throw Error(os.str());
}

double gain_db(const SweepResult& a, const SweepResult& b, double target_air) {
  return snr_at_air(b, target_air) - snr_at_air(a, target_air);
}

std::pair<double, double> overhead_operating_point(const SweepResult& sweep, int bits, double overhead) {
  if (bits < 1) throw Error("overhead_operating_point: m must be positive");
  if (!(overhead >= 0.0)) throw Error("overhead_operating_point: overhead must be nonnegative");
  const double target = bits * rate_for_overhead(overhead);
  return {snr_at_air(sweep, target), target};
}

GaussianityStats coordinate_gaussianity(const Constellation& c, int bins) {
  if (bins < 8) throw Error("coordinate_gaussianity: bins must be >= 8");
  const Points& p = c.points();
  std::vector<double> v(p.data(), p.data() + p.size());
  if (v.empty()) throw Error("coordinate_gaussianity: empty constellation");
  const double n = static_cast<double>(v.size());
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw Error("coordinate_gaussianity: zero variance");

  GaussianityStats out;
  out.sigma = std::sqrt(m2);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::sort(v.begin(), v.end());
  double ks = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    // Equal values form one step of the empirical CDF.
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
    const double cdf = normal_cdf(v[k] / out.sigma);
    std::size_t lo = k;
    while (lo > 0 && v[lo - 1] == v[k]) --lo;
    ks = std::max(ks, std::abs(static_cast<double>(k + 1) / n - cdf));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(lo) / n));
  }
  out.ks_distance = ks;

  const double range = std::max(std::abs(v.front()), std::abs(v.back())) * (1.0 + 1e-12);
  const double width = 2.0 * range / bins;
  out.bin_edges.resize(static_cast<std::size_t>(bins + 1));
  for (int b = 0; b <= bins; ++b) out.bin_edges[static_cast<std::size_t>(b)] = -range + b * width;
  out.density.assign(static_cast<std::size_t>(bins), 0.0);
  for (double x : v) {
    const int b = std::clamp(static_cast<int>(std::floor((x + range) / width)), 0, bins - 1);
    out.density[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& d : out.density) d /= n * width;
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep, bool with_capacity) {
  os << kHeader;
  if (with_capacity) os << ",capacity_per_2d,capacity";
  os << '\n';
  for (const auto& row : sweep.rows) {
    os << format_double(row.snr_db) << ',' << format_double(row.air) << ',' << format_double(row.air_per_2d) << ','
       << format_double(row.ngmi) << ',' << (row.std_error ? format_double(*row.std_error) : std::string()) << ','
       << metric_name(sweep.metric) << ',' << sweep.estimator << ',' << sweep.dims << ',' << sweep.bits;
    if (with_capacity) {
      const double cap = capacity_per_2d(row.snr_db);
      os << ',' << format_double(cap) << ',' << format_double(cap * sweep.dims / 2.0);
    }
    os << '\n';
  }
}

SweepResult read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("sweep CSV: missing header");
  if (line.rfind(kHeader, 0) != 0) throw Error("sweep CSV: unexpected header");
  SweepResult out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() < 9) throw Error("sweep CSV line " + std::to_string(lineno) + ": too few columns");
    SweepRow row;
    row.snr_db = require_double(cols[0], "snr_db");
    row.air = require_double(cols[1], "air");
    row.air_per_2d = require_double(cols[2], "air_per_2d");
    row.ngmi = require_double(cols[3], "ngmi");
    if (!cols[4].empty()) row.std_error = require_double(cols[4], "std_error");
    out.metric = parse_metric(cols[5]);
    out.estimator = cols[6];
    out.dims = static_cast<int>(require_double(cols[7], "dims"));
    out.bits = static_cast<int>(require_double(cols[8], "bits"));
    if (!out.rows.empty() && !(row.snr_db > out.rows.back().snr_db)) {
      throw Error("sweep CSV line " + std::to_string(lineno) + ": SNR not ascending");
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace gshape
