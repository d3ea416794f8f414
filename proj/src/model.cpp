#include "gshape/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace gshape {

double mean_energy(const Points& points) {
  if (points.rows() == 0) return 0.0;
  return points.rowwise().squaredNorm().sum() / static_cast<double>(points.rows());
}

Points normalize_power(const Points& points) {
  const double energy = mean_energy(points);
  if (!(energy > 0.0)) throw Error("degenerate constellation");
  const double target = static_cast<double>(points.cols()) / 2.0;
  const double scale = std::sqrt(target / energy);
  if (scale == 1.0) return points;
  return points * scale;
}

Constellation::Constellation(Points points, std::string name)
    : points_(std::move(points)), name_(std::move(name)) {}

Constellation Constellation::normalized(const Points& points, std::string name) {
  return Constellation(normalize_power(points), std::move(name));
}

BitLabeling::BitLabeling(std::vector<std::uint64_t> codes, int bits)
    : codes_(std::move(codes)), bits_(bits) {
  if (bits < 0 || bits > 63) throw Error("label width out of range");
}

BitLabeling BitLabeling::from_strings(const std::vector<std::string>& rows) {
  if (rows.empty()) return {};
  const int width = static_cast<int>(rows.front().size());
  std::vector<std::uint64_t> codes;
  codes.reserve(rows.size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != width) throw Error("label rows of unequal width");
    std::uint64_t code = 0;
    for (char ch : row) {
      if (ch != '0' && ch != '1') throw Error("label characters must be 0 or 1");
      code = (code << 1) | static_cast<std::uint64_t>(ch - '0');
    }
    codes.push_back(code);
  }
  return BitLabeling(std::move(codes), width);
}

std::string to_bit_string(std::uint64_t code, int bits) {
  std::string s(static_cast<std::size_t>(bits), '0');
  for (int k = 0; k < bits; ++k) {
    if ((code >> (bits - 1 - k)) & 1U) s[static_cast<std::size_t>(k)] = '1';
  }
  return s;
}

std::string BitLabeling::row_string(int i) const { return to_bit_string(code(i), bits_); }

ChannelSpec::ChannelSpec(double snr_db, int dims) : snr_db_(snr_db), dims_(dims) {
  if (dims < 1) throw Error("channel dimension must be positive");
  if (!std::isfinite(snr_db)) throw Error("SNR must be finite");
  sigma_d_ = std::sqrt(1.0 / (2.0 * std::pow(10.0, snr_db / 10.0)));
}

ChannelSpec ChannelSpec::from_sigma(double sigma_d, int dims) {
  if (!(sigma_d > 0.0) || !std::isfinite(sigma_d)) throw Error("sigma_d must be positive");
  ChannelSpec ch(10.0 * std::log10(1.0 / (2.0 * sigma_d * sigma_d)), dims);
  ch.sigma_d_ = sigma_d;
  return ch;
}

double ChannelSpec::snr_linear() const { return std::pow(10.0, snr_db_ / 10.0); }

std::string EstimatorInfo::describe() const {
  std::ostringstream os;
  switch (kind) {
    case EstimatorKind::GaussHermite:
      os << "gh:" << gh_points;
      break;
    case EstimatorKind::MonteCarlo:
      os << "mc:" << samples << ':' << seed;
      break;
    case EstimatorKind::RandomisedQuadrature:
      os << "rq:" << quadrature_count << ':' << seed;
      if (rotations > 0) os << ':' << rotations;
      break;
  }
  return os.str();
}

std::vector<std::string> validate(const Constellation& c, const BitLabeling* labeling) {
  std::vector<std::string> out;
  const Points& p = c.points();
  const int m_points = c.num_points();
  const int dims = c.dims();
  if (m_points < 1) out.emplace_back("empty constellation (M < 1)");
  if (dims < 1) out.emplace_back("no dimensions (N < 1)");
  if (m_points < 1 || dims < 1) return out;

  for (int i = 0; i < m_points; ++i) {
    for (int d = 0; d < dims; ++d) {
      if (!std::isfinite(p(i, d))) {
        std::ostringstream os;
        os << "non-finite coordinate (" << i << "," << d << ")";
        out.push_back(os.str());
      }
    }
  }
  if (!out.empty()) return out;

  const double energy = mean_energy(p);
  if (std::abs(energy - dims / 2.0) > 1e-12 * std::max(1.0, dims / 2.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "power not normalised (mean energy " << energy << ", expected " << dims / 2.0 << ")";
    out.push_back(os.str());
  }

  // Sort by first coordinate, then compare within a 1e-12 window.
  std::vector<int> order(static_cast<std::size_t>(m_points));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return p(a, 0) < p(b, 0); });
  constexpr double kTol = 1e-12;
  std::set<std::pair<int, int>> dup;
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (p(order[b], 0) - p(order[a], 0) > kTol) break;
      if ((p.row(order[a]) - p.row(order[b])).norm() <= kTol) {
        dup.emplace(std::min(order[a], order[b]), std::max(order[a], order[b]));
      }
    }
  }
  for (const auto& [i, j] : dup) {
    std::ostringstream os;
    os << "duplicate points (" << i << "," << j << ")";
    out.push_back(os.str());
  }

  if (labeling != nullptr) {
    const int bits = labeling->bits();
    if (labeling->num_labels() != m_points) {
      std::ostringstream os;
      os << "labeling has " << labeling->num_labels() << " rows for " << m_points << " points";
      out.push_back(os.str());
    }
    if (bits < 1) {
      out.emplace_back("labeling has no bits (m < 1)");
    } else if (bits >= 63 || (std::uint64_t{1} << bits) != static_cast<std::uint64_t>(m_points)) {
      std::ostringstream os;
      os << "label width " << bits << " does not satisfy M = 2^m (M = " << m_points << ")";
      out.push_back(os.str());
    }
    std::set<std::uint64_t> seen(labeling->codes().begin(), labeling->codes().end());
    if (seen.size() != labeling->codes().size()) out.emplace_back("labels not bijective");
  }
  return out;
}

}  // namespace gshape
