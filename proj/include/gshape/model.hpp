#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gshape {

/// Row-major M×N point matrix: one constellation point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rescales points by one positive scalar so that (1/M) sum ||x_i||^2 = N/2,
/// i.e. unit average energy per two real dimensions.
/// Throws Error("degenerate constellation") if every point is zero.
Points normalize_power(const Points& points);

/// Mean squared norm (1/M) sum ||x_i||^2.
double mean_energy(const Points& points);

/// M points in N real dimensions.
class Constellation {
 public:
  Constellation() = default;
  Constellation(Points points, std::string name = {});

  /// Builds a constellation from raw points after power normalisation.
  static Constellation normalized(const Points& points, std::string name = {});

  const Points& points() const { return points_; }
  int num_points() const { return static_cast<int>(points_.rows()); }
  int dims() const { return static_cast<int>(points_.cols()); }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

 private:
  Points points_;
  std::string name_;
};

/// Bit labels for the points of a constellation. Row i holds the m-bit label
/// of point i; bit 0 is the leftmost character of the textual form.
class BitLabeling {
 public:
  BitLabeling() = default;
  BitLabeling(std::vector<std::uint64_t> codes, int bits);

  static BitLabeling from_strings(const std::vector<std::string>& rows);

  int num_labels() const { return static_cast<int>(codes_.size()); }
  int bits() const { return bits_; }
  std::uint64_t code(int i) const { return codes_[static_cast<std::size_t>(i)]; }
  const std::vector<std::uint64_t>& codes() const { return codes_; }

  /// Bit k of label i, k = 0 being the most significant (leftmost) bit.
  int bit(int i, int k) const {
    return static_cast<int>((codes_[static_cast<std::size_t>(i)] >> (bits_ - 1 - k)) & 1U);
  }
  std::string row_string(int i) const;

 private:
  std::vector<std::uint64_t> codes_;
  int bits_ = 0;
};

std::string to_bit_string(std::uint64_t code, int bits);

/// AWGN channel at a given SNR. SNR is signal power per two real dimensions
/// over noise power per two real dimensions, so sigma_d = sqrt(1/(2 snr)).
class ChannelSpec {
 public:
  ChannelSpec(double snr_db, int dims);
  static ChannelSpec from_sigma(double sigma_d, int dims);

  double snr_db() const { return snr_db_; }
  double snr_linear() const;
  int dims() const { return dims_; }
  double sigma_d() const { return sigma_d_; }

 private:
  double snr_db_;
  int dims_;
  double sigma_d_;
};

enum class EstimatorKind { GaussHermite, MonteCarlo, RandomisedQuadrature };

/// Which estimator produced an AIR value, with its budget.
struct EstimatorInfo {
  EstimatorKind kind = EstimatorKind::GaussHermite;
  int gh_points = 0;             // GH: n per dimension
  std::int64_t samples = 0;      // MC: noise draws
  int quadrature_count = 0;      // RQ: L
  std::uint64_t seed = 0;        // MC / RQ
  int rotations = 0;             // RQ: rotated sets averaged (0 = base set only)

  std::string describe() const;
};

struct AirEstimate {
  double value = 0.0;  // bits per N-dimensional symbol
  int dims = 0;
  EstimatorInfo method;
  std::optional<double> std_error;  // MC only

  double value_per_2d() const { return value * 2.0 / dims; }
};

/// Structural checks; every violation names the broken invariant.
std::vector<std::string> validate(const Constellation& c, const BitLabeling* labeling = nullptr);

inline std::vector<std::string> validate(const Constellation& c, const BitLabeling& labeling) {
  return validate(c, &labeling);
}

}  // namespace gshape
