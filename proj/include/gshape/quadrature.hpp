#pragma once

#include "gshape/model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gshape {

enum class QuadratureKind { GhTensor, Rq };

/// L nodes in N dimensions with positive weights.
///  - GhTensor(n): tensor Gauss-Hermite rule for weight exp(-||x||^2); L = n^N.
///  - Rq(seed): standard Gaussian draws with weights exp(-||x||^2 / 2).
struct QuadratureSet {
  Points nodes;  // L×N
  Vector weights;
  QuadratureKind kind = QuadratureKind::Rq;
  int gh_points = 0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(nodes.rows()); }
  int dims() const { return static_cast<int>(nodes.cols()); }
};

/// N×N orthogonal matrix with determinant +1.
class Rotation {
 public:
  explicit Rotation(Eigen::MatrixXd matrix);
  static Rotation identity(int dims);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dims() const { return static_cast<int>(matrix_.rows()); }

 private:
  Eigen::MatrixXd matrix_;
};

class InfeasibleGridError : public Error {
 public:
  InfeasibleGridError(int n, int dims, double size);
  double grid_size() const { return size_; }

 private:
  double size_;
};

/// Largest tensor grid gh_tensor will materialise.
inline constexpr double kMaxGridSize = 1e8;

struct GaussHermiteRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;
};

/// 1-D Gauss-Hermite rule for weight exp(-x^2), 1 <= n <= 64.
GaussHermiteRule gh_nodes_1d(int n);

/// n^N tensor grid; throws InfeasibleGridError when n^N > 1e8.
QuadratureSet gh_tensor(int n, int dims);

/// n^N as a double (may exceed the integer range).
double gh_grid_size(int n, int dims);

QuadratureSet rq_sample(int count, int dims, std::uint64_t seed);

/// Haar-distributed rotation on SO(N).
Rotation haar_rotation(int dims, std::uint64_t seed);

QuadratureSet apply_rotation(const QuadratureSet& set, const Rotation& rot);

/// Default randomised-quadrature budget L per dimensionality:
/// 16, 128, 256, 512 for N = 2, 4, 8, 12; otherwise the smallest power of two
/// not below (512/12)·N.
int default_quadrature_count(int dims);

}  // namespace gshape
