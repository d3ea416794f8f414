#include "gshape/quadrature.hpp"

#include "gshape/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <sstream>

namespace gshape {

namespace {

std::string infeasible_message(int n, int dims, double size) {
  std::ostringstream os;
  os << "GH grid infeasible at this dimension: n^N = " << n << "^" << dims << " = " << size
     << " nodes exceeds " << kMaxGridSize;
  return os.str();
}

// Orthonormal Hermite recurrence at x: returns (p_n(x), p_n'(x)).
std::pair<double, double> hermite_orthonormal(int n, double x) {
  double p0 = 0.0;
  double p1 = 1.0 / std::pow(std::numbers::pi, 0.25);
  for (int j = 1; j <= n; ++j) {
    const double p2 = p1;
    p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p0;
    p0 = p2;
  }
  // p1 = p_n, p0 = p_{n-1}
  return {p1, std::sqrt(2.0 * n) * p0};
}

}  // namespace

InfeasibleGridError::InfeasibleGridError(int n, int dims, double size)
    : Error(infeasible_message(n, dims, size)), size_(size) {}

Rotation::Rotation(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw Error("rotation must be square");
}

Rotation Rotation::identity(int dims) { return Rotation(Eigen::MatrixXd::Identity(dims, dims)); }

GaussHermiteRule gh_nodes_1d(int n) {
  if (n < 1 || n > 64) throw Error("gh_nodes_1d: n must be in [1, 64]");
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = std::sqrt(std::numbers::pi);
    return rule;
  }

  // Golub-Welsch for starting values, then Newton polish of each root with
  // weights from the orthonormal recurrence (accurate in the far tails).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd guess = solver.eigenvalues();

  for (int i = 0; i < n; ++i) {
    double x = guess(i);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = hermite_orthonormal(n, x);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    const auto [p, dp] = hermite_orthonormal(n, x);
    (void)p;
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / (dp * dp);
  }

  // Exact symmetry about the origin.
  for (int i = 0; i < n / 2; ++i) {
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
    const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double gh_grid_size(int n, int dims) { return std::pow(static_cast<double>(n), dims); }

QuadratureSet gh_tensor(int n, int dims) {
  if (dims < 1) throw Error("gh_tensor: N must be positive");
  const double size = gh_grid_size(n, dims);
  if (size > kMaxGridSize) throw InfeasibleGridError(n, dims, size);
  const GaussHermiteRule rule = gh_nodes_1d(n);
  const auto count = static_cast<Eigen::Index>(size);

  QuadratureSet set;
  set.kind = QuadratureKind::GhTensor;
  set.gh_points = n;
  set.nodes.resize(count, dims);
  set.weights.resize(count);
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  for (Eigen::Index l = 0; l < count; ++l) {
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
      set.nodes(l, d) = rule.nodes[k];
      w *= rule.weights[k];
    }
    set.weights(l) = w;
    // Odometer increment, last dimension fastest.
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[static_cast<std::size_t>(d)] < n) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
  }
  return set;
}

QuadratureSet rq_sample(int count, int dims, std::uint64_t seed) {
  if (count < 1) throw Error("rq_sample: L must be positive");
  if (dims < 1) throw Error("rq_sample: N must be positive");
  QuadratureSet set;
  set.kind = QuadratureKind::Rq;
  set.seed = seed;
  set.nodes.resize(count, dims);
  set.weights.resize(count);
  Rng rng(seed);
  for (int l = 0; l < count; ++l) {
    for (int d = 0; d < dims; ++d) set.nodes(l, d) = rng.normal();
    set.weights(l) = std::exp(-0.5 * set.nodes.row(l).squaredNorm());
  }
  return set;
}

Rotation haar_rotation(int dims, std::uint64_t seed) {
  if (dims < 1) throw Error("haar_rotation: N must be positive");
  Rng rng(seed);
  Eigen::MatrixXd g(dims, dims);
  for (int r = 0; r < dims; ++r) {
    for (int c = 0; c < dims; ++c) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dims, dims);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dims; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return Rotation(std::move(q));
}

QuadratureSet apply_rotation(const QuadratureSet& set, const Rotation& rot) {
  if (rot.dims() != set.dims()) throw Error("apply_rotation: dimension mismatch");
  QuadratureSet out = set;
  // Row-vector nodes: xi' = Q xi  <=>  row' = row · Q^T.
  out.nodes.noalias() = set.nodes * rot.matrix().transpose();
  return out;
}

int default_quadrature_count(int dims) {
  if (dims < 1) throw Error("default_quadrature_count: N must be positive");
  switch (dims) {
    case 2: return 16;
    case 4: return 128;
    case 8: return 256;
    case 12: return 512;
    default: break;
  }
  const double floor_count = 512.0 / 12.0 * dims;
  int count = 1;
  while (count < floor_count) count *= 2;
  return count;
}

}  // namespace gshape
