#pragma once

// Shared inner loop of every MI/GMI evaluation.
//
// For transmitted symbol x_i and unit-variance node xi the received point is
// y = x_i + sqrt(2)·sigma·xi, and
//   a_j = -(||x_i - x_j||^2 + 2·sqrt(2)·sigma·(x_i - x_j)·xi) / (2 sigma^2)
// is the log-likelihood ratio ln p(y|x_j)/p(y|x_i). a_i = 0 exactly.

#include "gshape/model.hpp"

#include <cmath>
#include <limits>

namespace gshape::detail {

using RowArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrix = Points;

inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kSqrt2 = 1.41421356237309504880;
// Below this the max-shifted subset sum is recomputed with its own shift.
inline constexpr double kSubsetFloor = 1e-250;

inline RowMatrix pairwise_sq_distances(const Points& x) {
  const Eigen::Index m = x.rows();
  RowMatrix d(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < m; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  return d;
}

/// Column k marks labels with bit k = 1; column bits + k marks bit k = 0.
inline Eigen::MatrixXd label_masks(const BitLabeling& lab) {
  const int m = lab.bits();
  Eigen::MatrixXd masks(lab.num_labels(), 2 * m);
  for (int j = 0; j < lab.num_labels(); ++j) {
    for (int k = 0; k < m; ++k) {
      const double one = lab.bit(j, k) ? 1.0 : 0.0;
      masks(j, k) = one;
      masks(j, m + k) = 1.0 - one;
    }
  }
  return masks;
}

inline int subset_column(const BitLabeling& lab, int i, int k) {
  return lab.bit(i, k) ? k : lab.bits() + k;
}

struct RowExp {
  double max = 0.0;
  double sum = 0.0;  // sum_j exp(a_j - max)

  double log_sum() const { return max + std::log(sum); }
};

/// Exponents a_j for symbol i at node l, with e = exp(a - max). proj = nodes · X^T.
/// Works one node row at a time so a and e stay in L1.
inline RowExp row_exponents(const RowMatrix& sqdist, const RowMatrix& proj, Eigen::Index i, Eigen::Index l,
                            double sigma, Eigen::ArrayXd& a, Eigen::ArrayXd& e) {
  const double beta = kSqrt2 / sigma;
  const double alpha = -1.0 / (2.0 * sigma * sigma);
  a = (beta * proj.row(l).array().transpose() + alpha * sqdist.row(i).array().transpose()) - beta * proj(l, i);
  RowExp r;
  r.max = a.maxCoeff();
  e = (a - r.max).exp();
  r.sum = e.sum();
  return r;
}

/// ln sum_{j : mask_j = 1} exp(a_j), recomputed with its own shift when the
/// shared-shift sum underflows.
inline double subset_log_sum(const Eigen::ArrayXd& a, const Eigen::VectorXd& mask, double shared_sum,
                             double rowmax) {
  if (shared_sum > kSubsetFloor) return rowmax + std::log(shared_sum);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (mask(j) != 0.0) best = std::max(best, a(j));
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (mask(j) != 0.0) sum += std::exp(a(j) - best);
  }
  return best + std::log(sum);
}

}  // namespace gshape::detail
