#include "gshape/air.hpp"

#include "air_kernel.hpp"
#include "gshape/parallel.hpp"
#include "gshape/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gshape {

using detail::RowArray;
using detail::RowMatrix;

namespace {

constexpr Eigen::Index kNodeChunk = 4096;

// Points (and labels) in lexicographic order, so estimator output does not
// depend on the order in which points are listed.
struct Canonical {
  Points x;
  std::optional<BitLabeling> lab;
};

Canonical canonicalize(const Constellation& c, const BitLabeling* lab) {
  const Points& p = c.points();
  std::vector<int> order(static_cast<std::size_t>(p.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index d = 0; d < p.cols(); ++d) {
      if (p(a, d) != p(b, d)) return p(a, d) < p(b, d);
    }
    if (lab != nullptr) return lab->code(a) < lab->code(b);
    return a < b;
  });
  Canonical out;
  out.x.resize(p.rows(), p.cols());
  std::vector<std::uint64_t> codes;
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = p.row(order[r]);
    if (lab != nullptr) codes.push_back(lab->code(order[r]));
  }
  if (lab != nullptr) out.lab = BitLabeling(std::move(codes), lab->bits());
  return out;
}

void check_inputs(const Constellation& c, const BitLabeling* lab, const ChannelSpec& ch) {
  if (c.num_points() < 1 || c.dims() < 1) throw Error("empty constellation");
  if (ch.dims() != c.dims()) throw Error("channel and constellation dimensions differ");
  if (lab != nullptr) {
    if (lab->num_labels() != c.num_points()) throw Error("labeling size does not match constellation");
    if (lab->bits() < 1 || (std::uint64_t{1} << lab->bits()) != static_cast<std::uint64_t>(c.num_points())) {
      throw Error("labeling width must satisfy M = 2^m");
    }
  }
}

double log2_points(int m_points) { return std::log2(static_cast<double>(m_points)); }

// Evaluates per-node terms f_i (MI) or sum_k g_{i,k} (GMI, or one bit only)
// in nats for one symbol.
class SymbolEvaluator {
 public:
  SymbolEvaluator(const Points& x, double sigma, const BitLabeling* lab)
      : x_(x), sqdist_(detail::pairwise_sq_distances(x)), sigma_(sigma), lab_(lab) {
    if (lab_ != nullptr) masks_ = detail::label_masks(*lab_);
  }

  const Points& points() const { return x_; }

  // proj = nodes · X^T; terms receives one value per node.
  void terms(Eigen::Index i, const RowMatrix& proj, int only_bit, Eigen::ArrayXd& out) const {
    const Eigen::Index count = proj.rows();
    out.resize(count);
    Eigen::ArrayXd a, e;
    if (lab_ == nullptr) {
      for (Eigen::Index l = 0; l < count; ++l) out(l) = detail::row_exponents(sqdist_, proj, i, l, sigma_, a, e).log_sum();
      return;
    }
    const int bits = lab_->bits();
    const int first = only_bit < 0 ? 0 : only_bit;
    const int last = only_bit < 0 ? bits : only_bit + 1;
    for (Eigen::Index l = 0; l < count; ++l) {
      const detail::RowExp r = detail::row_exponents(sqdist_, proj, i, l, sigma_, a, e);
      const double full = r.log_sum();
      double acc = 0.0;
      for (int k = first; k < last; ++k) {
        const int col = detail::subset_column(*lab_, static_cast<int>(i), k);
        const double shared = masks_.col(col).dot(e.matrix());
        acc += full - detail::subset_log_sum(a, masks_.col(col), shared, r.max);
      }
      out(l) = acc;
    }
  }

  // acc[i] += sum_l w_l · terms_i(xi_l) for a node set shared by all symbols.
  void accumulate(const RowMatrix& nodes, const Vector& weights, int only_bit, std::vector<double>& acc) const {
    const RowMatrix proj = nodes * x_.transpose();
    const auto m_points = static_cast<std::size_t>(x_.rows());
    parallel_for(m_points, [&](std::size_t i) {
      Eigen::ArrayXd t;
      terms(static_cast<Eigen::Index>(i), proj, only_bit, t);
      acc[i] += (weights.array() * t).sum();
    });
  }

 private:
  const Points& x_;
  RowMatrix sqdist_;
  double sigma_;
  const BitLabeling* lab_;
  Eigen::MatrixXd masks_;
};

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

AirEstimate gh_estimate(const Constellation& c, const BitLabeling* lab, const ChannelSpec& ch, int n) {
  check_inputs(c, lab, ch);
  const int dims = c.dims();
  const double size = gh_grid_size(n, dims);
  if (size > kMaxGridSize) throw InfeasibleGridError(n, dims, size);
  const GaussHermiteRule rule = gh_nodes_1d(n);

  const Canonical canon = canonicalize(c, lab);
  const SymbolEvaluator eval(canon.x, ch.sigma_d(), canon.lab ? &*canon.lab : nullptr);
  std::vector<double> acc(static_cast<std::size_t>(c.num_points()), 0.0);

  const auto total = static_cast<Eigen::Index>(size);
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  for (Eigen::Index start = 0; start < total; start += kNodeChunk) {
    const Eigen::Index count = std::min(kNodeChunk, total - start);
    RowMatrix nodes(count, dims);
    Vector weights(count);
    for (Eigen::Index l = 0; l < count; ++l) {
      double w = 1.0;
      for (int d = 0; d < dims; ++d) {
        const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]);
        nodes(l, d) = rule.nodes[k];
        w *= rule.weights[k];
      }
      weights(l) = w;
      for (int d = dims - 1; d >= 0; --d) {
        if (++idx[static_cast<std::size_t>(d)] < n) break;
        idx[static_cast<std::size_t>(d)] = 0;
      }
    }
    eval.accumulate(nodes, weights, -1, acc);
  }

  const double norm = std::pow(std::numbers::pi, dims / 2.0) * c.num_points();
  AirEstimate out;
  const double bits = lab != nullptr ? lab->bits() : log2_points(c.num_points());
  out.value = bits - ordered_sum(acc) / norm / detail::kLn2;
  out.dims = dims;
  out.method.kind = EstimatorKind::GaussHermite;
  out.method.gh_points = n;
  return out;
}

AirEstimate mc_estimate(const Constellation& c, const BitLabeling* lab, const ChannelSpec& ch,
                        std::int64_t samples, std::uint64_t seed) {
  check_inputs(c, lab, ch);
  if (samples < 1000) throw Error("Monte-Carlo estimate needs at least 1000 samples");
  const int dims = c.dims();
  const auto m_points = static_cast<std::int64_t>(c.num_points());
  const Canonical canon = canonicalize(c, lab);
  const SymbolEvaluator eval(canon.x, ch.sigma_d(), canon.lab ? &*canon.lab : nullptr);

  std::vector<Eigen::ArrayXd> values(static_cast<std::size_t>(m_points));
  parallel_for(static_cast<std::size_t>(m_points), [&](std::size_t i) {
    const std::int64_t draws = samples / m_points + (static_cast<std::int64_t>(i) < samples % m_points ? 1 : 0);
    Eigen::ArrayXd& out = values[i];
    out.resize(draws);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    for (std::int64_t start = 0; start < draws; start += kNodeChunk) {
      const Eigen::Index count = std::min<std::int64_t>(kNodeChunk, draws - start);
      RowMatrix nodes(count, dims);
      for (Eigen::Index l = 0; l < count; ++l) {
        for (int d = 0; d < dims; ++d) nodes(l, d) = rng.normal() / detail::kSqrt2;
      }
      const RowMatrix proj = nodes * eval.points().transpose();
      Eigen::ArrayXd t;
      eval.terms(static_cast<Eigen::Index>(i), proj, -1, t);
      out.segment(start, count) = t / detail::kLn2;
    }
  });

  double sum = 0.0;
  std::int64_t total = 0;
  for (const auto& v : values) {
    for (Eigen::Index k = 0; k < v.size(); ++k) sum += v(k);
    total += v.size();
  }
  const double mean = sum / static_cast<double>(total);
  double sq = 0.0;
  for (const auto& v : values) {
    for (Eigen::Index k = 0; k < v.size(); ++k) sq += (v(k) - mean) * (v(k) - mean);
  }
  const double var = sq / static_cast<double>(total - 1);

  AirEstimate out;
  const double bits = lab != nullptr ? lab->bits() : log2_points(c.num_points());
  out.value = bits - mean;
  out.dims = dims;
  out.std_error = std::sqrt(var / static_cast<double>(total));
  out.method.kind = EstimatorKind::MonteCarlo;
  out.method.samples = samples;
  out.method.seed = seed;
  return out;
}

RqResult rq_estimate(const Constellation& c, const BitLabeling* lab, const ChannelSpec& ch,
                     std::span<const QuadratureSet> sets) {
  check_inputs(c, lab, ch);
  const int dims = c.dims();
  const int count = sets.front().size();
  for (const auto& q : sets) {
    if (q.kind != QuadratureKind::Rq) throw Error("randomised-quadrature estimate needs an RQ set");
    if (q.dims() != dims) throw Error("quadrature and constellation dimensions differ");
    if (q.size() != count) throw Error("per-bit quadrature sets must share L");
  }
  const Canonical canon = canonicalize(c, lab);
  const SymbolEvaluator eval(canon.x, ch.sigma_d(), canon.lab ? &*canon.lab : nullptr);
  std::vector<double> acc(static_cast<std::size_t>(c.num_points()), 0.0);
  if (lab == nullptr) {
    eval.accumulate(sets.front().nodes, sets.front().weights, -1, acc);
  } else {
    for (int k = 0; k < lab->bits(); ++k) {
      const QuadratureSet& q = sets[static_cast<std::size_t>(k)];
      eval.accumulate(q.nodes, q.weights, k, acc);
    }
  }
  const double bits = lab != nullptr ? lab->bits() : log2_points(c.num_points());
  const double raw = ordered_sum(acc) / c.num_points() / detail::kLn2;
  RqResult out;
  out.surrogate = bits - raw;
  out.normalized.value = bits - raw * std::pow(2.0, dims / 2.0) / count;
  out.normalized.dims = dims;
  out.normalized.method.kind = EstimatorKind::RandomisedQuadrature;
  out.normalized.method.quadrature_count = count;
  out.normalized.method.seed = sets.front().seed;
  return out;
}

}  // namespace

AirEstimate mi_gh(const Constellation& c, const ChannelSpec& ch, int n) { return gh_estimate(c, nullptr, ch, n); }

AirEstimate gmi_gh(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch, int n) {
  return gh_estimate(c, &lab, ch, n);
}

AirEstimate mi_mc(const Constellation& c, const ChannelSpec& ch, std::int64_t samples, std::uint64_t seed) {
  return mc_estimate(c, nullptr, ch, samples, seed);
}

AirEstimate gmi_mc(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch, std::int64_t samples,
                   std::uint64_t seed) {
  return mc_estimate(c, &lab, ch, samples, seed);
}

RqResult mi_rq(const Constellation& c, const ChannelSpec& ch, const QuadratureSet& q) {
  return rq_estimate(c, nullptr, ch, std::span<const QuadratureSet>(&q, 1));
}

RqResult gmi_rq(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch,
                std::span<const QuadratureSet> q_per_bit) {
  if (static_cast<int>(q_per_bit.size()) != lab.bits()) throw Error("gmi_rq needs one quadrature set per bit");
  return rq_estimate(c, &lab, ch, q_per_bit);
}

double capacity_per_2d(double snr_db) { return std::log2(1.0 + std::pow(10.0, snr_db / 10.0)); }

CodingMetrics coding_metrics(const AirEstimate& air, int bits) {
  if (bits < 1) throw Error("coding_metrics: m must be positive");
  CodingMetrics out;
  out.ngmi = air.value / bits;
  out.max_overhead = (1.0 - out.ngmi) / out.ngmi;
  return out;
}

double rate_for_overhead(double overhead) { return 1.0 / (1.0 + overhead); }

namespace {

std::vector<std::string_view> split_colon(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(':', pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_integer(std::string_view token, std::string_view what) {
  T v{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw Error("invalid " + std::string(what) + " '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

EstimatorSpec EstimatorSpec::parse(std::string_view token) {
  const auto parts = split_colon(token);
  EstimatorSpec spec;
  if (parts[0] == "gh" && parts.size() == 2) {
    spec.kind = EstimatorKind::GaussHermite;
    spec.gh_points = parse_integer<int>(parts[1], "GH order");
  } else if (parts[0] == "mc" && (parts.size() == 2 || parts.size() == 3)) {
    spec.kind = EstimatorKind::MonteCarlo;
    spec.samples = parse_integer<std::int64_t>(parts[1], "sample count");
    if (parts.size() == 3) spec.seed = parse_integer<std::uint64_t>(parts[2], "seed");
  } else if (parts[0] == "rq" && parts.size() >= 2 && parts.size() <= 4) {
    spec.kind = EstimatorKind::RandomisedQuadrature;
    spec.quadrature_count = parse_integer<int>(parts[1], "quadrature count");
    if (parts.size() >= 3) spec.seed = parse_integer<std::uint64_t>(parts[2], "seed");
    if (parts.size() == 4) spec.rotations = parse_integer<int>(parts[3], "rotation count");
  } else {
    throw Error("unknown estimator '" + std::string(token) + "' (expected gh:n, mc:samples:seed or rq:L:seed)");
  }
  return spec;
}

std::string EstimatorSpec::to_string() const {
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

Metric parse_metric(std::string_view token) {
  if (token == "MI" || token == "mi") return Metric::MI;
  if (token == "GMI" || token == "gmi") return Metric::GMI;
  throw Error("unknown metric '" + std::string(token) + "' (expected MI or GMI)");
}

std::string_view metric_name(Metric metric) { return metric == Metric::MI ? "MI" : "GMI"; }

AirEstimate estimate_air(const Constellation& c, const BitLabeling* lab, Metric metric, const ChannelSpec& ch,
                         const EstimatorSpec& spec) {
  if (metric == Metric::GMI && lab == nullptr) throw Error("GMI needs a bit labeling");
  const BitLabeling* used = metric == Metric::GMI ? lab : nullptr;
  switch (spec.kind) {
    case EstimatorKind::GaussHermite:
      return gh_estimate(c, used, ch, spec.gh_points);
    case EstimatorKind::MonteCarlo:
      return mc_estimate(c, used, ch, spec.samples, spec.seed);
    case EstimatorKind::RandomisedQuadrature:
      break;
  }
  const int dims = c.dims();
  const int count = spec.quadrature_count > 0 ? spec.quadrature_count : default_quadrature_count(dims);
  const QuadratureSet base = rq_sample(count, dims, spec.seed);
  const int bits = used != nullptr ? used->bits() : 1;
  const int rounds = std::max(1, spec.rotations);
  double total = 0.0;
  for (int r = 0; r < rounds; ++r) {
    std::vector<QuadratureSet> sets;
    for (int k = 0; k < bits; ++k) {
      const bool rotate = spec.rotations > 0 || used != nullptr;
      sets.push_back(rotate ? apply_rotation(base, haar_rotation(dims, derive_seed(spec.seed, {1, std::uint64_t(r),
                                                                                             std::uint64_t(k)})))
                            : base);
    }
    total += rq_estimate(c, used, ch, sets).normalized.value;
  }
  AirEstimate out;
  out.value = total / rounds;
  out.dims = dims;
  out.method.kind = EstimatorKind::RandomisedQuadrature;
  out.method.quadrature_count = count;
  out.method.seed = spec.seed;
  out.method.rotations = spec.rotations;
  return out;
}

}  // namespace gshape
