#include "gshape/optimizer.hpp"

#include "air_kernel.hpp"
#include "gshape/parallel.hpp"
#include "gshape/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace gshape {

using detail::RowArray;
using detail::RowMatrix;

namespace {

// Seed streams.
constexpr std::uint64_t kNodeStream = 1;
constexpr std::uint64_t kRotationStream = 2;
constexpr std::uint64_t kReferenceStream = 3;

// Fixed symbol-block layout for the gradient reduction; depends only on M so
// results are the same for every worker count.
constexpr std::size_t kReductionBlocks = 16;

}  // namespace

LossGrad surrogate_loss_grad(const Points& points, const BitLabeling* labeling, std::span<const QuadratureSet> sets,
                             double sigma_d, Metric metric, bool normalized) {
  const Eigen::Index m_points = points.rows();
  const Eigen::Index dims = points.cols();
  if (m_points < 1 || dims < 1) throw Error("surrogate_loss_grad: empty point set");
  if (!(sigma_d > 0.0)) throw Error("surrogate_loss_grad: sigma_d must be positive");
  const bool gmi = metric == Metric::GMI;
  if (gmi) {
    if (labeling == nullptr) throw Error("surrogate_loss_grad: GMI needs a labeling");
    if (labeling->num_labels() != m_points) throw Error("surrogate_loss_grad: labeling size mismatch");
    if (static_cast<int>(sets.size()) != labeling->bits()) {
      throw Error("surrogate_loss_grad: GMI needs one quadrature set per bit");
    }
  } else if (sets.empty()) {
    throw Error("surrogate_loss_grad: no quadrature set");
  }
  for (const auto& q : sets) {
    if (q.dims() != dims) throw Error("surrogate_loss_grad: quadrature dimension mismatch");
    if (q.size() != sets.front().size()) throw Error("surrogate_loss_grad: quadrature sets must share L");
  }

  const double energy_sum = points.rowwise().squaredNorm().sum();
  if (!(energy_sum > 0.0)) throw Error("degenerate constellation");
  const double scale = std::sqrt(static_cast<double>(dims) * static_cast<double>(m_points) / (2.0 * energy_sum));
  const Points x = points * scale;
  const RowMatrix sqdist = detail::pairwise_sq_distances(x);
  const Eigen::MatrixXd masks = gmi ? detail::label_masks(*labeling) : Eigen::MatrixXd();

  LossGrad out;
  out.coincident = (sqdist + RowMatrix::Identity(m_points, m_points)).minCoeff() < 1e-18;

  const double sigma2 = sigma_d * sigma_d;
  const std::size_t blocks = std::min<std::size_t>(kReductionBlocks, static_cast<std::size_t>(m_points));
  const auto block_lo = [&](std::size_t b) {
    return static_cast<Eigen::Index>(b * static_cast<std::size_t>(m_points) / blocks);
  };

  std::vector<double> loss_acc(static_cast<std::size_t>(m_points), 0.0);
  RowMatrix coupling = RowMatrix::Zero(m_points, m_points);  // C_ij = sum_l A_lj for symbol i
  Points grad_x = Points::Zero(m_points, dims);

  const std::size_t set_count = gmi ? sets.size() : 1;
  for (std::size_t s = 0; s < set_count; ++s) {
    const QuadratureSet& q = sets[s];
    const Eigen::Index count = q.size();
    const double node_scale = normalized ? std::pow(2.0, static_cast<double>(dims) / 2.0) / count : 1.0;
    const Eigen::ArrayXd k_weights =
        q.weights.array() * (node_scale / (static_cast<double>(m_points) * detail::kLn2 * sigma2));
    const RowMatrix proj = q.nodes * x.transpose();
    const int bit = static_cast<int>(s);

    std::vector<RowArray> block_b(blocks);
    parallel_for(blocks, [&](std::size_t b) {
      const Eigen::Index lo = block_lo(b);
      const Eigen::Index hi = block_lo(b + 1);
      RowArray& acc_b = block_b[b];
      acc_b = RowArray::Zero(count, m_points);
      Eigen::ArrayXd a, e, coeff, crow;
      for (Eigen::Index i = lo; i < hi; ++i) {
        crow = Eigen::ArrayXd::Zero(m_points);
        double loss_i = 0.0;
        const int col = gmi ? detail::subset_column(*labeling, static_cast<int>(i), bit) : 0;
        for (Eigen::Index l = 0; l < count; ++l) {
          const detail::RowExp r = detail::row_exponents(sqdist, proj, i, l, sigma_d, a, e);
          if (!gmi) {
            loss_i += q.weights(l) * r.log_sum();
            coeff = e * (k_weights(l) / r.sum);
          } else {
            // A = K · (p_all - p_subset); entries of A sum to zero.
            const auto mask = masks.col(col).array();
            const double shared = masks.col(col).dot(e.matrix());
            const double sublog = detail::subset_log_sum(a, masks.col(col), shared, r.max);
            loss_i += q.weights(l) * (r.log_sum() - sublog);
            if (shared > detail::kSubsetFloor) {
              coeff = k_weights(l) * (e / r.sum - e * mask / shared);
            } else {
              coeff = k_weights(l) * (e / r.sum - (a - sublog).exp() * mask);
            }
          }
          crow += coeff;
          acc_b.row(l) += coeff.transpose();
        }
        loss_acc[static_cast<std::size_t>(i)] += loss_i;
        coupling.row(i) += crow.matrix().transpose();
      }
    });

    RowArray b_sum = RowArray::Zero(count, m_points);
    for (const auto& blk : block_b) b_sum += blk;
    grad_x.noalias() += (detail::kSqrt2 * sigma_d) * (b_sum.matrix().transpose() * q.nodes);
    if (!gmi) {
      // Rows of A sum to K_l for MI, giving the same self term for every symbol.
      const Eigen::RowVectorXd self = (detail::kSqrt2 * sigma_d) * (k_weights.matrix().transpose() * q.nodes);
      grad_x.rowwise() -= self;
    }
  }

  // Pair terms: G_i -= sum_j C_ij (x_i - x_j), G_j += sum_i C_ij (x_i - x_j).
  const Eigen::VectorXd row_c = coupling.rowwise().sum();
  const Eigen::VectorXd col_c = coupling.colwise().sum().transpose();
  grad_x.noalias() += coupling * x;
  grad_x.noalias() += coupling.transpose() * x;
  grad_x -= (row_c + col_c).asDiagonal() * x;

  double total = 0.0;
  for (double v : loss_acc) total += v;
  double node_scale = 1.0;
  if (normalized) node_scale = std::pow(2.0, static_cast<double>(dims) / 2.0) / sets.front().size();
  const double bits = gmi ? labeling->bits() : std::log2(static_cast<double>(m_points));
  out.loss = -(bits - node_scale * total / (static_cast<double>(m_points) * detail::kLn2));

  // Chain rule through x = scale · p, scale = sqrt(N M / 2 / sum ||p||^2).
  const double radial = (grad_x.array() * points.array()).sum();
  out.grad = scale * grad_x - (scale * radial / energy_sum) * points;
  return out;
}

void OptimizerConfig::check() const {
  if (iterations < 1) throw Error("optimizer: iterations must be >= 1");
  if (!(learning_rate >= 0.0)) throw Error("optimizer: learning_rate must be nonnegative");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw Error("optimizer: lr_decay must be in (0, 1]");
  if (quadrature_count < 0) throw Error("optimizer: quadrature_count must be positive (0 = default)");
  if (eval_every < 1) throw Error("optimizer: eval_every must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("optimizer: moment decays must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error("optimizer: epsilon must be positive");
  if (reference_eval && reference_eval->kind == EstimatorKind::RandomisedQuadrature) {
    throw Error("optimizer: reference_eval must be gh or mc");
  }
}

EstimatorSpec resolved_reference(const OptimizerConfig& config, int dims) {
  if (config.reference_eval) return *config.reference_eval;
  EstimatorSpec spec;
  if (dims <= 4) {
    spec.kind = EstimatorKind::GaussHermite;
    spec.gh_points = 10;
  } else {
    spec.kind = EstimatorKind::MonteCarlo;
    spec.samples = 1000000;
  }
  if (spec.kind == EstimatorKind::MonteCarlo) spec.seed = derive_seed(config.seed, {kReferenceStream});
  return spec;
}

OptimisationRun optimize(const OptimizerConfig& config, const Constellation& initial, const BitLabeling* labeling) {
  config.check();
  const bool gmi = config.metric == Metric::GMI;
  if (gmi != (labeling != nullptr)) throw Error("optimize: labeling must be given iff the metric is GMI");
  const auto violations = validate(Constellation::normalized(initial.points()), labeling);
  if (!violations.empty()) throw Error("optimize: invalid initial constellation: " + violations.front());

  const int dims = initial.dims();
  const ChannelSpec channel(config.snr_db, dims);
  const int count = config.quadrature_count > 0 ? config.quadrature_count : default_quadrature_count(dims);
  const int set_count = gmi ? labeling->bits() : 1;
  const EstimatorSpec reference = resolved_reference(config, dims);

  OptimisationRun run;
  run.config = config;
  run.initial = Constellation::normalized(initial.points(), initial.name());
  if (labeling != nullptr) run.labeling = *labeling;

  const QuadratureSet base = rq_sample(count, dims, derive_seed(config.seed, {kNodeStream}));
  auto sets_for = [&](int t) {
    std::vector<QuadratureSet> sets;
    sets.reserve(static_cast<std::size_t>(set_count));
    for (int k = 0; k < set_count; ++k) {
      const auto iter = static_cast<std::uint64_t>(t);
      const auto bit = static_cast<std::uint64_t>(k);
      if (config.redraw_nodes) {
        sets.push_back(rq_sample(count, dims, derive_seed(config.seed, {kNodeStream, iter, bit + 1})));
      } else {
        sets.push_back(
            apply_rotation(base, haar_rotation(dims, derive_seed(config.seed, {kRotationStream, iter, bit}))));
      }
    }
    return sets;
  };
  auto reference_air = [&](const Constellation& c) {
    return estimate_air(c, labeling, config.metric, channel, reference).value;
  };

  Points p = run.initial.points();
  Points adam_m = Points::Zero(p.rows(), p.cols());
  Points adam_v = Points::Zero(p.rows(), p.cols());
  double best = -std::numeric_limits<double>::infinity();
  const auto start = std::chrono::steady_clock::now();
  double lr = config.learning_rate;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  for (int t = 0; t <= config.iterations; ++t) {
    const auto sets = sets_for(t);
    LossGrad lg = surrogate_loss_grad(p, labeling, sets, channel.sigma_d(), config.metric);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
      std::ostringstream os;
      os << "optimize: non-finite loss or gradient at iteration " << t;
      throw Error(os.str());
    }
    TraceEntry entry;
    entry.iteration = t;
    entry.surrogate_loss = lg.loss;
    entry.coincident = lg.coincident;
    if (t % config.eval_every == 0 || t == config.iterations) {
      const Constellation current = t == 0 ? run.initial : Constellation::normalized(p, initial.name());
      const double air = reference_air(current);
      entry.reference_air = air;
      if (t == 0) run.initial_reference_air = air;
      if (air > best) {
        best = air;
        run.final = current;
        run.best_iteration = t;
        run.best_reference_air = air;
      }
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    run.trace.push_back(entry);
    if (t == config.iterations) break;

    beta1_pow *= config.beta1;
    beta2_pow *= config.beta2;
    adam_m = config.beta1 * adam_m + (1.0 - config.beta1) * lg.grad;
    adam_v = config.beta2 * adam_v + (1.0 - config.beta2) * lg.grad.cwiseAbs2();
    const Points m_hat = adam_m / (1.0 - beta1_pow);
    const Points v_hat = adam_v / (1.0 - beta2_pow);
    p.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + config.epsilon);
    lr *= config.lr_decay;
  }
  return run;
}

}  // namespace gshape
