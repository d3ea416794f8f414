#pragma once

#include "gshape/air.hpp"
#include "gshape/model.hpp"
#include "gshape/quadrature.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gshape {

struct LossGrad {
  double loss = 0.0;
  Points grad;             // d loss / d raw points
  bool coincident = false; // two points within 1e-9 after normalisation
};

/// Negative randomised-quadrature AIR of `points` after internal power
/// normalisation, with its exact gradient with respect to the raw points.
/// MI uses sets[0]; GMI evaluates bit k on sets[k]. With `normalized` the
/// node sum carries the 2^(N/2)/L factor (unbiased AIR scale), otherwise the
/// raw weighted sum is used.
LossGrad surrogate_loss_grad(const Points& points, const BitLabeling* labeling, std::span<const QuadratureSet> sets,
                             double sigma_d, Metric metric, bool normalized = true);

struct OptimizerConfig {
  Metric metric = Metric::MI;
  double snr_db = 4.0;
  int iterations = 5000;
  double learning_rate = 5e-3;
  double lr_decay = 0.9995;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int quadrature_count = 0;  // 0 = default_quadrature_count(N)
  bool redraw_nodes = false;
  std::uint64_t seed = 1;
  int eval_every = 100;
  /// Reference estimator for best-iterate selection; nullopt = GH(10) for
  /// N <= 4, MC with 1e6 samples above, with the MC seed derived from `seed`.
  /// The same MC seed is used at every evaluation of a run.
  std::optional<EstimatorSpec> reference_eval;

  void check() const;
};

/// Reference estimator a config resolves to at dimension N.
EstimatorSpec resolved_reference(const OptimizerConfig& config, int dims);

struct TraceEntry {
  int iteration = 0;
  double surrogate_loss = 0.0;
  std::optional<double> reference_air;
  double wall_ms = 0.0;
  bool coincident = false;
};

struct OptimisationRun {
  OptimizerConfig config;
  Constellation initial;             // normalised
  std::optional<BitLabeling> labeling;
  std::vector<TraceEntry> trace;
  Constellation final;               // best reference iterate, normalised
  int best_iteration = 0;
  double best_reference_air = 0.0;
  double initial_reference_air = 0.0;
};

/// Adaptive-moment descent on the point positions. The quadrature set is
/// rotated by a fresh Haar rotation every iteration (one per bit for GMI).
/// Entries 0..iterations are traced; the loss at entry t is that of the
/// points before step t. The reference AIR is evaluated at entry 0, every
/// eval_every entries and at the last entry.
OptimisationRun optimize(const OptimizerConfig& config, const Constellation& initial,
                         const BitLabeling* labeling = nullptr);

}  // namespace gshape
