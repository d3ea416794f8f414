#pragma once

#include "gshape/model.hpp"
#include "gshape/quadrature.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gshape {

/// MI of a uniformly used constellation on the AWGN channel, tensor
/// Gauss-Hermite rule with n points per dimension. Bits per N-dim symbol.
AirEstimate mi_gh(const Constellation& c, const ChannelSpec& ch, int n);

/// GMI (bit-metric decoding) with the tensor Gauss-Hermite rule.
AirEstimate gmi_gh(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch, int n);

/// Plain Monte-Carlo estimates: noise z = sigma_d · g with g standard normal.
/// Draws are stratified over the transmitted symbol (draw s uses symbol
/// s mod M); std_error is the sample deviation of the per-draw summand over
/// sqrt(samples).
AirEstimate mi_mc(const Constellation& c, const ChannelSpec& ch, std::int64_t samples, std::uint64_t seed);
AirEstimate gmi_mc(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch, std::int64_t samples,
                   std::uint64_t seed);

/// Randomised-quadrature evaluation of the same functionals.
/// `surrogate` is m - (1/M) sum_i sum_l w_l f_i(xi_l), the raw weighted sum,
/// which is only proportional to the AIR deficit. `normalized` rescales the
/// node sum by 2^(N/2)/L, which makes it an unbiased estimate of the AIR.
struct RqResult {
  double surrogate = 0.0;
  AirEstimate normalized;
};

RqResult mi_rq(const Constellation& c, const ChannelSpec& ch, const QuadratureSet& q);

/// Bit k of the GMI is evaluated on q_per_bit[k].
RqResult gmi_rq(const Constellation& c, const BitLabeling& lab, const ChannelSpec& ch,
                std::span<const QuadratureSet> q_per_bit);

/// log2(1 + snr) in bits per two real dimensions.
double capacity_per_2d(double snr_db);

struct CodingMetrics {
  double ngmi = 0.0;
  double max_overhead = 0.0;
};

/// NGMI = value / m and the largest FEC overhead (1 - NGMI) / NGMI it supports.
CodingMetrics coding_metrics(const AirEstimate& air, int bits);

/// Code rate required for a given FEC overhead: 1 / (1 + overhead).
double rate_for_overhead(double overhead);

/// Estimator selection by token: "gh:n", "mc:samples:seed", "rq:L:seed[:rotations]".
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::GaussHermite;
  int gh_points = 10;
  std::int64_t samples = 1000000;
  int quadrature_count = 0;  // 0 = default for the dimension
  std::uint64_t seed = 1;
  int rotations = 0;         // RQ: average over this many Haar-rotated copies

  static EstimatorSpec parse(std::string_view token);
  std::string to_string() const;
};

enum class Metric { MI, GMI };

Metric parse_metric(std::string_view token);
std::string_view metric_name(Metric metric);

/// Dispatches to the estimator named by `spec`. RQ returns the normalized value.
AirEstimate estimate_air(const Constellation& c, const BitLabeling* lab, Metric metric, const ChannelSpec& ch,
                         const EstimatorSpec& spec);

}  // namespace gshape
