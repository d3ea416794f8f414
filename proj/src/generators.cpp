#include "gshape/generators.hpp"

#include "gshape/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

namespace gshape {

namespace {

int exact_log2(std::uint64_t v, const char* what) {
  if (v == 0 || !std::has_single_bit(v)) throw Error(std::string(what) + " must be a power of two");
  return std::countr_zero(v);
}

}  // namespace

std::vector<std::uint64_t> brgc(int bits) {
  if (bits < 0 || bits > 30) throw Error("brgc: width out of range");
  std::vector<std::uint64_t> out(std::size_t{1} << bits);
  for (std::uint64_t n = 0; n < out.size(); ++n) out[n] = n ^ (n >> 1);
  return out;
}

BitLabeling natural_labeling(int num_points) {
  const int bits = exact_log2(static_cast<std::uint64_t>(num_points), "M");
  std::vector<std::uint64_t> codes(static_cast<std::size_t>(num_points));
  for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = i;
  return BitLabeling(std::move(codes), bits);
}

Labeled cartesian_bpsk(int dims) {
  if (dims < 1 || dims > 20) throw Error("cartesian_bpsk: N must be in [1, 20]");
  const int m_points = 1 << dims;
  const double a = 1.0 / std::numbers::sqrt2;
  Points p(m_points, dims);
  for (int i = 0; i < m_points; ++i) {
    for (int d = 0; d < dims; ++d) p(i, d) = ((i >> (dims - 1 - d)) & 1) ? -a : a;
  }
  return {Constellation(normalize_power(p), std::to_string(dims) + "D-BPSK"), natural_labeling(m_points)};
}

Labeled qam(int num_points) {
  const int bits = exact_log2(static_cast<std::uint64_t>(num_points), "QAM order");
  if (bits % 2 != 0) throw Error("qam: M must be a power of 4");
  const int axis_bits = bits / 2;
  const int side = 1 << axis_bits;
  const auto gray = brgc(axis_bits);
  Points p(num_points, 2);
  std::vector<std::uint64_t> codes(static_cast<std::size_t>(num_points));
  for (int ii = 0; ii < side; ++ii) {
    for (int iq = 0; iq < side; ++iq) {
      const int idx = ii * side + iq;
      p(idx, 0) = 2.0 * ii - side + 1;
      p(idx, 1) = 2.0 * iq - side + 1;
      codes[static_cast<std::size_t>(idx)] = (gray[static_cast<std::size_t>(ii)] << axis_bits) |
                                             gray[static_cast<std::size_t>(iq)];
    }
  }
  return {Constellation::normalized(p, std::to_string(num_points) + "QAM"), BitLabeling(std::move(codes), bits)};
}

Labeled apsk_two_ring(int p1, int p2, double radius_ratio, double phase_offset) {
  if (p1 < 1 || p2 < 1) throw Error("apsk_two_ring: ring sizes must be positive");
  if (!(radius_ratio > 0.0) || !std::isfinite(radius_ratio)) throw Error("apsk_two_ring: radius_ratio must be positive");
  const int total = p1 + p2;
  const int bits = exact_log2(static_cast<std::uint64_t>(total), "p1 + p2");
  if (phase_offset < 0.0) phase_offset = std::numbers::pi / p2;
  Points p(total, 2);
  for (int k = 0; k < p1; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / p1;
    p(k, 0) = std::cos(phi);
    p(k, 1) = std::sin(phi);
  }
  for (int k = 0; k < p2; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / p2 + phase_offset;
    p(p1 + k, 0) = radius_ratio * std::cos(phi);
    p(p1 + k, 1) = radius_ratio * std::sin(phi);
  }
  const std::string name = std::to_string(p1) + "+" + std::to_string(p2) + "-APSK";
  return {Constellation::normalized(p, name), BitLabeling(brgc(bits), bits)};
}

Labeled cartesian_product(const Labeled& a, const Labeled& b) {
  const int ma = a.constellation.num_points();
  const int mb = b.constellation.num_points();
  const int na = a.constellation.dims();
  const int nb = b.constellation.dims();
  const int bits_b = b.labeling.bits();
  if (a.labeling.num_labels() != ma || b.labeling.num_labels() != mb) {
    throw Error("cartesian_product: labeling sizes do not match");
  }
  if (a.labeling.bits() + bits_b > 62) throw Error("cartesian_product: label too wide");
  const std::int64_t total = static_cast<std::int64_t>(ma) * mb;
  if (total > (1 << 24)) throw Error("cartesian_product: product too large");
  Points p(total, na + nb);
  std::vector<std::uint64_t> codes(static_cast<std::size_t>(total));
  for (int i = 0; i < ma; ++i) {
    for (int j = 0; j < mb; ++j) {
      const Eigen::Index idx = static_cast<Eigen::Index>(i) * mb + j;
      p.row(idx).head(na) = a.constellation.points().row(i);
      p.row(idx).tail(nb) = b.constellation.points().row(j);
      codes[static_cast<std::size_t>(idx)] = (a.labeling.code(i) << bits_b) | b.labeling.code(j);
    }
  }
  std::string name = a.constellation.name() + "x" + b.constellation.name();
  return {Constellation::normalized(p, std::move(name)), BitLabeling(std::move(codes), a.labeling.bits() + bits_b)};
}

Labeled sp_bpsk_12d() {
  constexpr int kDims = 12;
  const Labeled full = cartesian_bpsk(kDims);
  Points p(1 << (kDims - 1), kDims);
  std::vector<std::uint64_t> codes;
  codes.reserve(1 << (kDims - 1));
  Eigen::Index row = 0;
  for (int i = 0; i < full.constellation.num_points(); ++i) {
    const std::uint64_t signs = full.labeling.code(i);
    // SP label: first 11 sign bits, then the parity of all 12 sign bits
    // (even parity over the first 11 label bits plus the kept bit).
    const int parity = std::popcount(signs) & 1;
    if (parity != 1) continue;
    p.row(row++) = full.constellation.points().row(i);
    codes.push_back(signs >> 1);
  }
  return {Constellation::normalized(p, "SP-12D-BPSK"), BitLabeling(std::move(codes), kDims - 1)};
}

Constellation random_constellation(int num_points, int dims, std::uint64_t seed) {
  if (num_points < 2) throw Error("random_constellation: M must be >= 2");
  if (dims < 1) throw Error("random_constellation: N must be positive");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    Points p(num_points, dims);
    for (int i = 0; i < num_points; ++i) {
      for (int d = 0; d < dims; ++d) p(i, d) = rng.normal();
    }
    Constellation c = Constellation::normalized(p, "random-" + std::to_string(num_points) + "-" +
                                                       std::to_string(dims) + "D");
    if (validate(c).empty()) return c;
    if (attempt > 100) throw Error("random_constellation: could not draw distinct points");
  }
}

}  // namespace gshape
