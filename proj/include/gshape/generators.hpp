#pragma once

#include "gshape/model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gshape {

struct Labeled {
  Constellation constellation;
  BitLabeling labeling;
};

/// Binary-reflected Gray code: codes in order, adjacent entries differ in one bit.
std::vector<std::uint64_t> brgc(int bits);

/// All 2^N sign patterns of ±1/sqrt(2); bit k of point i is 1 iff coordinate k < 0.
Labeled cartesian_bpsk(int dims);

/// Square M-QAM (M a power of 4) with BRGC labels per axis (I bits, then Q bits).
Labeled qam(int num_points);

/// Two concentric rings with p1 inner and p2 outer points, outer radius
/// radius_ratio times the inner one, outer phases offset by phase_offset.
/// Labels are BRGC codes of the point index (inner ring first).
Labeled apsk_two_ring(int p1, int p2, double radius_ratio = 2.0, double phase_offset = -1.0);

/// Coordinates and labels concatenated, point index i_a · M_b + i_b, then normalised.
Labeled cartesian_product(const Labeled& a, const Labeled& b);

/// Single-parity-check subset of 12D BPSK: 2048 points with an odd number of
/// negative coordinates, labelled by their first 11 sign bits.
Labeled sp_bpsk_12d();

/// I.i.d. standard Gaussian coordinates, normalised; redrawn on collision.
Constellation random_constellation(int num_points, int dims, std::uint64_t seed);

/// Natural binary labels 0..M-1 (M must be a power of two).
BitLabeling natural_labeling(int num_points);

}  // namespace gshape
