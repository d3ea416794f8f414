#include "gshape/air.hpp"
#include "gshape/generators.hpp"
#include "gshape/quadrature.hpp"
#include "gshape/rng.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace gshape;

namespace {

Constellation permuted(const Constellation& c, const std::vector<int>& perm) {
  Points p(c.num_points(), c.dims());
  for (int i = 0; i < c.num_points(); ++i) p.row(i) = c.points().row(perm[static_cast<std::size_t>(i)]);
  return Constellation(p, c.name());
}

BitLabeling permuted(const BitLabeling& lab, const std::vector<int>& perm) {
  std::vector<std::uint64_t> codes(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) codes[i] = lab.code(perm[i]);
  return BitLabeling(codes, lab.bits());
}

}  // namespace

TEST_CASE("mi_gh matches the brute-force oracle") {
  for (auto [m, dims, snr] : std::vector<std::tuple<int, int, double>>{{4, 2, 0.0}, {8, 2, 7.0}, {16, 3, 4.0}, {5, 1, 10.0}}) {
    const auto c = random_constellation(m, dims, 100 + m);
    const ChannelSpec ch(snr, dims);
    const double ref = oracle::mi_gh(c.points(), ch.sigma_d(), 8);
    CHECK(std::abs(mi_gh(c, ch, 8).value - ref) < 1e-11);
  }
}

TEST_CASE("gmi_gh matches the brute-force oracle") {
  const auto q = qam(16);
  const ChannelSpec ch(6.0, 2);
  CHECK(std::abs(gmi_gh(q.constellation, q.labeling, ch, 10).value -
                 oracle::gmi_gh(q.constellation.points(), q.labeling, ch.sigma_d(), 10)) < 1e-11);
  const auto r = random_constellation(8, 3, 4);
  const auto lab = natural_labeling(8);
  const ChannelSpec ch3(2.0, 3);
  CHECK(std::abs(gmi_gh(r, lab, ch3, 6).value - oracle::gmi_gh(r.points(), lab, ch3.sigma_d(), 6)) < 1e-11);
}

TEST_CASE("BPSK MI against a 1-D integral by the trapezoid rule") {
  // I = 1 - E log2(1 + exp(-2 y / s^2)) with y ~ N(a, s^2), a = 1/sqrt(2).
  const auto b = cartesian_bpsk(1);
  for (double snr : {-5.0, 0.0, 5.0}) {
    const ChannelSpec ch(snr, 1);
    const double s = ch.sigma_d();
    const double a = 1.0 / std::sqrt(2.0);
    double acc = 0.0;
    const double h = 1e-3;
    for (double z = -12.0; z <= 12.0; z += h) {
      const double y = a + s * z;
      const double f = std::log1p(std::exp(-2.0 * a * y / (s * s))) / std::log(2.0);
      acc += h * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * f;
    }
    CHECK(std::abs(mi_gh(b.constellation, ch, 64).value - (1.0 - acc)) < 1e-7);
  }
}

TEST_CASE("MI limits at very low and very high SNR") {
  const auto q = qam(16);
  CHECK(mi_gh(q.constellation, ChannelSpec(-30.0, 2), 10).value < 0.01);
  CHECK(mi_gh(q.constellation, ChannelSpec(40.0, 2), 10).value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(gmi_gh(q.constellation, q.labeling, ChannelSpec(40.0, 2), 10).value == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("single point gives zero MI") {
  Points p(1, 2);
  p << 1, 0;
  CHECK(std::abs(mi_gh(Constellation(p), ChannelSpec(5.0, 2), 10).value) < 1e-15);
}

TEST_CASE("GMI equals MI for Gray QPSK and GMI <= MI otherwise") {
  const auto q = cartesian_bpsk(2);
  for (double snr : {-2.0, 4.0, 12.0}) {
    const ChannelSpec ch(snr, 2);
    CHECK(std::abs(mi_gh(q.constellation, ch, 10).value - gmi_gh(q.constellation, q.labeling, ch, 10).value) < 1e-10);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = random_constellation(16, 4, seed);
    const ChannelSpec ch(4.0, 4);
    CHECK(gmi_gh(c, natural_labeling(16), ch, 6).value <= mi_gh(c, ch, 6).value + 1e-12);
  }
}

TEST_CASE("GMI is invariant to flipping a label bit everywhere") {
  const auto q = qam(16);
  std::vector<std::uint64_t> flipped = q.labeling.codes();
  for (auto& code : flipped) code ^= 0b0100;
  const ChannelSpec ch(5.0, 2);
  CHECK(std::abs(gmi_gh(q.constellation, q.labeling, ch, 10).value -
                 gmi_gh(q.constellation, BitLabeling(flipped, 4), ch, 10).value) < 1e-12);
}

TEST_CASE("estimators are bitwise invariant to point order") {
  const auto c = random_constellation(16, 4, 3);
  const auto lab = natural_labeling(16);
  const ChannelSpec ch(4.0, 4);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(5);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto pc = permuted(c, perm);
  const auto pl = permuted(lab, perm);
  CHECK(mi_gh(c, ch, 5).value == mi_gh(pc, ch, 5).value);
  CHECK(gmi_gh(c, lab, ch, 5).value == gmi_gh(pc, pl, ch, 5).value);
  CHECK(mi_mc(c, ch, 5000, 9).value == mi_mc(pc, ch, 5000, 9).value);
  const auto q = rq_sample(128, 4, 1);
  CHECK(mi_rq(c, ch, q).surrogate == mi_rq(pc, ch, q).surrogate);
  const std::vector<QuadratureSet> sets(4, q);
  CHECK(gmi_rq(c, lab, ch, sets).normalized.value == gmi_rq(pc, pl, ch, sets).normalized.value);
}

TEST_CASE("MI is invariant under rotation of the constellation") {
  const auto c = random_constellation(8, 2, 11);
  const ChannelSpec ch(3.0, 2);
  const Eigen::Matrix2d rot = Eigen::Rotation2Dd(0.7).toRotationMatrix();
  const Points r = c.points() * rot.transpose();
  CHECK(std::abs(mi_gh(c, ch, 20).value - mi_gh(Constellation(r), ch, 20).value) < 1e-6);
}

TEST_CASE("product constellation MI is additive") {
  const auto a = qam(4);
  const auto b = cartesian_bpsk(2);
  const auto p = cartesian_product(a, b);
  const ChannelSpec ch2(4.0, 2);
  const ChannelSpec ch4(4.0, 4);
  CHECK(std::abs(mi_gh(p.constellation, ch4, 10).value -
                 (mi_gh(a.constellation, ch2, 10).value + mi_gh(b.constellation, ch2, 10).value)) < 1e-9);
}

TEST_CASE("MC agrees with GH and reports a standard error") {
  const auto q = qam(16);
  const ChannelSpec ch(4.0, 2);
  const auto mc = mi_mc(q.constellation, ch, 200000, 3);
  REQUIRE(mc.std_error.has_value());
  CHECK(*mc.std_error > 0.0);
  CHECK(std::abs(mc.value - mi_gh(q.constellation, ch, 10).value) < 4.0 * *mc.std_error + 1e-3);
  const auto gmc = gmi_mc(q.constellation, q.labeling, ch, 200000, 3);
  CHECK(std::abs(gmc.value - gmi_gh(q.constellation, q.labeling, ch, 10).value) < 4.0 * *gmc.std_error + 1e-3);
  CHECK(mi_mc(q.constellation, ch, 10000, 3).value == mi_mc(q.constellation, ch, 10000, 3).value);
  CHECK_THROWS_AS(gmi_mc(q.constellation, q.labeling, ch, 999, 3), Error);
}

TEST_CASE("MC with independent standard-library noise") {
  // Same functional, noise from std::mt19937_64, evaluated by the oracle's log-ratio.
  const auto c = random_constellation(8, 2, 21);
  const ChannelSpec ch(2.0, 2);
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  const auto all = oracle::all_indices(8);
  const int draws = 80000;
  double acc = 0.0;
  for (int s = 0; s < draws; ++s) {
    const int i = s % 8;
    std::vector<long double> y = {c.points()(i, 0) + ch.sigma_d() * nd(gen), c.points()(i, 1) + ch.sigma_d() * nd(gen)};
    acc += static_cast<double>(oracle::log_ratio(c.points(), y, i, ch.sigma_d(), all));
  }
  const double mi = 3.0 - acc / draws;
  CHECK(std::abs(mi - mi_gh(c, ch, 10).value) < 0.01);
}

TEST_CASE("normalized RQ is close to GH on average") {
  const auto c = random_constellation(16, 4, 2);
  const ChannelSpec ch(4.0, 4);
  const double gh = mi_gh(c, ch, 10).value;
  double mean = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) mean += mi_rq(c, ch, rq_sample(128, 4, derive_seed(7, {s}))).normalized.value;
  mean /= 100;
  CHECK(std::abs(mean - gh) < 0.02);
}

TEST_CASE("RQ with a GH-consistent set reproduces GH") {
  // With the GH nodes and weights plugged in, the raw weighted node sum is the
  // GH sum itself, so the two deficits differ by exactly pi^(N/2).
  const auto c = random_constellation(8, 2, 5);
  const ChannelSpec ch(5.0, 2);
  const auto gh = gh_tensor(12, 2);
  QuadratureSet q = gh;
  q.kind = QuadratureKind::Rq;
  const auto r = mi_rq(c, ch, q);
  // surrogate = m - (1/M) sum w f; GH value = m - (1/(M pi)) sum W f.
  const double m = 3.0;
  const double deficit_rq = m - r.surrogate;
  const double deficit_gh = m - mi_gh(c, ch, 12).value;
  CHECK(deficit_rq / std::numbers::pi == doctest::Approx(deficit_gh).epsilon(1e-9));
}

TEST_CASE("RQ input validation") {
  const auto c = random_constellation(4, 2, 1);
  const ChannelSpec ch(4.0, 2);
  CHECK_THROWS_AS(mi_rq(c, ch, gh_tensor(3, 2)), Error);
  CHECK_THROWS_AS(mi_rq(c, ch, rq_sample(16, 3, 1)), Error);
  const std::vector<QuadratureSet> uneven = {rq_sample(16, 2, 1), rq_sample(32, 2, 1)};
  CHECK_THROWS_AS(gmi_rq(c, natural_labeling(4), ch, uneven), Error);
  const std::vector<QuadratureSet> one = {rq_sample(16, 2, 1)};
  CHECK_THROWS_AS(gmi_rq(c, natural_labeling(4), ch, one), Error);
}

TEST_CASE("EstimatorSpec tokens") {
  auto gh = EstimatorSpec::parse("gh:7");
  CHECK(gh.kind == EstimatorKind::GaussHermite);
  CHECK(gh.gh_points == 7);
  auto mc = EstimatorSpec::parse("mc:5000:3");
  CHECK(mc.kind == EstimatorKind::MonteCarlo);
  CHECK(mc.samples == 5000);
  CHECK(mc.seed == 3);
  auto rq = EstimatorSpec::parse("rq:128:4:10");
  CHECK(rq.kind == EstimatorKind::RandomisedQuadrature);
  CHECK(rq.quadrature_count == 128);
  CHECK(rq.rotations == 10);
  CHECK(EstimatorSpec::parse(rq.to_string()).to_string() == rq.to_string());
  CHECK_THROWS_AS(EstimatorSpec::parse("gh"), Error);
  CHECK_THROWS_AS(EstimatorSpec::parse("mc:abc"), Error);
  CHECK_THROWS_AS(EstimatorSpec::parse("xx:1"), Error);
  CHECK(parse_metric("gmi") == Metric::GMI);
  CHECK_THROWS_AS(parse_metric("air"), Error);
}

TEST_CASE("estimate_air dispatch") {
  const auto q = qam(16);
  const ChannelSpec ch(4.0, 2);
  const double gh = estimate_air(q.constellation, &q.labeling, Metric::GMI, ch, EstimatorSpec::parse("gh:10")).value;
  CHECK(gh == gmi_gh(q.constellation, q.labeling, ch, 10).value);
  const auto rq = estimate_air(q.constellation, &q.labeling, Metric::GMI, ch, EstimatorSpec::parse("rq:512:1:8"));
  CHECK(std::abs(rq.value - gh) < 0.05);
  CHECK_THROWS_AS(estimate_air(q.constellation, nullptr, Metric::GMI, ch, EstimatorSpec{}), Error);
}

TEST_CASE("coding metrics") {
  AirEstimate a;
  a.value = 3.2;
  a.dims = 2;
  const auto m = coding_metrics(a, 4);
  CHECK(m.ngmi == doctest::Approx(0.8));
  CHECK(m.max_overhead == doctest::Approx(0.25));
  CHECK(rate_for_overhead(0.2) == doctest::Approx(1.0 / 1.2));
  CHECK(capacity_per_2d(0.0) == doctest::Approx(1.0));
}
