#include "fixtures.hpp"
#include "passivity/corpus.hpp"
#include "passivity/warp.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace passivity;

namespace {

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

WarpParams with_counts(int cp, int rp, int hf) {
  WarpParams p;
  p.r_cp = cp;
  p.r_rp = rp;
  p.r_hf = hf;
  return p;
}

}  // namespace

TEST_CASE("pole classes") {
  CHECK(classify_pole({-1, 10}, 100) == PoleClass::InBandComplex);
  CHECK(classify_pole({-5, 0}, 100) == PoleClass::Real);
  CHECK(classify_pole({-1, 91}, 100) == PoleClass::HighFrequency);
  CHECK(classify_pole({-95, 0}, 100) == PoleClass::HighFrequency);
  CHECK(classify_pole({-1, 90}, 100) == PoleClass::InBandComplex);
}

TEST_CASE("complex pole samples") {
  const Complex p[] = {{-1, 10}};
  const auto s = sorted(pole_samples(p, with_counts(1, 2, 5), 100));
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(9).epsilon(1e-15));
  CHECK(s[1] == 10.0);
  CHECK(s[2] == doctest::Approx(11).epsilon(1e-15));
}

TEST_CASE("real pole samples drop negative frequencies") {
  const Complex p[] = {{-5, 0}};
  const auto s = sorted(pole_samples(p, with_counts(1, 2, 5), 100));
  REQUIRE(s.size() == 3);
  // 5 tan(pi/6) = 5/sqrt(3), 5 tan(pi/3) = 5 sqrt(3).
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(5.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(5.0 * std::sqrt(3.0)).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(2.8867513).epsilon(1e-7));
  CHECK(s[2] == doctest::Approx(8.6602540).epsilon(1e-7));
}

TEST_CASE("high-Q poles are widened") {
  const Complex p[] = {{-0.001, 10}};
  const auto s = sorted(pole_samples(p, with_counts(1, 2, 5), 100));
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(9.95).epsilon(1e-14));
  CHECK(s[1] == 10.0);
  CHECK(s[2] == doctest::Approx(10.05).epsilon(1e-14));

  // Below Q_max nothing changes.
  const Complex q[] = {{-0.1, 10}};
  CHECK(sorted(pole_samples(q, with_counts(1, 2, 5), 100))[0] == doctest::Approx(9.9).epsilon(1e-14));
}

TEST_CASE("tail samples") {
  WarpParams p;
  const auto t = tail_samples(1.0, p);
  REQUIRE(t.size() == 5);
  CHECK(t[0] == 1.0);
  CHECK(t[1] == doctest::Approx(std::pow(10.0, 1.0 / 6.0)).epsilon(1e-15));
  CHECK(t[2] == doctest::Approx(std::pow(10.0, 1.0 / 3.0)).epsilon(1e-15));
  CHECK(t[3] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(std::isinf(t[4]));

  p.kappa = 2;
  const double w = 2 * std::numbers::pi * 1e9;
  const auto g = tail_samples(w, p);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == w);
  CHECK(g[1] == doctest::Approx(w * std::pow(10.0, 0.25)).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(w * std::sqrt(10.0)).epsilon(1e-15));
  CHECK(std::isinf(g[3]));
}

TEST_CASE("resolution") {
  CHECK(resolution(1.0, 10, 1e3) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(resolution(1.0, 10, kInfinity) == 0.0);
}

TEST_CASE("assembly merges near-zero candidates into zero") {
  const std::vector<double> cand{0, 1e-9, 1};
  const std::vector<double> tail{kInfinity};
  const auto cps = assemble_control_points(cand, tail, 1e-4);
  CHECK(cps.points == std::vector<double>{0, 1, kInfinity});
}

TEST_CASE("assembly keeps the smallest of a cluster and protects the tail") {
  const std::vector<double> cand{5.0, 5.00001, 5.00002, 9.99999};
  const std::vector<double> tail{10.0, 20.0, kInfinity};
  const auto cps = assemble_control_points(cand, tail, 1e-3);
  CHECK(cps.points == std::vector<double>{0, 5.0, 10.0, 20.0, kInfinity});
}

TEST_CASE("assembly with infinite rho keeps every distinct candidate") {
  std::mt19937_64 rng(9);
  const auto m = random_model(rng, 2, 10);
  WarpParams p;
  p.rho = kInfinity;
  std::vector<Complex> poles;
  for (const auto& t : m.terms) poles.push_back(t.pole);
  const auto cand = pole_samples(poles, p, m.omega_max);
  const auto tail = tail_samples(m.omega_max, p);
  std::set<double> distinct(cand.begin(), cand.end());
  distinct.insert(tail.begin(), tail.end());
  distinct.insert(0.0);
  const auto cps = build_control_points(m, p);
  CHECK(cps.points.size() == distinct.size());
}

TEST_CASE("assembly ignores candidate order") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> cand(200);
  for (auto& c : cand) c = u(rng);
  const std::vector<double> tail{10.0, 15.0, kInfinity};
  const auto reference = assemble_control_points(cand, tail, 0.05).points;
  for (int k = 0; k < 20; ++k) {
    std::shuffle(cand.begin(), cand.end(), rng);
    CHECK(assemble_control_points(cand, tail, 0.05).points == reference);
  }
}

TEST_CASE("warp and unwarp examples") {
  const WarpMap map(ControlPointSet{{0, 1, 2, kInfinity}});
  CHECK(map.warp(0.5) == 0.5);
  CHECK(map.warp(1.5) == 1.5);
  CHECK(map.warp(4.0) == 2.5);
  CHECK(map.warp(kInfinity) == 3.0);
  CHECK(map.unwarp(2.5) == 4.0);
  CHECK(std::isinf(map.unwarp(3.0)));
  for (int l = 0; l <= 3; ++l) {
    CHECK(map.unwarp(l) == map.points()[static_cast<std::size_t>(l)]);
    CHECK(map.warp(map.points()[static_cast<std::size_t>(l)]) == static_cast<double>(l));
  }
}

TEST_CASE("warp rejects malformed control points") {
  CHECK_THROWS(WarpMap(ControlPointSet{{0, kInfinity}}));
  CHECK_THROWS(WarpMap(ControlPointSet{{0, 2, 1, kInfinity}}));
  CHECK_THROWS(WarpMap(ControlPointSet{{1, 2, kInfinity}}));
}

TEST_CASE("round trip on a corpus model") {
  std::mt19937_64 rng(21);
  const auto m = random_model(rng, 1, 10);
  const WarpMap map(build_control_points(m, WarpParams{}));
  const auto& w = map.points();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> band(0, map.subband_count() - 1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int l = band(rng);
    const auto ul = static_cast<std::size_t>(l);
    const double hi = l == map.subband_count() - 1 ? 10.0 * w[ul] : w[ul + 1];
    const double omega = w[ul] + u(rng) * (hi - w[ul]);
    worst = std::max(worst, fixtures::rel_err(map.unwarp(map.warp(omega)), omega));
  }
  CHECK(worst <= 1e-12);
}
