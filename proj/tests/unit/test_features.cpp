#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "zlab/features.hpp"

using namespace zlab;

namespace {

double stat(const StatBlock& b, Stat s) { return b[static_cast<std::size_t>(s)]; }

std::vector<double> random_magnitudes(std::mt19937_64& rng, std::size_t n) {
  std::lognormal_distribution<double> ln(2.0, 0.4);
  std::vector<double> v(n);
  for (auto& x : v) x = ln(rng);
  return v;
}

SensorTrace ramp_trace(Millis from, Millis to, Millis step) {
  SensorTrace tr;
  tr.nominal_rate_hz = 1000.0 / static_cast<double>(step);
  for (Millis t = from; t <= to; t += step) {
    tr.samples.push_back({t, {static_cast<double>(t), 0, 0}, {0, static_cast<double>(t) / 10.0, 0}});
  }
  return tr;
}

}  // namespace

TEST_CASE("constant signal conventions") {
  const std::vector<double> m{2, 2, 2, 2};
  const auto s = compute_stats(m);
  CHECK(stat(s, Stat::Mean) == 2.0);
  CHECK(stat(s, Stat::Variance) == 0.0);
  CHECK(stat(s, Stat::PeakToPeak) == 0.0);
  CHECK(stat(s, Stat::Skewness) == 0.0);
  CHECK(stat(s, Stat::Kurtosis) == 0.0);
  CHECK(stat(s, Stat::Autocorrelation) == 0.0);
  CHECK(stat(s, Stat::Energy) == 16.0);
  CHECK(stat(s, Stat::Power) == 4.0);
}

TEST_CASE("statistics of 1, 2, 3, 4") {
  const std::vector<double> m{1, 2, 3, 4};
  const auto s = compute_stats(m);
  CHECK(stat(s, Stat::Mean) == 2.5);
  CHECK(stat(s, Stat::Median) == 2.5);
  CHECK(stat(s, Stat::Variance) == doctest::Approx(5.0 / 3.0));
  CHECK(stat(s, Stat::Energy) == 30.0);
  CHECK(stat(s, Stat::Power) == 7.5);
  CHECK(stat(s, Stat::PeakToPeak) == 3.0);
  CHECK(stat(s, Stat::Iqr) == doctest::Approx(1.5));
  CHECK(stat(s, Stat::Mad) == 1.0);
  CHECK(stat(s, Stat::Skewness) == doctest::Approx(0.0));
}

TEST_CASE("short inputs fall back to zero for undefined moments") {
  CHECK(compute_stats(std::vector<double>{}) == StatBlock{});
  const auto one = compute_stats(std::vector<double>{3.0});
  CHECK(stat(one, Stat::Mean) == 3.0);
  CHECK(stat(one, Stat::Variance) == 0.0);
  const auto two = compute_stats(std::vector<double>{1.0, 3.0});
  CHECK(stat(two, Stat::Variance) == 2.0);
  CHECK(stat(two, Stat::Skewness) == 0.0);
  CHECK(stat(two, Stat::Kurtosis) == 0.0);
  const auto three = compute_stats(std::vector<double>{1.0, 2.0, 6.0});
  CHECK(stat(three, Stat::Skewness) != 0.0);
  CHECK(stat(three, Stat::Kurtosis) == 0.0);
}

TEST_CASE("200 random magnitudes match the statistics oracle") {
  std::mt19937_64 rng(200);
  const auto m = random_magnitudes(rng, 200);
  const auto got = compute_stats(m);
  const auto want = oracle::stats(m);
  for (std::size_t i = 0; i < kStatCount; ++i) {
    INFO("stat " << feature_names()[i]);
    CHECK(oracle::close(got[i], want.at(i)));
  }
}

TEST_CASE("random lengths 1..60 match the oracle") {
  std::mt19937_64 rng(17);
  for (std::size_t n = 1; n <= 60; ++n) {
    const auto m = random_magnitudes(rng, n);
    const auto got = compute_stats(m);
    const auto want = oracle::stats(m);
    for (std::size_t i = 0; i < kStatCount; ++i) {
      INFO("n=" << n << " stat " << feature_names()[i]);
      CHECK(oracle::close(got[i], want.at(i)));
    }
  }
}

TEST_CASE("scale covariance") {
  std::mt19937_64 rng(3);
  const auto m = random_magnitudes(rng, 64);
  for (double c : {0.5, 3.0, 17.25}) {
    std::vector<double> scaled(m);
    for (auto& x : scaled) x *= c;
    const auto a = compute_stats(m);
    const auto b = compute_stats(scaled);
    for (Stat s : {Stat::Mean, Stat::Median, Stat::StdDev, Stat::Mad, Stat::Iqr, Stat::PeakToPeak}) {
      CHECK(stat(b, s) == doctest::Approx(c * stat(a, s)).epsilon(1e-12));
    }
    for (Stat s : {Stat::Variance, Stat::Power, Stat::Energy}) {
      CHECK(stat(b, s) == doctest::Approx(c * c * stat(a, s)).epsilon(1e-12));
    }
    for (Stat s : {Stat::Autocorrelation, Stat::Skewness, Stat::Kurtosis}) {
      CHECK(stat(b, s) == doctest::Approx(stat(a, s)).epsilon(1e-9));
    }
  }
}

TEST_CASE("permutation invariance except autocorrelation") {
  std::mt19937_64 rng(4);
  auto m = random_magnitudes(rng, 50);
  const auto a = compute_stats(m);
  std::shuffle(m.begin(), m.end(), rng);
  const auto b = compute_stats(m);
  for (std::size_t i = 0; i < kStatCount; ++i) {
    if (i == static_cast<std::size_t>(Stat::Autocorrelation)) continue;
    CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
  }
}

TEST_CASE("energy equals power times length") {
  std::mt19937_64 rng(6);
  for (std::size_t n = 1; n < 40; ++n) {
    const auto m = random_magnitudes(rng, n);
    const auto s = compute_stats(m);
    CHECK(stat(s, Stat::Energy) == doctest::Approx(stat(s, Stat::Power) * static_cast<double>(n)).epsilon(1e-14));
  }
}

TEST_CASE("non-negative features stay non-negative") {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = compute_stats(random_magnitudes(rng, 1 + rng() % 80));
    for (Stat k : {Stat::Variance, Stat::StdDev, Stat::Mad, Stat::Iqr, Stat::Power, Stat::Energy, Stat::PeakToPeak}) {
      CHECK(stat(s, k) >= 0.0);
    }
    for (double v : s) CHECK(std::isfinite(v));
  }
}

TEST_CASE("segments use inclusive interval membership") {
  const auto tr = ramp_trace(0, 300, 50);
  const std::vector<Interaction> seq{{InteractionKind::Typing, 0, 100, false},
                                     {InteractionKind::Scrolling, 200, 300, false}};
  const auto segs = segment(tr, seq);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].accel_mag == std::vector<double>{0, 50, 100});
  CHECK(segs[1].accel_mag == std::vector<double>{200, 250, 300});
  CHECK_FALSE(segs[0].sparse);
}

TEST_CASE("magnitude is the Euclidean norm") {
  SensorTrace tr;
  tr.nominal_rate_hz = 200;
  tr.samples.push_back({0, {3, 4, 0}, {0, 0, 12}});
  tr.samples.push_back({5, {3, 4, 0}, {5, 0, 12}});
  const auto segs = segment(tr, {{InteractionKind::Typing, 0, 5, false}});
  CHECK(segs[0].accel_mag == std::vector<double>{5, 5});
  CHECK(segs[0].gyro_mag == std::vector<double>{12, 13});
}

TEST_CASE("a 25 ms event on a 25 Hz trace is sparse") {
  const auto tr = ramp_trace(0, 2000, 40);
  for (Millis start = 0; start < 200; start += 7) {
    const auto segs = segment(tr, {{InteractionKind::Typing, start, start + 25, false}});
    CHECK(segs[0].accel_mag.size() <= 1);
    CHECK(segs[0].sparse);
    CHECK(featurize(segs[0]).sparse);
  }
  const auto none = segment(tr, {{InteractionKind::Typing, 5000, 5100, false}});
  CHECK(none[0].accel_mag.empty());
  CHECK(none[0].sparse);
}

TEST_CASE("samples outside the interaction never influence its features") {
  const auto clean = ramp_trace(0, 2000, 5);
  auto poisoned = clean;
  const std::vector<Interaction> seq{{InteractionKind::Typing, 300, 700, false},
                                     {InteractionKind::MKKM, 900, 1400, false}};
  for (auto& s : poisoned.samples) {
    const bool inside = (s.t >= 300 && s.t <= 700) || (s.t >= 900 && s.t <= 1400);
    if (!inside) s.accel = s.gyro = {1e6, -1e6, 1e6};
  }
  const auto a = segment(clean, seq);
  const auto b = segment(poisoned, seq);
  for (std::size_t i = 0; i < seq.size(); ++i) CHECK(featurize(a[i]) == featurize(b[i]));
}

TEST_CASE("low-pass gravity removal is optional and off by default") {
  const auto tr = ramp_trace(0, 500, 5);
  const std::vector<Interaction> seq{{InteractionKind::Typing, 100, 400, false}};
  SegmentOptions lp;
  lp.lowpass_gravity = true;
  CHECK(segment(tr, seq)[0].accel_mag != segment(tr, seq, lp)[0].accel_mag);
  CHECK(segment(tr, seq)[0].gyro_mag == segment(tr, seq, lp)[0].gyro_mag);
}

TEST_CASE("feature matrix round trip") {
  std::mt19937_64 rng(12);
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 30; ++i) {
    FeatureRow r;
    r.label = static_cast<InteractionKind>(i % 5);
    for (auto& v : r.features.values) v = std::ldexp(static_cast<double>(rng() % 100000), -(static_cast<int>(rng() % 20)));
    r.features.sparse = i % 4 == 0;
    rows.push_back(r);
  }
  const auto text = serialize_feature_matrix(rows);
  const auto back = parse_feature_matrix(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].label == rows[i].label);
    CHECK(back[i].features == rows[i].features);
  }
}

TEST_CASE("feature names are fixed and distinct") {
  const auto& n = feature_names();
  CHECK(n[0] == "accel_mean");
  CHECK(n[11] == "accel_skewness");
  CHECK(n[12] == "gyro_mean");
  CHECK(n[23] == "gyro_skewness");
  CHECK(feature_index(true, Stat::Kurtosis) == 22);
}
