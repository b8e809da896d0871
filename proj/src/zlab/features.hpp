#pragma once

// Segmenter and feature extractor. Segments hold the accelerometer and
// gyroscope magnitude signals inside one interaction interval; features are
// twelve order/moment statistics per sensor.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zlab/interactions.hpp"
#include "zlab/trace.hpp"

namespace zlab {

struct Segment {
  Interaction interaction;
  std::vector<double> accel_mag;
  std::vector<double> gyro_mag;
  bool sparse = true;
};

struct SegmentOptions {
  SamplingSpec sampling;
  // Remove gravity with a first-order low-pass before taking magnitudes.
  bool lowpass_gravity = false;
  double lowpass_alpha = 0.8;
};

// Interval membership is inclusive on both ends.
std::vector<Segment> segment(const SensorTrace& trace, const std::vector<Interaction>& seq,
                             const SegmentOptions& opts = {});

enum class Stat {
  Mean,
  Median,
  Variance,
  StdDev,
  Mad,
  Iqr,
  Power,
  Energy,
  PeakToPeak,
  Autocorrelation,
  Kurtosis,
  Skewness,
};

inline constexpr std::size_t kStatCount = 12;
inline constexpr std::size_t kFeatureCount = 2 * kStatCount;

// Column index: accelerometer stats first, then gyroscope, each in Stat order.
constexpr std::size_t feature_index(bool gyro, Stat stat) {
  return (gyro ? kStatCount : 0) + static_cast<std::size_t>(stat);
}

using StatBlock = std::array<double, kStatCount>;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  bool sparse = false;

  double operator[](std::size_t i) const { return values[i]; }
  double get(bool gyro, Stat stat) const { return values[feature_index(gyro, stat)]; }
  bool operator==(const FeatureVector&) const = default;
};

const std::array<std::string, kFeatureCount>& feature_names();

// Conventions baked into the feature definitions; hashed into model files so
// a model is never applied to differently defined features.
std::string_view feature_conventions();

// Statistics of one magnitude signal. Undefined higher moments fall back to 0.
StatBlock compute_stats(std::span<const double> m);

FeatureVector featurize(const Segment& seg);

struct FeatureRow {
  InteractionKind label = InteractionKind::Typing;
  FeatureVector features;
};

// Line format: "LABEL f1 ... f24 sparse_flag".
std::string serialize_feature_matrix(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_feature_matrix(std::string_view text);

}  // namespace zlab
