#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "zlab/trace.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("zlab-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline zlab::SensorTrace synthetic_trace(std::size_t n, double rate_hz, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  zlab::SensorTrace tr;
  tr.nominal_rate_hz = rate_hz;
  const double step = 1000.0 / rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    zlab::SensorSample s;
    s.t = static_cast<zlab::Millis>(std::llround(static_cast<double>(i) * step));
    s.accel = {nd(rng), nd(rng), 9.81 + nd(rng)};
    s.gyro = {0.1 * nd(rng), 0.1 * nd(rng), 0.1 * nd(rng)};
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace testutil
