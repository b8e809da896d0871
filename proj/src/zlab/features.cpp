#include "zlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zlab/error.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

constexpr std::array<const char*, kStatCount> kStatNames = {
    "mean", "median", "variance", "std_dev", "mad", "iqr",
    "power", "energy", "peak_to_peak", "autocorrelation", "kurtosis", "skewness",
};

double sorted_median(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Linear interpolation between closest ranks at position (n-1)p.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
  static const auto names = [] {
    std::array<std::string, kFeatureCount> n;
    for (std::size_t i = 0; i < kStatCount; ++i) {
      n[i] = std::string("accel_") + kStatNames[i];
      n[kStatCount + i] = std::string("gyro_") + kStatNames[i];
    }
    return n;
  }();
  return names;
}

std::string_view feature_conventions() {
  return "magnitude=euclidean-raw;variance=sample-n-1;median=mid-average;mad=median-abs-dev;"
         "iqr=linear-closest-ranks;power=mean-square;energy=sum-square;autocorr=lag1-normalized;"
         "kurtosis=adjusted-excess-min4;skewness=adjusted-fisher-pearson-min3;degenerate=0";
}

StatBlock compute_stats(std::span<const double> m) {
  StatBlock out{};
  const std::size_t n = m.size();
  if (n == 0) return out;
  const double nd = static_cast<double>(n);

  std::vector<double> sorted(m.begin(), m.end());
  std::sort(sorted.begin(), sorted.end());

  double sum = 0.0;
  double energy = 0.0;
  for (double x : m) {
    sum += x;
    energy += x * x;
  }
  const double mean = sum / nd;
  const double median = sorted_median(sorted);
  const double ptp = sorted.back() - sorted.front();

  out[static_cast<std::size_t>(Stat::Mean)] = mean;
  out[static_cast<std::size_t>(Stat::Median)] = median;
  out[static_cast<std::size_t>(Stat::Energy)] = energy;
  out[static_cast<std::size_t>(Stat::Power)] = energy / nd;
  out[static_cast<std::size_t>(Stat::PeakToPeak)] = ptp;
  // A constant signal has no spread and no defined shape statistics.
  if (ptp == 0.0) return out;

  double s2 = 0.0, s3 = 0.0, s4 = 0.0, lag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = m[i] - mean;
    const double d2 = d * d;
    s2 += d2;
    s3 += d2 * d;
    s4 += d2 * d2;
    if (i + 1 < n) lag += d * (m[i + 1] - mean);
  }
  const double variance = s2 / (nd - 1.0);
  out[static_cast<std::size_t>(Stat::Variance)] = variance;
  out[static_cast<std::size_t>(Stat::StdDev)] = std::sqrt(variance);

  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(sorted[i] - median);
  std::sort(dev.begin(), dev.end());
  out[static_cast<std::size_t>(Stat::Mad)] = sorted_median(dev);
  out[static_cast<std::size_t>(Stat::Iqr)] = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);

  if (s2 > 0.0) {
    out[static_cast<std::size_t>(Stat::Autocorrelation)] = lag / s2;
    const double m2 = s2 / nd;
    if (n >= 3) {
      const double g1 = (s3 / nd) / std::pow(m2, 1.5);
      out[static_cast<std::size_t>(Stat::Skewness)] = g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
    }
    if (n >= 4) {
      const double g2 = (s4 / nd) / (m2 * m2) - 3.0;
      out[static_cast<std::size_t>(Stat::Kurtosis)] =
          ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
    }
  }
  return out;
}

std::vector<Segment> segment(const SensorTrace& trace, const std::vector<Interaction>& seq,
                             const SegmentOptions& opts) {
  validate(opts.sampling);
  const auto& samples = trace.samples;
  std::vector<double> accel(samples.size());
  std::vector<double> gyro(samples.size());
  Vec3 gravity = samples.empty() ? Vec3{} : samples.front().accel;
  const double a = opts.lowpass_alpha;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (opts.lowpass_gravity) {
      gravity = {a * gravity.x + (1 - a) * s.accel.x, a * gravity.y + (1 - a) * s.accel.y,
                 a * gravity.z + (1 - a) * s.accel.z};
      accel[i] = Vec3{s.accel.x - gravity.x, s.accel.y - gravity.y, s.accel.z - gravity.z}.norm();
    } else {
      accel[i] = s.accel.norm();
    }
    gyro[i] = s.gyro.norm();
  }

  auto by_time = [](const SensorSample& s, Millis t) { return s.t < t; };
  std::vector<Segment> out;
  out.reserve(seq.size());
  for (const auto& inter : seq) {
    Segment seg;
    seg.interaction = inter;
    const auto lo = std::lower_bound(samples.begin(), samples.end(), inter.start, by_time);
    const auto hi = std::upper_bound(samples.begin(), samples.end(), inter.end,
                                     [](Millis t, const SensorSample& s) { return t < s.t; });
    const auto first = static_cast<std::size_t>(lo - samples.begin());
    const auto last = static_cast<std::size_t>(hi - samples.begin());
    if (first < last) {
      seg.accel_mag.assign(accel.begin() + static_cast<std::ptrdiff_t>(first),
                           accel.begin() + static_cast<std::ptrdiff_t>(last));
      seg.gyro_mag.assign(gyro.begin() + static_cast<std::ptrdiff_t>(first),
                          gyro.begin() + static_cast<std::ptrdiff_t>(last));
    }
    seg.sparse = std::min(seg.accel_mag.size(), seg.gyro_mag.size()) < static_cast<std::size_t>(opts.sampling.s_min);
    out.push_back(std::move(seg));
  }
  return out;
}

FeatureVector featurize(const Segment& seg) {
  FeatureVector fv;
  const auto a = compute_stats(seg.accel_mag);
  const auto g = compute_stats(seg.gyro_mag);
  std::copy(a.begin(), a.end(), fv.values.begin());
  std::copy(g.begin(), g.end(), fv.values.begin() + kStatCount);
  fv.sparse = seg.sparse;
  return fv;
}

std::string serialize_feature_matrix(const std::vector<FeatureRow>& rows) {
  std::string out = "#label";
  for (const auto& n : feature_names()) {
    out += ' ';
    out += n;
  }
  out += " sparse\n";
  for (const auto& r : rows) {
    out += interaction_token(r.label);
    for (double v : r.features.values) {
      out += ' ';
      textio::append_double(out, v);
    }
    out += r.features.sparse ? " 1\n" : " 0\n";
  }
  return out;
}

std::vector<FeatureRow> parse_feature_matrix(std::string_view text) {
  std::vector<FeatureRow> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto f = textio::split_spaces(line);
    if (f.size() != kFeatureCount + 2) {
      throw Error(ErrorKind::MalformedLine, "bad feature row on line " + std::to_string(line_no), line_no);
    }
    FeatureRow row;
    auto label = parse_interaction_token(f[0]);
    if (!label) throw Error(ErrorKind::MalformedLine, "bad label on line " + std::to_string(line_no), line_no);
    row.label = *label;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto v = textio::parse_double(f[i + 1]);
      if (!v) throw Error(ErrorKind::MalformedLine, "bad value on line " + std::to_string(line_no), line_no);
      row.features.values[i] = *v;
    }
    if (f.back() != "0" && f.back() != "1") {
      throw Error(ErrorKind::MalformedLine, "bad sparse flag on line " + std::to_string(line_no), line_no);
    }
    row.features.sparse = f.back() == "1";
    rows.push_back(row);
  }
  return rows;
}

}  // namespace zlab
