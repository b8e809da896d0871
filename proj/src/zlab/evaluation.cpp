#include "zlab/evaluation.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include "zlab/error.hpp"

namespace zlab {

const char* polarity_token(Polarity p) {
  switch (p) {
    case Polarity::Legit: return "legit";
    case Polarity::Wrong: return "wrong";
    case Polarity::Attacker: return "attacker";
  }
  return "?";
}

namespace {

WindowRates finish(WindowRates r, Polarity polarity) {
  if (r.windows > 0) {
    r.fail_fraction = static_cast<double>(r.fails) / static_cast<double>(r.windows);
    r.pass_fraction = static_cast<double>(r.passes) / static_cast<double>(r.windows);
  }
  r.rate = polarity == Polarity::Attacker ? r.pass_fraction : r.fail_fraction;
  return r;
}

}  // namespace

WindowRates window_rates(const std::vector<SessionVerdict>& verdicts, Polarity polarity) {
  if (verdicts.empty()) throw Error(ErrorKind::EmptyInput, "no verdicts");
  WindowRates r;
  for (const auto& v : verdicts) {
    for (const auto& w : v.windows) {
      ++r.windows;
      if (w.outcome == WindowOutcome::Pass) ++r.passes;
      else ++r.fails;
    }
  }
  return finish(r, polarity);
}

std::vector<int> default_window_sizes() {
  std::vector<int> ws;
  for (int w = 5; w <= 30; ++w) ws.push_back(w);
  return ws;
}

std::vector<double> default_thresholds() { return {0.5, 0.6, 0.7}; }

std::vector<GridCell> rate_grid(const std::vector<LabelledSession>& sessions, Polarity polarity,
                                const std::vector<int>& ws, const std::vector<double>& ms, double f, bool strict) {
  if (sessions.empty()) throw Error(ErrorKind::EmptyInput, "no sessions");
  std::vector<GridCell> grid;
  for (int w : ws) {
    for (double m : ms) {
      AuthParams p;
      p.w = w;
      p.m = m;
      p.g = INT_MAX;
      p.f = f;
      p.strict_threshold = strict;
      WindowRates r;
      for (const auto& s : sessions) {
        if (s.actual.size() < static_cast<std::size_t>(w)) continue;
        const auto v = run_session(s.actual, s.predicted, p);
        for (const auto& win : v.windows) {
          ++r.windows;
          if (win.outcome == WindowOutcome::Pass) ++r.passes;
          else ++r.fails;
        }
      }
      grid.push_back({w, m, finish(r, polarity)});
    }
  }
  return grid;
}

double mean_rate(const std::vector<GridCell>& grid) {
  if (grid.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : grid) s += c.rates.rate;
  return s / static_cast<double>(grid.size());
}

double survival_at(const std::vector<SessionVerdict>& verdicts, SurvivalAxis axis, double x) {
  if (verdicts.empty()) return 1.0;
  std::size_t alive = 0;
  for (const auto& v : verdicts) {
    if (!v.deauth_window) {
      ++alive;
      continue;
    }
    const double at = axis == SurvivalAxis::Windows ? static_cast<double>(*v.deauth_window)
                                                     : static_cast<double>(*v.deauth_time_ms) / 60000.0;
    if (at > x) ++alive;
  }
  return static_cast<double>(alive) / static_cast<double>(verdicts.size());
}

std::vector<SurvivalPoint> survival_curve(const std::vector<SessionVerdict>& verdicts, SurvivalAxis axis,
                                          double max_x, double step) {
  if (!(step > 0)) throw Error(ErrorKind::InvalidArgument, "survival step must be > 0");
  std::vector<SurvivalPoint> out;
  for (std::size_t i = 0;; ++i) {
    const double x = static_cast<double>(i) * step;
    if (x > max_x + 1e-12) break;
    out.push_back({x, survival_at(verdicts, axis, x)});
  }
  return out;
}

std::vector<double> deauth_windows_censored(const std::vector<SessionVerdict>& verdicts) {
  std::vector<double> out;
  out.reserve(verdicts.size());
  for (const auto& v : verdicts) {
    out.push_back(v.deauth_window ? static_cast<double>(*v.deauth_window)
                                  : static_cast<double>(v.windows_elapsed + 1));
  }
  return out;
}

StatsResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::LengthMismatch, "paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double diff = xs[i] - ys[i];
    if (diff != 0.0) d.push_back(diff);
  }
  const std::size_t n = d.size();
  if (n < 5) throw Error(ErrorKind::TooFewPairs, "fewer than 5 non-zero differences");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  StatsResult r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i) (d[i] > 0 ? r.w_plus : r.w_minus) += rank[i];
  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  const double diff = r.w_plus - mean;
  const double corrected = std::abs(diff) <= 0.5 ? 0.0 : diff - std::copysign(0.5, diff);
  r.z = var > 0 ? corrected / std::sqrt(var) : 0.0;
  r.p = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
  r.r = r.z / std::sqrt(nd);
  return r;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double ConfusionMatrix::accuracy() const {
  const auto t = total();
  if (t == 0) return 0.0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < k; ++i) diag += at(i, i);
  return static_cast<double>(diag) / static_cast<double>(t);
}

double ConfusionMatrix::precision(std::size_t c) const {
  std::size_t col = 0;
  for (std::size_t i = 0; i < k; ++i) col += at(i, c);
  return col == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(col);
}

double ConfusionMatrix::recall(std::size_t c) const {
  std::size_t row = 0;
  for (std::size_t j = 0; j < k; ++j) row += at(c, j);
  return row == 0 ? 0.0 : static_cast<double>(at(c, c)) / static_cast<double>(row);
}

ConfusionMatrix confusion_matrix(std::span<const InteractionKind> truth, std::span<const InteractionKind> predicted,
                                 std::size_t classes) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "truth and prediction lengths differ");
  ConfusionMatrix cm;
  cm.k = classes;
  cm.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t >= classes || p >= classes) throw Error(ErrorKind::InvalidArgument, "label outside the matrix classes");
    ++cm.counts[t * classes + p];
  }
  return cm;
}

std::vector<double> window_match_fractions(const std::vector<SessionVerdict>& verdicts) {
  std::vector<double> out;
  for (const auto& v : verdicts) {
    for (const auto& w : v.windows) out.push_back(w.match_fraction);
  }
  return out;
}

std::vector<RocPoint> roc_points(const std::vector<double>& legit, const std::vector<double>& attack) {
  if (legit.empty() || attack.empty()) throw Error(ErrorKind::EmptyInput, "ROC needs both legitimate and attacker windows");
  std::set<double, std::greater<>> thresholds(legit.begin(), legit.end());
  thresholds.insert(attack.begin(), attack.end());
  auto accepted = [](const std::vector<double>& v, double m) {
    std::size_t c = 0;
    for (double x : v) c += x >= m ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  std::vector<RocPoint> out;
  for (double m : thresholds) out.push_back({m, accepted(legit, m), accepted(attack, m)});
  return out;
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) s += "  ";
      s += cells[c];
      if (c + 1 < cells.size()) s.append(width[c] - cells[c].size(), ' ');
    }
    return s + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace zlab
