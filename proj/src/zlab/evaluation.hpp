#pragma once

#include <span>
#include <string>
#include <vector>

#include "zlab/auth.hpp"

namespace zlab {

enum class Polarity { Legit, Wrong, Attacker };

const char* polarity_token(Polarity p);

struct WindowRates {
  std::size_t windows = 0;
  std::size_t fails = 0;
  std::size_t passes = 0;
  double fail_fraction = 0.0;
  double pass_fraction = 0.0;
  // FNR for Legit, TNR for Wrong (both the fail fraction), FPR for Attacker (pass fraction).
  double rate = 0.0;
};

WindowRates window_rates(const std::vector<SessionVerdict>& verdicts, Polarity polarity);

struct LabelledSession {
  std::vector<Interaction> actual;
  std::vector<InteractionKind> predicted;
};

struct GridCell {
  int w = 0;
  double m = 0.0;
  WindowRates rates;
};

std::vector<int> default_window_sizes();     // 5..30
std::vector<double> default_thresholds();    // 0.5, 0.6, 0.7

// Every full window of every session, with no early stop at deauthentication.
std::vector<GridCell> rate_grid(const std::vector<LabelledSession>& sessions, Polarity polarity,
                                const std::vector<int>& ws, const std::vector<double>& ms, double f = 0.0,
                                bool strict = false);

double mean_rate(const std::vector<GridCell>& grid);

enum class SurvivalAxis { Windows, Minutes };

struct SurvivalPoint {
  double x = 0.0;
  double fraction = 0.0;
};

// Fraction of sessions whose deauthentication lies strictly after x. Sessions
// never deauthenticated stay logged in for every x.
std::vector<SurvivalPoint> survival_curve(const std::vector<SessionVerdict>& verdicts, SurvivalAxis axis,
                                          double max_x, double step = 1.0);

double survival_at(const std::vector<SessionVerdict>& verdicts, SurvivalAxis axis, double x);

// Deauth window per session; a session that was never deauthenticated counts
// as windows_elapsed + 1.
std::vector<double> deauth_windows_censored(const std::vector<SessionVerdict>& verdicts);

struct StatsResult {
  double z = 0.0;
  double p = 1.0;
  double r = 0.0;
  std::size_t n = 0;  // pairs left after dropping zero differences
  double w_plus = 0.0;
  double w_minus = 0.0;
};

// Differences are xs - ys. Normal approximation with tie-corrected variance
// and continuity correction; two-sided p.
StatsResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys);

struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;  // row = truth, column = prediction

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
  std::size_t total() const;
  double accuracy() const;
  // 0 when the class never occurs in the respective margin.
  double precision(std::size_t c) const;
  double recall(std::size_t c) const;
};

ConfusionMatrix confusion_matrix(std::span<const InteractionKind> truth, std::span<const InteractionKind> predicted,
                                 std::size_t classes = kBaseClassCount);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;  // legitimate windows accepted
  double fpr = 0.0;  // attacker windows accepted
};

std::vector<double> window_match_fractions(const std::vector<SessionVerdict>& verdicts);

// One point per distinct threshold, highest threshold first.
std::vector<RocPoint> roc_points(const std::vector<double>& legit_fractions,
                                 const std::vector<double>& attack_fractions);

// Space-aligned text table.
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace zlab
