#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zlab/interactions.hpp"

namespace zlab {

struct AuthParams {
  int w = 20;                     // window size in interactions
  double m = 0.6;                 // matching threshold
  int g = 1;                      // consecutive failing windows before deauth
  double f = 0.0;                 // overlap fraction
  bool strict_threshold = false;  // require match fraction > m instead of >= m
};

void validate(const AuthParams& p);

// max(1, round(w * (1 - f)))
std::size_t window_stride(const AuthParams& p);

enum class WindowOutcome { Pass, Fail };

bool window_passes(std::size_t matches, std::size_t w, double m, bool strict = false);

WindowOutcome compare_window(std::span<const InteractionKind> actual, std::span<const InteractionKind> predicted,
                             double m, bool strict = false);

struct WindowRecord {
  std::size_t index = 0;  // 1-based
  std::size_t first = 0;  // interaction offsets covered: [first, first + w)
  std::size_t matches = 0;
  double match_fraction = 0.0;
  double threshold = 0.0;  // m actually applied to this window
  Millis start_ms = 0;
  Millis end_ms = 0;
  bool forced_fail = false;
  WindowOutcome outcome = WindowOutcome::Pass;

  bool operator==(const WindowRecord&) const = default;
};

struct SessionVerdict {
  std::vector<WindowRecord> windows;
  std::optional<std::size_t> deauth_window;
  std::optional<Millis> deauth_time_ms;
  std::size_t windows_elapsed = 0;

  std::vector<WindowOutcome> outcomes() const;
  bool operator==(const SessionVerdict&) const = default;
};

// Optional per-window adjustments. Both receive the window's [first, last]
// interaction offsets (inclusive).
struct WindowHooks {
  std::function<bool(std::size_t first, std::size_t last)> force_fail;
  std::function<double(std::size_t first, std::size_t last, double base_m)> threshold;
};

SessionVerdict run_session(const std::vector<Interaction>& actual, std::span<const InteractionKind> predicted,
                           const AuthParams& params, const WindowHooks& hooks = {});

// Grace-period state machine alone: 1-based index of the window completing the
// first run of g failures.
std::optional<std::size_t> first_deauth(std::span<const WindowOutcome> outcomes, int g);

enum class ProximityLevel { Immediate, Near, Far };

const char* proximity_token(ProximityLevel level);
ProximityLevel proximity_level(double rssi_db, double reference_db);
double escalate_threshold(double base_m, ProximityLevel level);

enum class BlacklistResult { Pass, TriggerDeauth };

BlacklistResult blacklist_offside_typing(const std::vector<Interaction>& actual, int run_threshold = 5);

// Per-window lines followed by a per-minute summary.
std::string format_verdict_report(const SessionVerdict& v, const AuthParams& p);

}  // namespace zlab
