#include "zlab/auth.hpp"

#include <algorithm>
#include <cmath>

#include "zlab/error.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {
constexpr double kEps = 1e-9;
}

void validate(const AuthParams& p) {
  if (p.w < 1) throw Error(ErrorKind::InvalidArgument, "w must be >= 1");
  if (!(p.m > 0.0 && p.m <= 1.0)) throw Error(ErrorKind::InvalidArgument, "m must be in (0, 1]");
  if (p.g < 1) throw Error(ErrorKind::InvalidArgument, "g must be >= 1");
  if (!(p.f >= 0.0 && p.f < 1.0)) throw Error(ErrorKind::InvalidArgument, "f must be in [0, 1)");
}

std::size_t window_stride(const AuthParams& p) {
  const double s = std::round(static_cast<double>(p.w) * (1.0 - p.f));
  return static_cast<std::size_t>(std::max(1.0, s));
}

bool window_passes(std::size_t matches, std::size_t w, double m, bool strict) {
  // Compare counts against m*w with a small tolerance so 12/20 at 0.6 lands on
  // the boundary rather than on either side of it by rounding.
  const double need = m * static_cast<double>(w);
  const double got = static_cast<double>(matches);
  return strict ? got > need + kEps : got >= need - kEps;
}

WindowOutcome compare_window(std::span<const InteractionKind> actual, std::span<const InteractionKind> predicted,
                             double m, bool strict) {
  if (actual.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "window lengths differ");
  if (actual.empty()) throw Error(ErrorKind::EmptySequence, "empty window");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) matches += actual[i] == predicted[i] ? 1 : 0;
  return window_passes(matches, actual.size(), m, strict) ? WindowOutcome::Pass : WindowOutcome::Fail;
}

std::vector<WindowOutcome> SessionVerdict::outcomes() const {
  std::vector<WindowOutcome> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.outcome);
  return out;
}

std::optional<std::size_t> first_deauth(std::span<const WindowOutcome> outcomes, int g) {
  int run = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    run = outcomes[i] == WindowOutcome::Fail ? run + 1 : 0;
    if (run >= g) return i + 1;
  }
  return std::nullopt;
}

SessionVerdict run_session(const std::vector<Interaction>& actual, std::span<const InteractionKind> predicted,
                           const AuthParams& params, const WindowHooks& hooks) {
  validate(params);
  if (actual.size() != predicted.size()) {
    throw Error(ErrorKind::LengthMismatch, "actual and predicted sequences differ in length");
  }
  if (actual.empty()) throw Error(ErrorKind::EmptySequence, "no interactions to authenticate");

  const auto w = static_cast<std::size_t>(params.w);
  const std::size_t stride = window_stride(params);
  SessionVerdict v;
  int fail_run = 0;
  for (std::size_t first = 0; first + w <= actual.size(); first += stride) {
    const std::size_t last = first + w - 1;
    WindowRecord rec;
    rec.index = v.windows.size() + 1;
    rec.first = first;
    for (std::size_t i = first; i <= last; ++i) rec.matches += actual[i].kind == predicted[i] ? 1 : 0;
    rec.match_fraction = static_cast<double>(rec.matches) / static_cast<double>(w);
    rec.threshold = hooks.threshold ? hooks.threshold(first, last, params.m) : params.m;
    rec.start_ms = actual[first].start;
    rec.end_ms = actual[last].end;
    rec.forced_fail = hooks.force_fail && hooks.force_fail(first, last);
    const bool pass = !rec.forced_fail && window_passes(rec.matches, w, rec.threshold, params.strict_threshold);
    rec.outcome = pass ? WindowOutcome::Pass : WindowOutcome::Fail;
    v.windows.push_back(rec);

    fail_run = pass ? 0 : fail_run + 1;
    if (fail_run >= params.g) {
      v.deauth_window = rec.index;
      v.deauth_time_ms = rec.end_ms;
      break;
    }
  }
  v.windows_elapsed = v.windows.size();
  return v;
}

const char* proximity_token(ProximityLevel level) {
  switch (level) {
    case ProximityLevel::Immediate: return "immediate";
    case ProximityLevel::Near: return "near";
    case ProximityLevel::Far: return "far";
  }
  return "?";
}

ProximityLevel proximity_level(double rssi_db, double reference_db) {
  if (!std::isfinite(rssi_db) || !std::isfinite(reference_db)) {
    throw Error(ErrorKind::InvalidArgument, "RSSI values must be finite");
  }
  const double delta = rssi_db - reference_db;
  if (delta >= -5.0) return ProximityLevel::Immediate;
  if (delta >= -15.0) return ProximityLevel::Near;
  return ProximityLevel::Far;
}

double escalate_threshold(double base_m, ProximityLevel level) {
  if (!(base_m > 0.0 && base_m <= 1.0)) throw Error(ErrorKind::InvalidArgument, "base m must be in (0, 1]");
  const double bump = level == ProximityLevel::Near ? 0.10 : level == ProximityLevel::Far ? 0.20 : 0.0;
  // Snap to a 1e-9 grid so 0.7 + 0.1 compares equal to 0.8.
  const double raised = std::round((base_m + bump) * 1e9) / 1e9;
  return std::max(base_m, std::min(1.0, raised));
}

BlacklistResult blacklist_offside_typing(const std::vector<Interaction>& actual, int run_threshold) {
  if (run_threshold < 1) throw Error(ErrorKind::InvalidArgument, "run threshold must be >= 1");
  int run = 0;
  for (const auto& it : actual) {
    run = it.kind == InteractionKind::Typing && it.offside ? run + 1 : 0;
    if (run >= run_threshold) return BlacklistResult::TriggerDeauth;
  }
  return BlacklistResult::Pass;
}

std::string format_verdict_report(const SessionVerdict& v, const AuthParams& p) {
  std::string out = "# w=" + std::to_string(p.w) + " m=" + textio::format_double(p.m) + " g=" + std::to_string(p.g) +
                    " f=" + textio::format_double(p.f) + (p.strict_threshold ? " strict" : " inclusive") + "\n";
  out += "# window first start_ms end_ms matches fraction threshold outcome\n";
  for (const auto& w : v.windows) {
    out += "window " + std::to_string(w.index) + " " + std::to_string(w.first) + " " + std::to_string(w.start_ms) + " " +
           std::to_string(w.end_ms) + " " + std::to_string(w.matches) + " ";
    textio::append_double(out, w.match_fraction);
    out += ' ';
    textio::append_double(out, w.threshold);
    out += w.outcome == WindowOutcome::Pass ? " PASS" : " FAIL";
    if (w.forced_fail) out += " forced";
    out += '\n';
  }
  out += "# minute windows_ended fails logged_in\n";
  if (!v.windows.empty()) {
    const Millis last_end = v.windows.back().end_ms;
    const Millis minutes = last_end / 60000 + 1;
    bool logged_in = true;
    std::size_t wi = 0;
    for (Millis minute = 0; minute < minutes; ++minute) {
      std::size_t ended = 0, fails = 0;
      while (wi < v.windows.size() && v.windows[wi].end_ms < (minute + 1) * 60000) {
        ++ended;
        fails += v.windows[wi].outcome == WindowOutcome::Fail ? 1 : 0;
        if (v.deauth_window && v.windows[wi].index == *v.deauth_window) logged_in = false;
        ++wi;
      }
      out += "minute " + std::to_string(minute) + " " + std::to_string(ended) + " " + std::to_string(fails) +
             (logged_in ? " 1\n" : " 0\n");
    }
  }
  out += "windows_elapsed " + std::to_string(v.windows_elapsed) + "\n";
  if (v.deauth_window) {
    out += "deauth window " + std::to_string(*v.deauth_window) + " time_ms " + std::to_string(*v.deauth_time_ms) + "\n";
  } else {
    out += "deauth none\n";
  }
  return out;
}

}  // namespace zlab
