#include "zlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zlab/error.hpp"
#include "zlab/kvconfig.hpp"
#include "zlab/rng.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

enum class Activity { Rest, Typing, Scroll, Mouse, Mkkm, Upright };

struct Span {
  Millis start;
  Millis end;
  Activity activity;
};

struct Schedule {
  std::vector<TerminalEvent> events;
  std::vector<Span> spans;  // non-overlapping, sorted
  std::vector<Millis> keys;
  std::vector<Millis> scrolls;
  std::vector<Interaction> extra_truth;  // Idle and Upright tiles
};

KeySide dominant(Hand h) { return h == Hand::Right ? KeySide::Right : KeySide::Left; }

KeySide random_side(Rng& rng) {
  const double u = rng.uniform();
  return u < 0.4 ? KeySide::Left : u < 0.6 ? KeySide::Middle : KeySide::Right;
}

void tile(std::vector<Interaction>& out, InteractionKind kind, Millis from, Millis to, Millis len = 1000) {
  for (Millis s = from; s + len <= to; s += len) out.push_back({kind, s, s + len, false});
}

class Scheduler {
 public:
  Scheduler(const UserProfile& p, Millis duration, Rng& rng) : p_(p), duration_(duration), rng_(rng) {}

  Schedule run() {
    const Millis limit = duration_ - 2500;
    Millis t = 500;
    bool after_mouse = false;
    while (t + 3000 < limit) {
      const Millis kend = keyboard_bout(t, after_mouse, limit);
      if (p_.upright_probability > 0 && rng_.bernoulli(p_.upright_probability) && kend + 16000 < limit) {
        const Millis up_start = kend + rng_.range(800, 1500);
        const Millis up_end = up_start + rng_.range(6000, 12000);
        s_.spans.push_back({up_start, up_end, Activity::Upright});
        tile(s_.extra_truth, InteractionKind::Upright, up_start + 200, up_end - 200);
        t = up_end + rng_.range(800, 1500);
        after_mouse = false;
        continue;
      }
      const Millis b = kend + rng_.range(p_.mkkm_min_ms, p_.mkkm_max_ms);
      if (b + 2500 > limit) break;
      s_.spans.push_back({kend, b, Activity::Mkkm});
      const Millis mend = mouse_bout(b);
      const Millis next = mend + rng_.range(p_.mkkm_min_ms, p_.mkkm_max_ms);
      if (next + 2500 > limit) break;
      s_.spans.push_back({mend, next, Activity::Mkkm});
      t = next;
      after_mouse = true;
    }
    std::stable_sort(s_.events.begin(), s_.events.end(),
                     [](const TerminalEvent& a, const TerminalEvent& b) { return a.t < b.t; });
    std::sort(s_.spans.begin(), s_.spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
    return std::move(s_);
  }

 private:
  void key(Millis t, KeySide side) {
    s_.events.push_back({t, EventKind::KeyDown, side});
    s_.keys.push_back(t);
  }

  void mouse(Millis t, EventKind kind) {
    s_.events.push_back({t, kind, KeySide::NotApplicable});
    if (kind == EventKind::Scroll) s_.scrolls.push_back(t);
  }

  // Keys for one typing piece spanning exactly [s, s + d].
  void piece(Millis s, Millis d, KeySide first_side) {
    Millis k = s;
    key(k, first_side);
    while (true) {
      const Millis nk = k + rng_.range(90, 200);
      if (nk >= s + d) break;
      key(nk, random_side(rng_));
      k = nk;
    }
    key(s + d, random_side(rng_));
    ++emitted_;
  }

  // Returns the time of the last key.
  Millis keyboard_bout(Millis start, bool after_mouse, Millis limit) {
    const int pieces = static_cast<int>(rng_.range(2, 6));
    Millis s = start;
    Millis span_start = start;
    Millis last = start;
    const double mean = p_.typing_duration_mean_ms;
    for (int i = 0; i < pieces; ++i) {
      if (s + 1200 > limit) break;
      const bool ahead = static_cast<double>(emitted_) > p_.interaction_rate_per_s * static_cast<double>(s) / 1000.0 + 2;
      if (i > 0 && (ahead || rng_.bernoulli(p_.idle_pause_probability))) {
        s_.spans.push_back({span_start, last, Activity::Typing});
        const Millis resume = last + rng_.range(2000, 5000);
        tile(s_.extra_truth, InteractionKind::Idle, last + 200, resume - 200);
        s = resume;
        span_start = resume;
      }
      const double draw = rng_.uniform(0.8, 1.05) * mean;
      const Millis d = std::clamp<Millis>(std::llround(draw), 100, 990);
      const KeySide first = (i == 0 && after_mouse) ? (rng_.bernoulli(0.5) ? dominant(p_.bracelet_hand) : KeySide::Middle)
                                                    : random_side(rng_);
      piece(s, d, first);
      last = s + d;
      s = s + 1000 + rng_.range(20, 150);
    }
    if (rng_.bernoulli(p_.short_fragment_probability) && s + 1200 < limit) {
      const Millis d = rng_.range(30, 95);
      key(s, random_side(rng_));
      key(s + d, random_side(rng_));
      ++emitted_;
      last = s + d;
    }
    s_.spans.push_back({span_start, last, Activity::Typing});
    return last;
  }

  void moves(Millis from, Millis to) {
    for (Millis t = from + rng_.range(40, 80); t < to; t += rng_.range(40, 80)) {
      mouse(t, rng_.bernoulli(0.08) ? EventKind::MouseClick : EventKind::MouseMove);
    }
  }

  // Returns the time of the last mouse event.
  Millis mouse_bout(Millis b) {
    mouse(b, EventKind::MouseMove);
    Millis cursor = b;
    if (!rng_.bernoulli(p_.no_scroll_probability)) {
      const int bursts = static_cast<int>(rng_.range(1, 2));
      for (int i = 0; i < bursts; ++i) {
        const Millis bs = i == 0 ? b + rng_.range(0, 100) : cursor + 1000 + rng_.range(20, 250);
        moves(cursor, bs);
        if (cursor < bs) s_.spans.push_back({cursor, bs, Activity::Mouse});
        const int n = static_cast<int>(rng_.range(5, 12));
        Millis t = bs;
        mouse(t, EventKind::Scroll);
        for (int k = 1; k < n; ++k) {
          t += rng_.range(25, 45);
          mouse(t, EventKind::Scroll);
        }
        s_.spans.push_back({bs, t, Activity::Scroll});
        cursor = t;
        ++emitted_;
      }
      const Millis tail = cursor + rng_.range(150, 400);
      moves(cursor, tail);
      mouse(tail, EventKind::MouseMove);
      s_.spans.push_back({cursor, tail, Activity::Mouse});
      return tail;
    }
    const Millis tail = b + rng_.range(300, 900);
    moves(b, tail);
    mouse(tail, EventKind::MouseMove);
    s_.spans.push_back({b, tail, Activity::Mouse});
    return tail;
  }

  const UserProfile& p_;
  Millis duration_;
  Rng& rng_;
  Schedule s_;
  std::size_t emitted_ = 0;
};

struct Jitter {
  double typing, scrolling, mouse, mkkm, idle, upright, gyro;
  double phase;
};

Jitter draw_jitter(double spread, std::uint64_t seed) {
  Rng r(derive_seed(seed, 0x5157));
  auto f = [&] { return 1.0 + r.uniform(-spread, spread); };
  Jitter j;
  j.typing = f();
  j.scrolling = f();
  j.mouse = f();
  j.mkkm = f();
  j.idle = f();
  j.upright = f();
  j.gyro = f();
  j.phase = r.uniform(0.0, 2.0 * std::numbers::pi);
  return j;
}

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

SensorTrace synthesize(const Schedule& s, const UserProfile& p, Millis duration, Rng& rng, const Jitter& j) {
  const auto& sig = p.signature;
  constexpr double kGravity = 9.81;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double step = 1000.0 / p.sensor_rate_hz;

  std::vector<double> key_amp(s.keys.size());
  for (auto& a : key_amp) a = rng.uniform(sig.key_impulse_min, sig.key_impulse_max) * j.typing;

  SensorTrace trace;
  trace.nominal_rate_hz = p.sensor_rate_hz;
  std::size_t span_i = 0, key_lo = 0, scroll_lo = 0;
  for (std::size_t n = 0;; ++n) {
    const auto t = static_cast<Millis>(std::llround(static_cast<double>(n) * step));
    if (t > duration) break;
    const double ts = static_cast<double>(t) / 1000.0;
    while (span_i < s.spans.size() && s.spans[span_i].end < t) ++span_i;
    Activity act = Activity::Rest;
    const Span* span = nullptr;
    if (span_i < s.spans.size() && s.spans[span_i].start <= t) {
      span = &s.spans[span_i];
      act = span->activity;
    }

    double a = kGravity;
    double g = 0.0;
    switch (act) {
      case Activity::Rest:
        a += rng.normal(0.0, sig.idle.noise * j.idle);
        g = sig.idle.gyro_amplitude * j.idle + std::abs(rng.normal(0.0, 0.005));
        break;
      case Activity::Typing:
        a += sig.typing.amplitude * j.typing + rng.normal(0.0, sig.typing.noise * j.typing);
        g = sig.typing.gyro_amplitude * j.gyro + rng.normal(0.0, 0.05);
        break;
      case Activity::Scroll: {
        const double osc = std::sin(kTwoPi * static_cast<double>(t) / sig.scrolling.period_ms + j.phase);
        a += sig.scrolling.amplitude * j.scrolling + 0.05 * osc + rng.normal(0.0, sig.scrolling.noise);
        g = sig.scrolling.gyro_amplitude * j.scrolling + 0.04 * osc + rng.normal(0.0, 0.02);
        break;
      }
      case Activity::Mouse: {
        const double osc = std::sin(kTwoPi * static_cast<double>(t) / sig.mouse.period_ms + j.phase);
        a += sig.mouse.amplitude * j.mouse + 0.05 * osc + rng.normal(0.0, sig.mouse.noise * j.mouse);
        g = sig.mouse.gyro_amplitude * j.mouse + 0.1 * osc + rng.normal(0.0, 0.05);
        break;
      }
      case Activity::Mkkm: {
        // Sharp lift soon after the last event of the old device, then a
        // decaying glide towards the new one.
        const double peak = sig.mkkm.period_ms * j.mkkm;
        const double x = static_cast<double>(t - span->start) / peak;
        const double swell = x * std::exp(1.0 - x);
        a += 0.15 + sig.mkkm.amplitude * j.mkkm * swell + rng.normal(0.0, sig.mkkm.noise);
        g = 0.2 + sig.mkkm.gyro_amplitude * j.mkkm * swell + rng.normal(0.0, 0.05);
        break;
      }
      case Activity::Upright: {
        const double osc = std::sin(kTwoPi * static_cast<double>(t) / sig.upright.period_ms + j.phase);
        a += sig.upright.amplitude * j.upright * osc + rng.normal(0.0, sig.upright.noise);
        g = sig.upright.gyro_amplitude * j.upright + 0.35 * osc + rng.normal(0.0, 0.05);
        break;
      }
    }

    while (key_lo < s.keys.size() && s.keys[key_lo] + 150 < t) ++key_lo;
    for (std::size_t k = key_lo; k < s.keys.size() && s.keys[k] <= t; ++k) {
      const double e = key_amp[k] * std::exp(-static_cast<double>(t - s.keys[k]) / sig.typing.period_ms);
      a += e;
      g += 0.5 * e;
    }
    while (scroll_lo < s.scrolls.size() && s.scrolls[scroll_lo] + 60 < t) ++scroll_lo;
    for (std::size_t k = scroll_lo; k < s.scrolls.size() && s.scrolls[k] <= t; ++k) {
      const double e = 0.15 * j.scrolling * std::exp(-static_cast<double>(t - s.scrolls[k]) / 10.0);
      a += e;
      g += 0.6 * e;
    }
    a = std::abs(a);
    g = std::abs(g);

    // Slowly wandering wrist orientation spreads the magnitude over the axes.
    const double th_a = 0.35 + 0.15 * std::sin(kTwoPi * ts / 47.0 + j.phase);
    const double ph_a = 0.8 + 0.5 * std::sin(kTwoPi * ts / 61.0);
    const double th_g = 1.1 + 0.3 * std::sin(kTwoPi * ts / 29.0);
    const double ph_g = 2.0 + 0.7 * std::sin(kTwoPi * ts / 53.0 + j.phase);
    SensorSample smp;
    smp.t = t;
    smp.accel = {quantize(a * std::sin(th_a) * std::cos(ph_a)), quantize(a * std::sin(th_a) * std::sin(ph_a)),
                 quantize(a * std::cos(th_a))};
    smp.gyro = {quantize(g * std::sin(th_g) * std::cos(ph_g)), quantize(g * std::sin(th_g) * std::sin(ph_g)),
                quantize(g * std::cos(th_g))};
    trace.samples.push_back(smp);
  }
  return trace;
}

// ---- attack rendering -------------------------------------------------------

struct Intent {
  InteractionKind kind;
  Millis start;
  Millis end;
  bool to_keyboard = false;  // MKKM direction
};

bool mkkm_goes_to_keyboard(const EventLog& log, Millis end) {
  auto it = std::lower_bound(log.events.begin(), log.events.end(), end,
                             [](const TerminalEvent& e, Millis t) { return e.t < t; });
  for (; it != log.events.end() && it->t == end; ++it) {
    if (it->is_keyboard()) return true;
  }
  return false;
}

// Turns intents into terminal events whose extraction reproduces them when the
// intents are mutually consistent. MKKM endpoints are emitted first so that a
// typing key landing on the same instant does not replace the dominant-side key.
EventLog render(const std::vector<Intent>& intents, const ExtractorConfig& cfg, Rng& rng, const std::string& id) {
  std::vector<TerminalEvent> ev;
  for (const auto& in : intents) {
    if (in.kind != InteractionKind::MKKM) continue;
    const TerminalEvent key_end{in.end, EventKind::KeyDown, dominant(cfg.bracelet_hand)};
    if (in.to_keyboard) {
      ev.push_back({in.start, EventKind::MouseMove, KeySide::NotApplicable});
      ev.push_back(key_end);
    } else {
      ev.push_back({in.start, EventKind::KeyDown, KeySide::Middle});
      ev.push_back({in.end, EventKind::MouseMove, KeySide::NotApplicable});
    }
  }
  for (const auto& in : intents) {
    if (in.kind == InteractionKind::Typing) {
      Millis k = in.start;
      ev.push_back({k, EventKind::KeyDown, random_side(rng)});
      while (true) {
        const Millis nk = k + rng.range(80, 160);
        if (nk >= in.end) break;
        ev.push_back({nk, EventKind::KeyDown, random_side(rng)});
        k = nk;
      }
      if (in.end != in.start) ev.push_back({in.end, EventKind::KeyDown, random_side(rng)});
    } else if (in.kind == InteractionKind::Scrolling) {
      const Millis len = in.end - in.start;
      const int n = std::max<int>(cfg.min_scroll_events, static_cast<int>(len / 35) + 1);
      for (int i = 0; i < n; ++i) {
        const Millis t = in.start + len * i / (n - 1);
        ev.push_back({t, EventKind::Scroll, KeySide::NotApplicable});
      }
    }
  }
  std::stable_sort(ev.begin(), ev.end(), [](const TerminalEvent& a, const TerminalEvent& b) { return a.t < b.t; });
  std::vector<TerminalEvent> out;
  for (const auto& e : ev) {
    const bool dup = !out.empty() && out.back().t == e.t &&
                     (out.back().kind == e.kind || (out.back().is_keyboard() && e.is_keyboard()));
    if (!dup) out.push_back(e);
  }
  EventLog log;
  log.events = std::move(out);
  log.session_id = id;
  return log;
}

Millis draw_latency(Rng& rng, double median, double sigma) {
  return static_cast<Millis>(std::llround(rng.lognormal_median(median, sigma)));
}

// Indices of typing interactions to mimic: the longest `fraction` of them.
std::vector<bool> select_longest(const std::vector<Interaction>& seq, double fraction) {
  std::vector<std::size_t> typing;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].kind == InteractionKind::Typing) typing.push_back(i);
  }
  std::stable_sort(typing.begin(), typing.end(),
                   [&](std::size_t a, std::size_t b) { return seq[a].duration() > seq[b].duration(); });
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(typing.size())));
  std::vector<bool> chosen(seq.size(), false);
  for (std::size_t i = 0; i < std::min(keep, typing.size()); ++i) chosen[typing[i]] = true;
  return chosen;
}

// A typing episode is a stretch of typing pieces with no other interaction and
// no idle gap between them; a mimic keeps one reaction delay across it.
std::vector<std::size_t> typing_episodes(const std::vector<Interaction>& seq, const ExtractorConfig& cfg) {
  std::vector<std::size_t> ep(seq.size(), 0);
  std::size_t id = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const bool cont = i > 0 && seq[i].kind == InteractionKind::Typing && seq[i - 1].kind == InteractionKind::Typing &&
                      seq[i].start - seq[i - 1].end < cfg.idle_threshold_ms;
    if (!cont) ++id;
    ep[i] = id;
  }
  return ep;
}

std::vector<Intent> naive_all(const EventLog& log, const std::vector<Interaction>& seq, const AttackerProfile& a,
                              Rng& rng) {
  std::vector<Intent> out;
  for (const auto& it : seq) {
    const bool miss = rng.bernoulli(a.miss_probability);
    const Millis lat = draw_latency(rng, a.latency_median_ms, a.latency_sigma_log);
    const double scale = 1.0 + rng.uniform(-a.duration_jitter, a.duration_jitter);
    if (miss) continue;
    const Millis dur = std::max<Millis>(1, std::llround(static_cast<double>(it.duration()) * scale));
    Intent in{it.kind, it.start + lat, it.start + lat + dur};
    if (it.kind == InteractionKind::MKKM) in.to_keyboard = mkkm_goes_to_keyboard(log, it.end);
    out.push_back(in);
  }
  return out;
}

std::optional<Intent> mimic_typing(const Interaction& it, Millis lat, const AttackerProfile& a,
                                   const ExtractorConfig& cfg, Rng& rng) {
  const bool early = rng.bernoulli(a.early_stop_probability);
  const double frac = rng.uniform(0.5, 0.9);
  const Millis start = it.start + lat;
  Millis end = it.end;
  if (early) end = start + static_cast<Millis>(std::llround(static_cast<double>(end - start) * frac));
  if (end - start < cfg.min_duration_ms) return std::nullopt;
  return Intent{InteractionKind::Typing, start, end};
}

std::vector<Intent> opp_keyboard(const std::vector<Interaction>& seq, const AttackerProfile& a,
                                 const ExtractorConfig& cfg, Rng& rng, bool audio) {
  const auto chosen = select_longest(seq, a.mimic_fraction);
  const auto episodes = typing_episodes(seq, cfg);
  const double median = a.latency_median_ms * (audio ? a.audio_latency_factor : 1.0);
  std::vector<Intent> out;
  std::size_t current_ep = 0;
  Millis lat = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (episodes[i] != current_ep) {
      current_ep = episodes[i];
      lat = draw_latency(rng, median, a.latency_sigma_log);
    }
    if (!chosen[i]) continue;
    const bool detected = !audio || rng.bernoulli(a.detection_probability);
    const bool miss = rng.bernoulli(a.miss_probability);
    auto in = mimic_typing(seq[i], lat, a, cfg, rng);
    if (detected && !miss && in) out.push_back(*in);
  }
  return out;
}

std::vector<Intent> opp_all(const EventLog& log, const std::vector<Interaction>& seq, const AttackerProfile& a,
                            const ExtractorConfig& cfg, Rng& rng) {
  enum class State { Normal, FreeMouse, Blocked };
  const auto chosen = select_longest(seq, a.mimic_fraction);
  const auto episodes = typing_episodes(seq, cfg);
  State state = State::Normal;
  std::vector<Intent> out;
  std::size_t current_ep = 0;
  Millis lat = 0;
  Millis mouse_free_from = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& it = seq[i];
    if (episodes[i] != current_ep) {
      current_ep = episodes[i];
      lat = draw_latency(rng, a.latency_median_ms, a.latency_sigma_log);
    }
    switch (it.kind) {
      case InteractionKind::Typing: {
        if (state == State::FreeMouse) state = State::Normal;
        if (state != State::Normal || !chosen[i]) break;
        const bool miss = rng.bernoulli(a.miss_probability);
        auto in = mimic_typing(it, lat, a, cfg, rng);
        if (!miss && in) out.push_back(*in);
        break;
      }
      case InteractionKind::MKKM: {
        const Millis l = draw_latency(rng, a.latency_median_ms, a.latency_sigma_log);
        const bool miss = rng.bernoulli(a.miss_probability);
        const bool to_kb = mkkm_goes_to_keyboard(log, it.end);
        if (miss || l > a.mkkm_window_ms) {
          state = State::Blocked;
          break;
        }
        Intent in{InteractionKind::MKKM, it.start, it.end + l, to_kb};
        out.push_back(in);
        state = to_kb ? State::Normal : State::FreeMouse;
        mouse_free_from = in.end;
        break;
      }
      case InteractionKind::Scrolling: {
        if (state != State::FreeMouse) break;
        const Millis start = std::max(it.start, mouse_free_from + 1);
        if (it.end - start >= cfg.min_duration_ms) out.push_back({InteractionKind::Scrolling, start, it.end});
        break;
      }
      default: break;
    }
  }
  return out;
}

double get_num(const KvEntry& e) { return kv_double(e); }

}  // namespace

void validate(const UserProfile& p) {
  if (p.user_id.empty()) throw Error(ErrorKind::InvalidArgument, "user_id must not be empty");
  if (!(p.interaction_rate_per_s > 0)) throw Error(ErrorKind::InvalidArgument, "interaction rate must be > 0");
  if (!(p.typing_duration_mean_ms >= 25 && p.typing_duration_mean_ms <= 1000)) {
    throw Error(ErrorKind::InvalidArgument, "typing duration mean must lie in [25, 1000] ms");
  }
  if (p.mkkm_min_ms < 25 || p.mkkm_max_ms < p.mkkm_min_ms || p.mkkm_max_ms > 5000) {
    throw Error(ErrorKind::InvalidArgument, "MKKM range must lie in [25, 5000] ms");
  }
  if (!(p.sensor_rate_hz > 0 && p.sensor_rate_hz <= 1000)) {
    throw Error(ErrorKind::InvalidArgument, "sensor rate must be in (0, 1000] Hz");
  }
  if (p.signature_jitter < 0 || p.signature_jitter >= 1) {
    throw Error(ErrorKind::InvalidArgument, "signature jitter must be in [0, 1)");
  }
}

SessionBundle generate_session(const UserProfile& profile, Millis duration_ms, std::uint64_t seed) {
  validate(profile);
  if (duration_ms < 10000) throw Error(ErrorKind::InvalidArgument, "session must last at least 10 s");
  Rng sched_rng(derive_seed(seed, 1));
  Scheduler sched(profile, duration_ms, sched_rng);
  Schedule s = sched.run();

  SessionBundle b;
  b.user_id = profile.user_id;
  b.duration_ms = duration_ms;
  b.seed = seed;
  b.events.events = std::move(s.events);
  b.events.session_id = profile.user_id;

  const auto jitter = draw_jitter(profile.signature_jitter, profile.jitter_seed != 0 ? profile.jitter_seed : seed);
  Rng sensor_rng(derive_seed(seed, 2));
  b.sensor = synthesize(s, profile, duration_ms, sensor_rng, jitter);

  ExtractorConfig cfg;
  cfg.bracelet_hand = profile.bracelet_hand;
  b.truth = extract_interactions(b.events, cfg);
  b.truth.insert(b.truth.end(), s.extra_truth.begin(), s.extra_truth.end());
  std::stable_sort(b.truth.begin(), b.truth.end(),
                   [](const Interaction& x, const Interaction& y) { return x.start < y.start; });
  return b;
}

TrainingSet generate_gaussian_features(std::size_t n_rows, std::uint64_t seed, double separation_sigmas) {
  Rng rng(derive_seed(seed, 0x6a55));
  TrainingSet out;
  out.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    TrainingRow r;
    const auto c = i % kBaseClassCount;
    r.label = static_cast<InteractionKind>(c);
    r.user_id = "gauss-" + std::to_string(i % 5);
    for (auto& v : r.features.values) v = rng.normal(separation_sigmas * static_cast<double>(c), 1.0);
    out.push_back(r);
  }
  return out;
}

void save_bundle(const SessionBundle& b, const std::filesystem::path& dir) {
  save_sensor_trace(b.sensor, dir / "sensor.txt");
  save_event_log(b.events, dir / "events.txt");
  save_interaction_sequence(b.truth, dir / "truth.txt");
  textio::write_file_atomic(dir / "meta.txt", serialize_kv({{"user_id", b.user_id},
                                                            {"duration_ms", std::to_string(b.duration_ms)},
                                                            {"seed", std::to_string(b.seed)}}));
}

SessionBundle load_bundle(const std::filesystem::path& dir) {
  for (const char* f : {"sensor.txt", "events.txt", "truth.txt", "meta.txt"}) {
    if (!std::filesystem::exists(dir / f)) throw Error(ErrorKind::MissingArtifact, "bundle " + (dir / f).string());
  }
  SessionBundle b;
  for (const auto& e : load_kv(dir / "meta.txt")) {
    if (e.key == "user_id") b.user_id = e.value;
    else if (e.key == "duration_ms") b.duration_ms = kv_int(e);
    else if (e.key == "seed") b.seed = kv_u64(e);
  }
  if (b.user_id.empty()) throw Error(ErrorKind::Config, "bundle meta has no user_id");
  b.sensor = load_sensor_trace(dir / "sensor.txt");
  b.events = load_event_log(dir / "events.txt");
  b.events.session_id = b.user_id;
  b.truth = load_interaction_sequence(dir / "truth.txt");
  return b;
}

const char* strategy_token(Strategy s) {
  switch (s) {
    case Strategy::NaiveAll: return "naive_all";
    case Strategy::OppKeyboard: return "opp_keyboard";
    case Strategy::OppAll: return "opp_all";
    case Strategy::AudioKeyboard: return "audio_keyboard";
  }
  return "?";
}

Strategy parse_strategy(std::string_view token) {
  for (Strategy s : {Strategy::NaiveAll, Strategy::OppKeyboard, Strategy::OppAll, Strategy::AudioKeyboard}) {
    if (token == strategy_token(s)) return s;
  }
  throw Error(ErrorKind::Config, "unknown strategy '" + std::string(token) + "'");
}

void validate(const AttackerProfile& p) {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Config, std::string(name) + " must be in [0, 1]");
  };
  if (!(p.latency_median_ms >= 0)) throw Error(ErrorKind::Config, "latency_median_ms must be >= 0");
  if (!(p.latency_sigma_log >= 0)) throw Error(ErrorKind::Config, "latency_sigma_log must be >= 0");
  prob(p.mimic_fraction, "mimic_fraction");
  prob(p.miss_probability, "miss_probability");
  prob(p.early_stop_probability, "early_stop_probability");
  prob(p.detection_probability, "detection_probability");
  if (!(p.duration_jitter >= 0 && p.duration_jitter < 1)) throw Error(ErrorKind::Config, "duration_jitter must be in [0, 1)");
  if (!(p.audio_latency_factor >= 1)) throw Error(ErrorKind::Config, "audio_latency_factor must be >= 1");
  if (p.mkkm_window_ms < 0) throw Error(ErrorKind::Config, "mkkm_window_ms must be >= 0");
}

AttackerProfile default_attacker(Strategy s) {
  AttackerProfile p;
  p.strategy = s;
  if (s == Strategy::NaiveAll) p.mimic_fraction = 1.0;
  return p;
}

AttackerProfile perfect_attacker() {
  AttackerProfile p;
  p.strategy = Strategy::NaiveAll;
  p.latency_median_ms = 0;
  p.latency_sigma_log = 0;
  p.mimic_fraction = 1;
  p.miss_probability = 0;
  p.early_stop_probability = 0;
  p.duration_jitter = 0;
  return p;
}

bool set_attacker_field(AttackerProfile& p, const std::string& field, const std::string& value) {
  const KvEntry e{field, value, 0};
  if (field == "strategy") p.strategy = parse_strategy(value);
  else if (field == "latency_median_ms") p.latency_median_ms = get_num(e);
  else if (field == "latency_sigma_log") p.latency_sigma_log = get_num(e);
  else if (field == "mimic_fraction") p.mimic_fraction = get_num(e);
  else if (field == "miss_probability") p.miss_probability = get_num(e);
  else if (field == "early_stop_probability") p.early_stop_probability = get_num(e);
  else if (field == "duration_jitter") p.duration_jitter = get_num(e);
  else if (field == "audio_latency_factor") p.audio_latency_factor = get_num(e);
  else if (field == "detection_probability") p.detection_probability = get_num(e);
  else if (field == "mkkm_window_ms") p.mkkm_window_ms = kv_int(e);
  else return false;
  return true;
}

AttackerProfile parse_attacker_profile(std::string_view text) {
  const auto kv = parse_kv(text);
  AttackerProfile p;
  for (const auto& e : kv) {
    if (e.key == "strategy") p = default_attacker(parse_strategy(e.value));
  }
  for (const auto& e : kv) {
    if (!set_attacker_field(p, e.key, e.value)) {
      throw Error(ErrorKind::Config, "line " + std::to_string(e.line) + ": unknown attacker field '" + e.key + "'",
                  e.line);
    }
  }
  validate(p);
  return p;
}

AttackerProfile load_attacker_profile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::MissingArtifact, "attacker-profile " + path.string());
  return parse_attacker_profile([&] {
    std::string text;
    for (const auto& l : textio::read_lines(path)) text += l + "\n";
    return text;
  }());
}

std::string serialize_attacker_profile(const AttackerProfile& p) {
  auto d = [](double v) { return textio::format_double(v); };
  return serialize_kv({{"strategy", strategy_token(p.strategy)},
                       {"latency_median_ms", d(p.latency_median_ms)},
                       {"latency_sigma_log", d(p.latency_sigma_log)},
                       {"mimic_fraction", d(p.mimic_fraction)},
                       {"miss_probability", d(p.miss_probability)},
                       {"early_stop_probability", d(p.early_stop_probability)},
                       {"duration_jitter", d(p.duration_jitter)},
                       {"audio_latency_factor", d(p.audio_latency_factor)},
                       {"detection_probability", d(p.detection_probability)},
                       {"mkkm_window_ms", std::to_string(p.mkkm_window_ms)}});
}

EventLog apply_attack(const SessionBundle& victim, const AttackerProfile& attacker, std::uint64_t seed,
                      const ExtractorConfig& cfg) {
  validate(attacker);
  const auto seq = extract_interactions(victim.events, cfg);
  Rng rng(derive_seed(seed, 0xa77ac));
  std::vector<Intent> intents;
  switch (attacker.strategy) {
    case Strategy::NaiveAll: intents = naive_all(victim.events, seq, attacker, rng); break;
    case Strategy::OppKeyboard: intents = opp_keyboard(seq, attacker, cfg, rng, false); break;
    case Strategy::AudioKeyboard: intents = opp_keyboard(seq, attacker, cfg, rng, true); break;
    case Strategy::OppAll: intents = opp_all(victim.events, seq, attacker, cfg, rng); break;
  }
  Rng render_rng(derive_seed(seed, 0x4e4d));
  return render(intents, cfg, render_rng, victim.user_id + "-attacker");
}

MismatchPair mismatch_pair(const SessionBundle& a, const SessionBundle& b, const ExtractorConfig& cfg) {
  if (a.user_id == b.user_id) throw Error(ErrorKind::SameUser, "mismatch pair needs two different users");
  MismatchPair p;
  p.actual = extract_interactions(a.events, cfg);
  p.sensor = b.sensor.samples.empty() ? b.sensor : shift_trace(b.sensor, -b.sensor.samples.front().t);
  p.actual_user = a.user_id;
  p.sensor_user = b.user_id;
  return p;
}

SessionBundle desync(const SessionBundle& bundle, Millis shift_ms) {
  if (shift_ms < 0) throw Error(ErrorKind::InvalidArgument, "desync shift must be >= 0");
  SessionBundle out = bundle;
  out.events = shift_events(bundle.events, shift_ms);
  return out;
}

}  // namespace zlab
