#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "zlab/auth.hpp"
#include "zlab/error.hpp"

using namespace zlab;

namespace {

constexpr auto T = InteractionKind::Typing;
constexpr auto S = InteractionKind::Scrolling;
constexpr auto K = InteractionKind::MKKM;

std::vector<InteractionKind> with_matches(std::size_t n, std::size_t matches) {
  std::vector<InteractionKind> v(n, T);
  for (std::size_t i = matches; i < n; ++i) v[i] = S;
  return v;
}

std::vector<Interaction> timeline(std::size_t n, std::mt19937_64* rng = nullptr) {
  std::vector<Interaction> seq;
  Millis t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto kind = rng ? static_cast<InteractionKind>((*rng)() % 3) : T;
    const Millis dur = rng ? 30 + static_cast<Millis>((*rng)() % 900) : 500;
    seq.push_back({kind, t, t + dur, false});
    t += dur + (rng ? static_cast<Millis>((*rng)() % 2000) : 100);
  }
  return seq;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("thirteen of twenty passes, twelve is the boundary, eleven fails") {
  const std::vector<InteractionKind> actual(20, T);
  CHECK(compare_window(actual, with_matches(20, 13), 0.6) == WindowOutcome::Pass);
  CHECK(compare_window(actual, with_matches(20, 12), 0.6) == WindowOutcome::Pass);
  CHECK(compare_window(actual, with_matches(20, 11), 0.6) == WindowOutcome::Fail);
}

TEST_CASE("strict threshold only changes the exact boundary") {
  const std::vector<InteractionKind> actual(20, T);
  CHECK(compare_window(actual, with_matches(20, 12), 0.6, true) == WindowOutcome::Fail);
  CHECK(compare_window(actual, with_matches(20, 13), 0.6, true) == WindowOutcome::Pass);
  CHECK(compare_window(actual, with_matches(20, 11), 0.6, true) == WindowOutcome::Fail);
  for (std::size_t w = 1; w <= 30; ++w) {
    for (std::size_t k = 0; k <= w; ++k) {
      for (double m : {0.5, 0.6, 0.7, 1.0}) {
        const bool inclusive = window_passes(k, w, m);
        const bool strict = window_passes(k, w, m, true);
        const bool on_boundary = std::abs(static_cast<double>(k) - m * static_cast<double>(w)) < 1e-9;
        CHECK(inclusive == (strict || on_boundary));
      }
    }
  }
}

TEST_CASE("compare_window argument errors") {
  const std::vector<InteractionKind> a(3, T), b(4, T), none;
  CHECK(kind_of([&] { compare_window(a, b, 0.6); }) == ErrorKind::LengthMismatch);
  CHECK(kind_of([&] { compare_window(none, none, 0.6); }) == ErrorKind::EmptySequence);
  const auto seq = timeline(3);
  CHECK(kind_of([&] { run_session(seq, b, {}); }) == ErrorKind::LengthMismatch);
  CHECK(kind_of([&] { run_session({}, none, {}); }) == ErrorKind::EmptySequence);
  AuthParams bad;
  bad.f = 1.0;
  CHECK(kind_of([&] { run_session(seq, a, bad); }) == ErrorKind::InvalidArgument);
  bad = {};
  bad.m = 0.0;
  CHECK(kind_of([&] { run_session(seq, a, bad); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("window stride") {
  AuthParams p;
  p.w = 20;
  CHECK(window_stride(p) == 20);
  p.f = 0.5;
  CHECK(window_stride(p) == 10);
  p.w = 5;
  CHECK(window_stride(p) == 3);  // 2.5 rounds away from zero
  p.w = 1;
  p.f = 0.9;
  CHECK(window_stride(p) == 1);
}

TEST_CASE("session verdicts match the brute-force reference on every short stream") {
  // Exhaustive over all match-bit streams of length up to 12.
  for (int n = 1; n <= 12; ++n) {
    const auto seq = timeline(static_cast<std::size_t>(n));
    std::vector<Millis> ends;
    for (const auto& it : seq) ends.push_back(it.end);
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::vector<bool> match(static_cast<std::size_t>(n));
      std::vector<InteractionKind> pred(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        match[static_cast<std::size_t>(i)] = (bits >> i) & 1;
        pred[static_cast<std::size_t>(i)] = match[static_cast<std::size_t>(i)] ? T : K;
      }
      for (int w : {1, 2, 3, 5}) {
        if (w > n) continue;
        for (int g : {1, 2, 3}) {
          for (int f_tenths : {0, 5}) {
            for (int m_tenths : {5, 6, 7}) {
              AuthParams p{w, m_tenths / 10.0, g, f_tenths / 10.0, false};
              const auto got = run_session(seq, pred, p);
              const auto want = oracle::authenticate(match, ends, w, m_tenths, g, f_tenths);
              REQUIRE(got.windows_elapsed == want.windows_elapsed);
              REQUIRE(got.deauth_window == want.deauth_window);
              REQUIRE(got.deauth_time_ms == want.deauth_time);
              for (std::size_t k = 0; k < want.pass.size(); ++k) {
                REQUIRE((got.windows[k].outcome == WindowOutcome::Pass) == want.pass[k]);
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("random long sessions match the reference, strict and inclusive") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 300; ++rep) {
    const auto n = 20 + static_cast<std::size_t>(rng() % 400);
    const auto seq = timeline(n, &rng);
    std::vector<Millis> ends;
    std::vector<bool> match;
    std::vector<InteractionKind> pred;
    const double p_match = 0.4 + 0.6 * static_cast<double>(rng() % 100) / 100.0;
    for (const auto& it : seq) {
      ends.push_back(it.end);
      const bool ok = static_cast<double>(rng() % 1000) / 1000.0 < p_match;
      match.push_back(ok);
      pred.push_back(ok ? it.kind : static_cast<InteractionKind>((static_cast<int>(it.kind) + 1) % 3));
    }
    const int w = 5 + static_cast<int>(rng() % 26);
    const int g = 1 + static_cast<int>(rng() % 3);
    const int m_tenths = 5 + static_cast<int>(rng() % 3);
    const int f_tenths = std::array{0, 2, 4, 5, 6, 8}[rng() % 6];
    const bool strict = rng() % 2;
    const auto got = run_session(seq, pred, {w, m_tenths / 10.0, g, f_tenths / 10.0, strict});
    const auto want = oracle::authenticate(match, ends, w, m_tenths, g, f_tenths, strict);
    REQUIRE(got.windows_elapsed == want.windows_elapsed);
    REQUIRE(got.deauth_window == want.deauth_window);
    REQUIRE(got.deauth_time_ms == want.deauth_time);
  }
}

TEST_CASE("forced stream P F P F F deauthenticates at window five with g=2") {
  const auto seq = timeline(5);
  const std::vector<InteractionKind> pred(5, T);
  const std::vector<bool> pattern{true, false, true, false, false};
  WindowHooks hooks;
  hooks.force_fail = [&](std::size_t first, std::size_t) { return !pattern[first]; };
  const auto v = run_session(seq, pred, {1, 0.6, 2, 0.0, false}, hooks);
  CHECK(v.deauth_window == std::optional<std::size_t>{5});
  CHECK(v.deauth_time_ms == seq[4].end);
  CHECK(v.windows_elapsed == 5);
  CHECK(v.windows[1].forced_fail);
  CHECK(v.windows[1].match_fraction == 1.0);
}

TEST_CASE("window outcome streams agree with the reference grace-period machine") {
  for (int n = 1; n <= 12; ++n) {
    const auto seq = timeline(static_cast<std::size_t>(n));
    const std::vector<InteractionKind> pred(static_cast<std::size_t>(n), T);
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::vector<bool> pass(static_cast<std::size_t>(n));
      std::vector<WindowOutcome> outcomes;
      for (int i = 0; i < n; ++i) {
        pass[static_cast<std::size_t>(i)] = (bits >> i) & 1;
        outcomes.push_back(pass[static_cast<std::size_t>(i)] ? WindowOutcome::Pass : WindowOutcome::Fail);
      }
      for (int g = 1; g <= 4; ++g) {
        WindowHooks hooks;
        hooks.force_fail = [&](std::size_t first, std::size_t) { return !pass[first]; };
        const auto v = run_session(seq, pred, {1, 0.6, g, 0.0, false}, hooks);
        const auto want = oracle::first_run(pass, g);
        REQUIRE(v.deauth_window == want);
        REQUIRE(first_deauth(outcomes, g) == want);
      }
    }
  }
}

TEST_CASE("windows elapsed without a deauth") {
  for (int n = 1; n <= 200; n += 7) {
    for (int w : {1, 5, 20}) {
      for (double f : {0.0, 0.5, 0.8}) {
        const auto seq = timeline(static_cast<std::size_t>(n));
        const std::vector<InteractionKind> pred(static_cast<std::size_t>(n), T);
        AuthParams p{w, 0.6, 1, f, false};
        const auto s = static_cast<int>(window_stride(p));
        const auto v = run_session(seq, pred, p);
        const int expected = n < w ? 0 : (n - w) / s + 1;
        CHECK(v.windows_elapsed == static_cast<std::size_t>(expected));
        CHECK_FALSE(v.deauth_window.has_value());
      }
    }
  }
}

TEST_CASE("more matches never deauthenticate sooner") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const auto seq = timeline(120, &rng);
    std::vector<InteractionKind> pred;
    for (const auto& it : seq) pred.push_back(rng() % 3 ? it.kind : K == it.kind ? T : K);
    auto better = pred;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (rng() % 4 == 0) better[i] = seq[i].kind;
    }
    AuthParams p{10, 0.7, 1 + static_cast<int>(rng() % 3), 0.0, false};
    const auto a = run_session(seq, pred, p);
    const auto b = run_session(seq, better, p);
    const auto at = a.deauth_window.value_or(SIZE_MAX);
    const auto bt = b.deauth_window.value_or(SIZE_MAX);
    CHECK(bt >= at);
  }
}

TEST_CASE("g=1 deauthenticates at the first failing window") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto seq = timeline(80, &rng);
    std::vector<InteractionKind> pred;
    for (const auto& it : seq) pred.push_back(rng() % 2 ? it.kind : S == it.kind ? T : S);
    AuthParams p{8, 0.6, 1, 0.5, false};
    auto full = p;
    full.g = 1000;
    const auto all = run_session(seq, pred, full);
    const auto v = run_session(seq, pred, p);
    std::optional<std::size_t> first_fail;
    for (const auto& w : all.windows) {
      if (w.outcome == WindowOutcome::Fail) {
        first_fail = w.index;
        break;
      }
    }
    CHECK(v.deauth_window == first_fail);
  }
}

TEST_CASE("relabelling classes consistently leaves the verdict unchanged") {
  std::mt19937_64 rng(12);
  const auto seq = timeline(150, &rng);
  std::vector<InteractionKind> pred;
  for (const auto& it : seq) pred.push_back(rng() % 3 ? it.kind : static_cast<InteractionKind>(rng() % 3));
  auto relabel = [](InteractionKind k) { return k == T ? K : k == K ? S : T; };
  auto seq2 = seq;
  auto pred2 = pred;
  for (auto& it : seq2) it.kind = relabel(it.kind);
  for (auto& k : pred2) k = relabel(k);
  const AuthParams p{12, 0.6, 2, 0.25, false};
  CHECK(run_session(seq, pred, p) == run_session(seq2, pred2, p));
}

TEST_CASE("threshold hook raises the bar per window") {
  const auto seq = timeline(20);
  const auto pred = with_matches(20, 15);  // fraction 0.75
  WindowHooks hooks;
  hooks.threshold = [](std::size_t, std::size_t, double base) { return escalate_threshold(base, ProximityLevel::Far); };
  const auto plain = run_session(seq, pred, {20, 0.7, 1, 0.0, false});
  const auto far = run_session(seq, pred, {20, 0.7, 1, 0.0, false}, hooks);
  CHECK(plain.windows[0].outcome == WindowOutcome::Pass);
  CHECK(far.windows[0].outcome == WindowOutcome::Fail);
  CHECK(far.windows[0].threshold == doctest::Approx(0.9));
}

TEST_CASE("proximity levels from signal strength") {
  CHECK(proximity_level(-3.0, 0.0) == ProximityLevel::Immediate);
  CHECK(proximity_level(-10.0, 0.0) == ProximityLevel::Near);
  CHECK(proximity_level(-40.0, 0.0) == ProximityLevel::Far);
  CHECK(proximity_level(-63.0, -60.0) == ProximityLevel::Immediate);
  CHECK(std::string(proximity_token(ProximityLevel::Near)) == "near");
  CHECK(kind_of([] { proximity_level(std::nan(""), 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { proximity_level(0.0, INFINITY); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("threshold escalation") {
  CHECK(escalate_threshold(0.7, ProximityLevel::Immediate) == 0.7);
  CHECK(escalate_threshold(0.7, ProximityLevel::Near) == 0.8);
  CHECK(escalate_threshold(0.7, ProximityLevel::Far) == 0.9);
  CHECK(escalate_threshold(0.95, ProximityLevel::Far) == 1.0);
  for (double m = 0.05; m <= 1.0; m += 0.05) {
    CHECK(escalate_threshold(m, ProximityLevel::Near) >= m);
    CHECK(escalate_threshold(m, ProximityLevel::Far) >= escalate_threshold(m, ProximityLevel::Near));
    CHECK(escalate_threshold(m, ProximityLevel::Far) <= 1.0);
  }
}

TEST_CASE("offside typing blacklist") {
  auto typing = [](bool offside) { return Interaction{T, 0, 100, offside}; };
  std::vector<Interaction> five(5, typing(true));
  CHECK(blacklist_offside_typing(five, 5) == BlacklistResult::TriggerDeauth);
  std::vector<Interaction> four(4, typing(true));
  CHECK(blacklist_offside_typing(four, 5) == BlacklistResult::Pass);
  std::vector<Interaction> split(3, typing(true));
  split.push_back({K, 0, 100, false});
  for (int i = 0; i < 3; ++i) split.push_back(typing(true));
  CHECK(blacklist_offside_typing(split, 5) == BlacklistResult::Pass);
  std::vector<Interaction> broken(3, typing(true));
  broken.push_back(typing(false));
  broken.push_back(typing(true));
  broken.push_back(typing(true));
  CHECK(blacklist_offside_typing(broken, 5) == BlacklistResult::Pass);
  CHECK(blacklist_offside_typing(broken, 3) == BlacklistResult::TriggerDeauth);
  CHECK(kind_of([&] { blacklist_offside_typing(five, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("verdict report lists windows and per-minute totals") {
  std::vector<Interaction> seq;
  for (int i = 0; i < 40; ++i) seq.push_back({T, i * 4000, i * 4000 + 500, false});
  auto pred = std::vector<InteractionKind>(40, T);
  for (int i = 20; i < 40; ++i) pred[static_cast<std::size_t>(i)] = S;
  const AuthParams p{10, 0.6, 2, 0.0, false};
  const auto v = run_session(seq, pred, p);
  CHECK(v.deauth_window == std::optional<std::size_t>{4});
  const auto text = format_verdict_report(v, p);
  CHECK(text.rfind("# w=10 m=0.6 g=2 f=0 inclusive\n", 0) == 0);
  CHECK(text.find("window 1 0 0 36500 10 1 0.6 PASS\n") != std::string::npos);
  CHECK(text.find("window 4 30 120000 156500 0 0 0.6 FAIL\n") != std::string::npos);
  CHECK(text.find("# minute windows_ended fails logged_in\n") != std::string::npos);
}
