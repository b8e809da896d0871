#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "zlab/adversary.hpp"
#include "zlab/error.hpp"

using namespace zlab;

namespace {

const SessionBundle& ten_minutes() {
  static const SessionBundle b = [] {
    UserProfile p;
    p.user_id = "victim";
    return generate_session(p, 600000, 7);
  }();
  return b;
}

std::vector<Interaction> of_kind(const std::vector<Interaction>& seq, InteractionKind k) {
  std::vector<Interaction> out;
  for (const auto& i : seq) {
    if (i.kind == k) out.push_back(i);
  }
  return out;
}

// Median start delay between each attacker typing interaction and the latest
// victim typing interaction starting at or before it.
double median_typing_delay(const std::vector<Interaction>& victim, const std::vector<Interaction>& attacker) {
  const auto v = of_kind(victim, InteractionKind::Typing);
  std::vector<double> d;
  for (const auto& a : of_kind(attacker, InteractionKind::Typing)) {
    const auto it = std::upper_bound(v.begin(), v.end(), a.start,
                                     [](Millis t, const Interaction& x) { return t < x.start; });
    if (it == v.begin()) continue;
    d.push_back(static_cast<double>(a.start - std::prev(it)->start));
  }
  std::sort(d.begin(), d.end());
  return d.empty() ? 0.0 : d[d.size() / 2];
}

}  // namespace

TEST_CASE("generator is deterministic in its seed") {
  UserProfile p;
  const auto a = generate_session(p, 60000, 3);
  const auto b = generate_session(p, 60000, 3);
  const auto c = generate_session(p, 60000, 4);
  CHECK(a.sensor == b.sensor);
  CHECK(a.events == b.events);
  CHECK(a.truth == b.truth);
  CHECK_FALSE(a.events == c.events);
}

TEST_CASE("generated sessions are internally consistent") {
  const auto& b = ten_minutes();
  CHECK(b.sensor.nominal_rate_hz == 200.0);
  CHECK(b.sensor.samples.size() >= 119000);
  CHECK_NOTHROW(validate(b.events));
  CHECK(std::is_sorted(b.truth.begin(), b.truth.end(),
                       [](const Interaction& x, const Interaction& y) { return x.start < y.start; }));
  for (const auto& it : b.truth) {
    CHECK(it.start >= 0);
    CHECK(it.end <= b.duration_ms);
  }
  const auto extracted = extract_interactions(b.events);
  for (const auto& it : extracted) CHECK(std::find(b.truth.begin(), b.truth.end(), it) != b.truth.end());
}

TEST_CASE("mean typing duration sits in the configured range") {
  const auto typing = of_kind(ten_minutes().truth, InteractionKind::Typing);
  REQUIRE(typing.size() > 20);
  double sum = 0;
  for (const auto& t : typing) sum += static_cast<double>(t.duration());
  const double mean = sum / static_cast<double>(typing.size());
  MESSAGE("mean typing duration " << mean << " ms");
  CHECK(mean >= 700.0);
  CHECK(mean <= 1000.0);
}

TEST_CASE("ten minute session has about 900 interactions" * doctest::may_fail()) {
  const auto n = extract_interactions(ten_minutes().events).size();
  MESSAGE("interactions in ten minutes: " << n);
  CHECK(n >= 720);
  CHECK(n <= 1080);
}

TEST_CASE("twenty-interaction windows last about 13 seconds" * doctest::may_fail()) {
  const auto seq = extract_interactions(ten_minutes().events);
  REQUIRE(seq.size() >= 20);
  double sum = 0;
  std::size_t k = 0;
  for (std::size_t first = 0; first + 20 <= seq.size(); first += 20, ++k) {
    sum += static_cast<double>(seq[first + 19].end - seq[first].start);
  }
  const double mean_s = sum / static_cast<double>(k) / 1000.0;
  MESSAGE("mean window duration " << mean_s << " s");
  CHECK(mean_s >= 6.5);
  CHECK(mean_s <= 19.5);
}

TEST_CASE("a perfect mimic reproduces the victim's interaction sequence") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    UserProfile p;
    p.user_id = "u" + std::to_string(seed);
    const auto victim = generate_session(p, 120000, seed);
    const auto log = apply_attack(victim, perfect_attacker(), seed);
    CHECK(extract_interactions(log) == extract_interactions(victim.events));
  }
}

TEST_CASE("opportunistic keyboard attacker types only and mimics a fraction") {
  const auto& victim = ten_minutes();
  auto prof = default_attacker(Strategy::OppKeyboard);
  const auto log = apply_attack(victim, prof, 11);
  for (const auto& e : log.events) CHECK(e.kind == EventKind::KeyDown);
  const auto seq = extract_interactions(log);
  for (const auto& it : seq) CHECK(it.kind == InteractionKind::Typing);
  const auto v = static_cast<double>(of_kind(extract_interactions(victim.events), InteractionKind::Typing).size());
  const auto a = static_cast<double>(seq.size());
  MESSAGE("victim typing " << v << ", attacker typing " << a);
  CHECK(a >= 0.4 * v);
  CHECK(a <= 0.75 * v);

  prof.mimic_fraction = 0.0;
  CHECK(apply_attack(victim, prof, 11).events.empty());
}

TEST_CASE("attacks never act before the victim") {
  const auto& victim = ten_minutes();
  const auto vseq = extract_interactions(victim.events);
  const Millis first_victim = victim.events.events.front().t;
  for (Strategy s : {Strategy::NaiveAll, Strategy::OppKeyboard, Strategy::OppAll, Strategy::AudioKeyboard}) {
    const auto log = apply_attack(victim, default_attacker(s), 5);
    CAPTURE(strategy_token(s));
    CHECK_NOTHROW(validate(log));
    if (log.events.empty()) continue;
    CHECK(log.events.front().t >= first_victim);
    for (const auto& a : extract_interactions(log)) {
      const bool preceded = std::any_of(vseq.begin(), vseq.end(), [&](const Interaction& v) { return v.start <= a.start; });
      CHECK(preceded);
    }
  }
}

TEST_CASE("larger latency delays the mimicked typing") {
  const auto& victim = ten_minutes();
  const auto vseq = extract_interactions(victim.events);
  auto fast = default_attacker(Strategy::OppKeyboard);
  fast.latency_median_ms = 200;
  auto slow = fast;
  slow.latency_median_ms = 500;
  const double d_fast = median_typing_delay(vseq, extract_interactions(apply_attack(victim, fast, 3)));
  const double d_slow = median_typing_delay(vseq, extract_interactions(apply_attack(victim, slow, 3)));
  MESSAGE("median delay " << d_fast << " vs " << d_slow);
  CHECK(d_slow > d_fast);
}

TEST_CASE("attack output is deterministic in its seed") {
  const auto& victim = ten_minutes();
  const auto p = default_attacker(Strategy::NaiveAll);
  CHECK(apply_attack(victim, p, 9) == apply_attack(victim, p, 9));
  CHECK_FALSE(apply_attack(victim, p, 9) == apply_attack(victim, p, 10));
}

TEST_CASE("mismatch pairs and desynchronisation") {
  UserProfile pa, pb;
  pa.user_id = "alice";
  pb.user_id = "bob";
  const auto a = generate_session(pa, 30000, 1);
  const auto b = generate_session(pb, 30000, 2);
  CHECK_THROWS_AS(mismatch_pair(a, a), Error);
  try {
    mismatch_pair(a, a);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SameUser);
  }
  const auto m = mismatch_pair(a, b);
  CHECK(m.actual == extract_interactions(a.events));
  CHECK(m.sensor.samples.front().t == 0);
  CHECK(m.sensor.samples.size() == b.sensor.samples.size());
  CHECK(m.actual_user == "alice");
  CHECK(m.sensor_user == "bob");

  const auto same = desync(a, 0);
  CHECK(same.events == a.events);
  CHECK(same.sensor == a.sensor);
  const auto shifted = desync(a, 200);
  REQUIRE(shifted.events.events.size() == a.events.events.size());
  for (std::size_t i = 0; i < a.events.events.size(); ++i) {
    CHECK(shifted.events.events[i].t == a.events.events[i].t + 200);
  }
  CHECK(shifted.sensor == a.sensor);
  CHECK_THROWS_AS(desync(a, -1), Error);
}

TEST_CASE("bundles round trip through disk") {
  testutil::TempDir dir("bundle");
  UserProfile p;
  p.user_id = "carol";
  const auto b = generate_session(p, 20000, 4);
  save_bundle(b, dir.path());
  const auto back = load_bundle(dir.path());
  CHECK(back.user_id == "carol");
  CHECK(back.duration_ms == 20000);
  CHECK(back.seed == 4);
  CHECK(back.sensor == b.sensor);
  CHECK(back.events.events == b.events.events);
  CHECK(back.truth == b.truth);
  try {
    load_bundle(dir / "nowhere");
    FAIL("expected missing bundle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingArtifact);
  }
}

TEST_CASE("attacker profiles parse, override and round trip") {
  for (Strategy s : {Strategy::NaiveAll, Strategy::OppKeyboard, Strategy::OppAll, Strategy::AudioKeyboard}) {
    const auto p = default_attacker(s);
    const auto back = parse_attacker_profile(serialize_attacker_profile(p));
    CHECK(serialize_attacker_profile(back) == serialize_attacker_profile(p));
    CHECK(parse_strategy(strategy_token(s)) == s);
  }
  auto p = parse_attacker_profile("strategy = audio_keyboard\nlatency_median_ms = 250\n");
  CHECK(p.strategy == Strategy::AudioKeyboard);
  CHECK(p.latency_median_ms == 250.0);
  CHECK(set_attacker_field(p, "miss_probability", "0.5"));
  CHECK(p.miss_probability == 0.5);
  CHECK_FALSE(set_attacker_field(p, "colour", "blue"));
  CHECK_THROWS_AS(parse_attacker_profile("mimic_fraction = 2\n"), Error);
  CHECK_THROWS_AS(parse_attacker_profile("colour = blue\n"), Error);
  CHECK_THROWS_AS(parse_strategy("sneaky"), Error);
}

TEST_CASE("Gaussian feature rows") {
  const auto rows = generate_gaussian_features(300, 1);
  CHECK(rows == generate_gaussian_features(300, 1));
  std::array<double, 3> mean{};
  for (const auto& r : rows) mean[static_cast<std::size_t>(r.label)] += r.features.values[0] / 100.0;
  CHECK(std::abs(mean[0]) < 0.4);
  CHECK(std::abs(mean[1] - 3.0) < 0.4);
  CHECK(std::abs(mean[2] - 6.0) < 0.4);
}

TEST_CASE("profiles are validated") {
  UserProfile p;
  p.typing_duration_mean_ms = 2000;
  CHECK_THROWS_AS(generate_session(p, 60000, 1), Error);
  p = {};
  CHECK_THROWS_AS(generate_session(p, 5000, 1), Error);
}
