#pragma once

// Synthetic victim sessions and the attacker models that act on them.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "zlab/forest.hpp"
#include "zlab/interactions.hpp"
#include "zlab/trace.hpp"

namespace zlab {

// Magnitude shape of one activity class. `amplitude` is the offset (or swell
// height) above gravity, `noise` the Gaussian sigma, `period_ms` the
// oscillation or impulse time constant.
struct ClassSignature {
  double amplitude = 0.0;
  double noise = 0.0;
  double period_ms = 0.0;
  double gyro_amplitude = 0.0;
};

struct SignatureSet {
  ClassSignature typing{0.35, 0.12, 25.0, 0.35};
  ClassSignature scrolling{0.12, 0.03, 333.0, 0.12};
  ClassSignature mouse{0.30, 0.10, 830.0, 0.30};  // hand moving the mouse, not scrolling
  ClassSignature mkkm{2.5, 0.10, 150.0, 1.5};   // period_ms: time of the lift peak after the gap opens
  ClassSignature idle{0.0, 0.01, 0.0, 0.015};
  ClassSignature upright{0.8, 0.10, 556.0, 0.50};
  double key_impulse_min = 0.6;
  double key_impulse_max = 1.2;
};

struct UserProfile {
  std::string user_id = "user";
  double interaction_rate_per_s = 1.5;  // upper bound; pauses are inserted when ahead of it
  double typing_duration_mean_ms = 900.0;
  Millis mkkm_min_ms = 1000;
  Millis mkkm_max_ms = 1500;
  double sensor_rate_hz = 200.0;
  Hand bracelet_hand = Hand::Right;
  double idle_pause_probability = 0.08;
  double upright_probability = 0.04;
  double short_fragment_probability = 0.15;
  double no_scroll_probability = 0.2;
  SignatureSet signature;
  double signature_jitter = 0.15;  // per-user multiplicative spread on every amplitude
  std::uint64_t jitter_seed = 0;   // 0: derive from the session seed
};

void validate(const UserProfile& p);

struct SessionBundle {
  std::string user_id;
  SensorTrace sensor;
  EventLog events;
  // Extracted interactions plus the Idle/Upright periods known to the generator.
  std::vector<Interaction> truth;
  Millis duration_ms = 0;
  std::uint64_t seed = 0;
};

SessionBundle generate_session(const UserProfile& profile, Millis duration_ms, std::uint64_t seed);

// Three classes of 24-dimensional Gaussian rows; class c has mean 3*sigma*c on
// every feature.
TrainingSet generate_gaussian_features(std::size_t n_rows, std::uint64_t seed, double separation_sigmas = 3.0);

void save_bundle(const SessionBundle& b, const std::filesystem::path& dir);
SessionBundle load_bundle(const std::filesystem::path& dir);

enum class Strategy { NaiveAll, OppKeyboard, OppAll, AudioKeyboard };

const char* strategy_token(Strategy s);
Strategy parse_strategy(std::string_view token);

struct AttackerProfile {
  Strategy strategy = Strategy::OppKeyboard;
  double latency_median_ms = 300.0;
  double latency_sigma_log = 0.35;
  double mimic_fraction = 0.6;
  double miss_probability = 0.05;
  double early_stop_probability = 0.1;
  double duration_jitter = 0.2;  // NaiveAll: relative duration perturbation
  double audio_latency_factor = 1.5;
  double detection_probability = 0.8;  // AudioKeyboard only
  Millis mkkm_window_ms = 400;         // OppAll: an MKKM mimic succeeds if the latency fits
};

void validate(const AttackerProfile& p);
AttackerProfile default_attacker(Strategy s);
// Zero latency, no misses, no jitter, everything mimicked.
AttackerProfile perfect_attacker();

AttackerProfile parse_attacker_profile(std::string_view text);
AttackerProfile load_attacker_profile(const std::filesystem::path& path);
std::string serialize_attacker_profile(const AttackerProfile& p);
// Applies one "field = value" override; returns false for unknown fields.
bool set_attacker_field(AttackerProfile& p, const std::string& field, const std::string& value);

// Attacker terminal events for one victim session.
EventLog apply_attack(const SessionBundle& victim, const AttackerProfile& attacker, std::uint64_t seed,
                      const ExtractorConfig& cfg = {});

struct MismatchPair {
  std::vector<Interaction> actual;  // from the first session's events
  SensorTrace sensor;               // from the second session, starting at t = 0
  std::string actual_user;
  std::string sensor_user;
};

MismatchPair mismatch_pair(const SessionBundle& a, const SessionBundle& b, const ExtractorConfig& cfg = {});

SessionBundle desync(const SessionBundle& bundle, Millis shift_ms);

}  // namespace zlab
