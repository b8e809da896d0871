#pragma once

// Bracelet sensor traces and terminal event logs, their line formats, and
// decimation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zlab {

using Millis = std::int64_t;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  bool operator==(const Vec3&) const = default;
};

struct SensorSample {
  Millis t = 0;
  Vec3 accel;  // m/s^2
  Vec3 gyro;   // rad/s

  bool operator==(const SensorSample&) const = default;
};

struct SensorTrace {
  std::vector<SensorSample> samples;
  double nominal_rate_hz = 0.0;

  bool operator==(const SensorTrace&) const = default;
};

// Throws Error(InvalidTrace) when an invariant is broken.
void validate(const SensorTrace& trace);

// Median gap between consecutive samples in ms; 0 for fewer than two samples.
double median_gap_ms(const SensorTrace& trace);

SensorTrace parse_sensor_trace(std::string_view text);
SensorTrace load_sensor_trace(const std::filesystem::path& path);
std::string serialize_sensor_trace(const SensorTrace& trace);
void save_sensor_trace(const SensorTrace& trace, const std::filesystem::path& path);

// Pure decimation: keeps indices 0, k, 2k, ...
SensorTrace downsample(const SensorTrace& trace, std::size_t keep_every);

// Shift every timestamp by delta; used to align traces to a common origin.
SensorTrace shift_trace(const SensorTrace& trace, Millis delta);

struct SamplingSpec {
  int s_min = 3;        // samples needed to compute every feature
  double d_min_ms = 25;  // shortest classifiable event
};

void validate(const SamplingSpec& spec);

// f_min = s_min / d_min, in Hz.
double min_required_rate(const SamplingSpec& spec);

enum class EventKind { KeyDown, Scroll, MouseMove, MouseClick };
enum class KeySide { Left, Middle, Right, NotApplicable };

struct TerminalEvent {
  Millis t = 0;
  EventKind kind = EventKind::KeyDown;
  KeySide key_side = KeySide::NotApplicable;

  bool is_keyboard() const { return kind == EventKind::KeyDown; }
  bool operator==(const TerminalEvent&) const = default;
};

struct EventLog {
  std::vector<TerminalEvent> events;
  std::string session_id;

  bool operator==(const EventLog&) const = default;
};

void validate(const EventLog& log);

// Optional first line "#session=<id>"; when absent the caller's fallback id is used.
EventLog parse_event_log(std::string_view text, std::string fallback_session_id = "session");
EventLog load_event_log(const std::filesystem::path& path);
std::string serialize_event_log(const EventLog& log);
void save_event_log(const EventLog& log, const std::filesystem::path& path);

EventLog shift_events(const EventLog& log, Millis delta);

const char* event_kind_token(EventKind kind);
const char* key_side_token(KeySide side);

}  // namespace zlab
