#include "zlab/trace.hpp"

#include <algorithm>
#include <cmath>

#include "zlab/error.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

constexpr std::string_view kRateHeader = "#rate_hz=";
constexpr std::string_view kSessionHeader = "#session=";

// Iterates lines of a buffer without copying; strips a trailing '\r'.
class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    line = text_.substr(pos_, nl - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

Millis parse_timestamp(std::string_view field, std::size_t line_no) {
  if (auto i = textio::parse_int(field)) return *i;
  auto d = textio::parse_double(field);
  if (!d || !std::isfinite(*d)) {
    throw Error(ErrorKind::MalformedLine, "bad timestamp on line " + std::to_string(line_no), line_no);
  }
  // Sub-millisecond clocks are rounded half-up.
  return static_cast<Millis>(std::floor(*d + 0.5));
}

std::string read_file(const std::filesystem::path& path) {
  auto lines = textio::read_lines(path);
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

double median_gap_ms(const SensorTrace& trace) {
  const auto& s = trace.samples;
  if (s.size() < 2) return 0.0;
  std::vector<Millis> gaps;
  gaps.reserve(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i) gaps.push_back(s[i].t - s[i - 1].t);
  const std::size_t mid = gaps.size() / 2;
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid), gaps.end());
  const double upper = static_cast<double>(gaps[mid]);
  if (gaps.size() % 2 == 1) return upper;
  const double lower = static_cast<double>(*std::max_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid)));
  return 0.5 * (lower + upper);
}

void validate(const SensorTrace& trace) {
  if (trace.samples.empty()) throw Error(ErrorKind::EmptyTrace, "trace has no samples");
  if (!(trace.nominal_rate_hz > 0.0) || !std::isfinite(trace.nominal_rate_hz)) {
    throw Error(ErrorKind::InvalidTrace, "nominal rate must be positive");
  }
  Millis prev = -1;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (s.t < 0) throw Error(ErrorKind::InvalidTrace, "negative timestamp at sample " + std::to_string(i));
    if (i > 0 && s.t <= prev) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "timestamps must increase at sample " + std::to_string(i));
    }
    prev = s.t;
    for (double v : {s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z}) {
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidTrace, "non-finite reading at sample " + std::to_string(i));
    }
  }
  if (trace.samples.size() >= 2) {
    const double expected = 1000.0 / trace.nominal_rate_hz;
    const double gap = median_gap_ms(trace);
    if (std::abs(gap - expected) > 0.2 * expected) {
      throw Error(ErrorKind::InvalidTrace, "median gap " + textio::format_double(gap) +
                                               " ms disagrees with nominal rate " +
                                               textio::format_double(trace.nominal_rate_hz) + " Hz");
    }
  }
}

SensorTrace parse_sensor_trace(std::string_view text) {
  SensorTrace trace;
  LineCursor cursor(text);
  std::string_view line;
  bool have_rate = false;
  while (cursor.next(line)) {
    const auto line_no = cursor.line_no();
    if (line_no == 1 && line.starts_with(kRateHeader)) {
      auto rate = textio::parse_double(line.substr(kRateHeader.size()));
      if (!rate || !(*rate > 0.0) || !std::isfinite(*rate)) {
        throw Error(ErrorKind::MalformedLine, "bad rate header", line_no);
      }
      trace.nominal_rate_hz = *rate;
      have_rate = true;
      continue;
    }
    if (line.empty() && cursor.next(line)) {
      throw Error(ErrorKind::MalformedLine, "empty line " + std::to_string(line_no), line_no);
    }
    if (line.empty()) break;
    const auto fields = textio::split_spaces(line);
    if (fields.size() != 7) {
      throw Error(ErrorKind::MalformedLine, "expected 7 fields on line " + std::to_string(line_no), line_no);
    }
    SensorSample s;
    s.t = parse_timestamp(fields[0], line_no);
    double v[6];
    for (int k = 0; k < 6; ++k) {
      auto d = textio::parse_double(fields[static_cast<std::size_t>(k) + 1]);
      if (!d || !std::isfinite(*d)) {
        throw Error(ErrorKind::MalformedLine, "bad reading on line " + std::to_string(line_no), line_no);
      }
      v[k] = *d;
    }
    s.accel = {v[0], v[1], v[2]};
    s.gyro = {v[3], v[4], v[5]};
    if (s.t < 0) throw Error(ErrorKind::MalformedLine, "negative timestamp on line " + std::to_string(line_no), line_no);
    if (!trace.samples.empty() && s.t <= trace.samples.back().t) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "timestamp does not increase on line " + std::to_string(line_no),
                  line_no);
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw Error(ErrorKind::EmptyTrace, "trace has no samples");
  if (!have_rate) {
    const double gap = median_gap_ms(trace);
    if (gap <= 0.0) throw Error(ErrorKind::InvalidTrace, "cannot infer sampling rate from a single sample");
    trace.nominal_rate_hz = 1000.0 / gap;
  }
  validate(trace);
  return trace;
}

SensorTrace load_sensor_trace(const std::filesystem::path& path) { return parse_sensor_trace(read_file(path)); }

std::string serialize_sensor_trace(const SensorTrace& trace) {
  std::string out;
  out.reserve(trace.samples.size() * 56 + 32);
  out += kRateHeader;
  textio::append_double(out, trace.nominal_rate_hz);
  out += '\n';
  for (const auto& s : trace.samples) {
    textio::append_int(out, s.t);
    for (double v : {s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z}) {
      out += ' ';
      textio::append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

void save_sensor_trace(const SensorTrace& trace, const std::filesystem::path& path) {
  textio::write_file_atomic(path, serialize_sensor_trace(trace));
}

SensorTrace downsample(const SensorTrace& trace, std::size_t keep_every) {
  if (keep_every == 0) throw Error(ErrorKind::InvalidArgument, "keep_every must be >= 1");
  SensorTrace out;
  out.nominal_rate_hz = trace.nominal_rate_hz / static_cast<double>(keep_every);
  out.samples.reserve(trace.samples.size() / keep_every + 1);
  for (std::size_t i = 0; i < trace.samples.size(); i += keep_every) out.samples.push_back(trace.samples[i]);
  return out;
}

SensorTrace shift_trace(const SensorTrace& trace, Millis delta) {
  SensorTrace out = trace;
  for (auto& s : out.samples) s.t += delta;
  return out;
}

void validate(const SamplingSpec& spec) {
  if (spec.s_min < 1) throw Error(ErrorKind::InvalidArgument, "s_min must be >= 1");
  if (!(spec.d_min_ms > 0.0)) throw Error(ErrorKind::InvalidArgument, "d_min must be > 0");
}

double min_required_rate(const SamplingSpec& spec) {
  validate(spec);
  return static_cast<double>(spec.s_min) * 1000.0 / spec.d_min_ms;
}

const char* event_kind_token(EventKind kind) {
  switch (kind) {
    case EventKind::KeyDown: return "KEY";
    case EventKind::Scroll: return "SCROLL";
    case EventKind::MouseMove: return "MOVE";
    case EventKind::MouseClick: return "CLICK";
  }
  return "?";
}

const char* key_side_token(KeySide side) {
  switch (side) {
    case KeySide::Left: return "L";
    case KeySide::Middle: return "M";
    case KeySide::Right: return "R";
    case KeySide::NotApplicable: return "-";
  }
  return "?";
}

void validate(const EventLog& log) {
  if (log.session_id.empty()) throw Error(ErrorKind::InvalidArgument, "event log needs a session id");
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    const bool keyed = e.kind == EventKind::KeyDown;
    if (keyed == (e.key_side == KeySide::NotApplicable)) {
      throw Error(ErrorKind::InvalidArgument, "key side must be set exactly for key events (event " +
                                                  std::to_string(i) + ")");
    }
    if (i > 0 && e.t < log.events[i - 1].t) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "event timestamps decrease at event " + std::to_string(i));
    }
  }
}

EventLog parse_event_log(std::string_view text, std::string fallback_session_id) {
  EventLog log;
  log.session_id = std::move(fallback_session_id);
  LineCursor cursor(text);
  std::string_view line;
  while (cursor.next(line)) {
    const auto line_no = cursor.line_no();
    if (line_no == 1 && line.starts_with(kSessionHeader)) {
      log.session_id = std::string(line.substr(kSessionHeader.size()));
      if (log.session_id.empty()) throw Error(ErrorKind::MalformedLine, "empty session id", line_no);
      continue;
    }
    if (line.empty() && cursor.next(line)) {
      throw Error(ErrorKind::MalformedLine, "empty line " + std::to_string(line_no), line_no);
    }
    if (line.empty()) break;
    const auto fields = textio::split_spaces(line);
    if (fields.size() != 3) {
      throw Error(ErrorKind::MalformedLine, "expected 3 fields on line " + std::to_string(line_no), line_no);
    }
    TerminalEvent e;
    e.t = parse_timestamp(fields[0], line_no);
    if (fields[1] == "KEY") e.kind = EventKind::KeyDown;
    else if (fields[1] == "SCROLL") e.kind = EventKind::Scroll;
    else if (fields[1] == "MOVE") e.kind = EventKind::MouseMove;
    else if (fields[1] == "CLICK") e.kind = EventKind::MouseClick;
    else throw Error(ErrorKind::MalformedLine, "unknown event kind on line " + std::to_string(line_no), line_no);
    if (fields[2] == "L") e.key_side = KeySide::Left;
    else if (fields[2] == "M") e.key_side = KeySide::Middle;
    else if (fields[2] == "R") e.key_side = KeySide::Right;
    else if (fields[2] == "-") e.key_side = KeySide::NotApplicable;
    else throw Error(ErrorKind::MalformedLine, "unknown key side on line " + std::to_string(line_no), line_no);
    if ((e.kind == EventKind::KeyDown) == (e.key_side == KeySide::NotApplicable)) {
      throw Error(ErrorKind::MalformedLine, "key side mismatch on line " + std::to_string(line_no), line_no);
    }
    if (!log.events.empty() && e.t < log.events.back().t) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "event time decreases on line " + std::to_string(line_no),
                  line_no);
    }
    log.events.push_back(e);
  }
  return log;
}

EventLog load_event_log(const std::filesystem::path& path) {
  return parse_event_log(read_file(path), path.stem().string());
}

std::string serialize_event_log(const EventLog& log) {
  std::string out;
  out.reserve(log.events.size() * 16 + 32);
  out += kSessionHeader;
  out += log.session_id;
  out += '\n';
  for (const auto& e : log.events) {
    textio::append_int(out, e.t);
    out += ' ';
    out += event_kind_token(e.kind);
    out += ' ';
    out += key_side_token(e.key_side);
    out += '\n';
  }
  return out;
}

void save_event_log(const EventLog& log, const std::filesystem::path& path) {
  validate(log);
  textio::write_file_atomic(path, serialize_event_log(log));
}

EventLog shift_events(const EventLog& log, Millis delta) {
  EventLog out = log;
  for (auto& e : out.events) e.t += delta;
  return out;
}

}  // namespace zlab
