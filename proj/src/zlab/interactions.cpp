#include "zlab/interactions.hpp"

#include <algorithm>

#include "zlab/error.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

struct DeviceBlock {
  bool keyboard = false;
  std::size_t first = 0;  // event indices, inclusive
  std::size_t last = 0;
};

// Greedy left-to-right split of one merged run into pieces no longer than the
// cap. Each piece starts at the first uncovered event time.
template <typename Emit>
void split_run(const std::vector<Millis>& times, Millis cap, Emit&& emit) {
  std::size_t i = 0;
  while (i < times.size()) {
    const Millis start = times[i];
    std::size_t j = i;
    while (j + 1 < times.size() && times[j + 1] - start <= cap) ++j;
    emit(start, times[j], j - i + 1);
    i = j + 1;
  }
}

// Splits event times into runs separated by gaps of at least the idle threshold.
std::vector<std::vector<Millis>> merge_runs(const std::vector<Millis>& times, Millis idle_threshold) {
  std::vector<std::vector<Millis>> runs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i == 0 || times[i] - times[i - 1] >= idle_threshold) runs.emplace_back();
    runs.back().push_back(times[i]);
  }
  return runs;
}

KeySide dominant_side(Hand hand) { return hand == Hand::Right ? KeySide::Right : KeySide::Left; }

}  // namespace

const char* interaction_token(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::Typing: return "TYPING";
    case InteractionKind::Scrolling: return "SCROLLING";
    case InteractionKind::MKKM: return "MKKM";
    case InteractionKind::Idle: return "IDLE";
    case InteractionKind::Upright: return "UPRIGHT";
  }
  return "?";
}

std::optional<InteractionKind> parse_interaction_token(std::string_view token) {
  if (token == "TYPING") return InteractionKind::Typing;
  if (token == "SCROLLING") return InteractionKind::Scrolling;
  if (token == "MKKM") return InteractionKind::MKKM;
  if (token == "IDLE") return InteractionKind::Idle;
  if (token == "UPRIGHT") return InteractionKind::Upright;
  return std::nullopt;
}

void validate(const ExtractorConfig& cfg) {
  if (cfg.min_duration_ms <= 0 || cfg.min_duration_ms > cfg.max_duration_ms) {
    throw Error(ErrorKind::InvalidArgument, "need 0 < min_duration_ms <= max_duration_ms");
  }
  if (cfg.mkkm_max_ms < cfg.max_duration_ms) throw Error(ErrorKind::InvalidArgument, "mkkm_max_ms < max_duration_ms");
  if (cfg.min_scroll_events < 1) throw Error(ErrorKind::InvalidArgument, "min_scroll_events must be >= 1");
  if (cfg.idle_threshold_ms <= 0) throw Error(ErrorKind::InvalidArgument, "idle_threshold_ms must be > 0");
}

std::vector<Interaction> extract_interactions(const EventLog& log, const ExtractorConfig& cfg) {
  validate(cfg);
  const auto& ev = log.events;
  std::vector<Interaction> out;
  if (ev.empty()) return out;

  std::vector<DeviceBlock> blocks;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const bool kb = ev[i].is_keyboard();
    if (blocks.empty() || blocks.back().keyboard != kb) blocks.push_back({kb, i, i});
    else blocks.back().last = i;
  }

  std::vector<bool> offside_block(blocks.size(), false);
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    const Millis from = ev[blocks[b - 1].last].t;
    const Millis to = ev[blocks[b].first].t;
    const Millis gap = to - from;
    if (gap < cfg.min_duration_ms || gap > cfg.mkkm_max_ms) continue;
    if (blocks[b].keyboard) {
      const KeySide side = ev[blocks[b].first].key_side;
      if (side != dominant_side(cfg.bracelet_hand) && side != KeySide::Middle) {
        offside_block[b] = true;
        continue;
      }
    }
    out.push_back({InteractionKind::MKKM, from, to, false});
  }

  std::vector<Millis> times;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    times.clear();
    const auto& blk = blocks[b];
    for (std::size_t i = blk.first; i <= blk.last; ++i) {
      if (blk.keyboard || ev[i].kind == EventKind::Scroll) times.push_back(ev[i].t);
    }
    const auto runs = merge_runs(times, cfg.idle_threshold_ms);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      // Only the run that opens an offside block inherits the flag.
      const bool offside = blk.keyboard && offside_block[b] && r == 0;
      split_run(runs[r], cfg.max_duration_ms, [&](Millis s, Millis e, std::size_t count) {
        if (e - s < cfg.min_duration_ms) return;
        if (blk.keyboard) {
          out.push_back({InteractionKind::Typing, s, e, offside});
        } else if (static_cast<int>(count) >= cfg.min_scroll_events) {
          out.push_back({InteractionKind::Scrolling, s, e, false});
        }
      });
    }
  }

  std::sort(out.begin(), out.end(), [](const Interaction& a, const Interaction& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return out;
}

std::vector<Interaction> parse_interaction_sequence(std::string_view text) {
  std::vector<Interaction> seq;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto f = textio::split_spaces(line);
    if (f.size() != 3 && f.size() != 4) {
      throw Error(ErrorKind::MalformedLine, "expected 3 or 4 fields on line " + std::to_string(line_no), line_no);
    }
    auto s = textio::parse_int(f[0]);
    auto e = textio::parse_int(f[1]);
    auto k = parse_interaction_token(f[2]);
    if (!s || !e || !k || *e <= *s) {
      throw Error(ErrorKind::MalformedLine, "bad interaction on line " + std::to_string(line_no), line_no);
    }
    bool offside = false;
    if (f.size() == 4) {
      if (f[3] != "offside") {
        throw Error(ErrorKind::MalformedLine, "unknown trailing token on line " + std::to_string(line_no), line_no);
      }
      offside = true;
    }
    if (!seq.empty() && *s < seq.back().start) {
      throw Error(ErrorKind::NonMonotonicTimestamp, "interactions out of order on line " + std::to_string(line_no),
                  line_no);
    }
    seq.push_back({*k, *s, *e, offside});
  }
  return seq;
}

std::vector<Interaction> load_interaction_sequence(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : textio::read_lines(path)) {
    text += l;
    text += '\n';
  }
  return parse_interaction_sequence(text);
}

std::string serialize_interaction_sequence(const std::vector<Interaction>& seq) {
  std::string out;
  for (const auto& i : seq) {
    textio::append_int(out, i.start);
    out += ' ';
    textio::append_int(out, i.end);
    out += ' ';
    out += interaction_token(i.kind);
    if (i.offside) out += " offside";
    out += '\n';
  }
  return out;
}

void save_interaction_sequence(const std::vector<Interaction>& seq, const std::filesystem::path& path) {
  textio::write_file_atomic(path, serialize_interaction_sequence(seq));
}

std::vector<InteractionKind> kinds_of(const std::vector<Interaction>& seq) {
  std::vector<InteractionKind> out;
  out.reserve(seq.size());
  for (const auto& i : seq) out.push_back(i.kind);
  return out;
}

}  // namespace zlab
