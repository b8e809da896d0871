#pragma once

// Terminal-side interaction extraction: turns keyboard/mouse events into the
// actual interaction sequence (typing, scrolling, MKKM hand movements).

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zlab/trace.hpp"

namespace zlab {

// Declaration order is the tie-break order used by every vote.
enum class InteractionKind { Typing = 0, Scrolling = 1, MKKM = 2, Idle = 3, Upright = 4 };

inline constexpr std::size_t kBaseClassCount = 3;
inline constexpr std::size_t kExtendedClassCount = 5;

const char* interaction_token(InteractionKind kind);
std::optional<InteractionKind> parse_interaction_token(std::string_view token);

struct Interaction {
  InteractionKind kind = InteractionKind::Typing;
  Millis start = 0;
  Millis end = 0;
  // Typing that followed mouse activity without a dominant-side key, so no MKKM
  // was recorded before it. Ignored by the window comparison.
  bool offside = false;

  Millis duration() const { return end - start; }
  bool operator==(const Interaction&) const = default;
};

enum class Hand { Left, Right };

struct ExtractorConfig {
  Millis min_duration_ms = 25;
  Millis max_duration_ms = 1000;
  Millis idle_threshold_ms = 1000;
  Millis mkkm_max_ms = 5000;
  int min_scroll_events = 5;
  Hand bracelet_hand = Hand::Right;
};

void validate(const ExtractorConfig& cfg);

std::vector<Interaction> extract_interactions(const EventLog& log, const ExtractorConfig& cfg = {});

// Line format: "start_ms end_ms KIND [offside]".
std::vector<Interaction> parse_interaction_sequence(std::string_view text);
std::vector<Interaction> load_interaction_sequence(const std::filesystem::path& path);
std::string serialize_interaction_sequence(const std::vector<Interaction>& seq);
void save_interaction_sequence(const std::vector<Interaction>& seq, const std::filesystem::path& path);

std::vector<InteractionKind> kinds_of(const std::vector<Interaction>& seq);

}  // namespace zlab
