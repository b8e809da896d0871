#pragma once

// End-to-end decision path for one session: terminal events -> actual
// interactions -> bracelet segments -> predicted labels -> windowed verdict.

#include <optional>
#include <vector>

#include "zlab/adversary.hpp"
#include "zlab/auth.hpp"
#include "zlab/features.hpp"
#include "zlab/forest.hpp"

namespace zlab {

struct PipelineOptions {
  ExtractorConfig extractor;
  SegmentOptions segment;
  AuthParams auth;
  bool five_class = false;       // label with the vote tree instead of the forest argmax
  bool continuous_mode = false;  // also classify the bracelet while the terminal is idle
  Millis probe_ms = 1000;
};

struct Classified {
  std::vector<Interaction> actual;
  std::vector<FeatureVector> features;
  std::vector<VoteCounts> votes;
  std::vector<InteractionKind> predicted;
};

// vote_tree may be null; it is required only when five_class is set.
Classified classify_sequence(const SensorTrace& sensor, const std::vector<Interaction>& actual,
                             const ForestModel& forest, const VoteTreeModel* vote_tree, bool five_class,
                             const SegmentOptions& seg = {});

// Fixed-length probes tiling every event-free gap of at least the idle
// threshold that no extracted interaction covers.
std::vector<Interaction> idle_probes(const EventLog& log, const std::vector<Interaction>& actual,
                                     const ExtractorConfig& cfg, Millis probe_ms);

struct ProbeOutcome {
  Interaction probe;
  InteractionKind predicted = InteractionKind::Idle;
  bool flagged = false;  // bracelet claims terminal activity while the terminal is idle
  std::optional<std::size_t> attached_to;  // first interaction starting at or after the probe end
};

struct AuthOutcome {
  Classified classified;
  std::vector<ProbeOutcome> probes;
  SessionVerdict verdict;
};

// `log` is the event log that produced `actual`; it is only read in continuous mode.
AuthOutcome authenticate_sequence(const SensorTrace& sensor, const std::vector<Interaction>& actual,
                                  const EventLog& log, const ForestModel& forest, const VoteTreeModel* vote_tree,
                                  const PipelineOptions& opts);

AuthOutcome authenticate(const SensorTrace& sensor, const EventLog& log, const ForestModel& forest,
                         const VoteTreeModel* vote_tree, const PipelineOptions& opts);

// Labelled feature rows from a bundle's truth intervals.
TrainingSet training_rows(const SessionBundle& b, const SegmentOptions& seg = {}, bool include_extended = false);

}  // namespace zlab
