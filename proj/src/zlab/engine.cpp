#include "zlab/engine.hpp"

#include <algorithm>

#include "zlab/error.hpp"

namespace zlab {

Classified classify_sequence(const SensorTrace& sensor, const std::vector<Interaction>& actual,
                             const ForestModel& forest, const VoteTreeModel* vote_tree, bool five_class,
                             const SegmentOptions& seg) {
  if (five_class && vote_tree == nullptr) {
    throw Error(ErrorKind::Config, "five-class labelling needs a model with a vote tree");
  }
  Classified c;
  c.actual = actual;
  const auto segments = segment(sensor, actual, seg);
  c.features.reserve(segments.size());
  for (const auto& s : segments) {
    c.features.push_back(featurize(s));
    const auto p = predict3(forest, c.features.back());
    c.votes.push_back(p.votes);
    c.predicted.push_back(five_class ? vote_tree->predict(p.votes) : p.kind);
  }
  return c;
}

std::vector<Interaction> idle_probes(const EventLog& log, const std::vector<Interaction>& actual,
                                     const ExtractorConfig& cfg, Millis probe_ms) {
  if (probe_ms <= 0) throw Error(ErrorKind::InvalidArgument, "probe length must be > 0");
  std::vector<Interaction> probes;
  const auto& ev = log.events;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    const Millis a = ev[i].t;
    const Millis b = ev[i + 1].t;
    if (b - a < cfg.idle_threshold_ms) continue;
    const bool covered = std::any_of(actual.begin(), actual.end(),
                                     [&](const Interaction& it) { return it.start <= a && it.end >= b; });
    if (covered) continue;
    for (Millis s = a; s + probe_ms <= b; s += probe_ms) probes.push_back({InteractionKind::Idle, s, s + probe_ms, false});
  }
  return probes;
}

AuthOutcome authenticate_sequence(const SensorTrace& sensor, const std::vector<Interaction>& actual,
                                  const EventLog& log, const ForestModel& forest, const VoteTreeModel* vote_tree,
                                  const PipelineOptions& opts) {
  AuthOutcome out;
  out.classified = classify_sequence(sensor, actual, forest, vote_tree, opts.five_class, opts.segment);

  std::vector<bool> poisoned(actual.size(), false);
  if (opts.continuous_mode) {
    if (vote_tree == nullptr) throw Error(ErrorKind::Config, "continuous mode needs a model with a vote tree");
    const auto probes = idle_probes(log, actual, opts.extractor, opts.probe_ms);
    const auto segs = segment(sensor, probes, opts.segment);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      ProbeOutcome po;
      po.probe = probes[i];
      po.predicted = predict5(forest, *vote_tree, featurize(segs[i]));
      po.flagged = po.predicted == InteractionKind::Typing || po.predicted == InteractionKind::Scrolling ||
                   po.predicted == InteractionKind::MKKM;
      const auto it = std::lower_bound(actual.begin(), actual.end(), probes[i].end,
                                       [](const Interaction& x, Millis t) { return x.start < t; });
      if (it != actual.end()) {
        po.attached_to = static_cast<std::size_t>(it - actual.begin());
        if (po.flagged) poisoned[*po.attached_to] = true;
      }
      out.probes.push_back(po);
    }
  }

  WindowHooks hooks;
  if (opts.continuous_mode) {
    hooks.force_fail = [&poisoned](std::size_t first, std::size_t last) {
      return std::any_of(poisoned.begin() + static_cast<std::ptrdiff_t>(first),
                         poisoned.begin() + static_cast<std::ptrdiff_t>(last) + 1, [](bool b) { return b; });
    };
  }
  out.verdict = run_session(actual, out.classified.predicted, opts.auth, hooks);
  return out;
}

AuthOutcome authenticate(const SensorTrace& sensor, const EventLog& log, const ForestModel& forest,
                         const VoteTreeModel* vote_tree, const PipelineOptions& opts) {
  return authenticate_sequence(sensor, extract_interactions(log, opts.extractor), log, forest, vote_tree, opts);
}

TrainingSet training_rows(const SessionBundle& b, const SegmentOptions& seg, bool include_extended) {
  std::vector<Interaction> chosen;
  for (const auto& it : b.truth) {
    if (include_extended || static_cast<std::size_t>(it.kind) < kBaseClassCount) chosen.push_back(it);
  }
  const auto segs = segment(b.sensor, chosen, seg);
  TrainingSet rows;
  rows.reserve(segs.size());
  for (const auto& s : segs) rows.push_back({featurize(s), s.interaction.kind, b.user_id});
  return rows;
}

}  // namespace zlab
