#include "zlab/zlab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "zlab/adversary.hpp"
#include "zlab/engine.hpp"
#include "zlab/error.hpp"
#include "zlab/experiment.hpp"
#include "zlab/kvconfig.hpp"
#include "zlab/textio.hpp"

struct zlab_trace {
  zlab::SensorTrace v;
};
struct zlab_events {
  zlab::EventLog v;
};
struct zlab_sequence {
  std::vector<zlab::Interaction> v;
};
struct zlab_bundle {
  zlab::SessionBundle v;
};
struct zlab_model {
  zlab::ForestModel forest;
  std::optional<zlab::VoteTreeModel> vote_tree;
};
struct zlab_verdict {
  zlab::SessionVerdict v;
  zlab::AuthParams params;
};
struct zlab_attacker {
  zlab::AttackerProfile v;
};
struct zlab_config {
  zlab::KvList entries;
};

namespace {

thread_local std::string g_last_error;

zlab_status status_of(zlab::ErrorKind k) {
  using zlab::ErrorKind;
  switch (k) {
    case ErrorKind::InvalidArgument: return ZLAB_ERR_INVALID_ARGUMENT;
    case ErrorKind::MalformedLine: return ZLAB_ERR_MALFORMED_LINE;
    case ErrorKind::NonMonotonicTimestamp: return ZLAB_ERR_NON_MONOTONIC_TIMESTAMP;
    case ErrorKind::EmptyTrace: return ZLAB_ERR_EMPTY_TRACE;
    case ErrorKind::InvalidTrace: return ZLAB_ERR_INVALID_TRACE;
    case ErrorKind::InsufficientClasses: return ZLAB_ERR_INSUFFICIENT_CLASSES;
    case ErrorKind::LengthMismatch: return ZLAB_ERR_LENGTH_MISMATCH;
    case ErrorKind::EmptySequence: return ZLAB_ERR_EMPTY_SEQUENCE;
    case ErrorKind::EmptyInput: return ZLAB_ERR_EMPTY_INPUT;
    case ErrorKind::TooFewPairs: return ZLAB_ERR_TOO_FEW_PAIRS;
    case ErrorKind::SameUser: return ZLAB_ERR_SAME_USER;
    case ErrorKind::Config: return ZLAB_ERR_CONFIG;
    case ErrorKind::Io: return ZLAB_ERR_IO;
    case ErrorKind::MissingArtifact: return ZLAB_ERR_MISSING_ARTIFACT;
    case ErrorKind::Internal: return ZLAB_ERR_INTERNAL;
  }
  return ZLAB_ERR_INTERNAL;
}

zlab_status fail(zlab_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename Fn>
zlab_status guard(Fn&& fn) {
  try {
    fn();
    return ZLAB_OK;
  } catch (const zlab::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ZLAB_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ZLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ZLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ZLAB_ERR_INTERNAL, "unknown exception");
  }
}

#define ZLAB_REQUIRE(cond, what)                                   \
  do {                                                             \
    if (!(cond)) return fail(ZLAB_ERR_INVALID_ARGUMENT, (what));   \
  } while (0)

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

zlab::ExperimentConfig materialize(const zlab_config* cfg) {
  auto ec = zlab::default_experiment_config();
  if (cfg) zlab::apply_manifest(ec, cfg->entries);
  return ec;
}

zlab::PipelineOptions pipeline_from(const zlab_auth_options* o) {
  zlab::PipelineOptions p;
  p.auth.w = o->w;
  p.auth.m = o->m;
  p.auth.g = o->g;
  p.auth.f = o->f;
  p.auth.strict_threshold = o->strict_threshold != 0;
  p.continuous_mode = o->continuous_mode != 0;
  p.five_class = o->five_class != 0;
  return p;
}

}  // namespace

extern "C" {

const char* zlab_status_name(zlab_status status) {
  switch (status) {
    case ZLAB_OK: return "ok";
    case ZLAB_ERR_INVALID_ARGUMENT: return zlab::error_kind_name(zlab::ErrorKind::InvalidArgument);
    case ZLAB_ERR_MALFORMED_LINE: return zlab::error_kind_name(zlab::ErrorKind::MalformedLine);
    case ZLAB_ERR_NON_MONOTONIC_TIMESTAMP: return zlab::error_kind_name(zlab::ErrorKind::NonMonotonicTimestamp);
    case ZLAB_ERR_EMPTY_TRACE: return zlab::error_kind_name(zlab::ErrorKind::EmptyTrace);
    case ZLAB_ERR_INVALID_TRACE: return zlab::error_kind_name(zlab::ErrorKind::InvalidTrace);
    case ZLAB_ERR_INSUFFICIENT_CLASSES: return zlab::error_kind_name(zlab::ErrorKind::InsufficientClasses);
    case ZLAB_ERR_LENGTH_MISMATCH: return zlab::error_kind_name(zlab::ErrorKind::LengthMismatch);
    case ZLAB_ERR_EMPTY_SEQUENCE: return zlab::error_kind_name(zlab::ErrorKind::EmptySequence);
    case ZLAB_ERR_EMPTY_INPUT: return zlab::error_kind_name(zlab::ErrorKind::EmptyInput);
    case ZLAB_ERR_TOO_FEW_PAIRS: return zlab::error_kind_name(zlab::ErrorKind::TooFewPairs);
    case ZLAB_ERR_SAME_USER: return zlab::error_kind_name(zlab::ErrorKind::SameUser);
    case ZLAB_ERR_CONFIG: return zlab::error_kind_name(zlab::ErrorKind::Config);
    case ZLAB_ERR_IO: return zlab::error_kind_name(zlab::ErrorKind::Io);
    case ZLAB_ERR_MISSING_ARTIFACT: return zlab::error_kind_name(zlab::ErrorKind::MissingArtifact);
    case ZLAB_ERR_INTERNAL: return zlab::error_kind_name(zlab::ErrorKind::Internal);
  }
  return "unknown";
}

int zlab_status_exit_code(zlab_status status) {
  switch (status) {
    case ZLAB_OK: return 0;
    case ZLAB_ERR_MALFORMED_LINE:
    case ZLAB_ERR_NON_MONOTONIC_TIMESTAMP:
    case ZLAB_ERR_EMPTY_TRACE:
    case ZLAB_ERR_INVALID_TRACE:
    case ZLAB_ERR_IO:
    case ZLAB_ERR_MISSING_ARTIFACT: return 3;
    case ZLAB_ERR_INTERNAL: return 4;
    default: return 2;
  }
}

const char* zlab_last_error(void) { return g_last_error.c_str(); }

void zlab_string_free(char* s) { std::free(s); }

const char* zlab_version(void) { return "1.0.0"; }

// ---- traces and events ----

zlab_status zlab_trace_load(const char* path, zlab_trace** out) {
  ZLAB_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new zlab_trace{zlab::load_sensor_trace(path)}; });
}

zlab_status zlab_trace_save(const zlab_trace* trace, const char* path) {
  ZLAB_REQUIRE(trace && path, "null argument");
  return guard([&] { zlab::save_sensor_trace(trace->v, path); });
}

zlab_status zlab_trace_downsample(const zlab_trace* trace, size_t keep_every, zlab_trace** out) {
  ZLAB_REQUIRE(trace && out, "null argument");
  return guard([&] { *out = new zlab_trace{zlab::downsample(trace->v, keep_every)}; });
}

zlab_status zlab_trace_info(const zlab_trace* trace, size_t* n_samples, double* rate_hz) {
  ZLAB_REQUIRE(trace, "null argument");
  if (n_samples) *n_samples = trace->v.samples.size();
  if (rate_hz) *rate_hz = trace->v.nominal_rate_hz;
  return ZLAB_OK;
}

void zlab_trace_free(zlab_trace* trace) { delete trace; }

zlab_status zlab_events_load(const char* path, zlab_events** out) {
  ZLAB_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new zlab_events{zlab::load_event_log(path)}; });
}

zlab_status zlab_events_save(const zlab_events* events, const char* path) {
  ZLAB_REQUIRE(events && path, "null argument");
  return guard([&] { zlab::save_event_log(events->v, path); });
}

void zlab_events_free(zlab_events* events) { delete events; }

zlab_status zlab_min_required_rate(int s_min, double d_min_ms, double* out_hz) {
  ZLAB_REQUIRE(out_hz, "null argument");
  return guard([&] { *out_hz = zlab::min_required_rate(zlab::SamplingSpec{s_min, d_min_ms}); });
}

// ---- sequences ----

zlab_status zlab_sequence_extract(const zlab_events* events, const zlab_config* cfg, zlab_sequence** out) {
  ZLAB_REQUIRE(events && out, "null argument");
  return guard([&] {
    const auto ec = materialize(cfg);
    *out = new zlab_sequence{zlab::extract_interactions(events->v, ec.pipeline.extractor)};
  });
}

zlab_status zlab_sequence_load(const char* path, zlab_sequence** out) {
  ZLAB_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new zlab_sequence{zlab::load_interaction_sequence(path)}; });
}

zlab_status zlab_sequence_save(const zlab_sequence* seq, const char* path) {
  ZLAB_REQUIRE(seq && path, "null argument");
  return guard([&] { zlab::save_interaction_sequence(seq->v, path); });
}

zlab_status zlab_sequence_to_text(const zlab_sequence* seq, char** out) {
  ZLAB_REQUIRE(seq && out, "null argument");
  return guard([&] { *out = dup_string(zlab::serialize_interaction_sequence(seq->v)); });
}

size_t zlab_sequence_size(const zlab_sequence* seq) { return seq ? seq->v.size() : 0; }

void zlab_sequence_free(zlab_sequence* seq) { delete seq; }

// ---- configuration ----

zlab_status zlab_config_new(zlab_config** out) {
  ZLAB_REQUIRE(out, "null argument");
  return guard([&] { *out = new zlab_config{}; });
}

zlab_status zlab_config_load(zlab_config* cfg, const char* path) {
  ZLAB_REQUIRE(cfg && path, "null argument");
  return guard([&] {
    const std::filesystem::path p = path;
    if (!std::filesystem::exists(p)) throw zlab::Error(zlab::ErrorKind::MissingArtifact, "config " + p.string());
    auto entries = zlab::load_kv(p);
    // Profile files are named relative to the manifest; pin them now.
    for (auto& e : entries) {
      if (e.key.rfind("profile_file.", 0) == 0 && std::filesystem::path(e.value).is_relative()) {
        e.value = (p.parent_path() / e.value).string();
      }
    }
    zlab_config trial = *cfg;
    trial.entries.insert(trial.entries.end(), entries.begin(), entries.end());
    (void)materialize(&trial);
    cfg->entries = std::move(trial.entries);
  });
}

zlab_status zlab_config_set(zlab_config* cfg, const char* key, const char* value) {
  ZLAB_REQUIRE(cfg && key && value, "null argument");
  return guard([&] {
    zlab_config trial = *cfg;
    trial.entries.push_back({key, value, 0});
    (void)materialize(&trial);
    cfg->entries = std::move(trial.entries);
  });
}

zlab_status zlab_config_get_int(const zlab_config* cfg, const char* key, int64_t* out) {
  ZLAB_REQUIRE(key && out, "null argument");
  return guard([&] {
    const auto ec = materialize(cfg);
    const std::string k = key;
    if (k == "users") *out = ec.users;
    else if (k == "duration_s") *out = ec.duration_ms / 1000;
    else if (k == "duration_ms") *out = ec.duration_ms;
    else if (k == "seed") *out = static_cast<int64_t>(ec.seed);
    else if (k == "trees") *out = ec.n_trees;
    else if (k == "w") *out = ec.pipeline.auth.w;
    else if (k == "g") *out = ec.pipeline.auth.g;
    else if (k == "strict_threshold") *out = ec.pipeline.auth.strict_threshold;
    else if (k == "continuous_mode") *out = ec.pipeline.continuous_mode;
    else if (k == "five_class") *out = ec.pipeline.five_class;
    else throw zlab::Error(zlab::ErrorKind::Config, "no integer setting " + k);
  });
}

zlab_status zlab_config_get_string(const zlab_config* cfg, const char* key, char** out) {
  ZLAB_REQUIRE(key && out, "null argument");
  return guard([&] {
    const auto ec = materialize(cfg);
    const std::string k = key;
    if (k == "out") {
      *out = dup_string(ec.out.string());
      return;
    }
    if (cfg) {
      for (auto it = cfg->entries.rbegin(); it != cfg->entries.rend(); ++it) {
        if (it->key == k) {
          *out = dup_string(it->value);
          return;
        }
      }
    }
    throw zlab::Error(zlab::ErrorKind::Config, "setting " + k + " is not set");
  });
}

void zlab_config_free(zlab_config* cfg) { delete cfg; }

// ---- bundles ----

zlab_status zlab_bundle_generate(const char* user_id, int64_t duration_ms, uint64_t seed, zlab_bundle** out) {
  ZLAB_REQUIRE(user_id && out, "null argument");
  return guard([&] {
    zlab::UserProfile p;
    p.user_id = user_id;
    *out = new zlab_bundle{zlab::generate_session(p, duration_ms, seed)};
  });
}

zlab_status zlab_bundle_load(const char* dir, zlab_bundle** out) {
  ZLAB_REQUIRE(dir && out, "null argument");
  return guard([&] { *out = new zlab_bundle{zlab::load_bundle(dir)}; });
}

zlab_status zlab_bundle_save(const zlab_bundle* bundle, const char* dir) {
  ZLAB_REQUIRE(bundle && dir, "null argument");
  return guard([&] { zlab::save_bundle(bundle->v, dir); });
}

zlab_status zlab_bundle_trace(const zlab_bundle* bundle, zlab_trace** out) {
  ZLAB_REQUIRE(bundle && out, "null argument");
  return guard([&] { *out = new zlab_trace{bundle->v.sensor}; });
}

zlab_status zlab_bundle_events(const zlab_bundle* bundle, zlab_events** out) {
  ZLAB_REQUIRE(bundle && out, "null argument");
  return guard([&] { *out = new zlab_events{bundle->v.events}; });
}

void zlab_bundle_free(zlab_bundle* bundle) { delete bundle; }

zlab_status zlab_generate_users(const zlab_config* cfg, const char* out_dir, size_t* n_written) {
  ZLAB_REQUIRE(out_dir, "null argument");
  return guard([&] {
    const auto ec = materialize(cfg);
    const auto sessions = zlab::generate_users(ec.users, ec.duration_ms, ec.seed);
    const std::filesystem::path root = out_dir;
    for (const auto& s : sessions) zlab::save_bundle(s, root / s.user_id);
    if (n_written) *n_written = sessions.size();
  });
}

// ---- classifier ----

zlab_status zlab_model_train(const char* const* bundle_dirs, size_t n_dirs, const zlab_config* cfg, int five_class,
                             zlab_model** out) {
  ZLAB_REQUIRE(bundle_dirs && out, "null argument");
  ZLAB_REQUIRE(n_dirs > 0, "no training bundles");
  return guard([&] {
    const auto ec = materialize(cfg);
    zlab::TrainingSet all;
    for (size_t i = 0; i < n_dirs; ++i) {
      const auto b = zlab::load_bundle(bundle_dirs[i]);
      auto rows = zlab::training_rows(b, ec.pipeline.segment, five_class != 0);
      all.insert(all.end(), rows.begin(), rows.end());
    }
    zlab::TrainingSet base;
    for (const auto& r : all) {
      if (static_cast<std::size_t>(r.label) < zlab::kBaseClassCount) base.push_back(r);
    }
    zlab::ForestOptions fo;
    fo.n_trees = ec.n_trees;
    auto m = std::make_unique<zlab_model>();
    m->forest = zlab::train_forest(base, ec.seed, fo);
    if (five_class) m->vote_tree = zlab::train_vote_tree(m->forest, all);
    *out = m.release();
  });
}

zlab_status zlab_model_load(const char* path, zlab_model** out) {
  ZLAB_REQUIRE(path && out, "null argument");
  return guard([&] {
    auto [forest, vt] = zlab::load_model(path);
    *out = new zlab_model{std::move(forest), std::move(vt)};
  });
}

zlab_status zlab_model_save(const zlab_model* model, const char* path) {
  ZLAB_REQUIRE(model && path, "null argument");
  return guard([&] { zlab::save_model(path, model->forest, model->vote_tree ? &*model->vote_tree : nullptr); });
}

int zlab_model_has_vote_tree(const zlab_model* model) { return model && model->vote_tree ? 1 : 0; }

void zlab_model_free(zlab_model* model) { delete model; }

zlab_status zlab_classify(const zlab_model* model, const zlab_trace* trace, const zlab_sequence* actual,
                          int five_class, char** out) {
  ZLAB_REQUIRE(model && trace && actual && out, "null argument");
  return guard([&] {
    const auto c = zlab::classify_sequence(trace->v, actual->v, model->forest,
                                           model->vote_tree ? &*model->vote_tree : nullptr, five_class != 0);
    std::string s;
    for (std::size_t i = 0; i < c.actual.size(); ++i) {
      zlab::textio::append_int(s, c.actual[i].start);
      s += ' ';
      zlab::textio::append_int(s, c.actual[i].end);
      s += ' ';
      s += zlab::interaction_token(c.predicted[i]);
      for (int v : c.votes[i]) {
        s += ' ';
        zlab::textio::append_int(s, v);
      }
      s += '\n';
    }
    *out = dup_string(s);
  });
}

// ---- authenticator ----

void zlab_auth_options_default(zlab_auth_options* opts) {
  if (!opts) return;
  const zlab::AuthParams p;
  opts->w = p.w;
  opts->m = p.m;
  opts->g = p.g;
  opts->f = p.f;
  opts->strict_threshold = p.strict_threshold ? 1 : 0;
  opts->continuous_mode = 0;
  opts->five_class = 0;
}

zlab_status zlab_config_auth_options(const zlab_config* cfg, zlab_auth_options* out) {
  ZLAB_REQUIRE(out, "null argument");
  return guard([&] {
    const auto ec = materialize(cfg);
    out->w = ec.pipeline.auth.w;
    out->m = ec.pipeline.auth.m;
    out->g = ec.pipeline.auth.g;
    out->f = ec.pipeline.auth.f;
    out->strict_threshold = ec.pipeline.auth.strict_threshold;
    out->continuous_mode = ec.pipeline.continuous_mode;
    out->five_class = ec.pipeline.five_class;
  });
}

zlab_status zlab_authenticate(const zlab_model* model, const zlab_trace* trace, const zlab_events* events,
                              const zlab_auth_options* opts, zlab_verdict** out) {
  ZLAB_REQUIRE(model && trace && events && opts && out, "null argument");
  return guard([&] {
    const auto p = pipeline_from(opts);
    const auto res =
        zlab::authenticate(trace->v, events->v, model->forest, model->vote_tree ? &*model->vote_tree : nullptr, p);
    *out = new zlab_verdict{res.verdict, p.auth};
  });
}

zlab_status zlab_authenticate_labels(const zlab_sequence* actual, const zlab_sequence* predicted,
                                     const zlab_auth_options* opts, zlab_verdict** out) {
  ZLAB_REQUIRE(actual && predicted && opts && out, "null argument");
  return guard([&] {
    const auto kinds = zlab::kinds_of(predicted->v);
    const auto p = pipeline_from(opts).auth;
    *out = new zlab_verdict{zlab::run_session(actual->v, kinds, p), p};
  });
}

zlab_status zlab_verdict_report(const zlab_verdict* verdict, char** out) {
  ZLAB_REQUIRE(verdict && out, "null argument");
  return guard([&] { *out = dup_string(zlab::format_verdict_report(verdict->v, verdict->params)); });
}

zlab_status zlab_verdict_summary(const zlab_verdict* verdict, size_t* windows, size_t* passes, size_t* deauth_window,
                                 int64_t* deauth_time_ms) {
  ZLAB_REQUIRE(verdict, "null argument");
  const auto& v = verdict->v;
  if (windows) *windows = v.windows.size();
  if (passes) {
    *passes = 0;
    for (const auto& w : v.windows) *passes += w.outcome == zlab::WindowOutcome::Pass ? 1 : 0;
  }
  if (deauth_window) *deauth_window = v.deauth_window.value_or(0);
  if (deauth_time_ms) *deauth_time_ms = v.deauth_time_ms.value_or(-1);
  return ZLAB_OK;
}

void zlab_verdict_free(zlab_verdict* verdict) { delete verdict; }

zlab_status zlab_proximity_level(double rssi_db, double reference_db, zlab_proximity* out) {
  ZLAB_REQUIRE(out, "null argument");
  return guard([&] { *out = static_cast<zlab_proximity>(zlab::proximity_level(rssi_db, reference_db)); });
}

zlab_status zlab_escalate_threshold(double base_m, zlab_proximity level, double* out) {
  ZLAB_REQUIRE(out, "null argument");
  ZLAB_REQUIRE(level >= ZLAB_PROXIMITY_IMMEDIATE && level <= ZLAB_PROXIMITY_FAR, "unknown proximity level");
  return guard([&] { *out = zlab::escalate_threshold(base_m, static_cast<zlab::ProximityLevel>(level)); });
}

// ---- attackers ----

zlab_status zlab_attacker_default(const char* strategy, zlab_attacker** out) {
  ZLAB_REQUIRE(strategy && out, "null argument");
  return guard([&] {
    zlab::Strategy s;
    try {
      s = zlab::parse_strategy(strategy);
    } catch (const zlab::Error& e) {
      throw zlab::Error(zlab::ErrorKind::Config, e.what());
    }
    *out = new zlab_attacker{zlab::default_attacker(s)};
  });
}

zlab_status zlab_attacker_load(const char* path, zlab_attacker** out) {
  ZLAB_REQUIRE(path && out, "null argument");
  return guard([&] { *out = new zlab_attacker{zlab::load_attacker_profile(path)}; });
}

zlab_status zlab_attacker_set(zlab_attacker* attacker, const char* field, const char* value) {
  ZLAB_REQUIRE(attacker && field && value, "null argument");
  return guard([&] {
    zlab::AttackerProfile trial = attacker->v;
    if (!zlab::set_attacker_field(trial, field, value)) {
      throw zlab::Error(zlab::ErrorKind::Config, std::string("unknown attacker field ") + field);
    }
    zlab::validate(trial);
    attacker->v = trial;
  });
}

zlab_status zlab_attacker_to_text(const zlab_attacker* attacker, char** out) {
  ZLAB_REQUIRE(attacker && out, "null argument");
  return guard([&] { *out = dup_string(zlab::serialize_attacker_profile(attacker->v)); });
}

void zlab_attacker_free(zlab_attacker* attacker) { delete attacker; }

zlab_status zlab_attack_apply(const zlab_bundle* victim, const zlab_attacker* attacker, uint64_t seed,
                              zlab_events** out) {
  ZLAB_REQUIRE(victim && attacker && out, "null argument");
  return guard([&] { *out = new zlab_events{zlab::apply_attack(victim->v, attacker->v, seed)}; });
}

// ---- experiment ----

zlab_status zlab_experiment_run(const zlab_config* cfg, char** report) {
  return guard([&] {
    const auto ec = materialize(cfg);
    const auto summary = zlab::run_experiment(ec);
    if (report) *report = dup_string(summary.report);
  });
}

}  // extern "C"
