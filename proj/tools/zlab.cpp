// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zlab/zlab.h"

namespace {

struct Failure {
  zlab_status status;
  std::string detail;
};

void check(zlab_status s) {
  if (s != ZLAB_OK) throw Failure{s, zlab_last_error()};
}

[[noreturn]] void config_error(const std::string& what) { throw Failure{ZLAB_ERR_CONFIG, what}; }

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<zlab_config, zlab_config_free>;
using Trace = Handle<zlab_trace, zlab_trace_free>;
using Events = Handle<zlab_events, zlab_events_free>;
using Sequence = Handle<zlab_sequence, zlab_sequence_free>;
using Bundle = Handle<zlab_bundle, zlab_bundle_free>;
using Model = Handle<zlab_model, zlab_model_free>;
using Verdict = Handle<zlab_verdict, zlab_verdict_free>;
using Attacker = Handle<zlab_attacker, zlab_attacker_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  zlab_string_free(s);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure{ZLAB_ERR_IO, "cannot write " + path.string()};
    f << text;
    if (!f.flush()) throw Failure{ZLAB_ERR_IO, "cannot write " + path.string()};
  }
  std::filesystem::rename(tmp, path);
}

// Flags shared by every subcommand. Anything given on the command line is
// applied after the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> w;
  std::optional<double> m;
  std::optional<int> g;
  std::optional<double> f;
  bool strict_threshold = false;
  bool continuous_mode = false;
  bool five_class = false;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value manifest");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--w", w, "window size in interactions");
    app->add_option("--m", m, "matching threshold");
    app->add_option("--g", g, "grace period in windows");
    app->add_option("--f", f, "window overlap fraction");
    app->add_flag("--strict-threshold", strict_threshold, "require a match fraction above m");
    app->add_flag("--continuous-mode", continuous_mode, "classify the bracelet while the terminal is idle");
    app->add_flag("--five-class", five_class, "use the Idle/Upright vote classifier");
    app->add_option("--out", out, "output location");
  }

  void apply(Config& cfg) const {
    check(zlab_config_new(cfg.out()));
    if (!config.empty()) check(zlab_config_load(cfg.get(), config.c_str()));
    auto set = [&](const char* key, const std::string& value) { check(zlab_config_set(cfg.get(), key, value.c_str())); };
    if (seed) set("seed", std::to_string(*seed));
    if (w) set("w", std::to_string(*w));
    if (m) set("m", CLI::detail::to_string(*m));
    if (g) set("g", std::to_string(*g));
    if (f) set("f", CLI::detail::to_string(*f));
    if (strict_threshold) set("strict_threshold", "true");
    if (continuous_mode) set("continuous_mode", "true");
    if (five_class) set("five_class", "true");
    if (!out.empty()) set("out", out);
  }
};

std::string config_string(const Config& cfg, const char* key) {
  char* s = nullptr;
  check(zlab_config_get_string(cfg.get(), key, &s));
  return take(s);
}

std::int64_t config_int(const Config& cfg, const char* key) {
  std::int64_t v = 0;
  check(zlab_config_get_int(cfg.get(), key, &v));
  return v;
}

// Sensor and events either from a bundle directory or from explicit files.
struct TraceInputs {
  std::string bundle;
  std::string sensor;
  std::string events;

  void attach(CLI::App* app) {
    app->add_option("--bundle", bundle, "session bundle directory");
    app->add_option("--sensor", sensor, "bracelet sensor trace");
    app->add_option("--events", events, "terminal event log");
  }

  bool given() const { return !bundle.empty() || !sensor.empty() || !events.empty(); }

  void load(Trace& trace, Events& ev) const {
    if (!bundle.empty()) {
      Bundle b;
      check(zlab_bundle_load(bundle.c_str(), b.out()));
      check(zlab_bundle_trace(b.get(), trace.out()));
      check(zlab_bundle_events(b.get(), ev.out()));
      return;
    }
    if (sensor.empty() || events.empty()) config_error("need --bundle or both --sensor and --events");
    check(zlab_trace_load(sensor.c_str(), trace.out()));
    check(zlab_events_load(events.c_str(), ev.out()));
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_atomic(path, text);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"zlab: interaction-matching deauthentication lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(zlab_version()));

  Common common_generate, common_train, common_classify, common_auth, common_attack, common_eval;

  auto* gen = app.add_subcommand("generate", "write synthetic user session bundles");
  common_generate.attach(gen);
  std::optional<int> users;
  std::optional<std::int64_t> duration_s;
  gen->add_option("--users", users, "number of users");
  gen->add_option("--duration", duration_s, "session length in seconds");

  auto* train = app.add_subcommand("train", "train a model from bundles");
  common_train.attach(train);
  std::vector<std::string> train_bundles;
  std::string train_model;
  std::optional<int> trees;
  train->add_option("--bundles", train_bundles, "training bundle directories")->required();
  train->add_option("--model", train_model, "model file to write")->required();
  train->add_option("--trees", trees, "number of trees");

  auto* classify = app.add_subcommand("classify", "label an interaction sequence from bracelet data");
  common_classify.attach(classify);
  std::string classify_model, classify_seq;
  TraceInputs classify_in;
  classify->add_option("--model", classify_model, "model file")->required();
  classify_in.attach(classify);
  classify->add_option("--sequence", classify_seq, "actual interaction sequence (default: extracted from events)");

  auto* auth = app.add_subcommand("auth", "run the windowed authenticator");
  common_auth.attach(auth);
  std::string auth_model, auth_actual, auth_predicted;
  std::optional<double> rssi, reference;
  TraceInputs auth_in;
  auth->add_option("--model", auth_model, "model file");
  auth_in.attach(auth);
  auth->add_option("--actual", auth_actual, "actual sequence file (label-only mode)");
  auth->add_option("--predicted", auth_predicted, "predicted sequence file (label-only mode)");
  auth->add_option("--rssi", rssi, "bracelet signal strength in dB");
  auth->add_option("--reference", reference, "calibrated signal strength in dB");

  auto* attack = app.add_subcommand("attack", "synthesize an attacker's terminal events");
  common_attack.attach(attack);
  std::string attack_bundle, attack_strategy = "opp_keyboard", attack_profile, attack_model;
  std::vector<std::string> attack_sets;
  attack->add_option("--bundle", attack_bundle, "victim bundle directory")->required();
  attack->add_option("--strategy", attack_strategy, "naive_all, opp_keyboard, opp_all or audio_keyboard");
  attack->add_option("--profile", attack_profile, "attacker profile file");
  attack->add_option("--set", attack_sets, "field=value profile override");
  attack->add_option("--model", attack_model, "also judge the attack with this model");

  auto* eval = app.add_subcommand("eval", "run the full experiment described by a manifest");
  common_eval.attach(eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cout.flush();
    std::cerr << "error: config " << e.what() << "\n";
    return zlab_status_exit_code(ZLAB_ERR_CONFIG);
  }

  if (gen->parsed()) {
    Config cfg;
    common_generate.apply(cfg);
    if (users) check(zlab_config_set(cfg.get(), "users", std::to_string(*users).c_str()));
    if (duration_s) check(zlab_config_set(cfg.get(), "duration_s", std::to_string(*duration_s).c_str()));
    const auto dur = config_int(cfg, "duration_s");
    if (dur < 60) std::cerr << "warning: sessions shorter than 60 s give few authentication windows\n";
    const std::string out = config_string(cfg, "out");
    std::size_t n = 0;
    check(zlab_generate_users(cfg.get(), out.c_str(), &n));
    std::cout << "wrote " << n << " bundles to " << out << "\n";
    return 0;
  }

  if (train->parsed()) {
    Config cfg;
    common_train.apply(cfg);
    if (trees) check(zlab_config_set(cfg.get(), "trees", std::to_string(*trees).c_str()));
    std::vector<const char*> dirs;
    for (const auto& d : train_bundles) dirs.push_back(d.c_str());
    Model model;
    check(zlab_model_train(dirs.data(), dirs.size(), cfg.get(), config_int(cfg, "five_class") ? 1 : 0, model.out()));
    check(zlab_model_save(model.get(), train_model.c_str()));
    std::cout << "model written to " << train_model << "\n";
    return 0;
  }

  if (classify->parsed()) {
    Config cfg;
    common_classify.apply(cfg);
    Model model;
    check(zlab_model_load(classify_model.c_str(), model.out()));
    Trace trace;
    Events ev;
    classify_in.load(trace, ev);
    Sequence seq;
    if (!classify_seq.empty()) check(zlab_sequence_load(classify_seq.c_str(), seq.out()));
    else check(zlab_sequence_extract(ev.get(), cfg.get(), seq.out()));
    char* text = nullptr;
    check(zlab_classify(model.get(), trace.get(), seq.get(), config_int(cfg, "five_class") ? 1 : 0, &text));
    emit(take(text), common_classify.out);
    return 0;
  }

  if (auth->parsed()) {
    Config cfg;
    common_auth.apply(cfg);
    zlab_auth_options opts;
    check(zlab_config_auth_options(cfg.get(), &opts));
    if (rssi.has_value() != reference.has_value()) config_error("--rssi and --reference go together");
    if (rssi) {
      zlab_proximity level;
      check(zlab_proximity_level(*rssi, *reference, &level));
      double escalated = opts.m;
      check(zlab_escalate_threshold(opts.m, level, &escalated));
      const char* names[] = {"immediate", "near", "far"};
      std::cout << "proximity " << names[level] << " threshold " << CLI::detail::to_string(escalated) << "\n";
      opts.m = escalated;
    }
    Verdict verdict;
    if (!auth_actual.empty() || !auth_predicted.empty()) {
      if (auth_actual.empty() || auth_predicted.empty()) config_error("label-only mode needs --actual and --predicted");
      Sequence actual, predicted;
      check(zlab_sequence_load(auth_actual.c_str(), actual.out()));
      check(zlab_sequence_load(auth_predicted.c_str(), predicted.out()));
      check(zlab_authenticate_labels(actual.get(), predicted.get(), &opts, verdict.out()));
    } else {
      if (auth_model.empty()) config_error("--model is required unless --actual/--predicted are given");
      Model model;
      check(zlab_model_load(auth_model.c_str(), model.out()));
      Trace trace;
      Events ev;
      auth_in.load(trace, ev);
      check(zlab_authenticate(model.get(), trace.get(), ev.get(), &opts, verdict.out()));
    }
    char* report = nullptr;
    check(zlab_verdict_report(verdict.get(), &report));
    emit(take(report), common_auth.out);
    return 0;
  }

  if (attack->parsed()) {
    Config cfg;
    common_attack.apply(cfg);
    Attacker attacker;
    if (!attack_profile.empty()) check(zlab_attacker_load(attack_profile.c_str(), attacker.out()));
    else check(zlab_attacker_default(attack_strategy.c_str(), attacker.out()));
    if (!attack_profile.empty() && attack->count("--strategy")) {
      check(zlab_attacker_set(attacker.get(), "strategy", attack_strategy.c_str()));
    }
    for (const auto& kv : attack_sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) config_error("--set expects field=value, got " + kv);
      check(zlab_attacker_set(attacker.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    Bundle victim;
    check(zlab_bundle_load(attack_bundle.c_str(), victim.out()));
    Events ev;
    check(zlab_attack_apply(victim.get(), attacker.get(), static_cast<std::uint64_t>(config_int(cfg, "seed")), ev.out()));
    if (!common_attack.out.empty()) {
      check(zlab_events_save(ev.get(), common_attack.out.c_str()));
      std::cout << "attacker events written to " << common_attack.out << "\n";
    }
    if (!attack_model.empty()) {
      Model model;
      check(zlab_model_load(attack_model.c_str(), model.out()));
      Trace trace;
      check(zlab_bundle_trace(victim.get(), trace.out()));
      zlab_auth_options opts;
      check(zlab_config_auth_options(cfg.get(), &opts));
      Verdict verdict;
      check(zlab_authenticate(model.get(), trace.get(), ev.get(), &opts, verdict.out()));
      char* report = nullptr;
      check(zlab_verdict_report(verdict.get(), &report));
      std::cout << take(report);
    } else if (common_attack.out.empty()) {
      config_error("attack needs --out, --model or both");
    }
    return 0;
  }

  if (eval->parsed()) {
    Config cfg;
    common_eval.apply(cfg);
    char* report = nullptr;
    check(zlab_experiment_run(cfg.get(), &report));
    std::cout << take(report);
    std::cout << "results written to " << config_string(cfg, "out") << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::cout.flush();
    std::cerr << "error: " << zlab_status_name(f.status) << " " << f.detail << "\n";
    return zlab_status_exit_code(f.status);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cout.flush();
    std::cerr << "error: io " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: internal " << e.what() << "\n";
    return 4;
  }
}
