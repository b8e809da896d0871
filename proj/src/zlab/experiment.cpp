#include "zlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "zlab/error.hpp"
#include "zlab/parallel.hpp"
#include "zlab/rng.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void bad_entry(const KvEntry& e, const std::string& why) {
  throw Error(ErrorKind::Config, "line " + std::to_string(e.line) + ": " + e.key + ": " + why, e.line);
}

std::int64_t list_int(const KvEntry& e, const std::string& token) {
  const auto v = textio::parse_int(token);
  if (!v) bad_entry(e, "not an integer: " + token);
  return *v;
}

ManifestRow parse_row(const KvEntry& e) {
  std::istringstream in(e.value);
  std::string seed, strat, w, m, g;
  if (!(in >> seed >> strat >> w >> m >> g)) bad_entry(e, "expected 'victim_seed strategy w m g'");
  ManifestRow row;
  const auto s = textio::parse_int(seed);
  const auto wi = textio::parse_int(w);
  const auto md = textio::parse_double(m);
  const auto gi = textio::parse_int(g);
  if (!s || *s < 0 || !wi || !md || !gi) bad_entry(e, "malformed row");
  row.victim_seed = static_cast<std::uint64_t>(*s);
  try {
    row.strategy = parse_strategy(strat);
  } catch (const Error&) {
    bad_entry(e, "unknown strategy " + strat);
  }
  row.w = static_cast<int>(*wi);
  row.m = *md;
  row.g = static_cast<int>(*gi);
  AuthParams p;
  p.w = row.w;
  p.m = row.m;
  p.g = row.g;
  try {
    validate(p);
  } catch (const Error& err) {
    bad_entry(e, err.what());
  }
  return row;
}

AttackerProfile& attacker_slot(ExperimentConfig& cfg, Strategy s) {
  auto it = cfg.attackers.find(s);
  if (it == cfg.attackers.end()) it = cfg.attackers.emplace(s, default_attacker(s)).first;
  return it->second;
}

std::vector<LabelledSession> labelled(const std::vector<AuthOutcome>& outs) {
  std::vector<LabelledSession> ls;
  ls.reserve(outs.size());
  for (const auto& o : outs) ls.push_back({o.classified.actual, o.classified.predicted});
  return ls;
}

std::vector<SessionVerdict> verdicts_of(const std::vector<AuthOutcome>& outs) {
  std::vector<SessionVerdict> v;
  v.reserve(outs.size());
  for (const auto& o : outs) v.push_back(o.verdict);
  return v;
}

const VoteTreeModel* vote_tree_for(const Lab& lab, std::size_t u) {
  return lab.vote_trees.empty() ? nullptr : &lab.vote_trees[u];
}

constexpr std::array<Strategy, 4> kStrategies{Strategy::NaiveAll, Strategy::OppKeyboard, Strategy::AudioKeyboard,
                                              Strategy::OppAll};

struct OutputSink {
  std::filesystem::path root;
  std::string records;

  void record(const json& j) { records += j.dump() + "\n"; }

  void series(const std::string& name, const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    std::string s = "# " + header + "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += '\t';
        s += r[i];
      }
      s += '\n';
    }
    textio::write_file_atomic(root / "series" / name, s);
  }
};

void write_grid(OutputSink& out, const std::string& suite, const std::vector<GridCell>& grid) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : grid) {
    rows.push_back({std::to_string(c.w), textio::format_double(c.m), textio::format_double(c.rates.rate)});
    out.record({{"record", "grid"},
                {"suite", suite},
                {"w", c.w},
                {"m", c.m},
                {"windows", c.rates.windows},
                {"fails", c.rates.fails},
                {"passes", c.rates.passes},
                {"rate", c.rates.rate}});
  }
  out.series(suite + "_grid.tsv", "w\tm\trate", rows);
}

void write_survival(OutputSink& out, const std::string& suite, const std::vector<SessionVerdict>& verdicts,
                    double max_windows, double max_minutes) {
  for (const auto axis : {SurvivalAxis::Windows, SurvivalAxis::Minutes}) {
    const bool win = axis == SurvivalAxis::Windows;
    const auto curve = survival_curve(verdicts, axis, win ? max_windows : max_minutes, win ? 1.0 : 0.25);
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : curve) rows.push_back({textio::format_double(p.x), textio::format_double(p.fraction)});
    out.series(suite + (win ? "_survival_windows.tsv" : "_survival_minutes.tsv"),
               win ? "window\tlogged_in" : "minute\tlogged_in", rows);
  }
}

std::string grid_table(const std::vector<GridCell>& grid, const std::vector<double>& ms) {
  std::vector<std::string> header{"w"};
  for (double m : ms) header.push_back("m=" + fixed(m, 2));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < grid.size(); i += ms.size()) {
    std::vector<std::string> r{std::to_string(grid[i].w)};
    for (std::size_t j = 0; j < ms.size(); ++j) r.push_back(fixed(grid[i + j].rates.rate));
    rows.push_back(r);
  }
  return format_table(header, rows);
}

std::size_t count_deauth(const std::vector<SessionVerdict>& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const auto& x) { return x.deauth_window.has_value(); }));
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  for (Strategy s : kStrategies) cfg.attackers.emplace(s, default_attacker(s));
  return cfg;
}

void apply_manifest(ExperimentConfig& cfg, const KvList& entries, const std::filesystem::path& base_dir) {
  for (const auto& e : entries) {
    const std::string& k = e.key;
    if (k == "users") {
      const auto v = kv_int(e);
      if (v < 2) bad_entry(e, "need at least 2 users");
      cfg.users = static_cast<int>(v);
    } else if (k == "duration_s") {
      const auto v = kv_int(e);
      if (v < 10) bad_entry(e, "duration must be at least 10 s");
      cfg.duration_ms = v * 1000;
    } else if (k == "seed") {
      cfg.seed = kv_u64(e);
    } else if (k == "trees") {
      const auto v = kv_int(e);
      if (v < 1) bad_entry(e, "need at least one tree");
      cfg.n_trees = static_cast<int>(v);
    } else if (k == "w") {
      cfg.pipeline.auth.w = static_cast<int>(kv_int(e));
    } else if (k == "m") {
      cfg.pipeline.auth.m = kv_double(e);
    } else if (k == "g") {
      cfg.pipeline.auth.g = static_cast<int>(kv_int(e));
    } else if (k == "f") {
      cfg.pipeline.auth.f = kv_double(e);
    } else if (k == "strict_threshold") {
      cfg.pipeline.auth.strict_threshold = kv_bool(e);
    } else if (k == "continuous_mode") {
      cfg.pipeline.continuous_mode = kv_bool(e);
    } else if (k == "five_class") {
      cfg.pipeline.five_class = kv_bool(e);
    } else if (k == "lowpass_gravity") {
      cfg.pipeline.segment.lowpass_gravity = kv_bool(e);
    } else if (k == "out") {
      if (e.value.empty()) bad_entry(e, "empty path");
      cfg.out = e.value;
    } else if (k == "desync_shifts") {
      cfg.desync_shifts.clear();
      for (const auto& t : split_list(e.value)) {
        const auto v = list_int(e, t);
        if (v < 0) bad_entry(e, "shift must be >= 0");
        cfg.desync_shifts.push_back(v);
      }
    } else if (k == "sweep_rates") {
      cfg.sweep_rates_hz.clear();
      for (const auto& t : split_list(e.value)) {
        const auto v = list_int(e, t);
        if (v <= 0 || v > 200 || 200 % v != 0) bad_entry(e, "rate must divide 200 Hz");
        cfg.sweep_rates_hz.push_back(static_cast<int>(v));
      }
    } else if (k == "row") {
      cfg.rows.push_back(parse_row(e));
    } else if (k.rfind("profile_file.", 0) == 0) {
      Strategy s;
      try {
        s = parse_strategy(k.substr(13));
      } catch (const Error&) {
        bad_entry(e, "unknown strategy");
      }
      std::filesystem::path p = e.value;
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      auto prof = load_attacker_profile(p);
      prof.strategy = s;
      cfg.attackers[s] = prof;
    } else if (k.rfind("profile.", 0) == 0) {
      const auto dot = k.find('.', 8);
      if (dot == std::string::npos) bad_entry(e, "expected profile.<strategy>.<field>");
      Strategy s;
      try {
        s = parse_strategy(k.substr(8, dot - 8));
      } catch (const Error&) {
        bad_entry(e, "unknown strategy");
      }
      auto& prof = attacker_slot(cfg, s);
      try {
        if (!set_attacker_field(prof, k.substr(dot + 1), e.value)) bad_entry(e, "unknown attacker field");
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::Config && err.line() != 0) throw;
        bad_entry(e, err.what());
      }
      try {
        validate(prof);
      } catch (const Error& err) {
        bad_entry(e, err.what());
      }
    } else {
      bad_entry(e, "unknown key");
    }
  }
  try {
    validate(cfg.pipeline.auth);
    validate(cfg.pipeline.extractor);
    for (const auto& [s, p] : cfg.attackers) validate(p);
  } catch (const Error& err) {
    throw Error(ErrorKind::Config, err.what());
  }
}

std::vector<SessionBundle> generate_users(int n, Millis duration_ms, std::uint64_t seed, const UserProfile& base) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one user");
  std::vector<SessionBundle> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), 0, [&](std::size_t u) {
    UserProfile p = base;
    char id[32];
    std::snprintf(id, sizeof id, "user%02zu", u + 1);
    p.user_id = id;
    out[u] = generate_session(p, duration_ms, derive_seed(seed, u + 1));
  });
  return out;
}

Lab build_lab(std::vector<SessionBundle> sessions, std::uint64_t seed, int n_trees, bool with_vote_trees) {
  Lab lab;
  lab.sessions = std::move(sessions);
  const std::size_t n = lab.sessions.size();
  std::vector<TrainingSet> per_user(n);
  parallel_for(n, 0, [&](std::size_t u) { per_user[u] = training_rows(lab.sessions[u], {}, with_vote_trees); });

  TrainingSet base;
  for (const auto& rows : per_user) {
    for (const auto& r : rows) {
      if (static_cast<std::size_t>(r.label) < kBaseClassCount) base.push_back(r);
    }
  }
  ForestOptions fo;
  fo.n_trees = n_trees;
  auto models = leave_one_user_out(base, seed, fo);
  // leave_one_user_out orders by user id; map back to session order.
  for (const auto& s : lab.sessions) {
    const auto it = std::find_if(models.begin(), models.end(), [&](const auto& m) { return m.first == s.user_id; });
    if (it == models.end()) throw Error(ErrorKind::Internal, "no held-out model for " + s.user_id);
    lab.models.push_back(it->second);
  }

  if (with_vote_trees) {
    lab.vote_trees.resize(n);
    parallel_for(n, 0, [&](std::size_t u) {
      TrainingSet data5;
      for (std::size_t v = 0; v < n; ++v) {
        if (v != u) data5.insert(data5.end(), per_user[v].begin(), per_user[v].end());
      }
      lab.vote_trees[u] = train_vote_tree(lab.models[u], data5);
    });
  }
  return lab;
}

std::vector<AuthOutcome> legit_outcomes(const Lab& lab, const PipelineOptions& opts) {
  std::vector<AuthOutcome> out(lab.sessions.size());
  parallel_for(out.size(), 0, [&](std::size_t u) {
    const auto& s = lab.sessions[u];
    out[u] = authenticate(s.sensor, s.events, lab.models[u], vote_tree_for(lab, u), opts);
  });
  return out;
}

std::vector<SessionVerdict> mismatch_verdicts(const Lab& lab, const PipelineOptions& opts) {
  const std::size_t n = lab.sessions.size();
  std::vector<SessionVerdict> out(n * (n - 1));
  parallel_for(out.size(), 0, [&](std::size_t k) {
    const std::size_t a = k / (n - 1);
    std::size_t b = k % (n - 1);
    if (b >= a) ++b;
    const auto pair = mismatch_pair(lab.sessions[a], lab.sessions[b], opts.extractor);
    const auto c = classify_sequence(pair.sensor, pair.actual, lab.models[b], vote_tree_for(lab, b), opts.five_class,
                                     opts.segment);
    out[k] = c.actual.empty() ? SessionVerdict{} : run_session(c.actual, c.predicted, opts.auth);
  });
  return out;
}

std::vector<AuthOutcome> attack_outcomes(const Lab& lab, const AttackerProfile& attacker, std::uint64_t seed,
                                         const PipelineOptions& opts) {
  std::vector<AuthOutcome> out(lab.sessions.size());
  parallel_for(out.size(), 0, [&](std::size_t u) {
    const auto& s = lab.sessions[u];
    const auto log = apply_attack(s, attacker, derive_seed(seed, u), opts.extractor);
    out[u] = authenticate(s.sensor, log, lab.models[u], vote_tree_for(lab, u), opts);
  });
  return out;
}

std::vector<LabelledSession> desync_sessions(const Lab& lab, Millis shift_ms, const PipelineOptions& opts) {
  std::vector<LabelledSession> out(lab.sessions.size());
  parallel_for(out.size(), 0, [&](std::size_t u) {
    const auto shifted = desync(lab.sessions[u], shift_ms);
    const auto actual = extract_interactions(shifted.events, opts.extractor);
    auto c = classify_sequence(shifted.sensor, actual, lab.models[u], vote_tree_for(lab, u), opts.five_class,
                               opts.segment);
    out[u] = {std::move(c.actual), std::move(c.predicted)};
  });
  return out;
}

std::vector<RateSweepPoint> sampling_rate_sweep(const std::vector<SessionBundle>& sessions,
                                                const std::vector<int>& rates_hz, std::uint64_t seed, int n_trees) {
  if (sessions.size() < 2) throw Error(ErrorKind::InvalidArgument, "sweep needs at least two sessions");
  const std::size_t n_train =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(sessions.size()))), 1,
                              sessions.size() - 1);
  std::vector<RateSweepPoint> out;
  for (int rate : rates_hz) {
    const double base = sessions.front().sensor.nominal_rate_hz;
    const double ratio = base / rate;
    const auto keep = static_cast<std::size_t>(std::lround(ratio));
    if (rate <= 0 || keep < 1 || std::abs(ratio - static_cast<double>(keep)) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "rate " + std::to_string(rate) + " Hz does not divide the sensor rate");
    }
    std::vector<SessionBundle> reduced(sessions.size());
    parallel_for(sessions.size(), 0, [&](std::size_t u) {
      reduced[u] = sessions[u];
      reduced[u].sensor = downsample(sessions[u].sensor, keep);
    });
    TrainingSet train;
    for (std::size_t u = 0; u < n_train; ++u) {
      auto rows = training_rows(reduced[u]);
      train.insert(train.end(), rows.begin(), rows.end());
    }
    ForestOptions fo;
    fo.n_trees = n_trees;
    const auto model = train_forest(train, seed, fo);

    RateSweepPoint pt;
    pt.rate_hz = rate;
    std::size_t correct = 0;
    for (std::size_t u = n_train; u < sessions.size(); ++u) {
      std::vector<Interaction> base_truth;
      for (const auto& it : reduced[u].truth) {
        if (static_cast<std::size_t>(it.kind) < kBaseClassCount) base_truth.push_back(it);
      }
      const auto segs = segment(reduced[u].sensor, base_truth);
      for (const auto& sg : segs) {
        ++pt.segments;
        if (predict3(model, featurize(sg)).kind == sg.interaction.kind) ++correct;
        if (sg.interaction.duration() < 100) {
          ++pt.short_segments;
          if (sg.sparse) ++pt.short_sparse;
        }
      }
    }
    pt.accuracy = pt.segments ? static_cast<double>(correct) / static_cast<double>(pt.segments) : 0.0;
    out.push_back(pt);
  }
  return out;
}

double mean_survival(const std::vector<SessionVerdict>& verdicts, int max_window) {
  if (max_window < 0) throw Error(ErrorKind::InvalidArgument, "max_window must be >= 0");
  double s = 0.0;
  for (int x = 0; x <= max_window; ++x) s += survival_at(verdicts, SurvivalAxis::Windows, x);
  return s / static_cast<double>(max_window + 1);
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  validate(cfg.pipeline.auth);
  ExperimentSummary sum;
  OutputSink out{cfg.out, {}};
  std::filesystem::create_directories(cfg.out / "series");

  const PipelineOptions& opts = cfg.pipeline;
  const bool need_vote_trees = opts.five_class || opts.continuous_mode;
  Lab lab = build_lab(generate_users(cfg.users, cfg.duration_ms, cfg.seed), derive_seed(cfg.seed, 0x7ee5),
                      cfg.n_trees, need_vote_trees);
  const auto ws = default_window_sizes();
  const auto ms = default_thresholds();
  const double max_minutes = static_cast<double>(cfg.duration_ms) / 60000.0;
  std::string& rep = sum.report;

  auto with_g = [&](int g) {
    PipelineOptions o = opts;
    o.auth.g = g;
    return o;
  };

  // Legitimate users.
  const auto legit = legit_outcomes(lab, opts);
  const auto legit_v = verdicts_of(legit);
  const auto legit_l = labelled(legit);
  sum.fnr = window_rates(legit_v, Polarity::Legit).rate;
  sum.legit_deauth_g1 = count_deauth(verdicts_of(legit_outcomes(lab, with_g(1))));
  const auto legit_g2 = verdicts_of(legit_outcomes(lab, with_g(2)));
  sum.legit_deauth_g2 = count_deauth(legit_g2);
  sum.legit_survival_w10 = survival_at(legit_g2, SurvivalAxis::Windows, 10);
  {
    std::vector<InteractionKind> truth, pred;
    for (const auto& o : legit) {
      for (std::size_t i = 0; i < o.classified.actual.size(); ++i) {
        truth.push_back(o.classified.actual[i].kind);
        pred.push_back(o.classified.predicted[i]);
      }
    }
    const std::size_t k = opts.five_class ? std::size_t{5} : kBaseClassCount;
    const auto cm = confusion_matrix(truth, pred, k);
    std::vector<std::string> header{"truth\\pred"};
    for (std::size_t j = 0; j < k; ++j) header.push_back(interaction_token(static_cast<InteractionKind>(j)));
    header.push_back("precision");
    header.push_back("recall");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::string> r{interaction_token(static_cast<InteractionKind>(i))};
      for (std::size_t j = 0; j < k; ++j) r.push_back(std::to_string(cm.at(i, j)));
      r.push_back(fixed(cm.precision(i)));
      r.push_back(fixed(cm.recall(i)));
      rows.push_back(r);
      out.record({{"record", "confusion"},
                   {"class", interaction_token(static_cast<InteractionKind>(i))},
                   {"precision", cm.precision(i)},
                   {"recall", cm.recall(i)}});
    }
    rep += "== legitimate users: confusion matrix (accuracy " + fixed(cm.accuracy()) + ")\n" +
           format_table(header, rows) + "\n";
  }
  const auto fnr_grid = rate_grid(legit_l, Polarity::Legit, ws, ms, opts.auth.f, opts.auth.strict_threshold);
  write_grid(out, "fnr", fnr_grid);
  write_survival(out, "legit", legit_v, 40, max_minutes);
  rep += "== legitimate users: FNR by window size\n" + grid_table(fnr_grid, ms);
  rep += "FNR at w=" + std::to_string(opts.auth.w) + " m=" + fixed(opts.auth.m, 2) + ": " + fixed(sum.fnr) +
         "; sessions deauthenticated g=1: " + std::to_string(sum.legit_deauth_g1) +
         ", g=2: " + std::to_string(sum.legit_deauth_g2) + " of " + std::to_string(lab.sessions.size()) + "\n\n";
  out.record({{"record", "legit"},
              {"fnr", sum.fnr},
              {"deauth_g1", sum.legit_deauth_g1},
              {"deauth_g2", sum.legit_deauth_g2},
              {"sessions", lab.sessions.size()}});

  // Innocent adversary.
  const auto mismatch = mismatch_verdicts(lab, with_g(2));
  sum.mismatch_survival_w10 = survival_at(mismatch, SurvivalAxis::Windows, 10);
  {
    // Labels from the g=2 runs cover every window up to deauth; the grid needs full sessions.
    std::vector<LabelledSession> mm_l(mismatch.size());
    const std::size_t n = lab.sessions.size();
    parallel_for(mm_l.size(), 0, [&](std::size_t k) {
      const std::size_t a = k / (n - 1);
      std::size_t b = k % (n - 1);
      if (b >= a) ++b;
      const auto pair = mismatch_pair(lab.sessions[a], lab.sessions[b], opts.extractor);
      auto c = classify_sequence(pair.sensor, pair.actual, lab.models[b], vote_tree_for(lab, b), opts.five_class,
                                 opts.segment);
      mm_l[k] = {std::move(c.actual), std::move(c.predicted)};
    });
    const auto tnr_grid = rate_grid(mm_l, Polarity::Wrong, ws, ms, opts.auth.f, opts.auth.strict_threshold);
    write_grid(out, "tnr", tnr_grid);
    rep += "== mismatched users: TNR by window size\n" + grid_table(tnr_grid, ms);
  }
  write_survival(out, "mismatch", mismatch, 40, max_minutes);
  rep += "mismatched pairs still logged in after 10 windows (g=2): " + fixed(sum.mismatch_survival_w10) +
         " (legitimate: " + fixed(sum.legit_survival_w10) + ")\n\n";
  out.record({{"record", "mismatch"},
              {"pairs", mismatch.size()},
              {"survival_w10", sum.mismatch_survival_w10},
              {"legit_survival_w10", sum.legit_survival_w10}});

  // Desynchronisation.
  {
    std::vector<std::vector<std::string>> rows;
    for (Millis shift : cfg.desync_shifts) {
      const auto grid = rate_grid(desync_sessions(lab, shift, opts), Polarity::Legit, ws, ms, opts.auth.f,
                                  opts.auth.strict_threshold);
      const double fail = mean_rate(grid);
      sum.desync_fail.emplace_back(shift, fail);
      rows.push_back({std::to_string(shift), fixed(fail)});
      out.record({{"record", "desync"}, {"shift_ms", shift}, {"mean_fail_fraction", fail}});
    }
    out.series("desync.tsv", "shift_ms\tmean_fail_fraction", rows);
    rep += "== desynchronisation: mean fail fraction over the w/m grid\n" +
           format_table({"shift_ms", "fail_fraction"}, rows) + "\n";
  }

  // Malicious adversaries.
  std::map<Strategy, std::vector<SessionVerdict>> attack_v;
  std::map<Strategy, std::vector<AuthOutcome>> attack_o;
  for (Strategy s : kStrategies) {
    const auto it = cfg.attackers.find(s);
    const AttackerProfile prof = it != cfg.attackers.end() ? it->second : default_attacker(s);
    attack_o[s] = attack_outcomes(lab, prof, derive_seed(cfg.seed, 0xa000 + static_cast<std::uint64_t>(s)), opts);
    attack_v[s] = verdicts_of(attack_o[s]);
  }
  int max_window = 1;
  for (const auto& [s, v] : attack_v) {
    for (const auto& x : v) max_window = std::max(max_window, static_cast<int>(x.windows_elapsed));
  }
  {
    std::vector<std::vector<std::string>> rows;
    const auto legit_fracs = window_match_fractions(legit_v);
    for (Strategy s : kStrategies) {
      const auto& v = attack_v[s];
      StrategySummary ss;
      ss.strategy = s;
      ss.fpr = window_rates(v, Polarity::Attacker).rate;
      ss.mean_survival = mean_survival(v, max_window);
      ss.deauthenticated = count_deauth(v);
      ss.deauth_windows = deauth_windows_censored(v);
      double mean_dw = 0.0;
      for (double d : ss.deauth_windows) mean_dw += d;
      mean_dw /= static_cast<double>(ss.deauth_windows.size());
      const std::string tok = strategy_token(s);
      write_grid(out, "fpr_" + tok, rate_grid(labelled(attack_o[s]), Polarity::Attacker, ws, ms, opts.auth.f,
                                              opts.auth.strict_threshold));
      write_survival(out, tok, v, max_window, max_minutes);
      const auto fracs = window_match_fractions(v);
      if (!fracs.empty() && !legit_fracs.empty()) {
        std::vector<std::vector<std::string>> roc;
        for (const auto& p : roc_points(legit_fracs, fracs)) {
          roc.push_back({textio::format_double(p.threshold), textio::format_double(p.fpr), textio::format_double(p.tpr)});
        }
        out.series("roc_" + tok + ".tsv", "threshold\tfpr\ttpr", roc);
      }
      rows.push_back({tok, fixed(ss.fpr), fixed(ss.mean_survival), std::to_string(ss.deauthenticated) + "/" +
                      std::to_string(v.size()), fixed(mean_dw, 2)});
      out.record({{"record", "attack"},
                  {"strategy", tok},
                  {"fpr", ss.fpr},
                  {"mean_survival", ss.mean_survival},
                  {"deauthenticated", ss.deauthenticated},
                  {"sessions", v.size()},
                  {"mean_censored_deauth_window", mean_dw}});
      sum.strategies.push_back(std::move(ss));
    }
    rep += "== attackers (w=" + std::to_string(opts.auth.w) + " m=" + fixed(opts.auth.m, 2) +
           " g=" + std::to_string(opts.auth.g) + ")\n" +
           format_table({"strategy", "fpr", "mean_survival", "deauthenticated", "mean_deauth_window"}, rows);
  }
  try {
    const auto& naive = sum.strategies[0].deauth_windows;
    const auto& opp = sum.strategies[1].deauth_windows;
    sum.wilcoxon = wilcoxon_signed_rank(naive, opp);
    rep += "Wilcoxon signed-rank, naive_all vs opp_keyboard deauth windows: z=" + fixed(sum.wilcoxon->z, 3) +
           " p=" + fixed(sum.wilcoxon->p, 5) + " r=" + fixed(sum.wilcoxon->r, 3) + " n=" +
           std::to_string(sum.wilcoxon->n) + "\n\n";
    out.record({{"record", "wilcoxon"},
                {"xs", "naive_all"},
                {"ys", "opp_keyboard"},
                {"z", sum.wilcoxon->z},
                {"p", sum.wilcoxon->p},
                {"r", sum.wilcoxon->r},
                {"n", sum.wilcoxon->n}});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooFewPairs) throw;
    rep += "Wilcoxon signed-rank: too few non-zero pairs\n\n";
    out.record({{"record", "wilcoxon"}, {"error", error_kind_name(e.kind())}});
  }

  // Sampling rate.
  if (!cfg.sweep_rates_hz.empty()) {
    sum.sweep = sampling_rate_sweep(lab.sessions, cfg.sweep_rates_hz, derive_seed(cfg.seed, 0x5a3e), cfg.n_trees);
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : sum.sweep) {
      const double sparse = p.short_segments ? static_cast<double>(p.short_sparse) / p.short_segments : 0.0;
      rows.push_back({std::to_string(p.rate_hz), fixed(p.accuracy), std::to_string(p.short_segments), fixed(sparse)});
      out.record({{"record", "sampling_rate"},
                  {"rate_hz", p.rate_hz},
                  {"accuracy", p.accuracy},
                  {"segments", p.segments},
                  {"short_segments", p.short_segments},
                  {"short_sparse", p.short_sparse}});
    }
    out.series("sampling_rate.tsv", "rate_hz\taccuracy\tshort_segments\tshort_sparse_fraction", rows);
    rep += "== sampling rate (70/30 user split)\n" +
           format_table({"rate_hz", "accuracy", "short_segments", "short_sparse_fraction"}, rows) + "\n";
  }

  // Individual manifest rows against a model trained on every generated user.
  if (!cfg.rows.empty()) {
    TrainingSet all;
    for (const auto& s : lab.sessions) {
      auto rows = training_rows(s, opts.segment, need_vote_trees);
      all.insert(all.end(), rows.begin(), rows.end());
    }
    TrainingSet base;
    for (const auto& r : all) {
      if (static_cast<std::size_t>(r.label) < kBaseClassCount) base.push_back(r);
    }
    ForestOptions fo;
    fo.n_trees = cfg.n_trees;
    const auto model = train_forest(base, derive_seed(cfg.seed, 0xf0110), fo);
    std::optional<VoteTreeModel> vt;
    if (need_vote_trees) vt = train_vote_tree(model, all);
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : cfg.rows) {
      UserProfile p;
      p.user_id = "victim-" + std::to_string(row.victim_seed);
      const auto victim = generate_session(p, cfg.duration_ms, row.victim_seed);
      PipelineOptions o = opts;
      o.auth.w = row.w;
      o.auth.m = row.m;
      o.auth.g = row.g;
      const auto it = cfg.attackers.find(row.strategy);
      const AttackerProfile prof = it != cfg.attackers.end() ? it->second : default_attacker(row.strategy);
      const auto log = apply_attack(victim, prof, derive_seed(cfg.seed, row.victim_seed), o.extractor);
      const auto res = authenticate(victim.sensor, log, model, vt ? &*vt : nullptr, o);
      const double fpr = res.verdict.windows.empty() ? 0.0 : window_rates({res.verdict}, Polarity::Attacker).rate;
      const std::string dw = res.verdict.deauth_window ? std::to_string(*res.verdict.deauth_window) : "none";
      rows.push_back({std::to_string(row.victim_seed), strategy_token(row.strategy), std::to_string(row.w),
                      fixed(row.m, 2), std::to_string(row.g), std::to_string(res.verdict.windows.size()), fixed(fpr),
                      dw});
      json rec{{"record", "row"},
               {"victim_seed", row.victim_seed},
               {"strategy", strategy_token(row.strategy)},
               {"w", row.w},
               {"m", row.m},
               {"g", row.g},
               {"windows", res.verdict.windows.size()},
               {"fpr", fpr}};
      rec["deauth_window"] = res.verdict.deauth_window ? json(*res.verdict.deauth_window) : json(nullptr);
      out.record(rec);
    }
    rep += "== manifest rows\n" +
           format_table({"victim_seed", "strategy", "w", "m", "g", "windows", "fpr", "deauth_window"}, rows) + "\n";
  }

  textio::write_file_atomic(cfg.out / "report.txt", rep);
  textio::write_file_atomic(cfg.out / "records.jsonl", out.records);
  return sum;
}

}  // namespace zlab
