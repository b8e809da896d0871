#pragma once

// The full synthetic experiment: legitimate users, innocent and malicious
// adversaries, desynchronisation and sampling-rate sweeps.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zlab/adversary.hpp"
#include "zlab/engine.hpp"
#include "zlab/evaluation.hpp"
#include "zlab/kvconfig.hpp"

namespace zlab {

struct ManifestRow {
  std::uint64_t victim_seed = 0;
  Strategy strategy = Strategy::NaiveAll;
  int w = 20;
  double m = 0.6;
  int g = 1;
};

struct ExperimentConfig {
  int users = 20;
  Millis duration_ms = 600000;
  std::uint64_t seed = 1;
  PipelineOptions pipeline;
  int n_trees = 100;
  std::map<Strategy, AttackerProfile> attackers;
  std::vector<Millis> desync_shifts{0, 200, 500};
  std::vector<int> sweep_rates_hz{200, 100, 50, 25};
  std::vector<ManifestRow> rows;
  std::filesystem::path out = "zlab-out";
};

ExperimentConfig default_experiment_config();

// Applies manifest entries in order (later keys win). Relative profile files
// resolve against base_dir.
void apply_manifest(ExperimentConfig& cfg, const KvList& entries, const std::filesystem::path& base_dir = {});

std::vector<SessionBundle> generate_users(int n, Millis duration_ms, std::uint64_t seed,
                                          const UserProfile& base = {});

// Sessions with their leave-one-user-out models; models[i] never saw sessions[i].
struct Lab {
  std::vector<SessionBundle> sessions;
  std::vector<ForestModel> models;
  std::vector<VoteTreeModel> vote_trees;  // filled when five-class data is requested
};

Lab build_lab(std::vector<SessionBundle> sessions, std::uint64_t seed, int n_trees, bool with_vote_trees);

// One verdict per session on its own traces.
std::vector<AuthOutcome> legit_outcomes(const Lab& lab, const PipelineOptions& opts);

// Every ordered pair (a, b), a != b: a's interactions on b's bracelet, judged by b's model.
std::vector<SessionVerdict> mismatch_verdicts(const Lab& lab, const PipelineOptions& opts);

std::vector<AuthOutcome> attack_outcomes(const Lab& lab, const AttackerProfile& attacker, std::uint64_t seed,
                                         const PipelineOptions& opts);

// Sessions re-labelled after shifting the terminal events by shift_ms.
std::vector<LabelledSession> desync_sessions(const Lab& lab, Millis shift_ms, const PipelineOptions& opts);

struct RateSweepPoint {
  int rate_hz = 0;
  double accuracy = 0.0;
  std::size_t segments = 0;
  std::size_t short_segments = 0;  // shorter than 100 ms
  std::size_t short_sparse = 0;
};

// Trains on the first 70% of users and tests on the rest, at each decimated rate.
std::vector<RateSweepPoint> sampling_rate_sweep(const std::vector<SessionBundle>& sessions,
                                                const std::vector<int>& rates_hz, std::uint64_t seed, int n_trees);

// Mean of the survival curve over windows 0..max_window.
double mean_survival(const std::vector<SessionVerdict>& verdicts, int max_window);

struct StrategySummary {
  Strategy strategy = Strategy::NaiveAll;
  double fpr = 0.0;
  double mean_survival = 0.0;
  std::size_t deauthenticated = 0;
  std::vector<double> deauth_windows;  // censored
};

struct ExperimentSummary {
  double fnr = 0.0;
  std::size_t legit_deauth_g1 = 0;
  std::size_t legit_deauth_g2 = 0;
  double mismatch_survival_w10 = 0.0;
  double legit_survival_w10 = 0.0;
  std::vector<std::pair<Millis, double>> desync_fail;
  std::vector<StrategySummary> strategies;
  std::optional<StatsResult> wilcoxon;
  std::vector<RateSweepPoint> sweep;
  std::string report;  // aligned text tables
};

// Runs everything and writes reports, JSON-lines records and series files under cfg.out.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace zlab
