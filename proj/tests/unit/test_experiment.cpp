#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "zlab/error.hpp"
#include "zlab/experiment.hpp"
#include "zlab/textio.hpp"

using namespace zlab;

namespace {

ExperimentConfig from_text(const std::string& text, const std::filesystem::path& base = {}) {
  auto cfg = default_experiment_config();
  apply_manifest(cfg, parse_kv(text), base);
  return cfg;
}

std::size_t error_line(const std::string& text) {
  try {
    from_text(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.line();
  }
  FAIL("expected a config error");
  return 0;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("defaults") {
  const auto cfg = default_experiment_config();
  CHECK(cfg.users == 20);
  CHECK(cfg.duration_ms == 600000);
  CHECK(cfg.pipeline.auth.w == 20);
  CHECK(cfg.pipeline.auth.m == 0.6);
  CHECK(cfg.pipeline.auth.g == 1);
  CHECK(cfg.attackers.size() == 4);
  CHECK(cfg.desync_shifts == std::vector<Millis>{0, 200, 500});
  CHECK(cfg.sweep_rates_hz == std::vector<int>{200, 100, 50, 25});
}

TEST_CASE("manifest keys apply in order and later ones win") {
  const auto cfg = from_text(
      "users = 5\nduration_s = 120\nw = 10\nw = 15\nm = 0.7\ng = 2\nf = 0.5\nstrict_threshold = true\n"
      "desync_shifts = 0, 100\nsweep_rates = 200, 50\nrow = 3 opp_keyboard 20 0.6 2\n"
      "profile.naive_all.latency_median_ms = 123\nout = elsewhere\n");
  CHECK(cfg.users == 5);
  CHECK(cfg.duration_ms == 120000);
  CHECK(cfg.pipeline.auth.w == 15);
  CHECK(cfg.pipeline.auth.m == 0.7);
  CHECK(cfg.pipeline.auth.g == 2);
  CHECK(cfg.pipeline.auth.f == 0.5);
  CHECK(cfg.pipeline.auth.strict_threshold);
  CHECK(cfg.desync_shifts == std::vector<Millis>{0, 100});
  CHECK(cfg.sweep_rates_hz == std::vector<int>{200, 50});
  REQUIRE(cfg.rows.size() == 1);
  CHECK(cfg.rows[0].victim_seed == 3);
  CHECK(cfg.rows[0].strategy == Strategy::OppKeyboard);
  CHECK(cfg.rows[0].g == 2);
  CHECK(cfg.attackers.at(Strategy::NaiveAll).latency_median_ms == 123.0);
  CHECK(cfg.out == "elsewhere");
}

TEST_CASE("manifest errors carry their line") {
  CHECK(error_line("users = 3\ncolour = blue\n") == 2);
  CHECK(error_line("users = 1\n") == 1);
  CHECK(error_line("w = 5\nrow = 1 sneaky 20 0.6 1\n") == 2);
  CHECK(error_line("row = 1 naive_all 20\n") == 1);
  CHECK(error_line("\n\nsweep_rates = 200, 30\n") == 3);
  CHECK(error_line("profile.naive_all.colour = 1\n") == 1);
  CHECK(error_line("profile.naive_all.mimic_fraction = 5\n") > 0);
  CHECK_THROWS_AS(from_text("m = 1.5\n"), Error);
  CHECK_THROWS_AS(from_text("users = many\n"), Error);
}

TEST_CASE("profile files resolve relative to the manifest directory") {
  testutil::TempDir dir("manifest");
  textio::write_file_atomic(dir / "slow.txt", "latency_median_ms = 900\n");
  const auto cfg = from_text("profile_file.opp_all = slow.txt\n", dir.path());
  CHECK(cfg.attackers.at(Strategy::OppAll).latency_median_ms == 900.0);
  CHECK(cfg.attackers.at(Strategy::OppAll).strategy == Strategy::OppAll);
  try {
    from_text("profile_file.opp_all = absent.txt\n", dir.path());
    FAIL("expected a missing profile");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingArtifact);
  }
}

TEST_CASE("generated users are distinct and reproducible") {
  const auto a = generate_users(3, 30000, 5);
  const auto b = generate_users(3, 30000, 5);
  REQUIRE(a.size() == 3);
  CHECK(a[0].user_id == "user01");
  CHECK(a[2].user_id == "user03");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].events == b[i].events);
  CHECK_FALSE(a[0].events == a[1].events);
}

TEST_CASE("a small experiment writes every artifact and is reproducible") {
  testutil::TempDir dir("exp");
  auto cfg = from_text("users = 4\nduration_s = 60\ntrees = 8\nw = 10\nsweep_rates = 200, 25\n");
  cfg.out = dir / "a";
  const auto s1 = run_experiment(cfg);
  for (const char* f : {"report.txt", "records.jsonl", "series/desync.tsv", "series/sampling_rate.tsv",
                        "series/fnr_grid.tsv"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(cfg.out / f));
  }
  CHECK(s1.strategies.size() == 4);
  CHECK(s1.desync_fail.size() == 3);
  CHECK(s1.sweep.size() == 2);
  CHECK(s1.fnr >= 0.0);
  CHECK(s1.fnr <= 1.0);
  CHECK(s1.report == slurp(cfg.out / "report.txt"));

  const auto records = slurp(cfg.out / "records.jsonl");
  std::istringstream lines(records);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    CHECK(line.front() == '{');
    CHECK(line.back() == '}');
    ++n;
  }
  CHECK(n > 0);

  auto again = cfg;
  again.out = dir / "b";
  run_experiment(again);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(cfg.out)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), cfg.out);
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(again.out / rel));
  }
}
