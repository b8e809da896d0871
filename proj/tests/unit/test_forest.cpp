#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "helpers.hpp"
#include "zlab/adversary.hpp"
#include "zlab/error.hpp"
#include "zlab/evaluation.hpp"
#include "zlab/forest.hpp"

using namespace zlab;

namespace {

ForestOptions small(int trees = 25) {
  ForestOptions o;
  o.n_trees = trees;
  return o;
}

std::pair<TrainingSet, TrainingSet> split_holdout(const TrainingSet& all, double test_fraction, unsigned seed) {
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(all.size()));
  TrainingSet train, test;
  for (std::size_t k = 0; k < idx.size(); ++k) (k < n_test ? test : train).push_back(all[idx[k]]);
  return {train, test};
}

double accuracy(const ForestModel& m, const TrainingSet& rows) {
  std::size_t ok = 0;
  for (const auto& r : rows) ok += predict3(m, r.features).kind == r.label ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(rows.size());
}

// Five users whose rows are shifted by a personal offset, with overlapping classes.
TrainingSet personal_rows(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  TrainingSet out;
  for (int u = 0; u < 5; ++u) {
    std::array<double, kFeatureCount> offset{};
    for (auto& o : offset) o = 1.5 * nd(rng);
    for (int i = 0; i < 60; ++i) {
      TrainingRow r;
      r.user_id = "p" + std::to_string(u);
      const int c = i % 3;
      r.label = static_cast<InteractionKind>(c);
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        r.features.values[f] = offset[f] + (f < 4 ? 1.2 * c : 0.0) + nd(rng);
      }
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("a single class cannot be trained") {
  TrainingSet rows(10);
  for (auto& r : rows) r.user_id = "u";
  CHECK_THROWS_WITH_AS(train_forest(rows, 1), doctest::Contains(""), Error);
  try {
    train_forest(rows, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientClasses);
  }
}

TEST_CASE("extended labels are rejected by the base forest") {
  auto rows = generate_gaussian_features(60, 1);
  rows[0].label = InteractionKind::Idle;
  CHECK_THROWS_AS(train_forest(rows, 1, small()), Error);
}

TEST_CASE("sparse rows are excluded from training") {
  auto rows = generate_gaussian_features(90, 2);
  auto with_junk = rows;
  TrainingRow junk;
  junk.label = InteractionKind::MKKM;
  junk.features.sparse = true;
  junk.features.values.fill(-100.0);
  for (int i = 0; i < 40; ++i) with_junk.push_back(junk);
  CHECK(train_forest(rows, 5, small()) == train_forest(with_junk, 5, small()));
}

TEST_CASE("training is deterministic and independent of thread count") {
  const auto rows = generate_gaussian_features(300, 3, 1.0);
  auto one = small(30);
  one.threads = 1;
  auto many = small(30);
  many.threads = 6;
  const auto a = train_forest(rows, 42, one);
  CHECK(a == train_forest(rows, 42, one));
  CHECK(a == train_forest(rows, 42, many));
  CHECK_FALSE(a == train_forest(rows, 43, one));
}

TEST_CASE("row order does not change the trained forest") {
  auto rows = generate_gaussian_features(240, 4, 1.0);
  const auto a = train_forest(rows, 9, small());
  std::mt19937_64 rng(1);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto b = train_forest(rows, 9, small());
  CHECK(a == b);
}

TEST_CASE("separable Gaussian classes are learned") {
  const auto all = generate_gaussian_features(600, 5, 3.0);
  const auto [train, test] = split_holdout(all, 0.3, 5);
  const auto model = train_forest(train, 11);
  CHECK(model.n_trees == 100);
  CHECK(model.features_per_split == 4);
  CHECK(model.trees.size() == 100);
  CHECK(accuracy(model, test) >= 0.95);

  std::vector<InteractionKind> truth, pred;
  for (const auto& r : test) {
    truth.push_back(r.label);
    pred.push_back(predict3(model, r.features).kind);
  }
  const auto cm = confusion_matrix(truth, pred);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(cm.precision(c) >= 0.90);
    CHECK(cm.recall(c) >= 0.90);
  }
}

TEST_CASE("vote argmax and tie-break order") {
  CHECK(vote_argmax({70, 20, 10}) == InteractionKind::Typing);
  CHECK(vote_argmax({50, 50, 0}) == InteractionKind::Typing);
  CHECK(vote_argmax({0, 40, 40}) == InteractionKind::Scrolling);
  CHECK(vote_argmax({30, 30, 40}) == InteractionKind::MKKM);
  CHECK(vote_argmax({0, 0, 0}) == InteractionKind::Typing);
}

TEST_CASE("votes sum to the tree count and the winner has the most votes") {
  const auto rows = generate_gaussian_features(300, 6, 0.7);
  const auto model = train_forest(rows, 2, small(37));
  for (const auto& r : rows) {
    const auto p = predict3(model, r.features);
    CHECK(p.votes[0] + p.votes[1] + p.votes[2] == 37);
    const auto top = *std::max_element(p.votes.begin(), p.votes.end());
    CHECK(p.votes[static_cast<std::size_t>(p.kind)] == top);
    for (std::size_t c = 0; c < static_cast<std::size_t>(p.kind); ++c) CHECK(p.votes[c] < top);
  }
}

TEST_CASE("trees reference valid features, finite thresholds and reachable leaves") {
  const auto model = train_forest(generate_gaussian_features(200, 7, 0.5), 3, small(10));
  for (const auto& t : model.trees) {
    std::vector<int> seen(t.nodes.size(), 0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      REQUIRE(i >= 0);
      REQUIRE(static_cast<std::size_t>(i) < t.nodes.size());
      ++seen[static_cast<std::size_t>(i)];
      const auto& n = t.nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) continue;
      CHECK(n.feature < static_cast<int>(kFeatureCount));
      CHECK(std::isfinite(n.threshold));
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
    for (int s : seen) CHECK(s == 1);
  }
}

TEST_CASE("class weights are total over classes times count") {
  TrainingSet rows;
  auto add = [&](InteractionKind k, int n) {
    for (int i = 0; i < n; ++i) {
      TrainingRow r;
      r.label = k;
      r.user_id = "u";
      r.features.values[0] = i;
      rows.push_back(r);
    }
  };
  add(InteractionKind::Typing, 60);
  add(InteractionKind::Scrolling, 30);
  add(InteractionKind::MKKM, 10);
  auto w = class_weights_for(rows);
  CHECK(w[0] == doctest::Approx(100.0 / (3 * 60)));
  CHECK(w[1] == doctest::Approx(100.0 / (3 * 30)));
  CHECK(w[2] == doctest::Approx(100.0 / (3 * 10)));
  add(InteractionKind::MKKM, 10);
  w = class_weights_for(rows);
  CHECK(w[2] == doctest::Approx(110.0 / (3 * 20)));
  CHECK(w[0] == doctest::Approx(110.0 / (3 * 60)));
  // Every class carries the same total weight.
  CHECK(w[0] * 60 == doctest::Approx(w[2] * 20));
}

TEST_CASE("leave one user out excludes exactly the held-out user") {
  const auto all = generate_gaussian_features(150, 8, 1.0);
  const auto models = leave_one_user_out(all, 77, small(10));
  REQUIRE(models.size() == 5);
  for (const auto& [user, model] : models) {
    TrainingSet rest;
    for (const auto& r : all) {
      if (r.user_id != user) rest.push_back(r);
    }
    CHECK(model == train_forest(rest, 77, small(10)));
  }
}

TEST_CASE("leave one user out with two users and with one") {
  auto all = generate_gaussian_features(60, 9);
  for (auto& r : all) r.user_id = r.user_id == "gauss-0" ? "a" : "b";
  CHECK(leave_one_user_out(all, 1, small(5)).size() == 2);
  for (auto& r : all) r.user_id = "a";
  CHECK_THROWS_AS(leave_one_user_out(all, 1, small(5)), Error);
}

TEST_CASE("held-out users score no better than users seen in training") {
  double held = 0.0, seen = 0.0;
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const auto all = personal_rows(seed);
    const auto full = train_forest(all, seed, small(20));
    for (const auto& [user, model] : leave_one_user_out(all, seed, small(20))) {
      TrainingSet mine;
      for (const auto& r : all) {
        if (r.user_id == user) mine.push_back(r);
      }
      held += accuracy(model, mine);
      seen += accuracy(full, mine);
    }
  }
  CHECK(held <= seen);
}

TEST_CASE("vote tree routes Scrolling-like idle votes to Idle and Typing-like upright votes to Upright") {
  std::vector<std::pair<VoteCounts, InteractionKind>> rows;
  std::mt19937_64 rng(3);
  auto jitter = [&](int v) { return std::max(0, v + static_cast<int>(rng() % 5) - 2); };
  for (int i = 0; i < 40; ++i) {
    rows.push_back({{jitter(80), jitter(10), jitter(10)}, InteractionKind::Typing});
    rows.push_back({{jitter(5), jitter(75), jitter(20)}, InteractionKind::Scrolling});
    rows.push_back({{jitter(5), jitter(10), jitter(85)}, InteractionKind::MKKM});
    rows.push_back({{jitter(2), jitter(96), jitter(2)}, InteractionKind::Idle});
    rows.push_back({{jitter(95), jitter(3), jitter(2)}, InteractionKind::Upright});
  }
  const auto tree = fit_vote_tree(rows);
  CHECK(tree.predict({1, 97, 2}) == InteractionKind::Idle);
  CHECK(tree.predict({96, 2, 2}) == InteractionKind::Upright);
  CHECK(tree.predict({80, 10, 10}) == InteractionKind::Typing);
  CHECK(tree.predict({5, 75, 20}) == InteractionKind::Scrolling);
  CHECK(tree.predict({5, 10, 85}) == InteractionKind::MKKM);
  std::size_t correct = 0;
  for (const auto& [v, k] : rows) correct += tree.predict(v) == k ? 1 : 0;
  CHECK(correct == rows.size());  // unpruned tree fits distinct training points exactly
}

TEST_CASE("vote tree training needs both extended classes") {
  const auto base = generate_gaussian_features(90, 10);
  const auto forest = train_forest(base, 1, small(5));
  auto data5 = base;
  TrainingRow idle = base[1];
  idle.label = InteractionKind::Idle;
  data5.push_back(idle);
  CHECK_THROWS_AS(train_vote_tree(forest, data5), Error);
  TrainingRow up = base[0];
  up.label = InteractionKind::Upright;
  data5.push_back(up);
  CHECK_NOTHROW(train_vote_tree(forest, data5));
}

TEST_CASE("five-class prediction on feature rows engineered to look like scrolling and typing") {
  const auto base = generate_gaussian_features(600, 11, 3.0);
  const auto forest = train_forest(base, 4, small(40));
  TrainingSet data5 = base;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  // Idle rows sit just past the Scrolling cluster away from the others, so
  // they draw almost pure Scrolling votes; Upright likewise past Typing.
  for (int i = 0; i < 200; ++i) {
    TrainingRow idle;
    idle.label = InteractionKind::Idle;
    for (auto& v : idle.features.values) v = 3.0 + 0.3 * nd(rng);
    TrainingRow up;
    up.label = InteractionKind::Upright;
    for (auto& v : up.features.values) v = -2.0 + 0.3 * nd(rng);
    data5.push_back(idle);
    data5.push_back(up);
  }
  const auto vt = train_vote_tree(forest, data5);
  FeatureVector typing_like, idle_like;
  typing_like.values.fill(0.0);
  idle_like.values.fill(3.0);
  CHECK(predict3(forest, idle_like).kind == InteractionKind::Scrolling);
  // Both the Typing and Upright clusters vote Typing, so the tree decides by
  // vote purity; the deterministic class for a pure Typing vote is fixed.
  const auto a = predict5(forest, vt, typing_like);
  CHECK(a == predict5(forest, vt, typing_like));
  FeatureVector zero;
  CHECK(predict5(forest, vt, zero) == predict5(forest, vt, zero));
}

TEST_CASE("model file round trip predicts identically") {
  testutil::TempDir dir("model");
  const auto rows = generate_gaussian_features(300, 12, 1.0);
  const auto forest = train_forest(rows, 13, small(15));
  std::vector<std::pair<VoteCounts, InteractionKind>> vrows{{{10, 3, 2}, InteractionKind::Typing},
                                                             {{2, 12, 1}, InteractionKind::Idle},
                                                             {{1, 2, 12}, InteractionKind::MKKM},
                                                             {{12, 1, 2}, InteractionKind::Upright}};
  const auto vt = fit_vote_tree(vrows);
  save_model(dir / "m.txt", forest, &vt);
  const auto [f2, vt2] = load_model(dir / "m.txt");
  CHECK(f2 == forest);
  REQUIRE(vt2.has_value());
  CHECK(*vt2 == vt);
  for (const auto& r : rows) CHECK(predict3(f2, r.features).votes == predict3(forest, r.features).votes);
  CHECK(serialize_model(f2, &*vt2) == serialize_model(forest, &vt));

  const auto [f3, none] = parse_model(serialize_model(forest));
  CHECK_FALSE(none.has_value());
  CHECK(f3 == forest);
}

TEST_CASE("model file errors") {
  testutil::TempDir dir("model-err");
  try {
    load_model(dir / "absent.txt");
    FAIL("expected missing artifact");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingArtifact);
    CHECK(std::string(e.what()) == "model");
  }
  const auto forest = train_forest(generate_gaussian_features(60, 14), 1, small(3));
  auto text = serialize_model(forest);
  const auto pos = text.find("digest ");
  REQUIRE(pos != std::string::npos);
  auto tampered = text;
  tampered[pos + 7] = tampered[pos + 7] == '0' ? '1' : '0';
  try {
    parse_model(tampered);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  CHECK_THROWS_AS(parse_model("zlab-model 1\ngarbage line\n"), Error);
  CHECK_THROWS_AS(parse_model("not a model\n"), Error);
  CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), Error);
}
