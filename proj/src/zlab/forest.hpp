#pragma once

// Interaction classifier: a class-weighted random forest over the 24 segment
// features, and a gain-ratio decision tree over the forest's vote counts that
// adds the Idle and Upright classes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zlab/features.hpp"
#include "zlab/interactions.hpp"

namespace zlab {

using ClassCounts = std::array<double, kBaseClassCount>;
using VoteCounts = std::array<int, kBaseClassCount>;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  ClassCounts counts{};  // weighted class mass at a leaf
  InteractionKind leaf_class = InteractionKind::Typing;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0
  std::uint64_t seed = 0;

  InteractionKind predict(const FeatureVector& fv) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestOptions {
  int n_trees = 100;
  int features_per_split = 0;  // 0 selects floor(sqrt(feature count))
  // Worker cap for tree training; 0 reads ZLAB_THREADS. Results do not depend on it.
  int threads = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  int n_trees = 0;
  int features_per_split = 0;
  ClassCounts class_weights{};
  std::uint64_t train_seed = 0;

  bool operator==(const ForestModel&) const = default;
};

struct TrainingRow {
  FeatureVector features;
  InteractionKind label = InteractionKind::Typing;
  std::string user_id;

  bool operator==(const TrainingRow&) const = default;
};

using TrainingSet = std::vector<TrainingRow>;

// total / (present classes * rows of class); 0 for absent classes. Sparse rows
// are not counted.
ClassCounts class_weights_for(const TrainingSet& data);

ForestModel train_forest(const TrainingSet& data, std::uint64_t seed, const ForestOptions& opts = {});

struct Prediction3 {
  InteractionKind kind = InteractionKind::Typing;
  VoteCounts votes{};
};

// Argmax with ties going to the earlier class in Typing < Scrolling < MKKM.
InteractionKind vote_argmax(const VoteCounts& votes);

Prediction3 predict3(const ForestModel& model, const FeatureVector& fv);

struct VoteTreeNode {
  int feature = -1;  // index into the vote vector, -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  InteractionKind leaf_class = InteractionKind::Typing;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const VoteTreeNode&) const = default;
};

struct VoteTreeModel {
  std::vector<VoteTreeNode> nodes;

  InteractionKind predict(const VoteCounts& votes) const;
  bool operator==(const VoteTreeModel&) const = default;
};

// Fits the post-classifier on (vote counts, label) pairs directly.
VoteTreeModel fit_vote_tree(const std::vector<std::pair<VoteCounts, InteractionKind>>& rows);

VoteTreeModel train_vote_tree(const ForestModel& forest, const TrainingSet& data5);

InteractionKind predict5(const ForestModel& forest, const VoteTreeModel& vote_tree, const FeatureVector& fv);

std::vector<std::pair<std::string, ForestModel>> leave_one_user_out(const TrainingSet& all, std::uint64_t seed,
                                                                    const ForestOptions& opts = {});

// Text model file. Doubles use shortest round-trip form so reloaded models
// predict bit-identically.
std::string serialize_model(const ForestModel& forest, const VoteTreeModel* vote_tree = nullptr);
std::pair<ForestModel, std::optional<VoteTreeModel>> parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const ForestModel& forest, const VoteTreeModel* vote_tree = nullptr);
std::pair<ForestModel, std::optional<VoteTreeModel>> load_model(const std::filesystem::path& path);

}  // namespace zlab
