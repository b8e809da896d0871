#include "zlab/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <set>

#include "zlab/error.hpp"
#include "zlab/parallel.hpp"
#include "zlab/rng.hpp"
#include "zlab/textio.hpp"

namespace zlab {

namespace {

constexpr std::string_view kModelMagic = "zlab-model 1";

std::size_t class_index(InteractionKind k) { return static_cast<std::size_t>(k); }

bool is_base_class(InteractionKind k) { return class_index(k) < kBaseClassCount; }

InteractionKind weighted_argmax(const ClassCounts& c) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] > c[best]) best = i;
  }
  return static_cast<InteractionKind>(best);
}

// Column-major copy of the training features in canonical row order.
struct Matrix {
  std::size_t rows = 0;
  std::vector<double> cols;  // feature f of row r at cols[f * rows + r]
  std::vector<std::uint8_t> labels;

  double at(std::size_t r, std::size_t f) const { return cols[f * rows + r]; }
};

double weighted_gini_mass(const ClassCounts& c) {
  double total = 0.0, sq = 0.0;
  for (double v : c) {
    total += v;
    sq += v * v;
  }
  return total > 0.0 ? total - sq / total : 0.0;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const ClassCounts& class_weights, int features_per_split, std::uint64_t seed)
      : x_(x), class_weights_(class_weights), k_(features_per_split), rng_(seed) {}

  DecisionTree build(std::uint64_t seed) {
    const std::size_t n = x_.rows;
    multiplicity_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++multiplicity_[rng_.below(n)];
    std::vector<int> work;
    for (std::size_t i = 0; i < n; ++i) {
      if (multiplicity_[i] > 0) work.push_back(static_cast<int>(i));
    }

    DecisionTree tree;
    tree.seed = seed;
    tree.nodes.emplace_back();
    struct Task {
      int node;
      std::size_t begin, end;
    };
    std::vector<Task> stack{{0, 0, work.size()}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      ClassCounts counts{};
      int mass = 0;
      for (std::size_t i = task.begin; i < task.end; ++i) {
        const auto r = static_cast<std::size_t>(work[i]);
        counts[x_.labels[r]] += multiplicity_[r] * class_weights_[x_.labels[r]];
        mass += multiplicity_[r];
      }
      int present = 0;
      for (double c : counts) present += c > 0.0 ? 1 : 0;

      Split split;
      if (present > 1 && mass >= 2) split = find_split(work, task.begin, task.end, counts);
      if (!split.valid) {
        auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
        node.counts = counts;
        node.leaf_class = weighted_argmax(counts);
        continue;
      }
      const auto mid = std::partition(work.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                      work.begin() + static_cast<std::ptrdiff_t>(task.end), [&](int r) {
                                        return x_.at(static_cast<std::size_t>(r), split.feature) <= split.threshold;
                                      });
      const auto mid_idx = static_cast<std::size_t>(mid - work.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
      node.feature = static_cast<int>(split.feature);
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid_idx, task.end});
      stack.push_back({left, task.begin, mid_idx});
    }
    return tree;
  }

 private:
  struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double child_mass = 0.0;
  };

  Split find_split(const std::vector<int>& work, std::size_t begin, std::size_t end, const ClassCounts& total) {
    std::array<std::size_t, kFeatureCount> order;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Split best;
    int informative = 0;
    for (std::size_t pos = 0; pos < order.size() && informative < k_; ++pos) {
      // Lazy Fisher-Yates: draw the next candidate only when needed.
      const auto pick = pos + static_cast<std::size_t>(rng_.below(order.size() - pos));
      std::swap(order[pos], order[pick]);
      const std::size_t f = order[pos];

      buffer_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = static_cast<std::size_t>(work[i]);
        buffer_.push_back({x_.at(r, f), r});
      }
      std::sort(buffer_.begin(), buffer_.end());
      if (buffer_.front().first == buffer_.back().first) continue;
      ++informative;

      ClassCounts left{};
      for (std::size_t j = 0; j + 1 < buffer_.size(); ++j) {
        const auto r = buffer_[j].second;
        left[x_.labels[r]] += multiplicity_[r] * class_weights_[x_.labels[r]];
        const double a = buffer_[j].first;
        const double b = buffer_[j + 1].first;
        if (a == b) continue;
        ClassCounts right;
        for (std::size_t c = 0; c < right.size(); ++c) right[c] = total[c] - left[c];
        const double mass = weighted_gini_mass(left) + weighted_gini_mass(right);
        if (!best.valid || mass < best.child_mass) {
          double thr = a + (b - a) * 0.5;
          if (!(thr < b)) thr = a;
          best = {true, f, thr, mass};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const ClassCounts& class_weights_;
  int k_;
  Rng rng_;
  std::vector<int> multiplicity_;
  std::vector<std::pair<double, std::size_t>> buffer_;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string feature_digest() {
  std::string all(feature_conventions());
  for (const auto& n : feature_names()) {
    all += ';';
    all += n;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(all)));
  return buf;
}

double entropy(const std::array<int, kExtendedClassCount>& counts, int n) {
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

InteractionKind majority5(const std::array<int, kExtendedClassCount>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return static_cast<InteractionKind>(best);
}

}  // namespace

InteractionKind DecisionTree::predict(const FeatureVector& fv) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(fv.values[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].leaf_class;
}

ClassCounts class_weights_for(const TrainingSet& data) {
  std::array<std::size_t, kBaseClassCount> counts{};
  std::size_t total = 0;
  for (const auto& r : data) {
    if (r.features.sparse || !is_base_class(r.label)) continue;
    ++counts[class_index(r.label)];
    ++total;
  }
  std::size_t present = 0;
  for (auto c : counts) present += c > 0 ? 1 : 0;
  ClassCounts w{};
  for (std::size_t c = 0; c < kBaseClassCount; ++c) {
    if (counts[c] > 0) w[c] = static_cast<double>(total) / (static_cast<double>(present) * static_cast<double>(counts[c]));
  }
  return w;
}

ForestModel train_forest(const TrainingSet& data, std::uint64_t seed, const ForestOptions& opts) {
  if (opts.n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be >= 1");
  std::vector<const TrainingRow*> rows;
  for (const auto& r : data) {
    if (r.features.sparse) continue;
    if (!is_base_class(r.label)) {
      throw Error(ErrorKind::InvalidArgument, std::string("forest rows must be TYPING, SCROLLING or MKKM, got ") +
                                                  interaction_token(r.label));
    }
    rows.push_back(&r);
  }
  std::set<InteractionKind> classes;
  for (const auto* r : rows) classes.insert(r->label);
  if (classes.size() < 2) throw Error(ErrorKind::InsufficientClasses, "need at least two classes to train");

  // Bootstrap indices are drawn over this order, so storage order of the
  // input never changes the model.
  std::sort(rows.begin(), rows.end(), [](const TrainingRow* a, const TrainingRow* b) {
    if (a->user_id != b->user_id) return a->user_id < b->user_id;
    if (a->label != b->label) return a->label < b->label;
    return a->features.values < b->features.values;
  });

  Matrix x;
  x.rows = rows.size();
  x.cols.resize(kFeatureCount * x.rows);
  x.labels.resize(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    x.labels[r] = static_cast<std::uint8_t>(class_index(rows[r]->label));
    for (std::size_t f = 0; f < kFeatureCount; ++f) x.cols[f * x.rows + r] = rows[r]->features.values[f];
  }

  ForestModel model;
  model.n_trees = opts.n_trees;
  model.features_per_split = opts.features_per_split > 0
                                 ? opts.features_per_split
                                 : static_cast<int>(std::floor(std::sqrt(static_cast<double>(kFeatureCount))));
  model.class_weights = class_weights_for(data);
  model.train_seed = seed;
  model.trees.resize(static_cast<std::size_t>(opts.n_trees));
  parallel_for(model.trees.size(), opts.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    TreeBuilder builder(x, model.class_weights, model.features_per_split, tree_seed);
    model.trees[t] = builder.build(tree_seed);
  });
  return model;
}

InteractionKind vote_argmax(const VoteCounts& votes) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i) {
    if (votes[i] > votes[best]) best = i;
  }
  return static_cast<InteractionKind>(best);
}

Prediction3 predict3(const ForestModel& model, const FeatureVector& fv) {
  Prediction3 p;
  for (const auto& tree : model.trees) ++p.votes[class_index(tree.predict(fv))];
  p.kind = vote_argmax(p.votes);
  return p;
}

InteractionKind VoteTreeModel::predict(const VoteCounts& votes) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(votes[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].leaf_class;
}

VoteTreeModel fit_vote_tree(const std::vector<std::pair<VoteCounts, InteractionKind>>& rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "no rows for the vote tree");
  VoteTreeModel model;
  model.nodes.emplace_back();
  std::vector<std::size_t> work(rows.size());
  std::iota(work.begin(), work.end(), std::size_t{0});
  struct Task {
    int node;
    std::size_t begin, end;
  };
  std::vector<Task> stack{{0, 0, work.size()}};
  std::vector<std::pair<int, std::size_t>> sorted;
  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const int n = static_cast<int>(task.end - task.begin);
    std::array<int, kExtendedClassCount> counts{};
    for (std::size_t i = task.begin; i < task.end; ++i) ++counts[class_index(rows[work[i]].second)];
    int present = 0;
    for (int c : counts) present += c > 0 ? 1 : 0;
    auto& leaf_ref = model.nodes[static_cast<std::size_t>(task.node)];
    leaf_ref.leaf_class = majority5(counts);
    if (present <= 1 || n < 2) continue;

    const double parent_h = entropy(counts, n);
    struct Candidate {
      bool valid = false;
      double gain = 0.0;
      double ratio = 0.0;
      double threshold = 0.0;
    };
    std::array<Candidate, kBaseClassCount> per_attr;
    for (std::size_t a = 0; a < kBaseClassCount; ++a) {
      sorted.clear();
      for (std::size_t i = task.begin; i < task.end; ++i) sorted.push_back({rows[work[i]].first[a], work[i]});
      std::sort(sorted.begin(), sorted.end());
      std::array<int, kExtendedClassCount> left{};
      for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
        ++left[class_index(rows[sorted[j].second].second)];
        if (sorted[j].first == sorted[j + 1].first) continue;
        const int nl = static_cast<int>(j + 1);
        const int nr = n - nl;
        std::array<int, kExtendedClassCount> right{};
        for (std::size_t c = 0; c < right.size(); ++c) right[c] = counts[c] - left[c];
        const double pl = static_cast<double>(nl) / n;
        const double pr = static_cast<double>(nr) / n;
        const double gain = parent_h - pl * entropy(left, nl) - pr * entropy(right, nr);
        if (gain > per_attr[a].gain + 1e-12) {
          const double split_info = -pl * std::log2(pl) - pr * std::log2(pr);
          per_attr[a] = {true, gain, gain / split_info, 0.5 * (sorted[j].first + sorted[j + 1].first)};
        }
      }
    }
    // C4.5: among attributes with at least average gain, take the best ratio.
    double gain_sum = 0.0;
    int valid = 0;
    for (const auto& c : per_attr) {
      if (c.valid && c.gain > 1e-12) {
        gain_sum += c.gain;
        ++valid;
      }
    }
    if (valid == 0) continue;
    const double avg_gain = gain_sum / valid;
    int best = -1;
    for (std::size_t a = 0; a < per_attr.size(); ++a) {
      const auto& c = per_attr[a];
      if (!c.valid || c.gain <= 1e-12 || c.gain + 1e-12 < avg_gain) continue;
      if (best < 0 || c.ratio > per_attr[static_cast<std::size_t>(best)].ratio) best = static_cast<int>(a);
    }
    const auto& chosen = per_attr[static_cast<std::size_t>(best)];
    const auto mid = std::partition(work.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                    work.begin() + static_cast<std::ptrdiff_t>(task.end), [&](std::size_t r) {
                                      return rows[r].first[static_cast<std::size_t>(best)] <= chosen.threshold;
                                    });
    const auto mid_idx = static_cast<std::size_t>(mid - work.begin());
    const int left_id = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    model.nodes.emplace_back();
    auto& node = model.nodes[static_cast<std::size_t>(task.node)];
    node.feature = best;
    node.leaf_class = InteractionKind::Typing;
    node.threshold = chosen.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({left_id + 1, mid_idx, task.end});
    stack.push_back({left_id, task.begin, mid_idx});
  }
  return model;
}

VoteTreeModel train_vote_tree(const ForestModel& forest, const TrainingSet& data5) {
  bool has_idle = false, has_upright = false;
  std::vector<std::pair<VoteCounts, InteractionKind>> rows;
  rows.reserve(data5.size());
  for (const auto& r : data5) {
    if (r.features.sparse) continue;
    has_idle |= r.label == InteractionKind::Idle;
    has_upright |= r.label == InteractionKind::Upright;
    rows.push_back({predict3(forest, r.features).votes, r.label});
  }
  if (!has_idle || !has_upright) {
    throw Error(ErrorKind::InsufficientClasses, "vote tree training needs IDLE and UPRIGHT rows");
  }
  return fit_vote_tree(rows);
}

InteractionKind predict5(const ForestModel& forest, const VoteTreeModel& vote_tree, const FeatureVector& fv) {
  return vote_tree.predict(predict3(forest, fv).votes);
}

std::vector<std::pair<std::string, ForestModel>> leave_one_user_out(const TrainingSet& all, std::uint64_t seed,
                                                                    const ForestOptions& opts) {
  std::set<std::string> users;
  for (const auto& r : all) users.insert(r.user_id);
  if (users.size() < 2) throw Error(ErrorKind::InvalidArgument, "leave-one-user-out needs at least two users");
  std::vector<std::pair<std::string, ForestModel>> out;
  for (const auto& u : users) {
    TrainingSet rest;
    for (const auto& r : all) {
      if (r.user_id != u) rest.push_back(r);
    }
    out.emplace_back(u, train_forest(rest, seed, opts));
  }
  return out;
}

std::string serialize_model(const ForestModel& forest, const VoteTreeModel* vote_tree) {
  std::string out(kModelMagic);
  out += "\nconventions ";
  out += feature_conventions();
  out += "\ndigest ";
  out += feature_digest();
  out += "\nfeatures";
  for (const auto& n : feature_names()) {
    out += ' ';
    out += n;
  }
  out += "\nclasses TYPING SCROLLING MKKM\nsplit weighted-gini bootstrap full leaf weighted-majority tie-order TYPING<SCROLLING<MKKM\nclass_weights";
  for (double w : forest.class_weights) {
    out += ' ';
    textio::append_double(out, w);
  }
  out += "\ntrain_seed " + std::to_string(forest.train_seed);
  out += "\nn_trees " + std::to_string(forest.n_trees);
  out += "\nfeatures_per_split " + std::to_string(forest.features_per_split) + "\n";
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    out += "tree " + std::to_string(t) + " " + std::to_string(tree.seed) + " " + std::to_string(tree.nodes.size()) + "\n";
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        out += "L";
        for (double c : n.counts) {
          out += ' ';
          textio::append_double(out, c);
        }
        out += ' ';
        out += interaction_token(n.leaf_class);
      } else {
        out += "S " + std::to_string(n.feature) + " ";
        textio::append_double(out, n.threshold);
        out += " " + std::to_string(n.left) + " " + std::to_string(n.right);
      }
      out += '\n';
    }
  }
  if (vote_tree != nullptr) {
    out += "votetree " + std::to_string(vote_tree->nodes.size()) + "\n";
    for (const auto& n : vote_tree->nodes) {
      if (n.is_leaf()) {
        out += "L ";
        out += interaction_token(n.leaf_class);
      } else {
        out += "S " + std::to_string(n.feature) + " ";
        textio::append_double(out, n.threshold);
        out += " " + std::to_string(n.left) + " " + std::to_string(n.right);
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  std::vector<std::string_view> next_fields() {
    if (pos_ >= text_.size()) fail("unexpected end of model file");
    auto nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    current_ = text_.substr(pos_, nl - pos_);
    if (!current_.empty() && current_.back() == '\r') current_.remove_suffix(1);
    pos_ = nl + 1;
    ++line_;
    return textio::split_spaces(current_);
  }

  std::string_view current() const { return current_; }

  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorKind::MalformedLine, "model: " + msg, line_); }

  double num(std::string_view s) const {
    auto v = textio::parse_double(s);
    if (!v) fail("bad number");
    return *v;
  }

  std::int64_t integer(std::string_view s) const {
    auto v = textio::parse_int(s);
    if (!v) fail("bad integer");
    return *v;
  }

 private:
  std::string_view text_;
  std::string_view current_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::uint64_t parse_u64(const ModelReader& rd, std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) rd.fail("bad seed");
  return v;
}

InteractionKind parse_kind(const ModelReader& rd, std::string_view s) {
  auto k = parse_interaction_token(s);
  if (!k) rd.fail("bad class token");
  return *k;
}

template <typename Node>
void check_children(const ModelReader& rd, const std::vector<Node>& nodes) {
  for (const auto& n : nodes) {
    if (n.is_leaf()) continue;
    const auto size = static_cast<int>(nodes.size());
    if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size) rd.fail("child index out of range");
  }
}

}  // namespace

std::pair<ForestModel, std::optional<VoteTreeModel>> parse_model(std::string_view text) {
  ModelReader rd(text);
  rd.next_fields();
  if (rd.current() != kModelMagic) rd.fail("not a zlab model file");
  ForestModel model;
  std::optional<VoteTreeModel> vote_tree;
  while (true) {
    auto f = rd.next_fields();
    const auto key = f[0];
    if (key == "end") break;
    if (key == "conventions" || key == "features" || key == "classes" || key == "split") continue;
    if (key == "digest") {
      if (f.size() != 2 || f[1] != feature_digest()) {
        throw Error(ErrorKind::Config, "model was trained on differently defined features");
      }
    } else if (key == "class_weights") {
      if (f.size() != 1 + kBaseClassCount) rd.fail("class_weights needs 3 values");
      for (std::size_t c = 0; c < kBaseClassCount; ++c) model.class_weights[c] = rd.num(f[c + 1]);
    } else if (key == "train_seed") {
      model.train_seed = parse_u64(rd, f.at(1));
    } else if (key == "n_trees") {
      model.n_trees = static_cast<int>(rd.integer(f.at(1)));
    } else if (key == "features_per_split") {
      model.features_per_split = static_cast<int>(rd.integer(f.at(1)));
    } else if (key == "tree") {
      if (f.size() != 4) rd.fail("tree header needs index, seed and node count");
      DecisionTree tree;
      tree.seed = parse_u64(rd, f[2]);
      const auto count = rd.integer(f[3]);
      if (count < 1) rd.fail("empty tree");
      for (std::int64_t i = 0; i < count; ++i) {
        auto nf = rd.next_fields();
        TreeNode node;
        if (nf[0] == "L" && nf.size() == 5) {
          for (std::size_t c = 0; c < kBaseClassCount; ++c) node.counts[c] = rd.num(nf[c + 1]);
          node.leaf_class = parse_kind(rd, nf[4]);
        } else if (nf[0] == "S" && nf.size() == 5) {
          node.feature = static_cast<int>(rd.integer(nf[1]));
          if (node.feature < 0 || node.feature >= static_cast<int>(kFeatureCount)) rd.fail("feature index out of range");
          node.threshold = rd.num(nf[2]);
          if (!std::isfinite(node.threshold)) rd.fail("non-finite threshold");
          node.left = static_cast<int>(rd.integer(nf[3]));
          node.right = static_cast<int>(rd.integer(nf[4]));
        } else {
          rd.fail("bad tree node");
        }
        tree.nodes.push_back(node);
      }
      check_children(rd, tree.nodes);
      model.trees.push_back(std::move(tree));
    } else if (key == "votetree") {
      VoteTreeModel vt;
      const auto count = rd.integer(f.at(1));
      if (count < 1) rd.fail("empty vote tree");
      for (std::int64_t i = 0; i < count; ++i) {
        auto nf = rd.next_fields();
        VoteTreeNode node;
        if (nf[0] == "L" && nf.size() == 2) {
          node.leaf_class = parse_kind(rd, nf[1]);
        } else if (nf[0] == "S" && nf.size() == 5) {
          node.feature = static_cast<int>(rd.integer(nf[1]));
          if (node.feature < 0 || node.feature >= static_cast<int>(kBaseClassCount)) rd.fail("vote index out of range");
          node.threshold = rd.num(nf[2]);
          node.left = static_cast<int>(rd.integer(nf[3]));
          node.right = static_cast<int>(rd.integer(nf[4]));
        } else {
          rd.fail("bad vote tree node");
        }
        vt.nodes.push_back(node);
      }
      check_children(rd, vt.nodes);
      vote_tree = std::move(vt);
    } else {
      rd.fail("unknown key");
    }
  }
  if (model.trees.empty() || static_cast<int>(model.trees.size()) != model.n_trees) {
    throw Error(ErrorKind::MalformedLine, "model: tree count does not match n_trees");
  }
  return {std::move(model), std::move(vote_tree)};
}

void save_model(const std::filesystem::path& path, const ForestModel& forest, const VoteTreeModel* vote_tree) {
  textio::write_file_atomic(path, serialize_model(forest, vote_tree));
}

std::pair<ForestModel, std::optional<VoteTreeModel>> load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::MissingArtifact, "model");
  std::string text;
  for (const auto& l : textio::read_lines(path)) {
    text += l;
    text += '\n';
  }
  return parse_model(text);
}

}  // namespace zlab
