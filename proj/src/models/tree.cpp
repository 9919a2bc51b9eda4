#include "btcf/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "btcf/errors.hpp"

namespace btcf {

std::string to_string(SplitCriterion c) {
  switch (c) {
    case SplitCriterion::squared_error: return "squared_error";
    case SplitCriterion::friedman_mse: return "friedman_mse";
    case SplitCriterion::poisson: return "poisson";
  }
  return "?";
}

SplitCriterion criterion_from_string(std::string_view name) {
  if (name == "squared_error") return SplitCriterion::squared_error;
  if (name == "friedman_mse") return SplitCriterion::friedman_mse;
  if (name == "poisson") return SplitCriterion::poisson;
  throw InputError("unknown split criterion: " + std::string(name));
}

namespace {

// x*log(x) with the 0*log(0) = 0 convention.
double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

// Total Poisson deviance of a node: 2*(sum y*ln y - S*ln(S/n)); zero when the
// node mean is zero (then every member is zero).
double poisson_deviance(double sum_y, double sum_ylogy, double n) {
  if (sum_y <= 0) return 0.0;
  return 2.0 * (sum_ylogy - sum_y * std::log(sum_y / n));
}

struct BestSplit {
  int feature = -1;
  double threshold = 0;
  double improvement = -1;  // < 0 means no valid split
  int left_count = 0;
};

struct NodeStats {
  double sum_y = 0, sum_y2 = 0, sum_ylogy = 0;
  int count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeGrowthConfig& config,
              Rng& rng)
      : X_(X), y_(y), config_(config), rng_(rng) {}

  std::vector<TreeNode> build(std::span<const int> samples) {
    index_.assign(samples.begin(), samples.end());
    nodes_.clear();
    if (config_.max_leaf_nodes > 0)
      grow_best_first();
    else
      grow_depth_first();
    return std::move(nodes_);
  }

 private:
  NodeStats stats(int lo, int hi) const {
    NodeStats s;
    s.count = hi - lo;
    for (int k = lo; k < hi; ++k) {
      const double v = y_[index_[k]];
      s.sum_y += v;
      s.sum_y2 += v * v;
      if (config_.criterion == SplitCriterion::poisson) s.sum_ylogy += xlogx(v);
    }
    return s;
  }

  bool is_pure(const NodeStats& s) const {
    const double sse = s.sum_y2 - s.sum_y * s.sum_y / s.count;
    return sse <= 1e-12 * std::max(1.0, s.sum_y2);
  }

  std::vector<int> draw_features() {
    const int d = static_cast<int>(X_.cols());
    const int m = (config_.max_features > 0 && config_.max_features < d) ? config_.max_features : d;
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (m == d) return all;
    // Partial Fisher-Yates, then sorted so candidate order is by feature id.
    for (int i = 0; i < m; ++i)
      std::swap(all[i], all[i + static_cast<int>(rng_.index(d - i))]);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  BestSplit find_split(int lo, int hi, const NodeStats& node) {
    BestSplit best;
    const int n = node.count;
    const int min_leaf = config_.min_samples_leaf;
    if (n < 2 * min_leaf || is_pure(node)) return best;

    const double parent_dev = poisson_deviance(node.sum_y, node.sum_ylogy, node.count);
    const auto features = draw_features();
    std::vector<std::pair<double, double>>& xy = scratch_;
    xy.resize(n);

    for (int f : features) {
      for (int k = 0; k < n; ++k) {
        const int row = index_[lo + k];
        xy[k] = {X_(row, f), y_[row]};
      }
      std::sort(xy.begin(), xy.end());
      if (xy.front().first == xy.back().first) continue;  // constant feature

      double sum_l = 0, sum2_l = 0, ylogy_l = 0;
      for (int k = 0; k < n - 1; ++k) {
        const double yv = xy[k].second;
        sum_l += yv;
        sum2_l += yv * yv;
        if (config_.criterion == SplitCriterion::poisson) ylogy_l += xlogx(yv);
        const int n_l = k + 1, n_r = n - n_l;
        if (n_l < min_leaf || n_r < min_leaf) continue;
        if (xy[k].first == xy[k + 1].first) continue;  // no threshold between ties

        const double sum_r = node.sum_y - sum_l;
        double improvement = 0;
        switch (config_.criterion) {
          case SplitCriterion::squared_error:
            // SSE reduction; the sum_y2 terms cancel.
            improvement = sum_l * sum_l / n_l + sum_r * sum_r / n_r -
                          node.sum_y * node.sum_y / n;
            break;
          case SplitCriterion::friedman_mse: {
            const double diff = sum_l / n_l - sum_r / n_r;
            improvement = (static_cast<double>(n_l) * n_r / n) * diff * diff;
            break;
          }
          case SplitCriterion::poisson: {
            const double dev_l = poisson_deviance(sum_l, ylogy_l, n_l);
            const double dev_r =
                poisson_deviance(sum_r, node.sum_ylogy - ylogy_l, n_r);
            improvement = parent_dev - dev_l - dev_r;
            break;
          }
        }
        // strict >: first candidate wins ties, in feature-then-threshold order
        if (improvement > 0 && improvement > best.improvement)
          best = {f, (xy[k].first + xy[k + 1].first) / 2.0, improvement, n_l};
      }
    }
    return best;
  }

  /// Partition index_[lo, hi) around the split; returns the boundary.
  int partition(int lo, int hi, int feature, double threshold) {
    auto mid = std::stable_partition(
        index_.begin() + lo, index_.begin() + hi,
        [&](int row) { return X_(row, feature) <= threshold; });
    return static_cast<int>(mid - index_.begin());
  }

  int add_leaf(const NodeStats& s) {
    TreeNode node;
    node.value = s.sum_y / s.count;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void grow_depth_first() {
    nodes_.reserve(64);
    grow_node(0, static_cast<int>(index_.size()), 0);
  }

  int grow_node(int lo, int hi, int depth) {
    const NodeStats s = stats(lo, hi);
    const int id = add_leaf(s);
    if (config_.max_depth >= 0 && depth >= config_.max_depth) return id;
    const BestSplit split = find_split(lo, hi, s);
    if (split.feature < 0) return id;
    const int mid = partition(lo, hi, split.feature, split.threshold);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int left = grow_node(lo, mid, depth + 1);
    const int right = grow_node(mid, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void grow_best_first() {
    struct Candidate {
      int node_id, lo, hi, depth;
      std::uint64_t order;  // insertion counter; earlier wins ties
      BestSplit split;
    };
    auto worse = [](const Candidate& a, const Candidate& b) {
      if (a.split.improvement != b.split.improvement)
        return a.split.improvement < b.split.improvement;
      return a.order > b.order;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);
    std::uint64_t counter = 0;

    auto push_candidate = [&](int node_id, int lo, int hi, int depth, const NodeStats& s) {
      if (config_.max_depth >= 0 && depth >= config_.max_depth) return;
      BestSplit split = find_split(lo, hi, s);
      if (split.feature < 0) return;
      frontier.push({node_id, lo, hi, depth, counter++, split});
    };

    const NodeStats root = stats(0, static_cast<int>(index_.size()));
    add_leaf(root);
    push_candidate(0, 0, static_cast<int>(index_.size()), 0, root);
    int leaves = 1;

    while (leaves < config_.max_leaf_nodes && !frontier.empty()) {
      const Candidate c = frontier.top();
      frontier.pop();
      const int mid = partition(c.lo, c.hi, c.split.feature, c.split.threshold);
      const NodeStats ls = stats(c.lo, mid), rs = stats(mid, c.hi);
      const int left = add_leaf(ls), right = add_leaf(rs);
      nodes_[c.node_id].feature = c.split.feature;
      nodes_[c.node_id].threshold = c.split.threshold;
      nodes_[c.node_id].left = left;
      nodes_[c.node_id].right = right;
      ++leaves;
      push_candidate(left, c.lo, mid, c.depth + 1, ls);
      push_candidate(right, mid, c.hi, c.depth + 1, rs);
    }
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const TreeGrowthConfig& config_;
  Rng& rng_;
  std::vector<int> index_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, double>> scratch_;
};

}  // namespace

RegressionTree RegressionTree::grow(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    std::span<const int> samples, const TreeGrowthConfig& config,
                                    Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("tree: no training samples");
  if (config.min_samples_leaf < 1) throw InputError("tree: min_samples_leaf must be >= 1");
  if (config.criterion == SplitCriterion::poisson)
    for (int row : samples)
      if (y[row] < 0)
        throw InputError("poisson criterion requires nonnegative targets, got " +
                         std::to_string(y[row]));
  RegressionTree tree;
  tree.nodes_ = TreeBuilder(X, y, config, rng).build(samples);
  return tree;
}

RegressionTree RegressionTree::from_nodes(std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw InputError("tree: empty node list");
  RegressionTree tree;
  tree.nodes_ = std::move(nodes);
  return tree;
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int id = 0;
  while (nodes_[id].feature >= 0)
    id = (x[nodes_[id].feature] <= nodes_[id].threshold) ? nodes_[id].left : nodes_[id].right;
  return nodes_[id].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i));
  return out;
}

int RegressionTree::leaf_count() const {
  int leaves = 0;
  for (const auto& n : nodes_)
    if (n.feature < 0) ++leaves;
  return leaves;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
  RegressionTree tree;
  for (const auto& e : j) {
    TreeNode n;
    n.feature = e.at(0).get<int>();
    n.threshold = e.at(1).get<double>();
    n.left = e.at(2).get<int>();
    n.right = e.at(3).get<int>();
    n.value = e.at(4).get<double>();
    tree.nodes_.push_back(n);
  }
  if (tree.nodes_.empty()) throw InputError("tree: empty node list");
  return tree;
}

}  // namespace btcf
