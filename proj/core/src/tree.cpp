#include "attnfuse/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "attnfuse/error.hpp"

namespace attnfuse {

namespace {

double gini(double w0, double w1) {
  const double total = w0 + w1;
  if (total <= 0.0) return 0.0;
  const double p0 = w0 / total;
  const double p1 = w1 / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class ClassificationBuilder {
 public:
  ClassificationBuilder(const Matrix& x, std::span<const int> labels,
                        std::span<const std::size_t> rows, std::span<const double> weights,
                        const TreeOptions& options, Rng& rng, std::vector<TreeNode>& nodes)
      : x_(x), labels_(labels), rows_(rows), weights_(weights), options_(options), rng_(rng),
        nodes_(nodes), entries_(rows.size()), features_(x.cols()) {
    std::iota(entries_.begin(), entries_.end(), std::size_t{0});
    std::iota(features_.begin(), features_.end(), 0);
    const int dims = static_cast<int>(x.cols());
    per_split_ = options.features_per_split <= 0 ? dims : std::min(options.features_per_split, dims);
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      (label(entries_[i]) == 1 ? w1 : w0) += weight(entries_[i]);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      auto& node = nodes_.back();
      node.weight = w0 + w1;
      node.value = node.weight > 0.0 ? w1 / node.weight : 0.5;
      node.impurity = gini(w0, w1);
    }
    const bool can_split = depth < options_.max_depth &&
                           end - begin >= static_cast<std::size_t>(options_.min_samples_split) &&
                           nodes_[id].impurity > 0.0;
    if (!can_split) return id;

    const Split split = find_split(begin, end, w0, w1);
    if (split.feature < 0) return id;

    const auto middle = std::partition(
        entries_.begin() + static_cast<std::ptrdiff_t>(begin),
        entries_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t e) { return value(e, split.feature) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(middle - entries_.begin());

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].impurity_decrease = split.gain;
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

 private:
  double value(std::size_t entry, int feature) const {
    return x_(rows_[entry], static_cast<std::size_t>(feature));
  }
  int label(std::size_t entry) const { return labels_[rows_[entry]]; }
  double weight(std::size_t entry) const { return weights_.empty() ? 1.0 : weights_[entry]; }

  Split find_split(std::size_t begin, std::size_t end, double w0, double w1) {
    const double parent = gini(w0, w1);
    const double total = w0 + w1;
    Split best;
    int examined = 0;
    // Lazy Fisher-Yates over feature indices: features are visited in a
    // random order until enough non-constant ones have been examined.
    for (std::size_t drawn = 0; drawn < features_.size() && examined < per_split_; ++drawn) {
      const auto pick = drawn + static_cast<std::size_t>(rng_.index(features_.size() - drawn));
      std::swap(features_[drawn], features_[pick]);
      const int f = features_[drawn];

      const bool informative = options_.mode == SplitMode::best
                                   ? scan_best(begin, end, f, parent, total, w1, best)
                                   : scan_random(begin, end, f, parent, total, w1, best);
      if (informative) ++examined;
    }
    return best;
  }

  bool scan_best(std::size_t begin, std::size_t end, int f, double parent, double total,
                 double total_w1, Split& best) {
    sorted_.clear();
    for (std::size_t i = begin; i < end; ++i) sorted_.emplace_back(value(entries_[i], f), entries_[i]);
    std::sort(sorted_.begin(), sorted_.end());
    if (sorted_.front().first == sorted_.back().first) return false;

    double left_w = 0.0, left_w1 = 0.0;
    for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
      const auto e = sorted_[i].second;
      left_w += weight(e);
      if (label(e) == 1) left_w1 += weight(e);
      if (sorted_[i].first == sorted_[i + 1].first) continue;
      const double right_w = total - left_w;
      const double right_w1 = total_w1 - left_w1;
      const double gain = parent - (left_w / total) * gini(left_w - left_w1, left_w1) -
                          (right_w / total) * gini(right_w - right_w1, right_w1);
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = f;
        best.threshold = 0.5 * (sorted_[i].first + sorted_[i + 1].first);
        // Midpoints of adjacent doubles can round up to the upper value.
        if (best.threshold >= sorted_[i + 1].first) best.threshold = sorted_[i].first;
      }
    }
    return true;
  }

  bool scan_random(std::size_t begin, std::size_t end, int f, double parent, double total,
                   double total_w1, Split& best) {
    double lo = value(entries_[begin], f);
    double hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = value(entries_[i], f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) return false;
    const double threshold = rng_.uniform(lo, hi);
    double left_w = 0.0, left_w1 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto e = entries_[i];
      if (value(e, f) <= threshold) {
        left_w += weight(e);
        if (label(e) == 1) left_w1 += weight(e);
      }
    }
    const double right_w = total - left_w;
    const double right_w1 = total_w1 - left_w1;
    const double gain = parent - (left_w / total) * gini(left_w - left_w1, left_w1) -
                        (right_w / total) * gini(right_w - right_w1, right_w1);
    if (gain > best.gain) best = {f, threshold, gain};
    return true;
  }

  const Matrix& x_;
  std::span<const int> labels_;
  std::span<const std::size_t> rows_;
  std::span<const double> weights_;
  const TreeOptions& options_;
  Rng& rng_;
  std::vector<TreeNode>& nodes_;
  std::vector<std::size_t> entries_;
  std::vector<int> features_;
  std::vector<std::pair<double, std::size_t>> sorted_;
  int per_split_ = 0;
};

template <typename Nodes>
double walk(const Nodes& nodes, std::span<const double> row) {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[id].value;
}

}  // namespace

ClassificationTree ClassificationTree::fit(const Matrix& x, std::span<const int> labels,
                                           std::span<const std::size_t> rows,
                                           std::span<const double> weights,
                                           const TreeOptions& options, Rng& rng) {
  if (rows.empty()) throw DataError(DataIssue::empty_input, "tree: no training rows");
  if (!weights.empty() && weights.size() != rows.size()) {
    throw DimensionError("tree: weights must be parallel to rows");
  }
  if (options.max_depth < 0) throw ConfigError("tree: max_depth must be nonnegative");
  ClassificationTree tree;
  ClassificationBuilder builder(x, labels, rows, weights, options, rng, tree.nodes_);
  builder.build(0, rows.size(), 0);
  return tree;
}

double ClassificationTree::predict(std::span<const double> row) const { return walk(nodes_, row); }

void ClassificationTree::accumulate_importance(std::span<double> importance) const {
  if (nodes_.empty() || nodes_.front().weight <= 0.0) return;
  const double root = nodes_.front().weight;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    importance[static_cast<std::size_t>(node.feature)] += node.weight / root * node.impurity_decrease;
  }
}

std::vector<std::vector<std::size_t>> presort_columns(const Matrix& x,
                                                      std::span<const std::size_t> rows) {
  std::vector<std::vector<std::size_t>> sorted(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& order = sorted[f];
    order.assign(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  return sorted;
}

RegressionTree RegressionTree::fit(const Matrix& x,
                                   const std::vector<std::vector<std::size_t>>& sorted_rows,
                                   std::span<const double> targets,
                                   std::span<const double> hessians, int max_depth,
                                   int min_samples_split) {
  if (sorted_rows.empty() || sorted_rows.front().empty()) {
    throw DataError(DataIssue::empty_input, "regression tree: no training rows");
  }
  const auto& rows = sorted_rows.front();
  constexpr int kSettled = -1;
  std::vector<int> node_of(x.rows(), kSettled);

  struct Stats {
    double sum = 0.0;
    double hess = 0.0;
    std::size_t count = 0;
  };
  RegressionTree tree;
  auto& nodes = tree.nodes_;
  std::vector<Stats> stats(1);
  for (std::size_t r : rows) {
    node_of[r] = 0;
    stats[0].sum += targets[r];
    stats[0].hess += hessians[r];
    ++stats[0].count;
  }
  nodes.emplace_back();
  nodes[0].weight = static_cast<double>(stats[0].count);

  std::vector<int> frontier{0};
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    // Nodes not on the frontier are marked settled so the sweeps skip them.
    std::vector<int> slot(nodes.size(), -1);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (stats[static_cast<std::size_t>(frontier[i])].count >=
          static_cast<std::size_t>(std::max(2, min_samples_split))) {
        slot[static_cast<std::size_t>(frontier[i])] = static_cast<int>(i);
      }
    }
    std::vector<Split> best(frontier.size());
    struct Running {
      double sum = 0.0;
      std::size_t count = 0;
      double last = 0.0;
    };
    std::vector<Running> running(frontier.size());

    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::fill(running.begin(), running.end(), Running{});
      for (std::size_t r : sorted_rows[f]) {
        const int node = node_of[r];
        if (node == kSettled) continue;
        const int s = slot[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        auto& acc = running[static_cast<std::size_t>(s)];
        const double v = x(r, f);
        if (acc.count > 0 && v > acc.last) {
          const auto& total = stats[static_cast<std::size_t>(node)];
          const double right_sum = total.sum - acc.sum;
          const auto right_count = total.count - acc.count;
          const double gain = acc.sum * acc.sum / static_cast<double>(acc.count) +
                              right_sum * right_sum / static_cast<double>(right_count) -
                              total.sum * total.sum / static_cast<double>(total.count);
          auto& candidate = best[static_cast<std::size_t>(s)];
          if (gain > candidate.gain + 1e-12) {
            double threshold = 0.5 * (acc.last + v);
            if (threshold >= v) threshold = acc.last;
            candidate = {static_cast<int>(f), threshold, gain};
          }
        }
        acc.sum += targets[r];
        acc.count += 1;
        acc.last = v;
      }
    }

    std::vector<int> next;
    std::vector<std::pair<int, int>> children(frontier.size(), {-1, -1});
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (best[i].feature < 0) continue;
      const auto id = static_cast<std::size_t>(frontier[i]);
      nodes[id].feature = best[i].feature;
      nodes[id].threshold = best[i].threshold;
      nodes[id].impurity_decrease = best[i].gain;
      const int left = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      stats.resize(nodes.size());
      nodes[id].left = left;
      nodes[id].right = left + 1;
      children[i] = {left, left + 1};
      next.push_back(left);
      next.push_back(left + 1);
    }
    std::vector<int> split_slot(nodes.size(), -1);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (children[i].first >= 0) split_slot[static_cast<std::size_t>(frontier[i])] = static_cast<int>(i);
    }
    for (std::size_t r : rows) {
      const int node = node_of[r];
      if (node == kSettled) continue;
      const int s = node < static_cast<int>(split_slot.size()) ? split_slot[static_cast<std::size_t>(node)] : -1;
      if (s < 0) {
        node_of[r] = kSettled;
        continue;
      }
      const auto& parent = nodes[static_cast<std::size_t>(node)];
      const int child = x(r, static_cast<std::size_t>(parent.feature)) <= parent.threshold
                            ? children[static_cast<std::size_t>(s)].first
                            : children[static_cast<std::size_t>(s)].second;
      node_of[r] = child;
      auto& st = stats[static_cast<std::size_t>(child)];
      st.sum += targets[r];
      st.hess += hessians[r];
      ++st.count;
    }
    for (int child : next) nodes[static_cast<std::size_t>(child)].weight =
        static_cast<double>(stats[static_cast<std::size_t>(child)].count);
    frontier = std::move(next);
  }

  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].is_leaf()) continue;
    nodes[id].value = stats[id].sum / std::max(stats[id].hess, 1e-12);
  }
  return tree;
}

double RegressionTree::predict(std::span<const double> row) const { return walk(nodes_, row); }

}  // namespace attnfuse
