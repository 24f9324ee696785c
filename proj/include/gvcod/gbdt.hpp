#ifndef GVCOD_GBDT_HPP_
#define GVCOD_GBDT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gvcod/errors.hpp"
#include "gvcod/parallel.hpp"

namespace gvcod::gbdt {

// ---- model ----

struct TreeNode {
  int feature = -1;        // internal nodes only
  float threshold = 0.0f;  // rule: go left iff x[feature] < threshold
  int left = -1;
  int right = -1;
  float value = 0.0f;  // leaves only (log-odds contribution, lr pre-applied)

  bool is_leaf() const { return left < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  float eval(const float* x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const TreeNode& nd = nodes[i];
      i = x[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[i].value;
  }
};

struct GbdtModel {
  int n_features = 0;
  int depth = 0;
  float base_score = 0.0f;
  float learning_rate = 0.1f;  // training record; not needed for inference
  std::vector<Tree> trees;
};

struct TrainConfig {
  int n_trees = 200;
  int depth = 3;
  float learning_rate = 0.1f;
  float l2_lambda = 1.0f;
  int n_bins = 256;
  double min_child_weight = 1e-3;
  // Pixel-sampling caps consumed by the cascade/refiner sample builders.
  int max_pixels_per_frame = 512;
  double neg_pos_cap = 3.0;
  std::uint64_t seed = 0;
};

struct SampleMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;  // row-major

  SampleMatrix() = default;
  SampleMatrix(int n, int d) : rows(n), cols(d) {
    values.resize(static_cast<std::size_t>(n) * d);
  }
  float* row(int i) { return values.data() + static_cast<std::size_t>(i) * cols; }
  const float* row(int i) const {
    return values.data() + static_cast<std::size_t>(i) * cols;
  }
};

inline double sigmoid(double z) {
  z = std::clamp(z, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

// ---- inference ----

inline float predict_one(const GbdtModel& model, std::span<const float> x) {
  if (static_cast<int>(x.size()) != model.n_features)
    fail("shape", "feature dimension mismatch");
  double margin = model.base_score;
  for (const auto& t : model.trees) margin += t.eval(x.data());
  return static_cast<float>(sigmoid(margin));
}

inline std::vector<float> predict_batch(const GbdtModel& model, const float* x,
                                        int n, int d, int workers = 1) {
  if (d != model.n_features) fail("shape", "feature dimension mismatch");
  std::vector<float> out(n);
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
    const float* row = x + i * static_cast<std::size_t>(d);
    double margin = model.base_score;
    for (const auto& t : model.trees) margin += t.eval(row);
    out[i] = static_cast<float>(sigmoid(margin));
  });
  return out;
}

// ---- training ----

namespace detail {

// Bin boundaries for one feature. Values land in bin
// b = #{thresholds <= v}; choosing split index k sends bins 0..k left,
// which agrees exactly with the inference rule v < thresholds[k].
struct FeatureBins {
  std::vector<float> thresholds;
};

inline float midpoint_threshold(float lo, float hi) {
  // A float t with lo < t <= hi so binned training and float-threshold
  // inference partition identically even for adjacent representables.
  float t = static_cast<float>((static_cast<double>(lo) + hi) / 2.0);
  if (t <= lo) t = std::nextafter(lo, std::numeric_limits<float>::max());
  return t;
}

inline FeatureBins build_bins(std::vector<float>& column, int n_bins) {
  FeatureBins fb;
  std::sort(column.begin(), column.end());
  const std::size_t n = column.size();
  // Distinct run starts.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || column[i] != column[i - 1]) starts.push_back(i);
  const std::size_t m = starts.size();
  if (m <= 1) return fb;
  const std::size_t max_cuts = static_cast<std::size_t>(n_bins) - 1;
  if (m - 1 <= max_cuts) {
    for (std::size_t j = 0; j + 1 < m; ++j)
      fb.thresholds.push_back(
          midpoint_threshold(column[starts[j]], column[starts[j + 1]]));
    return fb;
  }
  // Equal-frequency cuts between distinct runs.
  std::size_t taken = 0;
  for (std::size_t j = 0; j + 1 < m && fb.thresholds.size() < max_cuts; ++j) {
    const std::size_t cum = starts[j + 1];  // samples with value <= run j
    const std::size_t target =
        (taken + 1) * n / (max_cuts + 1);  // next quantile boundary
    if (cum >= target) {
      fb.thresholds.push_back(
          midpoint_threshold(column[starts[j]], column[starts[j + 1]]));
      ++taken;
    }
  }
  return fb;
}

struct BinnedDataset {
  int n = 0;
  int d = 0;
  std::vector<std::uint8_t> bins;  // row-major
  std::vector<FeatureBins> features;

  std::uint8_t bin(int i, int f) const {
    return bins[static_cast<std::size_t>(i) * d + f];
  }
};

inline BinnedDataset bin_dataset(const SampleMatrix& x, int n_bins,
                                 int workers) {
  BinnedDataset ds;
  ds.n = x.rows;
  ds.d = x.cols;
  ds.features.resize(ds.d);
  ds.bins.resize(static_cast<std::size_t>(ds.n) * ds.d);
  parallel_for(static_cast<std::size_t>(ds.d), workers, [&](std::size_t f) {
    std::vector<float> column(ds.n);
    for (int i = 0; i < ds.n; ++i) column[i] = x.row(i)[f];
    std::vector<float> sorted = column;
    ds.features[f] = build_bins(sorted, n_bins);
    const auto& thr = ds.features[f].thresholds;
    for (int i = 0; i < ds.n; ++i) {
      const auto it = std::upper_bound(thr.begin(), thr.end(), column[i]);
      ds.bins[static_cast<std::size_t>(i) * ds.d + f] =
          static_cast<std::uint8_t>(it - thr.begin());
    }
  });
  return ds;
}

struct SplitChoice {
  bool found = false;
  double gain = 0.0;
  int feature = 0;
  int cut = -1;  // split index into thresholds
};

// One boosting round: grows a complete tree of cfg.depth level by level.
// node_of steers every sample to its current heap node; after the call it
// holds leaf indices, which the caller uses for the margin update.
inline Tree grow_tree(const BinnedDataset& ds, const std::vector<double>& g,
                      const std::vector<double>& h, const TrainConfig& cfg,
                      int workers, std::vector<int>& node_of) {
  const int depth = cfg.depth;
  const int node_count = (2 << depth) - 1;  // complete binary tree
  const int leaf_start = (1 << depth) - 1;
  Tree tree;
  tree.nodes.resize(node_count);

  std::fill(node_of.begin(), node_of.end(), 0);
  std::vector<std::uint32_t> order(ds.n);
  std::vector<std::uint32_t> bucket_pos;
  const double l2 = cfg.l2_lambda;
  const double lr = cfg.learning_rate;

  // Histogram scratch: (G,H) per (feature, bin), shared across nodes.
  const std::size_t hist_stride = 2 * 256;
  std::vector<double> hist(static_cast<std::size_t>(ds.d) * hist_stride);

  for (int level = 0; level <= depth; ++level) {
    const int first = (1 << level) - 1;
    const int count = 1 << level;

    // Order-preserving bucket of samples by node.
    std::vector<std::uint32_t> node_sizes(count, 0);
    for (int i = 0; i < ds.n; ++i) ++node_sizes[node_of[i] - first];
    bucket_pos.assign(count + 1, 0);
    for (int k = 0; k < count; ++k)
      bucket_pos[k + 1] = bucket_pos[k] + node_sizes[k];
    {
      std::vector<std::uint32_t> cursor(bucket_pos.begin(),
                                        bucket_pos.end() - 1);
      for (int i = 0; i < ds.n; ++i)
        order[cursor[node_of[i] - first]++] = static_cast<std::uint32_t>(i);
    }

    for (int k = 0; k < count; ++k) {
      const int node = first + k;
      const std::uint32_t* samples = order.data() + bucket_pos[k];
      const std::uint32_t n_node = node_sizes[k];

      double g_total = 0.0, h_total = 0.0;
      for (std::uint32_t s = 0; s < n_node; ++s) {
        g_total += g[samples[s]];
        h_total += h[samples[s]];
      }

      if (level == depth) {
        tree.nodes[node].value =
            n_node == 0 ? 0.0f
                        : static_cast<float>(-lr * g_total / (h_total + l2));
        continue;
      }

      SplitChoice best;
      if (n_node > 0) {
        std::fill(hist.begin(), hist.end(), 0.0);
        parallel_for(static_cast<std::size_t>(ds.d), workers,
                     [&](std::size_t f) {
                       double* hf = hist.data() + f * hist_stride;
                       const std::uint8_t* row;
                       for (std::uint32_t s = 0; s < n_node; ++s) {
                         const std::uint32_t i = samples[s];
                         row = ds.bins.data() + static_cast<std::size_t>(i) * ds.d;
                         const int b = row[f];
                         hf[2 * b] += g[i];
                         hf[2 * b + 1] += h[i];
                       }
                     });
        const double parent = g_total * g_total / (h_total + l2);
        // Serial scan in feature order keeps tie-breaking deterministic.
        for (int f = 0; f < ds.d; ++f) {
          const auto& thr = ds.features[f].thresholds;
          const double* hf = hist.data() + static_cast<std::size_t>(f) * hist_stride;
          double gl = 0.0, hl = 0.0;
          for (std::size_t c = 0; c < thr.size(); ++c) {
            gl += hf[2 * c];
            hl += hf[2 * c + 1];
            const double gr = g_total - gl;
            const double hr = h_total - hl;
            if (hl < cfg.min_child_weight || hr < cfg.min_child_weight)
              continue;
            const double gain =
                0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent);
            if (gain > 1e-12 && (!best.found || gain > best.gain)) {
              best.found = true;
              best.gain = gain;
              best.feature = f;
              best.cut = static_cast<int>(c);
            }
          }
        }
      }

      TreeNode& nd = tree.nodes[node];
      nd.left = 2 * node + 1;
      nd.right = 2 * node + 2;
      if (best.found) {
        nd.feature = best.feature;
        nd.threshold = ds.features[best.feature].thresholds[best.cut];
        const int f = best.feature;
        const int cut = best.cut;
        const int l = nd.left, r = nd.right;
        parallel_for(n_node, workers, [&](std::size_t s) {
          const std::uint32_t i = samples[s];
          node_of[i] = ds.bin(i, f) <= cut ? l : r;
        });
      } else {
        // Unsplittable (pure/empty) branch: route everything left through a
        // trivially-true comparison; the right subtree ends in zero leaves.
        nd.feature = 0;
        nd.threshold = std::numeric_limits<float>::max();
        const int l = nd.left;
        parallel_for(n_node, workers,
                     [&](std::size_t s) { node_of[samples[s]] = l; });
      }
    }
  }
  (void)leaf_start;
  return tree;
}

inline double log_loss(const std::vector<double>& margin,
                       std::span<const std::uint8_t> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const double p = std::clamp(sigmoid(margin[i]), 1e-15, 1.0 - 1e-15);
    loss -= y[i] ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(margin.size());
}

}  // namespace detail

// Second-order boosting with logistic loss. Trees are complete binary trees
// of cfg.depth; per round g = p - y, h = p(1-p), leaf = -lr * G/(H + l2).
// Deterministic for fixed inputs regardless of `workers`.
inline GbdtModel train(SampleMatrix x, std::span<const std::uint8_t> labels,
                       const TrainConfig& cfg, int workers = 1,
                       std::vector<double>* round_logloss = nullptr) {
  if (x.rows < 1) fail("data", "no samples");
  if (static_cast<int>(labels.size()) != x.rows)
    fail("shape", "label count does not match sample count");
  if (cfg.n_trees < 1) fail("config", "n_trees must be >= 1");
  if (cfg.depth < 0) fail("config", "depth must be >= 0");
  if (cfg.n_bins < 2 || cfg.n_bins > 256)
    fail("config", "n_bins must be in [2,256]");
  for (float v : x.values)
    if (!std::isfinite(v)) fail("data", "features must be finite");
  std::size_t positives = 0;
  for (auto v : labels) {
    if (v > 1) fail("data", "labels must be 0/1");
    positives += v;
  }

  GbdtModel model;
  model.n_features = x.cols;
  model.depth = cfg.depth;
  model.learning_rate = cfg.learning_rate;

  const int n = x.rows;
  if (positives == 0 || positives == static_cast<std::size_t>(n)) {
    // Single-class training data: clamp the prior, no trees.
    model.base_score = positives == 0 ? -10.0f : 10.0f;
    if (round_logloss) {
      std::vector<double> margin(n, model.base_score);
      round_logloss->assign(1, detail::log_loss(margin, labels));
    }
    return model;
  }

  const double p_bar = static_cast<double>(positives) / n;
  model.base_score = static_cast<float>(std::log(p_bar / (1.0 - p_bar)));

  detail::BinnedDataset ds = detail::bin_dataset(x, cfg.n_bins, workers);
  x.values.clear();
  x.values.shrink_to_fit();

  std::vector<double> margin(n, model.base_score);
  std::vector<double> g(n), h(n);
  std::vector<int> node_of(n);
  if (round_logloss) {
    round_logloss->clear();
    round_logloss->push_back(detail::log_loss(margin, labels));
  }

  model.trees.reserve(cfg.n_trees);
  for (int round = 0; round < cfg.n_trees; ++round) {
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
      const double p = sigmoid(margin[i]);
      g[i] = p - labels[i];
      h[i] = p * (1.0 - p);
    });
    Tree tree = detail::grow_tree(ds, g, h, cfg, workers, node_of);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
      margin[i] += tree.nodes[node_of[i]].value;
    });
    model.trees.push_back(std::move(tree));
    if (round_logloss)
      round_logloss->push_back(detail::log_loss(margin, labels));
  }
  return model;
}

// ---- serialization ----
// {"format":"gvcod-gbdt","version":1,"n_features":D,"depth":d,
//  "base_score":b,"trees":[{"nodes":[{"f":i,"t":x,"l":j,"r":k}|{"v":x}]}]}

inline std::string save(const GbdtModel& model) {
  nlohmann::ordered_json doc;
  doc["format"] = "gvcod-gbdt";
  doc["version"] = 1;
  doc["n_features"] = model.n_features;
  doc["depth"] = model.depth;
  doc["base_score"] = model.base_score;
  nlohmann::ordered_json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::ordered_json nodes = nlohmann::json::array();
    for (const auto& nd : t.nodes) {
      nlohmann::ordered_json j;
      if (nd.is_leaf()) {
        j["v"] = nd.value;
      } else {
        j["f"] = nd.feature;
        j["t"] = nd.threshold;
        j["l"] = nd.left;
        j["r"] = nd.right;
      }
      nodes.push_back(std::move(j));
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

inline GbdtModel load(const std::string& bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    fail("model", std::string("malformed model document: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "gvcod-gbdt")
    fail("model", "not a gvcod-gbdt model");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    fail("model", "unsupported model version");

  GbdtModel model;
  try {
    model.n_features = doc.at("n_features").get<int>();
    model.depth = doc.at("depth").get<int>();
    model.base_score = doc.at("base_score").get<float>();
    for (const auto& jt : doc.at("trees")) {
      Tree t;
      const auto& jnodes = jt.at("nodes");
      const int size = static_cast<int>(jnodes.size());
      if (size < 1) fail("model", "empty tree");
      for (int i = 0; i < size; ++i) {
        const auto& jn = jnodes[i];
        TreeNode nd;
        if (jn.contains("v")) {
          nd.value = jn.at("v").get<float>();
        } else {
          nd.feature = jn.at("f").get<int>();
          nd.threshold = jn.at("t").get<float>();
          nd.left = jn.at("l").get<int>();
          nd.right = jn.at("r").get<int>();
          if (nd.feature < 0 || nd.feature >= model.n_features)
            fail("model", "feature index out of range");
          if (nd.left <= i || nd.right <= i || nd.left >= size ||
              nd.right >= size)
            fail("model", "invalid child indices");
        }
        t.nodes.push_back(nd);
      }
      model.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail("model", std::string("malformed model document: ") + e.what());
  }
  if (model.n_features < 1) fail("model", "n_features must be positive");
  return model;
}

}  // namespace gvcod::gbdt

#endif  // GVCOD_GBDT_HPP_
