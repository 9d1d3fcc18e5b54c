#include "hatebench/classic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatebench/error.hpp"
#include "hatebench/rng.hpp"
#include "hatebench/table.hpp"

namespace hatebench::classic {

const char* family_name(Family f) {
  switch (f) {
    case Family::NaiveBayes: return "naive_bayes";
    case Family::LinearSvm: return "linear_svm";
    case Family::RandomForest: return "random_forest";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "naive_bayes" || name == "nb") return Family::NaiveBayes;
  if (name == "linear_svm" || name == "svm") return Family::LinearSvm;
  if (name == "random_forest" || name == "rf") return Family::RandomForest;
  throw ConfigError("unknown estimator family '" + name + "'");
}

namespace {

std::map<std::string, double> defaults(Family f) {
  switch (f) {
    case Family::NaiveBayes: return {{"alpha", 1.0}};
    case Family::LinearSvm: return {{"lambda", 1e-4}, {"epochs", 20}, {"project", 1}};
    case Family::RandomForest:
      return {{"n_trees", 200}, {"max_depth", 32}, {"max_features", 0}, {"bootstrap", 1},
              {"min_samples_split", 2}};
  }
  return {};
}

void require(bool ok, const EstimatorSpec& spec, const std::string& what) {
  if (!ok) throw ConfigError(std::string(family_name(spec.family)) + ": " + what);
}

bool is_whole(double v) { return std::floor(v) == v; }

void validate(const EstimatorSpec& s) {
  switch (s.family) {
    case Family::NaiveBayes:
      require(s.get("alpha") > 0, s, "alpha must be positive");
      break;
    case Family::LinearSvm:
      require(s.get("lambda") > 0, s, "lambda must be positive");
      require(s.get("epochs") >= 1 && is_whole(s.get("epochs")), s, "epochs must be a positive integer");
      break;
    case Family::RandomForest:
      require(s.get("n_trees") >= 1 && is_whole(s.get("n_trees")), s, "n_trees must be a positive integer");
      require(s.get("max_depth") >= 1 && is_whole(s.get("max_depth")), s, "max_depth must be a positive integer");
      require(s.get("max_features") >= 0 && is_whole(s.get("max_features")), s, "max_features must be a non-negative integer");
      require(s.get("min_samples_split") >= 2, s, "min_samples_split must be at least 2");
      break;
  }
}

}  // namespace

EstimatorSpec EstimatorSpec::make(Family family, const std::map<std::string, double>& overrides,
                                  std::uint64_t seed) {
  EstimatorSpec s;
  s.family = family;
  s.seed = seed;
  s.hyperparameters = defaults(family);
  for (const auto& [k, v] : overrides) {
    if (!s.hyperparameters.contains(k))
      throw ConfigError(std::string(family_name(family)) + ": unknown hyperparameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError(k + " must be finite");
    s.hyperparameters[k] = v;
  }
  validate(s);
  return s;
}

double EstimatorSpec::get(const std::string& key) const {
  const auto it = hyperparameters.find(key);
  if (it == hyperparameters.end()) throw ConfigError("missing hyperparameter '" + key + "'");
  return it->second;
}

std::string EstimatorSpec::describe() const {
  std::ostringstream out;
  out << family_name(family) << '(';
  bool first = true;
  for (const auto& [k, v] : hyperparameters) {
    if (!first) out << ',';
    out << k << '=' << v;
    first = false;
  }
  out << ')';
  return out.str();
}

double gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0) return 0.0;
  const double p0 = w0 / w, p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

ColumnView::ColumnView(const SparseMatrix& X) : col_ptr(X.n_cols + 1, 0) {
  for (const auto& e : X.entries) ++col_ptr[e.column + 1];
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  rows.resize(X.entries.size());
  values.resize(X.entries.size());
  std::vector<std::size_t> fill(col_ptr.begin(), col_ptr.end() - 1);
  for (std::size_t r = 0; r < X.n_rows(); ++r) {
    for (const auto& e : X.row(r)) {
      const auto pos = fill[e.column]++;
      rows[pos] = static_cast<std::uint32_t>(r);
      values[pos] = e.value;
    }
  }
}

namespace {

double lookup(std::span<const features::SparseEntry> row, std::uint32_t column) {
  const auto it = std::lower_bound(row.begin(), row.end(), column,
                                   [](const features::SparseEntry& e, std::uint32_t c) { return e.column < c; });
  return it != row.end() && it->column == column ? it->value : 0.0;
}

void check_training_input(const SparseMatrix& X, std::span<const int> y) {
  if (X.n_rows() == 0) throw TrainingError("train: empty feature matrix");
  if (X.n_rows() != y.size())
    throw TrainingError("train: " + std::to_string(X.n_rows()) + " rows but " +
                        std::to_string(y.size()) + " labels");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw TrainingError("train: labels must be 0 or 1");
    pos += v;
  }
  if (X.n_rows() < 2 || pos == 0 || pos == y.size())
    throw TrainingError("train: both classes must be present in the training labels");
}

// ---- Naive Bayes ----------------------------------------------------------

NaiveBayesParams train_naive_bayes(const EstimatorSpec& spec, const SparseMatrix& X,
                                   std::span<const int> y) {
  const double alpha = spec.get("alpha");
  const std::size_t dim = X.n_cols;
  std::vector<double> counts[2] = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  double n_class[2] = {0, 0};
  for (std::size_t r = 0; r < X.n_rows(); ++r) {
    n_class[y[r]] += 1;
    for (const auto& e : X.row(r)) {
      if (e.value < 0)
        throw TrainingError("naive_bayes: negative feature value at row " + std::to_string(r) +
                            ", column " + std::to_string(e.column));
      counts[y[r]][e.column] += e.value;
    }
  }
  NaiveBayesParams p;
  const double n = n_class[0] + n_class[1];
  for (int c = 0; c < 2; ++c) {
    p.log_prior[c] = std::log(n_class[c] / n);
    const double total = std::accumulate(counts[c].begin(), counts[c].end(), 0.0);
    const double denom = std::log(total + alpha * static_cast<double>(dim));
    p.log_likelihood[c].resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
      p.log_likelihood[c][j] = std::log(counts[c][j] + alpha) - denom;
  }
  return p;
}

// ---- Linear SVM (Pegasos) -------------------------------------------------

LinearSvmParams train_linear_svm(const EstimatorSpec& spec, const SparseMatrix& X,
                                 std::span<const int> y) {
  const double lambda = spec.get("lambda");
  const auto epochs = static_cast<int>(spec.get("epochs"));
  const bool project = spec.get("project") != 0;
  const std::size_t dim = X.n_cols;

  // w = scale * v; the bias is an extra always-one feature stored in v[dim].
  std::vector<double> v(dim + 1, 0.0);
  double scale = 1.0;
  double v_norm2 = 0.0;
  std::vector<std::size_t> order(X.n_rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  std::uint64_t t = 0;

  auto fold_scale = [&] {
    for (auto& x : v) x *= scale;
    v_norm2 *= scale * scale;
    scale = 1.0;
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto r : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double label = y[r] == 1 ? 1.0 : -1.0;
      const auto row = X.row(r);
      double dot = v[dim];
      for (const auto& e : row) dot += v[e.column] * e.value;
      const double margin = label * scale * dot;

      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        v_norm2 = 0.0;
        scale = 1.0;
        dot = 0.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double a = eta * label / scale;
        double x_norm2 = 1.0;
        for (const auto& e : row) {
          v[e.column] += a * e.value;
          x_norm2 += e.value * e.value;
        }
        v[dim] += a;
        v_norm2 += 2.0 * a * dot + a * a * x_norm2;
      }
      if (project) {
        const double w_norm = std::abs(scale) * std::sqrt(std::max(v_norm2, 0.0));
        const double radius = 1.0 / std::sqrt(lambda);
        if (w_norm > radius) scale *= radius / w_norm;
      }
      if (std::abs(scale) < 1e-9) fold_scale();
    }
  }
  fold_scale();
  LinearSvmParams p;
  p.weights.assign(v.begin(), v.end() - 1);
  p.bias = v[dim];
  return p;
}

// ---- Random Forest --------------------------------------------------------

struct TreeGrower {
  const SparseMatrix& X;
  const ColumnView& cols;
  std::span<const int> y;
  std::size_t max_depth;
  std::size_t max_features;
  double min_samples_split;

  std::vector<double> weight;             // bootstrap multiplicity per row
  std::vector<std::uint32_t> row_stamp;   // row -> node serial
  std::vector<std::uint32_t> feat_stamp;  // feature -> node serial (present in node)
  std::vector<std::uint32_t> features;    // draw pool
  std::uint32_t serial = 0;

  struct Candidate {
    double value, w0, w1;
  };
  std::vector<Candidate> cand;

  struct Split {
    bool found = false;
    double gain = 0;
    std::int32_t feature = -1;
    double threshold = 0;
  };

  // Collects the node's (value, class weights) list for one feature,
  // with every implicit zero merged into a single entry.
  void gather(std::uint32_t f, const std::vector<std::uint32_t>& rows, double w0, double w1) {
    cand.clear();
    double nz0 = 0, nz1 = 0;
    const std::size_t col_nnz = cols.col_ptr[f + 1] - cols.col_ptr[f];
    auto push = [&](std::uint32_t r, double val) {
      const double w = weight[r];
      if (y[r] == 1) {
        cand.push_back({val, 0, w});
        nz1 += w;
      } else {
        cand.push_back({val, w, 0});
        nz0 += w;
      }
    };
    if (col_nnz <= rows.size() * 8) {
      for (std::size_t k = cols.col_ptr[f]; k < cols.col_ptr[f + 1]; ++k)
        if (row_stamp[cols.rows[k]] == serial) push(cols.rows[k], cols.values[k]);
    } else {
      for (auto r : rows) {
        const double val = lookup(X.row(r), f);
        if (val != 0.0) push(r, val);
      }
    }
    const double z0 = w0 - nz0, z1 = w1 - nz1;
    if (z0 + z1 > 1e-9) cand.push_back({0.0, std::max(z0, 0.0), std::max(z1, 0.0)});
    std::sort(cand.begin(), cand.end(),
              [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  }

  void evaluate(std::uint32_t f, double w0, double w1, double parent_impurity, Split& best,
                bool& constant) {
    constant = cand.empty() || cand.front().value == cand.back().value;
    if (constant) return;
    const double w = w0 + w1;
    double l0 = 0, l1 = 0;
    for (std::size_t k = 0; k + 1 < cand.size(); ++k) {
      l0 += cand[k].w0;
      l1 += cand[k].w1;
      if (cand[k].value == cand[k + 1].value) continue;
      const double r0 = w0 - l0, r1 = w1 - l1;
      const double wl = l0 + l1, wr = r0 + r1;
      const double gain = parent_impurity - (wl / w) * gini(l0, l1) - (wr / w) * gini(r0, r1);
      double thr = 0.5 * (cand[k].value + cand[k + 1].value);
      if (thr >= cand[k + 1].value) thr = cand[k].value;
      const auto fi = static_cast<std::int32_t>(f);
      const bool better =
          !best.found || gain > best.gain ||
          (gain == best.gain && (fi < best.feature || (fi == best.feature && thr < best.threshold)));
      if (better) best = {true, gain, fi, thr};
    }
  }

  DecisionTree grow(Rng& rng, bool bootstrap) {
    const std::size_t n = X.n_rows();
    weight.assign(n, 0.0);
    if (bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) weight[pick(rng)] += 1.0;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    row_stamp.assign(n, 0);
    feat_stamp.assign(X.n_cols, 0);
    features.resize(X.n_cols);
    std::iota(features.begin(), features.end(), 0u);

    std::vector<std::uint32_t> root;
    for (std::uint32_t r = 0; r < n; ++r)
      if (weight[r] > 0) root.push_back(r);

    DecisionTree tree;
    struct Pending {
      std::int32_t node;
      std::vector<std::uint32_t> rows;
      std::size_t depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, std::move(root), 0});

    while (!stack.empty()) {
      Pending item = std::move(stack.back());
      stack.pop_back();
      double w0 = 0, w1 = 0;
      for (auto r : item.rows) (y[r] == 1 ? w1 : w0) += weight[r];
      tree.nodes[item.node].count0 = w0;
      tree.nodes[item.node].count1 = w1;
      if (item.depth >= max_depth || w0 == 0 || w1 == 0 || w0 + w1 < min_samples_split ||
          item.rows.size() < 2)
        continue;

      ++serial;
      for (auto r : item.rows) {
        row_stamp[r] = serial;
        for (const auto& e : X.row(r)) feat_stamp[e.column] = serial;
      }

      const double parent = gini(w0, w1);
      Split best;
      std::size_t visited = 0, nonconstant = 0;
      std::size_t remaining = features.size();
      // Draw features without replacement until max_features have been
      // visited and at least one of them could split the node.
      while (remaining > 0 && (visited < max_features || nonconstant == 0)) {
        std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
        const std::size_t k = pick(rng);
        std::swap(features[k], features[remaining - 1]);
        const std::uint32_t f = features[--remaining];
        ++visited;
        if (feat_stamp[f] != serial) continue;  // all zero in this node
        gather(f, item.rows, w0, w1);
        bool constant = false;
        evaluate(f, w0, w1, parent, best, constant);
        if (!constant) ++nonconstant;
      }
      if (!best.found) continue;

      std::vector<std::uint32_t> left, right;
      for (auto r : item.rows)
        (lookup(X.row(r), static_cast<std::uint32_t>(best.feature)) <= best.threshold ? left : right)
            .push_back(r);
      const auto li = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[item.node];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = li;
      node.right = li + 1;
      stack.push_back({li + 1, std::move(right), item.depth + 1});
      stack.push_back({li, std::move(left), item.depth + 1});
    }
    return tree;
  }
};

RandomForestParams train_random_forest(const EstimatorSpec& spec, const SparseMatrix& X,
                                       std::span<const int> y, unsigned threads) {
  const auto n_trees = static_cast<std::size_t>(spec.get("n_trees"));
  auto max_features = static_cast<std::size_t>(spec.get("max_features"));
  if (max_features == 0)
    max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(X.n_cols)))));
  const ColumnView cols(X);
  RandomForestParams p;
  p.trees.resize(n_trees);
  parallel_for(n_trees, threads, [&](std::size_t t) {
    TreeGrower grower{X, cols, y, static_cast<std::size_t>(spec.get("max_depth")), max_features,
                      spec.get("min_samples_split"), {}, {}, {}, {}, 0, {}};
    Rng rng(derive_seed(spec.seed, t));
    p.trees[t] = grower.grow(rng, spec.get("bootstrap") != 0);
  });
  return p;
}

}  // namespace

int DecisionTree::predict(std::span<const features::SparseEntry> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(
        lookup(row, static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right);
  }
  return nodes[i].count1 > nodes[i].count0 ? 1 : 0;
}

TrainedModel train(const EstimatorSpec& spec, const SparseMatrix& X, std::span<const int> y,
                   unsigned threads) {
  check_training_input(X, y);
  TrainedModel m;
  m.family = spec.family;
  m.n_features = X.n_cols;
  switch (spec.family) {
    case Family::NaiveBayes: m.params = train_naive_bayes(spec, X, y); break;
    case Family::LinearSvm: m.params = train_linear_svm(spec, X, y); break;
    case Family::RandomForest: m.params = train_random_forest(spec, X, y, threads); break;
  }
  return m;
}

std::vector<double> score(const TrainedModel& model, const SparseMatrix& X) {
  if (X.n_cols != model.n_features)
    throw DataError("score: feature dimensionality " + std::to_string(X.n_cols) +
                    " does not match the trained model's " + std::to_string(model.n_features));
  std::vector<double> s(X.n_rows());
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        for (std::size_t r = 0; r < X.n_rows(); ++r) {
          const auto row = X.row(r);
          if constexpr (std::is_same_v<P, NaiveBayesParams>) {
            double v = p.log_prior[1] - p.log_prior[0];
            for (const auto& e : row)
              v += e.value * (p.log_likelihood[1][e.column] - p.log_likelihood[0][e.column]);
            s[r] = v;
          } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
            double v = p.bias;
            for (const auto& e : row) v += p.weights[e.column] * e.value;
            s[r] = v;
          } else {
            std::size_t votes = 0;
            for (const auto& tree : p.trees) votes += static_cast<std::size_t>(tree.predict(row));
            s[r] = static_cast<double>(votes) / static_cast<double>(p.trees.size());
          }
        }
      },
      model.params);
  return s;
}

double default_threshold(Family family) { return family == Family::RandomForest ? 0.5 : 0.0; }

std::vector<int> threshold_scores(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

std::vector<int> predict(const TrainedModel& model, const SparseMatrix& X,
                         std::optional<double> threshold) {
  return threshold_scores(score(model, X), threshold.value_or(default_threshold(model.family)));
}

std::string model_to_json(const TrainedModel& model) {
  nlohmann::json j;
  j["family"] = family_name(model.family);
  j["n_features"] = model.n_features;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveBayesParams>) {
          j["log_prior"] = {p.log_prior[0], p.log_prior[1]};
          j["log_likelihood"] = {p.log_likelihood[0], p.log_likelihood[1]};
        } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
          j["weights"] = p.weights;
          j["bias"] = p.bias;
        } else {
          auto trees = nlohmann::json::array();
          for (const auto& t : p.trees) {
            auto nodes = nlohmann::json::array();
            for (const auto& n : t.nodes)
              nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count0, n.count1});
            trees.push_back(std::move(nodes));
          }
          j["trees"] = std::move(trees);
        }
      },
      model.params);
  return j.dump();
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TrainedModel m;
    m.family = parse_family(j.at("family").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    switch (m.family) {
      case Family::NaiveBayes: {
        NaiveBayesParams p;
        for (int c = 0; c < 2; ++c) {
          p.log_prior[c] = j.at("log_prior").at(c).get<double>();
          p.log_likelihood[c] = j.at("log_likelihood").at(c).get<std::vector<double>>();
          if (p.log_likelihood[c].size() != m.n_features)
            throw DataError("model: log_likelihood size mismatch");
        }
        m.params = std::move(p);
        break;
      }
      case Family::LinearSvm: {
        LinearSvmParams p;
        p.weights = j.at("weights").get<std::vector<double>>();
        p.bias = j.at("bias").get<double>();
        if (p.weights.size() != m.n_features) throw DataError("model: weight size mismatch");
        m.params = std::move(p);
        break;
      }
      case Family::RandomForest: {
        RandomForestParams p;
        for (const auto& jt : j.at("trees")) {
          DecisionTree t;
          for (const auto& jn : jt)
            t.nodes.push_back({jn.at(0).get<std::int32_t>(), jn.at(1).get<double>(),
                               jn.at(2).get<std::int32_t>(), jn.at(3).get<std::int32_t>(),
                               jn.at(4).get<double>(), jn.at(5).get<double>()});
          p.trees.push_back(std::move(t));
        }
        m.params = std::move(p);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model));
}

TrainedModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

}  // namespace hatebench::classic
