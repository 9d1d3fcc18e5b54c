#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hatebench/features.hpp"
#include "hatebench/parallel.hpp"

namespace hatebench::classic {

using features::SparseMatrix;

enum class Family { NaiveBayes, LinearSvm, RandomForest };

const char* family_name(Family f);
Family parse_family(const std::string& name);

/// A conventional estimator plus its hyperparameters.
///
///   naive_bayes    alpha (1.0)
///   linear_svm     lambda (1e-4), epochs (20), project (1)
///   random_forest  n_trees (200), max_depth (32), max_features (0 = sqrt(dim)),
///                  bootstrap (1), min_samples_split (2)
///
/// Unknown keys and out-of-range values are rejected by make().
struct EstimatorSpec {
  Family family = Family::NaiveBayes;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  static EstimatorSpec make(Family family, const std::map<std::string, double>& overrides = {},
                            std::uint64_t seed = 0);
  double get(const std::string& key) const;
  /// "family(k=v,...)" with keys in sorted order.
  std::string describe() const;
};

struct NaiveBayesParams {
  double log_prior[2] = {0, 0};
  std::vector<double> log_likelihood[2];
};

struct LinearSvmParams {
  std::vector<double> weights;
  double bias = 0;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;       // go left when x <= threshold
  std::int32_t left = -1, right = -1;
  double count0 = 0, count1 = 0;  // bootstrap-weighted class counts at the node
  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  /// Majority class of the leaf reached by `row` (ties go to 0).
  int predict(std::span<const features::SparseEntry> row) const;
};

struct RandomForestParams {
  std::vector<DecisionTree> trees;
};

struct TrainedModel {
  Family family = Family::NaiveBayes;
  std::size_t n_features = 0;
  std::variant<NaiveBayesParams, LinearSvmParams, RandomForestParams> params;
};

/// Deterministic for a fixed spec seed; `threads` only affects speed.
TrainedModel train(const EstimatorSpec& spec, const SparseMatrix& X, std::span<const int> y,
                   unsigned threads = default_threads());

/// Higher means more HS-like: NB log-posterior margin, SVM signed
/// distance, RF positive vote fraction.
std::vector<double> score(const TrainedModel& model, const SparseMatrix& X);

double default_threshold(Family family);

/// Label 1 iff score > threshold.
std::vector<int> predict(const TrainedModel& model, const SparseMatrix& X,
                         std::optional<double> threshold = std::nullopt);
std::vector<int> threshold_scores(std::span<const double> scores, double threshold);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

/// Column-wise copy of a CSR matrix, used by tree growing.
struct ColumnView {
  std::vector<std::size_t> col_ptr;
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  explicit ColumnView(const SparseMatrix& X);
};

/// Gini impurity of a two-class weighted node.
double gini(double w0, double w1);

}  // namespace hatebench::classic
