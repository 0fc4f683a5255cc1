#pragma once

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "docclass/features.hpp"
#include "docclass/labels.hpp"
#include "docclass/svm.hpp"

namespace docclass {

struct LabeledSample {
  Sample features;
  ClassLabel label = ClassLabel::Mix;
};
using Dataset = std::vector<LabeledSample>;

inline constexpr std::size_t kPairCount = 10;

/// Index of the unordered class pair (a, b) in DagSvmModel::pairwise.
std::size_t pair_index(ClassLabel a, ClassLabel b);
std::pair<ClassLabel, ClassLabel> pair_at(std::size_t index);

/// Ten pairwise RBF machines evaluated as a first-vs-last elimination list
/// over [Mix, Text, Picture, Receipt, Highlight]. The machine for (i, j),
/// i < j, was trained with class i as +1.
struct DagSvmModel {
  std::array<ClassLabel, kClassCount> class_order = kAllClasses;
  std::array<BinarySvmModel, kPairCount> pairwise;
  StandardizationStats stats;
  FeatureMask mask;

  bool operator==(const DagSvmModel&) const = default;
};

struct DagTrainOptions {
  SmoConfig smo;
  unsigned threads = 1;
};

/// Fits standardization on the whole (masked) training set, then trains one
/// machine per class pair on the samples of those two classes.
DagSvmModel train_dag(const Dataset& data, double sigma, double box_c, const FeatureMask& mask,
                      const DagTrainOptions& opts = {});

struct NodeEvaluation {
  ClassLabel first;
  ClassLabel last;
  double value;  // >= 0 keeps `first`
};

struct DagDecision {
  ClassLabel label;
  std::vector<NodeEvaluation> path;
};

/// Decision value of the node separating `first` (positive) from `last`.
using PairwiseDecider = std::function<double(ClassLabel first, ClassLabel last)>;

/// Runs the elimination list with an arbitrary node oracle: the candidate
/// list starts at [1..5]; each step asks the (first, last) node and drops
/// the loser from its end, so exactly four nodes are visited.
DagDecision dag_eliminate(const PairwiseDecider& node);

/// `features` has the full (unmasked) dimension of the model's mask.
DagDecision classify_traced(const DagSvmModel& model, const std::vector<double>& features);
ClassLabel classify(const DagSvmModel& model, const std::vector<double>& features);

}  // namespace docclass
