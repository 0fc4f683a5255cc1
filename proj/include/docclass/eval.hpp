#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "docclass/dagsvm.hpp"
#include "docclass/features.hpp"

namespace docclass {

/// Misclassification costs; rows are ground truth, columns predictions.
struct WeightTable {
  std::array<std::array<double, kClassCount>, kClassCount> w{};

  double operator()(ClassLabel truth, ClassLabel predicted) const {
    return w[class_index(truth)][class_index(predicted)];
  }
  bool operator==(const WeightTable&) const = default;
};

/// Built-in copier pipeline cost table.
WeightTable default_weight_table();
/// {"weights": [[...5 rows of 5...]]} or a bare 5x5 array. Validates shape,
/// non-negativity and a zero diagonal.
WeightTable weight_table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WeightTable& w);

struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kClassCount>, kClassCount> n{};

  void add(ClassLabel truth, ClassLabel predicted) {
    ++n[class_index(truth)][class_index(predicted)];
  }
  std::int64_t row_sum(ClassLabel truth) const;
  std::int64_t total() const;
  std::int64_t correct() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

nlohmann::json to_json(const ConfusionMatrix& c);

enum class Normalization {
  PerClass,    // sum over truth rows of the row-normalized weighted error
  GrandTotal,  // weighted error over all samples
};

/// Weighted misclassification rate. Empty rows contribute 0.
double weighted_misclassification(const ConfusionMatrix& conf, const WeightTable& weights,
                                  Normalization norm = Normalization::PerClass);

struct EvalOptions {
  SmoConfig smo;
  unsigned threads = 1;
  Normalization normalization = Normalization::PerClass;
};

struct LooResult {
  ConfusionMatrix confusion;
  std::vector<ClassLabel> predictions;  // per held-out sample, input order
};

/// Leave-one-out: every sample is classified by a DAG trained (standardization
/// included) on all other samples. Needs at least two samples per class.
LooResult loo_cross_validate(const Dataset& data, double sigma, double box_c,
                             const FeatureMask& mask, const EvalOptions& opts = {});

inline const std::vector<double> kDefaultSigmaGrid = {0.1, 0.3, 1.0, 3.0, 10.0};
inline const std::vector<double> kDefaultCGrid = {0.1, 1.0, 10.0, 100.0};

struct GridPoint {
  double sigma;
  double box_c;
  double weighted_rate;
  ConfusionMatrix confusion;
};

struct GridSearchResult {
  double sigma = 0.0;
  double box_c = 0.0;
  double weighted_rate = 0.0;
  ConfusionMatrix confusion;
  std::vector<GridPoint> sweep;  // sorted by sigma, then C
};

/// Exhaustive LOO sweep; returns the minimum weighted rate, ties resolved
/// toward smaller sigma and then smaller C.
GridSearchResult grid_search(const Dataset& data, std::vector<double> sigma_grid,
                             std::vector<double> c_grid, const FeatureMask& mask,
                             const WeightTable& weights, const EvalOptions& opts = {});

/// (W_without_d - W_all) / W_all using the all-features mask of the data's
/// dimension. Throws UndefinedImpact when W_all is 0.
double impact_factor(const Dataset& data, std::size_t feature, double sigma, double box_c,
                     const WeightTable& weights, const EvalOptions& opts = {});

struct SelectionReport {
  std::vector<std::string> names;
  std::vector<std::optional<double>> impact;  // empty when the baseline is 0
  std::vector<double> dropped_rate;           // weighted rate with the feature removed
  std::vector<double> time_ms;
  double baseline_rate = 0.0;
  double sigma = 0.0;
  double box_c = 0.0;

  bool operator==(const SelectionReport&) const = default;
};

/// LOO weighted rate for all features and for each single feature removed.
SelectionReport build_selection_report(const Dataset& data, double sigma, double box_c,
                                       const WeightTable& weights, std::vector<double> time_ms,
                                       const EvalOptions& opts = {});

/// Mean wall-clock milliseconds per feature per image, measured on a
/// monotonic clock after one untimed warm-up pass over the first image.
std::array<double, kFeatureCount> time_features(const std::vector<Raster>& images,
                                                const FeatureConfig& cfg = {});

enum class SelectionPolicy { DropMinImpact, KeepAll };
std::optional<SelectionPolicy> parse_selection_policy(std::string_view text);

/// DropMinImpact removes the feature with the smallest impact, preferring the
/// slowest among equals and then the highest index. When impacts are
/// undefined the dropped rates (same ordering) are compared instead.
FeatureMask select_features(const SelectionReport& report, SelectionPolicy policy);

nlohmann::json to_json(const SelectionReport& r);
SelectionReport selection_report_from_json(const nlohmann::json& j);

std::string format_confusion_table(const ConfusionMatrix& c);
std::string format_selection_table(const SelectionReport& r);

}  // namespace docclass
