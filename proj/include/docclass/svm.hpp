#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace docclass {

using Sample = std::vector<double>;

/// exp(-|x - y|^2 / (2 sigma^2)). Throws DimensionMismatch / Validation.
double rbf_kernel(std::span<const double> x, std::span<const double> y, double sigma);

struct SmoConfig {
  double kkt_tolerance = 1e-3;
  /// The solver stops after max_passes * n pair updates at the latest.
  std::size_t max_passes = 10000;
  /// Curvature floor for pairs whose kernel rows coincide.
  double tau = 1e-12;
};

struct BinarySvmModel {
  std::vector<Sample> support_vectors;
  std::vector<double> dual_coefs;  // alpha_k * y_k
  double bias = 0.0;
  double sigma = 1.0;
  double box_c = 1.0;

  std::size_t dimension() const { return support_vectors.empty() ? 0 : support_vectors[0].size(); }
  bool operator==(const BinarySvmModel&) const = default;
};

/// Full solver output; alphas are in the caller's sample order.
struct SmoResult {
  BinarySvmModel model;
  std::vector<double> alphas;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Soft-margin RBF SVM trained by SMO with maximal-violating-pair selection.
/// Samples are solved in a canonical order (by label, then lexicographic
/// features) so the result does not depend on input order.
/// Labels must be -1 or +1 with both present.
SmoResult solve_smo(std::span<const Sample> samples, std::span<const int> labels, double sigma,
                    double box_c, const SmoConfig& cfg = {});
BinarySvmModel train_binary(std::span<const Sample> samples, std::span<const int> labels,
                            double sigma, double box_c, const SmoConfig& cfg = {});

struct BinaryDecision {
  int label = 1;
  double value = 0.0;
};

/// sign(sum dual_coefs * K(sv, x) + bias); a value of exactly 0 yields +1.
BinaryDecision predict_binary(const BinarySvmModel& model, std::span<const double> x);

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // already floored

  static constexpr double kStdFloor = 1e-9;
  bool operator==(const StandardizationStats&) const = default;
};

/// Population mean / std per dimension. Constant dimensions keep their exact
/// value as the mean so they standardize to exactly 0.
StandardizationStats fit_standardization(std::span<const Sample> samples);
Sample standardize(std::span<const double> x, const StandardizationStats& stats);

inline constexpr int kBinaryModelVersion = 1;

nlohmann::json to_json(const BinarySvmModel& m, const StandardizationStats* stats = nullptr);
nlohmann::json to_json(const StandardizationStats& s);
/// Throws UnsupportedVersion or Corrupted.
BinarySvmModel binary_model_from_json(const nlohmann::json& j);
StandardizationStats stats_from_json(const nlohmann::json& j);

}  // namespace docclass
