#include "docclass/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "docclass/error.hpp"

namespace docclass {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "kernel inputs have " + std::to_string(x.size()) +
                                                  " and " + std::to_string(y.size()) +
                                                  " dimensions");
  }
  if (!(sigma > 0.0)) throw Error(ErrorKind::Validation, "kernel width must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

namespace {

void validate_training_input(std::span<const Sample> samples, std::span<const int> labels,
                             double sigma, double box_c) {
  if (samples.size() != labels.size()) {
    throw Error(ErrorKind::Validation, "sample and label counts differ");
  }
  if (!(sigma > 0.0) || !(box_c > 0.0)) {
    throw Error(ErrorKind::Validation, "sigma and box constraint must be positive");
  }
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1) pos = true;
    else if (l == -1) neg = true;
    else throw Error(ErrorKind::Validation, "binary labels must be -1 or +1");
  }
  if (!pos || !neg) {
    throw Error(ErrorKind::DegenerateTraining, "binary training needs samples of both labels");
  }
  const auto dim = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != dim) throw Error(ErrorKind::DimensionMismatch, "ragged training samples");
    for (double v : s) {
      if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "non-finite training feature");
    }
  }
}

}  // namespace

SmoResult solve_smo(std::span<const Sample> samples, std::span<const int> labels, double sigma,
                    double box_c, const SmoConfig& cfg) {
  validate_training_input(samples, labels, sigma, box_c);
  const std::size_t n = samples.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] > labels[b];
    return samples[a] < samples[b];
  });

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[order[i]];

  // Q_ij = y_i y_j K(x_i, x_j), stored dense; node problems are small.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(samples[order[i]], samples[order[j]], sigma);
      q[i * n + j] = q[j * n + i] = y[i] * y[j] * k;
    }
  }

  const double c = box_c;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < c; };

  const std::size_t max_iter = std::max<std::size_t>(1, cfg.max_passes) * n;
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
      if (in_low(t) && y[t] * grad[t] > g_max2) {
        g_max2 = y[t] * grad[t];
        j = t;
      }
    }
    if (i == n || j == n || g_max + g_max2 < cfg.kkt_tolerance) {
      converged = true;
      break;
    }

    const double* qi = &q[i * n];
    const double* qj = &q[j * n];
    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = qi[i] + qj[j] + 2.0 * qi[j];
      if (quad <= 0) quad = cfg.tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = qi[i] + qj[j] - 2.0 * qi[j];
      if (quad <= 0) quad = cfg.tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double d_i = alpha[i] - old_i, d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * d_i + qj[t] * d_j;
  }

  // offset from free variables, or the midpoint of the feasible interval
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  SmoResult result;
  result.iterations = iter;
  result.converged = converged;
  result.alphas.assign(n, 0.0);
  auto& model = result.model;
  model.sigma = sigma;
  model.box_c = box_c;
  model.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    result.alphas[order[t]] = alpha[t];
    if (alpha[t] > 0) {
      model.support_vectors.push_back(samples[order[t]]);
      model.dual_coefs.push_back(alpha[t] * y[t]);
    }
  }
  return result;
}

BinarySvmModel train_binary(std::span<const Sample> samples, std::span<const int> labels,
                            double sigma, double box_c, const SmoConfig& cfg) {
  return solve_smo(samples, labels, sigma, box_c, cfg).model;
}

BinaryDecision predict_binary(const BinarySvmModel& model, std::span<const double> x) {
  if (!model.support_vectors.empty() && x.size() != model.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " dimensions, model expects " +
                                                  std::to_string(model.dimension()));
  }
  double value = model.bias;
  for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
    value += model.dual_coefs[k] * rbf_kernel(model.support_vectors[k], x, model.sigma);
  }
  return {value >= 0.0 ? 1 : -1, value};
}

StandardizationStats fit_standardization(std::span<const Sample> samples) {
  if (samples.empty()) throw Error(ErrorKind::InsufficientData, "no samples to standardize");
  const auto dim = samples.front().size();
  StandardizationStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stddev.assign(dim, 0.0);
  const double n = static_cast<double>(samples.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = samples.front()[d], hi = lo, sum = 0.0;
    for (const auto& s : samples) {
      if (s.size() != dim) throw Error(ErrorKind::DimensionMismatch, "ragged samples");
      lo = std::min(lo, s[d]);
      hi = std::max(hi, s[d]);
      sum += s[d];
    }
    if (lo == hi) {
      stats.mean[d] = lo;
      stats.stddev[d] = StandardizationStats::kStdFloor;
      continue;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : samples) ss += (s[d] - mean) * (s[d] - mean);
    stats.mean[d] = mean;
    stats.stddev[d] = std::max(std::sqrt(ss / n), StandardizationStats::kStdFloor);
  }
  return stats;
}

Sample standardize(std::span<const double> x, const StandardizationStats& stats) {
  if (x.size() != stats.mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " dimensions, statistics cover " +
                                                  std::to_string(stats.mean.size()));
  }
  Sample out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - stats.mean[d]) / stats.stddev[d];
  return out;
}

nlohmann::json to_json(const StandardizationStats& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

nlohmann::json to_json(const BinarySvmModel& m, const StandardizationStats* stats) {
  nlohmann::json j;
  j["version"] = kBinaryModelVersion;
  j["sigma"] = m.sigma;
  j["box_c"] = m.box_c;
  j["bias"] = m.bias;
  j["stats"] = stats ? to_json(*stats) : nlohmann::json(nullptr);
  j["support_vectors"] = m.support_vectors;
  j["dual_coefs"] = m.dual_coefs;
  return j;
}

StandardizationStats stats_from_json(const nlohmann::json& j) {
  try {
    StandardizationStats s;
    j.at("mean").get_to(s.mean);
    j.at("stddev").get_to(s.stddev);
    if (s.mean.size() != s.stddev.size()) throw Error(ErrorKind::Corrupted, "stats size mismatch");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Corrupted, std::string("bad standardization stats: ") + e.what());
  }
}

BinarySvmModel binary_model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kBinaryModelVersion) {
      throw Error(ErrorKind::UnsupportedVersion,
                  "unsupported binary model version " + std::to_string(version));
    }
    BinarySvmModel m;
    j.at("sigma").get_to(m.sigma);
    j.at("box_c").get_to(m.box_c);
    j.at("bias").get_to(m.bias);
    j.at("support_vectors").get_to(m.support_vectors);
    j.at("dual_coefs").get_to(m.dual_coefs);
    if (m.support_vectors.size() != m.dual_coefs.size() || !(m.sigma > 0) || !(m.box_c > 0)) {
      throw Error(ErrorKind::Corrupted, "inconsistent binary model");
    }
    for (const auto& sv : m.support_vectors) {
      if (sv.size() != m.dimension()) throw Error(ErrorKind::Corrupted, "ragged support vectors");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Corrupted, std::string("bad binary model: ") + e.what());
  }
}

}  // namespace docclass
