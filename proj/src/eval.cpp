#include "docclass/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "docclass/error.hpp"
#include "docclass/parallel.hpp"

namespace docclass {

WeightTable default_weight_table() {
  WeightTable t;
  t.w = {{
      // Mix Text Picture Receipt Highlight  (predicted)
      {0, 3, 5, 6, 4},      // Mix
      {3, 0, 10, 6, 2},     // Text
      {3, 10, 0, 10, 15},   // Picture
      {6, 8, 3, 0, 8},      // Receipt
      {10, 10, 10, 10, 0},  // Highlight
  }};
  return t;
}

WeightTable weight_table_from_json(const nlohmann::json& j) {
  const auto& rows = j.is_object() ? j.at("weights") : j;
  if (!rows.is_array() || rows.size() != kClassCount) {
    throw Error(ErrorKind::Validation, "weight table must have 5 rows");
  }
  WeightTable t;
  for (std::size_t i = 0; i < kClassCount; ++i) {
    if (!rows[i].is_array() || rows[i].size() != kClassCount) {
      throw Error(ErrorKind::Validation, "weight table rows must have 5 entries");
    }
    for (std::size_t k = 0; k < kClassCount; ++k) {
      if (!rows[i][k].is_number()) throw Error(ErrorKind::Validation, "weights must be numbers");
      const double v = rows[i][k].get<double>();
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::Validation, "weights must be finite and non-negative");
      }
      if (i == k && v != 0.0) throw Error(ErrorKind::Validation, "weight table diagonal must be 0");
      t.w[i][k] = v;
    }
  }
  return t;
}

nlohmann::json to_json(const WeightTable& w) { return {{"weights", w.w}}; }

std::int64_t ConfusionMatrix::row_sum(ClassLabel truth) const {
  const auto& row = n[class_index(truth)];
  return std::accumulate(row.begin(), row.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : kAllClasses) t += row_sum(c);
  return t;
}

std::int64_t ConfusionMatrix::correct() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) t += n[i][i];
  return t;
}

nlohmann::json to_json(const ConfusionMatrix& c) { return c.n; }

double weighted_misclassification(const ConfusionMatrix& conf, const WeightTable& weights,
                                  Normalization norm) {
  if (norm == Normalization::GrandTotal) {
    const auto total = conf.total();
    if (total == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < kClassCount; ++i) {
      for (std::size_t j = 0; j < kClassCount; ++j) acc += weights.w[i][j] * conf.n[i][j];
    }
    return acc / static_cast<double>(total);
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < kClassCount; ++i) {
    const auto row = conf.row_sum(kAllClasses[i]);
    if (row == 0) continue;
    double acc = 0.0;
    for (std::size_t j = 0; j < kClassCount; ++j) acc += weights.w[i][j] * conf.n[i][j];
    rate += acc / static_cast<double>(row);
  }
  return rate;
}

LooResult loo_cross_validate(const Dataset& data, double sigma, double box_c,
                             const FeatureMask& mask, const EvalOptions& opts) {
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& s : data) ++counts[class_index(s.label)];
  for (auto c : kAllClasses) {
    if (counts[class_index(c)] < 2) {
      throw Error(ErrorKind::InsufficientData, "leave-one-out needs at least 2 samples of class " +
                                                   std::string(to_string(c)));
    }
  }

  LooResult out;
  out.predictions.resize(data.size());
  const DagTrainOptions train_opts{opts.smo, 1};
  parallel_for(data.size(), opts.threads, [&](std::size_t held_out) {
    Dataset fold;
    fold.reserve(data.size() - 1);
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (k != held_out) fold.push_back(data[k]);
    }
    const auto model = train_dag(fold, sigma, box_c, mask, train_opts);
    out.predictions[held_out] = classify(model, data[held_out].features);
  });
  for (std::size_t k = 0; k < data.size(); ++k) out.confusion.add(data[k].label, out.predictions[k]);
  return out;
}

GridSearchResult grid_search(const Dataset& data, std::vector<double> sigma_grid,
                             std::vector<double> c_grid, const FeatureMask& mask,
                             const WeightTable& weights, const EvalOptions& opts) {
  if (sigma_grid.empty() || c_grid.empty()) {
    throw Error(ErrorKind::EmptyGrid, "grid search needs non-empty sigma and C grids");
  }
  for (auto grid : {&sigma_grid, &c_grid}) {
    std::sort(grid->begin(), grid->end());
    grid->erase(std::unique(grid->begin(), grid->end()), grid->end());
    if (!(grid->front() > 0.0)) throw Error(ErrorKind::Validation, "grid values must be positive");
  }

  GridSearchResult result;
  for (double sigma : sigma_grid) {
    for (double c : c_grid) {
      const auto loo = loo_cross_validate(data, sigma, c, mask, opts);
      const double rate = weighted_misclassification(loo.confusion, weights, opts.normalization);
      result.sweep.push_back({sigma, c, rate, loo.confusion});
    }
  }
  // strict comparison keeps the earliest (smallest sigma, then C) minimizer
  const GridPoint* best = &result.sweep.front();
  for (const auto& p : result.sweep) {
    if (p.weighted_rate < best->weighted_rate) best = &p;
  }
  result.sigma = best->sigma;
  result.box_c = best->box_c;
  result.weighted_rate = best->weighted_rate;
  result.confusion = best->confusion;
  return result;
}

namespace {

double loo_rate(const Dataset& data, double sigma, double box_c, const FeatureMask& mask,
                const WeightTable& weights, const EvalOptions& opts) {
  const auto loo = loo_cross_validate(data, sigma, box_c, mask, opts);
  return weighted_misclassification(loo.confusion, weights, opts.normalization);
}

std::size_t data_dimension(const Dataset& data) {
  if (data.empty()) throw Error(ErrorKind::InsufficientData, "empty dataset");
  return data.front().features.size();
}

}  // namespace

double impact_factor(const Dataset& data, std::size_t feature, double sigma, double box_c,
                     const WeightTable& weights, const EvalOptions& opts) {
  const auto dims = data_dimension(data);
  if (feature >= dims) throw Error(ErrorKind::Validation, "feature index out of range");
  const double baseline = loo_rate(data, sigma, box_c, full_mask(dims), weights, opts);
  if (baseline == 0.0) {
    throw Error(ErrorKind::UndefinedImpact,
                "impact factor is undefined: all-feature weighted rate is 0");
  }
  auto mask = full_mask(dims);
  mask[feature] = false;
  const double dropped = loo_rate(data, sigma, box_c, mask, weights, opts);
  return (dropped - baseline) / baseline;
}

SelectionReport build_selection_report(const Dataset& data, double sigma, double box_c,
                                       const WeightTable& weights, std::vector<double> time_ms,
                                       const EvalOptions& opts) {
  const auto dims = data_dimension(data);
  if (time_ms.size() != dims) {
    throw Error(ErrorKind::DimensionMismatch, "one timing per feature required");
  }
  SelectionReport r;
  r.sigma = sigma;
  r.box_c = box_c;
  r.time_ms = std::move(time_ms);
  r.baseline_rate = loo_rate(data, sigma, box_c, full_mask(dims), weights, opts);
  for (std::size_t d = 0; d < dims; ++d) {
    auto mask = full_mask(dims);
    mask[d] = false;
    const double dropped = loo_rate(data, sigma, box_c, mask, weights, opts);
    r.names.emplace_back(feature_name(d));
    r.dropped_rate.push_back(dropped);
    r.impact.push_back(r.baseline_rate == 0.0
                           ? std::nullopt
                           : std::optional((dropped - r.baseline_rate) / r.baseline_rate));
  }
  return r;
}

std::array<double, kFeatureCount> time_features(const std::vector<Raster>& images,
                                                const FeatureConfig& cfg) {
  if (images.empty()) throw Error(ErrorKind::InsufficientData, "no images to time");
  using Clock = std::chrono::steady_clock;
  std::array<double, kFeatureCount> total{};
  for (std::size_t k = 0; k < images.size(); ++k) {
    std::optional<Raster> converted;
    if (images[k].space() == ColorSpace::RGB8) converted.emplace(rgb_to_yuv(images[k]));
    const Raster& r = converted ? *converted : images[k];
    if (k == 0) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) compute_feature(FeatureId(f), r, cfg);
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto start = Clock::now();
      volatile double sink = compute_feature(FeatureId(f), r, cfg);
      (void)sink;
      total[f] += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
  }
  for (auto& t : total) t /= static_cast<double>(images.size());
  return total;
}

std::optional<SelectionPolicy> parse_selection_policy(std::string_view text) {
  if (text == "min-impact" || text == "drop-min-impact") return SelectionPolicy::DropMinImpact;
  if (text == "keep-all") return SelectionPolicy::KeepAll;
  return std::nullopt;
}

FeatureMask select_features(const SelectionReport& report, SelectionPolicy policy) {
  const auto dims = report.dropped_rate.size();
  if (dims == 0 || report.impact.size() != dims || report.time_ms.size() != dims) {
    throw Error(ErrorKind::Validation, "incomplete selection report");
  }
  auto mask = full_mask(dims);
  if (policy == SelectionPolicy::KeepAll) return mask;

  const bool impacts_defined =
      std::all_of(report.impact.begin(), report.impact.end(), [](auto& v) { return v.has_value(); });
  auto score = [&](std::size_t d) {
    return impacts_defined ? *report.impact[d] : report.dropped_rate[d];
  };
  std::size_t drop = 0;
  for (std::size_t d = 1; d < dims; ++d) {
    const double s = score(d), best = score(drop);
    if (s < best || (s == best && report.time_ms[d] >= report.time_ms[drop])) drop = d;
  }
  mask[drop] = false;
  return mask;
}

nlohmann::json to_json(const SelectionReport& r) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t d = 0; d < r.names.size(); ++d) {
    features.push_back({{"name", r.names[d]},
                        {"time_ms", r.time_ms[d]},
                        {"impact", r.impact[d] ? nlohmann::json(*r.impact[d]) : nlohmann::json()},
                        {"dropped_rate", r.dropped_rate[d]}});
  }
  return {{"baseline_rate", r.baseline_rate},
          {"sigma", r.sigma},
          {"box_c", r.box_c},
          {"features", features}};
}

SelectionReport selection_report_from_json(const nlohmann::json& j) {
  try {
    SelectionReport r;
    j.at("baseline_rate").get_to(r.baseline_rate);
    j.at("sigma").get_to(r.sigma);
    j.at("box_c").get_to(r.box_c);
    for (const auto& f : j.at("features")) {
      r.names.push_back(f.at("name").get<std::string>());
      r.time_ms.push_back(f.at("time_ms").get<double>());
      const auto& impact = f.at("impact");
      r.impact.push_back(impact.is_null() ? std::nullopt : std::optional(impact.get<double>()));
      r.dropped_rate.push_back(f.at("dropped_rate").get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Validation, std::string("bad selection report: ") + e.what());
  }
}

std::string format_confusion_table(const ConfusionMatrix& c) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "truth\\pred";
  for (auto p : kAllClasses) os << std::right << std::setw(11) << to_string(p);
  os << '\n';
  for (auto t : kAllClasses) {
    os << std::left << std::setw(14) << to_string(t);
    for (auto p : kAllClasses) os << std::right << std::setw(11) << c.n[class_index(t)][class_index(p)];
    os << '\n';
  }
  return os.str();
}

std::string format_selection_table(const SelectionReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "feature" << std::right << std::setw(12) << "time_ms"
     << std::setw(12) << "impact" << std::setw(14) << "dropped_W_m" << '\n';
  os << std::fixed;
  for (std::size_t d = 0; d < r.names.size(); ++d) {
    os << std::left << std::setw(22) << r.names[d] << std::right << std::setw(12)
       << std::setprecision(3) << r.time_ms[d] << std::setw(12);
    if (r.impact[d]) {
      std::ostringstream pct;
      pct << std::fixed << std::setprecision(2) << *r.impact[d] * 100.0 << '%';
      os << pct.str();
    } else {
      os << "undefined";
    }
    os << std::setw(14) << std::setprecision(4) << r.dropped_rate[d] << '\n';
  }
  os << "baseline W_m " << std::setprecision(4) << r.baseline_rate << " at sigma "
     << std::defaultfloat << r.sigma << ", C " << r.box_c << '\n';
  return os.str();
}

}  // namespace docclass
