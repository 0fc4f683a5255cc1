#include "docclass/dagsvm.hpp"

#include <deque>
#include <string>

#include "docclass/error.hpp"
#include "docclass/parallel.hpp"

namespace docclass {

std::size_t pair_index(ClassLabel a, ClassLabel b) {
  auto i = class_index(a), j = class_index(b);
  if (i == j) throw Error(ErrorKind::Validation, "pair needs two distinct classes");
  if (i > j) std::swap(i, j);
  // row-major upper triangle of the 5x5 class grid
  return i * (2 * kClassCount - i - 1) / 2 + (j - i - 1);
}

std::pair<ClassLabel, ClassLabel> pair_at(std::size_t index) {
  for (auto a : kAllClasses) {
    for (auto b : kAllClasses) {
      if (code(a) < code(b) && pair_index(a, b) == index) return {a, b};
    }
  }
  throw Error(ErrorKind::Validation, "pair index out of range");
}

DagSvmModel train_dag(const Dataset& data, double sigma, double box_c, const FeatureMask& mask,
                      const DagTrainOptions& opts) {
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& s : data) ++counts[class_index(s.label)];
  for (auto c : kAllClasses) {
    if (counts[class_index(c)] == 0) {
      throw Error(ErrorKind::IncompleteDataset,
                  "training data has no samples of class " + std::string(to_string(c)));
    }
  }
  if (active_count(mask) == 0) throw Error(ErrorKind::Validation, "mask selects no features");

  std::vector<Sample> masked;
  masked.reserve(data.size());
  for (const auto& s : data) masked.push_back(apply_mask(s.features, mask));

  DagSvmModel model;
  model.mask = mask;
  model.stats = fit_standardization(masked);
  std::vector<Sample> scaled;
  scaled.reserve(masked.size());
  for (const auto& m : masked) scaled.push_back(standardize(m, model.stats));

  parallel_for(kPairCount, opts.threads, [&](std::size_t p) {
    const auto [pos, neg] = pair_at(p);
    std::vector<Sample> xs;
    std::vector<int> ys;
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (data[k].label == pos || data[k].label == neg) {
        xs.push_back(scaled[k]);
        ys.push_back(data[k].label == pos ? 1 : -1);
      }
    }
    model.pairwise[p] = train_binary(xs, ys, sigma, box_c, opts.smo);
  });
  return model;
}

DagDecision dag_eliminate(const PairwiseDecider& node) {
  std::deque<ClassLabel> candidates(kAllClasses.begin(), kAllClasses.end());
  DagDecision out{ClassLabel::Mix, {}};
  out.path.reserve(kClassCount - 1);
  while (candidates.size() > 1) {
    const auto first = candidates.front(), last = candidates.back();
    const double value = node(first, last);
    out.path.push_back({first, last, value});
    if (value >= 0.0) {
      candidates.pop_back();
    } else {
      candidates.pop_front();
    }
  }
  out.label = candidates.front();
  return out;
}

DagDecision classify_traced(const DagSvmModel& model, const std::vector<double>& features) {
  const auto x = standardize(apply_mask(features, model.mask), model.stats);
  return dag_eliminate([&](ClassLabel first, ClassLabel last) {
    return predict_binary(model.pairwise[pair_index(first, last)], x).value;
  });
}

ClassLabel classify(const DagSvmModel& model, const std::vector<double>& features) {
  return classify_traced(model, features).label;
}

}  // namespace docclass
