#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "docclass/dataset.hpp"
#include "docclass/error.hpp"
#include "docclass/eval.hpp"
#include "eval_fixtures.hpp"

using namespace docclass;
using docclass::testing::noisy_clusters;
using docclass::testing::table3_yuv;
using docclass::testing::table4_lch;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

SelectionReport table1_report() {
  SelectionReport r;
  for (std::size_t d = 0; d < kFeatureCount; ++d) r.names.emplace_back(feature_name(d));
  r.time_ms = {12.01, 12.51, 14.97, 73.92, 36.12, 11.45, 0.67, 0.81};
  for (double i : {0.2461, 0.1384, 0.1102, 0.019, 0.102, 0.034, 0.4843, 0.1365}) r.impact.push_back(i);
  r.baseline_rate = 1.0;
  for (const auto& i : r.impact) r.dropped_rate.push_back(1.0 + *i);
  return r;
}

}  // namespace

TEST_CASE("default weight table") {
  const auto w = default_weight_table();
  CHECK(w(ClassLabel::Mix, ClassLabel::Receipt) == 6);
  CHECK(w(ClassLabel::Text, ClassLabel::Picture) == 10);
  CHECK(w(ClassLabel::Picture, ClassLabel::Highlight) == 15);
  CHECK(w(ClassLabel::Receipt, ClassLabel::Picture) == 3);
  CHECK(w(ClassLabel::Highlight, ClassLabel::Mix) == 10);
  for (auto c : kAllClasses) CHECK(w(c, c) == 0);
}

TEST_CASE("weight table json") {
  const auto w = default_weight_table();
  CHECK(weight_table_from_json(to_json(w)) == w);
  CHECK(weight_table_from_json(to_json(w).at("weights")) == w);
  auto bad = to_json(w);
  bad["weights"][2][2] = 1;
  CHECK(kind_of([&] { weight_table_from_json(bad); }) == ErrorKind::Validation);
  bad = to_json(w);
  bad["weights"][0][1] = -1;
  CHECK(kind_of([&] { weight_table_from_json(bad); }) == ErrorKind::Validation);
  bad = to_json(w);
  bad["weights"].erase(4);
  CHECK(kind_of([&] { weight_table_from_json(bad); }) == ErrorKind::Validation);
}

TEST_CASE("weighted misclassification on the reference matrices") {
  const auto w = default_weight_table();
  // rows: 0.98 + 0.83 + 0.25 + 0.81 + 1.80
  CHECK(weighted_misclassification(table3_yuv(), w) == doctest::Approx(4.67).epsilon(1e-12));
  // rows: 1.04 + 0.96 + 0.36 + 0.88 + 2.40
  CHECK(weighted_misclassification(table4_lch(), w) == doctest::Approx(5.64).epsilon(1e-12));
  CHECK(weighted_misclassification(table3_yuv(), w, Normalization::GrandTotal) ==
        doctest::Approx(467.0 / 500).epsilon(1e-12));
}

TEST_CASE("weighted misclassification examples") {
  const auto w = default_weight_table();
  ConfusionMatrix perfect;
  for (auto c : kAllClasses) perfect.n[class_index(c)][class_index(c)] = 100;
  CHECK(weighted_misclassification(perfect, w) == 0.0);

  auto one_off = perfect;
  one_off.n[1][1] = 99;
  one_off.n[1][2] = 1;
  CHECK(weighted_misclassification(one_off, w) == doctest::Approx(0.10));

  ConfusionMatrix sparse;
  sparse.n[0][1] = 2;
  CHECK(weighted_misclassification(sparse, w) == 3.0);
  CHECK(weighted_misclassification(ConfusionMatrix{}, w) == 0.0);
}

TEST_CASE("weighted misclassification is linear and label symmetric") {
  std::mt19937 rng(12);
  const auto w = default_weight_table();
  // row sums of 64 keep every quotient dyadic, so equalities are exact
  auto random_matrix = [&] {
    ConfusionMatrix c;
    for (auto& row : c.n) {
      int left = 64;
      for (std::size_t j = 0; j + 1 < kClassCount; ++j) {
        row[j] = std::uniform_int_distribution<int>(0, left)(rng);
        left -= static_cast<int>(row[j]);
      }
      row[kClassCount - 1] = left;
    }
    return c;
  };
  for (int t = 0; t < 50; ++t) {
    const auto a = random_matrix(), b = random_matrix();
    ConfusionMatrix sum;
    for (std::size_t i = 0; i < kClassCount; ++i)
      for (std::size_t j = 0; j < kClassCount; ++j) sum.n[i][j] = a.n[i][j] + b.n[i][j];
    CHECK(weighted_misclassification(sum, w) ==
          (weighted_misclassification(a, w) + weighted_misclassification(b, w)) / 2);

    std::array<std::size_t, kClassCount> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    ConfusionMatrix pa;
    WeightTable pw;
    for (std::size_t i = 0; i < kClassCount; ++i) {
      for (std::size_t j = 0; j < kClassCount; ++j) {
        pa.n[perm[i]][perm[j]] = a.n[i][j];
        pw.w[perm[i]][perm[j]] = w.w[i][j];
      }
    }
    CHECK(weighted_misclassification(pa, pw) == weighted_misclassification(a, w));
  }
}

TEST_CASE("loo mechanics") {
  SUBCASE("two per class") {
    const auto data = noisy_clusters(2, 0, 3);
    const auto r = loo_cross_validate(data, 1.0, 10.0, full_mask(2));
    CHECK(r.predictions.size() == 10);
    for (auto c : kAllClasses) CHECK(r.confusion.row_sum(c) == 2);
  }
  SUBCASE("row sums follow class sizes") {
    auto data = noisy_clusters(6, 1, 4);
    data.push_back({{0.1, -0.1}, ClassLabel::Mix});
    const auto r = loo_cross_validate(data, 1.0, 10.0, full_mask(2));
    CHECK(r.confusion.row_sum(ClassLabel::Mix) == 8);
    CHECK(r.confusion.row_sum(ClassLabel::Text) == 7);
    CHECK(r.confusion.total() == static_cast<std::int64_t>(data.size()));
    // the noise points and nothing else are missed
    CHECK(r.confusion.correct() == static_cast<std::int64_t>(data.size()) - 5);
    for (std::size_t k = 0; k < data.size(); ++k) {
      CHECK(r.confusion.n[class_index(data[k].label)][class_index(r.predictions[k])] > 0);
    }
  }
  SUBCASE("a class with one sample") {
    auto data = noisy_clusters(3, 0, 5);
    Dataset trimmed;
    bool kept = false;
    for (const auto& s : data) {
      if (s.label == ClassLabel::Picture && kept) continue;
      kept = kept || s.label == ClassLabel::Picture;
      trimmed.push_back(s);
    }
    data = trimmed;
    CHECK(kind_of([&] { loo_cross_validate(data, 1.0, 1.0, full_mask(2)); }) ==
          ErrorKind::InsufficientData);
  }
  SUBCASE("duplicated samples") {
    const auto base = noisy_clusters(4, 0, 6);
    Dataset twice;
    for (const auto& s : base) {
      twice.push_back(s);
      twice.push_back(s);
    }
    const auto r = loo_cross_validate(twice, 1.0, 10.0, full_mask(2));
    for (std::size_t k = 0; k < twice.size(); k += 2) {
      CHECK(r.predictions[k] == r.predictions[k + 1]);
      CHECK(r.predictions[k] == twice[k].label);
    }
  }
  SUBCASE("thread count does not change results") {
    const auto data = noisy_clusters(5, 1, 7);
    EvalOptions one, many;
    many.threads = 3;
    const auto a = loo_cross_validate(data, 0.5, 1.0, full_mask(2), one);
    const auto b = loo_cross_validate(data, 0.5, 1.0, full_mask(2), many);
    CHECK(a.confusion == b.confusion);
    CHECK(a.predictions == b.predictions);
  }
}

TEST_CASE("grid search") {
  const auto data = noisy_clusters(5, 0, 8);
  const auto w = default_weight_table();
  SUBCASE("singleton grid") {
    const auto r = grid_search(data, {0.3}, {10}, full_mask(2), w);
    CHECK(r.sigma == 0.3);
    CHECK(r.box_c == 10);
    CHECK(r.sweep.size() == 1);
    CHECK(r.weighted_rate == r.sweep[0].weighted_rate);
  }
  SUBCASE("degenerate kernel width loses") {
    const auto r = grid_search(data, {1e-6, 1.0}, {1}, full_mask(2), w);
    CHECK(r.sigma == 1.0);
    CHECK(r.weighted_rate == 0.0);
    CHECK(r.sweep[0].weighted_rate > 0.0);
  }
  SUBCASE("minimality and tie breaking") {
    const auto r = grid_search(data, {10, 1, 0.3, 1}, {100, 0.1, 1}, full_mask(2), w);
    CHECK(r.sweep.size() == 9);
    CHECK(std::is_sorted(r.sweep.begin(), r.sweep.end(), [](const GridPoint& a, const GridPoint& b) {
      return a.sigma != b.sigma ? a.sigma < b.sigma : a.box_c < b.box_c;
    }));
    const GridPoint* first_min = nullptr;
    for (const auto& p : r.sweep) {
      CHECK(r.weighted_rate <= p.weighted_rate);
      if (!first_min && p.weighted_rate == r.weighted_rate) first_min = &p;
    }
    REQUIRE(first_min);
    CHECK(first_min->sigma == r.sigma);
    CHECK(first_min->box_c == r.box_c);
    CHECK(first_min->confusion == r.confusion);
  }
  SUBCASE("reproducible") {
    EvalOptions many;
    many.threads = 4;
    const auto a = grid_search(data, kDefaultSigmaGrid, {1, 10}, full_mask(2), w);
    const auto b = grid_search(data, kDefaultSigmaGrid, {1, 10}, full_mask(2), w, many);
    CHECK(a.sigma == b.sigma);
    CHECK(a.box_c == b.box_c);
    CHECK(a.weighted_rate == b.weighted_rate);
    for (std::size_t k = 0; k < a.sweep.size(); ++k) CHECK(a.sweep[k].confusion == b.sweep[k].confusion);
  }
  SUBCASE("empty grid") {
    CHECK(kind_of([&] { grid_search(data, {}, {1}, full_mask(2), w); }) == ErrorKind::EmptyGrid);
    CHECK(kind_of([&] { grid_search(data, {1}, {}, full_mask(2), w); }) == ErrorKind::EmptyGrid);
  }
}

TEST_CASE("impact factors") {
  const auto w = default_weight_table();
  SUBCASE("zero baseline is reported, not NaN") {
    const auto data = noisy_clusters(4, 0, 9);
    CHECK(kind_of([&] { impact_factor(data, 0, 1.0, 10.0, w); }) == ErrorKind::UndefinedImpact);
    const auto r = build_selection_report(data, 1.0, 10.0, w, {1, 2});
    CHECK(r.baseline_rate == 0.0);
    for (const auto& i : r.impact) CHECK_FALSE(i.has_value());
  }
  SUBCASE("inert dummy column") {
    auto data = noisy_clusters(6, 1, 10);
    for (auto& s : data) s.features.push_back(0.0);
    CHECK(std::abs(impact_factor(data, 2, 1.0, 10.0, w)) <= 1e-6);
  }
  SUBCASE("duplicated column") {
    auto data = noisy_clusters(6, 1, 11);
    for (auto& s : data) s.features.push_back(s.features[0]);
    CHECK(std::abs(impact_factor(data, 2, 1.0, 10.0, w)) <= 1e-6);
  }
  SUBCASE("the only informative feature matters") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0, 0.2);
    std::uniform_real_distribution<double> junk(-1, 1);
    Dataset data;
    for (auto c : kAllClasses) {
      for (int k = 0; k < 6; ++k) data.push_back({{3.0 * class_index(c) + n(rng), junk(rng)}, c});
    }
    // one mislabeled point keeps the baseline above zero
    data.push_back({{0.0, 0.0}, ClassLabel::Highlight});
    CHECK(impact_factor(data, 0, 1.0, 10.0, w) > 0.0);
  }
}

TEST_CASE("select_features") {
  SUBCASE("reference impact table drops text color variance") {
    const auto m = select_features(table1_report(), SelectionPolicy::DropMinImpact);
    CHECK(mask_to_string(m) == "11101111");
  }
  SUBCASE("full tie drops the highest index") {
    auto r = table1_report();
    for (auto& i : r.impact) i = 0.05;
    for (auto& t : r.time_ms) t = 1.0;
    CHECK(mask_to_string(select_features(r, SelectionPolicy::DropMinImpact)) == "11111110");
  }
  SUBCASE("impact tie prefers the slower feature") {
    auto r = table1_report();
    r.impact[1] = r.impact[5] = 0.001;
    CHECK(mask_to_string(select_features(r, SelectionPolicy::DropMinImpact)) == "10111111");
    r.time_ms[5] = 100;
    CHECK(mask_to_string(select_features(r, SelectionPolicy::DropMinImpact)) == "11111011");
  }
  SUBCASE("undefined impacts fall back to dropped rates") {
    auto r = table1_report();
    r.baseline_rate = 0;
    for (auto& i : r.impact) i.reset();
    r.dropped_rate = {0.3, 0.2, 0.0, 0.1, 0.0, 0.5, 0.9, 0.1};
    CHECK(mask_to_string(select_features(r, SelectionPolicy::DropMinImpact)) == "11110111");
  }
  SUBCASE("keep all") {
    CHECK(select_features(table1_report(), SelectionPolicy::KeepAll) == full_mask());
  }
  SUBCASE("policy names") {
    CHECK(parse_selection_policy("keep-all") == SelectionPolicy::KeepAll);
    CHECK(parse_selection_policy("min-impact") == SelectionPolicy::DropMinImpact);
    CHECK_FALSE(parse_selection_policy("random").has_value());
  }
}

TEST_CASE("selection report serialization") {
  auto r = table1_report();
  r.sigma = 0.3;
  r.box_c = 10;
  CHECK(selection_report_from_json(to_json(r)) == r);
  CHECK(selection_report_from_json(nlohmann::json::parse(to_json(r).dump())) == r);
  r.impact[2].reset();
  CHECK(selection_report_from_json(to_json(r)) == r);
  const auto table = format_selection_table(r);
  CHECK(table.find("text_color_variance") != std::string::npos);
  CHECK(table.find("1.90%") != std::string::npos);
  CHECK(table.find("undefined") != std::string::npos);

  const auto conf = format_confusion_table(table3_yuv());
  CHECK(conf.find("highlight") != std::string::npos);
  CHECK(conf.find("94") != std::string::npos);
}

TEST_CASE("feature timing") {
  SynthSpec spec;
  spec.label = ClassLabel::Mix;
  spec.width = spec.height = 256;
  const std::vector<Raster> pages{generate(spec), rgb_to_yuv(generate(spec))};
  const auto t = time_features(pages);
  for (double v : t) CHECK(v >= 0.0);
  CHECK(kind_of([] { time_features({}); }) == ErrorKind::InsufficientData);
}

TEST_CASE("block ratios are cheaper than the per-pixel features") {
  std::vector<Raster> pages;
  for (auto c : kAllClasses) {
    SynthSpec spec;
    spec.label = c;
    spec.width = spec.height = 512;
    pages.push_back(rgb_to_yuv(generate(spec)));
  }
  std::array<double, kFeatureCount> best;
  best.fill(1e300);
  for (int rep = 0; rep < 3; ++rep) {
    const auto t = time_features(pages);
    for (std::size_t f = 0; f < kFeatureCount; ++f) best[f] = std::min(best[f], t[f]);
  }
  for (auto cheap : {FeatureId::WhiteBlockRatio, FeatureId::ColorBlockRatio}) {
    for (auto heavy : {FeatureId::HistFlatness, FeatureId::TextEdgeCount, FeatureId::TextColorVariance,
                       FeatureId::ChromaAroundText, FeatureId::ChromaHistFlatness}) {
      CHECK(best[static_cast<std::size_t>(cheap)] < best[static_cast<std::size_t>(heavy)]);
    }
  }
}

TEST_CASE("feature time grows with page area") {
  auto timed = [](int w, int h) {
    SynthSpec spec;
    spec.label = ClassLabel::Highlight;
    spec.width = w;
    spec.height = h;
    const std::vector<Raster> pages{rgb_to_yuv(generate(spec)), rgb_to_yuv(generate(spec))};
    std::array<double, kFeatureCount> best;
    best.fill(1e300);
    for (int rep = 0; rep < 3; ++rep) {
      const auto t = time_features(pages);
      for (std::size_t f = 0; f < kFeatureCount; ++f) best[f] = std::min(best[f], t[f]);
    }
    return best;
  };
  const auto small = timed(1024, 512);
  const auto large = timed(1024, 1024);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    CAPTURE(f);
    const double ratio = large[f] / small[f];
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 4.0);
  }
}
