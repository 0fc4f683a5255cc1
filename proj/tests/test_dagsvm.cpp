#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "docclass/dagsvm.hpp"
#include "docclass/error.hpp"

using namespace docclass;

namespace {

// Five 8-d clusters, one per class, centred on distinct axis offsets.
Dataset clustered(std::size_t per_class, unsigned seed, std::array<std::size_t, 5> sizes = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 0.3);
  Dataset d;
  for (auto c : kAllClasses) {
    const auto ci = class_index(c);
    const std::size_t count = sizes[ci] ? sizes[ci] : per_class;
    for (std::size_t k = 0; k < count; ++k) {
      Sample s(kFeatureCount);
      for (std::size_t f = 0; f < kFeatureCount; ++f) s[f] = n(rng) + (f % 5 == ci ? 4.0 : 0.0);
      d.push_back({s, c});
    }
  }
  return d;
}

}  // namespace

TEST_CASE("pair indexing") {
  CHECK(pair_index(ClassLabel::Mix, ClassLabel::Text) == 0);
  CHECK(pair_index(ClassLabel::Mix, ClassLabel::Highlight) == 3);
  CHECK(pair_index(ClassLabel::Text, ClassLabel::Picture) == 4);
  CHECK(pair_index(ClassLabel::Receipt, ClassLabel::Highlight) == 9);
  CHECK(pair_index(ClassLabel::Highlight, ClassLabel::Receipt) == 9);
  for (std::size_t p = 0; p < kPairCount; ++p) {
    const auto [a, b] = pair_at(p);
    CHECK(code(a) < code(b));
    CHECK(pair_index(a, b) == p);
  }
  CHECK_THROWS_AS(pair_index(ClassLabel::Text, ClassLabel::Text), Error);
}

TEST_CASE("elimination picks the top of any total order in four steps") {
  std::array<int, 5> rank{0, 1, 2, 3, 4};
  int orders = 0;
  do {
    int calls = 0;
    const auto d = dag_eliminate([&](ClassLabel first, ClassLabel last) {
      ++calls;
      CHECK(code(first) < code(last));
      return rank[class_index(first)] < rank[class_index(last)] ? 1.0 : -1.0;
    });
    CHECK(calls == 4);
    CHECK(d.path.size() == 4);
    CHECK(rank[class_index(d.label)] == 0);
    ++orders;
  } while (std::next_permutation(rank.begin(), rank.end()));
  CHECK(orders == 120);
}

TEST_CASE("elimination convention on fixed oracles") {
  SUBCASE("always positive keeps the first class") {
    const auto d = dag_eliminate([](ClassLabel, ClassLabel) { return 0.0; });
    CHECK(d.label == ClassLabel::Mix);
    CHECK(d.path[0].last == ClassLabel::Highlight);
    CHECK(d.path[3].last == ClassLabel::Text);
  }
  SUBCASE("always negative keeps the last class") {
    const auto d = dag_eliminate([](ClassLabel, ClassLabel) { return -1e-300; });
    CHECK(d.label == ClassLabel::Highlight);
    CHECK(d.path[3].first == ClassLabel::Receipt);
  }
}

TEST_CASE("train_dag on clustered data") {
  const auto data = clustered(12, 1, {6, 12, 9, 15, 12});
  const auto model = train_dag(data, 1.0, 10.0, full_mask());
  CHECK(model.class_order == kAllClasses);
  for (const auto& s : data) CHECK(classify(model, s.features) == s.label);

  // every machine only saw samples of its own two classes, with class i positive
  std::vector<Sample> scaled;
  for (const auto& s : data) scaled.push_back(standardize(s.features, model.stats));
  for (std::size_t p = 0; p < kPairCount; ++p) {
    const auto [pos, neg] = pair_at(p);
    for (std::size_t k = 0; k < model.pairwise[p].support_vectors.size(); ++k) {
      const auto& sv = model.pairwise[p].support_vectors[k];
      const auto it = std::find(scaled.begin(), scaled.end(), sv);
      REQUIRE(it != scaled.end());
      const auto label = data[static_cast<std::size_t>(it - scaled.begin())].label;
      CHECK((label == pos || label == neg));
      CHECK((model.pairwise[p].dual_coefs[k] > 0) == (label == pos));
    }
  }
  const auto traced = classify_traced(model, data.front().features);
  CHECK(traced.path.size() == 4);

  DagTrainOptions threaded;
  threaded.threads = 4;
  CHECK(train_dag(data, 1.0, 10.0, full_mask(), threaded) == model);
}

TEST_CASE("train_dag with a seven feature mask") {
  const auto data = clustered(8, 2);
  const auto mask = parse_mask("drop:text_color_variance");
  const auto model = train_dag(data, 1.0, 10.0, mask);
  CHECK(model.stats.mean.size() == 7);
  for (const auto& m : model.pairwise) CHECK(m.dimension() == 7);
  for (const auto& s : data) CHECK(classify(model, s.features) == s.label);
}

TEST_CASE("train_dag needs every class") {
  auto data = clustered(5, 3);
  std::erase_if(data, [](const LabeledSample& s) { return s.label == ClassLabel::Receipt; });
  try {
    train_dag(data, 1.0, 1.0, full_mask());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompleteDataset);
    CHECK(std::string(e.what()).find("receipt") != std::string::npos);
  }
}

TEST_CASE("masked dimensions do not influence decisions") {
  const auto data = clustered(6, 4);
  const auto model = train_dag(data, 1.0, 10.0, parse_mask("drop:text_color_variance"));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50, 50);
  for (const auto& s : data) {
    auto probe = s.features;
    const auto before = classify_traced(model, probe);
    probe[3] = u(rng);
    const auto after = classify_traced(model, probe);
    CHECK(after.label == before.label);
    for (std::size_t k = 0; k < 4; ++k) CHECK(after.path[k].value == before.path[k].value);
    CHECK(classify(model, s.features) == before.label);
  }
}
