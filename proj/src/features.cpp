#include "docclass/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "docclass/error.hpp"

namespace docclass {

// ---------------------------------------------------------------------------
// Labels and masks

std::string_view to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::Mix: return "mix";
    case ClassLabel::Text: return "text";
    case ClassLabel::Picture: return "picture";
    case ClassLabel::Receipt: return "receipt";
    case ClassLabel::Highlight: return "highlight";
  }
  return "unknown";
}

std::optional<ClassLabel> parse_class_label(std::string_view text) {
  for (auto c : kAllClasses) {
    if (text == to_string(c) || text == std::to_string(code(c))) return c;
  }
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "hist_flatness",      "color_variability",    "text_edge_count",   "text_color_variance",
    "chroma_around_text", "chroma_hist_flatness", "white_block_ratio", "color_block_ratio"};

std::size_t parse_feature_ref(std::string_view token, std::size_t dims) {
  if (auto named = feature_index(token); named && *named < dims) return *named;
  std::size_t idx = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, idx);
  if (ec != std::errc{} || ptr != end || idx >= dims) {
    throw Error(ErrorKind::Validation, "unknown feature '" + std::string(token) + "'");
  }
  return idx;
}

std::vector<std::size_t> parse_feature_list(std::string_view list, std::size_t dims) {
  std::vector<std::size_t> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto token = list.substr(0, comma);
    out.push_back(parse_feature_ref(token, dims));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(ErrorKind::Validation, "empty feature list in mask");
  return out;
}

}  // namespace

std::string_view feature_name(FeatureId id) { return kFeatureNames[static_cast<std::size_t>(id)]; }

std::string_view feature_name(std::size_t index) {
  if (index < kFeatureCount) return kFeatureNames[index];
  return "extra";
}

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return i;
  }
  return std::nullopt;
}

FeatureMask full_mask(std::size_t dims) { return FeatureMask(dims, true); }

std::size_t active_count(const FeatureMask& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::vector<double> apply_mask(const std::vector<double>& x, const FeatureMask& mask) {
  if (x.size() != mask.size()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                  " dimensions, mask expects " +
                                                  std::to_string(mask.size()));
  }
  std::vector<double> out;
  out.reserve(active_count(mask));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i]) out.push_back(x[i]);
  }
  return out;
}

FeatureMask parse_mask(std::string_view text, std::size_t dims) {
  if (text == "all") return full_mask(dims);
  if (text.starts_with("drop:")) {
    auto mask = full_mask(dims);
    for (auto i : parse_feature_list(text.substr(5), dims)) mask[i] = false;
    if (active_count(mask) == 0) throw Error(ErrorKind::Validation, "mask drops every feature");
    return mask;
  }
  if (text.starts_with("keep:")) {
    FeatureMask mask(dims, false);
    for (auto i : parse_feature_list(text.substr(5), dims)) mask[i] = true;
    return mask;
  }
  if (text.size() == dims && text.find_first_not_of("01") == std::string_view::npos) {
    FeatureMask mask(dims);
    for (std::size_t i = 0; i < dims; ++i) mask[i] = text[i] == '1';
    if (active_count(mask) == 0) throw Error(ErrorKind::Validation, "mask drops every feature");
    return mask;
  }
  throw Error(ErrorKind::Validation, "cannot parse mask '" + std::string(text) + "'");
}

std::string mask_to_string(const FeatureMask& mask) {
  std::string s;
  for (bool b : mask) s.push_back(b ? '1' : '0');
  return s;
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

constexpr int kB = BlockGrid::kBlockSize;

void require_working_space(const Raster& r) {
  if (r.space() == ColorSpace::RGB8) {
    throw Error(ErrorKind::InvalidSpace, "feature requires a yuv or lch raster; convert rgb8 first");
  }
}

/// Smoothed GM/AM flatness of the given counts.
double smoothed_flatness(std::span<const std::uint32_t> counts) {
  const auto n = counts.size();
  if (std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) == counts.end()) {
    return 1.0;
  }
  double log_sum = 0.0;
  double sum = 0.0;
  for (auto c : counts) {
    const double smoothed = static_cast<double>(c) + 1.0;
    log_sum += std::log(smoothed);
    sum += smoothed;
  }
  const double dn = static_cast<double>(n);
  const double ratio = std::exp(log_sum / dn) / (sum / dn);
  // unequal bins are strictly below 1 in exact arithmetic
  return std::min(ratio, std::nextafter(1.0, 0.0));
}

template <typename Fn>
void for_each_block_pixel(const Block& b, int width, Fn&& fn) {
  for (int y = b.y0; y < b.y0 + kB; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    for (int x = b.x0; x < b.x0 + kB; ++x) fn(row + x);
  }
}

std::vector<double> block_medians(const BlockGrid& grid, std::span<const double> luma, int width) {
  std::vector<double> medians(grid.size());
  std::vector<double> scratch(BlockGrid::kBlockPixels);
  for (std::size_t b = 0; b < grid.size(); ++b) {
    std::size_t k = 0;
    for_each_block_pixel(grid.block(b), width, [&](std::size_t i) { scratch[k++] = luma[i]; });
    const auto mid = scratch.begin() + BlockGrid::kBlockPixels / 2;
    std::nth_element(scratch.begin(), mid, scratch.end());
    const double upper = *mid;
    const double lower = *std::max_element(scratch.begin(), mid);
    medians[b] = 0.5 * (lower + upper);
  }
  return medians;
}

struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double variance() const { return n ? m2 / static_cast<double>(n) : 0.0; }
};

std::pair<int, int> step_of(EdgeDirection d) {
  switch (d) {
    case EdgeDirection::Left: return {-1, 0};
    case EdgeDirection::Right: return {1, 0};
    case EdgeDirection::Up: return {0, -1};
    case EdgeDirection::Down: return {0, 1};
    case EdgeDirection::None: break;
  }
  return {0, 0};
}

}  // namespace

// ---------------------------------------------------------------------------
// Chroma histogram flatness

bool ChromaHistogram::is_included(HistogramLayout layout, std::size_t bin) {
  if (layout == HistogramLayout::UV8x8) {
    const auto u = bin / 8, v = bin % 8;
    return !((u == 3 || u == 4) && (v == 3 || v == 4));
  }
  return bin / 8 != 0;
}

std::size_t ChromaHistogram::included_count() const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) n += is_included(layout, b) ? 1 : 0;
  return n;
}

std::uint64_t ChromaHistogram::total() const {
  return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
}

std::size_t uv_bin(double u, double v) {
  auto idx = [](double x) {
    return static_cast<std::size_t>(std::clamp(std::floor((x + 128.0) / 32.0), 0.0, 7.0));
  };
  return idx(u) * 8 + idx(v);
}

std::size_t ch_bin(double c, double h, double c_max) {
  const auto c_idx = static_cast<std::size_t>(std::clamp(std::floor(c / (c_max / 8.0)), 0.0, 7.0));
  const auto h_idx = static_cast<std::size_t>(std::clamp(std::floor(h / 45.0), 0.0, 7.0));
  return c_idx * 8 + h_idx;
}

ChromaHistogram chroma_histogram(const Raster& r, const Block& block) {
  require_working_space(r);
  if (block.x0 < 0 || block.y0 < 0 || block.x0 + kB > r.width() || block.y0 + kB > r.height()) {
    throw Error(ErrorKind::TooSmall, "block lies outside the raster");
  }
  ChromaHistogram h;
  const auto p1 = r.plane(1), p2 = r.plane(2);
  if (r.space() == ColorSpace::YUV) {
    h.layout = HistogramLayout::UV8x8;
    for_each_block_pixel(block, r.width(), [&](std::size_t i) { ++h.bins[uv_bin(p1[i], p2[i])]; });
  } else {
    h.layout = HistogramLayout::CH8x8;
    const double c_max = r.lch_range().c_max;
    for_each_block_pixel(block, r.width(),
                         [&](std::size_t i) { ++h.bins[ch_bin(p1[i], p2[i], c_max)]; });
  }
  return h;
}

double chroma_flatness_block(const ChromaHistogram& h) {
  std::array<std::uint32_t, 64> included{};
  std::size_t n = 0;
  for (std::size_t b = 0; b < h.bins.size(); ++b) {
    if (ChromaHistogram::is_included(h.layout, b)) included[n++] = h.bins[b];
  }
  return smoothed_flatness(std::span(included.data(), n));
}

double chroma_histogram_flatness(const Raster& r) {
  require_working_space(r);
  const auto grid = partition_blocks(r);
  double best = 0.0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    best = std::max(best, chroma_flatness_block(chroma_histogram(r, grid.block(b))));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Text edges

std::size_t TextEdgeMap::count() const {
  return static_cast<std::size_t>(
      std::count_if(dirs_.begin(), dirs_.end(), [](auto d) { return d != EdgeDirection::None; }));
}

TextEdgeMap detect_text_edges(const Raster& r, const EdgeThresholds& t) {
  const auto grid = partition_blocks(r);
  const LumaPlane luma(r);
  const auto y = luma.values();
  const int w = r.width();
  const int h = r.height();
  const auto medians = block_medians(grid, y, w);

  // strength of a dark-on-light transition across (a, centre, b); 0 if none
  auto transition = [&t](double a, double centre, double b) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double contrast = hi - lo;
    if (contrast < t.contrast || lo > t.dark || hi < t.light) return 0.0;
    if (centre > 0.5 * (lo + hi)) return 0.0;
    return contrast;
  };

  TextEdgeMap edges(w, h);
  const int x_end = std::min(grid.covered_width(), w - 1);
  const int y_end = std::min(grid.covered_height(), h - 1);
  for (int py = 1; py < y_end; ++py) {
    const std::size_t row = static_cast<std::size_t>(py) * w;
    for (int px = 1; px < x_end; ++px) {
      const std::size_t i = row + px;
      const double c = y[i];
      const double left = y[i - 1], right = y[i + 1];
      const double up = y[i - w], down = y[i + w];
      const double horiz = transition(left, c, right);
      const double vert = transition(up, c, down);
      if (horiz == 0.0 && vert == 0.0) continue;
      if (medians[*grid.block_of(px, py)] < t.light) continue;
      if (horiz >= vert) {
        edges.set(px, py, right > left ? EdgeDirection::Right : EdgeDirection::Left);
      } else {
        edges.set(px, py, down > up ? EdgeDirection::Down : EdgeDirection::Up);
      }
    }
  }
  return edges;
}

double text_edge_count(const Raster& r, const TextEdgeMap& edges) {
  const auto grid = partition_blocks(r);
  const double covered =
      static_cast<double>(grid.covered_width()) * static_cast<double>(grid.covered_height());
  return static_cast<double>(edges.count()) / covered;
}

double text_edge_count(const Raster& r, const FeatureConfig& cfg) {
  return text_edge_count(r, detect_text_edges(r, cfg.edges));
}

// ---------------------------------------------------------------------------
// Luminance features

double luminance_histogram_flatness(const Raster& r) {
  const auto grid = partition_blocks(r);
  const LumaPlane luma(r);
  const auto y = luma.values();
  double sum = 0.0;
  std::array<std::uint32_t, 64> bins{};
  for (std::size_t b = 0; b < grid.size(); ++b) {
    bins.fill(0);
    for_each_block_pixel(grid.block(b), r.width(), [&](std::size_t i) {
      ++bins[static_cast<std::size_t>(std::clamp(y[i] / 4.0, 0.0, 63.0))];
    });
    sum += smoothed_flatness(bins);
  }
  return sum / static_cast<double>(grid.size());
}

double color_variability(const Raster& r) {
  const auto grid = partition_blocks(r);
  const LumaPlane luma(r);
  const auto y = luma.values();
  std::array<bool, 32> occupied{};
  for (std::size_t b = 0; b < grid.size(); ++b) {
    double sum = 0.0;
    for_each_block_pixel(grid.block(b), r.width(), [&](std::size_t i) { sum += y[i]; });
    const double mean = sum / BlockGrid::kBlockPixels;
    occupied[static_cast<std::size_t>(std::clamp(mean / 8.0, 0.0, 31.0))] = true;
  }
  return static_cast<double>(std::count(occupied.begin(), occupied.end(), true)) / 32.0;
}

double text_color_variance(const Raster& r, const TextEdgeMap& edges, const FeatureConfig& cfg) {
  const auto grid = partition_blocks(r);
  const LumaPlane luma(r);
  const auto y = luma.values();
  double sum = 0.0;
  std::size_t qualifying = 0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const auto block = grid.block(b);
    RunningStats stats;
    for (int py = block.y0; py < block.y0 + kB; ++py) {
      for (int px = block.x0; px < block.x0 + kB; ++px) {
        if (edges.is_edge(px, py)) stats.add(y[static_cast<std::size_t>(py) * r.width() + px]);
      }
    }
    if (stats.n >= cfg.min_variance_edges) {
      sum += stats.variance();
      ++qualifying;
    }
  }
  return qualifying ? sum / static_cast<double>(qualifying) : 0.0;
}

double text_color_variance(const Raster& r, const FeatureConfig& cfg) {
  return text_color_variance(r, detect_text_edges(r, cfg.edges), cfg);
}

// ---------------------------------------------------------------------------
// Chroma around text and block ratios

double chroma_around_text(const Raster& r, const TextEdgeMap& edges, const FeatureConfig& cfg) {
  require_working_space(r);
  const auto grid = partition_blocks(r);
  const int w = r.width(), h = r.height();
  std::vector<RunningStats> per_block(grid.size());
  for (int py = 0; py < grid.covered_height(); ++py) {
    for (int px = 0; px < grid.covered_width(); ++px) {
      const auto d = edges.direction(px, py);
      if (d == EdgeDirection::None) continue;
      auto& stats = per_block[*grid.block_of(px, py)];
      const auto [dx, dy] = step_of(d);
      for (int k = 1; k <= 2; ++k) {
        const int sx = px + k * dx, sy = py + k * dy;
        if (sx < 0 || sy < 0 || sx >= w || sy >= h) break;
        stats.add(chroma_strength(r, sx, sy));
      }
    }
  }
  double best = 0.0;
  for (const auto& s : per_block) {
    if (s.n < cfg.min_chroma_samples) continue;
    const double sd = std::max(std::sqrt(s.variance()), cfg.std_floor);
    best = std::max(best, s.mean / sd);
  }
  return best;
}

double chroma_around_text(const Raster& r, const FeatureConfig& cfg) {
  return chroma_around_text(r, detect_text_edges(r, cfg.edges), cfg);
}

double color_block_ratio(const Raster& r, const FeatureConfig& cfg) {
  require_working_space(r);
  const auto grid = partition_blocks(r);
  const auto p1 = r.plane(1), p2 = r.plane(2);
  const bool lch = r.space() == ColorSpace::LCH;
  const double needed = cfg.color_fraction * BlockGrid::kBlockPixels;
  std::size_t color_blocks = 0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    std::size_t colored = 0;
    if (lch) {
      for_each_block_pixel(grid.block(b), r.width(),
                           [&](std::size_t i) { colored += p1[i] > cfg.color_threshold; });
    } else {
      for_each_block_pixel(grid.block(b), r.width(), [&](std::size_t i) {
        colored += std::abs(p1[i]) + std::abs(p2[i]) > cfg.color_threshold;
      });
    }
    color_blocks += static_cast<double>(colored) > needed;
  }
  return static_cast<double>(color_blocks) / static_cast<double>(grid.size());
}

double white_block_ratio(const Raster& r, const FeatureConfig& cfg) {
  const auto grid = partition_blocks(r);
  const LumaPlane luma(r);
  const auto y = luma.values();
  const double needed = cfg.white_fraction * BlockGrid::kBlockPixels;
  std::size_t white_blocks = 0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    std::size_t bright = 0;
    for_each_block_pixel(grid.block(b), r.width(),
                         [&](std::size_t i) { bright += y[i] > cfg.white_luma; });
    white_blocks += static_cast<double>(bright) >= needed;
  }
  return static_cast<double>(white_blocks) / static_cast<double>(grid.size());
}

// ---------------------------------------------------------------------------
// Assembly

double compute_feature(FeatureId id, const Raster& input, const FeatureConfig& cfg) {
  std::optional<Raster> converted;
  if (input.space() == ColorSpace::RGB8) converted.emplace(rgb_to_yuv(input));
  const Raster& r = converted ? *converted : input;
  switch (id) {
    case FeatureId::HistFlatness: return luminance_histogram_flatness(r);
    case FeatureId::ColorVariability: return color_variability(r);
    case FeatureId::TextEdgeCount: return text_edge_count(r, cfg);
    case FeatureId::TextColorVariance: return text_color_variance(r, cfg);
    case FeatureId::ChromaAroundText: return chroma_around_text(r, cfg);
    case FeatureId::ChromaHistFlatness: return chroma_histogram_flatness(r);
    case FeatureId::WhiteBlockRatio: return white_block_ratio(r, cfg);
    case FeatureId::ColorBlockRatio: return color_block_ratio(r, cfg);
  }
  throw Error(ErrorKind::Validation, "unknown feature id");
}

FeatureVector extract_features(const Raster& input, const FeatureConfig& cfg) {
  std::optional<Raster> converted;
  if (input.space() == ColorSpace::RGB8) converted.emplace(rgb_to_yuv(input));
  const Raster& r = converted ? *converted : input;
  partition_blocks(r);

  const auto edges = detect_text_edges(r, cfg.edges);
  FeatureVector fv;
  auto set = [&fv](FeatureId id, double v) { fv.values[static_cast<std::size_t>(id)] = v; };
  set(FeatureId::HistFlatness, luminance_histogram_flatness(r));
  set(FeatureId::ColorVariability, color_variability(r));
  set(FeatureId::TextEdgeCount, text_edge_count(r, edges));
  set(FeatureId::TextColorVariance, text_color_variance(r, edges, cfg));
  set(FeatureId::ChromaAroundText, chroma_around_text(r, edges, cfg));
  set(FeatureId::ChromaHistFlatness, chroma_histogram_flatness(r));
  set(FeatureId::WhiteBlockRatio, white_block_ratio(r, cfg));
  set(FeatureId::ColorBlockRatio, color_block_ratio(r, cfg));
  return fv;
}

}  // namespace docclass
