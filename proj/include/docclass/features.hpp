#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docclass/labels.hpp"
#include "docclass/raster.hpp"

namespace docclass {

inline constexpr std::size_t kFeatureCount = 8;

/// Canonical feature order.
enum class FeatureId : std::size_t {
  HistFlatness = 0,
  ColorVariability = 1,
  TextEdgeCount = 2,
  TextColorVariance = 3,
  ChromaAroundText = 4,
  ChromaHistFlatness = 5,
  WhiteBlockRatio = 6,
  ColorBlockRatio = 7,
};

std::string_view feature_name(FeatureId id);
std::string_view feature_name(std::size_t index);
std::optional<std::size_t> feature_index(std::string_view name);

/// Selects which feature dimensions feed the classifier. Its length is the
/// full feature dimension (8 for page features, more in synthetic studies).
using FeatureMask = std::vector<bool>;

FeatureMask full_mask(std::size_t dims = kFeatureCount);
std::size_t active_count(const FeatureMask& mask);
/// Keeps the dimensions whose mask bit is set. Throws DimensionMismatch.
std::vector<double> apply_mask(const std::vector<double>& x, const FeatureMask& mask);
/// "all", "drop:<name|index>[,...]", "keep:<name|index>[,...]" or a bit
/// string such as "11101111".
FeatureMask parse_mask(std::string_view text, std::size_t dims = kFeatureCount);
std::string mask_to_string(const FeatureMask& mask);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  FeatureMask mask = full_mask();

  double operator[](FeatureId id) const { return values[static_cast<std::size_t>(id)]; }
  std::vector<double> as_vector() const { return {values.begin(), values.end()}; }
  bool operator==(const FeatureVector&) const = default;
};

struct EdgeThresholds {
  double contrast = 50.0;  // minimum |Y(+1) - Y(-1)|
  double dark = 128.0;     // darker side must be at or below
  double light = 160.0;    // brighter side must be at or above
};

struct FeatureConfig {
  EdgeThresholds edges;
  double std_floor = 1e-6;
  std::size_t min_chroma_samples = 8;
  std::size_t min_variance_edges = 8;
  double color_threshold = 10.0;
  double color_fraction = 0.10;
  double white_luma = 230.0;
  double white_fraction = 0.95;
};

// ---------------------------------------------------------------------------
// Chroma histogram flatness

enum class HistogramLayout { UV8x8, CH8x8 };

/// 64-bin chroma histogram of one block.
///
/// UV8x8: bin = u_idx * 8 + v_idx with idx = floor((value + 128) / 32) over
/// [-128, 128). The four bins touching the origin (u_idx, v_idx in {3, 4})
/// are near-gray and excluded from flatness.
///
/// CH8x8: bin = c_idx * 8 + h_idx with 45 degree hue segments and chroma
/// segments of c_max / 8. The innermost ring (c_idx == 0) is excluded.
struct ChromaHistogram {
  std::array<std::uint32_t, 64> bins{};
  HistogramLayout layout = HistogramLayout::UV8x8;

  static bool is_included(HistogramLayout layout, std::size_t bin);
  std::size_t included_count() const;
  std::uint64_t total() const;
};

std::size_t uv_bin(double u, double v);
std::size_t ch_bin(double c, double h, double c_max);

ChromaHistogram chroma_histogram(const Raster& r, const Block& block);
/// Ratio of geometric to arithmetic mean over the included bins after adding
/// one to each. Exactly 1 iff all included bins are equal, otherwise < 1.
double chroma_flatness_block(const ChromaHistogram& h);
/// Maximum block flatness.
double chroma_histogram_flatness(const Raster& r);

// ---------------------------------------------------------------------------
// Text edges

enum class EdgeDirection : std::uint8_t { None = 0, Left, Right, Up, Down };

/// Dark-on-light text edge pixels within the block-covered area.
///
/// A pixel is an edge pixel along an axis when its two neighbours on that
/// axis differ by at least `contrast`, the darker neighbour is <= `dark`,
/// the brighter is >= `light`, the pixel itself sits on the dark side of the
/// transition, and the median luminance of its block is >= `light`. The last
/// test rejects light-on-dark text, whose surroundings are dark. When both
/// axes pass, the stronger contrast wins (ties go horizontal). The stored
/// direction points toward the brighter neighbour.
class TextEdgeMap {
public:
  TextEdgeMap(int width, int height)
      : width_(width), height_(height),
        dirs_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
              EdgeDirection::None) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  EdgeDirection direction(int x, int y) const {
    return dirs_[static_cast<std::size_t>(y) * width_ + x];
  }
  bool is_edge(int x, int y) const { return direction(x, y) != EdgeDirection::None; }
  void set(int x, int y, EdgeDirection d) { dirs_[static_cast<std::size_t>(y) * width_ + x] = d; }
  std::size_t count() const;

private:
  int width_;
  int height_;
  std::vector<EdgeDirection> dirs_;
};

TextEdgeMap detect_text_edges(const Raster& r, const EdgeThresholds& t = {});

/// Edge pixels per covered pixel.
double text_edge_count(const Raster& r, const FeatureConfig& cfg = {});
double text_edge_count(const Raster& r, const TextEdgeMap& edges);

// ---------------------------------------------------------------------------
// Luminance features

/// Mean over blocks of the smoothed GM/AM flatness of a 64-bin luminance
/// histogram.
double luminance_histogram_flatness(const Raster& r);
/// Occupied fraction of a 32-bin histogram of block mean luminance.
double color_variability(const Raster& r);
/// Mean over blocks with enough edge pixels of the luminance variance of
/// those (dark side) edge pixels; 0 when no block qualifies.
double text_color_variance(const Raster& r, const FeatureConfig& cfg = {});
double text_color_variance(const Raster& r, const TextEdgeMap& edges, const FeatureConfig& cfg = {});

// ---------------------------------------------------------------------------
// Chroma around text and block ratios

/// For every edge pixel the chroma strength of the two pixels just beyond it
/// in its direction is sampled into the edge pixel's block. Each block with
/// enough samples scores mean / max(std, std_floor); the image score is the
/// maximum, or 0 when no block qualifies.
double chroma_around_text(const Raster& r, const FeatureConfig& cfg = {});
double chroma_around_text(const Raster& r, const TextEdgeMap& edges, const FeatureConfig& cfg = {});

double color_block_ratio(const Raster& r, const FeatureConfig& cfg = {});
double white_block_ratio(const Raster& r, const FeatureConfig& cfg = {});

/// Computes a single feature from scratch (including any edge map it needs).
double compute_feature(FeatureId id, const Raster& r, const FeatureConfig& cfg = {});

/// All eight features in canonical order. RGB input is converted to YUV.
FeatureVector extract_features(const Raster& r, const FeatureConfig& cfg = {});

}  // namespace docclass
