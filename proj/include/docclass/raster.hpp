#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace docclass {

enum class ColorSpace { RGB8, YUV, LCH };

const char* to_string(ColorSpace space);

/// Declared value ranges of an LCH source. The lightness scale differs
/// between devices, so it is always supplied by the caller.
struct LchRange {
  double l_max = 100.0;
  double c_max = 128.0;

  bool operator==(const LchRange&) const = default;
};

/// A decoded page: three real-valued planes tagged with their color space.
///
/// Plane layouts:
///   RGB8  R, G, B integers in [0, 255]
///   YUV   Y in [0, 255]; U, V centered at 0 in [-128, 128)
///   LCH   L in [0, l_max]; C in [0, c_max]; H in degrees [0, 360)
///
/// Ranges are validated on construction; a Raster is immutable afterwards.
class Raster {
public:
  using Planes = std::array<std::vector<double>, 3>;

  Raster(int width, int height, ColorSpace space, Planes planes,
         LchRange lch = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  ColorSpace space() const noexcept { return space_; }
  const LchRange& lch_range() const noexcept { return lch_; }

  std::span<const double> plane(int channel) const { return planes_.at(channel); }
  double at(int channel, int x, int y) const {
    return planes_[channel][static_cast<std::size_t>(y) * width_ + x];
  }

  bool operator==(const Raster&) const = default;

private:
  int width_;
  int height_;
  ColorSpace space_;
  LchRange lch_;
  Planes planes_;
};

/// BT.601 full-range coefficients. U and V are stored without the 128 offset.
struct Bt601 {
  static constexpr double kr = 0.299, kg = 0.587, kb = 0.114;
  static constexpr double ur = -0.168736, ug = -0.331264, ub = 0.5;
  static constexpr double vr = 0.5, vg = -0.418688, vb = -0.081312;
};

Raster rgb_to_yuv(const Raster& rgb);

/// |U| + |V| for YUV, the C channel for LCH. Throws InvalidSpace for RGB.
double chroma_strength(const Raster& r, int x, int y);
double chroma_strength(ColorSpace space, double c0, double c1, double c2);

/// Luminance on a 0..255 scale: Y for YUV, L rescaled by l_max for LCH.
/// Returns a view when the plane can be used as is.
class LumaPlane {
public:
  explicit LumaPlane(const Raster& r);
  std::span<const double> values() const noexcept { return view_; }
  double operator[](std::size_t i) const noexcept { return view_[i]; }

private:
  std::vector<double> owned_;
  std::span<const double> view_;
};

/// Per-pixel chroma strength plane.
std::vector<double> chroma_plane(const Raster& r);

struct Block {
  int x0 = 0;
  int y0 = 0;
};

/// Disjoint 32x32 tiling of the raster; partial border tiles are dropped.
class BlockGrid {
public:
  static constexpr int kBlockSize = 32;
  static constexpr int kBlockPixels = kBlockSize * kBlockSize;

  BlockGrid(int cols, int rows) : cols_(cols), rows_(rows) {}

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_);
  }
  int covered_width() const noexcept { return cols_ * kBlockSize; }
  int covered_height() const noexcept { return rows_ * kBlockSize; }

  Block block(std::size_t index) const {
    return {static_cast<int>(index % cols_) * kBlockSize,
            static_cast<int>(index / cols_) * kBlockSize};
  }
  std::optional<std::size_t> block_of(int x, int y) const;

private:
  int cols_;
  int rows_;
};

BlockGrid partition_blocks(const Raster& r);

}  // namespace docclass
