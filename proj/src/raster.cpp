#include "docclass/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "docclass/error.hpp"

namespace docclass {

const char* to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::RGB8: return "rgb8";
    case ColorSpace::YUV: return "yuv";
    case ColorSpace::LCH: return "lch";
  }
  return "unknown";
}

namespace {

struct Range {
  double lo;
  double hi;
  bool hi_inclusive;
  bool integral;
};

std::array<Range, 3> ranges_for(ColorSpace space, const LchRange& lch) {
  switch (space) {
    case ColorSpace::RGB8:
      return {{{0, 255, true, true}, {0, 255, true, true}, {0, 255, true, true}}};
    case ColorSpace::YUV:
      return {{{0, 255, true, false}, {-128, 128, false, false}, {-128, 128, false, false}}};
    case ColorSpace::LCH:
      return {{{0, lch.l_max, true, false}, {0, lch.c_max, true, false}, {0, 360, false, false}}};
  }
  return {};
}

}  // namespace

Raster::Raster(int width, int height, ColorSpace space, Planes planes, LchRange lch)
    : width_(width), height_(height), space_(space), lch_(lch), planes_(std::move(planes)) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::InvalidRaster, "raster dimensions must be positive");
  }
  if (space == ColorSpace::LCH && !(lch.l_max > 0 && lch.c_max > 0)) {
    throw Error(ErrorKind::InvalidRaster, "LCH range maxima must be positive");
  }
  const auto expected = pixel_count();
  const auto ranges = ranges_for(space, lch);
  for (int c = 0; c < 3; ++c) {
    if (planes_[c].size() != expected) {
      throw Error(ErrorKind::InvalidRaster,
                  "plane " + std::to_string(c) + " has " + std::to_string(planes_[c].size()) +
                      " samples, expected " + std::to_string(expected));
    }
    const auto& r = ranges[c];
    for (double v : planes_[c]) {
      const bool above = r.hi_inclusive ? v > r.hi : v >= r.hi;
      if (!std::isfinite(v) || v < r.lo || above || (r.integral && v != std::floor(v))) {
        throw Error(ErrorKind::InvalidRaster,
                    std::string("sample out of range for ") + to_string(space) + " plane " +
                        std::to_string(c) + ": " + std::to_string(v));
      }
    }
  }
}

Raster rgb_to_yuv(const Raster& rgb) {
  if (rgb.space() != ColorSpace::RGB8) {
    throw Error(ErrorKind::InvalidSpace,
                std::string("rgb_to_yuv expects rgb8 input, got ") + to_string(rgb.space()));
  }
  const auto n = rgb.pixel_count();
  const auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  Raster::Planes out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out[0][i] = Bt601::kr * r[i] + Bt601::kg * g[i] + Bt601::kb * b[i];
    out[1][i] = Bt601::ur * r[i] + Bt601::ug * g[i] + Bt601::ub * b[i];
    out[2][i] = Bt601::vr * r[i] + Bt601::vg * g[i] + Bt601::vb * b[i];
  }
  // The chroma coefficient rows sum to exactly zero in real arithmetic; snap
  // rounding residue so achromatic input carries no chroma at all.
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] == g[i] && g[i] == b[i]) {
      out[0][i] = r[i];
      out[1][i] = 0.0;
      out[2][i] = 0.0;
    }
  }
  return Raster(rgb.width(), rgb.height(), ColorSpace::YUV, std::move(out));
}

double chroma_strength(ColorSpace space, double, double c1, double c2) {
  switch (space) {
    case ColorSpace::YUV: return std::abs(c1) + std::abs(c2);
    case ColorSpace::LCH: return c1;
    case ColorSpace::RGB8: break;
  }
  throw Error(ErrorKind::InvalidSpace, "chroma strength is undefined for rgb8; convert first");
}

double chroma_strength(const Raster& r, int x, int y) {
  return chroma_strength(r.space(), r.at(0, x, y), r.at(1, x, y), r.at(2, x, y));
}

LumaPlane::LumaPlane(const Raster& r) {
  switch (r.space()) {
    case ColorSpace::YUV:
      view_ = r.plane(0);
      return;
    case ColorSpace::LCH: {
      const auto l = r.plane(0);
      const double scale = 255.0 / r.lch_range().l_max;
      owned_.resize(l.size());
      for (std::size_t i = 0; i < l.size(); ++i) owned_[i] = l[i] * scale;
      view_ = owned_;
      return;
    }
    case ColorSpace::RGB8: break;
  }
  throw Error(ErrorKind::InvalidSpace, "luminance requires a yuv or lch raster");
}

std::vector<double> chroma_plane(const Raster& r) {
  const auto n = r.pixel_count();
  std::vector<double> out(n);
  const auto p1 = r.plane(1), p2 = r.plane(2);
  switch (r.space()) {
    case ColorSpace::YUV:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(p1[i]) + std::abs(p2[i]);
      return out;
    case ColorSpace::LCH:
      std::copy(p1.begin(), p1.end(), out.begin());
      return out;
    case ColorSpace::RGB8: break;
  }
  throw Error(ErrorKind::InvalidSpace, "chroma strength is undefined for rgb8; convert first");
}

std::optional<std::size_t> BlockGrid::block_of(int x, int y) const {
  if (x < 0 || y < 0 || x >= covered_width() || y >= covered_height()) return std::nullopt;
  return static_cast<std::size_t>(y / kBlockSize) * cols_ + static_cast<std::size_t>(x / kBlockSize);
}

BlockGrid partition_blocks(const Raster& r) {
  if (r.width() < BlockGrid::kBlockSize || r.height() < BlockGrid::kBlockSize) {
    throw Error(ErrorKind::TooSmall, "raster " + std::to_string(r.width()) + "x" +
                                         std::to_string(r.height()) +
                                         " is smaller than one 32x32 block");
  }
  return BlockGrid(r.width() / BlockGrid::kBlockSize, r.height() / BlockGrid::kBlockSize);
}

}  // namespace docclass
