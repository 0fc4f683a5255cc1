#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "docclass/raster.hpp"
#include "docclass/svm.hpp"

namespace docclass::testing {

/// YUV raster built from per-pixel callbacks returning (Y, U, V).
inline Raster make_yuv(int w, int h, const std::function<std::array<double, 3>(int, int)>& px) {
  const auto n = static_cast<std::size_t>(w) * h;
  Raster::Planes p{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = px(x, y);
      const auto i = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) p[c][i] = v[c];
    }
  }
  return Raster(w, h, ColorSpace::YUV, std::move(p));
}

inline Raster constant_yuv(int w, int h, double y, double u = 0, double v = 0) {
  return make_yuv(w, h, [=](int, int) { return std::array<double, 3>{y, u, v}; });
}

inline Raster make_rgb(int w, int h, const std::function<std::array<double, 3>(int, int)>& px) {
  const auto n = static_cast<std::size_t>(w) * h;
  Raster::Planes p{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = px(x, y);
      const auto i = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) p[c][i] = v[c];
    }
  }
  return Raster(w, h, ColorSpace::RGB8, std::move(p));
}

/// Left-right mirror of any raster.
inline Raster mirror_lr(const Raster& r) {
  Raster::Planes p;
  for (int c = 0; c < 3; ++c) {
    p[c].resize(r.pixel_count());
    for (int y = 0; y < r.height(); ++y) {
      for (int x = 0; x < r.width(); ++x) {
        p[c][static_cast<std::size_t>(y) * r.width() + x] = r.at(c, r.width() - 1 - x, y);
      }
    }
  }
  return Raster(r.width(), r.height(), r.space(), std::move(p), r.lch_range());
}

/// Dark glyph-like strokes on a light page: 3px-wide vertical bars and
/// horizontal bars in a regular layout over the region [x0, x1) x [y0, y1).
inline bool stroke_at(int x, int y, int x0, int y0, int x1, int y1) {
  if (x < x0 || y < y0 || x >= x1 || y >= y1) return false;
  const int cx = (x - x0) % 12, cy = (y - y0) % 20;
  if (cy >= 14) return false;
  return cx < 3 || (cy >= 6 && cy < 9 && cx < 9);
}


struct Blobs {
  std::vector<Sample> x;
  std::vector<int> y;
};

/// Two isotropic 2-D gaussian clouds, `per_class` points each.
inline Blobs two_blobs(std::size_t per_class, std::array<double, 2> a, std::array<double, 2> b,
                       double spread, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, spread);
  Blobs out;
  for (std::size_t k = 0; k < per_class; ++k) {
    out.x.push_back({a[0] + n(rng), a[1] + n(rng)});
    out.y.push_back(1);
    out.x.push_back({b[0] + n(rng), b[1] + n(rng)});
    out.y.push_back(-1);
  }
  return out;
}

/// Largest KKT violation of a solved dual, measured on y_k f(x_k).
inline double max_kkt_violation(const SmoResult& r, const std::vector<Sample>& x,
                                const std::vector<int>& y, double tol_alpha = 1e-12) {
  double worst = 0.0;
  const double c = r.model.box_c;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double margin = y[k] * predict_binary(r.model, x[k]).value;
    const double a = r.alphas[k];
    double v;
    if (a <= tol_alpha) v = std::max(0.0, 1.0 - margin);
    else if (a >= c - tol_alpha) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}


/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("docclass_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace docclass::testing
