#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "docclass/dataset.hpp"
#include "docclass/error.hpp"

namespace docclass {

namespace {

/// mt19937_64 is fully specified by the standard; the distributions below are
/// written out so pages are identical across standard library vendors.
class PageRng {
public:
  explicit PageRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

using Rgb = std::array<double, 3>;

struct Rect {
  int x0, y0, x1, y1;  // half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

class Canvas {
public:
  Canvas(int w, int h, Rgb fill) : w_(w), h_(h) {
    for (int c = 0; c < 3; ++c) planes_[c].assign(static_cast<std::size_t>(w) * h, fill[c]);
  }

  int width() const { return w_; }
  int height() const { return h_; }
  Rect bounds() const { return {0, 0, w_, h_}; }

  void fill(const Rect& r, const Rgb& color) {
    const auto clip = clipped(r);
    for (int y = clip.y0; y < clip.y1; ++y) {
      for (int x = clip.x0; x < clip.x1; ++x) set(x, y, color);
    }
  }
  void set(int x, int y, const Rgb& color) {
    const auto i = static_cast<std::size_t>(y) * w_ + x;
    for (int c = 0; c < 3; ++c) planes_[c][i] = color[c];
  }
  double& at(int c, int x, int y) { return planes_[c][static_cast<std::size_t>(y) * w_ + x]; }

  Rect clipped(const Rect& r) const {
    return {std::clamp(r.x0, 0, w_), std::clamp(r.y0, 0, h_), std::clamp(r.x1, 0, w_),
            std::clamp(r.y1, 0, h_)};
  }

  Raster finish(PageRng& rng, double noise) && {
    for (auto& plane : planes_) {
      for (auto& v : plane) {
        if (noise > 0.0) v += noise * rng.normal();
        v = std::clamp(std::round(v), 0.0, 255.0);
      }
    }
    return Raster(w_, h_, ColorSpace::RGB8, std::move(planes_));
  }

private:
  int w_, h_;
  Raster::Planes planes_;
};

struct GlyphStyle {
  int cell_w = 10;
  int cell_h = 14;
  int stroke = 2;
  int line_pitch = 22;
};

/// Blocky pseudo-glyph: two or three strokes chosen from a small set.
void draw_glyph(Canvas& canvas, int x, int y, const GlyphStyle& g, const Rgb& ink, PageRng& rng) {
  const int gw = g.cell_w - 2, gh = g.cell_h, s = g.stroke;
  const std::array<Rect, 6> strokes = {{
      {x, y, x + s, y + gh},                                // left
      {x + gw - s, y, x + gw, y + gh},                      // right
      {x + (gw - s) / 2, y, x + (gw + s) / 2, y + gh},      // centre
      {x, y, x + gw, y + s},                                // top
      {x, y + (gh - s) / 2, x + gw, y + (gh + s) / 2},      // middle
      {x, y + gh - s, x + gw, y + gh},                      // bottom
  }};
  const int count = rng.integer(2, 3);
  int used = 0;
  for (int k = 0; k < count; ++k) {
    int pick = rng.integer(0, 5);
    while (used & (1 << pick)) pick = (pick + 1) % 6;
    used |= 1 << pick;
    canvas.fill(strokes[pick], ink);
  }
}

struct LineSpan {
  int y;
  int x_end;
};

/// Ragged-right lines of words inside `area`. `ink_for_glyph` supplies the
/// colour of each glyph. Returns the extent of every line drawn.
template <typename InkFn>
std::vector<LineSpan> draw_text(Canvas& canvas, const Rect& area, const GlyphStyle& g,
                                PageRng& rng, InkFn&& ink_for_glyph) {
  std::vector<LineSpan> lines;
  for (int y = area.y0; y + g.cell_h <= area.y1; y += g.line_pitch) {
    if (rng.chance(0.08)) continue;  // paragraph break
    const int limit = area.x1 - static_cast<int>(rng.uniform(0.0, 0.3) * area.width());
    int x = area.x0;
    while (true) {
      const int letters = rng.integer(2, 8);
      if (x + letters * g.cell_w > limit) break;
      for (int k = 0; k < letters; ++k, x += g.cell_w) {
        draw_glyph(canvas, x, y, g, ink_for_glyph(), rng);
      }
      x += g.cell_w;
    }
    if (x > area.x0) lines.push_back({y, x});
  }
  return lines;
}

/// Smooth multi-colour field with band-limited texture.
void draw_picture(Canvas& canvas, const Rect& area, PageRng& rng) {
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<double, 3> base{};
  std::array<std::vector<Wave>, 3> waves;
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(70.0, 190.0);
    for (int k = 0; k < 3; ++k) {
      waves[c].push_back({rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5),
                          rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(25.0, 45.0)});
    }
    for (int k = 0; k < 4; ++k) {
      waves[c].push_back({rng.uniform(4.0, 14.0), rng.uniform(4.0, 14.0),
                          rng.uniform(0.0, 2.0 * std::numbers::pi), rng.uniform(3.0, 8.0)});
    }
  }
  const auto clip = canvas.clipped(area);
  const double sx = 2.0 * std::numbers::pi / std::max(1, clip.width());
  const double sy = 2.0 * std::numbers::pi / std::max(1, clip.height());
  for (int y = clip.y0; y < clip.y1; ++y) {
    for (int x = clip.x0; x < clip.x1; ++x) {
      const double u = (x - clip.x0) * sx, v = (y - clip.y0) * sy;
      for (int c = 0; c < 3; ++c) {
        double value = base[c];
        for (const auto& w : waves[c]) value += w.amp * std::sin(w.fx * u + w.fy * v + w.phase);
        canvas.at(c, x, y) = std::clamp(value, 0.0, 255.0);
      }
    }
  }
}

Rgb gray(double v) { return {v, v, v}; }

Rgb ink_color(PageRng& rng) { return gray(rng.uniform(18.0, 40.0)); }

Rect page_margins(int w, int h) {
  const int mx = std::max(8, w / 20), my = std::max(8, h / 20);
  return {mx, my, w - mx, h - my};
}

Raster make_text(const SynthSpec& s, PageRng& rng) {
  Canvas canvas(s.width, s.height, gray(rng.uniform(244.0, 250.0)));
  const auto ink = ink_color(rng);
  draw_text(canvas, page_margins(s.width, s.height), GlyphStyle{}, rng, [&] { return ink; });
  return std::move(canvas).finish(rng, s.noise_level);
}

Raster make_picture(const SynthSpec& s, PageRng& rng) {
  Canvas canvas(s.width, s.height, gray(255.0));
  draw_picture(canvas, canvas.bounds(), rng);
  return std::move(canvas).finish(rng, s.noise_level);
}

Raster make_mix(const SynthSpec& s, PageRng& rng) {
  Canvas canvas(s.width, s.height, gray(rng.uniform(244.0, 250.0)));
  const auto m = page_margins(s.width, s.height);
  const bool vertical_split = rng.chance(0.5);
  const bool picture_first = rng.chance(0.5);
  Rect picture = m, text = m;
  if (vertical_split) {
    const int mid = (m.x0 + m.x1) / 2;
    (picture_first ? picture.x1 : picture.x0) = mid;
    (picture_first ? text.x0 : text.x1) = mid + (picture_first ? 12 : -12);
  } else {
    const int mid = (m.y0 + m.y1) / 2;
    (picture_first ? picture.y1 : picture.y0) = mid;
    (picture_first ? text.y0 : text.y1) = mid + (picture_first ? 12 : -12);
  }
  draw_picture(canvas, picture, rng);
  const auto ink = ink_color(rng);
  draw_text(canvas, text, GlyphStyle{}, rng, [&] { return ink; });
  return std::move(canvas).finish(rng, s.noise_level);
}

Raster make_receipt(const SynthSpec& s, PageRng& rng) {
  Canvas canvas(s.width, s.height, gray(rng.uniform(248.0, 253.0)));
  // the slip covers well under a quarter of the bed, in one corner
  const int rw = static_cast<int>(s.width * rng.uniform(0.30, 0.42));
  const int rh = static_cast<int>(s.height * rng.uniform(0.40, 0.55));
  const bool right = rng.chance(0.3), bottom = rng.chance(0.3);
  const int x0 = right ? s.width - rw : 0;
  const int y0 = bottom ? s.height - rh : 0;
  const Rect slip{x0, y0, x0 + rw, y0 + rh};
  const double paper = rng.uniform(220.0, 232.0);
  canvas.fill(slip, gray(paper));
  const double ink = paper * (1.0 - s.receipt_contrast);
  const GlyphStyle small{8, 10, 2, 15};
  draw_text(canvas, {slip.x0 + 6, slip.y0 + 8, slip.x1 - 6, slip.y1 - 8}, small, rng,
            [&] { return gray(ink + rng.uniform(-8.0, 8.0)); });
  return std::move(canvas).finish(rng, s.noise_level);
}

Raster make_highlight(const SynthSpec& s, PageRng& rng) {
  constexpr std::array<Rgb, 5> kMarkers = {{
      {255, 240, 60},   // yellow
      {255, 120, 200},  // pink
      {120, 255, 120},  // green
      {100, 220, 255},  // blue
      {255, 180, 60},   // orange
  }};
  const double paper = rng.uniform(244.0, 250.0);
  Canvas canvas(s.width, s.height, gray(paper));
  const auto& marker = kMarkers[static_cast<std::size_t>(rng.integer(0, 4))];
  Rgb band;
  for (int c = 0; c < 3; ++c) band[c] = paper + s.highlight_saturation * (marker[c] - paper);

  // lay out text on a scratch canvas first so bands can sit behind strokes
  Canvas scratch(s.width, s.height, gray(paper));
  const GlyphStyle g;
  const auto lines = draw_text(scratch, page_margins(s.width, s.height), g, rng,
                               [] { return gray(0.0); });
  bool any = false;
  for (const auto& line : lines) {
    if (!rng.chance(0.45) && !(line.y == lines.back().y && !any)) continue;
    const int x0 = page_margins(s.width, s.height).x0 - 3;
    const int start = x0 + static_cast<int>(rng.uniform(0.0, 0.4) * (line.x_end - x0));
    canvas.fill({start, line.y - 4, line.x_end + 3, line.y + g.cell_h + 4}, band);
    any = true;
  }
  const auto ink = ink_color(rng);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (scratch.at(0, x, y) == 0.0) canvas.set(x, y, ink);
    }
  }
  return std::move(canvas).finish(rng, s.noise_level);
}

}  // namespace

void validate(const SynthSpec& s) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  if (s.width < 64 || s.height < 64) fail("synthetic page must be at least 64x64");
  if (!(s.receipt_contrast > 0.0 && s.receipt_contrast <= 1.0)) {
    fail("receipt contrast must be in (0, 1]");
  }
  if (!(s.highlight_saturation > 0.0 && s.highlight_saturation <= 1.0)) {
    fail("highlight saturation must be in (0, 1]");
  }
  if (!(s.noise_level >= 0.0 && s.noise_level <= 20.0)) fail("noise level must be in [0, 20]");
  if (code(s.label) < 1 || code(s.label) > kClassCount) fail("invalid class label");
}

Raster generate(const SynthSpec& spec) {
  validate(spec);
  PageRng rng(spec.seed);
  switch (spec.label) {
    case ClassLabel::Mix: return make_mix(spec, rng);
    case ClassLabel::Text: return make_text(spec, rng);
    case ClassLabel::Picture: return make_picture(spec, rng);
    case ClassLabel::Receipt: return make_receipt(spec, rng);
    case ClassLabel::Highlight: return make_highlight(spec, rng);
  }
  throw Error(ErrorKind::InvalidSpec, "invalid class label");
}

}  // namespace docclass
