#include "docclass/image_io.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <string>

#include "docclass/error.hpp"

namespace docclass {

namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in) {
  skip_space_and_comments(in);
  long value = -1;
  if (!(in >> value) || value < 0) {
    throw Error(ErrorKind::MalformedImage, "bad PPM header field");
  }
  return value;
}

}  // namespace

Raster read_ppm(std::istream& in) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '6') {
    throw Error(ErrorKind::MalformedImage, "not a binary PPM (P6)");
  }
  const long width = read_header_int(in);
  const long height = read_header_int(in);
  const long maxval = read_header_int(in);
  if (maxval != 255) {
    throw Error(ErrorKind::MalformedImage, "only 8-bit PPM (maxval 255) is supported");
  }
  if (width <= 0 || height <= 0 || width > 65535 || height > 65535) {
    throw Error(ErrorKind::MalformedImage, "PPM dimensions out of range");
  }
  // exactly one whitespace byte separates the header from the raster
  if (!std::isspace(in.get())) throw Error(ErrorKind::MalformedImage, "bad PPM header terminator");

  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<unsigned char> bytes(n * 3);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorKind::MalformedImage, "truncated PPM raster");
  }
  Raster::Planes planes{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    planes[0][i] = bytes[3 * i];
    planes[1][i] = bytes[3 * i + 1];
    planes[2][i] = bytes[3 * i + 2];
  }
  return Raster(static_cast<int>(width), static_cast<int>(height), ColorSpace::RGB8,
                std::move(planes));
}

Raster read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  try {
    return read_ppm(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_ppm(std::ostream& out, const Raster& rgb) {
  if (rgb.space() != ColorSpace::RGB8) {
    throw Error(ErrorKind::InvalidSpace, "PPM output requires an rgb8 raster");
  }
  out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
  const auto n = rgb.pixel_count();
  std::vector<unsigned char> bytes(n * 3);
  for (int c = 0; c < 3; ++c) {
    const auto p = rgb.plane(c);
    for (std::size_t i = 0; i < n; ++i) bytes[3 * i + c] = static_cast<unsigned char>(p[i]);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_ppm(const std::filesystem::path& path, const Raster& rgb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_ppm(out, rgb);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

Raster read_lch_planar(const std::filesystem::path& path, int width, int height,
                       const LchRange& range) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::Validation, "LCH dimensions must be positive");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint32_t> words(3 * n);
  if (!in.read(reinterpret_cast<char*>(words.data()),
               static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)))) {
    throw Error(ErrorKind::MalformedImage, path.string() + ": truncated LCH planes");
  }
  Raster::Planes planes;
  for (int c = 0; c < 3; ++c) {
    planes[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto w = words[c * n + i];
      if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
      planes[c][i] = std::bit_cast<float>(w);
    }
  }
  try {
    return Raster(width, height, ColorSpace::LCH, std::move(planes), range);
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedImage, path.string() + ": " + e.what());
  }
}

void write_lch_planar(const std::filesystem::path& path, const Raster& lch) {
  if (lch.space() != ColorSpace::LCH) {
    throw Error(ErrorKind::InvalidSpace, "planar LCH output requires an lch raster");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (int c = 0; c < 3; ++c) {
    for (double v : lch.plane(c)) {
      auto w = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
      out.write(reinterpret_cast<const char*>(&w), sizeof w);
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace docclass
