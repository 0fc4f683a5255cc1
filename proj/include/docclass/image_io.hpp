#pragma once

#include <filesystem>
#include <iosfwd>

#include "docclass/raster.hpp"

namespace docclass {

/// Binary PPM (P6, maxval 255). Comments in the header are accepted.
Raster read_ppm(std::istream& in);
Raster read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const Raster& rgb);
void write_ppm(const std::filesystem::path& path, const Raster& rgb);

/// Raw planar LCH: three consecutive planes (L, C, H) of little-endian
/// float32 samples, row-major. Dimensions and ranges come from the manifest.
Raster read_lch_planar(const std::filesystem::path& path, int width, int height,
                       const LchRange& range);
void write_lch_planar(const std::filesystem::path& path, const Raster& lch);

}  // namespace docclass
