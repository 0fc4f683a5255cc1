#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "docclass/dagsvm.hpp"
#include "docclass/error.hpp"
#include "docclass/labels.hpp"
#include "docclass/raster.hpp"

namespace docclass {

struct LchSource {
  int width = 0;
  int height = 0;
  LchRange range;
};

struct ManifestEntry {
  std::string path;                 // as written in the manifest
  ColorSpace space = ColorSpace::RGB8;
  std::optional<ClassLabel> label;  // optional for classification runs
  std::optional<LchSource> lch;     // required when space is LCH
};

/// JSON-lines manifest, one entry per line:
///   {"path": "page.ppm", "class": "text"}
///   {"path": "scan.lch", "space": "lch", "class": "highlight",
///    "lch": {"width": 512, "height": 512, "l_max": 100, "c_max": 128}}
/// Relative paths resolve against the manifest's directory.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& e) const;
};

/// Validates every line; errors name the offending line and entry.
Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
Manifest read_manifest(const std::filesystem::path& path);
std::string manifest_line(const ManifestEntry& e);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Decodes one entry. RGB input is converted to YUV.
Raster load_entry(const Manifest& m, const ManifestEntry& e);

struct LoadedPage {
  std::string path;
  Raster raster;
  std::optional<ClassLabel> label;
};

struct EntryFailure {
  std::size_t index;
  std::string path;
  ErrorKind kind;
  std::string message;
};

struct CorpusLoad {
  std::vector<LoadedPage> pages;
  std::vector<EntryFailure> failures;
};

/// Loads every entry, collecting per-entry failures instead of stopping.
CorpusLoad load_corpus(const Manifest& m, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Synthetic pages

struct SynthSpec {
  ClassLabel label = ClassLabel::Text;
  int width = 512;
  int height = 512;
  std::uint64_t seed = 42;
  double receipt_contrast = 0.55;     // (0, 1]: ink darkness relative to full black
  double highlight_saturation = 0.8;  // (0, 1]
  double noise_level = 2.0;           // [0, 20] gray levels, per-pixel gaussian sigma
};

void validate(const SynthSpec& spec);

/// Deterministic RGB page for the given class and seed.
Raster generate(const SynthSpec& spec);

// ---------------------------------------------------------------------------
// Model bundles

inline constexpr int kBundleVersion = 1;

nlohmann::json bundle_to_json(const DagSvmModel& model);
/// Serialized bundle text: canonical JSON with a SHA-256 content hash of the
/// payload. Identical models give identical bytes.
std::string serialize_bundle(const DagSvmModel& model);
DagSvmModel deserialize_bundle(const std::string& text);
void save_model(const std::filesystem::path& path, const DagSvmModel& model);
DagSvmModel load_model(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace docclass
