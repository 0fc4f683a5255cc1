#include "docclass/dataset.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>

#include "docclass/image_io.hpp"
#include "docclass/parallel.hpp"

namespace docclass {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Manifest

fs::path Manifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

namespace {

ManifestEntry parse_entry(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, "entry is not a JSON object");
  ManifestEntry e;
  if (!j.contains("path") || !j["path"].is_string() || j["path"].get<std::string>().empty()) {
    throw Error(ErrorKind::Validation, "entry has no path");
  }
  e.path = j["path"].get<std::string>();

  const auto space = j.value("space", std::string("rgb8"));
  if (space == "rgb8" || space == "rgb") {
    e.space = ColorSpace::RGB8;
  } else if (space == "lch") {
    e.space = ColorSpace::LCH;
  } else {
    throw Error(ErrorKind::Validation, "entry " + e.path + ": unsupported space '" + space + "'");
  }

  if (j.contains("class") && !j["class"].is_null()) {
    const auto& c = j["class"];
    const auto text = c.is_number_integer() ? std::to_string(c.get<int>())
                                            : c.is_string() ? c.get<std::string>() : std::string();
    e.label = parse_class_label(text);
    if (!e.label) {
      throw Error(ErrorKind::UnknownLabel,
                  "entry " + e.path + ": unknown class label '" + (c.is_string() ? text : c.dump()) + "'");
    }
  }

  if (e.space == ColorSpace::LCH) {
    if (!j.contains("lch") || !j["lch"].is_object()) {
      throw Error(ErrorKind::Validation, "entry " + e.path + ": lch input needs range metadata");
    }
    const auto& m = j["lch"];
    for (const char* key : {"width", "height", "l_max"}) {
      if (!m.contains(key) || !m[key].is_number()) {
        throw Error(ErrorKind::Validation,
                    "entry " + e.path + ": lch metadata is missing '" + key + "'");
      }
    }
    LchSource src;
    src.width = m["width"].get<int>();
    src.height = m["height"].get<int>();
    src.range.l_max = m["l_max"].get<double>();
    src.range.c_max = m.value("c_max", 128.0);
    if (src.width <= 0 || src.height <= 0 || !(src.range.l_max > 0) || !(src.range.c_max > 0)) {
      throw Error(ErrorKind::Validation, "entry " + e.path + ": invalid lch metadata");
    }
    e.lch = src;
  }
  return e;
}

}  // namespace

Manifest parse_manifest(std::istream& in, const fs::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "manifest line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Validation, where + "invalid JSON: " + e.what());
    }
    try {
      auto entry = parse_entry(j);
      if (!seen.insert(entry.path).second) {
        throw Error(ErrorKind::Validation, "duplicate path " + entry.path);
      }
      m.entries.push_back(std::move(entry));
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return m;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

std::string manifest_line(const ManifestEntry& e) {
  json j;
  j["path"] = e.path;
  j["space"] = to_string(e.space);
  if (e.label) j["class"] = std::string(to_string(*e.label));
  if (e.lch) {
    j["lch"] = {{"width", e.lch->width},
                {"height", e.lch->height},
                {"l_max", e.lch->range.l_max},
                {"c_max", e.lch->range.c_max}};
  }
  return j.dump();
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    for (const auto& e : entries) out << manifest_line(e) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Raster load_entry(const Manifest& m, const ManifestEntry& e) {
  const auto path = m.resolve(e);
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, "missing file " + path.string());
  if (e.space == ColorSpace::LCH) {
    if (!e.lch) throw Error(ErrorKind::Validation, "lch entry without range metadata");
    return read_lch_planar(path, e.lch->width, e.lch->height, e.lch->range);
  }
  return rgb_to_yuv(read_ppm(path));
}

CorpusLoad load_corpus(const Manifest& m, unsigned threads) {
  std::vector<std::optional<Raster>> rasters(m.entries.size());
  std::vector<std::optional<EntryFailure>> failures(m.entries.size());
  parallel_for(m.entries.size(), threads, [&](std::size_t i) {
    const auto& e = m.entries[i];
    try {
      rasters[i].emplace(load_entry(m, e));
    } catch (const Error& err) {
      failures[i] = EntryFailure{i, e.path, err.kind(), err.what()};
    }
  });
  CorpusLoad out;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    if (rasters[i]) {
      out.pages.push_back({m.entries[i].path, std::move(*rasters[i]), m.entries[i].label});
    } else {
      out.failures.push_back(std::move(*failures[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundles

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

nlohmann::json bundle_to_json(const DagSvmModel& model) {
  json order = json::array();
  for (auto c : model.class_order) order.push_back(code(c));
  json nodes = json::array();
  for (std::size_t p = 0; p < kPairCount; ++p) {
    const auto [a, b] = pair_at(p);
    nodes.push_back({{"pair", {code(a), code(b)}}, {"model", to_json(model.pairwise[p])}});
  }
  json payload = {{"class_order", order},
                  {"mask", mask_to_string(model.mask)},
                  {"stats", to_json(model.stats)},
                  {"nodes", nodes}};
  const auto hash = sha256_hex(payload.dump());
  return {{"format", "docclass-dag-bundle"},
          {"version", kBundleVersion},
          {"payload", std::move(payload)},
          {"content_hash", hash}};
}

std::string serialize_bundle(const DagSvmModel& model) { return bundle_to_json(model).dump(1) + "\n"; }

DagSvmModel deserialize_bundle(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Corrupted, std::string("bundle is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kBundleVersion) {
      throw Error(ErrorKind::UnsupportedVersion,
                  "unsupported bundle version " + std::to_string(version));
    }
    const auto& payload = j.at("payload");
    if (sha256_hex(payload.dump()) != j.at("content_hash").get<std::string>()) {
      throw Error(ErrorKind::Corrupted, "bundle content hash mismatch");
    }
    DagSvmModel model;
    const auto order = payload.at("class_order").get<std::vector<int>>();
    if (order != std::vector<int>{1, 2, 3, 4, 5}) {
      throw Error(ErrorKind::Corrupted, "unexpected class order in bundle");
    }
    const auto mask_text = payload.at("mask").get<std::string>();
    model.mask = parse_mask(mask_text, mask_text.size());
    model.stats = stats_from_json(payload.at("stats"));
    if (model.stats.mean.size() != active_count(model.mask)) {
      throw Error(ErrorKind::Corrupted, "bundle statistics do not match its mask");
    }
    const auto& nodes = payload.at("nodes");
    if (nodes.size() != kPairCount) throw Error(ErrorKind::Corrupted, "bundle needs 10 nodes");
    std::array<bool, kPairCount> filled{};
    for (const auto& node : nodes) {
      const auto pair = node.at("pair").get<std::array<int, 2>>();
      const auto a = parse_class_label(std::to_string(pair[0]));
      const auto b = parse_class_label(std::to_string(pair[1]));
      if (!a || !b || pair[0] >= pair[1]) throw Error(ErrorKind::Corrupted, "bad node pair");
      const auto p = pair_index(*a, *b);
      if (filled[p]) throw Error(ErrorKind::Corrupted, "duplicate node pair");
      filled[p] = true;
      model.pairwise[p] = binary_model_from_json(node.at("model"));
      if (model.pairwise[p].dimension() != model.stats.mean.size()) {
        throw Error(ErrorKind::Corrupted, "node dimension does not match bundle statistics");
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Corrupted, std::string("malformed bundle: ") + e.what());
  }
}

void save_model(const fs::path& path, const DagSvmModel& model) {
  const auto text = serialize_bundle(model);
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

DagSvmModel load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open bundle " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_bundle(buf.str());
}

}  // namespace docclass
