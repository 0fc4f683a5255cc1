#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "docclass/dataset.hpp"
#include "docclass/error.hpp"
#include "docclass/eval.hpp"
#include "docclass/features.hpp"
#include "docclass/image_io.hpp"
#include "docclass/parallel.hpp"

namespace docclass::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Fatal configuration problem (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string manifest;
  std::string bundle;
  std::vector<double> sigma_grid = kDefaultSigmaGrid;
  std::vector<double> c_grid = kDefaultCGrid;
  std::string mask = "all";
  std::string weights;
  std::uint64_t seed = 42;
  std::string format = "json";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  int per_class = 20;
  std::string policy = "min-impact";
  std::string out_dir;
  std::string report;
  int width = 512;
  int height = 512;
};

json default_config_json() {
  const FeatureConfig f;
  const SmoConfig smo;
  json weights = to_json(default_weight_table());
  return {{"edges", {{"contrast", f.edges.contrast}, {"dark", f.edges.dark}, {"light", f.edges.light}}},
          {"std_floor", f.std_floor},
          {"min_chroma_samples", f.min_chroma_samples},
          {"min_variance_edges", f.min_variance_edges},
          {"color_threshold", f.color_threshold},
          {"color_fraction", f.color_fraction},
          {"white_luma", f.white_luma},
          {"white_fraction", f.white_fraction},
          {"smo", {{"kkt_tolerance", smo.kkt_tolerance}, {"max_passes", smo.max_passes}}},
          {"sigma_grid", kDefaultSigmaGrid},
          {"c_grid", kDefaultCGrid},
          {"weights", weights["weights"]},
          {"normalization", "per-class"},
          {"seed", 42},
          {"page_size", {512, 512}}};
}

WeightTable load_weights(const std::string& path) {
  if (path.empty()) return default_weight_table();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open weight table " + path);
  try {
    return weight_table_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw UsageError("bad weight table " + path + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError("bad weight table " + path + ": " + e.what());
  }
}

FeatureMask parse_mask_flag(const std::string& text) {
  try {
    return parse_mask(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Manifest load_manifest_flag(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw UsageError("--manifest is required");
  return read_manifest(cfg.manifest);
}

struct PageFeatures {
  std::string path;
  std::optional<ClassLabel> label;
  FeatureVector features;
};

struct ExtractRun {
  std::vector<PageFeatures> pages;
  std::vector<EntryFailure> failures;
};

/// Loads and extracts every entry in parallel; output keeps manifest order.
ExtractRun extract_all(const Manifest& m, unsigned threads) {
  std::vector<std::optional<PageFeatures>> results(m.entries.size());
  std::vector<std::optional<EntryFailure>> failures(m.entries.size());
  parallel_for(m.entries.size(), threads, [&](std::size_t i) {
    const auto& e = m.entries[i];
    try {
      results[i] = PageFeatures{e.path, e.label, extract_features(load_entry(m, e))};
    } catch (const Error& err) {
      failures[i] = EntryFailure{i, e.path, err.kind(), err.what()};
    }
  });
  ExtractRun run;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i]) run.pages.push_back(std::move(*results[i]));
    else run.failures.push_back(std::move(*failures[i]));
  }
  return run;
}

void report_failures(const std::vector<EntryFailure>& failures, std::ostream& err) {
  for (const auto& f : failures) {
    err << "error: entry " << f.index + 1 << " (" << f.path << "): [" << to_string(f.kind) << "] "
        << f.message << '\n';
  }
}

Dataset labeled_dataset(const ExtractRun& run) {
  Dataset data;
  for (const auto& p : run.pages) {
    if (!p.label) throw Error(ErrorKind::Validation, "entry " + p.path + " has no class label");
    data.push_back({p.features.as_vector(), *p.label});
  }
  return data;
}

json feature_record(const PageFeatures& p, const FeatureMask& mask) {
  json j;
  j["path"] = p.path;
  if (p.label) j["class"] = std::string(to_string(*p.label));
  j["features"] = p.features.values;
  j["mask"] = mask_to_string(mask);
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  throw UsageError("unsupported --format " + format);
}

// ---------------------------------------------------------------------------

int cmd_extract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_format(cfg.format, {"json", "table", "csv"});
  const auto mask = parse_mask_flag(cfg.mask);
  const auto manifest = load_manifest_flag(cfg);
  const auto run = extract_all(manifest, cfg.threads);

  if (cfg.format == "json") {
    for (const auto& p : run.pages) out << feature_record(p, mask).dump() << '\n';
  } else if (cfg.format == "csv") {
    out << "path,class";
    for (std::size_t d = 0; d < kFeatureCount; ++d) out << ',' << feature_name(d);
    out << ",mask\n";
    for (const auto& p : run.pages) {
      // reuse the JSON number formatting so both outputs carry identical values
      const auto rec = feature_record(p, mask);
      out << csv_escape(p.path) << ',' << (p.label ? to_string(*p.label) : "");
      for (const auto& v : rec["features"]) out << ',' << v.dump();
      out << ',' << mask_to_string(mask) << '\n';
    }
  } else {
    std::size_t path_w = 4;
    for (const auto& p : run.pages) path_w = std::max(path_w, p.path.size());
    out << std::left << std::setw(static_cast<int>(path_w) + 2) << "path" << std::setw(11) << "class";
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
      out << std::right << std::setw(22) << feature_name(d);
    }
    out << '\n';
    for (const auto& p : run.pages) {
      const auto rec = feature_record(p, mask);
      out << std::left << std::setw(static_cast<int>(path_w) + 2) << p.path << std::setw(11)
          << (p.label ? std::string(to_string(*p.label)) : "-");
      for (const auto& v : rec["features"]) out << std::right << std::setw(22) << v.dump();
      out << '\n';
    }
  }
  report_failures(run.failures, err);
  return run.failures.empty() ? kExitOk : kExitData;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_format(cfg.format, {"json", "table"});
  if (cfg.bundle.empty()) throw UsageError("--bundle is required");
  const auto mask = parse_mask_flag(cfg.mask);
  const auto weights = load_weights(cfg.weights);
  const auto manifest = load_manifest_flag(cfg);
  const auto run = extract_all(manifest, cfg.threads);
  if (!run.failures.empty()) {
    report_failures(run.failures, err);
    return kExitData;
  }
  const auto data = labeled_dataset(run);
  EvalOptions opts;
  opts.threads = cfg.threads;
  const auto best = grid_search(data, cfg.sigma_grid, cfg.c_grid, mask, weights, opts);
  const auto model = train_dag(data, best.sigma, best.box_c, mask, {opts.smo, cfg.threads});
  save_model(cfg.bundle, model);
  const auto hash = bundle_to_json(model)["content_hash"].get<std::string>();

  const double accuracy =
      static_cast<double>(best.confusion.correct()) / static_cast<double>(best.confusion.total());
  if (cfg.format == "json") {
    out << json{{"bundle", cfg.bundle},
                {"content_hash", hash},
                {"sigma", best.sigma},
                {"box_c", best.box_c},
                {"mask", mask_to_string(mask)},
                {"weighted_rate", best.weighted_rate},
                {"accuracy", accuracy},
                {"confusion", to_json(best.confusion)}}
               .dump()
        << '\n';
  } else {
    out << "sigma* " << best.sigma << "  C* " << best.box_c << "  mask " << mask_to_string(mask)
        << '\n'
        << "W_m* " << best.weighted_rate << "  accuracy " << accuracy << '\n'
        << format_confusion_table(best.confusion) << "bundle " << cfg.bundle << " (" << hash
        << ")\n";
  }
  return kExitOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                 bool mask_given) {
  check_format(cfg.format, {"json", "table"});
  if (cfg.bundle.empty()) throw UsageError("--bundle is required");
  const auto model = load_model(cfg.bundle);
  if (mask_given && parse_mask_flag(cfg.mask) != model.mask) {
    err << "error: --mask " << cfg.mask << " does not match the bundle mask "
        << mask_to_string(model.mask) << '\n';
    return kExitData;
  }
  if (model.mask.size() != kFeatureCount) {
    err << "error: bundle expects " << model.mask.size() << "-dimensional features, pages give "
        << kFeatureCount << '\n';
    return kExitData;
  }
  const auto manifest = load_manifest_flag(cfg);
  const auto run = extract_all(manifest, cfg.threads);
  for (const auto& p : run.pages) {
    const auto decision = classify_traced(model, p.features.as_vector());
    if (cfg.format == "json") {
      json nodes = json::array();
      for (const auto& n : decision.path) {
        nodes.push_back({{"pair", {code(n.first), code(n.last)}}, {"value", n.value}});
      }
      json rec{{"path", p.path}, {"label", std::string(to_string(decision.label))}, {"nodes", nodes}};
      if (p.label) rec["class"] = std::string(to_string(*p.label));
      out << rec.dump() << '\n';
    } else {
      out << std::left << std::setw(40) << p.path << std::setw(11) << to_string(decision.label);
      for (const auto& n : decision.path) {
        out << ' ' << code(n.first) << 'v' << code(n.last) << '=' << std::setprecision(4)
            << n.value;
      }
      out << '\n';
    }
  }
  report_failures(run.failures, err);
  return run.failures.empty() ? kExitOk : kExitData;
}

int cmd_select_features(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_format(cfg.format, {"json", "table"});
  const auto policy = parse_selection_policy(cfg.policy);
  if (!policy) throw UsageError("unknown --policy " + cfg.policy);

  SelectionReport report;
  if (!cfg.report.empty()) {
    std::ifstream in(cfg.report);
    if (!in) throw UsageError("cannot open report " + cfg.report);
    try {
      auto j = json::parse(in);
      report = selection_report_from_json(j.contains("report") ? j["report"] : j);
    } catch (const json::exception& e) {
      throw UsageError("bad report " + cfg.report + ": " + e.what());
    }
  } else {
    const auto weights = load_weights(cfg.weights);
    const auto manifest = load_manifest_flag(cfg);
    const auto loaded = load_corpus(manifest, cfg.threads);
    if (!loaded.failures.empty()) {
      report_failures(loaded.failures, err);
      return kExitData;
    }
    Dataset data;
    std::vector<Raster> rasters;
    for (const auto& page : loaded.pages) {
      if (!page.label) throw Error(ErrorKind::Validation, "entry " + page.path + " has no class label");
      data.push_back({extract_features(page.raster).as_vector(), *page.label});
      rasters.push_back(page.raster);
    }
    const auto times = time_features(rasters);
    EvalOptions opts;
    opts.threads = cfg.threads;
    // (sigma, C) fixed at the all-features optimum for every drop
    const auto best = grid_search(data, cfg.sigma_grid, cfg.c_grid, full_mask(), weights, opts);
    report = build_selection_report(data, best.sigma, best.box_c, weights,
                                    {times.begin(), times.end()}, opts);
  }
  const auto mask = select_features(report, *policy);
  if (cfg.format == "json") {
    out << json{{"report", to_json(report)}, {"recommended_mask", mask_to_string(mask)}}.dump()
        << '\n';
  } else {
    out << format_selection_table(report) << "recommended mask " << mask_to_string(mask) << '\n';
  }
  return kExitOk;
}

int cmd_gen_corpus(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.out_dir.empty()) throw UsageError("--out is required");
  if (cfg.per_class < 1) throw UsageError("--per-class must be at least 1");
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create " + dir.string());
  const auto manifest_path = dir / "manifest.jsonl";
  fs::remove(manifest_path, ec);

  std::vector<ManifestEntry> entries;
  for (auto label : kAllClasses) {
    for (int k = 0; k < cfg.per_class; ++k) {
      std::ostringstream name;
      name << to_string(label) << '_' << std::setw(4) << std::setfill('0') << k << ".ppm";
      entries.push_back({name.str(), ColorSpace::RGB8, label, std::nullopt});
    }
  }
  parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
    SynthSpec spec;
    spec.label = *entries[i].label;
    spec.width = cfg.width;
    spec.height = cfg.height;
    spec.seed = cfg.seed + i;
    write_ppm(dir / entries[i].path, generate(spec));
  });
  write_manifest(manifest_path, entries);
  out << json{{"manifest", manifest_path.string()}, {"images", entries.size()}}.dump() << '\n';
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size() || !(v > 0.0)) throw std::invalid_argument(token);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + token + "'");
    }
  }
  if (grid.empty()) throw UsageError("grid must not be empty");
  return grid;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document image classifier: features, DAG-SVM training and evaluation"};
  app.require_subcommand(0, 1);
  RunConfig cfg;
  bool show_config = false;
  std::string sigma_text, c_text;
  app.add_flag("--show-config", show_config, "Print every built-in default and exit");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "Output format");
  };
  auto add_grids = [&](CLI::App* sub) {
    sub->add_option("--sigma-grid", sigma_text, "Comma-separated kernel widths");
    sub->add_option("--c-grid", c_text, "Comma-separated box constraints");
    sub->add_option("--weights", cfg.weights, "Weight table JSON");
  };

  auto* extract = app.add_subcommand("extract", "Extract feature vectors for a manifest");
  extract->add_option("--manifest", cfg.manifest)->required();
  extract->add_option("--mask", cfg.mask, "Feature mask recorded with each vector");
  add_common(extract);

  auto* train = app.add_subcommand("train", "Grid-search (sigma, C) by LOO and write a bundle");
  train->add_option("--manifest", cfg.manifest)->required();
  train->add_option("--bundle", cfg.bundle)->required();
  train->add_option("--mask", cfg.mask);
  add_grids(train);
  add_common(train);

  auto* classify_cmd = app.add_subcommand("classify", "Classify pages with a trained bundle");
  classify_cmd->add_option("--manifest", cfg.manifest)->required();
  classify_cmd->add_option("--bundle", cfg.bundle)->required();
  auto* classify_mask = classify_cmd->add_option("--mask", cfg.mask);
  add_common(classify_cmd);

  auto* select = app.add_subcommand("select-features", "Leave-one-out feature impact report");
  select->add_option("--manifest", cfg.manifest);
  select->add_option("--policy", cfg.policy, "min-impact or keep-all");
  select->add_option("--report", cfg.report, "Reuse a saved report instead of recomputing");
  add_grids(select);
  add_common(select);

  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic five-class corpus");
  gen->add_option("--out", cfg.out_dir)->required();
  gen->add_option("--per-class", cfg.per_class);
  gen->add_option("--seed", cfg.seed);
  gen->add_option("--width", cfg.width);
  gen->add_option("--height", cfg.height);
  add_common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (show_config) {
      out << default_config_json().dump(2) << '\n';
      return kExitOk;
    }
    if (!sigma_text.empty()) cfg.sigma_grid = parse_grid(sigma_text);
    if (!c_text.empty()) cfg.c_grid = parse_grid(c_text);
    if (extract->parsed()) return cmd_extract(cfg, out, err);
    if (train->parsed()) return cmd_train(cfg, out, err);
    if (classify_cmd->parsed()) return cmd_classify(cfg, out, err, classify_mask->count() > 0);
    if (select->parsed()) return cmd_select_features(cfg, out, err);
    if (gen->parsed()) return cmd_gen_corpus(cfg, out, err);
    out << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: [" << to_string(e.kind()) << "] " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace docclass::cli
