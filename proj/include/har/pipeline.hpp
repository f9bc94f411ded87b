#pragma once

#include <har/degrade.hpp>
#include <har/esihe.hpp>
#include <har/frame.hpp>
#include <har/keypose.hpp>
#include <har/learner.hpp>
#include <har/silhouette.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace har {

// Everything the end-to-end run needs, with documented defaults. Values
// round-trip losslessly through the flat key=value config format.
struct PipelineConfig {
  std::string input;                   // dataset directory of clip directories
  std::string output;                  // artifact directory
  std::string degrade_preset = "none"; // none | S1 | S2 | S3
  bool esihe = true;                   // enhancement stage on/off
  int k = 15;                          // key poses per clip
  int grid_rows = 8;
  int grid_cols = 6;
  int norm_height = 64;
  int norm_width = 48;
  double pca_variance = 0.95;
  std::string pca_scope = "fold";      // fold | global
  double svm_c = 1.0;
  std::uint64_t seed = 0;              // reserved for stochastic solvers

  GridSpec grid() const { return {grid_rows, grid_cols, norm_height, norm_width}; }

  LoocvOptions loocv_options() const {
    LoocvOptions opts;
    opts.pca_variance = pca_variance;
    opts.svm_c = svm_c;
    opts.pca_scope = pca_scope == "global" ? PcaScope::kGlobal : PcaScope::kFold;
    return opts;
  }
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.degrade_preset != "none") degrade_preset(cfg.degrade_preset);  // throws if unknown
  if (cfg.k < 1) throw std::invalid_argument("config: k must be at least 1");
  validate(cfg.grid());
  if (!(cfg.pca_variance > 0.0) || cfg.pca_variance > 1.0)
    throw std::invalid_argument("config: pca_variance must lie in (0, 1]");
  if (cfg.pca_scope != "fold" && cfg.pca_scope != "global")
    throw std::invalid_argument("config: pca_scope must be fold or global");
  if (!(cfg.svm_c > 0.0)) throw std::invalid_argument("config: svm_c must be positive");
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "input = " << cfg.input << "\n"
      << "output = " << cfg.output << "\n"
      << "degrade_preset = " << cfg.degrade_preset << "\n"
      << "esihe = " << (cfg.esihe ? "on" : "off") << "\n"
      << "k = " << cfg.k << "\n"
      << "grid_rows = " << cfg.grid_rows << "\n"
      << "grid_cols = " << cfg.grid_cols << "\n"
      << "norm_height = " << cfg.norm_height << "\n"
      << "norm_width = " << cfg.norm_width << "\n"
      << "pca_variance = " << detail::format_double(cfg.pca_variance) << "\n"
      << "pca_scope = " << cfg.pca_scope << "\n"
      << "svm_c = " << detail::format_double(cfg.svm_c) << "\n"
      << "seed = " << cfg.seed << "\n";
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config file");
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "input") cfg.input = value;
    else if (key == "output") cfg.output = value;
    else if (key == "degrade_preset") cfg.degrade_preset = value;
    else if (key == "esihe") {
      if (value != "on" && value != "off")
        throw std::runtime_error(path.string() + ": esihe must be on or off");
      cfg.esihe = value == "on";
    } else if (key == "k") cfg.k = std::stoi(value);
    else if (key == "grid_rows") cfg.grid_rows = std::stoi(value);
    else if (key == "grid_cols") cfg.grid_cols = std::stoi(value);
    else if (key == "norm_height") cfg.norm_height = std::stoi(value);
    else if (key == "norm_width") cfg.norm_width = std::stoi(value);
    else if (key == "pca_variance") cfg.pca_variance = std::stod(value);
    else if (key == "pca_scope") cfg.pca_scope = value;
    else if (key == "svm_c") cfg.svm_c = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else
      throw std::runtime_error(path.string() + ": unknown config key: " + key);
  }
  return cfg;
}

namespace detail {

namespace fs = std::filesystem;

inline bool has_image_files(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png") return true;
  }
  return false;
}

// Clip directories of a dataset, sorted by name. A "gt" entry holds ground
// truth masks, not a clip.
inline std::vector<fs::path> clip_dirs(const fs::path& dataset) {
  if (!fs::is_directory(dataset)) throw std::runtime_error(dataset.string() + ": not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dataset)) {
    if (!entry.is_directory()) continue;
    if (entry.path().filename() == "gt") continue;
    dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return dirs;
}

// Datasets are directories of clip directories; a directory that itself
// holds frame files is treated as a single clip.
inline std::vector<fs::path> input_units(const fs::path& in) {
  if (!fs::is_directory(in)) throw std::runtime_error(in.string() + ": not a directory");
  auto dirs = clip_dirs(in);
  if (dirs.empty() && has_image_files(in)) dirs.push_back(in);
  if (dirs.empty()) throw std::runtime_error(in.string() + ": no clips found");
  return dirs;
}

}  // namespace detail

// Applies a degradation preset to every clip under `in`, mirroring the
// directory layout to `out` with canonical frame names.
inline void degrade_tree(const std::filesystem::path& in, const std::filesystem::path& out,
                         const DegradeSpec& spec) {
  for (const auto& dir : detail::input_units(in)) {
    Clip clip = load_clip(dir);
    for (auto& frame : clip.frames) frame = degrade(frame, spec);
    save_clip(clip, out / dir.filename());
  }
}

// Enhances every clip under `in`. When dump_params is given, one text line
// per frame records the enhancement parameters.
inline void enhance_tree(const std::filesystem::path& in, const std::filesystem::path& out,
                         const std::optional<std::filesystem::path>& dump_params = {}) {
  std::ofstream dump;
  if (dump_params) {
    dump.open(*dump_params);
    if (!dump) throw std::runtime_error(dump_params->string() + ": cannot open for writing");
    dump << "# clip frame Et Ea Tc NL NU\n";
  }
  for (const auto& dir : detail::input_units(in)) {
    Clip clip = load_clip(dir);
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
      EsiheParams params;
      clip.frames[i] = enhance(clip.frames[i], &params);
      if (dump_params)
        dump << clip.id << " " << i << " " << detail::format_double(params.exposure_threshold)
             << " " << params.boundary << " " << detail::format_double(params.clip_threshold)
             << " " << detail::format_double(params.n_lower) << " "
             << detail::format_double(params.n_upper) << "\n";
    }
    save_clip(clip, out / dir.filename());
  }
}

// Extracts one silhouette mask per frame for every clip under `in`; masks are
// written as {0, 255} PGM files mirroring the input layout.
inline void segment_tree(const std::filesystem::path& in, const std::filesystem::path& out,
                         std::optional<double> threshold = {}) {
  for (const auto& dir : detail::input_units(in)) {
    const Clip clip = load_clip(dir);
    const std::filesystem::path clip_out = out / dir.filename();
    std::filesystem::create_directories(clip_out);
    char name[16];
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
      const BinaryMask mask = extract_silhouette(clip.frames[i], threshold);
      std::snprintf(name, sizeof name, "f%04zu.pgm", i);
      save_mask(mask, clip_out / name);
    }
  }
}

// Reads mask clip directories (as written by segment_tree) back into memory.
inline std::vector<MaskClip> load_mask_clips(const std::filesystem::path& dir) {
  std::vector<MaskClip> clips;
  for (const auto& clip_dir : detail::input_units(dir)) {
    const Clip raw = load_clip(clip_dir);
    MaskClip mc;
    mc.id = raw.id;
    mc.label = raw.label;
    mc.masks.reserve(raw.frames.size());
    for (const auto& frame : raw.frames) mc.masks.push_back(frame_to_mask(frame));
    clips.push_back(std::move(mc));
  }
  return clips;
}

inline std::pair<Eigen::MatrixXd, std::vector<std::string>> to_matrix(
    const FeatureMatrix& features) {
  if (features.rows.empty()) throw std::invalid_argument("empty feature matrix");
  Eigen::MatrixXd x(features.rows.size(), features.rows.front().values.size());
  std::vector<std::string> labels;
  labels.reserve(features.rows.size());
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    const auto& row = features.rows[i];
    if (row.values.size() != static_cast<std::size_t>(x.cols()))
      throw std::invalid_argument("feature rows have inconsistent lengths");
    for (std::size_t j = 0; j < row.values.size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.values[j];
    labels.push_back(row.label);
  }
  return {std::move(x), std::move(labels)};
}

struct ClipFailure {
  std::string id;
  std::string error;
};

struct PipelineResult {
  EvalReport report;
  std::vector<ClipFailure> failures;
  int clips_total = 0;
  std::filesystem::path report_path;
};

inline nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["input"] = cfg.input;
  j["output"] = cfg.output;
  j["degrade_preset"] = cfg.degrade_preset;
  j["esihe"] = cfg.esihe;
  j["k"] = cfg.k;
  j["grid_rows"] = cfg.grid_rows;
  j["grid_cols"] = cfg.grid_cols;
  j["norm_height"] = cfg.norm_height;
  j["norm_width"] = cfg.norm_width;
  j["pca_variance"] = cfg.pca_variance;
  j["pca_scope"] = cfg.pca_scope;
  j["svm_c"] = cfg.svm_c;
  j["seed"] = cfg.seed;
  return j;
}

// Full cascade over a labeled dataset: optional degradation, optional
// enhancement, silhouette extraction, key-pose features, leave-one-out
// evaluation. Intermediate rasters land under the output directory so every
// stage can be inspected or rerun standalone; the stage subcommands produce
// byte-identical trees. Per-clip failures are tolerated up to 10% of the
// dataset and recorded in the report.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  validate(cfg);
  if (cfg.input.empty() || cfg.output.empty())
    throw std::invalid_argument("config: input and output directories are required");

  const auto clip_paths = detail::input_units(cfg.input);  // throws when empty
  const fs::path out(cfg.output);
  fs::create_directories(out);

  const bool do_degrade = cfg.degrade_preset != "none";
  const DegradeSpec spec = do_degrade ? degrade_preset(cfg.degrade_preset) : DegradeSpec{};
  const GridSpec grid = cfg.grid();

  std::map<std::string, double> timings{{"load", 0}, {"degrade", 0}, {"enhance", 0},
                                        {"segment", 0}, {"features", 0}, {"loocv", 0}};
  auto timed = [&timings](const std::string& stage, auto&& fn) {
    const auto start = clock::now();
    fn();
    timings[stage] += std::chrono::duration<double>(clock::now() - start).count();
  };

  PipelineResult result;
  result.clips_total = static_cast<int>(clip_paths.size());
  FeatureMatrix features;

  for (const auto& path : clip_paths) {
    const std::string id = path.filename().string();
    try {
      Clip clip;
      timed("load", [&] { clip = load_clip(path); });
      if (do_degrade)
        timed("degrade", [&] {
          for (auto& frame : clip.frames) frame = degrade(frame, spec);
          save_clip(clip, out / "degraded" / id);
        });
      if (cfg.esihe)
        timed("enhance", [&] {
          for (auto& frame : clip.frames) frame = enhance(frame);
          save_clip(clip, out / "enhanced" / id);
        });
      std::vector<BinaryMask> masks;
      timed("segment", [&] {
        const fs::path mask_dir = out / "masks" / id;
        fs::create_directories(mask_dir);
        char name[16];
        masks.reserve(clip.frames.size());
        for (std::size_t i = 0; i < clip.frames.size(); ++i) {
          masks.push_back(extract_silhouette(clip.frames[i]));
          std::snprintf(name, sizeof name, "f%04zu.pgm", i);
          save_mask(masks.back(), mask_dir / name);
        }
      });
      timed("features", [&] {
        FeatureVector feature = build_feature(masks, cfg.k, grid);
        feature.label = clip.label;
        feature.clip_id = id;
        features.rows.push_back(std::move(feature));
      });
    } catch (const std::exception& e) {
      result.failures.push_back({id, e.what()});
    }
  }

  if (static_cast<int>(result.failures.size()) * 10 > result.clips_total) {
    std::string msg = "pipeline aborted: more than 10% of clips failed:";
    for (const auto& f : result.failures) msg += "\n  " + f.id + ": " + f.error;
    throw std::runtime_error(msg);
  }

  write_features_csv(features, out / "features.csv");
  const auto [x, labels] = to_matrix(features);
  timed("loocv", [&] { result.report = loocv(x, labels, cfg.loocv_options()); });

  nlohmann::ordered_json j;
  j["config"] = config_to_json(cfg);
  j["clips_total"] = result.clips_total;
  j["clips_used"] = features.rows.size();
  nlohmann::ordered_json failed = nlohmann::ordered_json::array();
  for (const auto& f : result.failures) failed.push_back({{"id", f.id}, {"error", f.error}});
  j["failed_clips"] = std::move(failed);
  j["evaluation"] = report_to_json(result.report);

  result.report_path = out / "report.json";
  {
    std::ofstream rep(result.report_path);
    if (!rep) throw std::runtime_error(result.report_path.string() + ": cannot open for writing");
    rep << j.dump(2) << "\n";
  }
  write_confusion_csv(result.report, out / "confusion.csv");
  {
    std::ofstream timing(out / "timing.txt");
    timing << "# stage seconds\n";
    for (const auto& [stage, secs] : timings) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s %.3f\n", stage.c_str(), secs);
      timing << buf;
    }
  }
  return result;
}

}  // namespace har
