// Command line front end for the action recognition cascade. Every stage is
// exposed standalone so intermediate artifacts can be produced, inspected and
// recombined; `pipeline` chains them end to end.

#include <har/pipeline.hpp>
#include <har/synth.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

std::pair<int, int> parse_dims(const std::string& text, const char* what) {
  int a = 0, b = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &a, &b, &extra) != 2 || a < 1 || b < 1)
    throw CLI::ValidationError(std::string(what) + ": expected <n>x<m>, got " + text);
  return {a, b};
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) parts.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

void print_report(const har::EvalReport& report) {
  std::printf("overall accuracy: %.2f%% (%d clips)\n", report.overall_accuracy, report.total);
  for (std::size_t i = 0; i < report.classes.size(); ++i)
    std::printf("  %-12s %.2f%%\n", report.classes[i].c_str(), report.per_class_accuracy[i]);
}

int run(int argc, char** argv) {
  CLI::App app{"Action recognition for degraded low quality video"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  std::string synth_out;
  std::string synth_classes = "wave,walk,jump,bend";
  int per_class = 10;
  std::uint64_t synth_seed = 0;
  har::SynthSpec proto;
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--classes", synth_classes, "comma separated action classes");
  synth->add_option("--per-class", per_class, "clips per class")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "base seed");
  synth->add_option("--frames", proto.frames, "frames per clip");
  synth->add_option("--width", proto.width, "frame width");
  synth->add_option("--height", proto.height, "frame height");
  synth->add_option("--texture-contrast", proto.texture_contrast, "actor texture amplitude");

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Apply controlled quality degradation");
  std::string deg_in, deg_out, deg_preset;
  double deg_brightness = 0.0, deg_contrast = 0.0;
  degrade->add_option("--in", deg_in, "input clip or dataset directory")->required();
  degrade->add_option("--out", deg_out, "output directory")->required();
  auto* preset_opt = degrade->add_option("--preset", deg_preset, "degradation preset (S1, S2, S3)");
  auto* bright_opt = degrade->add_option("--brightness", deg_brightness, "brightness change in percent");
  auto* contrast_opt = degrade->add_option("--contrast", deg_contrast, "contrast change in percent");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Histogram equalize with exposure based sub images");
  std::string enh_in, enh_out, enh_dump;
  enhance->add_option("--in", enh_in, "input clip or dataset directory")->required();
  enhance->add_option("--out", enh_out, "output directory")->required();
  auto* dump_opt = enhance->add_option("--dump-params", enh_dump, "write per frame parameters to this file");

  // segment
  auto* segment = app.add_subcommand("segment", "Extract entropy based silhouette masks");
  std::string seg_in, seg_out;
  double seg_threshold = 0.0;
  segment->add_option("--in", seg_in, "input clip or dataset directory")->required();
  segment->add_option("--out", seg_out, "output mask directory")->required();
  auto* thr_opt = segment->add_option("--threshold", seg_threshold, "fixed entropy threshold (default: per frame Otsu)");

  // features
  auto* features = app.add_subcommand("features", "Build key pose grid features from masks");
  std::string feat_masks, feat_out, feat_grid = "8x6", feat_norm = "64x48";
  int feat_k = 15;
  features->add_option("--masks", feat_masks, "mask dataset directory")->required();
  features->add_option("--out", feat_out, "output feature CSV")->required();
  features->add_option("--k", feat_k, "key poses per clip")->check(CLI::PositiveNumber);
  features->add_option("--grid", feat_grid, "grid cells as <rows>x<cols>");
  features->add_option("--norm", feat_norm, "normalized pose size as <height>x<width>");

  // train
  auto* train = app.add_subcommand("train", "Train a PCA+SVM model on a feature CSV");
  std::string train_features, train_model;
  double train_variance = 0.95, train_c = 1.0;
  train->add_option("--features", train_features, "input feature CSV")->required();
  train->add_option("--out", train_model, "output model file")->required();
  train->add_option("--pca-variance", train_variance, "retained variance fraction");
  train->add_option("--svm-c", train_c, "SVM penalty parameter");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate features with leave one out cross validation");
  std::string eval_features, eval_report, eval_confusion, eval_scope = "fold";
  double eval_variance = 0.95, eval_c = 1.0;
  bool eval_loocv = false;
  eval->add_option("--features", eval_features, "input feature CSV")->required();
  eval->add_flag("--loocv", eval_loocv, "leave one out cross validation")->required();
  eval->add_option("--report", eval_report, "output report JSON")->required();
  eval->add_option("--confusion", eval_confusion, "output confusion CSV");
  eval->add_option("--pca-variance", eval_variance, "retained variance fraction");
  eval->add_option("--svm-c", eval_c, "SVM penalty parameter");
  eval->add_option("--pca-scope", eval_scope, "fold or global")
      ->check(CLI::IsMember({"fold", "global"}));

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run the full cascade over a dataset");
  std::string cfg_path, pl_in, pl_out, pl_preset, pl_scope, pl_esihe, pl_grid, pl_norm;
  int pl_k = 0;
  double pl_variance = 0.0, pl_c = 0.0;
  std::uint64_t pl_seed = 0;
  auto* cfg_opt = pipeline->add_option("--config", cfg_path, "config file (key = value lines)");
  auto* in_opt = pipeline->add_option("--in", pl_in, "input dataset directory");
  auto* out_opt = pipeline->add_option("--out", pl_out, "output artifact directory");
  auto* pl_preset_opt = pipeline->add_option("--preset", pl_preset, "degradation preset or none");
  auto* esihe_opt = pipeline->add_option("--esihe", pl_esihe, "enhancement stage on/off")
                        ->check(CLI::IsMember({"on", "off"}));
  auto* k_opt = pipeline->add_option("--k", pl_k, "key poses per clip");
  auto* grid_opt = pipeline->add_option("--grid", pl_grid, "grid cells as <rows>x<cols>");
  auto* norm_opt = pipeline->add_option("--norm", pl_norm, "normalized pose size as <height>x<width>");
  auto* var_opt = pipeline->add_option("--pca-variance", pl_variance, "retained variance fraction");
  auto* scope_opt = pipeline->add_option("--pca-scope", pl_scope, "fold or global")
                        ->check(CLI::IsMember({"fold", "global"}));
  auto* c_opt = pipeline->add_option("--svm-c", pl_c, "SVM penalty parameter");
  auto* seed_opt = pipeline->add_option("--seed", pl_seed, "run seed recorded in the report");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const auto classes = split_csv(synth_classes);
    if (classes.empty()) throw std::invalid_argument("--classes: no classes given");
    int index = 0;
    for (const auto& cls : classes) {
      for (int i = 0; i < per_class; ++i, ++index) {
        har::SynthSpec spec = proto;
        spec.action_class = cls;
        spec.seed = synth_seed + static_cast<std::uint64_t>(index);
        const har::SynthClip sc = har::gen_clip(spec);
        char id[64];
        std::snprintf(id, sizeof id, "%s__%02d", cls.c_str(), i);
        har::save_clip(sc.clip, std::filesystem::path(synth_out) / id);
        const auto gt_dir = std::filesystem::path(synth_out) / "gt" / id;
        std::filesystem::create_directories(gt_dir);
        char name[16];
        for (std::size_t f = 0; f < sc.gt_masks.size(); ++f) {
          std::snprintf(name, sizeof name, "f%04zu.pgm", f);
          har::save_mask(sc.gt_masks[f], gt_dir / name);
        }
      }
    }
    std::printf("wrote %d clips to %s\n", index, synth_out.c_str());
  } else if (degrade->parsed()) {
    har::DegradeSpec spec;
    if (preset_opt->count()) {
      if (bright_opt->count() || contrast_opt->count())
        throw std::invalid_argument("--preset excludes --brightness/--contrast");
      spec = har::degrade_preset(deg_preset);
    } else if (bright_opt->count() || contrast_opt->count()) {
      spec = {deg_brightness, deg_contrast};
      har::validate(spec);
    } else {
      throw std::invalid_argument("degrade: pass --preset or --brightness/--contrast");
    }
    har::degrade_tree(deg_in, deg_out, spec);
  } else if (enhance->parsed()) {
    std::optional<std::filesystem::path> dump;
    if (dump_opt->count()) dump = enh_dump;
    har::enhance_tree(enh_in, enh_out, dump);
  } else if (segment->parsed()) {
    std::optional<double> threshold;
    if (thr_opt->count()) threshold = seg_threshold;
    har::segment_tree(seg_in, seg_out, threshold);
  } else if (features->parsed()) {
    const auto [rows, cols] = parse_dims(feat_grid, "--grid");
    const auto [nh, nw] = parse_dims(feat_norm, "--norm");
    const har::GridSpec grid{rows, cols, nh, nw};
    har::validate(grid);
    const auto clips = har::load_mask_clips(feat_masks);
    const har::FeatureMatrix matrix = har::build_matrix(clips, feat_k, grid);
    har::write_features_csv(matrix, feat_out);
    std::printf("wrote %zu feature rows to %s\n", matrix.rows.size(), feat_out.c_str());
  } else if (train->parsed()) {
    const auto matrix = har::read_features_csv(train_features);
    const auto [x, labels] = har::to_matrix(matrix);
    const har::TrainedModel model = har::train_model(x, labels, train_variance, train_c);
    har::save_model(model, train_model);
    std::printf("model: %zu classes, %d of %zu dimensions retained\n", model.svm.classes.size(),
                model.pca.retained, static_cast<std::size_t>(x.cols()));
  } else if (eval->parsed()) {
    const auto matrix = har::read_features_csv(eval_features);
    const auto [x, labels] = har::to_matrix(matrix);
    har::LoocvOptions opts;
    opts.pca_variance = eval_variance;
    opts.svm_c = eval_c;
    opts.pca_scope = eval_scope == "global" ? har::PcaScope::kGlobal : har::PcaScope::kFold;
    const har::EvalReport report = har::loocv(x, labels, opts);
    {
      std::ofstream out(eval_report);
      if (!out) throw std::runtime_error(eval_report + ": cannot open for writing");
      out << har::report_to_json(report).dump(2) << "\n";
    }
    if (!eval_confusion.empty()) har::write_confusion_csv(report, eval_confusion);
    print_report(report);
  } else if (pipeline->parsed()) {
    har::PipelineConfig cfg;
    if (cfg_opt->count()) cfg = har::load_config(cfg_path);
    if (in_opt->count()) cfg.input = pl_in;
    if (out_opt->count()) cfg.output = pl_out;
    if (pl_preset_opt->count()) cfg.degrade_preset = pl_preset;
    if (esihe_opt->count()) cfg.esihe = pl_esihe == "on";
    if (k_opt->count()) cfg.k = pl_k;
    if (grid_opt->count()) {
      const auto [rows, cols] = parse_dims(pl_grid, "--grid");
      cfg.grid_rows = rows;
      cfg.grid_cols = cols;
    }
    if (norm_opt->count()) {
      const auto [nh, nw] = parse_dims(pl_norm, "--norm");
      cfg.norm_height = nh;
      cfg.norm_width = nw;
    }
    if (var_opt->count()) cfg.pca_variance = pl_variance;
    if (scope_opt->count()) cfg.pca_scope = pl_scope;
    if (c_opt->count()) cfg.svm_c = pl_c;
    if (seed_opt->count()) cfg.seed = pl_seed;
    const har::PipelineResult result = har::run_pipeline(cfg);
    print_report(result.report);
    if (!result.failures.empty()) {
      std::printf("failed clips (%zu of %d):\n", result.failures.size(), result.clips_total);
      for (const auto& f : result.failures)
        std::printf("  %s: %s\n", f.id.c_str(), f.error.c_str());
    }
    std::printf("report: %s\n", result.report_path.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
