#include "phogsvm/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "phogsvm/image_io.hpp"
#include "phogsvm/pipeline.hpp"

namespace phogsvm::cli {
namespace {

struct Options {
  // files
  std::string manifest;
  std::vector<std::string> features;
  std::string model;
  std::string out;
  std::vector<std::string> images;
  // descriptor
  int levels = 3;
  int bins = 16;
  double angle = 360.0;
  double edge_thresh = 0.1;
  double sigma = 1.0;
  std::string resample = "300x300";
  std::string grad_source = "image";
  int stencil = 4;
  bool no_normalize = false;
  // svm
  std::string kernel = "rbf";
  double C = 1.0;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 1.0;
  double tol = 1e-3;
  int max_passes = 0;
  // protocol
  std::uint64_t seed = 0;
  int folds = 5;
  int repeats = 1;
  bool paper_protocol = false;
  unsigned threads = 0;
};

void add_descriptor_flags(CLI::App* app, Options& o) {
  app->add_option("--levels", o.levels, "Deepest pyramid level L (levels 0..L are used)");
  app->add_option("--bins", o.bins, "Orientation bins H per cell");
  app->add_option("--angle", o.angle, "Orientation range in degrees")->check(CLI::IsMember({180.0, 360.0}));
  app->add_option("--edge-thresh", o.edge_thresh, "Edge mask threshold as a fraction of max |Laplacian|")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--sigma", o.sigma, "Gaussian smoothing sigma")->check(CLI::PositiveNumber);
  app->add_option("--resample", o.resample, "Preprocessing resample size WxH");
  app->add_option("--grad-source", o.grad_source, "Image the Sobel gradients are taken from")
      ->check(CLI::IsMember({"image", "laplacian"}));
  app->add_option("--stencil", o.stencil, "Laplacian stencil connectivity")->check(CLI::IsMember({4, 8}));
  app->add_flag("--no-normalize", o.no_normalize, "Skip L1 normalization of descriptors");
}

void add_svm_flags(CLI::App* app, Options& o, bool multi_kernel) {
  app->add_option("--kernel", o.kernel,
                  multi_kernel ? "Kernel(s): linear, poly, rbf; comma-separated list allowed" : "Kernel: linear, poly or rbf");
  if (!multi_kernel) {
    // grid-search sweeps these itself.
    app->add_option("--C", o.C, "Soft-margin cost C")->check(CLI::PositiveNumber);
    app->add_option("--gamma", o.gamma, "RBF gamma")->check(CLI::PositiveNumber);
  }
  app->add_option("--degree", o.degree, "Polynomial degree")->check(CLI::PositiveNumber);
  app->add_option("--coef0", o.coef0, "Polynomial coef0");
  app->add_option("--tol", o.tol, "KKT violation tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-passes", o.max_passes, "SMO sweep limit (0 = 10 * n)")->check(CLI::NonNegativeNumber);
}

void add_common_flags(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "Random seed for splits and SMO tie-breaks");
  app->add_option("--threads", o.threads, "Worker threads (0 = machine parallelism)");
}

PhogParams phog_params(const Options& o) {
  PhogParams p;
  p.levels = o.levels;
  p.bins = o.bins;
  p.angle_range = o.angle;
  p.edge_threshold = o.edge_thresh;
  p.grad_source = o.grad_source == "laplacian" ? GradientSource::Laplacian : GradientSource::Image;
  p.stencil = o.stencil == 8 ? LaplacianStencil::EightConnected : LaplacianStencil::FourConnected;
  p.normalize = !o.no_normalize;
  p.validate();
  return p;
}

Preprocess preprocess(const Options& o) {
  Preprocess pre;
  const auto x = o.resample.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("missing 'x'");
    std::size_t used = 0;
    pre.resample_width = std::stol(o.resample.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("width");
    const std::string hs = o.resample.substr(x + 1);
    pre.resample_height = std::stol(hs, &used);
    if (used != hs.size()) throw std::invalid_argument("height");
  } catch (const std::exception&) {
    throw InvalidArgument("--resample: expected WxH, got '" + o.resample + "'");
  }
  pre.sigma = o.sigma;
  pre.validate();
  return pre;
}

KernelSpec kernel_spec(KernelKind kind, const Options& o) {
  KernelSpec k;
  k.kind = kind;
  k.gamma = o.gamma;
  k.degree = o.degree;
  k.coef0 = o.coef0;
  k.validate();
  return k;
}

TrainConfig train_config(const Options& o) {
  TrainConfig cfg;
  cfg.C = o.C;
  cfg.tol = o.tol;
  cfg.max_passes = o.max_passes;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

std::vector<KernelKind> kernel_list(const std::string& text) {
  std::vector<KernelKind> kinds;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      kinds.push_back(parse_kernel_kind(item));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("--kernel: ") + e.what());
    }
  }
  if (kinds.empty()) throw InvalidArgument("--kernel: no kernel given");
  return kinds;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

int cmd_extract(const Options& o, std::ostream& out) {
  if (o.features.size() > 1) throw InvalidArgument("extract: give a single output path");
  const std::string target = !o.out.empty() ? o.out : (o.features.empty() ? "" : o.features.front());
  if (target.empty()) throw InvalidArgument("extract: --out (or --features) is required");
  bool hit = false;
  const FeatureSet fs = extract_features_cached(o.manifest, phog_params(o), preprocess(o), target, o.threads, &hit);
  out << (hit ? "reused " : "wrote ") << target << ": " << fs.size() << " samples, descriptor length "
      << fs.X.cols() << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  if (o.features.size() != 1) throw InvalidArgument("train: exactly one --features file is required");
  const FeatureSet fs = load_features(o.features.front());
  const SvmModel m = train_smo(fs.X, fs.y, kernel_spec(parse_kernel_kind(o.kernel), o), train_config(o));
  save_model(m, o.model);
  out << "trained " << to_string(m.kernel.kind) << " SVM on " << fs.size() << " samples: "
      << m.support_vectors.rows() << " support vectors, bias " << format_double(m.bias)
      << (m.converged ? "" : " (warning: sweep limit reached before convergence)") << '\n';
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const SvmModel m = load_model(o.model);
  const PhogParams p = phog_params(o);
  const Preprocess pre = preprocess(o);
  const Eigen::Index dim = descriptor_length(p.levels, p.bins);
  if (dim != m.feature_dim) {
    throw DimensionMismatch("model '" + o.model + "' expects " + std::to_string(m.feature_dim) +
                            " features but --levels " + std::to_string(p.levels) + " --bins " +
                            std::to_string(p.bins) + " produce " + std::to_string(dim));
  }
  std::vector<std::pair<std::string, std::filesystem::path>> items;
  if (!o.manifest.empty()) {
    for (const auto& s : load_manifest(o.manifest).samples) items.emplace_back(s.id, s.path);
  }
  for (const auto& img : o.images) items.emplace_back(img, img);
  if (items.empty()) throw InvalidArgument("predict: give image paths or --manifest");
  for (const auto& [id, path] : items) {
    const auto desc = phog_descriptor(preprocess_image(load_image(path), pre), p);
    const double f = decision_value(m, desc.values);
    out << id << '\t' << gender_name(label_from_decision(f)) << '\t' << format_double(f) << '\n';
  }
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.features.size() != 1) throw InvalidArgument("evaluate: exactly one --features file is required");
  const SvmModel m = load_model(o.model);
  const FeatureSet fs = load_features(o.features.front());
  if (fs.X.cols() != m.feature_dim) {
    throw DimensionMismatch("model '" + o.model + "' expects " + std::to_string(m.feature_dim) +
                            " features, feature file has " + std::to_string(fs.X.cols()));
  }
  const EvalReport r = recognition_rate(predict(m, fs.X), fs.y);
  write_eval_report(out, r);
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_eval_report(f, r);
  }
  return 0;
}

int cmd_grid_search(const Options& o, std::ostream& out) {
  std::vector<FeatureSet> sets;
  if (!o.manifest.empty()) {
    if (o.features.size() != 1) throw InvalidArgument("grid-search: --manifest needs exactly one --features cache path");
    sets.push_back(extract_features_cached(o.manifest, phog_params(o), preprocess(o), o.features.front(), o.threads));
  } else {
    if (o.features.empty()) throw InvalidArgument("grid-search: --features is required");
    for (const auto& f : o.features) sets.push_back(load_features(f));
  }
  const auto kinds = kernel_list(o.kernel);
  if (!o.model.empty() && (sets.size() != 1 || kinds.size() != 1)) {
    throw InvalidArgument("grid-search: --model needs a single feature file and a single kernel");
  }
  if (o.repeats < 1) throw InvalidArgument("--repeats must be at least 1");
  if (o.folds < 2) throw InvalidArgument("--folds must be at least 2");

  std::ofstream csv;
  if (!o.out.empty()) csv = open_out(o.out);
  std::vector<SummaryRow> summary;
  for (const auto& fs : sets) {
    for (const KernelKind kind : kinds) {
      ExperimentOptions opt;
      opt.grid = GridSpec::power_of_two(kind);
      opt.grid.degree = o.degree;
      opt.grid.coef0 = o.coef0;
      opt.train = train_config(o);
      opt.folds = o.folds;
      opt.repeats = o.repeats;
      opt.paper_protocol = o.paper_protocol;
      opt.seed = o.seed;
      opt.threads = o.threads;
      const ExperimentReport rep = run_experiment(fs, opt);

      out << "== L=" << fs.phog.levels << " H=" << fs.phog.bins << " kernel " << to_string(kind)
          << (o.paper_protocol ? " (cells scored on the test half)" : " (cells scored by cross-validation)") << '\n';
      for (const auto& run : rep.runs) {
        out << "-- split seed " << run.split_seed << '\n';
        write_grid_table(out, run.grid);
        out << "test: ";
        write_eval_report(out, run.test);
        if (csv.is_open()) {
          csv << "# L=" << fs.phog.levels << " H=" << fs.phog.bins << " kernel=" << to_string(kind)
              << " split_seed=" << run.split_seed << '\n';
          write_grid_csv(csv, run.grid);
        }
      }
      const GridCell& best = rep.runs.front().grid.best_cell();
      summary.push_back({fs.phog, kind, rep.mean_rate, rep.stddev_rate, best.C, best.gamma});
      if (!o.model.empty()) save_model(rep.runs.front().model, o.model);
    }
  }
  out << "== summary\n";
  write_summary_table(out, summary);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Laplacian-PHOG descriptors and soft-margin kernel SVM classification", "phogsvm"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "Compute descriptors for a manifest into a feature file");
  extract->add_option("--manifest", o.manifest, "CSV manifest id,path,label")->required();
  extract->add_option("--out,--features", o.out, "Feature file to write (reused when parameters match)");
  add_descriptor_flags(extract, o);
  add_common_flags(extract, o);

  auto* train = app.add_subcommand("train", "Train an SVM from a feature file");
  train->add_option("--features", o.features, "Feature file")->required();
  train->add_option("--model", o.model, "Model file to write")->required();
  add_svm_flags(train, o, false);
  add_common_flags(train, o);

  auto* predict_cmd = app.add_subcommand("predict", "Classify images with a trained model");
  predict_cmd->add_option("--model", o.model, "Model file")->required();
  predict_cmd->add_option("--manifest", o.manifest, "CSV manifest of images to classify");
  predict_cmd->add_option("images", o.images, "Image files (PGM or PNG)");
  add_descriptor_flags(predict_cmd, o);
  add_common_flags(predict_cmd, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labeled feature file");
  evaluate->add_option("--model", o.model, "Model file")->required();
  evaluate->add_option("--features", o.features, "Feature file")->required();
  evaluate->add_option("--out", o.out, "Also write the report to this file");
  add_common_flags(evaluate, o);

  auto* grid = app.add_subcommand("grid-search", "Sweep C (and gamma) over the power-of-two grid");
  grid->add_option("--features", o.features, "Feature file(s); with --manifest, the cache path")->required();
  grid->add_option("--manifest", o.manifest, "Extract (or reuse cached) features from this manifest first");
  grid->add_option("--out", o.out, "Per-cell CSV: C,gamma,mean_rate,fold_rates...");
  grid->add_option("--model", o.model, "Write the selected model here");
  grid->add_option("--folds", o.folds, "Cross-validation folds inside the training half");
  grid->add_option("--repeats", o.repeats, "Independent random 2-fold splits to average over");
  grid->add_flag("--paper-protocol", o.paper_protocol, "Score cells on the held-out half directly");
  add_descriptor_flags(grid, o);
  add_svm_flags(grid, o, true);
  add_common_flags(grid, o);

  auto* selftest = app.add_subcommand("selftest", "Run the built-in analytic example suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return cmd_extract(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (grid->parsed()) return cmd_grid_search(o, out);
    if (selftest->parsed()) return run_selftest(out) == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace phogsvm::cli
