// Acceptance gate: runs each criterion, prints one PASS/FAIL line per
// criterion and exits non-zero if any failed.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phogsvm/cli.hpp"
#include "phogsvm/imaging.hpp"
#include "phogsvm/phog.hpp"
#include "phogsvm/pipeline.hpp"
#include "phogsvm/svm.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace phogsvm;

namespace {

// Collects failed expectations with a short reason.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  bool ok() const { return failed_ == 0; }
  std::string detail() const {
    std::string s = std::to_string(failed_) + " failed check(s)";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }
  std::string note;

 private:
  int failed_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  const char* name;
  const char* title;
  double limit_seconds;  // 0 = no runtime bound
  std::function<void(Checker&)> body;
};

PhogParams params(int L, int H, double t = 0.1) {
  PhogParams p;
  p.levels = L;
  p.bins = H;
  p.edge_threshold = t;
  return p;
}

GrayImage step_edge() {
  GrayImage img = GrayImage::Zero(16, 16);
  img.rightCols(8).setOnes();
  return img;
}

GrayImage dyadic_image(std::mt19937_64& rng, long w, long h) {
  std::uniform_int_distribution<int> level(0, 255);
  GrayImage img(h, w);
  for (long i = 0; i < img.size(); ++i) img.data()[i] = level(rng) / 256.0;
  return img;
}

double max_abs(const Eigen::MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

void feature_lengths(Checker& c) {
  const int table[][3] = {{2, 8, 168}, {2, 16, 336}, {3, 8, 680}, {3, 16, 1360}};
  const GrayImage img = step_edge();
  for (const auto& r : table) {
    c.expect(descriptor_length(r[0], r[1]) == r[2], "descriptor_length(" + std::to_string(r[0]) + "," +
                                                        std::to_string(r[1]) + ")");
    c.expect(phog_descriptor(img, params(r[0], r[1])).values.size() == r[2],
             "phog_descriptor length for L=" + std::to_string(r[0]) + " H=" + std::to_string(r[1]));
  }
  c.note = "168/336/680/1360";
}

void phog_oracle(Checker& c) {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> t(0.0, 0.5);
  const int bins[] = {8, 16};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const GrayImage img = oracle::random_image(rng, 16, 16);
    PhogParams p = params(trial % 4 == 0 ? 2 : 3, bins[trial % 2], t(rng));
    if (trial % 3 == 0) p.angle_range = 180.0;
    const Eigen::VectorXd got = phog_descriptor(img, p).values;
    const Eigen::VectorXd ref = oracle::phog(img, p);
    if (got.size() != ref.size()) {
      c.expect(false, "length mismatch");
      continue;
    }
    worst = std::max(worst, max_abs(got - ref));
  }
  for (const int L : {0, 1, 2}) {
    PhogParams p = params(L, 8, 0.0);
    worst = std::max(worst, max_abs(phog_descriptor(step_edge(), p).values - oracle::phog(step_edge(), p)));
  }
  c.expect(worst <= 1e-10, "max deviation " + std::to_string(worst));
  std::ostringstream s;
  s << "max |diff| " << worst;
  c.note = s.str();
}

void invariances(Checker& c) {
  std::mt19937_64 rng(77);
  double worst_scale = 0.0, worst_sum = 0.0, worst_level = 0.0;
  int shift_mismatch = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const PhogParams p = params(3, trial % 2 ? 16 : 8);
    const GrayImage dy = dyadic_image(rng, 32, 32);
    const Eigen::VectorXd a = phog_descriptor(dy, p).values;
    for (const double shift : {0.375, -0.125, 3.0}) {
      shift_mismatch += !(phog_descriptor(GrayImage(dy.array() + shift), p).values == a);
    }
    const GrayImage img = oracle::random_image(rng, 40, 28);
    const Eigen::VectorXd b = phog_descriptor(img, p).values;
    for (const double s : {0.05, 0.5, 2.0, 100.0}) {
      worst_scale = std::max(worst_scale, max_abs(phog_descriptor(GrayImage(s * img), p).values - b));
    }
    worst_sum = std::max(worst_sum, std::abs(b.sum() - 1.0));
    Eigen::Index offset = 0;
    for (int l = 0; l <= p.levels; ++l) {
      const Eigen::Index len = (Eigen::Index{1} << (2 * l)) * p.bins;
      worst_level = std::max(worst_level, std::abs(b.segment(offset, len).sum() - 1.0 / (p.levels + 1)));
      offset += len;
    }
  }
  c.expect(shift_mismatch == 0, std::to_string(shift_mismatch) + " shifted descriptors differ");
  c.expect(worst_scale <= 1e-9, "scale deviation " + std::to_string(worst_scale));
  c.expect(worst_sum <= 1e-9, "sum deviation " + std::to_string(worst_sum));
  c.expect(worst_level <= 1e-9, "level mass deviation " + std::to_string(worst_level));
  std::ostringstream s;
  s << "shift exact, scale " << worst_scale << ", sum " << worst_sum << ", level mass " << worst_level;
  c.note = s.str();
}

void filter_identities(Checker& c) {
  std::mt19937_64 rng(5);
  double dc = 0.0, affine = 0.0, sep = 0.0;
  for (const double sigma : {0.5, 1.0, 1.7, 3.0}) {
    const GrayImage flat = GrayImage::Constant(23, 31, 0.6180339887);
    dc = std::max(dc, max_abs(GrayImage(gaussian_smooth(flat, sigma).array() - 0.6180339887)));
    const GrayImage img = oracle::random_image(rng, 29, 21);
    sep = std::max(sep, max_abs(gaussian_smooth(img, sigma) - oracle::gaussian_direct(img, sigma)));
  }
  for (const auto& [w, h] : {std::pair{64L, 64L}, {300L, 300L}, {17L, 40L}, {7L, 5L}}) {
    const GrayImage flat = GrayImage::Constant(37, 23, 0.41);
    dc = std::max(dc, max_abs(GrayImage(resample_bicubic(flat, w, h).array() - 0.41)));
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(rng), b = u(rng), k = u(rng);
    GrayImage img(20, 24);
    for (long y = 0; y < img.rows(); ++y)
      for (long x = 0; x < img.cols(); ++x) img(y, x) = a * x + b * y + k;
    for (const auto stencil : {LaplacianStencil::FourConnected, LaplacianStencil::EightConnected}) {
      const GrayImage lap = laplacian(img, stencil);
      affine = std::max(affine, max_abs(lap.block(1, 1, img.rows() - 2, img.cols() - 2)));
    }
  }
  c.expect(dc <= 1e-12, "DC deviation " + std::to_string(dc));
  c.expect(affine <= 1e-12, "Laplacian of affine " + std::to_string(affine));
  c.expect(sep <= 1e-10, "separable vs direct " + std::to_string(sep));
  std::ostringstream s;
  s << "DC " << dc << ", affine " << affine << ", separable " << sep;
  c.note = s.str();
}

void svm_oracle(Checker& c) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double Cs[] = {0.1, 1.0, 10.0, 100.0};
  double worst_gap = 0.0, worst_eq = 0.0;
  int kkt_fail = 0, box_fail = 0, unconverged = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + int(rng() % 7);
    FeatureMatrix X(n, 2);
    LabelVector y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = u(rng);
      X(i, 1) = u(rng);
      y(i) = u(rng) > 0 ? 1 : -1;
    }
    y(0) = 1;
    y(n - 1) = -1;
    KernelSpec k = trial % 3 == 0   ? KernelSpec::linear()
                   : trial % 3 == 1 ? KernelSpec::polynomial(2 + trial % 2, 1.0)
                                    : KernelSpec::rbf(std::ldexp(1.0, int(rng() % 5) - 1));
    TrainConfig cfg;
    cfg.C = Cs[rng() % 4];
    cfg.tol = 1e-3;
    cfg.seed = std::uint64_t(trial);
    const Eigen::MatrixXd K = gram_matrix(k, X);
    const DualSolution sol = solve_dual_smo(K, y, cfg);
    const auto best = oracle::dual_max(K, y, cfg.C);
    worst_gap = std::max(worst_gap, best.value - dual_objective(sol.alpha, y, K));
    worst_eq = std::max(worst_eq, std::abs(sol.alpha.dot(y.cast<double>())));
    box_fail += sol.alpha.minCoeff() < -1e-9 || sol.alpha.maxCoeff() > cfg.C + 1e-9;
    kkt_fail += !check_kkt(sol.alpha, sol.bias, y, K, cfg.C, cfg.tol).satisfied;
    unconverged += !sol.converged;
  }
  c.expect(worst_gap <= 1e-6, "objective gap " + std::to_string(worst_gap));
  c.expect(kkt_fail == 0, std::to_string(kkt_fail) + " KKT failures");
  c.expect(box_fail == 0, std::to_string(box_fail) + " box violations");
  c.expect(worst_eq <= 1e-6, "equality residual " + std::to_string(worst_eq));
  c.expect(unconverged == 0, std::to_string(unconverged) + " unconverged");
  std::ostringstream s;
  s << "worst objective gap " << worst_gap;
  c.note = s.str();
}

void closed_form(Checker& c) {
  FeatureMatrix X(2, 1);
  X << 0.0, 2.0;
  LabelVector y(2);
  y << 1, -1;
  TrainConfig cfg;
  cfg.C = 10.0;
  const DualSolution sol = solve_dual_smo(gram_matrix(KernelSpec::linear(), X), y, cfg);
  c.expect(std::abs(sol.alpha(0) - 0.5) <= 1e-6 && std::abs(sol.alpha(1) - 0.5) <= 1e-6, "alpha != (0.5,0.5)");
  c.expect(std::abs(sol.bias - 1.0) <= 1e-6, "bias != 1");
  const SvmModel m = train_smo(X, y, KernelSpec::linear(), cfg);
  // Linear in x, so the root is where f crosses zero between the two samples.
  const double f0 = decision_value(m, Eigen::VectorXd::Constant(1, 0.0));
  const double f2 = decision_value(m, Eigen::VectorXd::Constant(1, 2.0));
  const double boundary = 2.0 * f0 / (f0 - f2);
  c.expect(std::abs(boundary - 1.0) <= 1e-6, "boundary at " + std::to_string(boundary));

  FeatureMatrix Xx(4, 2);
  Xx << 0, 0, 1, 1, 0, 1, 1, 0;
  LabelVector yx(4);
  yx << 1, 1, -1, -1;
  TrainConfig xcfg;
  xcfg.C = 100.0;
  const SvmModel xm = train_smo(Xx, yx, KernelSpec::rbf(1.0), xcfg);
  c.expect(predict(xm, Xx) == yx, "XOR training accuracy below 100%");
  std::ostringstream s;
  s << "alpha (" << sol.alpha(0) << ", " << sol.alpha(1) << "), b " << sol.bias << ", boundary " << boundary
    << ", XOR 4/4";
  c.note = s.str();
}

void synthetic_benchmark(Checker& c) {
  TempDir dir;
  const auto manifest = synthetic::write_dataset(dir.path(), 200, 2024);
  const FeatureSet fs = extract_features(load_manifest(manifest), PhogParams{}, Preprocess{});
  ExperimentOptions opt;
  opt.grid = GridSpec::power_of_two(KernelKind::Rbf);
  opt.seed = 1;
  const ExperimentReport rep = run_experiment(fs, opt);
  const auto& run = rep.runs.front();
  c.expect(fs.X.cols() == 1360, "descriptor length");
  c.expect(run.grid.cells.size() == 336, "grid size");
  c.expect(run.test.recognition_rate >= 0.95, "test rate " + std::to_string(run.test.recognition_rate));
  std::ostringstream s;
  s << "test rate " << run.test.recognition_rate << " (" << run.test.tp + run.test.tn << "/" << run.test.total()
    << "), best C " << format_param(run.grid.best_cell().C) << " gamma " << format_param(*run.grid.best_cell().gamma);
  c.note = s.str();
}

void protocol(Checker& c) {
  const GridSpec g = GridSpec::power_of_two(KernelKind::Rbf);
  bool dims = g.C_values.size() == 16 && g.gamma_values.size() == 21;
  for (std::size_t i = 0; dims && i < g.C_values.size(); ++i) dims = g.C_values[i] == std::ldexp(1.0, int(i) - 5);
  for (std::size_t i = 0; dims && i < g.gamma_values.size(); ++i) {
    dims = g.gamma_values[i] == std::ldexp(1.0, int(i) - 10);
  }
  c.expect(dims, "grid is not 2^-5..2^10 x 2^-10..2^10");

  TempDir dir;
  const auto manifest = synthetic::write_dataset(dir.path(), 16, 99);
  const Dataset d = load_manifest(manifest);
  Preprocess pre;
  pre.resample_width = 96;
  pre.resample_height = 96;
  std::vector<std::string> args = {"phogsvm", "grid-search", "--paper-protocol", "--kernel", "linear,poly,rbf",
                                   "--seed", "3", "--threads", "1"};
  for (const auto& [L, H] : {std::pair{2, 8}, {2, 16}, {3, 8}, {3, 16}}) {
    const auto path = dir / ("f" + std::to_string(L) + "_" + std::to_string(H) + ".txt");
    save_features(extract_features(d, params(L, H), pre, 1), path);
    args.push_back("--features");
    args.push_back(path.string());
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::string reports[2];
  for (auto& report : reports) {
    std::ostringstream out, err;
    const int code = cli::run(int(argv.size()), argv.data(), out, err);
    c.expect(code == 0, "grid-search exit " + std::to_string(code) + ": " + err.str());
    report = out.str();
  }
  c.expect(reports[0] == reports[1], "reports differ between runs");
  const auto summary = reports[0].substr(reports[0].find("== summary"));
  int rows = 0;
  for (const char* len : {"168", "336", "680", "1360"}) {
    for (const char* kernel : {"linear", "polynomial", "rbf"}) {
      std::istringstream lines(summary);
      std::string line;
      while (std::getline(lines, line)) {
        rows += line.find(std::string(" ") + len + " ") != std::string::npos && line.find(kernel) != std::string::npos;
      }
    }
  }
  c.expect(rows == 12, "summary has " + std::to_string(rows) + " of 12 kernel x (L,H) rows");
  c.note = "16 x 21 grid, 12-row summary, " + std::to_string(reports[0].size()) + " identical bytes";
  std::cout << summary;
}

void recognition_exactness(Checker& c) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + int(rng() % 200);
    LabelVector p(n), t(n);
    long tp = 0, tn = 0, fp = 0, fn = 0;
    for (int i = 0; i < n; ++i) {
      p(i) = rng() % 2 ? 1 : -1;
      t(i) = rng() % 3 ? 1 : -1;
      if (p(i) == 1 && t(i) == 1) ++tp;
      if (p(i) == -1 && t(i) == -1) ++tn;
      if (p(i) == 1 && t(i) == -1) ++fp;
      if (p(i) == -1 && t(i) == 1) ++fn;
    }
    const EvalReport r = recognition_rate(p, t);
    c.expect(r.tp == tp && r.tn == tn && r.fp == fp && r.fn == fn, "confusion counts");
    c.expect(r.recognition_rate == double(tp + tn) / double(n), "rate arithmetic");
  }
  c.note = "20 pairs";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "feature lengths", 1.0, feature_lengths},
      {"AC2", "PHOG matches brute-force accumulator", 10.0, phog_oracle},
      {"AC3", "descriptor invariances", 0.0, invariances},
      {"AC4", "filter identities", 0.0, filter_identities},
      {"AC5", "SMO reaches brute-force dual optimum", 30.0, svm_oracle},
      {"AC6", "closed-form two-point and XOR", 0.0, closed_form},
      {"AC7", "synthetic end-to-end benchmark", 300.0, synthetic_benchmark},
      {"AC8", "grid protocol and reproducible report", 0.0, protocol},
      {"AC9", "recognition rate arithmetic", 0.0, recognition_exactness},
  };
  int failed = 0;
  std::vector<std::string> lines;
  for (const auto& cr : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.limit_seconds > 0 && seconds >= cr.limit_seconds) {
      c.expect(false, "took " + std::to_string(seconds) + " s, limit " + std::to_string(cr.limit_seconds) + " s");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f s", seconds);
    const std::string line = std::string(cr.name) + " " + (c.ok() ? "PASS" : "FAIL") + "  " + cr.title + "  [" +
                             buf + "]  " + (c.ok() ? c.note : c.detail());
    std::cout << line << std::endl;
    lines.push_back(line);
    failed += !c.ok();
  }
  std::cout << "\n== acceptance summary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed\n" : "all criteria passed\n");
  return failed ? 1 : 0;
}
