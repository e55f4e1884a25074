#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "phogsvm/cli.hpp"
#include "phogsvm/image_io.hpp"
#include "phogsvm/imaging.hpp"
#include "phogsvm/phog.hpp"
#include "phogsvm/pipeline.hpp"
#include "phogsvm/svm.hpp"

namespace phogsvm::cli {
namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success, else a diagnostic
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string expect(bool ok, const std::string& what) { return ok ? std::string() : what; }

FeatureMatrix rows(std::initializer_list<std::initializer_list<double>> data) {
  FeatureMatrix X(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : data) {
    Eigen::Index j = 0;
    for (const double v : r) X(i, j++) = v;
    ++i;
  }
  return X;
}

std::vector<Check> checks() {
  std::vector<Check> c;
  c.push_back({"descriptor lengths 168/336/680/1360", [] {
                 return expect(descriptor_length(2, 8) == 168 && descriptor_length(2, 16) == 336 &&
                                   descriptor_length(3, 8) == 680 && descriptor_length(3, 16) == 1360 &&
                                   descriptor_length(0, 8) == 8,
                               "unexpected length");
               }});
  c.push_back({"PGM P2 decode scales by maxval", [] {
                 const auto path = std::filesystem::temp_directory_path() / "phogsvm_selftest.pgm";
                 {
                   std::ofstream f(path);
                   f << "P2\n2 2\n255\n0 255\n255 0\n";
                 }
                 const GrayImage img = load_image(path);
                 std::filesystem::remove(path);
                 return expect(img.rows() == 2 && img.cols() == 2 && img(0, 0) == 0.0 && img(0, 1) == 1.0 &&
                                   img(1, 0) == 1.0 && img(1, 1) == 0.0,
                               "pixels differ from {0,1,1,0}");
               }});
  c.push_back({"Gaussian sigma 1 has radius 3", [] {
                 return expect(gaussian_taps(1.0).size() == 7 && near(gaussian_taps(1.0).sum(), 1.0, 1e-15),
                               "wrong support or unnormalized");
               }});
  c.push_back({"constant image survives smoothing and resampling", [] {
                 const GrayImage img = GrayImage::Constant(9, 7, 0.3);
                 const GrayImage s = gaussian_smooth(img, 1.0);
                 const GrayImage r = resample_bicubic(img, 20, 13);
                 return expect((s.array() - 0.3).abs().maxCoeff() < 1e-12 && (r.array() - 0.3).abs().maxCoeff() < 1e-12,
                               "DC gain differs from 1");
               }});
  c.push_back({"Laplacian of an impulse", [] {
                 GrayImage img = GrayImage::Zero(5, 5);
                 img(2, 2) = 1.0;
                 const GrayImage l = laplacian(img);
                 return expect(l(2, 2) == -4.0 && l(1, 2) == 1.0 && l(3, 2) == 1.0 && l(2, 1) == 1.0 && l(2, 3) == 1.0 &&
                                   l(1, 1) == 0.0,
                               "stencil not imprinted");
               }});
  c.push_back({"Sobel across a vertical step", [] {
                 GrayImage img = GrayImage::Zero(8, 8);
                 img.rightCols(4).setOnes();
                 const auto g = sobel_gradients(img);
                 return expect(g.gx(4, 3) == 4.0 && g.gx(4, 4) == 4.0 && g.gx(4, 1) == 0.0 && g.gy(4, 3) == 0.0,
                               "unexpected gradient");
               }});
  c.push_back({"orientation binning", [] {
                 return expect(map_orientation_to_bin(0.0, 360.0, 8) == 0 && map_orientation_to_bin(90.0, 360.0, 8) == 2 &&
                                   map_orientation_to_bin(359.9, 360.0, 8) == 7 &&
                                   orientation_degrees(-1.0, 0.0, 180.0) == 0.0 &&
                                   orientation_degrees(0.0, 1.0, 360.0) == 90.0,
                               "wrong bin or angle");
               }});
  c.push_back({"edge mask threshold arithmetic", [] {
                 GrayImage lap = GrayImage::Zero(3, 3);
                 lap(1, 1) = -4.0;
                 lap(0, 1) = lap(2, 1) = lap(1, 0) = lap(1, 2) = 1.0;
                 const EdgeMask m = edge_mask(lap, 0.5);
                 return expect(m.count() == 1 && m(1, 1), "mask should flag only the centre");
               }});
  c.push_back({"PHOG of a constant image is zero", [] {
                 PhogParams p;
                 p.levels = 2;
                 p.bins = 8;
                 const auto d = phog_descriptor(GrayImage::Constant(16, 16, 0.5), p);
                 return expect(d.values.size() == 168 && d.values.isZero(0.0), "non-zero descriptor");
               }});
  c.push_back({"kernel values", [] {
                 const Eigen::Vector2d a(1, 2), b(3, 4), e(1, 0);
                 return expect(kernel_eval(KernelSpec::linear(), a, b) == 11.0 &&
                                   kernel_eval(KernelSpec::rbf(0.7), a, a) == 1.0 &&
                                   kernel_eval(KernelSpec::polynomial(2, 1.0), e, e) == 4.0,
                               "kernel mismatch");
               }});
  c.push_back({"two-point SVM closed form", [] {
                 const FeatureMatrix X = rows({{0.0}, {2.0}});
                 LabelVector y(2);
                 y << 1, -1;
                 TrainConfig cfg;
                 cfg.C = 10.0;
                 const SvmModel m = train_smo(X, y, KernelSpec::linear(), cfg);
                 Eigen::VectorXd one(1), zero(1);
                 one << 1.0;
                 zero << 0.0;
                 return expect(m.coefficients.size() == 2 && near(std::abs(m.coefficients(0)), 0.5, 1e-6) &&
                                   near(m.bias, 1.0, 1e-6) && near(decision_value(m, one), 0.0, 1e-6) &&
                                   near(decision_value(m, zero), 1.0, 1e-6),
                               "alpha, bias or boundary wrong");
               }});
  c.push_back({"XOR with rbf kernel", [] {
                 const FeatureMatrix X = rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
                 LabelVector y(4);
                 y << 1, 1, -1, -1;
                 TrainConfig cfg;
                 cfg.C = 100.0;
                 const SvmModel m = train_smo(X, y, KernelSpec::rbf(1.0), cfg);
                 return expect(predict(m, X) == y, "training point misclassified");
               }});
  c.push_back({"dual objective", [] {
                 const FeatureMatrix X = rows({{0.0}, {2.0}});
                 LabelVector y(2);
                 y << 1, -1;
                 return expect(near(dual_objective(Eigen::Vector2d(0.5, 0.5), y, X, KernelSpec::linear()), 0.5, 1e-15) &&
                                   dual_objective(Eigen::Vector2d(0, 0), y, X, KernelSpec::linear()) == 0.0,
                               "objective mismatch");
               }});
  c.push_back({"recognition rate arithmetic", [] {
                 LabelVector pred(10), truth(10);
                 truth << 1, 1, 1, 1, 1, -1, -1, -1, 1, -1;
                 pred << 1, 1, 1, 1, 1, -1, -1, -1, -1, 1;
                 const EvalReport r = recognition_rate(pred, truth);
                 return expect(r.tp == 5 && r.tn == 3 && r.fn == 1 && r.fp == 1 && r.recognition_rate == 0.8,
                               "confusion counts wrong");
               }});
  c.push_back({"stratified split gives the odd sample to train", [] {
                 LabelVector y(9);
                 y << 1, 1, 1, 1, 1, -1, -1, -1, -1;
                 const Split s = stratified_split_indices(y, 7);
                 long male_train = 0;
                 for (const auto i : s.train) male_train += y(i) > 0 ? 1 : 0;
                 return expect(s.train.size() == 5 && s.test.size() == 4 && male_train == 3, "wrong split sizes");
               }});
  c.push_back({"model file round trip", [] {
                 SvmModel m;
                 m.kernel = KernelSpec::rbf(1024.0);
                 m.feature_dim = 2;
                 m.bias = 0.1;
                 m.support_vectors = rows({{0.1, 1.0 / 3.0}, {-2.5e-300, 7.0}});
                 m.coefficients = Eigen::Vector2d(0.3, -0.3);
                 const auto path = std::filesystem::temp_directory_path() / "phogsvm_selftest.model";
                 save_model(m, path);
                 const SvmModel back = load_model(path);
                 std::filesystem::remove(path);
                 return expect(back.kernel == m.kernel && back.bias == m.bias && back.support_vectors == m.support_vectors &&
                                   back.coefficients == m.coefficients,
                               "fields changed");
               }});
  return c;
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  for (const auto& check : checks()) {
    std::string diag;
    try {
      diag = check.run();
    } catch (const std::exception& e) {
      diag = std::string("threw: ") + e.what();
    }
    if (diag.empty()) {
      out << "PASS " << check.name << '\n';
    } else {
      out << "FAIL " << check.name << ": " << diag << '\n';
      ++failures;
    }
  }
  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << " (" << failures << " failures)\n";
  return failures;
}

}  // namespace phogsvm::cli
