#include "phogsvm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "phogsvm/image_io.hpp"
#include "phogsvm/imaging.hpp"

namespace phogsvm {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

std::mt19937_64 seeded(std::uint64_t seed) { return std::mt19937_64(seed); }

// Portable Fisher-Yates; std::shuffle's sequence is implementation-defined.
void shuffle(std::vector<Eigen::Index>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> class_indices(const LabelVector& y) {
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1) {
      pos.push_back(i);
    } else if (y(i) == -1) {
      neg.push_back(i);
    } else {
      throw InvalidArgument("label " + std::to_string(y(i)) + " at row " + std::to_string(i) + " is not +1 or -1");
    }
  }
  return {pos, neg};
}

}  // namespace

std::optional<int> parse_gender_label(std::string_view text) {
  const std::string l = lower(trim(text));
  if (l == "male") return 1;
  if (l == "female") return -1;
  return std::nullopt;
}

std::string_view gender_name(int label) { return label > 0 ? "male" : "female"; }

Dataset load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  const std::filesystem::path base = path.parent_path();
  auto fail = [&path](int line, const std::string& why) -> ManifestError {
    return ManifestError("manifest '" + path.string() + "' line " + std::to_string(line) + ": " + why);
  };

  Dataset d;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields.size() != 3 || lower(fields[0]) != "id" || lower(fields[1]) != "path" || lower(fields[2]) != "label") {
        throw fail(line_no, "expected header 'id,path,label'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw fail(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw fail(line_no, "missing id");
    if (fields[1].empty()) throw fail(line_no, "missing path for id '" + fields[0] + "'");
    const auto label = parse_gender_label(fields[2]);
    if (!label) throw fail(line_no, "bad label '" + fields[2] + "' for id '" + fields[0] + "' (expected male or female)");
    if (const auto it = seen.find(fields[0]); it != seen.end()) {
      throw fail(line_no, "duplicate id '" + fields[0] + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    seen.emplace(fields[0], line_no);
    std::filesystem::path p(fields[1]);
    if (p.is_relative()) p = base / p;
    d.samples.push_back({fields[0], p, *label});
  }
  if (!header_seen) throw fail(line_no, "empty manifest");
  return d;
}

void Preprocess::validate() const {
  if (resample_width < 1 || resample_height < 1) throw InvalidArgument("resample size must be at least 1x1");
  if (!(sigma > 0.0 && std::isfinite(sigma))) throw InvalidArgument("sigma must be positive");
}

GrayImage preprocess_image(const GrayImage& img, const Preprocess& pre) {
  pre.validate();
  return gaussian_smooth(resample_bicubic(img, pre.resample_width, pre.resample_height), pre.sigma);
}

FeatureSet FeatureSet::subset(const std::vector<Eigen::Index>& idx) const {
  FeatureSet s;
  s.ids.reserve(idx.size());
  for (const auto i : idx) s.ids.push_back(ids.at(static_cast<std::size_t>(i)));
  s.X = X(idx, Eigen::all);
  s.y = y(idx);
  s.phog = phog;
  s.preproc = preproc;
  return s;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

template <typename E>
[[noreturn]] void rethrow_tagged(const E& e, const std::string& id) {
  throw E("sample '" + id + "': " + e.what());
}

}  // namespace

FeatureSet extract_features(const Dataset& d, const PhogParams& p, const Preprocess& pre, unsigned threads) {
  p.validate();
  pre.validate();
  const auto n = static_cast<Eigen::Index>(d.samples.size());
  FeatureSet fs;
  fs.phog = p;
  fs.preproc = pre;
  fs.X.resize(n, descriptor_length(p.levels, p.bins));
  fs.y.resize(n);
  for (const auto& s : d.samples) fs.ids.push_back(s.id);

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const Sample& s = d.samples[i];
    const auto row = static_cast<Eigen::Index>(i);
    try {
      fs.X.row(row) = phog_descriptor(preprocess_image(load_image(s.path), pre), p).values.transpose();
    } catch (const IoError& e) {
      rethrow_tagged(e, s.id);
    } catch (const FormatError& e) {
      rethrow_tagged(e, s.id);
    } catch (const ImageTooSmall& e) {
      rethrow_tagged(e, s.id);
    } catch (const ValidationError& e) {
      throw ValidationError("sample '" + s.id + "': " + e.what());
    }
    fs.y(row) = s.label;
  });
  return fs;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

constexpr std::string_view kFeatureMagic = "phogsvm-features";

std::string feature_header(const PhogParams& p, const Preprocess& pre, const std::string& manifest_hash) {
  std::ostringstream os;
  os << kFeatureMagic << " v1"
     << " L=" << p.levels << " H=" << p.bins << " A=" << format_double(p.angle_range)
     << " t=" << format_double(p.edge_threshold) << " resample=" << pre.resample_width << 'x' << pre.resample_height
     << " sigma=" << format_double(pre.sigma)
     << " grad=" << (p.grad_source == GradientSource::Image ? "image" : "laplacian")
     << " stencil=" << (p.stencil == LaplacianStencil::FourConnected ? 4 : 8) << " normalize=" << (p.normalize ? 1 : 0)
     << " manifest=" << (manifest_hash.empty() ? "-" : manifest_hash);
  return os.str();
}

struct FeatureHeader {
  PhogParams phog;
  Preprocess preproc;
  std::string manifest_hash;
};

FeatureHeader parse_feature_header(const std::string& line, const std::filesystem::path& path) {
  auto fail = [&path](const std::string& why) {
    return SchemaError("feature file '" + path.string() + "' header: " + why);
  };
  std::istringstream in(line);
  std::string magic;
  std::string version;
  in >> magic >> version;
  if (magic != kFeatureMagic || version != "v1") throw fail("not a phogsvm-features v1 file");
  std::map<std::string, std::string> kv;
  for (std::string tok; in >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw fail("bad token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw fail("missing '" + key + "'");
    return it->second;
  };
  FeatureHeader h;
  try {
    h.phog.levels = std::stoi(need("L"));
    h.phog.bins = std::stoi(need("H"));
    h.phog.angle_range = parse_double(need("A"));
    h.phog.edge_threshold = parse_double(need("t"));
    const auto& rs = need("resample");
    const auto x = rs.find('x');
    if (x == std::string::npos) throw fail("bad resample '" + rs + "'");
    h.preproc.resample_width = std::stol(rs.substr(0, x));
    h.preproc.resample_height = std::stol(rs.substr(x + 1));
    h.preproc.sigma = parse_double(need("sigma"));
    const auto& grad = need("grad");
    if (grad != "image" && grad != "laplacian") throw fail("bad grad '" + grad + "'");
    h.phog.grad_source = grad == "image" ? GradientSource::Image : GradientSource::Laplacian;
    const auto& st = need("stencil");
    if (st != "4" && st != "8") throw fail("bad stencil '" + st + "'");
    h.phog.stencil = st == "4" ? LaplacianStencil::FourConnected : LaplacianStencil::EightConnected;
    h.phog.normalize = need("normalize") == "1";
    h.manifest_hash = need("manifest");
    if (h.manifest_hash == "-") h.manifest_hash.clear();
    h.phog.validate();
    h.preproc.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  return h;
}

}  // namespace

void save_features(const FeatureSet& fs, const std::filesystem::path& path, const std::string& manifest_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write feature file '" + path.string() + "'");
  out << feature_header(fs.phog, fs.preproc, manifest_hash) << '\n';
  for (Eigen::Index i = 0; i < fs.size(); ++i) {
    out << fs.ids[static_cast<std::size_t>(i)] << ',' << fs.y(i);
    for (Eigen::Index d = 0; d < fs.X.cols(); ++d) out << ',' << format_double(fs.X(i, d));
    out << '\n';
  }
  if (!out) throw IoError("error writing feature file '" + path.string() + "'");
}

FeatureSet load_features(const std::filesystem::path& path, std::string* manifest_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("feature file '" + path.string() + "' is empty");
  const FeatureHeader h = parse_feature_header(line, path);
  if (manifest_hash) *manifest_hash = h.manifest_hash;

  FeatureSet fs;
  fs.phog = h.phog;
  fs.preproc = h.preproc;
  const Eigen::Index dim = descriptor_length(h.phog.levels, h.phog.bins);
  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fail = [&](const std::string& why) {
      return SchemaError("feature file '" + path.string() + "' line " + std::to_string(line_no) + ": " + why);
    };
    const auto fields = split_csv(line);
    if (static_cast<Eigen::Index>(fields.size()) != dim + 2) {
      throw fail("expected " + std::to_string(dim + 2) + " fields, found " + std::to_string(fields.size()));
    }
    if (fields[1] != "1" && fields[1] != "-1") throw fail("label must be 1 or -1");
    fs.ids.push_back(fields[0]);
    labels.push_back(fields[1] == "1" ? 1 : -1);
    for (std::size_t k = 2; k < fields.size(); ++k) {
      try {
        values.push_back(parse_double(fields[k]));
      } catch (const InvalidArgument& e) {
        throw fail(e.what());
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  fs.X = Eigen::Map<const FeatureMatrix>(values.data(), n, dim);
  fs.y = Eigen::Map<const LabelVector>(labels.data(), n);
  return fs;
}

FeatureSet extract_features_cached(const std::filesystem::path& manifest, const PhogParams& p, const Preprocess& pre,
                                   const std::filesystem::path& cache, unsigned threads, bool* cache_hit) {
  const std::string hash = file_fingerprint(manifest);
  if (cache_hit) *cache_hit = false;
  if (std::filesystem::exists(cache)) {
    try {
      std::string cached_hash;
      FeatureSet fs = load_features(cache, &cached_hash);
      if (cached_hash == hash && fs.phog == p && fs.preproc == pre) {
        if (cache_hit) *cache_hit = true;
        return fs;
      }
    } catch (const SchemaError&) {
      // Stale or foreign file: fall through and overwrite it.
    }
  }
  FeatureSet fs = extract_features(load_manifest(manifest), p, pre, threads);
  save_features(fs, cache, hash);
  return fs;
}

Split stratified_split_indices(const LabelVector& y, std::uint64_t seed) {
  auto [pos, neg] = class_indices(y);
  if (pos.size() < 2 || neg.size() < 2) {
    throw ClassTooSmall("stratified split needs at least 2 samples per class (male " + std::to_string(pos.size()) +
                        ", female " + std::to_string(neg.size()) + ")");
  }
  auto rng = seeded(seed);
  Split s;
  for (auto* cls : {&pos, &neg}) {
    shuffle(*cls, rng);
    const std::size_t n_train = (cls->size() + 1) / 2;
    s.train.insert(s.train.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), cls->begin() + static_cast<std::ptrdiff_t>(n_train), cls->end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

FeatureSplit stratified_split(const FeatureSet& fs, std::uint64_t seed) {
  const Split s = stratified_split_indices(fs.y, seed);
  return {fs.subset(s.train), fs.subset(s.test)};
}

std::vector<int> stratified_folds(const LabelVector& y, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds must be at least 2");
  auto [pos, neg] = class_indices(y);
  auto rng = seeded(seed);
  std::vector<int> fold(static_cast<std::size_t>(y.size()), 0);
  for (auto* cls : {&pos, &neg}) {
    shuffle(*cls, rng);
    for (std::size_t k = 0; k < cls->size(); ++k) fold[static_cast<std::size_t>((*cls)[k])] = static_cast<int>(k % folds);
  }
  return fold;
}

EvalReport recognition_rate(const LabelVector& predictions, const LabelVector& truth) {
  if (predictions.size() != truth.size()) {
    throw LengthMismatch("recognition_rate: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
  }
  if (truth.size() == 0) throw EmptyInput("recognition_rate: no samples");
  EvalReport r;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool pred_pos = predictions(i) > 0;
    const bool true_pos = truth(i) > 0;
    if (pred_pos && true_pos) {
      ++r.tp;
    } else if (!pred_pos && !true_pos) {
      ++r.tn;
    } else if (pred_pos) {
      ++r.fp;
    } else {
      ++r.fn;
    }
  }
  r.recognition_rate = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.total());
  return r;
}

GridSpec GridSpec::power_of_two(KernelKind kind) {
  GridSpec g;
  g.kind = kind;
  for (int e = -5; e <= 10; ++e) g.C_values.push_back(std::ldexp(1.0, e));
  if (kind == KernelKind::Rbf) {
    for (int e = -10; e <= 10; ++e) g.gamma_values.push_back(std::ldexp(1.0, e));
  }
  return g;
}

void GridSpec::validate() const {
  if (C_values.empty()) throw InvalidArgument("grid: C list is empty");
  for (const double c : C_values) {
    if (!(c > 0.0 && std::isfinite(c))) throw InvalidArgument("grid: C values must be positive");
  }
  if (kind == KernelKind::Rbf) {
    if (gamma_values.empty()) throw InvalidArgument("grid: gamma list is empty");
    for (const double g : gamma_values) {
      if (!(g > 0.0 && std::isfinite(g))) throw InvalidArgument("grid: gamma values must be positive");
    }
  }
  kernel_for(kind == KernelKind::Rbf ? gamma_values.front() : 1.0).validate();
}

std::size_t GridSpec::cell_count() const {
  return C_values.size() * (kind == KernelKind::Rbf ? gamma_values.size() : 1);
}

KernelSpec GridSpec::kernel_for(double gamma) const {
  switch (kind) {
    case KernelKind::Linear:
      return KernelSpec::linear();
    case KernelKind::Polynomial:
      return KernelSpec::polynomial(degree, coef0);
    case KernelKind::Rbf:
      return KernelSpec::rbf(gamma);
  }
  return {};
}

namespace {

std::vector<GridCell> empty_cells(const GridSpec& g) {
  std::vector<GridCell> cells;
  for (const double c : g.C_values) {
    if (g.kind == KernelKind::Rbf) {
      for (const double gm : g.gamma_values) cells.push_back({c, gm, 0.0, {}, true});
    } else {
      cells.push_back({c, std::nullopt, 0.0, {}, true});
    }
  }
  return cells;
}

bool better(const GridCell& a, const GridCell& b) {
  if (a.mean_rate != b.mean_rate) return a.mean_rate > b.mean_rate;
  if (a.C != b.C) return a.C < b.C;
  return a.gamma.value_or(0.0) < b.gamma.value_or(0.0);
}

std::size_t pick_best(const std::vector<GridCell>& cells) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (better(cells[i], cells[best])) best = i;
  }
  return best;
}

// Trains on rows `train` of the full kernel matrix and returns the
// recognition rate on rows `eval`.
double fit_and_score(const Eigen::MatrixXd& K, const LabelVector& y, const std::vector<Eigen::Index>& train,
                     const std::vector<Eigen::Index>& eval, const TrainConfig& cfg, bool& converged) {
  const LabelVector y_train = y(train);
  const DualSolution sol = solve_dual_smo(K(train, train), y_train, cfg);
  converged = sol.converged;
  const Eigen::VectorXd coef = sol.alpha.cwiseProduct(y_train.cast<double>());
  const Eigen::VectorXd f = K(eval, train) * coef + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(eval.size()), sol.bias);
  const LabelVector pred = f.unaryExpr([](double v) { return label_from_decision(v); });
  return recognition_rate(pred, y(eval)).recognition_rate;
}

void require_both_classes(const LabelVector& y, const char* what) {
  auto [pos, neg] = class_indices(y);
  if (pos.empty() || neg.empty()) throw SingleClassError(std::string(what) + ": training set contains a single class");
}

}  // namespace

GridResult grid_search(const FeatureSet& train, const GridSpec& grid, const TrainConfig& cfg, int folds,
                       std::uint64_t split_seed, unsigned threads) {
  grid.validate();
  cfg.validate();
  require_both_classes(train.y, "grid_search");
  {
    auto [pos, neg] = class_indices(train.y);
    if (pos.size() < 2 || neg.size() < 2) throw ClassTooSmall("grid_search: cross-validation needs 2 samples per class");
  }
  const std::vector<int> fold_of = stratified_folds(train.y, folds, split_seed);
  std::vector<std::vector<Eigen::Index>> fit_idx(static_cast<std::size_t>(folds));
  std::vector<std::vector<Eigen::Index>> val_idx(static_cast<std::size_t>(folds));
  for (Eigen::Index i = 0; i < train.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold_of[static_cast<std::size_t>(i)] == f ? val_idx : fit_idx)[static_cast<std::size_t>(f)].push_back(i);
    }
  }
  const PairwiseStats stats = PairwiseStats::of(train.X);

  GridResult result;
  result.kind = grid.kind;
  result.cells = empty_cells(grid);
  parallel_for(result.cells.size(), threads, [&](std::size_t c) {
    GridCell& cell = result.cells[c];
    TrainConfig cell_cfg = cfg;
    cell_cfg.C = cell.C;
    const Eigen::MatrixXd K = gram_matrix(grid.kernel_for(cell.gamma.value_or(1.0)), stats);
    double sum = 0.0;
    int scored = 0;
    for (int f = 0; f < folds; ++f) {
      const auto& fit = fit_idx[static_cast<std::size_t>(f)];
      const auto& val = val_idx[static_cast<std::size_t>(f)];
      if (val.empty()) continue;
      bool ok = true;
      const double rate = fit_and_score(K, train.y, fit, val, cell_cfg, ok);
      cell.converged = cell.converged && ok;
      cell.fold_rates.push_back(rate);
      sum += rate;
      ++scored;
    }
    cell.mean_rate = scored > 0 ? sum / scored : 0.0;
  });
  result.best = pick_best(result.cells);
  return result;
}

GridResult grid_search_holdout(const FeatureSet& train, const FeatureSet& test, const GridSpec& grid,
                               const TrainConfig& cfg, unsigned threads) {
  grid.validate();
  cfg.validate();
  require_both_classes(train.y, "grid_search_holdout");
  if (test.size() == 0) throw EmptyInput("grid_search_holdout: empty test set");
  if (test.X.cols() != train.X.cols()) throw DimensionMismatch("grid_search_holdout: train/test feature lengths differ");

  FeatureMatrix all(train.size() + test.size(), train.X.cols());
  all << train.X, test.X;
  LabelVector y_all(all.rows());
  y_all << train.y, test.y;
  std::vector<Eigen::Index> fit(static_cast<std::size_t>(train.size()));
  std::iota(fit.begin(), fit.end(), Eigen::Index{0});
  std::vector<Eigen::Index> eval(static_cast<std::size_t>(test.size()));
  std::iota(eval.begin(), eval.end(), train.size());
  const PairwiseStats stats = PairwiseStats::of(all);

  GridResult result;
  result.kind = grid.kind;
  result.cells = empty_cells(grid);
  parallel_for(result.cells.size(), threads, [&](std::size_t c) {
    GridCell& cell = result.cells[c];
    TrainConfig cell_cfg = cfg;
    cell_cfg.C = cell.C;
    const Eigen::MatrixXd K = gram_matrix(grid.kernel_for(cell.gamma.value_or(1.0)), stats);
    bool ok = true;
    cell.mean_rate = fit_and_score(K, y_all, fit, eval, cell_cfg, ok);
    cell.fold_rates = {cell.mean_rate};
    cell.converged = ok;
  });
  result.best = pick_best(result.cells);
  return result;
}

ExperimentReport run_experiment(const FeatureSet& fs, const ExperimentOptions& opt) {
  if (opt.repeats < 1) throw InvalidArgument("repeats must be at least 1");
  ExperimentReport report;
  for (int r = 0; r < opt.repeats; ++r) {
    ExperimentRun run;
    run.split_seed = opt.seed + static_cast<std::uint64_t>(r);
    const FeatureSplit split = stratified_split(fs, run.split_seed);
    run.grid = opt.paper_protocol ? grid_search_holdout(split.train, split.test, opt.grid, opt.train, opt.threads)
                                  : grid_search(split.train, opt.grid, opt.train, opt.folds, run.split_seed, opt.threads);
    const GridCell& best = run.grid.best_cell();
    TrainConfig cfg = opt.train;
    cfg.C = best.C;
    run.model = train_smo(split.train.X, split.train.y, opt.grid.kernel_for(best.gamma.value_or(1.0)), cfg);
    run.test = recognition_rate(predict(run.model, split.test.X), split.test.y);
    report.runs.push_back(std::move(run));
  }
  double sum = 0.0;
  for (const auto& run : report.runs) sum += run.test.recognition_rate;
  report.mean_rate = sum / static_cast<double>(report.runs.size());
  double var = 0.0;
  for (const auto& run : report.runs) var += std::pow(run.test.recognition_rate - report.mean_rate, 2);
  report.stddev_rate = std::sqrt(var / static_cast<double>(report.runs.size()));
  return report;
}

std::string format_param(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  if (v > 0.0 && mant == 0.5) return "2^" + std::to_string(exp - 1);
  std::ostringstream os;
  os << v;
  return os.str();
}

namespace {

std::string percent(double rate) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * rate;
  return os.str();
}

}  // namespace

void write_grid_table(std::ostream& out, const GridResult& g) {
  const bool rbf = g.kind == KernelKind::Rbf;
  out << "kernel " << to_string(g.kind) << ", " << g.cells.size() << " cells\n";
  out << std::left << std::setw(10) << "C";
  if (rbf) out << std::setw(10) << "gamma";
  out << std::right << std::setw(9) << "rate(%)" << "  folds(%)\n";
  for (const auto& c : g.cells) {
    out << std::left << std::setw(10) << format_param(c.C);
    if (rbf) out << std::setw(10) << format_param(c.gamma.value_or(0.0));
    out << std::right << std::setw(9) << percent(c.mean_rate) << " ";
    for (const double f : c.fold_rates) out << ' ' << percent(f);
    if (!c.converged) out << "  (not converged)";
    out << '\n';
  }
  const auto& b = g.best_cell();
  out << "best: C=" << format_param(b.C);
  if (b.gamma) out << " gamma=" << format_param(*b.gamma);
  out << " rate=" << percent(b.mean_rate) << "%\n";
}

void write_grid_csv(std::ostream& out, const GridResult& g) {
  out << "C,gamma,mean_rate";
  const std::size_t folds = g.cells.empty() ? 0 : g.cells.front().fold_rates.size();
  for (std::size_t f = 0; f < folds; ++f) out << ",fold_" << f + 1;
  out << '\n';
  for (const auto& c : g.cells) {
    out << format_double(c.C) << ',' << (c.gamma ? format_double(*c.gamma) : std::string()) << ','
        << format_double(c.mean_rate);
    for (const double f : c.fold_rates) out << ',' << format_double(f);
    out << '\n';
  }
}

void write_eval_report(std::ostream& out, const EvalReport& r) {
  out << "TP " << r.tp << "  TN " << r.tn << "  FP " << r.fp << "  FN " << r.fn << "  total " << r.total() << '\n';
  out << "recognition rate " << format_double(r.recognition_rate) << " (" << percent(r.recognition_rate) << "%)\n";
}

void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::left << std::setw(16) << "Descriptor" << std::setw(9) << "Length" << std::setw(12) << "Kernel"
      << std::setw(18) << "Rate(%)" << std::setw(8) << "C" << "gamma\n";
  for (const auto& r : rows) {
    std::ostringstream desc;
    desc << "L=" << r.phog.levels << ", H=" << r.phog.bins;
    std::string rate = percent(r.rate);
    if (r.stddev > 0.0) rate += " +/- " + percent(r.stddev);
    out << std::left << std::setw(16) << desc.str() << std::setw(9) << descriptor_length(r.phog.levels, r.phog.bins)
        << std::setw(12) << to_string(r.kind) << std::setw(18) << rate << std::setw(8) << format_param(r.C)
        << (r.gamma ? format_param(*r.gamma) : std::string()) << '\n';
  }
}

}  // namespace phogsvm
