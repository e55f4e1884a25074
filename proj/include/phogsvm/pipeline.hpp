#pragma once

// Experiment harness: manifest ingestion, preprocessing and descriptor
// extraction, stratified splitting, C/gamma grid search and recognition-rate
// reporting.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phogsvm/image.hpp"
#include "phogsvm/phog.hpp"
#include "phogsvm/svm.hpp"

namespace phogsvm {

struct Sample {
  std::string id;
  std::filesystem::path path;
  int label = 0;  ///< male +1, female -1
};

struct Dataset {
  std::vector<Sample> samples;
};

/// Reads a CSV manifest with header `id,path,label`. Labels are male/female
/// (case-insensitive); relative paths resolve against the manifest's
/// directory. Throws ManifestError naming the line for bad rows.
Dataset load_manifest(const std::filesystem::path& path);

/// Parses "male"/"female" in any case into +1/-1.
std::optional<int> parse_gender_label(std::string_view text);
std::string_view gender_name(int label);

struct Preprocess {
  Eigen::Index resample_width = 300;
  Eigen::Index resample_height = 300;
  double sigma = 1.0;

  void validate() const;
  friend bool operator==(const Preprocess&, const Preprocess&) = default;
};

/// Bicubic resampling to the target size followed by Gaussian smoothing.
GrayImage preprocess_image(const GrayImage& img, const Preprocess& pre);

struct FeatureSet {
  std::vector<std::string> ids;
  FeatureMatrix X;  ///< one descriptor per row
  LabelVector y;
  PhogParams phog;
  Preprocess preproc;

  Eigen::Index size() const { return y.size(); }
  /// Rows at `idx`, in that order.
  FeatureSet subset(const std::vector<Eigen::Index>& idx) const;
};

/// Runs `body(i)` for i in [0, n) on up to `threads` workers (0 picks the
/// hardware concurrency). The first exception thrown is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// load_image -> preprocess_image -> phog_descriptor for every sample, rows
/// in manifest order. Errors are rethrown with the sample id attached.
FeatureSet extract_features(const Dataset& d, const PhogParams& p, const Preprocess& pre, unsigned threads = 0);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

/// Feature file: one header line carrying the parameters, then
/// `id,label,v1,...,vn` per sample.
void save_features(const FeatureSet& fs, const std::filesystem::path& path, const std::string& manifest_hash = "");
FeatureSet load_features(const std::filesystem::path& path, std::string* manifest_hash = nullptr);

/// Reuses `cache` when its header records the same parameters and manifest
/// fingerprint; otherwise extracts and rewrites it.
FeatureSet extract_features_cached(const std::filesystem::path& manifest, const PhogParams& p, const Preprocess& pre,
                                   const std::filesystem::path& cache, unsigned threads = 0,
                                   bool* cache_hit = nullptr);

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Per class: seeded Fisher-Yates shuffle, then the first ceil(n/2) go to
/// train. Indices come back in ascending order. Throws ClassTooSmall when a
/// class has fewer than two samples.
Split stratified_split_indices(const LabelVector& y, std::uint64_t seed);

struct FeatureSplit {
  FeatureSet train;
  FeatureSet test;
};
FeatureSplit stratified_split(const FeatureSet& fs, std::uint64_t seed);

/// Fold id in [0, folds) per sample, dealt round-robin within each shuffled class.
std::vector<int> stratified_folds(const LabelVector& y, int folds, std::uint64_t seed);

struct EvalReport {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;
  double recognition_rate = 0.0;

  long total() const { return tp + tn + fp + fn; }
};

/// (TP + TN) / total, positives being +1.
EvalReport recognition_rate(const LabelVector& predictions, const LabelVector& truth);

struct GridSpec {
  KernelKind kind = KernelKind::Rbf;
  std::vector<double> C_values;
  std::vector<double> gamma_values;  ///< used by rbf only
  int degree = 3;
  double coef0 = 1.0;

  /// C = 2^-5..2^10 and, for rbf, gamma = 2^-10..2^10, exponent step 1.
  static GridSpec power_of_two(KernelKind kind);
  void validate() const;
  std::size_t cell_count() const;
  KernelSpec kernel_for(double gamma) const;
};

struct GridCell {
  double C = 0.0;
  std::optional<double> gamma;
  double mean_rate = 0.0;
  std::vector<double> fold_rates;
  bool converged = true;  ///< false if any fold hit the sweep limit
};

struct GridResult {
  KernelKind kind = KernelKind::Rbf;
  std::vector<GridCell> cells;  ///< C-major, gamma-minor, in grid order
  std::size_t best = 0;

  const GridCell& best_cell() const { return cells.at(best); }
};

/// Mean recognition rate of seeded stratified k-fold cross-validation inside
/// `train` for every cell. Best = highest mean, ties to smaller C then
/// smaller gamma.
GridResult grid_search(const FeatureSet& train, const GridSpec& grid, const TrainConfig& cfg, int folds,
                       std::uint64_t split_seed, unsigned threads = 0);

/// Scores each cell directly on `test` after training on all of `train`.
GridResult grid_search_holdout(const FeatureSet& train, const FeatureSet& test, const GridSpec& grid,
                               const TrainConfig& cfg, unsigned threads = 0);

struct ExperimentOptions {
  GridSpec grid;
  TrainConfig train;
  int folds = 5;
  int repeats = 1;
  bool paper_protocol = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct ExperimentRun {
  std::uint64_t split_seed = 0;
  GridResult grid;
  EvalReport test;
  SvmModel model;
};

struct ExperimentReport {
  std::vector<ExperimentRun> runs;
  double mean_rate = 0.0;
  double stddev_rate = 0.0;  ///< population standard deviation over repeats
};

/// For each repeat r: split with seed + r, select parameters, retrain the best
/// cell on the full train half and score it on the test half.
ExperimentReport run_experiment(const FeatureSet& fs, const ExperimentOptions& opt);

/// "2^k" for exact powers of two, else the shortest decimal.
std::string format_param(double v);

/// One line per cell plus the selected parameters.
void write_grid_table(std::ostream& out, const GridResult& g);
/// Machine-readable: `C,gamma,mean_rate,fold_rates...`, one cell per line.
/// Header line `C,gamma,mean_rate,fold_1,...` followed by one row per cell.
void write_grid_csv(std::ostream& out, const GridResult& g);
void write_eval_report(std::ostream& out, const EvalReport& r);

/// One row of the kernel x descriptor summary.
struct SummaryRow {
  PhogParams phog;
  KernelKind kind = KernelKind::Rbf;
  double rate = 0.0;
  double stddev = 0.0;
  double C = 0.0;
  std::optional<double> gamma;
};
void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace phogsvm
