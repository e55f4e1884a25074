#pragma once

// Soft-margin binary SVM trained on the dual
//
//   max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//   s.t. sum_i y_i a_i = 0,  0 <= a_i <= C
//
// by sequential minimal optimization over maximally violating pairs.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phogsvm/errors.hpp"

namespace phogsvm {

/// Samples are stored one per row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Class labels, each +1 or -1.
using LabelVector = Eigen::VectorXi;

enum class KernelKind { Linear, Polynomial, Rbf };

std::string_view to_string(KernelKind kind);
/// Accepts linear, poly, polynomial and rbf.
KernelKind parse_kernel_kind(std::string_view text);

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;  ///< rbf only
  int degree = 3;      ///< polynomial only
  double coef0 = 1.0;  ///< polynomial only

  static KernelSpec linear() { return {KernelKind::Linear, 1.0, 3, 1.0}; }
  static KernelSpec polynomial(int degree = 3, double coef0 = 1.0) {
    return {KernelKind::Polynomial, 1.0, degree, coef0};
  }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, 3, 1.0}; }

  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Kernel value from the two pairwise statistics every supported kernel needs.
inline double kernel_from_stats(const KernelSpec& k, double dot, double squared_distance) {
  switch (k.kind) {
    case KernelKind::Linear:
      return dot;
    case KernelKind::Polynomial:
      return std::pow(dot + k.coef0, k.degree);
    case KernelKind::Rbf:
      return std::exp(-k.gamma * squared_distance);
  }
  return 0.0;
}

template <typename DerivedA, typename DerivedB>
double kernel_eval(const KernelSpec& k, const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("kernel_eval: vectors of length " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
  }
  const double dot = k.kind == KernelKind::Rbf ? 0.0 : x.dot(y);
  const double sq = k.kind == KernelKind::Rbf ? (x - y).squaredNorm() : 0.0;
  return kernel_from_stats(k, dot, sq);
}

/// Pairwise inner products and squared distances of the rows of X. Every
/// kernel Gram matrix is an elementwise function of these, so hyperparameter
/// sweeps compute them once.
struct PairwiseStats {
  Eigen::MatrixXd dots;
  Eigen::MatrixXd squared_distances;

  static PairwiseStats of(const FeatureMatrix& X);
  /// Restriction to the given sample indices.
  PairwiseStats subset(const std::vector<Eigen::Index>& idx) const;
};

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const PairwiseStats& stats);
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const FeatureMatrix& X);

struct TrainConfig {
  double C = 1.0;
  double tol = 1e-3;       ///< KKT violation tolerance
  int max_passes = 0;      ///< sweeps of n pair updates; 0 selects 10 * n
  std::uint64_t seed = 0;  ///< tie-break randomization among equally violating samples

  void validate() const;
};

struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
};

/// SMO on a precomputed Gram matrix. Labels must be +1/-1 with both classes
/// present; those checks are left to train_smo.
DualSolution solve_dual_smo(const Eigen::MatrixXd& gram, const LabelVector& labels, const TrainConfig& cfg);

struct SvmModel {
  FeatureMatrix support_vectors;  ///< x_i with a_i > 0, one per row
  Eigen::VectorXd coefficients;   ///< a_i * y_i for each support vector
  double bias = 0.0;
  KernelSpec kernel;
  Eigen::Index feature_dim = 0;
  bool converged = true;  ///< false when the sweep limit stopped the solver
};

/// Throws SingleClassError, NonFiniteFeature, DimensionMismatch or
/// InvalidArgument on bad input. Non-convergence is reported through
/// SvmModel::converged, never thrown.
SvmModel train_smo(const FeatureMatrix& X, const LabelVector& y, const KernelSpec& k, const TrainConfig& cfg);

/// Same as train_smo, reusing pairwise statistics already computed for X.
SvmModel train_smo(const FeatureMatrix& X, const LabelVector& y, const KernelSpec& k, const TrainConfig& cfg,
                   const PairwiseStats& stats);

/// sum_i coef_i K(sv_i, x) + b
template <typename Derived>
double decision_value(const SvmModel& m, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != m.feature_dim) {
    throw DimensionMismatch("model expects " + std::to_string(m.feature_dim) + " features, got " +
                            std::to_string(x.size()));
  }
  double f = m.bias;
  for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
    f += m.coefficients(i) * kernel_eval(m.kernel, m.support_vectors.row(i).transpose(), x);
  }
  return f;
}

/// Sign with ties going to +1.
inline int label_from_decision(double f) { return f >= 0.0 ? 1 : -1; }

template <typename Derived>
int predict(const SvmModel& m, const Eigen::MatrixBase<Derived>& x) {
  return label_from_decision(decision_value(m, x));
}

/// Decision values for every row of X.
Eigen::VectorXd decision_values(const SvmModel& m, const FeatureMatrix& X);
LabelVector predict(const SvmModel& m, const FeatureMatrix& X);

/// sum_i a_i - 1/2 a^T (y y^T o K) a
double dual_objective(const Eigen::VectorXd& alpha, const LabelVector& labels, const Eigen::MatrixXd& gram);
double dual_objective(const Eigen::VectorXd& alpha, const LabelVector& labels, const FeatureMatrix& X,
                      const KernelSpec& k);

struct KktReport {
  bool satisfied = true;
  double worst_violation = 0.0;  ///< largest margin violation beyond the allowed case
  double box_violation = 0.0;    ///< largest excursion outside [0, C]
  double equality_residual = 0.0;
};

/// Certifies a dual point: a_i = 0 needs y_i f(x_i) >= 1 - tol, free a_i
/// need |y_i f(x_i) - 1| <= tol, a_i = C needs y_i f(x_i) <= 1 + tol. The
/// box and equality constraints are checked at 1e-9 and 1e-6.
KktReport check_kkt(const Eigen::VectorXd& alpha, double bias, const LabelVector& labels,
                    const Eigen::MatrixXd& gram, double C, double tol);

/// Versioned text format, decimals at 17 significant digits.
void save_model(const SvmModel& m, const std::filesystem::path& path);
/// Throws IoError when unreadable and SchemaError on any structural defect.
SvmModel load_model(const std::filesystem::path& path);

/// Shortest-safe decimal text for a double: 17 significant digits.
std::string format_double(double v);
/// Parses the whole of `text` as a double; throws InvalidArgument otherwise.
double parse_double(std::string_view text);

}  // namespace phogsvm
