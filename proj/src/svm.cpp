#include "phogsvm/svm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace phogsvm {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear:
      return "linear";
    case KernelKind::Polynomial:
      return "polynomial";
    case KernelKind::Rbf:
      return "rbf";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "linear") return KernelKind::Linear;
  if (text == "poly" || text == "polynomial") return KernelKind::Polynomial;
  if (text == "rbf") return KernelKind::Rbf;
  throw InvalidArgument("unknown kernel '" + std::string(text) + "' (expected linear, poly or rbf)");
}

void KernelSpec::validate() const {
  if (kind == KernelKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw InvalidArgument("rbf gamma must be positive");
  }
  if (kind == KernelKind::Polynomial) {
    if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
    if (!std::isfinite(coef0)) throw InvalidArgument("polynomial coef0 must be finite");
  }
}

void TrainConfig::validate() const {
  if (!(C > 0.0 && std::isfinite(C))) throw InvalidArgument("C must be positive");
  if (!(tol > 0.0 && std::isfinite(tol))) throw InvalidArgument("tol must be positive");
  if (max_passes < 0) throw InvalidArgument("max_passes must be non-negative");
}

PairwiseStats PairwiseStats::of(const FeatureMatrix& X) {
  const Eigen::Index n = X.rows();
  PairwiseStats s{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double d = X.row(i).dot(X.row(j));
      const double q = i == j ? 0.0 : (X.row(i) - X.row(j)).squaredNorm();
      s.dots(i, j) = s.dots(j, i) = d;
      s.squared_distances(i, j) = s.squared_distances(j, i) = q;
    }
  }
  return s;
}

PairwiseStats PairwiseStats::subset(const std::vector<Eigen::Index>& idx) const {
  return {dots(idx, idx), squared_distances(idx, idx)};
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const PairwiseStats& stats) {
  return stats.dots.binaryExpr(stats.squared_distances,
                               [&k](double d, double q) { return kernel_from_stats(k, d, q); });
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const FeatureMatrix& X) {
  return gram_matrix(k, PairwiseStats::of(X));
}

namespace {

// Index sets of the maximal-violating-pair selection, expressed through
// v_t = -y_t G_t where G = Q a - e is the gradient of the minimization form.
bool in_up(int y, double a, double C) { return (y > 0 && a < C) || (y < 0 && a > 0.0); }
bool in_low(int y, double a, double C) { return (y > 0 && a > 0.0) || (y < 0 && a < C); }

// Dual objective from the gradient: a'Qa = a'(G + e).
double objective_from_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& grad) {
  return 0.5 * (a.sum() - a.dot(grad));
}

// Primal active-set iterations started from an SMO point: Newton steps on the
// equality-constrained subproblem over the free multipliers, cut short at the
// box, then releasing the bound multiplier whose KKT sign is most wrong.
// Commits only if the objective strictly improves.
bool refine_active_set(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, Eigen::VectorXd& a,
                       Eigen::VectorXd& grad) {
  const Eigen::Index n = a.size();
  Eigen::VectorXd x = a;
  Eigen::VectorXd g = grad;
  std::vector<char> is_free(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) is_free[std::size_t(t)] = x(t) > 0.0 && x(t) < C;
  const double eps = 1e-12 * (1.0 + g.cwiseAbs().maxCoeff());

  bool moved = false;
  Eigen::Index released = -1;
  std::vector<Eigen::Index> F;
  for (long iter = 0; iter < 4 * n + 8; ++iter) {
    F.clear();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (is_free[std::size_t(t)]) F.push_back(t);
    }
    const auto f = static_cast<Eigen::Index>(F.size());
    if (f == 0) break;

    Eigen::MatrixXd A(f + 1, f + 1);
    Eigen::VectorXd rhs(f + 1);
    for (Eigen::Index r = 0; r < f; ++r) {
      for (Eigen::Index c = 0; c < f; ++c) A(r, c) = y(F[r]) * y(F[c]) * K(F[r], F[c]);
      A(r, f) = A(f, r) = y(F[r]);
      rhs(r) = -g(F[r]);
    }
    A(f, f) = 0.0;
    rhs(f) = -x.dot(y);
    auto solved = [&](const Eigen::VectorXd& s) {
      return s.allFinite() && (A * s - rhs).norm() <= 1e-9 * (1.0 + rhs.norm());
    };
    Eigen::VectorXd step = A.partialPivLu().solve(rhs);
    if (!solved(step)) step = A.completeOrthogonalDecomposition().solve(rhs);
    double t_max = 1.0;
    if (!solved(step)) {
      // Inconsistent system: the face is unbounded along the least-squares
      // residual, a null direction of the reduced Hessian along which the
      // objective grows linearly. Follow it to the box.
      const Eigen::VectorXd residual = rhs - A * step;
      step = residual;
      double descent = 0.0;
      for (Eigen::Index r = 0; r < f; ++r) descent += g(F[r]) * step(r);
      if (!(descent < 0.0) || !step.head(f).allFinite()) break;
      t_max = std::numeric_limits<double>::infinity();
    }

    Eigen::Index block = -1;
    for (Eigen::Index r = 0; r < f; ++r) {
      const double d = step(r);
      const double xr = x(F[r]);
      if (d < 0.0 && -xr / d < t_max && (std::isinf(t_max) || xr + d < 0.0)) {
        t_max = -xr / d;
        block = r;
      } else if (d > 0.0 && (C - xr) / d < t_max && (std::isinf(t_max) || xr + d > C)) {
        t_max = (C - xr) / d;
        block = r;
      }
    }
    if (std::isinf(t_max)) break;
    for (Eigen::Index r = 0; r < f; ++r) x(F[r]) = std::clamp(x(F[r]) + t_max * step(r), 0.0, C);
    if (block >= 0) {
      x(F[block]) = step(block) < 0.0 ? 0.0 : C;
      is_free[std::size_t(F[block])] = 0;
    }
    g = y.cwiseProduct(K * y.cwiseProduct(x)) - Eigen::VectorXd::Ones(n);
    moved = true;
    if (block >= 0) {
      if (F[block] == released && t_max == 0.0) break;
      continue;
    }

    // G_t + b y_t must be >= 0 at a = 0 and <= 0 at a = C.
    const double b = step(f);
    Eigen::Index worst = -1;
    double worst_violation = eps;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (is_free[std::size_t(t)]) continue;
      const double r = g(t) + b * y(t);
      const double violation = x(t) <= 0.0 ? -r : r;
      if (violation > worst_violation) {
        worst_violation = violation;
        worst = t;
      }
    }
    if (worst < 0) break;
    is_free[std::size_t(worst)] = 1;
    released = worst;
  }
  if (!moved || !(objective_from_gradient(x, g) > objective_from_gradient(a, grad))) return false;
  a = x;
  grad = g;
  return true;
}

}  // namespace

DualSolution solve_dual_smo(const Eigen::MatrixXd& gram, const LabelVector& labels, const TrainConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = labels.size();
  if (gram.rows() != n || gram.cols() != n) throw DimensionMismatch("solve_dual_smo: Gram matrix size");
  const double C = cfg.C;
  const Eigen::VectorXd y = labels.cast<double>();

  DualSolution sol;
  sol.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd& a = sol.alpha;
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> up_ties;
  std::vector<Eigen::Index> low_ties;
  auto pick = [&rng](const std::vector<Eigen::Index>& ties) {
    return ties.size() == 1 ? ties.front() : ties[rng() % ties.size()];
  };

  // Iteration budget shared by every SMO phase.
  const long sweeps = cfg.max_passes > 0 ? cfg.max_passes : 10L * std::max<long>(n, 1);
  const long max_iter = sweeps * std::max<long>(n, 1);
  constexpr double kTau = 1e-12;

  // Runs until converged or `limit` total iterations; always re-checks KKT.
  auto run_smo = [&](long limit) {
    sol.converged = false;
    for (;;) {
      double vmax = -std::numeric_limits<double>::infinity();
      double vmin = std::numeric_limits<double>::infinity();
      up_ties.clear();
      low_ties.clear();
      for (Eigen::Index t = 0; t < n; ++t) {
        const int yt = labels(t);
        const double v = -y(t) * grad(t);
        if (in_up(yt, a(t), C)) {
          if (v > vmax) {
            vmax = v;
            up_ties.assign(1, t);
          } else if (v == vmax) {
            up_ties.push_back(t);
          }
        }
        if (in_low(yt, a(t), C)) {
          if (v < vmin) {
            vmin = v;
            low_ties.assign(1, t);
          } else if (v == vmin) {
            low_ties.push_back(t);
          }
        }
      }
      if (up_ties.empty() || low_ties.empty() || vmax - vmin <= cfg.tol) {
        sol.converged = true;
        break;
      }
      if (sol.iterations >= limit) break;
      ++sol.iterations;

      const Eigen::Index i = pick(up_ties);
      const Eigen::Index j = pick(low_ties);
      const double old_ai = a(i);
      const double old_aj = a(j);
      const double Kii = gram(i, i);
      const double Kjj = gram(j, j);
      const double Kij = gram(i, j);

      if (labels(i) != labels(j)) {
        double quad = Kii + Kjj - 2.0 * Kij;
        if (quad <= 0.0) quad = kTau;
        const double delta = (-grad(i) - grad(j)) / quad;
        const double diff = a(i) - a(j);
        a(i) += delta;
        a(j) += delta;
        if (diff > 0.0) {
          if (a(j) < 0.0) {
            a(j) = 0.0;
            a(i) = diff;
          }
        } else if (a(i) < 0.0) {
          a(i) = 0.0;
          a(j) = -diff;
        }
        if (diff > 0.0) {
          if (a(i) > C) {
            a(i) = C;
            a(j) = C - diff;
          }
        } else if (a(j) > C) {
          a(j) = C;
          a(i) = C + diff;
        }
      } else {
        double quad = Kii + Kjj - 2.0 * Kij;
        if (quad <= 0.0) quad = kTau;
        const double delta = (grad(i) - grad(j)) / quad;
        const double sum = a(i) + a(j);
        a(i) -= delta;
        a(j) += delta;
        if (sum > C) {
          if (a(i) > C) {
            a(i) = C;
            a(j) = sum - C;
          }
        } else if (a(j) < 0.0) {
          a(j) = 0.0;
          a(i) = sum;
        }
        if (sum > C) {
          if (a(j) > C) {
            a(j) = C;
            a(i) = sum - C;
          }
        } else if (a(i) < 0.0) {
          a(i) = 0.0;
          a(j) = sum;
        }
      }

      // G_k += Q_ki da_i + Q_kj da_j with Q_kt = y_k y_t K_kt.
      const double di = (a(i) - old_ai) * y(i);
      const double dj = (a(j) - old_aj) * y(j);
      grad.array() += y.array() * (gram.col(i).array() * di + gram.col(j).array() * dj);
    }
  };

  // SMO alone stops within tol of the optimum. Between chunks of SMO
  // iterations, and after it converges, the active-set refinement jumps to the
  // exact optimum of the face SMO has found; each SMO call re-checks KKT.
  constexpr int kRefineRounds = 3;
  const long chunk = std::max<long>(1000, static_cast<long>(n) * static_cast<long>(n));
  int rounds = 0;
  for (;;) {
    run_smo(std::min(max_iter, sol.iterations + chunk));
    if (sol.converged) {
      if (rounds++ == kRefineRounds || !refine_active_set(gram, y, C, a, grad)) break;
    } else if (sol.iterations >= max_iter) {
      if (refine_active_set(gram, y, C, a, grad)) run_smo(max_iter);
      break;
    } else {
      refine_active_set(gram, y, C, a, grad);
    }
  }

  // Bias: mean of v over free multipliers, else the midpoint of the interval
  // the bound multipliers allow.
  double free_sum = 0.0;
  long free_count = 0;
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double v = -y(t) * grad(t);
    if (a(t) > 0.0 && a(t) < C) {
      free_sum += v;
      ++free_count;
    } else {
      if (in_up(labels(t), a(t), C)) lb = std::max(lb, v);
      if (in_low(labels(t), a(t), C)) ub = std::min(ub, v);
    }
  }
  if (free_count > 0) {
    sol.bias = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(lb) && std::isfinite(ub)) {
    sol.bias = 0.5 * (lb + ub);
  } else {
    sol.bias = std::isfinite(lb) ? lb : (std::isfinite(ub) ? ub : 0.0);
  }
  return sol;
}

namespace {

void validate_training_set(const FeatureMatrix& X, const LabelVector& y) {
  if (X.rows() != y.size()) {
    throw DimensionMismatch("train_smo: " + std::to_string(X.rows()) + " samples but " +
                            std::to_string(y.size()) + " labels");
  }
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("train_smo: empty training set");
  bool pos = false;
  bool neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1) {
      pos = true;
    } else if (y(i) == -1) {
      neg = true;
    } else {
      throw InvalidArgument("train_smo: label " + std::to_string(y(i)) + " at row " + std::to_string(i) +
                            " is not +1 or -1");
    }
  }
  if (!pos || !neg) throw SingleClassError("train_smo: training labels contain a single class");
  if (!X.allFinite()) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (!X.row(i).allFinite()) throw NonFiniteFeature("train_smo: non-finite feature in row " + std::to_string(i));
    }
  }
}

}  // namespace

SvmModel train_smo(const FeatureMatrix& X, const LabelVector& y, const KernelSpec& k, const TrainConfig& cfg,
                   const PairwiseStats& stats) {
  validate_training_set(X, y);
  k.validate();
  cfg.validate();
  if (stats.dots.rows() != X.rows()) throw DimensionMismatch("train_smo: pairwise statistics size");
  const DualSolution sol = solve_dual_smo(gram_matrix(k, stats), y, cfg);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha(i) > 0.0) sv.push_back(i);
  }
  SvmModel m;
  m.support_vectors = X(sv, Eigen::all);
  m.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.coefficients(static_cast<Eigen::Index>(s)) = sol.alpha(sv[s]) * y(sv[s]);
  }
  m.bias = sol.bias;
  m.kernel = k;
  m.feature_dim = X.cols();
  m.converged = sol.converged;
  return m;
}

SvmModel train_smo(const FeatureMatrix& X, const LabelVector& y, const KernelSpec& k, const TrainConfig& cfg) {
  validate_training_set(X, y);
  return train_smo(X, y, k, cfg, PairwiseStats::of(X));
}

Eigen::VectorXd decision_values(const SvmModel& m, const FeatureMatrix& X) {
  Eigen::VectorXd f(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) f(i) = decision_value(m, X.row(i).transpose());
  return f;
}

LabelVector predict(const SvmModel& m, const FeatureMatrix& X) {
  return decision_values(m, X).unaryExpr([](double f) { return label_from_decision(f); });
}

double dual_objective(const Eigen::VectorXd& alpha, const LabelVector& labels, const Eigen::MatrixXd& gram) {
  if (alpha.size() != labels.size() || gram.rows() != alpha.size() || gram.cols() != alpha.size()) {
    throw DimensionMismatch("dual_objective: alpha, labels and Gram matrix disagree in size");
  }
  const Eigen::VectorXd ay = alpha.cwiseProduct(labels.cast<double>());
  return alpha.sum() - 0.5 * ay.dot(gram * ay);
}

double dual_objective(const Eigen::VectorXd& alpha, const LabelVector& labels, const FeatureMatrix& X,
                      const KernelSpec& k) {
  if (X.rows() != alpha.size()) throw DimensionMismatch("dual_objective: feature rows differ from alpha length");
  return dual_objective(alpha, labels, gram_matrix(k, X));
}

KktReport check_kkt(const Eigen::VectorXd& alpha, double bias, const LabelVector& labels,
                    const Eigen::MatrixXd& gram, double C, double tol) {
  const Eigen::Index n = alpha.size();
  if (labels.size() != n || gram.rows() != n || gram.cols() != n) {
    throw DimensionMismatch("check_kkt: alpha, labels and Gram matrix disagree in size");
  }
  KktReport r;
  const Eigen::VectorXd y = labels.cast<double>();
  const Eigen::VectorXd f = gram * alpha.cwiseProduct(y) + Eigen::VectorXd::Constant(n, bias);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double margin = y(i) * f(i);
    double violation = 0.0;
    if (alpha(i) <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (alpha(i) >= C) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    r.worst_violation = std::max(r.worst_violation, violation);
    r.box_violation = std::max({r.box_violation, -alpha(i), alpha(i) - C});
  }
  r.equality_residual = std::abs(alpha.dot(y));
  r.satisfied = r.worst_violation <= tol && r.box_violation <= 1e-9 && r.equality_residual <= 1e-6;
  return r;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

constexpr std::string_view kModelHeader = "phogsvm v1";

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

class ModelReader {
 public:
  explicit ModelReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open model '" + path.string() + "'");
  }

  std::vector<std::string> fields(std::string_view key, std::size_t count) {
    std::string line;
    ++line_no_;
    if (!std::getline(in_, line)) fail("unexpected end of file, expected '" + std::string(key) + "'");
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != key) fail("expected '" + std::string(key) + "'");
    if (count != 0 && toks.size() != count + 1) fail("wrong field count for '" + std::string(key) + "'");
    toks.erase(toks.begin());
    return toks;
  }

  std::vector<std::string> raw_line() {
    std::string line;
    ++line_no_;
    if (!std::getline(in_, line)) fail("truncated support vector list");
    return split_ws(line);
  }

  std::string header() {
    std::string line;
    ++line_no_;
    if (!std::getline(in_, line)) fail("empty file");
    return line;
  }

  bool at_end() {
    std::string rest;
    while (std::getline(in_, rest)) {
      if (!split_ws(rest).empty()) return false;
    }
    return true;
  }

  double number(const std::string& s) {
    try {
      return parse_double(s);
    } catch (const InvalidArgument&) {
      fail("bad number '" + s + "'");
    }
  }

  long integer(const std::string& s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw SchemaError("model '" + path_.string() + "' line " + std::to_string(line_no_) + ": " + why);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

}  // namespace

void save_model(const SvmModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  out << kModelHeader << '\n';
  out << "kernel " << to_string(m.kernel.kind);
  switch (m.kernel.kind) {
    case KernelKind::Linear:
      break;
    case KernelKind::Polynomial:
      out << ' ' << m.kernel.degree << ' ' << format_double(m.kernel.coef0);
      break;
    case KernelKind::Rbf:
      out << ' ' << format_double(m.kernel.gamma);
      break;
  }
  out << '\n';
  out << "bias " << format_double(m.bias) << '\n';
  out << "feature_dim " << m.feature_dim << '\n';
  out << "converged " << (m.converged ? 1 : 0) << '\n';
  out << "support_vectors " << m.support_vectors.rows() << '\n';
  for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
    out << format_double(m.coefficients(i));
    for (Eigen::Index d = 0; d < m.support_vectors.cols(); ++d) out << ' ' << format_double(m.support_vectors(i, d));
    out << '\n';
  }
  if (!out) throw IoError("error writing model '" + path.string() + "'");
}

SvmModel load_model(const std::filesystem::path& path) {
  ModelReader r(path);
  const std::string header = r.header();
  if (header != kModelHeader) r.fail("unsupported header '" + header + "', expected '" + std::string(kModelHeader) + "'");

  SvmModel m;
  const auto kern = r.fields("kernel", 0);
  if (kern.empty()) r.fail("missing kernel kind");
  try {
    m.kernel.kind = parse_kernel_kind(kern[0]);
  } catch (const InvalidArgument&) {
    r.fail("unknown kernel '" + kern[0] + "'");
  }
  const std::size_t expected = m.kernel.kind == KernelKind::Linear ? 1 : m.kernel.kind == KernelKind::Rbf ? 2 : 3;
  if (kern.size() != expected) r.fail("wrong parameter count for kernel '" + kern[0] + "'");
  if (m.kernel.kind == KernelKind::Rbf) m.kernel.gamma = r.number(kern[1]);
  if (m.kernel.kind == KernelKind::Polynomial) {
    m.kernel.degree = static_cast<int>(r.integer(kern[1]));
    m.kernel.coef0 = r.number(kern[2]);
  }
  try {
    m.kernel.validate();
  } catch (const InvalidArgument& e) {
    r.fail(e.what());
  }

  m.bias = r.number(r.fields("bias", 1)[0]);
  m.feature_dim = r.integer(r.fields("feature_dim", 1)[0]);
  if (m.feature_dim < 1) r.fail("feature_dim must be positive");
  const long conv = r.integer(r.fields("converged", 1)[0]);
  if (conv != 0 && conv != 1) r.fail("converged must be 0 or 1");
  m.converged = conv == 1;
  const long count = r.integer(r.fields("support_vectors", 1)[0]);
  if (count < 0) r.fail("negative support vector count");

  m.support_vectors.resize(count, m.feature_dim);
  m.coefficients.resize(count);
  for (long i = 0; i < count; ++i) {
    const auto toks = r.raw_line();
    if (static_cast<Eigen::Index>(toks.size()) != m.feature_dim + 1) {
      r.fail("support vector " + std::to_string(i) + " has " + std::to_string(toks.empty() ? 0 : toks.size() - 1) +
             " features, expected " + std::to_string(m.feature_dim));
    }
    m.coefficients(i) = r.number(toks[0]);
    for (Eigen::Index d = 0; d < m.feature_dim; ++d) m.support_vectors(i, d) = r.number(toks[static_cast<std::size_t>(d) + 1]);
  }
  if (!r.at_end()) r.fail("trailing content after support vectors");
  return m;
}

}  // namespace phogsvm
