#pragma once

// Decides for small instances whether a partial H_n has a positive (semi)definite
// completion. Infeasibility is only claimed with a certificate (two principal
// minors whose ranges for one unknown are disjoint, or a singular block whose
// kernel the data contradicts). Feasibility is only claimed with a completion
// that passes the definiteness check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hankel/core.hpp"
#include "hankel/lina.hpp"
#include "hankel/schur_completion.hpp"

namespace hankel {

/// Values of one unknown that keep a minor positive. Open for definiteness,
/// closed for semidefiniteness; ends may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool closed = false;

  bool empty() const { return closed ? !(lo <= hi) : !(lo < hi); }
  bool contains(double x) const { return closed ? lo <= x && x <= hi : lo < x && x < hi; }

  /// A point well inside; for half lines, one unit (relative) past the end.
  double interior() const {
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo + 1.0 + std::abs(lo);
    if (std::isfinite(hi)) return hi - 1.0 - std::abs(hi);
    return 0.0;
  }

  static Interval none(bool closed) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, -inf, closed};
  }
};

struct MinorBound {
  std::vector<std::size_t> rows;
  Interval interval;
};

struct Obstruction {
  enum class Kind {
    Interval,  // two minors (possibly the same one) leave no value for s_index
    Kernel,    // a singular block's kernel forces an equation the data violates
    Block,     // a fully specified principal block is not positive
  };
  Kind kind = Kind::Interval;
  std::size_t index = 0;
  MinorBound lower;
  MinorBound upper;
  std::string detail;
};

inline std::string to_string(Obstruction::Kind k) {
  switch (k) {
    case Obstruction::Kind::Interval: return "interval";
    case Obstruction::Kind::Kernel: return "kernel";
    case Obstruction::Kind::Block: return "block";
  }
  return "?";
}

struct FeasibilityResult {
  bool feasible = false;
  /// Search ran out of budget without a certificate either way.
  bool inconclusive = false;
  /// Values for the missing indices of H_n when feasible.
  std::map<std::size_t, double> completion;
  std::optional<Obstruction> obstruction;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  std::size_t evaluations = 0;
  std::string method;
};

struct OracleOptions {
  /// Evaluations of lambda_min allowed in the search phase.
  std::size_t budget = 20000;
  std::uint64_t seed = 1;
  std::size_t max_missing = 6;
};

namespace detail {

using Known = std::map<std::size_t, double>;

enum class Cone { Pd, Psd };

inline Known known_up_to(const PartialSequence& s, std::size_t top) {
  Known out;
  for (const auto& [k, v] : s.entries()) {
    if (k <= top) out.emplace(k, v);
  }
  return out;
}

/// H[rows] = a + x e where x stands for s_u.
struct AffineMinor {
  Matrix a;
  Matrix e;
};

inline AffineMinor affine_minor(const Known& known, const std::vector<std::size_t>& rows,
                                std::size_t u) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  AffineMinor out{Matrix::Zero(m, m), Matrix::Zero(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t k = rows[static_cast<std::size_t>(i)] + rows[static_cast<std::size_t>(j)];
      if (k == u) {
        out.e(i, j) = 1.0;
      } else {
        out.a(i, j) = known.at(k);
      }
    }
  }
  return out;
}

/// Golden-section maximum of a concave f on [lo, hi].
template <class F>
std::pair<double, double> maximise_on(F&& f, double lo, double hi, int iterations,
                                      std::size_t* evaluations = nullptr) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  if (evaluations) *evaluations += 2;
  for (int it = 0; it < iterations && hi - lo > 0; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
    if (evaluations) ++*evaluations;
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

/// Exact ends of {x : a + x e > 0} given one strictly feasible x0. With
/// a + x0 e = L L^T the matrix is L (I + (x - x0) K) L^T, K = L^-1 e L^-T.
inline Interval ends_from(const AffineMinor& m, double x0, bool closed) {
  Eigen::LLT<Matrix> llt(m.a + x0 * m.e);
  Matrix k = llt.matrixL().solve(m.e);
  k = llt.matrixL().solve(k.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
  const double mu_max = es.eigenvalues().maxCoeff();
  const double mu_min = es.eigenvalues().minCoeff();
  Interval out;
  out.closed = closed;
  if (mu_max > 0) out.lo = x0 - 1.0 / mu_max;
  if (mu_min < 0) out.hi = x0 - 1.0 / mu_min;
  return out;
}

inline Interval feasible_interval(const AffineMinor& m, Cone cone, const ToleranceOptions& tol) {
  const bool closed = cone == Cone::Psd;
  const Eigen::Index size = m.a.rows();
  std::vector<Eigen::Index> diag;
  bool off = false;
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      if (m.e(i, j) == 0) continue;
      if (i == j) {
        diag.push_back(i);
      } else {
        off = true;
      }
    }
  }
  Interval out;
  out.closed = closed;

  // s_u only on the diagonal: x must exceed b^T A^+ b, with b in range(A)
  if (!off && diag.size() == 1) {
    const Eigen::Index k = diag.front();
    if (size == 1) {
      out.lo = 0.0;
      return out;
    }
    std::vector<Eigen::Index> rest;
    for (Eigen::Index i = 0; i < size; ++i) {
      if (i != k) rest.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(rest.size());
    Matrix ar(r, r);
    Vector b(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      b(i) = m.a(rest[i], k);
      for (Eigen::Index j = 0; j < r; ++j) ar(i, j) = m.a(rest[i], rest[j]);
    }
    const double scale = std::max(scale_of(ar), b.cwiseAbs().maxCoeff());
    if (r == 1) {
      const double a0 = ar(0, 0);
      if (a0 > 0) {
        out.lo = b(0) * (b(0) / a0);
        return out;
      }
      if (closed && a0 >= -tol.psd_tol * scale && std::abs(b(0)) <= std::sqrt(tol.psd_tol) * scale) {
        out.lo = 0.0;
        return out;
      }
      return Interval::none(closed);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(ar);
    const Vector& lam = es.eigenvalues();
    if (!closed) {
      if (!(lam.minCoeff() > 0)) return Interval::none(closed);
      Eigen::LLT<Matrix> llt(ar);
      out.lo = b.dot(llt.solve(b));
      return out;
    }
    if (lam.minCoeff() < -tol.psd_tol * scale) return Interval::none(closed);
    const Vector c = es.eigenvectors().transpose() * b;
    double q = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (lam(i) > tol.psd_tol * scale) {
        q += c(i) * c(i) / lam(i);
      } else if (std::abs(c(i)) > std::sqrt(tol.psd_tol) * scale) {
        return Interval::none(closed);
      }
    }
    out.lo = q;
    return out;
  }

  // [[a, x], [x, c]]
  if (size == 2 && diag.empty()) {
    const double a0 = m.a(0, 0);
    const double c0 = m.a(1, 1);
    if (closed ? (a0 < 0 || c0 < 0) : !(a0 > 0 && c0 > 0)) return Interval::none(closed);
    const double r = std::sqrt(a0 * c0);
    out.lo = -r;
    out.hi = r;
    return out;
  }

  // General case: the feasible set is bounded (an off-diagonal s_u sits
  // between two known diagonal entries), find an interior point first.
  const double bound = 2.0 * m.a.cwiseAbs().maxCoeff() + 1.0;
  auto f = [&](double x) { return min_eigenvalue(m.a + x * m.e); };
  const auto [x0, f0] = maximise_on(f, -bound, bound, 160);
  const double scale = std::max(scale_of(m.a), std::abs(x0));
  if (!closed) {
    if (!(f0 > 0)) return Interval::none(closed);
    return ends_from(m, x0, false);
  }
  if (f0 < -tol.psd_tol * scale) return Interval::none(closed);
  if (f0 <= tol.pd_margin * scale) return {x0, x0, true};
  return ends_from(m, x0, true);
}

inline bool block_ok(const Matrix& h, Cone cone, const ToleranceOptions& tol) {
  const PsdReport r = check_definiteness(h, tol);
  return cone == Cone::Pd ? r.is_pd : r.is_psd;
}

struct Scan {
  std::optional<Obstruction> obstruction;
  std::map<std::size_t, Interval> intervals;
};

/// Every principal minor of H_n with at most one unknown entry: fully
/// specified ones must be positive, single-unknown ones bound that unknown.
inline Scan scan_minors(const Known& known, std::size_t n, Cone cone,
                        const ToleranceOptions& tol) {
  const std::size_t rows_total = n + 1;
  const bool all_masks = rows_total <= 11;
  const std::uint32_t limit = 1U << rows_total;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    if (all_masks || std::popcount(mask) <= 4) masks.push_back(mask);
  }
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return std::popcount(a) < std::popcount(b);
  });

  const bool closed = cone == Cone::Psd;
  Scan out;
  std::map<std::size_t, MinorBound> lower;
  std::map<std::size_t, MinorBound> upper;
  std::optional<Obstruction> single;
  for (std::uint32_t mask : masks) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < rows_total; ++i) {
      if (mask >> i & 1U) rows.push_back(i);
    }
    std::set<std::size_t> unknown;
    for (std::size_t a : rows) {
      for (std::size_t b : rows) {
        if (!known.contains(a + b)) unknown.insert(a + b);
      }
    }
    if (unknown.size() > 1) continue;
    if (unknown.empty()) {
      Matrix h(rows.size(), rows.size());
      for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows.size(); ++b) h(a, b) = known.at(rows[a] + rows[b]);
      }
      if (!block_ok(h, cone, tol) && !out.obstruction) {
        Obstruction o;
        o.kind = Obstruction::Kind::Block;
        o.lower.rows = rows;
        o.upper.rows = rows;
        o.detail = "fully specified block is not positive";
        out.obstruction = o;
      }
      continue;
    }
    const std::size_t u = *unknown.begin();
    const Interval iv = feasible_interval(affine_minor(known, rows, u), cone, tol);
    if (iv.empty()) {
      if (!single) {
        Obstruction o;
        o.kind = Obstruction::Kind::Interval;
        o.index = u;
        o.lower = {rows, iv};
        o.upper = {rows, iv};
        o.detail = "no value of s_" + std::to_string(u) + " makes this minor positive";
        single = o;
      }
      continue;
    }
    auto lo = lower.find(u);
    if (lo == lower.end() || iv.lo > lo->second.interval.lo) lower[u] = {rows, iv};
    auto hi = upper.find(u);
    if (hi == upper.end() || iv.hi < hi->second.interval.hi) upper[u] = {rows, iv};
  }
  if (!out.obstruction && single) out.obstruction = single;
  for (const auto& [u, lb] : lower) {
    const MinorBound& ub = upper.at(u);
    Interval joint{lb.interval.lo, ub.interval.hi, closed};
    out.intervals[u] = joint;
    if (joint.empty() && !out.obstruction) {
      Obstruction o;
      o.kind = Obstruction::Kind::Interval;
      o.index = u;
      o.lower = lb;
      o.upper = ub;
      o.detail = "s_" + std::to_string(u) + " must exceed one minor's lower end and stay below "
                 "another's upper end";
      out.obstruction = o;
    }
  }
  return out;
}

/// For a semidefinite completion, a kernel vector v of a fully specified
/// singular block H[beta] must satisfy sum_j v_j s_{r + beta_j} = 0 for every
/// row r. Unknowns pinned by these equations are fixed in `known`.
inline std::optional<Obstruction> propagate_kernels(Known& known, std::size_t n,
                                                    const ToleranceOptions& tol) {
  for (std::size_t round = 0; round <= 2 * n + 1; ++round) {
    std::vector<std::size_t> unknowns;
    for (std::size_t k = 0; k <= 2 * n; ++k) {
      if (!known.contains(k)) unknowns.push_back(k);
    }
    std::map<std::size_t, Eigen::Index> column;
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
      column[unknowns[i]] = static_cast<Eigen::Index>(i);
    }
    const HankelView view = hankel_view(PartialSequence(known, 2 * n), n, kMaxEnumerationOrder);
    std::vector<Vector> rows_of_a;
    std::vector<double> rhs;
    for (const auto& beta : fully_specified_principal_index_sets(view)) {
      const Matrix h = view.principal(beta);
      const double scale = scale_of(h);
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      for (Eigen::Index c = 0; c < h.rows(); ++c) {
        if (es.eigenvalues()(c) > tol.psd_tol * scale) continue;
        const Vector v = es.eigenvectors().col(c);
        for (std::size_t r = 0; r <= n; ++r) {
          Vector coef = Vector::Zero(static_cast<Eigen::Index>(unknowns.size()));
          double constant = 0.0;
          double size = 0.0;
          for (std::size_t j = 0; j < beta.size(); ++j) {
            const std::size_t k = r + beta[j];
            const double vj = v(static_cast<Eigen::Index>(j));
            if (auto it = known.find(k); it != known.end()) {
              constant += vj * it->second;
              size = std::max(size, std::abs(it->second));
            } else {
              coef(column.at(k)) += vj;
            }
          }
          const double slack = std::sqrt(tol.psd_tol) * std::max({1.0, scale, size});
          if (unknowns.empty() || coef.cwiseAbs().maxCoeff() <= 1e-12) {
            if (std::abs(constant) > slack) {
              Obstruction o;
              o.kind = Obstruction::Kind::Kernel;
              o.index = r;
              o.lower.rows = beta;
              o.upper.rows = beta;
              o.detail = "kernel of the singular block needs row " + std::to_string(r) +
                         " to vanish on it, residual " + std::to_string(constant);
              return o;
            }
            continue;
          }
          rows_of_a.push_back(coef / std::max(1.0, scale));
          rhs.push_back(-constant / std::max(1.0, scale));
        }
      }
    }
    if (rows_of_a.empty()) return std::nullopt;
    Matrix a(static_cast<Eigen::Index>(rows_of_a.size()),
             static_cast<Eigen::Index>(unknowns.size()));
    Vector b(static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t i = 0; i < rows_of_a.size(); ++i) {
      a.row(static_cast<Eigen::Index>(i)) = rows_of_a[i].transpose();
      b(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    cod.setThreshold(1e-10);
    const Vector x = cod.solve(b);
    const double residual = (a * x - b).cwiseAbs().maxCoeff();
    if (residual > std::sqrt(tol.psd_tol)) {
      Obstruction o;
      o.kind = Obstruction::Kind::Kernel;
      o.detail = "kernel equations are inconsistent, residual " + std::to_string(residual);
      return o;
    }
    // an unknown is pinned when the null space of a does not move it
    const Eigen::Index rank = cod.rank();
    Matrix null_basis;
    if (rank < a.cols()) {
      Eigen::FullPivLU<Matrix> lu(a);
      lu.setThreshold(1e-10);
      null_basis = lu.kernel();
    }
    bool fixed_any = false;
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      const bool pinned = rank == a.cols() || null_basis.row(c).cwiseAbs().maxCoeff() < 1e-10;
      if (pinned) {
        known[unknowns[i]] = x(c);
        fixed_any = true;
      }
    }
    if (!fixed_any) return std::nullopt;
  }
  return std::nullopt;
}

/// Derivative-free ascent of lambda_min(H_n) over the missing entries.
class Search {
 public:
  Search(const Known& known, std::size_t n, std::vector<std::size_t> unknowns)
      : n_(n), unknowns_(std::move(unknowns)) {
    const auto m = static_cast<Eigen::Index>(n + 1);
    base_ = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto k = static_cast<std::size_t>(i + j);
        if (auto it = known.find(k); it != known.end()) base_(i, j) = it->second;
      }
    }
  }

  Matrix matrix(const Vector& x) const {
    Matrix h = base_;
    for (std::size_t u = 0; u < unknowns_.size(); ++u) {
      const auto k = static_cast<Eigen::Index>(unknowns_[u]);
      for (Eigen::Index i = std::max<Eigen::Index>(0, k - static_cast<Eigen::Index>(n_));
           i <= std::min<Eigen::Index>(k, static_cast<Eigen::Index>(n_)); ++i) {
        h(i, k - i) = x(static_cast<Eigen::Index>(u));
      }
    }
    return h;
  }

  double value(const Vector& x) {
    ++evaluations;
    return min_eigenvalue(matrix(x));
  }

  /// Coordinate and random-direction line searches from x until lambda_min
  /// beats `target(x)` relative to the matrix scale, or the budget runs out.
  template <class Target>
  std::pair<Vector, double> climb(Vector x, std::size_t budget, std::mt19937_64& rng,
                                  Target&& target) {
    double fx = value(x);
    const std::size_t stop = evaluations + budget;
    double step = std::max(1.0, scale_of(matrix(x)));
    const double floor = 1e-13 * step;
    std::normal_distribution<double> gauss;
    const auto dim = x.size();
    while (evaluations < stop && step > floor) {
      if (fx > target(scale_of(matrix(x)))) break;
      bool moved = false;
      for (Eigen::Index dir = 0; dir <= dim && evaluations < stop; ++dir) {
        Vector d = Vector::Zero(dim);
        if (dir < dim) {
          d(dir) = 1.0;
        } else {
          for (Eigen::Index i = 0; i < dim; ++i) d(i) = gauss(rng);
          d /= d.norm();
        }
        auto line = [&](double t) { return value(x + t * d); };
        const auto [t, ft] = maximise_on(line, -step, step, 40);
        if (ft > fx + 1e-15 * step) {
          x += t * d;
          fx = ft;
          moved = true;
        }
      }
      if (!moved) step *= 0.5;
    }
    return {x, fx};
  }

  const std::vector<std::size_t>& unknowns() const { return unknowns_; }
  std::size_t evaluations = 0;

 private:
  std::size_t n_;
  std::vector<std::size_t> unknowns_;
  Matrix base_;
};

inline std::vector<std::pair<std::size_t, double>> as_fixed(const Known& known) {
  return {known.begin(), known.end()};
}

/// Starting points: the constructive completion when the pattern allows one,
/// a guide measure, the middle of every scanned interval, then jitter.
inline std::vector<Vector> seeds(const Known& known, std::size_t n,
                                 const std::vector<std::size_t>& unknowns,
                                 const std::map<std::size_t, Interval>& intervals,
                                 std::mt19937_64& rng, const ToleranceOptions& tol) {
  const auto dim = static_cast<Eigen::Index>(unknowns.size());
  std::vector<Vector> out;
  auto pick = [&](const std::vector<double>& full) {
    if (full.size() < 2 * n + 1) return;
    Vector x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = full[unknowns[static_cast<std::size_t>(i)]];
    if (x.allFinite()) out.push_back(x);
  };
  const PartialSequence ps(known, 2 * n);
  if (known.contains(0) && known.at(0) > 0) {
    try {
      pick(complete_pattern_inductive(ps, 2 * n, tol).completed);
    } catch (const Error&) {
    }
  }
  if (!known.empty() && (!known.contains(0) || known.at(0) > 0) && known.size() <= 32) {
    if (auto g = guide_moments(as_fixed(known), 2 * n)) pick(*g);
  }
  double big = 1.0;
  for (const auto& [k, v] : known) big = std::max(big, std::abs(v));
  Vector mid(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::size_t u = unknowns[static_cast<std::size_t>(i)];
    if (auto it = intervals.find(u); it != intervals.end()) {
      mid(i) = it->second.interior();
    } else {
      mid(i) = u % 2 == 0 ? big : 0.0;
    }
  }
  out.push_back(mid);
  std::normal_distribution<double> gauss;
  const std::size_t base = out.size();
  for (std::size_t r = 0; r < 4; ++r) {
    Vector x = out[r % base];
    for (Eigen::Index i = 0; i < dim; ++i) x(i) += 0.5 * big * gauss(rng);
    out.push_back(x);
  }
  return out;
}

inline FeasibilityResult decide(const PartialSequence& s, std::size_t n, Cone cone,
                                const OracleOptions& opts, const ToleranceOptions& tol) {
  tol.validate();
  if (n > kMaxEnumerationOrder) {
    throw Error(ErrorKind::OrderTooLarge,
                "the oracle is capped at order " + std::to_string(kMaxEnumerationOrder));
  }
  Known known = known_up_to(s, 2 * n);
  FeasibilityResult out;

  if (cone == Cone::Psd) {
    if (auto o = propagate_kernels(known, n, tol)) {
      out.obstruction = o;
      out.method = "kernel";
      return out;
    }
  }
  std::vector<std::size_t> unknowns;
  for (std::size_t k = 0; k <= 2 * n; ++k) {
    if (!known.contains(k)) unknowns.push_back(k);
  }
  if (unknowns.empty()) {
    std::vector<double> full(2 * n + 1);
    for (const auto& [k, v] : known) full[k] = v;
    const Matrix hn = hankel_matrix(full, n);
    out.min_eigenvalue = min_eigenvalue(hn);
    out.method = "direct";
    out.feasible = block_ok(hn, cone, tol);
    for (const auto& [k, v] : known) {
      if (!s.is_specified(k)) out.completion[k] = v;
    }
    if (!out.feasible) {
      Obstruction o;
      o.kind = Obstruction::Kind::Block;
      for (std::size_t i = 0; i <= n; ++i) o.lower.rows.push_back(i);
      o.upper.rows = o.lower.rows;
      o.detail = "H_" + std::to_string(n) + " is fully determined and not positive";
      out.obstruction = o;
    }
    return out;
  }

  const Scan scan = scan_minors(known, n, cone, tol);
  if (scan.obstruction) {
    out.obstruction = scan.obstruction;
    out.method = "obstruction";
    return out;
  }
  if (unknowns.size() > opts.max_missing) {
    throw Error(ErrorKind::TooManyMissing, std::to_string(unknowns.size()) +
                                               " missing entries exceed the search limit of " +
                                               std::to_string(opts.max_missing));
  }

  std::mt19937_64 rng(opts.seed);
  Search search(known, n, unknowns);
  const auto starts = seeds(known, n, unknowns, scan.intervals, rng, tol);
  // stop early once comfortably inside; the verdict uses the plain thresholds
  auto target = [&](double scale) {
    return cone == Cone::Pd ? std::max(1e3 * tol.pd_margin, 1e-8) * scale : 1e-8 * scale;
  };
  Vector best;
  double best_value = -std::numeric_limits<double>::infinity();
  const std::size_t share = std::max<std::size_t>(opts.budget / starts.size(), 200);
  for (const auto& x0 : starts) {
    if (search.evaluations >= opts.budget) break;
    const std::size_t left = opts.budget - search.evaluations;
    auto [x, fx] = search.climb(x0, std::min(share, left), rng, target);
    if (fx > best_value) {
      best_value = fx;
      best = x;
    }
    if (best_value > target(scale_of(search.matrix(best)))) break;
  }
  out.evaluations = search.evaluations;
  out.method = "search";
  out.min_eigenvalue = best_value;
  const Matrix h = search.matrix(best);
  out.feasible = block_ok(h, cone, tol);
  if (out.feasible) {
    for (const auto& [k, v] : known) {
      if (!s.is_specified(k)) out.completion[k] = v;
    }
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
      out.completion[unknowns[i]] = best(static_cast<Eigen::Index>(i));
    }
  } else {
    out.inconclusive = true;
  }
  return out;
}

}  // namespace detail

/// Range of the single missing entry of H_n (n = horizon / 2) keeping H_n
/// positive definite. Empty when no value works.
inline Interval interval_for_single_missing(const PartialSequence& s,
                                            const ToleranceOptions& tol = {}) {
  tol.validate();
  const std::size_t n = s.horizon() / 2;
  const detail::Known known = detail::known_up_to(s, 2 * n);
  std::vector<std::size_t> missing;
  for (std::size_t k = 0; k <= 2 * n; ++k) {
    if (!known.contains(k)) missing.push_back(k);
  }
  if (missing.size() != 1) {
    throw Error(ErrorKind::NotSingleMissing, "H_" + std::to_string(n) + " has " +
                                                 std::to_string(missing.size()) +
                                                 " missing entries, expected one");
  }
  const std::size_t u = missing.front();
  if (n == 2 && (u == 1 || u == 3)) {
    // det H_2 is a concave quadratic in s_3 with roots
    // (s1 s2 +- sqrt(P1 P2)) / s0; s_1 is the mirror image.
    auto v = [&](std::size_t k) { return known.at(u == 3 ? k : 4 - k); };
    const double p1 = v(0) * v(2) - v(1) * v(1);
    const double p2 = v(0) * v(4) - v(2) * v(2);
    if (!(v(0) > 0 && p1 > 0 && p2 > 0)) return Interval::none(false);
    const double root = std::sqrt(p1 * p2);
    const double centre = v(1) * v(2);
    return {(centre - root) / v(0), (centre + root) / v(0), false};
  }
  std::vector<std::size_t> rows(n + 1);
  for (std::size_t i = 0; i <= n; ++i) rows[i] = i;
  return detail::feasible_interval(detail::affine_minor(known, rows, u), detail::Cone::Pd, tol);
}

/// Does H_n of s have a positive definite completion?
inline FeasibilityResult decide_pd_completable(const PartialSequence& s, std::size_t n,
                                               const OracleOptions& opts = {},
                                               const ToleranceOptions& tol = {}) {
  return detail::decide(s, n, detail::Cone::Pd, opts, tol);
}

/// Semidefinite variant; singular blocks also propagate their kernels.
inline FeasibilityResult decide_psd_completable(const PartialSequence& s, std::size_t n,
                                                const OracleOptions& opts = {},
                                                const ToleranceOptions& tol = {}) {
  return detail::decide(s, n, detail::Cone::Psd, opts, tol);
}

/// Certified infeasibility only: the minor scan of decide_pd_completable.
inline std::optional<Obstruction> pd_obstruction(const PartialSequence& s, std::size_t n,
                                                 const ToleranceOptions& tol = {}) {
  return detail::scan_minors(detail::known_up_to(s, 2 * n), n, detail::Cone::Pd, tol).obstruction;
}

struct WitnessOptions {
  std::size_t budget = 10000;
  std::uint64_t seed = 1;
};

/// Random partial positive definite instances on P (perturbed moment data
/// and free random values) until one carries an obstruction certificate.
inline std::optional<PartialSequence> find_witness(const Pattern& p, std::size_t n,
                                                   const WitnessOptions& opts = {},
                                                   const ToleranceOptions& tol = {}) {
  const Pattern inside = p.truncated(2 * n);
  if (inside.size() == 2 * n + 1) return std::nullopt;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t trial = 0; trial < opts.budget; ++trial) {
    std::map<std::size_t, double> values;
    if (trial % 2 == 0) {
      // moments of a few random atoms, then multiplicative noise
      const std::size_t atoms = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(n + 2));
      std::vector<double> m(2 * n + 1, 0.0);
      for (std::size_t a = 0; a < atoms; ++a) {
        const double x = gauss(rng);
        const double w = 0.1 + unit(rng);
        double power = w;
        for (double& mk : m) {
          mk += power;
          power *= x;
        }
      }
      const double sigma = trial % 4 == 0 ? 0.3 : 1.0;
      for (std::size_t k : inside) values[k] = m[k] * std::exp(sigma * gauss(rng));
    } else {
      for (std::size_t k : inside) {
        values[k] = k % 2 == 0 ? std::exp(1.5 * gauss(rng)) : gauss(rng);
      }
    }
    const PartialSequence candidate(values, 2 * n);
    if (!is_partial_positive_definite(candidate, tol)) continue;
    if (pd_obstruction(candidate, n, tol)) return candidate;
  }
  return std::nullopt;
}

}  // namespace hankel
