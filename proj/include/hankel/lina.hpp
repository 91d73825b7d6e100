#pragma once

// Hankel matrices over (partial) sequences: definiteness reports, Schur
// complements, fully specified principal submatrices and partial positivity.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hankel/core.hpp"

namespace hankel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kMaxOrder = 64;
inline constexpr std::size_t kMaxEnumerationOrder = 16;

/// Dense H_n = [s_{i+j}] for i, j = 0..n. Needs s.size() >= 2n+1.
inline Matrix hankel_matrix(std::span<const double> s, std::size_t n) {
  if (s.size() < 2 * n + 1) {
    throw Error(ErrorKind::LengthMismatch, "H_" + std::to_string(n) + " needs " +
                                               std::to_string(2 * n + 1) + " values, got " +
                                               std::to_string(s.size()));
  }
  Matrix h(n + 1, n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) h(i, j) = s[i + j];
  }
  return h;
}

/// max(1, largest |entry|).
inline double scale_of(const Matrix& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// s_k = 1/(k+1), the moments of Lebesgue measure on [0,1].
inline std::vector<double> hilbert_moments(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = 1.0 / static_cast<double>(k + 1);
  return out;
}

class HankelView {
 public:
  HankelView(std::size_t order, std::vector<std::optional<double>> values)
      : order_(order), values_(std::move(values)) {
    if (values_.size() != 2 * order_ + 1) {
      throw Error(ErrorKind::LengthMismatch, "a view of order " + std::to_string(order_) +
                                                 " carries " + std::to_string(2 * order_ + 1) +
                                                 " values");
    }
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_ + 1; }
  const std::vector<std::optional<double>>& values() const noexcept { return values_; }

  bool is_specified(std::size_t k) const { return k < values_.size() && values_[k].has_value(); }
  std::optional<double> at(std::size_t i, std::size_t j) const { return values_.at(i + j); }

  bool fully_specified() const {
    return std::all_of(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); });
  }

  std::vector<std::size_t> missing() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!values_[k]) out.push_back(k);
    }
    return out;
  }

  /// H[rows]; every s_{i+j} for i, j in rows must be specified.
  Matrix principal(std::span<const std::size_t> rows) const {
    Matrix m(rows.size(), rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < rows.size(); ++b) {
        const auto& v = values_.at(rows[a] + rows[b]);
        if (!v) {
          throw Error(ErrorKind::MissingIndex,
                      "s_" + std::to_string(rows[a] + rows[b]) + " is not specified");
        }
        m(a, b) = *v;
      }
    }
    return m;
  }

  Matrix matrix() const {
    std::vector<std::size_t> rows(size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return principal(rows);
  }

 private:
  std::size_t order_;
  std::vector<std::optional<double>> values_;
};

inline HankelView hankel_view(const PartialSequence& s, std::size_t n,
                         std::size_t max_order = kMaxOrder) {
  if (n > max_order) {
    throw Error(ErrorKind::OrderTooLarge,
                "order " + std::to_string(n) + " exceeds the cap " + std::to_string(max_order));
  }
  std::vector<std::optional<double>> values(2 * n + 1);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = s.at(k);
  return HankelView(n, std::move(values));
}

inline HankelView hankel_view(std::span<const double> s, std::size_t n,
                         std::size_t max_order = kMaxOrder) {
  if (n > max_order) {
    throw Error(ErrorKind::OrderTooLarge,
                "order " + std::to_string(n) + " exceeds the cap " + std::to_string(max_order));
  }
  if (s.size() < 2 * n + 1) {
    throw Error(ErrorKind::LengthMismatch, "not enough values for H_" + std::to_string(n));
  }
  return HankelView(n, std::vector<std::optional<double>>(s.begin(), s.begin() + 2 * n + 1));
}

struct PsdReport {
  bool is_pd = false;
  bool is_psd = false;
  double min_eigenvalue = 0.0;
  /// Order of the first leading block H_k whose pivot falls below the PD
  /// threshold; nullopt when the matrix is PD.
  std::optional<std::size_t> failing_leading_order;
  double scale = 1.0;
};

/// Works for any symmetric matrix, not only Hankel ones.
inline PsdReport check_definiteness(const Matrix& h, const ToleranceOptions& tol = {}) {
  if (!h.allFinite()) throw Error(ErrorKind::NonFiniteEntry, "matrix has a non-finite entry");
  PsdReport r;
  r.scale = scale_of(h);
  r.min_eigenvalue = min_eigenvalue(h);
  const double pd_threshold = tol.pd_margin * r.scale;
  r.is_pd = r.min_eigenvalue > pd_threshold;
  r.is_psd = r.min_eigenvalue >= -tol.psd_tol * r.scale;
  if (!r.is_pd) {
    // Unpivoted LDL^T: pivot k is det H_k / det H_{k-1}.
    const Eigen::Index n = h.rows();
    Matrix a = h;
    std::size_t failing = static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double pivot = a(k, k);
      if (!(pivot > pd_threshold)) {
        failing = static_cast<std::size_t>(k);
        break;
      }
      for (Eigen::Index i = k + 1; i < n; ++i) {
        const double f = a(i, k) / pivot;
        for (Eigen::Index j = k + 1; j <= i; ++j) a(i, j) -= f * a(j, k);
      }
      for (Eigen::Index i = k + 1; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = a(j, i);
      }
    }
    r.failing_leading_order = failing;
  }
  return r;
}

inline PsdReport check_definiteness(const HankelView& h, const ToleranceOptions& tol = {}) {
  if (!h.fully_specified()) {
    throw Error(ErrorKind::MissingIndex, "check_definiteness needs a fully specified view");
  }
  return check_definiteness(h.matrix(), tol);
}

/// C - B^T A^{-1} B for the split of h at row/column alpha.
inline Matrix schur_complement(const Matrix& h, std::size_t alpha,
                               const ToleranceOptions& tol = {}) {
  const auto n = static_cast<std::size_t>(h.rows());
  if (alpha > n) throw Error(ErrorKind::InvalidInput, "block size exceeds the matrix");
  const auto a = static_cast<Eigen::Index>(alpha);
  const auto c = static_cast<Eigen::Index>(n - alpha);
  if (alpha == 0) return h;
  Eigen::FullPivLU<Matrix> lu(h.topLeftCorner(a, a));
  lu.setThreshold(tol.pd_margin);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::SingularBlock,
                "leading " + std::to_string(alpha) + "x" + std::to_string(alpha) +
                    " block is singular");
  }
  if (c == 0) return Matrix(0, 0);
  const Matrix b = h.topRightCorner(a, c);
  return h.bottomRightCorner(c, c) - b.transpose() * lu.solve(b);
}

inline Matrix schur_complement(const HankelView& h, std::size_t alpha,
                               const ToleranceOptions& tol = {}) {
  return schur_complement(h.matrix(), alpha, tol);
}

namespace detail {

// Bron-Kerbosch with pivoting over rows, adjacency as bitmasks (n <= 16).
inline void maximal_cliques(std::uint32_t r, std::uint32_t p, std::uint32_t x,
                            const std::vector<std::uint32_t>& adj,
                            std::vector<std::uint32_t>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  const std::uint32_t px = p | x;
  int pivot = 0;
  int best = -1;
  for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
    if (!(px >> u & 1U)) continue;
    const int cnt = std::popcount(p & adj[u]);
    if (cnt > best) {
      best = cnt;
      pivot = u;
    }
  }
  std::uint32_t candidates = p & ~adj[pivot];
  for (int v = 0; v < static_cast<int>(adj.size()); ++v) {
    if (!(candidates >> v & 1U)) continue;
    maximal_cliques(r | (1U << v), p & adj[v], x & adj[v], adj, out);
    p &= ~(1U << v);
    x |= 1U << v;
  }
}

}  // namespace detail

/// Maximal row sets alpha of H with every s_{i+j}, i, j in alpha, specified.
/// Sorted lexicographically; empty when no diagonal entry is specified.
inline std::vector<std::vector<std::size_t>> fully_specified_principal_index_sets(
    const HankelView& h) {
  if (h.order() > kMaxEnumerationOrder) {
    throw Error(ErrorKind::OrderTooLarge, "principal-set enumeration is capped at order " +
                                              std::to_string(kMaxEnumerationOrder));
  }
  const std::size_t n = h.size();
  std::vector<std::uint32_t> adj(n, 0);
  std::uint32_t admissible = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (h.is_specified(2 * i)) admissible |= 1U << i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (admissible >> i & 1U) && (admissible >> j & 1U) &&
          h.is_specified(i + j)) {
        adj[i] |= 1U << j;
      }
    }
  }
  std::vector<std::uint32_t> masks;
  if (admissible != 0) detail::maximal_cliques(0, admissible, 0, adj, masks);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(masks.size());
  for (std::uint32_t m : masks) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (m >> i & 1U) rows.push_back(i);
    }
    out.push_back(std::move(rows));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PartialReport {
  bool partial_pd = true;
  bool partial_psd = true;
  std::size_t order = 0;
  /// Maximal set with the smallest relative min eigenvalue.
  std::optional<std::vector<std::size_t>> weakest_set;
  double weakest_min_eigenvalue = std::numeric_limits<double>::infinity();
};

/// Checks every maximal fully specified principal submatrix of H_n with
/// n = covering_order(horizon). Smaller orders add nothing: H_{n'} is a
/// leading block of H_n, so its principal submatrices are ones of H_n too.
inline PartialReport check_partial(const PartialSequence& s, const ToleranceOptions& tol = {}) {
  PartialReport out;
  out.order = covering_order(s.horizon());
  const HankelView h = hankel_view(s, out.order, kMaxEnumerationOrder);
  double weakest_relative = std::numeric_limits<double>::infinity();
  for (const auto& rows : fully_specified_principal_index_sets(h)) {
    const PsdReport r = check_definiteness(h.principal(rows), tol);
    out.partial_pd = out.partial_pd && r.is_pd;
    out.partial_psd = out.partial_psd && r.is_psd;
    const double relative = r.min_eigenvalue / r.scale;
    if (relative < weakest_relative) {
      weakest_relative = relative;
      out.weakest_set = rows;
      out.weakest_min_eigenvalue = r.min_eigenvalue;
    }
  }
  return out;
}

inline bool is_partial_positive_definite(const PartialSequence& s,
                                         const ToleranceOptions& tol = {}) {
  return check_partial(s, tol).partial_pd;
}

inline bool is_partial_positive_semidefinite(const PartialSequence& s,
                                             const ToleranceOptions& tol = {}) {
  return check_partial(s, tol).partial_psd;
}

struct WeightedSum {
  double alpha = 1.0;
  double beta = 1.0;
};
struct Product {};
using Combine = std::variant<WeightedSum, Product>;

/// alpha*s + beta*t (alpha, beta >= 0) or the term-wise product s_k t_k.
inline std::vector<double> pointwise_combine(std::span<const double> s, std::span<const double> t,
                                             const Combine& op) {
  if (s.size() != t.size()) {
    throw Error(ErrorKind::LengthMismatch, "sequences have lengths " + std::to_string(s.size()) +
                                               " and " + std::to_string(t.size()));
  }
  std::vector<double> out(s.size());
  if (const auto* w = std::get_if<WeightedSum>(&op)) {
    if (!(w->alpha >= 0) || !(w->beta >= 0)) {
      throw Error(ErrorKind::InvalidInput, "weights must be nonnegative");
    }
    for (std::size_t k = 0; k < s.size(); ++k) out[k] = w->alpha * s[k] + w->beta * t[k];
  } else {
    for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] * t[k];
  }
  return out;
}

/// Cholesky factor of a growing SPD matrix; adding a row costs O(n^2).
class BorderedCholesky {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(l_.rows()); }
  const Matrix& factor() const noexcept { return l_; }

  /// x = A^{-1} b.
  Vector solve(const Vector& b) const {
    if (size() == 0) return Vector(0);
    Vector y = l_.triangularView<Eigen::Lower>().solve(b);
    return l_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  /// b^T A^{-1} c.
  double inner(const Vector& b, const Vector& c) const {
    if (size() == 0) return 0.0;
    const Vector yb = l_.triangularView<Eigen::Lower>().solve(b);
    const Vector yc = l_.triangularView<Eigen::Lower>().solve(c);
    return yb.dot(yc);
  }

  /// b^T A_k^{-1} c for the leading k x k block A_k (its factor is the
  /// leading block of this one).
  double leading_inner(const Vector& b, const Vector& c, std::size_t k) const {
    if (k == 0) return 0.0;
    const auto kk = static_cast<Eigen::Index>(k);
    const auto lk = l_.topLeftCorner(kk, kk).triangularView<Eigen::Lower>();
    const Vector yb = lk.solve(b);
    const Vector yc = lk.solve(c);
    return yb.dot(yc);
  }

  /// Squared pivot a - b^T A^{-1} b that appending [b; a] would produce.
  double pivot(const Vector& b, double a) const { return a - inner(b, b); }

  /// Appends a row/column; returns false (and leaves the factor unchanged)
  /// when the new pivot is not above threshold.
  bool extend(const Vector& b, double a, double threshold) {
    const auto n = l_.rows();
    Vector y = n == 0 ? Vector(0) : Vector(l_.triangularView<Eigen::Lower>().solve(b));
    const double p = a - y.squaredNorm();
    if (!(p > threshold)) return false;
    Matrix next = Matrix::Zero(n + 1, n + 1);
    next.topLeftCorner(n, n) = l_;
    next.block(n, 0, 1, n) = y.transpose();
    next(n, n) = std::sqrt(p);
    l_ = std::move(next);
    return true;
  }

 private:
  Matrix l_ = Matrix(0, 0);
};

}  // namespace hankel
