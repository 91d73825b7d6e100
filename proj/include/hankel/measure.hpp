#pragma once

// Finite atomic representing measures: moments, recovery from a positive
// (sub)sequence through the Jacobi matrix, and the completions built on them
// (root map of an arithmetic pattern, geometric sequences, the PSD to PD lift).

#include <Eigen/Dense>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hankel/core.hpp"
#include "hankel/lina.hpp"
#include "hankel/schur_completion.hpp"

namespace hankel {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
  bool operator==(const Atom&) const = default;
};

/// Atoms sorted by location with positive weights.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!std::isfinite(atoms_[i].location) || !std::isfinite(atoms_[i].weight)) {
        throw Error(ErrorKind::NonFiniteEntry, "atom " + std::to_string(i) + " is not finite");
      }
      if (!(atoms_[i].weight > 0)) {
        throw Error(ErrorKind::InvalidInput, "atom weights must be positive");
      }
      if (i > 0 && !(atoms_[i].location > atoms_[i - 1].location)) {
        throw Error(ErrorKind::InvalidInput, "atom locations must be distinct");
      }
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  double mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight;
    return m;
  }

 private:
  std::vector<Atom> atoms_;
};

/// s_k = sum_i w_i x_i^k for k = 0..k_max.
inline std::vector<double> moments(const AtomicMeasure& m, std::size_t k_max) {
  const double log_max = std::log(DBL_MAX);
  for (const auto& a : m.atoms()) {
    if (std::abs(a.location) > 1.0 &&
        static_cast<double>(k_max) * std::log(std::abs(a.location)) + std::log(a.weight) >
            log_max - 1.0) {
      throw Error(ErrorKind::Overflow, "x^" + std::to_string(k_max) + " overflows for x = " +
                                           std::to_string(a.location));
    }
  }
  std::vector<double> s(k_max + 1, 0.0);
  for (const auto& a : m.atoms()) {
    long double p = a.weight;
    for (std::size_t k = 0; k <= k_max; ++k) {
      s[k] += static_cast<double>(p);
      p *= a.location;
    }
  }
  return s;
}

struct ExtractOptions {
  /// Relative pivot (against the diagonal entry) below which the rank is cut.
  double rank_tol = 1e-10;
  /// Pick the free recurrence coefficient so every atom is positive.
  bool positive_nodes = false;
  double reproduction_tol = 1e-8;
};

namespace detail {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Nodes and weights of the Jacobi matrix with diagonal a and off-diagonal b.
inline AtomicMeasure jacobi_measure(const std::vector<long double>& a,
                                    const std::vector<long double>& b, long double mass) {
  const auto r = static_cast<Eigen::Index>(a.size());
  if (r == 0) return {};
  LMatrix j = LMatrix::Zero(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    j(i, i) = a[static_cast<std::size_t>(i)];
    if (i + 1 < r) j(i, i + 1) = j(i + 1, i) = b[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<LMatrix> es(j);
  std::vector<Atom> atoms;
  for (Eigen::Index i = 0; i < r; ++i) {
    const long double v = es.eigenvectors()(0, i);
    const double w = static_cast<double>(mass * v * v);
    if (w > 0) atoms.push_back({static_cast<double>(es.eigenvalues()(i)), w});
  }
  // eigenvalues of an unreduced Jacobi matrix are distinct, but rounding can
  // merge two of them
  std::vector<Atom> merged;
  for (const auto& at : atoms) {
    if (!merged.empty() && !(at.location > merged.back().location)) {
      merged.back().weight += at.weight;
    } else {
      merged.push_back(at);
    }
  }
  return AtomicMeasure(std::move(merged));
}

}  // namespace detail

/// Atomic measure whose moments reproduce t_0 .. t_{2m}, from t of length
/// 2m+1 or 2m+2. The rank of H_m decides the number of atoms. With full rank
/// and odd length the last recurrence coefficient is free; it repeats the one
/// before (which gives the Gauss rule for Jacobi-type data).
inline AtomicMeasure extract_measure(std::span<const double> t, const ToleranceOptions& tol = {},
                                     const ExtractOptions& opts = {}) {
  if (t.empty()) throw Error(ErrorKind::InvalidInput, "no moments given");
  for (double v : t) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "moment is not finite");
  }
  const std::size_t m = (t.size() - 1) / 2;
  const bool has_next = t.size() % 2 == 0;
  const auto report = check_definiteness(hankel_matrix(t, m), tol);
  if (!report.is_psd) {
    throw Error(ErrorKind::NotPositive, "H_" + std::to_string(m) + " is not positive semidefinite");
  }
  if (t[0] <= 0) {
    if (std::all_of(t.begin(), t.end(), [&](double v) { return std::abs(v) <= tol.psd_tol * report.scale; })) {
      return {};
    }
    throw Error(ErrorKind::NotPositive, "t_0 = 0 but later moments are not");
  }

  // Cholesky H = R^T R, R upper, with one extra column when t_{2m+1} is known.
  const std::size_t cols = m + 1 + (has_next ? 1 : 0);
  auto entry = [&](std::size_t i, std::size_t j) { return static_cast<long double>(t[i + j]); };
  detail::LMatrix r = detail::LMatrix::Zero(static_cast<Eigen::Index>(m + 1),
                                            static_cast<Eigen::Index>(cols));
  std::size_t rank = 0;
  long double worst_relative = 1.0L;
  for (std::size_t k = 0; k <= m; ++k) {
    long double d = entry(k, k);
    for (std::size_t i = 0; i < k; ++i) d -= r(i, k) * r(i, k);
    const long double relative = d / entry(k, k);
    if (!(entry(k, k) > 0) || !(relative > opts.rank_tol)) break;
    worst_relative = std::min(worst_relative, relative);
    r(k, k) = std::sqrt(d);
    for (std::size_t j = k + 1; j < cols; ++j) {
      long double v = entry(k, j);
      for (std::size_t i = 0; i < k; ++i) v -= r(i, k) * r(i, j);
      r(k, j) = v / r(k, k);
    }
    rank = k + 1;
  }

  std::vector<long double> a;
  std::vector<long double> b;
  for (std::size_t j = 0; j < rank; ++j) {
    const bool known = j + 1 < cols;
    if (!known) break;
    long double aj = r(j, j + 1) / r(j, j);
    if (j > 0) aj -= r(j - 1, j) / r(j - 1, j - 1);
    a.push_back(aj);
    if (j + 1 < rank) b.push_back(r(j + 1, j + 1) / r(j, j));
  }
  if (a.size() < rank) {
    // full rank, odd length: the last diagonal coefficient is free
    long double next = a.empty() ? 1.0L : a.back();
    if (opts.positive_nodes && !a.empty()) {
      // LDL^T pivots of the tridiagonal matrix; the last one must stay positive
      long double p = a[0];
      bool ok = p > 0;
      for (std::size_t i = 1; i < a.size() && ok; ++i) {
        p = a[i] - b[i - 1] * b[i - 1] / p;
        ok = p > 0;
      }
      if (!ok) throw Error(ErrorKind::StieltjesViolation, "recovered atoms are not all positive");
      const long double required = b.back() * b.back() / p;
      next = std::max(next, 2.0L * required);
    }
    a.push_back(next);
  }

  const AtomicMeasure mu = detail::jacobi_measure(a, b, static_cast<long double>(t[0]));

  // the recovered measure must reproduce t_0 .. t_{2m}
  const auto back = moments(mu, 2 * m);
  double scale = 0.0;
  for (std::size_t k = 0; k <= 2 * m; ++k) scale = std::max(scale, std::abs(t[k]));
  double err = 0.0;
  for (std::size_t k = 0; k <= 2 * m; ++k) err = std::max(err, std::abs(back[k] - t[k]));
  if (err > opts.reproduction_tol * scale) {
    if (worst_relative < 1e-6L) {
      throw Error(ErrorKind::IllConditioned,
                  "pivots of H_" + std::to_string(m) + " span too many orders; reduce m");
    }
    throw Error(ErrorKind::NotPositive,
                "no atomic measure reproduces the moments (error " + std::to_string(err / scale) +
                    ")");
  }
  return mu;
}

namespace detail {

inline std::vector<double> pattern_values(const PartialSequence& s, std::size_t d, std::size_t l0) {
  if (d == 0) throw Error(ErrorKind::InvalidInput, "step d must be positive");
  if (l0 % 2 != 0) throw Error(ErrorKind::BadOffset, "offset l0 must be even");
  if (s.empty()) throw Error(ErrorKind::InvalidInput, "no entries given");
  const std::size_t count = s.size();
  std::vector<std::size_t> idx(count);
  for (std::size_t k = 0; k < count; ++k) idx[k] = d * k + l0;
  if (pattern_of(s) != Pattern(std::move(idx))) {
    throw Error(ErrorKind::UnsupportedPattern, "pattern " + to_string(pattern_of(s)) + " is not " +
                                                   std::to_string(d) + "*{0.." +
                                                   std::to_string(count - 1) + "}+" +
                                                   std::to_string(l0));
  }
  return subsequence(s, d, l0, count);
}

inline double real_root(double x, std::size_t d) {
  if (d == 1) return x;
  const double r = std::pow(std::abs(x), 1.0 / static_cast<double>(d));
  return x < 0 ? -r : r;
}

inline void fill_orders(CompletionCertificate& c, const ToleranceOptions& tol) {
  c.per_order_min_eig = per_order_min_eigenvalues(c.completed);
  bool pd = true;
  for (const auto& [n, lambda] : c.per_order_min_eig) {
    const double sc = scale_of(hankel_matrix(c.completed, n));
    if (!(lambda >= -tol.psd_tol * sc)) {
      throw Error(ErrorKind::IllConditioned,
                  "H_" + std::to_string(n) + " of the synthesized sequence is not PSD");
    }
    pd = pd && lambda > tol.pd_margin * sc;
  }
  c.promises_pd = pd;
}

}  // namespace detail

/// PSD completion of data on d*{0..m}+l0 through the root map of the
/// measure of t_k = s_{dk+l0}: an atom (x, w) becomes (x^{1/d}, w / x^{l0/d}).
inline CompletionCertificate complete_arithmetic_pattern(const PartialSequence& s, std::size_t d,
                                                         std::size_t l0, std::size_t target_horizon,
                                                         const ToleranceOptions& tol = {}) {
  tol.validate();
  const std::vector<double> t = detail::pattern_values(s, d, l0);
  const std::size_t top = d * (t.size() - 1) + l0;
  if (target_horizon < top) {
    throw Error(ErrorKind::InvalidInput, "target horizon is below the largest specified index");
  }
  if (covering_order(target_horizon) > kMaxOrder) {
    throw Error(ErrorKind::OrderTooLarge, "target horizon exceeds the order cap");
  }
  ExtractOptions eo;
  if (d % 2 == 0) {
    // Stieltjes condition: the shifted sequence must be positive too
    if (t.size() >= 2) {
      const std::size_t ms = (t.size() - 2) / 2;
      const auto rs = check_definiteness(hankel_matrix(std::span(t).subspan(1), ms), tol);
      if (!rs.is_psd) {
        throw Error(ErrorKind::StieltjesViolation,
                    "shifted subsequence is not positive; the atoms cannot all be nonnegative");
      }
    }
    eo.positive_nodes = true;
  }
  const AtomicMeasure mu = extract_measure(t, tol, eo);

  double span = 0.0;
  for (const auto& a : mu.atoms()) span = std::max(span, std::abs(a.location));
  std::vector<Atom> mapped;
  for (const auto& a : mu.atoms()) {
    if (std::abs(a.location) <= 1e-12 * std::max(1.0, span)) {
      // a zero atom only feeds t_0 = s_{l0}; with l0 = 0 it stays at 0
      if (l0 == 0) {
        mapped.push_back({0.0, a.weight});
        continue;
      }
      throw Error(ErrorKind::NotPositive, "an atom at 0 carries s_" + std::to_string(l0) +
                                              ", which no measure can reproduce with l0 > 0");
    }
    if (d % 2 == 0 && a.location < 0) {
      throw Error(ErrorKind::StieltjesViolation,
                  "recovered atom " + std::to_string(a.location) + " is negative");
    }
    const double y = detail::real_root(a.location, d);
    mapped.push_back({y, a.weight / std::pow(y, static_cast<double>(l0))});
  }
  const AtomicMeasure image(std::move(mapped));

  CompletionCertificate c;
  c.strategy = "measure";
  c.representation = "gauss-truncated";
  c.completed = moments(image, target_horizon);
  double scale = 0.0;
  for (double v : t) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = std::abs(c.completed[d * k + l0] - t[k]) / std::max(scale, DBL_MIN);
    c.max_reproduction_error = std::max(c.max_reproduction_error, e);
  }
  if (c.max_reproduction_error > 1e-8) {
    throw Error(ErrorKind::IllConditioned, "completion reproduces the data only to " +
                                               std::to_string(c.max_reproduction_error));
  }
  detail::fill_orders(c, tol);
  return c;
}

/// s_k = a r^k from the consecutive values s_0 .. s_m (m >= 2); the only PSD
/// completion of such data.
inline CompletionCertificate complete_geometric(const PartialSequence& s, std::size_t target_horizon,
                                                const ToleranceOptions& tol = {}) {
  tol.validate();
  const Pattern p = pattern_of(s);
  if (!p.is_prefix() || p.size() < 3) {
    throw Error(ErrorKind::NotGeometric, "need consecutive values s_0, s_1, s_2, ...");
  }
  if (target_horizon < p.max()) {
    throw Error(ErrorKind::InvalidInput, "target horizon is below the largest specified index");
  }
  const double a = s.value(0);
  if (!(a > 0)) throw Error(ErrorKind::NotGeometric, "s_0 must be positive");
  const double r = s.value(1) / a;
  for (std::size_t k = 1; k < p.size(); ++k) {
    const double want = s.value(k - 1) * r;
    const double got = s.value(k);
    if (std::abs(got - want) > 1e-10 * std::max({std::abs(got), std::abs(want), a * DBL_MIN})) {
      throw Error(ErrorKind::NotGeometric, "s_" + std::to_string(k) + " breaks the ratio " +
                                               std::to_string(r));
    }
  }
  CompletionCertificate c;
  c.strategy = "geometric";
  c.representation = "single-atom";
  c.unique_psd = true;
  c.completed.resize(target_horizon + 1);
  double v = a;
  for (std::size_t k = 0; k <= target_horizon; ++k) {
    c.completed[k] = s.is_specified(k) ? s.value(k) : v;
    v *= r;
  }
  detail::fill_orders(c, tol);
  return c;
}

/// PSD completer used by the lift: (data, target horizon) -> certificate.
using PsdCompleter =
    std::function<CompletionCertificate(const PartialSequence&, std::size_t target_horizon)>;

inline PsdCompleter arithmetic_completer(std::size_t d, std::size_t l0,
                                         const ToleranceOptions& tol = {}) {
  return [d, l0, tol](const PartialSequence& s, std::size_t horizon) {
    return complete_arithmetic_pattern(s, d, l0, horizon, tol);
  };
}

struct LiftOptions {
  int bisection_steps = 40;
  /// The lift uses this fraction of the largest admissible epsilon.
  double fraction = 0.25;
};

/// Subtracts eps times the Hilbert moments, PSD-completes what is left and
/// adds eps times the Hilbert moments back. The result is PD with min
/// eigenvalue at least eps * lambda_min(Hilbert H_n).
inline CompletionCertificate lift_psd_to_pd(const PartialSequence& s, const PsdCompleter& completer,
                                            std::size_t target_horizon,
                                            const ToleranceOptions& tol = {},
                                            const LiftOptions& opts = {}) {
  tol.validate();
  if (s.empty()) throw Error(ErrorKind::InvalidInput, "no entries given");
  const Pattern p = pattern_of(s);
  if (target_horizon < p.max()) {
    throw Error(ErrorKind::InvalidInput, "target horizon is below the largest specified index");
  }
  const PartialSequence a = s.with_horizon(std::max(s.horizon(), p.max()));
  double scale = 1.0;
  for (const auto& [k, v] : a.entries()) scale = std::max(scale, std::abs(v));

  // fully specified and already PD: nothing to lift
  if (p.is_prefix() && p.max() == target_horizon) {
    std::vector<double> full;
    for (const auto& [k, v] : a.entries()) full.push_back(v);
    bool pd = true;
    for (std::size_t n = 0; 2 * n < full.size() && pd; ++n) {
      pd = check_definiteness(hankel_matrix(full, n), tol).is_pd;
    }
    if (pd) {
      CompletionCertificate c;
      c.strategy = "lift";
      c.representation = "given";
      c.epsilon = 0.0;
      c.completed = std::move(full);
      detail::fill_orders(c, tol);
      return c;
    }
  }
  if (!is_partial_positive_definite(a, tol)) {
    throw Error(ErrorKind::NotPartialPD, "input is not partial positive definite");
  }

  auto shifted = [&](double eps) {
    std::map<std::size_t, double> e;
    for (const auto& [k, v] : a.entries()) e.emplace(k, v - eps / static_cast<double>(k + 1));
    return PartialSequence(std::move(e), a.horizon());
  };
  const double eps_max = a.at(0).value_or(scale);
  double lo = 0.0;
  double hi = eps_max;
  if (is_partial_positive_definite(shifted(hi), tol)) {
    lo = hi;
  } else {
    for (int i = 0; i < opts.bisection_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (is_partial_positive_definite(shifted(mid), tol)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  const double eps = opts.fraction * lo;
  if (!(eps > 1e-14 * scale)) {
    throw Error(ErrorKind::EpsilonUnderflow, "no usable epsilon above 1e-14 * scale");
  }

  CompletionCertificate inner = completer(shifted(eps), target_horizon);
  CompletionCertificate c;
  c.strategy = "lift";
  c.representation = inner.representation;
  c.epsilon = eps;
  c.completed = std::move(inner.completed);
  for (std::size_t k = 0; k < c.completed.size(); ++k) {
    c.completed[k] += eps / static_cast<double>(k + 1);
  }
  for (const auto& [k, v] : a.entries()) {
    c.max_reproduction_error =
        std::max(c.max_reproduction_error, std::abs(c.completed[k] - v) / scale);
  }
  detail::fill_orders(c, tol);
  return c;
}

/// Positive definite completion from a positive measure on a grid that
/// matches every specified moment; the gaps take the measure's moments. This
/// is the constructive side of scaled patterns d*P, where no entry-by-entry
/// rule applies.
inline CompletionCertificate complete_grid_measure(const PartialSequence& s,
                                                   std::size_t target_horizon,
                                                   const ToleranceOptions& tol = {}) {
  tol.validate();
  if (s.empty()) throw Error(ErrorKind::InvalidInput, "nothing to complete");
  if (target_horizon < s.horizon()) {
    throw Error(ErrorKind::InvalidInput, "target horizon is below the input horizon");
  }
  if (covering_order(target_horizon) > kMaxOrder) {
    throw Error(ErrorKind::OrderTooLarge, "target horizon exceeds the order cap");
  }
  if (!is_partial_positive_definite(s, tol)) {
    throw Error(ErrorKind::NotPartialPD, "input is not partial positive definite");
  }
  const std::vector<std::pair<std::size_t, double>> fixed(s.entries().begin(), s.entries().end());
  auto guide = detail::guide_moments(fixed, target_horizon);
  if (!guide) {
    throw Error(ErrorKind::IllConditioned, "no positive grid measure reproduces the data");
  }
  CompletionCertificate c;
  c.strategy = "measure:grid";
  c.representation = "grid";
  c.completed = std::move(*guide);
  double scale = 1.0;
  for (const auto& [k, v] : fixed) scale = std::max(scale, std::abs(v));
  for (const auto& [k, v] : fixed) {
    c.max_reproduction_error = std::max(c.max_reproduction_error, std::abs(c.completed[k] - v) / scale);
    c.completed[k] = v;
  }
  c.per_order_min_eig = per_order_min_eigenvalues(c.completed);
  for (const auto& [n, lambda] : c.per_order_min_eig) {
    const double margin = tol.pd_margin * scale_of(hankel_matrix(c.completed, n));
    if (!(lambda > margin)) {
      throw Error(ErrorKind::IllConditioned,
                  "grid measure leaves H_" + std::to_string(n) + " without a PD margin");
    }
  }
  return c;
}

}  // namespace hankel
