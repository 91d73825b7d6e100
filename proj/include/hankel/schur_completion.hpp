#pragma once

// Entry-by-entry positive definite completions. Each step borders H_n by one
// row and column and picks the new entries so that the trailing Schur
// complement stays positive.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hankel/core.hpp"
#include "hankel/lina.hpp"

namespace hankel {

struct CompletionCertificate {
  std::vector<double> completed;  // s_0 .. s_horizon
  std::string strategy;
  std::vector<std::pair<std::size_t, double>> per_order_min_eig;
  std::vector<double> margins_used;
  bool promises_pd = true;
  std::string representation;
  bool unique_psd = false;
  std::optional<double> epsilon;
  double max_reproduction_error = 0.0;
};

/// Min eigenvalue of every H_n, n = 0..floor(horizon/2).
inline std::vector<std::pair<std::size_t, double>> per_order_min_eigenvalues(
    std::span<const double> s) {
  std::vector<std::pair<std::size_t, double>> out;
  if (s.empty()) return out;
  for (std::size_t n = 0; 2 * n + 1 <= s.size(); ++n) {
    out.emplace_back(n, min_eigenvalue(hankel_matrix(s, n)));
  }
  return out;
}

/// Re-checks a completion: every H_n PD (or PSD when promises_pd is false).
inline bool certificate_holds(const CompletionCertificate& c, const ToleranceOptions& tol = {}) {
  for (std::size_t n = 0; 2 * n + 1 <= c.completed.size(); ++n) {
    const auto r = check_definiteness(hankel_matrix(c.completed, n), tol);
    if (c.promises_pd ? !r.is_pd : !r.is_psd) return false;
  }
  return true;
}

namespace detail {

inline Vector slice(std::span<const double> s, std::size_t from, std::size_t count) {
  Vector v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) v(static_cast<Eigen::Index>(i)) = s[from + i];
  return v;
}

// Slack for a free even entry: growth * max(1, q, s_0).
inline double slack(double q, double s0, const ToleranceOptions& tol) {
  return tol.growth * std::max({1.0, q, s0});
}

inline double threshold(std::span<const double> s, const ToleranceOptions& tol) {
  double scale = 1.0;
  for (double v : s) scale = std::max(scale, std::abs(v));
  return tol.pd_margin * scale;
}

// Cholesky of H_n built by bordering; throws NotPartialPD when H_n is not PD.
inline BorderedCholesky factor_leading(std::span<const double> s, std::size_t n,
                                       const ToleranceOptions& tol) {
  BorderedCholesky chol;
  const double thr = threshold(s.first(2 * n + 1), tol);
  for (std::size_t k = 0; k <= n; ++k) {
    if (!chol.extend(slice(s, k, k), s[2 * k], thr)) {
      throw Error(ErrorKind::NotPartialPD, "H_" + std::to_string(k) + " is not positive definite");
    }
  }
  return chol;
}

}  // namespace detail

struct EvenTail {
  double value = 0.0;
  double q = 0.0;
  double delta = 0.0;
};

/// s holds s_0 .. s_{2n+1}; returns s_{2n+2} = q + delta with
/// q = v^T H_n^{-1} v, v = (s_{n+1}, .., s_{2n+1}).
inline EvenTail complete_even_tail(std::span<const double> s, const ToleranceOptions& tol = {}) {
  if (s.size() < 2 || s.size() % 2 != 0) {
    throw Error(ErrorKind::LengthMismatch, "expected s_0 .. s_{2n+1} (even length)");
  }
  const std::size_t n = s.size() / 2 - 1;
  const auto chol = detail::factor_leading(s, n, tol);
  const Vector v = detail::slice(s, n + 1, n + 1);
  EvenTail out;
  out.q = chol.inner(v, v);
  out.delta = detail::slack(out.q, s[0], tol);
  out.value = out.q + out.delta;
  return out;
}

struct OddGapCheck {
  bool partial_pd = false;
  /// w^T H_{n-1}^{-1} w with w = (s_{n+1}, .., s_{2n}); s_{2n+2} must exceed it.
  double bound = 0.0;
  std::string diagnostic;
};

/// s holds s_0 .. s_{2n}; s_{2n+1} is missing and s_{2n+2} is given.
inline OddGapCheck check_odd_gap_partial_pd(std::span<const double> s, double s_next_even,
                                            const ToleranceOptions& tol = {}) {
  OddGapCheck out;
  if (s.empty() || s.size() % 2 != 1) {
    out.diagnostic = "expected s_0 .. s_{2n} (odd length)";
    return out;
  }
  const std::size_t n = s.size() / 2;
  BorderedCholesky chol;
  try {
    chol = detail::factor_leading(s, n, tol);
  } catch (const Error& e) {
    out.diagnostic = e.detail();
    return out;
  }
  const Vector w = detail::slice(s, n + 1, n);
  out.bound = chol.leading_inner(w, w, n);
  double scale = std::max(1.0, std::abs(s_next_even));
  for (double v : s) scale = std::max(scale, std::abs(v));
  if (!std::isfinite(s_next_even) || !(s_next_even - out.bound > tol.pd_margin * scale)) {
    out.diagnostic = "s_" + std::to_string(2 * n + 2) + " does not exceed w^T H^{-1} w";
    return out;
  }
  out.partial_pd = true;
  return out;
}

/// s_{2n+1} = v^T H_{n-1}^{-1} w with v = (s_n, .., s_{2n-1}), w = (s_{n+1}, .., s_{2n}).
/// The trailing 2x2 Schur complement of H_{n+1} is then diagonal.
inline double complete_odd_gap(std::span<const double> s, double s_next_even,
                               const ToleranceOptions& tol = {}) {
  const auto check = check_odd_gap_partial_pd(s, s_next_even, tol);
  if (!check.partial_pd) throw Error(ErrorKind::NotPartialPD, check.diagnostic);
  const std::size_t n = s.size() / 2;
  const auto chol = detail::factor_leading(s, n, tol);
  return chol.leading_inner(detail::slice(s, n, n), detail::slice(s, n + 1, n), n);
}

struct DoubleTail {
  double odd = 0.0;
  double even = 0.0;
  double delta = 0.0;
};

/// s holds s_0 .. s_{2n}; both s_{2n+1} and s_{2n+2} are chosen.
inline DoubleTail complete_double_tail(std::span<const double> s,
                                       const ToleranceOptions& tol = {}) {
  if (s.empty() || s.size() % 2 != 1) {
    throw Error(ErrorKind::LengthMismatch, "expected s_0 .. s_{2n} (odd length)");
  }
  const std::size_t n = s.size() / 2;
  const auto chol = detail::factor_leading(s, n, tol);
  const Vector w = detail::slice(s, n + 1, n);
  const double q = chol.leading_inner(w, w, n);
  DoubleTail out;
  out.odd = chol.leading_inner(detail::slice(s, n, n), w, n);
  out.delta = detail::slack(q, s[0], tol);
  // the trailing 2x2 Schur block of H_{n+1} is diag(d_n, delta)
  out.even = q + out.delta;
  return out;
}

/// Pattern families the inductive driver handles, or nullopt.
///   odd-subset  every index odd
///   prefix      {0, .., m}
///   prefix-odd  {0, .., m} plus odd indices
///   prime-like  odd indices plus 2, possibly with 0 (the primes are one case)
inline std::optional<std::string> schur_family(const Pattern& p) {
  const std::size_t m = p.prefix_length();
  bool low_even = false;
  for (std::size_t k : p) {
    if (k % 2 == 1 || k < m) continue;
    if (k == 2) {
      low_even = true;
      continue;
    }
    return std::nullopt;
  }
  if (p.is_odd_subset()) return "odd-subset";
  if (p.is_prefix()) return "prefix";
  if (low_even) return "prime-like";
  return "prefix-odd";
}

namespace detail {

// Weights on a Chebyshev grid over [-R, R] reproducing the fixed moments,
// pushed towards the analytic centre of {w > 0 : A w = b} so no weight is
// needlessly small. Returns the grid moments s_0 .. s_horizon, or nullopt when
// no strictly positive solution was found at this radius.
inline std::optional<std::vector<double>> grid_moments(
    const std::vector<std::pair<std::size_t, double>>& fixed, std::size_t horizon, double radius,
    std::size_t nodes) {
  const auto m = static_cast<Eigen::Index>(fixed.size());
  const auto N = static_cast<Eigen::Index>(nodes);
  const double pi = std::acos(-1.0);
  Vector u(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    u(j) = std::cos(pi * (static_cast<double>(j) + 0.5) / static_cast<double>(N));
  }
  // row k holds u^k; both sides are rescaled by R^k
  Matrix a(m, N);
  Vector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [k, value] = fixed[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < N; ++j) a(i, j) = std::pow(u(j), static_cast<double>(k));
    b(i) = value / std::pow(radius, static_cast<double>(k));
  }
  // without s_0 the first constraint still sets the order of magnitude
  const double mass = b(0) != 0 ? std::abs(b(0)) : 1.0;
  Vector w = Vector::Constant(N, mass / static_cast<double>(N));
  const double tol_res = 1e-13 * std::max(1.0, b.cwiseAbs().maxCoeff());
  bool feasible = false;
  for (int iter = 0; iter < 200; ++iter) {
    const Vector r = b - a * w;
    const Matrix aw = a * w.asDiagonal();
    // Newton step for -sum log w in the scaled variable dw = W z:
    // z = 1 + pinv(A W) (r - A W 1)
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(aw);
    const Vector z = Vector::Ones(N) + cod.solve(Vector(r - aw * Vector::Ones(N)));
    double step = 1.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (z(j) < 0) step = std::min(step, 0.95 / -z(j));
    }
    if (feasible) {
      // keep the equality, backtrack on the barrier
      auto barrier = [&](double t) {
        double f = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) f -= std::log(w(j) * (1.0 + t * z(j)));
        return f;
      };
      const double f0 = barrier(0.0);
      while (step > 1e-8 && !(barrier(step) <= f0 - 0.25 * step * z.squaredNorm())) step *= 0.5;
    }
    w = w.cwiseProduct(Vector::Ones(N) + step * z);
    const double res = (b - a * w).cwiseAbs().maxCoeff();
    if (res <= tol_res) feasible = true;
    if (feasible && z.squaredNorm() < 1e-6) break;
    if (!feasible && step < 1e-6) return std::nullopt;
  }
  if (!feasible || !(w.minCoeff() > 0)) return std::nullopt;
  std::vector<double> out(horizon + 1);
  Vector power = Vector::Ones(N);
  for (std::size_t k = 0; k <= horizon; ++k) {
    out[k] = w.dot(power) * std::pow(radius, static_cast<double>(k));
    power = power.cwiseProduct(u);
  }
  return out;
}

// Moments of a positive guide measure consistent with the fixed entries. The
// grid radius is tried at a few fixed values and at multiples of the growth
// rate of the data; the candidate whose own Hankel matrices are best
// conditioned wins.
inline std::optional<std::vector<double>> guide_moments(
    const std::vector<std::pair<std::size_t, double>>& fixed, std::size_t horizon) {
  if (fixed.empty()) return std::nullopt;
  const auto [k0, v0] = fixed.front();
  if (k0 == 0 && !(v0 > 0)) return std::nullopt;
  const double base = v0 != 0 ? std::abs(v0) : 1.0;
  double rate = 0.0;
  for (const auto& [k, value] : fixed) {
    if (k > k0) {
      rate = std::max(rate, std::pow(std::abs(value) / base, 1.0 / static_cast<double>(k - k0)));
    }
  }
  if (!(rate > 0) || !std::isfinite(rate)) rate = 1.0;
  const std::size_t nodes = std::max<std::size_t>(96, 4 * (horizon + 1));
  const std::size_t top = std::min(horizon / 2, kMaxEnumerationOrder);
  std::optional<std::vector<double>> best;
  double best_score = -1.0;
  // the absolute radii matter when the data says little about the spread
  std::vector<double> radii{0.5, 1.0, 1.5, 2.0};
  for (double factor : {1.05, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0}) radii.push_back(factor * rate);
  for (double radius : radii) {
    auto g = grid_moments(fixed, horizon, radius, nodes);
    if (!g) continue;
    double score = 1.0;
    for (std::size_t n = 0; n <= top; ++n) {
      const Matrix h = hankel_matrix(*g, n);
      score = std::min(score, min_eigenvalue(h) / scale_of(h));
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(g);
    }
  }
  return best;
}

}  // namespace detail

struct InductiveOptions {
  /// Value for s_0 when it is not specified.
  double seed_s0 = 1.0;
  /// Take free entries from a positive guide measure that matches the data;
  /// otherwise (or when no guide exists) use the growth slack alone.
  bool guided = true;
};

/// Completes s to s_0 .. s_{target_horizon} with every H_n positive definite.
inline CompletionCertificate complete_pattern_inductive(const PartialSequence& s,
                                                        std::size_t target_horizon,
                                                        const ToleranceOptions& tol = {},
                                                        const InductiveOptions& opts = {}) {
  tol.validate();
  if (!(opts.seed_s0 > 0) || !std::isfinite(opts.seed_s0)) {
    throw Error(ErrorKind::InvalidInput, "seed for s_0 must be positive");
  }
  const Pattern p = pattern_of(s);
  const auto family = schur_family(p);
  if (!family) {
    throw Error(ErrorKind::UnsupportedPattern,
                "pattern " + to_string(p) + " is outside the inductive families");
  }
  if (!p.empty() && target_horizon < p.max()) {
    throw Error(ErrorKind::InvalidInput, "target horizon is below the largest specified index");
  }
  if (covering_order(target_horizon) > kMaxOrder) {
    throw Error(ErrorKind::OrderTooLarge, "target horizon exceeds the order cap");
  }
  if (covering_order(s.horizon()) <= kMaxEnumerationOrder && !is_partial_positive_definite(s, tol)) {
    throw Error(ErrorKind::NotPartialPD, "input is not partial positive definite");
  }

  CompletionCertificate cert;
  cert.strategy = "schur:" + *family;
  std::vector<double> c;
  c.reserve(target_horizon + 2);

  if (auto s0 = s.at(0)) {
    c.push_back(*s0);
  } else if (s.at(1) && s.at(2)) {
    const double q = *s.at(1) * *s.at(1) / *s.at(2);
    c.push_back(std::max(opts.seed_s0, q + tol.growth * std::max(1.0, q)));
  } else {
    c.push_back(opts.seed_s0);
  }

  std::optional<std::vector<double>> guide;
  if (opts.guided && target_horizon > 0) {
    std::vector<std::pair<std::size_t, double>> fixed{{0, c[0]}};
    for (const auto& [k, value] : s.entries()) {
      if (k > 0) fixed.emplace_back(k, value);
    }
    if (fixed.size() <= 2 * kMaxEnumerationOrder) guide = detail::guide_moments(fixed, target_horizon);
  }

  double scale = std::max(1.0, std::abs(c[0]));
  auto thr = [&] { return tol.pd_margin * scale; };
  // slack for a free s_{2n+2} over its lower bound q: the guide's pivot when it
  // is comfortably positive, else the growth rule
  auto choose_delta = [&](std::size_t even, double q) {
    if (guide) {
      const double delta = (*guide)[even] - q;
      if (delta > 1e3 * tol.pd_margin * std::max(scale, std::abs((*guide)[even]))) return delta;
    }
    return detail::slack(q, c[0], tol);
  };
  BorderedCholesky chol;  // factor of H_n once s_0 .. s_{2n} are fixed
  if (!chol.extend(Vector(0), c[0], thr())) {
    throw Error(ErrorKind::NotPartialPD, "s_0 must be positive");
  }

  for (std::size_t n = 0; c.size() <= target_horizon; ++n) {
    const std::size_t odd = 2 * n + 1;
    const std::size_t even = 2 * n + 2;
    const auto given_odd = s.at(odd);
    const auto given_even = s.at(even);
    const Vector v = detail::slice(c, n, n);      // (s_n .. s_{2n-1})
    const Vector w = detail::slice(c, n + 1, n);  // (s_{n+1} .. s_{2n})

    double odd_value = 0.0;
    if (given_odd) {
      odd_value = *given_odd;
    } else if (given_even) {
      const double bound = chol.leading_inner(w, w, n);
      if (!(*given_even - bound > thr())) {
        throw Error(ErrorKind::NotPartialPD,
                    "s_" + std::to_string(even) + " does not exceed w^T H^{-1} w");
      }
      odd_value = chol.leading_inner(v, w, n);
      // the guide's value also works when it leaves a comfortable pivot
      if (guide) {
        Vector trial(static_cast<Eigen::Index>(n + 1));
        trial.head(static_cast<Eigen::Index>(n)) = w;
        trial(static_cast<Eigen::Index>(n)) = (*guide)[odd];
        const double pivot = *given_even - chol.inner(trial, trial);
        if (pivot > 1e3 * tol.pd_margin * std::max(scale, std::abs(*given_even))) {
          odd_value = (*guide)[odd];
        }
      }
    } else if (guide) {
      odd_value = (*guide)[odd];
    } else {
      odd_value = chol.leading_inner(v, w, n);
    }
    c.push_back(odd_value);
    if (c.size() > target_horizon) break;

    Vector border(static_cast<Eigen::Index>(n + 1));
    border.head(static_cast<Eigen::Index>(n)) = w;
    border(static_cast<Eigen::Index>(n)) = odd_value;
    double even_value = 0.0;
    if (given_even) {
      even_value = *given_even;
    } else {
      const double q = chol.inner(border, border);
      const double delta = choose_delta(even, q);
      even_value = q + delta;
      cert.margins_used.push_back(delta);
    }
    c.push_back(even_value);
    scale = std::max({scale, std::abs(odd_value), std::abs(even_value)});
    if (!chol.extend(border, even_value, thr())) {
      throw Error(given_odd && given_even ? ErrorKind::NotPartialPD : ErrorKind::IllConditioned,
                  "H_" + std::to_string(n + 1) + " lost positive definiteness");
    }
  }

  cert.completed = std::move(c);
  cert.per_order_min_eig = per_order_min_eigenvalues(cert.completed);
  for (const auto& [n, lambda] : cert.per_order_min_eig) {
    const double sc = scale_of(hankel_matrix(cert.completed, n));
    if (!(lambda > tol.pd_margin * sc)) {
      throw Error(ErrorKind::IllConditioned,
                  "H_" + std::to_string(n) + " min eigenvalue " + std::to_string(lambda) +
                      " is below the PD margin");
    }
  }
  return cert;
}

}  // namespace hankel
