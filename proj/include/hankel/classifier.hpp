#pragma once

// Completability of a pattern from the pattern alone. Negative answers always
// come with a validated witness instance; positive ones name a strategy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hankel/core.hpp"
#include "hankel/lina.hpp"
#include "hankel/measure.hpp"
#include "hankel/oracle.hpp"
#include "hankel/schur_completion.hpp"

namespace hankel {

enum class Status {
  PdCompletable,
  PsdCompletable,
  NotPsdCompletable,
  NotPdCompletable,
  Unknown,
};

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::PdCompletable: return "PD_COMPLETABLE";
    case Status::PsdCompletable: return "PSD_COMPLETABLE";
    case Status::NotPsdCompletable: return "NOT_PSD_COMPLETABLE";
    case Status::NotPdCompletable: return "NOT_PD_COMPLETABLE";
    case Status::Unknown: return "UNKNOWN";
  }
  return "?";
}

enum class Answer { Yes, No, Unknown };

inline std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Unknown: return "unknown";
  }
  return "?";
}

/// One side (definite or semidefinite) of a verdict.
struct Side {
  Answer answer = Answer::Unknown;
  std::string rule;
  /// Partial positive (semi)definite instance without a completion.
  std::optional<PartialSequence> witness;
  /// Order at which the oracle certified the witness.
  std::size_t witness_order = 0;
};

struct PatternVerdict {
  Pattern pattern;  // P restricted to [0, horizon]
  std::size_t horizon = 0;
  Side pd;
  Side psd;
  std::optional<std::string> strategy;

  /// Headline: a definite "no" first, then "yes", then the semidefinite side.
  Status status() const {
    if (pd.answer == Answer::No) return Status::NotPdCompletable;
    if (pd.answer == Answer::Yes) return Status::PdCompletable;
    if (psd.answer == Answer::No) return Status::NotPsdCompletable;
    if (psd.answer == Answer::Yes) return Status::PsdCompletable;
    return Status::Unknown;
  }

  const std::string& rule() const {
    const Status s = status();
    return s == Status::NotPsdCompletable || s == Status::PsdCompletable ? psd.rule : pd.rule;
  }

  bool negative() const {
    const Status s = status();
    return s == Status::NotPdCompletable || s == Status::NotPsdCompletable;
  }
};

struct Reduction {
  Pattern reduced;
  std::size_t d = 1;
  std::size_t l0 = 0;
};

/// P = d P' + l0 with d as large as possible and then l0 even and as large as
/// possible. d = 1, l0 = largest even <= min(P) always works.
inline Reduction reduce_pattern(const Pattern& p) {
  if (p.empty()) throw Error(ErrorKind::InvalidInput, "cannot reduce the empty pattern");
  const std::size_t lo = p.min();
  std::size_t g = 0;
  for (std::size_t k : p) g = std::gcd(g, k - lo);
  if (g == 0) g = 1;
  for (std::size_t d = g; d >= 1; --d) {
    if (g % d != 0) continue;
    // largest l0 <= min(P), l0 = min(P) mod d, l0 even
    std::optional<std::size_t> l0;
    for (std::size_t c = lo;; c -= d) {
      if (c % 2 == 0) {
        l0 = c;
        break;
      }
      if (c < d) break;
    }
    if (!l0) continue;
    std::vector<std::size_t> reduced;
    for (std::size_t k : p) reduced.push_back((k - *l0) / d);
    return {Pattern(std::move(reduced)), d, *l0};
  }
  return {p, 1, 0};  // unreachable: d = 1 always succeeds
}

struct CatalogEntry {
  Pattern pattern;
  std::size_t order;  // H_order carries the pattern
  std::vector<std::optional<double>> witness;
  std::string rule;
};

/// Patterns of H_2 and H_3 known not to be positive definite completable.
/// Every witness keeps its odd entries positive so that it survives being
/// spread out with an even step.
inline const std::vector<CatalogEntry>& negative_catalog() {
  static const std::vector<CatalogEntry> catalog = [] {
    const std::optional<double> q;
    return std::vector<CatalogEntry>{
        {Pattern{0, 1, 3, 4}, 2, {1.0, 0.5, q, 0.125, 1.0 / 16}, "forbidden-3x3"},
        {Pattern{0, 1, 4}, 2, {1.0, 0.5, q, q, 1.0 / 16}, "forbidden-3x3"},
        {Pattern{0, 3, 4}, 2, {1.0 / 16, q, q, 0.5, 1.0}, "forbidden-3x3"},
        {Pattern{0, 1, 2, 4, 5, 6}, 3, {1.0, 0.25, 0.8, q, 0.8, 0.8, 0.9}, "forbidden-4x4"},
    };
  }();
  return catalog;
}

struct ForbiddenHit {
  /// Rows a, a + c, ..., an arithmetic progression, so H[rows] is Hankel.
  std::vector<std::size_t> rows;
  std::size_t catalog_index = 0;
  std::string rule;
};

/// First principal submatrix H[rows] of H_n, n = horizon / 2, with rows in
/// arithmetic progression whose specified/missing pattern is in the catalog.
inline std::optional<ForbiddenHit> contains_forbidden_submatrix_pattern(const Pattern& p,
                                                                        std::size_t horizon) {
  const std::size_t n = horizon / 2;
  if (n > kMaxOrder) throw Error(ErrorKind::OrderTooLarge, "horizon exceeds the order cap");
  const auto& catalog = negative_catalog();
  for (std::size_t size : {3u, 4u}) {
    for (std::size_t a = 0; a <= n; ++a) {
      for (std::size_t c = 1; a + (size - 1) * c <= n; ++c) {
        std::vector<std::size_t> induced;
        for (std::size_t k = 0; k <= 2 * (size - 1); ++k) {
          if (p.contains(2 * a + c * k)) induced.push_back(k);
        }
        const Pattern q(std::move(induced));
        for (std::size_t i = 0; i < catalog.size(); ++i) {
          if (catalog[i].order + 1 != size || !(catalog[i].pattern == q)) continue;
          ForbiddenHit hit;
          for (std::size_t r = 0; r < size; ++r) hit.rows.push_back(a + r * c);
          hit.catalog_index = i;
          hit.rule = catalog[i].rule;
          return hit;
        }
      }
    }
  }
  return std::nullopt;
}

struct ClassifyOptions {
  /// Attempts at filling the entries of P outside a forbidden submatrix.
  std::size_t fill_attempts = 400;
  std::uint64_t seed = 7;
};

namespace detail {

inline bool certified_infeasible(const PartialSequence& w, std::size_t n, Cone cone,
                                 const ToleranceOptions& tol) {
  if (cone == Cone::Pd ? !is_partial_positive_definite(w, tol)
                       : !is_partial_positive_semidefinite(w, tol)) {
    return false;
  }
  OracleOptions opts;
  opts.max_missing = 2 * n + 1;
  opts.budget = 0;
  const FeasibilityResult r =
      cone == Cone::Pd ? decide_pd_completable(w, n, opts, tol) : decide_psd_completable(w, n, opts, tol);
  return !r.feasible && r.obstruction.has_value();
}

/// Catalog witness placed on the rows of the hit, remaining entries of P
/// filled until the whole instance is partial positive definite.
inline std::optional<PartialSequence> embed_witness(const Pattern& p, std::size_t horizon,
                                                    const ForbiddenHit& hit,
                                                    const ClassifyOptions& opts,
                                                    const ToleranceOptions& tol) {
  const CatalogEntry& entry = negative_catalog()[hit.catalog_index];
  const std::size_t a = hit.rows[0];
  const std::size_t c = hit.rows.size() > 1 ? hit.rows[1] - hit.rows[0] : 1;
  std::map<std::size_t, double> placed;
  for (std::size_t k = 0; k < entry.witness.size(); ++k) {
    if (entry.witness[k]) placed[2 * a + c * k] = *entry.witness[k];
  }
  std::vector<std::size_t> rest;
  for (std::size_t k : p) {
    if (!placed.contains(k)) rest.push_back(k);
  }
  const std::size_t n = horizon / 2;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  const std::size_t attempts = rest.empty() ? 1 : opts.fill_attempts;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    auto values = placed;
    // big even entries dominate the rows they sit on; odd ones start small
    const double big = std::pow(10.0, static_cast<double>(attempt % 6));
    for (std::size_t k : rest) {
      if (attempt == 0) {
        values[k] = k % 2 == 0 ? 1.0 : 0.0;
      } else if (k % 2 == 0) {
        values[k] = big * std::exp(gauss(rng));
      } else {
        values[k] = attempt % 2 == 0 ? 0.0 : 0.1 * gauss(rng);
      }
    }
    const PartialSequence w(values, horizon);
    if (certified_infeasible(w, n, Cone::Pd, tol)) return w;
  }
  return std::nullopt;
}

/// Partial semidefinite instance with no semidefinite completion, from a
/// definite witness a: a - eps b with b_k = 1/(k+1). Were it completable by
/// C, then C + eps * Hilbert would complete a.
inline std::optional<PartialSequence> psd_witness_from(const PartialSequence& a, std::size_t n,
                                                       const ToleranceOptions& tol) {
  auto shifted = [&](double eps) {
    std::map<std::size_t, double> e;
    for (const auto& [k, v] : a.entries()) e.emplace(k, v - eps / static_cast<double>(k + 1));
    return PartialSequence(std::move(e), a.horizon());
  };
  double lo = 0.0;
  double hi = 1.0;
  for (const auto& [k, v] : a.entries()) hi = std::max(hi, std::abs(v) * static_cast<double>(k + 1));
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (is_partial_positive_definite(shifted(mid), tol)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  for (double fraction : {0.5, 0.1, 0.01}) {
    const PartialSequence w = shifted(fraction * lo);
    if (certified_infeasible(w, n, Cone::Psd, tol)) return w;
  }
  return std::nullopt;
}

/// Prefix patterns {0..m}, m >= 1: partial semidefinite data whose singular
/// block cannot be extended, and the order at which that shows.
inline std::pair<std::vector<double>, std::size_t> prefix_psd_witness(std::size_t m) {
  std::vector<double> w(m + 1, 0.0);
  if (m <= 2) {
    w[m] = 1.0;  // (0, 1) and (0, 0, 1): s_0 = 0 forces everything to 0
  } else if (m % 2 == 1) {
    std::fill(w.begin(), w.end(), 1.0);  // (1, 1, 1, 2) and longer
    w[m] = 2.0;
  } else {
    w.front() = 1.0;  // (1, 0, 0, 0, 1) and longer
    w.back() = 1.0;
  }
  return {w, m / 2 + 1};
}

/// Pattern families with an entry-by-entry construction, with their rule.
inline std::optional<std::string> constructive_rule(const Pattern& p) {
  const auto family = schur_family(p);
  if (!family) return std::nullopt;
  if (*family == "prefix-odd") return "odd-prefix-union";
  if (*family == "prime-like") return "primes";
  return *family;
}

}  // namespace detail

/// Completability of P restricted to [0, horizon]. Rules are tried in a fixed
/// order: forbidden submatrices, constructive families, scaled families, then
/// the semidefinite rules. Witnesses are checked by the oracle before use.
inline PatternVerdict classify(const Pattern& pattern, std::size_t horizon,
                               const ClassifyOptions& opts = {},
                               const ToleranceOptions& tol = {}) {
  if (horizon / 2 > kMaxEnumerationOrder) {
    throw Error(ErrorKind::OrderTooLarge, "classification is capped at horizon " +
                                              std::to_string(2 * kMaxEnumerationOrder + 1));
  }
  PatternVerdict v;
  v.pattern = pattern.truncated(horizon);
  v.horizon = horizon;
  const Pattern& p = v.pattern;

  if (p.empty()) {
    v.pd = {Answer::Yes, "empty", std::nullopt, 0};
    v.psd = {Answer::Yes, "empty", std::nullopt, 0};
    v.strategy = "schur";
    return v;
  }

  // definite side
  if (auto hit = contains_forbidden_submatrix_pattern(p, horizon)) {
    if (auto w = detail::embed_witness(p, horizon, *hit, opts, tol)) {
      v.pd = {Answer::No, hit->rule, w, horizon / 2};
    }
  }
  if (v.pd.answer == Answer::Unknown) {
    if (auto rule = detail::constructive_rule(p)) {
      v.pd = {Answer::Yes, *rule, std::nullopt, 0};
      v.strategy = "schur";
    }
  }
  if (v.pd.answer == Answer::Unknown) {
    std::size_t g = 0;
    for (std::size_t k : p) g = std::gcd(g, k);
    for (std::size_t d = g; d >= 2; --d) {
      if (g % d != 0) continue;
      std::vector<std::size_t> inner;
      for (std::size_t k : p) inner.push_back(k / d);
      if (detail::constructive_rule(Pattern(inner))) {
        v.pd = {Answer::Yes, "scaled-pattern", std::nullopt, 0};
        v.strategy = "measure";
        break;
      }
    }
  }

  // semidefinite side
  const Reduction red = reduce_pattern(p);
  const bool has_even =
      std::any_of(p.begin(), p.end(), [](std::size_t k) { return k % 2 == 0; });
  if (!has_even) {
    v.psd = {Answer::Yes, "no-diagonal", std::nullopt, 0};
  } else if (p.size() == 1) {
    v.psd = {Answer::Yes, "single-entry", std::nullopt, 0};
  } else if (red.reduced.is_prefix()) {
    const auto [w, order] = detail::prefix_psd_witness(red.reduced.max());
    std::map<std::size_t, double> e;
    for (std::size_t k = 0; k < w.size(); ++k) e.emplace(red.d * k + red.l0, w[k]);
    const PartialSequence witness(e, horizon);
    const std::size_t n = red.l0 / 2 + red.d * order;
    // verdicts concern infinite completions, so n may exceed horizon / 2
    if (n <= kMaxEnumerationOrder &&
        detail::certified_infeasible(witness, n, detail::Cone::Psd, tol)) {
      v.psd = {Answer::No, "truncated-progression", witness, n};
    }
  }
  if (v.psd.answer == Answer::Unknown && v.pd.answer == Answer::No) {
    if (auto w = detail::psd_witness_from(*v.pd.witness, v.pd.witness_order, tol)) {
      v.psd = {Answer::No, "not-pd-implies-not-psd", w, v.pd.witness_order};
    }
  }
  if (v.pd.answer == Answer::Unknown && v.psd.answer == Answer::Yes) {
    v.pd = {Answer::Yes, "psd-implies-pd", std::nullopt, 0};
    v.strategy = "lift";
  }
  return v;
}

/// Runs the strategy the verdict names for s (pattern and horizon from s).
inline CompletionCertificate complete_auto(const PartialSequence& s, std::size_t target_horizon,
                                           const ToleranceOptions& tol = {}) {
  const PatternVerdict v = classify(pattern_of(s), s.horizon(), {}, tol);
  if (v.pd.answer != Answer::Yes || !v.strategy) {
    throw Error(ErrorKind::UnsupportedPattern, "no constructive rule for pattern " +
                                                   to_string(v.pattern) + " (" +
                                                   std::string(to_string(v.status())) + ")");
  }
  if (*v.strategy == "schur") return complete_pattern_inductive(s, target_horizon, tol);
  return complete_grid_measure(s, target_horizon, tol);
}

}  // namespace hankel
