#pragma once

// Partial moment sequences, specified-index patterns and the tolerance policy
// shared by every other header in this library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hankel {

enum class ErrorKind {
  InvalidInput,
  MissingIndex,
  BadOffset,
  OrderTooLarge,
  NonFiniteEntry,
  SingularBlock,
  LengthMismatch,
  NotPartialPD,
  UnsupportedPattern,
  NotPositive,
  IllConditioned,
  StieltjesViolation,
  Overflow,
  NotGeometric,
  EpsilonUnderflow,
  NotSingleMissing,
  TooManyMissing,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::MissingIndex: return "MissingIndex";
    case ErrorKind::BadOffset: return "BadOffset";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NotPartialPD: return "NotPartialPD";
    case ErrorKind::UnsupportedPattern: return "UnsupportedPattern";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::StieltjesViolation: return "StieltjesViolation";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NotGeometric: return "NotGeometric";
    case ErrorKind::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorKind::NotSingleMissing: return "NotSingleMissing";
    case ErrorKind::TooManyMissing: return "TooManyMissing";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// Relative tolerances. Every threshold is multiplied by the scale of the
/// matrix it is applied to, max(1, largest |entry|).
struct ToleranceOptions {
  double psd_tol = 1e-9;
  double pd_margin = 1e-12;
  /// Slack factor for free even entries: s = q + growth * max(1, q, s_0).
  double growth = 0.5;

  void validate() const {
    if (!(psd_tol > 0) || !(pd_margin > 0) || !(growth > 0)) {
      throw Error(ErrorKind::InvalidInput,
                  "tolerances must be positive (psd_tol, pd_margin, growth)");
    }
  }
};

/// Sorted, duplicate-free set of specified indices.
class Pattern {
 public:
  Pattern() = default;
  Pattern(std::initializer_list<std::size_t> indices)
      : Pattern(std::vector<std::size_t>(indices)) {}
  explicit Pattern(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  }

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(std::size_t k) const {
    return std::binary_search(indices_.begin(), indices_.end(), k);
  }
  std::size_t min() const { return indices_.front(); }
  std::size_t max() const { return indices_.back(); }

  /// Every index odd.
  bool is_odd_subset() const {
    return std::all_of(indices_.begin(), indices_.end(), [](std::size_t k) { return k % 2 == 1; });
  }

  /// Length of the contiguous run {0, 1, ..., m} at the start; 0 when 0 is absent.
  std::size_t prefix_length() const {
    std::size_t m = 0;
    while (m < indices_.size() && indices_[m] == m) ++m;
    return m;
  }

  /// P = {0, 1, ..., m} for some m (the empty pattern is not a prefix).
  bool is_prefix() const { return !empty() && prefix_length() == size(); }

  /// Step of an arithmetic progression covering all of P, or nullopt.
  /// Single-element patterns report step 0.
  std::optional<std::size_t> arithmetic_step() const {
    if (empty()) return std::nullopt;
    if (size() == 1) return 0;
    const std::size_t d = indices_[1] - indices_[0];
    for (std::size_t i = 2; i < indices_.size(); ++i) {
      if (indices_[i] - indices_[i - 1] != d) return std::nullopt;
    }
    return d;
  }

  /// Restriction to indices <= horizon.
  Pattern truncated(std::size_t horizon) const {
    std::vector<std::size_t> kept;
    for (std::size_t k : indices_) {
      if (k <= horizon) kept.push_back(k);
    }
    return Pattern(std::move(kept));
  }

  /// {d*k + offset : k in P}.
  Pattern scaled(std::size_t d, std::size_t offset) const {
    std::vector<std::size_t> out;
    out.reserve(indices_.size());
    for (std::size_t k : indices_) out.push_back(d * k + offset);
    return Pattern(std::move(out));
  }

  bool operator==(const Pattern&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

inline std::string to_string(const Pattern& p) {
  std::string out = "{";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p.indices()[i]);
  }
  return out + "}";
}

/// Finitely many specified moments s_k plus a horizon (the largest index the
/// instance speaks about). Immutable once built.
class PartialSequence {
 public:
  PartialSequence() = default;

  explicit PartialSequence(std::map<std::size_t, double> entries,
                           std::optional<std::size_t> horizon = std::nullopt)
      : entries_(std::move(entries)) {
    for (const auto& [k, v] : entries_) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteEntry, "s_" + std::to_string(k) + " is not finite");
      }
    }
    const std::size_t max_index = entries_.empty() ? 0 : entries_.rbegin()->first;
    horizon_ = horizon.value_or(max_index);
    if (horizon_ < max_index) {
      throw Error(ErrorKind::InvalidInput, "horizon " + std::to_string(horizon_) +
                                               " is below the largest specified index " +
                                               std::to_string(max_index));
    }
  }

  /// Fully specified s_0 .. s_{len-1}.
  static PartialSequence from_values(std::span<const double> values) {
    std::map<std::size_t, double> entries;
    for (std::size_t k = 0; k < values.size(); ++k) entries.emplace(k, values[k]);
    return PartialSequence(std::move(entries),
                           values.empty() ? std::nullopt : std::optional(values.size() - 1));
  }

  /// nullopt marks a missing entry; the horizon is the last position.
  static PartialSequence from_optional(std::span<const std::optional<double>> values) {
    std::map<std::size_t, double> entries;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k]) entries.emplace(k, *values[k]);
    }
    return PartialSequence(std::move(entries),
                           values.empty() ? std::nullopt : std::optional(values.size() - 1));
  }

  const std::map<std::size_t, double>& entries() const noexcept { return entries_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  bool is_specified(std::size_t k) const { return entries_.contains(k); }

  std::optional<double> at(std::size_t k) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  double value(std::size_t k) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) {
      throw Error(ErrorKind::MissingIndex, "s_" + std::to_string(k) + " is not specified");
    }
    return it->second;
  }

  /// Copy with s_k set; the horizon grows if needed.
  PartialSequence with(std::size_t k, double v) const {
    auto entries = entries_;
    entries[k] = v;
    return PartialSequence(std::move(entries), std::max(horizon_, k));
  }

  /// Copy with a different horizon (must cover every specified index).
  PartialSequence with_horizon(std::size_t horizon) const {
    return PartialSequence(entries_, horizon);
  }

  /// Dense view s_0..s_horizon, nullopt where unspecified.
  std::vector<std::optional<double>> dense() const {
    std::vector<std::optional<double>> out(horizon_ + 1);
    for (const auto& [k, v] : entries_) out[k] = v;
    return out;
  }

  bool operator==(const PartialSequence&) const = default;

 private:
  std::map<std::size_t, double> entries_;
  std::size_t horizon_ = 0;
};

inline Pattern pattern_of(const PartialSequence& s) {
  std::vector<std::size_t> indices;
  indices.reserve(s.size());
  for (const auto& [k, v] : s.entries()) indices.push_back(k);
  return Pattern(std::move(indices));
}

/// Order n of the Hankel matrix H_n that covers indices 0..horizon.
constexpr std::size_t covering_order(std::size_t horizon) noexcept {
  return (horizon + 1) / 2;
}

/// [s_{l0}, s_{d+l0}, ..., s_{(count-1)d+l0}]. With s positive and l0 even the
/// result is again a positive sequence.
inline std::vector<double> subsequence(const PartialSequence& s, std::size_t d, std::size_t l0,
                                       std::size_t count) {
  if (d == 0) throw Error(ErrorKind::InvalidInput, "step d must be positive");
  if (l0 % 2 != 0) throw Error(ErrorKind::BadOffset, "offset l0 must be even");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(s.value(k * d + l0));
  return out;
}

inline std::vector<double> subsequence(std::span<const double> s, std::size_t d, std::size_t l0,
                                       std::size_t count) {
  if (d == 0) throw Error(ErrorKind::InvalidInput, "step d must be positive");
  if (l0 % 2 != 0) throw Error(ErrorKind::BadOffset, "offset l0 must be even");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = k * d + l0;
    if (idx >= s.size()) {
      throw Error(ErrorKind::MissingIndex, "s_" + std::to_string(idx) + " is beyond the data");
    }
    out.push_back(s[idx]);
  }
  return out;
}

}  // namespace hankel
