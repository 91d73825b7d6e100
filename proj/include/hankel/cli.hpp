#pragma once

// Command-line front end. run() is the whole program; main() only forwards.
// Exit codes: 0 success, 1 error, 2 a mathematically negative answer.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hankel/classifier.hpp"
#include "hankel/io.hpp"
#include "hankel/measure.hpp"
#include "hankel/oracle.hpp"
#include "hankel/schur_completion.hpp"

namespace hankel::cli {

inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kNegative = 2;

struct Config {
  std::string input = "-";
  std::string pattern;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> order;
  std::string strategy = "auto";
  std::size_t d = 1;
  std::size_t l0 = 0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> budget;
  bool psd = false;
  ToleranceOptions tol;
};

namespace detail {

inline std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") return {std::istreambuf_iterator<char>(in), {}};
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  return {std::istreambuf_iterator<char>(f), {}};
}

inline Pattern parse_pattern(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 0) {
      throw Error(ErrorKind::InvalidInput, "bad pattern index '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return Pattern(std::move(out));
}

/// Re-checks a completion before it is printed: positivity at every order
/// and agreement with the specified entries.
inline void revalidate(const CompletionCertificate& c, const PartialSequence& s,
                       const ToleranceOptions& tol) {
  if (!certificate_holds(c, tol)) {
    throw Error(ErrorKind::IllConditioned,
                "completion failed re-validation (" +
                    std::string(c.promises_pd ? "not positive definite" : "not semidefinite") +
                    " at some order)");
  }
  for (const auto& [k, v] : s.entries()) {
    if (k >= c.completed.size()) continue;
    if (std::abs(c.completed[k] - v) > 1e-8 * std::max(1.0, std::abs(v))) {
      throw Error(ErrorKind::IllConditioned,
                  "completion does not reproduce s_" + std::to_string(k));
    }
  }
}

inline int check(const Config& cfg, std::istream& in, std::ostream& out) {
  const PartialSequence s = io::parse_sequence(read_input(cfg.input, in));
  const PartialReport r = check_partial(s, cfg.tol);
  io::Json j{{"partial_positive_definite", r.partial_pd},
             {"partial_positive_semidefinite", r.partial_psd},
             {"order", r.order}};
  if (r.weakest_set) {
    j["weakest_set"] = *r.weakest_set;
    j["weakest_min_eigenvalue"] = r.weakest_min_eigenvalue;
  }
  out << io::dump(j) << '\n';
  return r.partial_pd ? kOk : kNegative;
}

inline int classify_pattern(const Config& cfg, std::ostream& out) {
  const Pattern p = parse_pattern(cfg.pattern);
  const std::size_t horizon = cfg.horizon.value_or(p.empty() ? 0 : p.max());
  const PatternVerdict v = classify(p, horizon, {}, cfg.tol);
  out << io::dump(io::to_json(v)) << '\n';
  return v.negative() ? kNegative : kOk;
}

inline int complete(const Config& cfg, std::istream& in, std::ostream& out) {
  const PartialSequence s = io::parse_sequence(read_input(cfg.input, in));
  const std::size_t horizon = cfg.horizon.value_or(s.horizon());
  if (cfg.strategy == "measure" || cfg.strategy == "lift") {
    if (cfg.d < 1) throw Error(ErrorKind::InvalidInput, "--d must be at least 1");
    if (cfg.l0 % 2 != 0) throw Error(ErrorKind::BadOffset, "--l0 must be even");
  }
  CompletionCertificate c;
  if (cfg.strategy == "auto") {
    c = complete_auto(s, horizon, cfg.tol);
  } else if (cfg.strategy == "schur") {
    c = complete_pattern_inductive(s, horizon, cfg.tol);
  } else if (cfg.strategy == "measure") {
    c = complete_arithmetic_pattern(s, cfg.d, cfg.l0, horizon, cfg.tol);
  } else if (cfg.strategy == "geometric") {
    c = complete_geometric(s, horizon, cfg.tol);
  } else {
    c = lift_psd_to_pd(s, arithmetic_completer(cfg.d, cfg.l0, cfg.tol), horizon, cfg.tol);
  }
  revalidate(c, s, cfg.tol);
  out << io::dump(io::to_json(c)) << '\n';
  return kOk;
}

inline int measure_extract(const Config& cfg, std::istream& in, std::ostream& out) {
  const PartialSequence s = io::parse_sequence(read_input(cfg.input, in));
  std::vector<double> t;
  for (std::size_t k = 0; k <= s.horizon(); ++k) t.push_back(s.value(k));
  out << io::dump(io::to_json(extract_measure(t, cfg.tol))) << '\n';
  return kOk;
}

inline int oracle(const Config& cfg, std::istream& in, std::ostream& out) {
  const PartialSequence s = io::parse_sequence(read_input(cfg.input, in));
  OracleOptions opts;
  opts.seed = cfg.seed;
  if (cfg.budget) opts.budget = *cfg.budget;
  const std::size_t n = cfg.order.value_or(covering_order(s.horizon()));
  const FeasibilityResult r = cfg.psd ? decide_psd_completable(s, n, opts, cfg.tol)
                                      : decide_pd_completable(s, n, opts, cfg.tol);
  io::Json j{{"cone", cfg.psd ? "psd" : "pd"}, {"order", n}};
  j.update(io::to_json(r));
  out << io::dump(j) << '\n';
  return !r.feasible && !r.inconclusive ? kNegative : kOk;
}

inline int witness(const Config& cfg, std::ostream& out) {
  const Pattern p = parse_pattern(cfg.pattern);
  if (p.empty()) throw Error(ErrorKind::InvalidInput, "empty pattern");
  const std::size_t horizon = cfg.horizon.value_or(p.max() + p.max() % 2);
  WitnessOptions opts;
  opts.seed = cfg.seed;
  if (cfg.budget) opts.budget = *cfg.budget;
  const auto w = find_witness(p.truncated(horizon), horizon / 2, opts, cfg.tol);
  io::Json j{{"pattern", io::to_json(p)}, {"order", horizon / 2}, {"found", w.has_value()}};
  if (w) {
    OracleOptions o;
    o.max_missing = horizon + 1;
    o.budget = 0;
    j["witness"] = io::to_json(*w);
    const FeasibilityResult r = decide_pd_completable(*w, horizon / 2, o, cfg.tol);
    if (r.obstruction) j["obstruction"] = io::to_json(*r.obstruction);
  }
  out << io::dump(j) << '\n';
  return w ? kNegative : kOk;
}

}  // namespace detail

/// Parses argv, runs one command, prints JSON on out. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::istream& in = std::cin) {
  Config cfg;
  CLI::App app{"Positive definite Hankel and moment sequence completion"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--psd-tol", cfg.tol.psd_tol, "Relative semidefiniteness tolerance");
  app.add_option("--pd-margin", cfg.tol.pd_margin, "Relative margin for strict positivity");
  app.add_option("--gamma", cfg.tol.growth, "Relative slack for free even entries");

  auto* check = app.add_subcommand("check", "Partial positive (semi)definiteness of a sequence");
  check->add_option("input", cfg.input, "Sequence JSON ('-' for stdin)");

  auto* classify_cmd = app.add_subcommand("classify-pattern", "Completability of a pattern");
  classify_cmd->add_option("pattern", cfg.pattern, "Comma-separated indices")->required();
  classify_cmd->add_option("--horizon", cfg.horizon, "Largest index considered");

  auto* complete = app.add_subcommand("complete", "Complete a partial sequence");
  complete->add_option("input", cfg.input, "Sequence JSON ('-' for stdin)");
  complete->add_option("--horizon", cfg.horizon, "Target horizon");
  complete->add_option("--strategy", cfg.strategy, "Completion strategy")
      ->check(CLI::IsMember({"auto", "schur", "measure", "geometric", "lift"}));
  complete->add_option("--d", cfg.d, "Step of the arithmetic pattern");
  complete->add_option("--l0", cfg.l0, "Even offset of the arithmetic pattern");

  auto* measure = app.add_subcommand("measure", "Representing measures");
  measure->require_subcommand(1);
  auto* extract = measure->add_subcommand("extract", "Atoms and weights of a moment sequence");
  extract->add_option("input", cfg.input, "Sequence JSON ('-' for stdin)");

  auto* oracle = app.add_subcommand("oracle", "Decide completability of one instance");
  oracle->add_option("input", cfg.input, "Sequence JSON ('-' for stdin)");
  oracle->add_option("--order", cfg.order, "Order n of H_n (default: smallest covering the horizon)");
  oracle->add_option("--budget", cfg.budget, "Search evaluations");
  oracle->add_option("--seed", cfg.seed, "Random seed");
  oracle->add_flag("--psd", cfg.psd, "Semidefinite instead of definite");

  auto* witness = app.add_subcommand("witness", "Search a non-completable instance on a pattern");
  witness->add_option("pattern", cfg.pattern, "Comma-separated indices")->required();
  witness->add_option("--horizon", cfg.horizon, "Largest index considered");
  witness->add_option("--budget", cfg.budget, "Random samples");
  witness->add_option("--seed", cfg.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    out << io::dump(io::error_json("InvalidInput", e.what())) << '\n';
    return kError;
  }

  try {
    cfg.tol.validate();
    if (check->parsed()) return detail::check(cfg, in, out);
    if (classify_cmd->parsed()) return detail::classify_pattern(cfg, out);
    if (complete->parsed()) return detail::complete(cfg, in, out);
    if (extract->parsed()) return detail::measure_extract(cfg, in, out);
    if (oracle->parsed()) return detail::oracle(cfg, in, out);
    return detail::witness(cfg, out);
  } catch (const Error& e) {
    out << io::dump(io::error_json(to_string(e.kind()), e.detail())) << '\n';
    return e.kind() == ErrorKind::NotPartialPD ? kNegative : kError;
  } catch (const std::exception& e) {
    out << io::dump(io::error_json("Internal", e.what())) << '\n';
    return kError;
  }
}

}  // namespace hankel::cli
