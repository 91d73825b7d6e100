#pragma once

// JSON in and out. Input follows {"horizon": 8, "entries": [{"index": 0,
// "value": 1.0}, ...]}; unknown fields are rejected. Output numbers use 17
// significant digits so runs are byte-identical and values round-trip.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "hankel/classifier.hpp"
#include "hankel/core.hpp"
#include "hankel/measure.hpp"
#include "hankel/oracle.hpp"
#include "hankel/schur_completion.hpp"

namespace hankel::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline void require_fields(const Json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorKind::InvalidInput, "unknown field '" + key + "' in " + where);
    }
  }
}

inline std::size_t index_of(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorKind::InvalidInput, where + " must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline void write_number(std::ostream& out, double v) {
  if (!std::isfinite(v)) {
    out << "null";  // JSON has no infinities; half lines show up as null ends
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

inline void write(std::ostream& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      // small records of scalars stay on one line
      const bool inline_record =
          indent > 0 && j.size() <= 3 &&
          std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (inline_record) {
        out << "{";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
          if (!first) out << ", ";
          first = false;
          out << Json(key).dump() << ": ";
          write(out, value, indent, depth + 1);
        }
        out << "}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << Json(key).dump() << (indent > 0 ? ": " : ":");
        write(out, value, indent, depth + 1);
      }
      out << nl << close << '}';
      return;
    }
    case Json::value_t::array: {
      // numbers stay on one line, anything nested gets its own
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) out << nl << pad;
        write(out, value, indent, depth + 1);
      }
      if (!flat) out << nl << close;
      out << ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

}  // namespace detail

/// Serializes with every double at %.17g.
inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream out;
  detail::write(out, j, indent, 0);
  return out.str();
}

inline PartialSequence parse_sequence(const Json& j) {
  detail::require_fields(j, {"horizon", "entries"}, "sequence");
  if (!j.contains("entries") || !j["entries"].is_array()) {
    throw Error(ErrorKind::InvalidInput, "sequence needs an 'entries' array");
  }
  std::map<std::size_t, double> entries;
  for (const auto& e : j["entries"]) {
    detail::require_fields(e, {"index", "value"}, "entry");
    if (!e.contains("index") || !e.contains("value")) {
      throw Error(ErrorKind::InvalidInput, "entry needs 'index' and 'value'");
    }
    const std::size_t k = detail::index_of(e["index"], "index");
    if (!e["value"].is_number()) throw Error(ErrorKind::InvalidInput, "value must be a number");
    if (!entries.emplace(k, e["value"].get<double>()).second) {
      throw Error(ErrorKind::InvalidInput, "duplicate index " + std::to_string(k));
    }
  }
  std::optional<std::size_t> horizon;
  if (j.contains("horizon")) horizon = detail::index_of(j["horizon"], "horizon");
  return PartialSequence(std::move(entries), horizon);
}

inline PartialSequence parse_sequence(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
  return parse_sequence(j);
}

inline Json to_json(const PartialSequence& s) {
  Json entries = Json::array();
  for (const auto& [k, v] : s.entries()) entries.push_back({{"index", k}, {"value", v}});
  return {{"horizon", s.horizon()}, {"entries", entries}};
}

inline Json to_json(const Pattern& p) { return Json(p.indices()); }

inline Json to_json(const CompletionCertificate& c) {
  Json orders = Json::array();
  for (const auto& [n, e] : c.per_order_min_eig) orders.push_back({{"order", n}, {"min_eig", e}});
  Json j{{"strategy", c.strategy},
         {"representation", c.representation},
         {"horizon", c.completed.empty() ? 0 : c.completed.size() - 1},
         {"completed", c.completed},
         {"promises_pd", c.promises_pd},
         {"unique_psd", c.unique_psd},
         {"per_order_min_eig", orders},
         {"max_reproduction_error", c.max_reproduction_error}};
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  return j;
}

inline Json to_json(const AtomicMeasure& m) {
  Json atoms = Json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"location", a.location}, {"weight", a.weight}});
  return {{"atoms", atoms}};
}

inline Json to_json(const Interval& iv) {
  return {{"lo", iv.lo}, {"hi", iv.hi}, {"closed", iv.closed}};
}

inline Json to_json(const Obstruction& o) {
  Json j{{"kind", to_string(o.kind)}, {"index", o.index}};
  if (o.kind == Obstruction::Kind::Interval) {
    j["lower"] = {{"rows", o.lower.rows}, {"interval", to_json(o.lower.interval)}};
    j["upper"] = {{"rows", o.upper.rows}, {"interval", to_json(o.upper.interval)}};
  }
  if (!o.detail.empty()) j["detail"] = o.detail;
  return j;
}

inline Json to_json(const FeasibilityResult& r) {
  Json j{{"feasible", r.feasible}, {"inconclusive", r.inconclusive}, {"method", r.method}};
  if (r.feasible) {
    Json c = Json::array();
    for (const auto& [k, v] : r.completion) c.push_back({{"index", k}, {"value", v}});
    j["completion"] = c;
    j["min_eigenvalue"] = r.min_eigenvalue;
  }
  if (r.obstruction) j["obstruction"] = to_json(*r.obstruction);
  j["evaluations"] = r.evaluations;
  return j;
}

inline Json to_json(const Side& s) {
  Json j{{"answer", to_string(s.answer)}, {"rule", s.rule}};
  if (s.witness) {
    j["witness"] = to_json(*s.witness);
    j["witness_order"] = s.witness_order;
  }
  return j;
}

inline Json to_json(const PatternVerdict& v) {
  Json j{{"pattern", to_json(v.pattern)},
         {"horizon", v.horizon},
         {"status", to_string(v.status())},
         {"rule", v.rule()}};
  if (v.strategy) j["strategy"] = *v.strategy;
  const Side& headline = v.status() == Status::NotPsdCompletable ? v.psd : v.pd;
  if (v.negative() && headline.witness) j["witness"] = to_json(*headline.witness);
  j["pd"] = to_json(v.pd);
  j["psd"] = to_json(v.psd);
  return j;
}

inline Json error_json(std::string_view kind, const std::string& detail) {
  return {{"error", {{"kind", kind}, {"detail", detail}}}};
}

}  // namespace hankel::io
