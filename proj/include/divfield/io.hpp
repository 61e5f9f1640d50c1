#pragma once

#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "divfield/analysis.hpp"
#include "divfield/ensemble.hpp"
#include "divfield/fragment.hpp"
#include "divfield/smoothing.hpp"

namespace divfield {

using json = nlohmann::ordered_json;

// Rationals travel as decimal strings so 128-bit parts survive any JSON reader.
inline json to_json(const Rational& r) { return {{"num", to_string(r.num())}, {"den", to_string(r.den())}}; }

inline Rational rational_from_json(const json& j) {
  return Rational(parse_i128(j.at("num").get<std::string>()), parse_i128(j.at("den").get<std::string>()));
}

inline json to_json(Vertex v) { return json::array({v.x, v.y}); }

inline json to_json(const OrientedEdge& e) {
  return {{"x", e.tail.x}, {"y", e.tail.y}, {"dir", std::string(1, direction_letter(e.dir))}};
}

inline json to_json(const Fragment& f) {
  json edges = json::array();
  for (const auto& [id, value] : f.tree_flow()) {
    edges.push_back({{"x", id.vertex.x}, {"y", id.vertex.y}, {"axis", std::string(1, axis_letter(id.axis))},
                     {"value", value}});
  }
  return {{"level", f.level()}, {"side", f.side()}, {"root", to_json(f.root())}, {"edges", std::move(edges)}};
}

inline json to_json(const ExactDist& d) {
  json atoms = json::array();
  for (const auto& [v, p] : d.atoms()) {
    json a = to_json(p);
    atoms.push_back({{"value", v}, {"num", a["num"]}, {"den", a["den"]}});
  }
  return {{"atoms", std::move(atoms)}};
}

inline ExactDist exact_dist_from_json(const json& j) {
  std::map<std::int64_t, Rational> atoms;
  for (const auto& a : j.at("atoms")) atoms.emplace(a.at("value").get<std::int64_t>(), rational_from_json(a));
  return ExactDist(std::move(atoms));
}

inline json to_json(const WindowLaw& w) {
  json edges = json::array();
  for (const auto& e : w.edges) edges.push_back(to_json(e));
  json atoms = json::array();
  for (const auto& [values, p] : w.atoms) {
    json a = to_json(p);
    atoms.push_back({{"values", values}, {"num", a["num"]}, {"den", a["den"]}});
  }
  return {{"edges", std::move(edges)}, {"atoms", std::move(atoms)}};
}

inline std::string axis_name(Axis a) { return std::string(1, axis_letter(a)); }

inline json to_json(const TailReport& r) {
  json tails = json::array();
  for (const auto& t : r.tails) {
    tails.push_back({{"n", t.n}, {"k", t.k}, {"axis", axis_name(t.axis)}, {"probability", to_json(t.probability)},
                     {"bound", to_json(t.bound)}, {"pass", t.pass}});
  }
  json nesting = json::array();
  for (const auto& t : r.nesting) {
    nesting.push_back({{"n", t.n}, {"i", t.i}, {"axis", axis_name(t.axis)},
                       {"probability", to_json(t.probability)}, {"bound", to_json(t.bound)}, {"pass", t.pass}});
  }
  return {{"k_max", r.k_max}, {"n_max", r.n_max}, {"scope", "levels 1.." + std::to_string(r.n_max) + " only"},
          {"passed", r.passed()}, {"tails", std::move(tails)}, {"nesting", std::move(nesting)}};
}

inline json to_json(const HalfMoment& m) {
  json terms = json::array();
  for (const auto& [w, radicand] : m.terms) terms.push_back({{"weight", to_json(w)}, {"sqrt_of", radicand}});
  return {{"terms", std::move(terms)}, {"value", m.value}};
}

inline json to_json(const ConvergenceTable& t) {
  json window = json::array();
  for (const auto& e : t.window) window.push_back(to_json(e));
  json rows = json::array();
  for (std::size_t i = 0; i < t.distances.size(); ++i) {
    rows.push_back({{"n", t.n_from + static_cast<int>(i)}, {"next", t.n_from + static_cast<int>(i) + 1},
                    {"tv", to_json(t.distances[i])}, {"tv_approx", t.distances[i].to_double()}});
  }
  return {{"window", std::move(window)}, {"from", t.n_from}, {"to", t.n_to}, {"distances", std::move(rows)},
          {"tail_decreasing", t.tail_decreasing()}};
}

inline json to_json(const OneDVerdict& v) {
  json out = {{"period", v.period}, {"bound", v.bound}, {"fields_checked", v.fields_checked},
              {"nonnegative_fields", v.nonnegative_fields}, {"passed", v.passed()}};
  out["counterexample"] = v.counterexample ? json(*v.counterexample) : json(nullptr);
  return out;
}

inline json to_json(const ConsistencyReport& r) {
  json mismatches = json::array();
  for (const auto& m : r.mismatches) {
    mismatches.push_back({{"quadrant", quadrant_name(m.quadrant)}, {"x", m.edge.vertex.x}, {"y", m.edge.vertex.y},
                          {"axis", axis_name(m.edge.axis)}, {"expected", m.expected}, {"actual", m.actual}});
  }
  return {{"level", r.level}, {"edges_checked", r.edges_checked}, {"tree_edges_checked", r.tree_edges_checked},
          {"passed", r.passed()}, {"mismatches", std::move(mismatches)}};
}

/// Plain-text law, e.g. {-8: 1/9, +1: 8/9}.
inline std::string format_law(const ExactDist& d) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [v, p] : d.atoms()) {
    if (!first) os << ", ";
    first = false;
    os << (v > 0 ? "+" : "") << v << ": " << p;
  }
  os << '}';
  return os.str();
}

inline void write_patch_csv(std::ostream& os, const SampledPatch& patch) {
  os << "x,y,axis,value\n";
  for (const auto& [id, value] : patch.edges) {
    os << id.vertex.x << ',' << id.vertex.y << ',' << axis_letter(id.axis) << ',' << value << '\n';
  }
}

inline void write_raster_csv(std::ostream& os, const std::vector<RasterSample>& samples) {
  os << "x,y,h,v,div\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    os << s.point.x << ',' << s.point.y << ',' << s.value.h << ',' << s.value.v << ',';
    if (s.div) {
      os << *s.div;
    } else {
      os << "nan";
    }
    os << '\n';
  }
}

// Edge lists on the command line: "x,y,D;x,y,D" with D one of E N W S.
inline std::vector<OrientedEdge> parse_edge_list(const std::string& spec) {
  std::vector<OrientedEdge> out;
  std::stringstream all(spec);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    std::stringstream one(item);
    std::string xs, ys, ds;
    if (!std::getline(one, xs, ',') || !std::getline(one, ys, ',') || !std::getline(one, ds) || ds.size() != 1) {
      throw UsageError("bad edge '" + item + "', expected x,y,D");
    }
    Direction d{};
    switch (ds[0]) {
      case 'E': case 'e': d = Direction::East; break;
      case 'N': case 'n': d = Direction::North; break;
      case 'W': case 'w': d = Direction::West; break;
      case 'S': case 's': d = Direction::South; break;
      default: throw UsageError("bad direction '" + ds + "'");
    }
    try {
      out.push_back({{std::stoll(xs), std::stoll(ys)}, d});
    } catch (const std::logic_error&) {
      throw UsageError("bad edge coordinates in '" + item + "'");
    }
  }
  return out;
}

}  // namespace divfield
