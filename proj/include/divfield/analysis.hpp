#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "divfield/ensemble.hpp"
#include "divfield/errors.hpp"
#include "divfield/rational.hpp"

namespace divfield {

/// Pr[|X| > c] for an exact law.
inline Rational tail_prob(const ExactDist& law, std::int64_t c) {
  Rational p;
  for (const auto& [v, w] : law.atoms()) {
    if ((v < 0 ? -v : v) > c) p += w;
  }
  return p;
}

inline Rational tail_prob(int n, Axis axis, std::int64_t c) {
  if (c < 0) throw UsageError("tail threshold must be nonnegative");
  return tail_prob(edge_law(n, axis), c);
}

// ---------------------------------------------------------------------------
// Tail bounds for the edge values.

struct TailEntry {
  int n = 0;
  int k = 0;
  Axis axis = Axis::H;
  Rational probability;  // Pr[|v_n| > 4^k]
  Rational bound;        // 2 * 2^-k
  bool pass = false;
};

/// Pr[|v_{n+i}| <= 4^n - 2^(n+1)] against 4^i (2^n-1)^2 / (2^(n+i)-1)^2.
struct NestingEntry {
  int n = 0;
  int i = 0;
  Axis axis = Axis::H;
  Rational probability;
  Rational bound;
  bool pass = false;
};

struct TailReport {
  int k_max = 0;
  int n_max = 0;
  std::vector<TailEntry> tails;
  std::vector<NestingEntry> nesting;

  bool passed() const {
    for (const auto& t : tails) {
      if (!t.pass) return false;
    }
    for (const auto& t : nesting) {
      if (!t.pass) return false;
    }
    return true;
  }
};

/// Checks the 2 * 2^-k tail bound for every n <= n_max and both axes, plus
/// the copy-counting inequality for every n >= 2, n + i <= n_max. The claim
/// is scoped to the levels actually computed.
inline TailReport tail_report(int k_max, int n_max) {
  check_level(n_max, 1, kMaxEnumerationLevel);
  if (k_max < 1 || k_max > 6) throw BoundsError("k_max must lie in [1, 6]");

  std::map<std::pair<int, Axis>, ExactDist> laws;
  for (int n = 1; n <= n_max; ++n) {
    for (Axis axis : {Axis::H, Axis::V}) laws.emplace(std::pair{n, axis}, edge_law(n, axis));
  }

  TailReport report;
  report.k_max = k_max;
  report.n_max = n_max;
  for (int k = 1; k <= k_max; ++k) {
    const Rational bound(2, i128{1} << k);
    for (int n = 1; n <= n_max; ++n) {
      for (Axis axis : {Axis::H, Axis::V}) {
        const Rational p = tail_prob(laws.at({n, axis}), std::int64_t{1} << (2 * k));
        report.tails.push_back({n, k, axis, p, bound, p <= bound});
      }
    }
  }
  // Level-1 copies are single vertices with no edges, so the counting
  // argument starts at n = 2.
  for (int n = 2; n < n_max; ++n) {
    const i128 small = fragment_side(n);
    for (int i = 1; n + i <= n_max; ++i) {
      const i128 large = fragment_side(n + i);
      const Rational bound((i128{1} << (2 * i)) * small * small, large * large);
      for (Axis axis : {Axis::H, Axis::V}) {
        const Rational p = Rational(1) - tail_prob(laws.at({n + i, axis}), root_outflow(n));
        report.nesting.push_back({n, i, axis, p, bound, p >= bound});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// E sqrt|v|

struct HalfMoment {
  // One term weight * sqrt(radicand) per distinct |value| > 0.
  std::vector<std::pair<Rational, std::int64_t>> terms;
  double value = 0.0;
};

inline HalfMoment half_moment(const ExactDist& law) {
  std::map<std::int64_t, Rational> grouped;
  for (const auto& [v, p] : law.atoms()) {
    if (v != 0) grouped[v < 0 ? -v : v] += p;
  }
  HalfMoment m;
  long double sum = 0;
  for (const auto& [radicand, weight] : grouped) {
    m.terms.emplace_back(weight, radicand);
    sum += static_cast<long double>(weight.to_double()) * std::sqrt(static_cast<long double>(radicand));
  }
  m.value = static_cast<double>(sum);
  return m;
}

inline HalfMoment half_moment(int n, Axis axis) { return half_moment(edge_law(n, axis)); }

// ---------------------------------------------------------------------------
// Total variation

/// (1/2) sum |p_a - p_b| over the union of supports.
template <class Key>
Rational tv_distance(const std::map<Key, Rational>& a, const std::map<Key, Rational>& b) {
  Rational sum;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      sum += abs(ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      sum += abs(ib->second);
      ++ib;
    } else {
      sum += abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return sum * Rational(1, 2);
}

inline Rational tv_distance(const ExactDist& a, const ExactDist& b) {
  return tv_distance(a.atoms(), b.atoms());
}

inline Rational tv_distance(const WindowLaw& a, const WindowLaw& b) {
  if (a.edges != b.edges) throw UsageError("total variation needs laws on the same window");
  return tv_distance(a.atoms, b.atoms);
}

struct ConvergenceTable {
  std::vector<OrientedEdge> window;
  int n_from = 0;
  int n_to = 0;
  std::vector<WindowLaw> laws;       // index i is level n_from + i
  std::vector<Rational> distances;   // index i compares levels n_from + i and n_from + i + 1

  /// Whether the last three consecutive distances (or all, if fewer) strictly decrease.
  bool tail_decreasing() const {
    const std::size_t start = distances.size() > 3 ? distances.size() - 3 : 0;
    for (std::size_t i = start + 1; i < distances.size(); ++i) {
      if (!(distances[i] < distances[i - 1])) return false;
    }
    return true;
  }
};

inline constexpr std::size_t kMaxConvergenceWindow = 8;

inline ConvergenceTable convergence_table(const std::vector<OrientedEdge>& window, int n_from, int n_to,
                                          unsigned workers = 1) {
  if (window.size() > kMaxConvergenceWindow) {
    throw CapacityError("convergence window limited to " + std::to_string(kMaxConvergenceWindow) + " edges");
  }
  check_level(n_from, 1, kMaxEnumerationLevel);
  check_level(n_to, n_from, kMaxEnumerationLevel);
  ConvergenceTable table;
  table.window = window;
  table.n_from = n_from;
  table.n_to = n_to;
  for (int n = n_from; n <= n_to; ++n) table.laws.push_back(window_law(n, window, workers));
  for (std::size_t i = 1; i < table.laws.size(); ++i) {
    table.distances.push_back(tv_distance(table.laws[i - 1], table.laws[i]));
  }
  return table;
}

// ---------------------------------------------------------------------------
// One-dimensional impossibility

struct OneDVerdict {
  int period = 0;
  int bound = 0;
  std::uint64_t fields_checked = 0;
  std::uint64_t nonnegative_fields = 0;  // fields with divergence >= 0 everywhere
  // Field values v_{x,x+1}, x = 0..period-1, with divergence >= 0 everywhere
  // and > 0 somewhere.
  std::optional<std::vector<std::int64_t>> counterexample;

  bool passed() const { return !counterexample.has_value(); }
};

/// Enumerates every period-P field on Z with |v| <= bound and confirms that
/// nonnegative divergence forces zero divergence.
inline OneDVerdict one_d_check(int period, int bound) {
  if (period < 1 || period > 8) throw BoundsError("period must lie in [1, 8]");
  if (bound < 0 || bound > 3) throw BoundsError("value bound must lie in [0, 3]");
  OneDVerdict verdict;
  verdict.period = period;
  verdict.bound = bound;
  const auto p = static_cast<std::size_t>(period);
  std::vector<std::int64_t> v(p, -bound);
  for (;;) {
    ++verdict.fields_checked;
    bool nonnegative = true;
    bool positive = false;
    for (std::size_t x = 0; x < p; ++x) {
      const std::int64_t div = v[x] - v[(x + p - 1) % p];
      nonnegative = nonnegative && div >= 0;
      positive = positive || div > 0;
    }
    if (nonnegative) {
      ++verdict.nonnegative_fields;
      if (positive && !verdict.counterexample) verdict.counterexample = v;
    }
    std::size_t i = 0;
    while (i < p && v[i] == bound) v[i++] = -bound;
    if (i == p) break;
    ++v[i];
  }
  return verdict;
}

}  // namespace divfield
