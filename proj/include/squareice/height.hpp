#pragma once

// Height functions, the six-vertex arrow bijection, and extremal elements of
// Hom(D, B, kappa).

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "squareice/lattice.hpp"

namespace squareice {

/// Integer values on a domain, indexed like domain().vertices(). `base` is the
/// vertex whose value pins the representative on a torus.
class HeightFunction {
 public:
  HeightFunction() = default;
  HeightFunction(DomainRef d, std::vector<int> values, int base = 0)
      : domain_(std::move(d)), values_(std::move(values)), base_(base) {
    if (!domain_) throw InvalidArgument("height function needs a domain");
    if (values_.size() != domain_->size()) throw InvalidArgument("height function is missing vertex values");
  }

  template <class F>
  static HeightFunction from(DomainRef d, F&& f) {
    std::vector<int> vals(d->size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f(d->vertex(static_cast<int>(i)));
    return HeightFunction(std::move(d), std::move(vals));
  }

  /// h(v) = parity(v): the flat configuration alternating 0 and 1.
  static HeightFunction parity_function(DomainRef d) {
    return from(std::move(d), [](Vertex v) { return parity(v); });
  }

  const Domain& domain() const { return *domain_; }
  const DomainRef& domain_ref() const { return domain_; }
  const std::vector<int>& values() const { return values_; }
  std::vector<int>& mutable_values() { return values_; }
  int operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  int at(Vertex v) const {
    int i = domain_->index_of(v);
    if (i < 0) throw InvalidArgument("vertex outside domain");
    return values_[static_cast<std::size_t>(i)];
  }
  int base() const { return base_; }

  /// Same gradient, different representative: value at vertex `new_base` becomes `value`.
  HeightFunction rebased(int new_base, int value) const {
    HeightFunction h = *this;
    int shift = value - values_[static_cast<std::size_t>(new_base)];
    for (auto& x : h.values_) x += shift;
    h.base_ = new_base;
    return h;
  }

  friend bool operator==(const HeightFunction& a, const HeightFunction& b) {
    return a.values_ == b.values_ && (a.domain_ == b.domain_ || *a.domain_ == *b.domain_);
  }

 private:
  DomainRef domain_;
  std::vector<int> values_;
  int base_ = 0;
};

/// Lipschitz-1 increments on every edge and the parity convention.
inline bool validate(const HeightFunction& h) {
  const auto& d = h.domain();
  if (h.values().size() != d.size()) throw InvalidArgument("height function is missing vertex values");
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    if (parity(h[i]) != parity(d.vertex(i))) return false;
    for (int j : d.neighbours(i))
      if (std::abs(h[i] - h[j]) != 1) return false;
  }
  return true;
}

/// Also checks membership in the boundary sets.
inline bool satisfies(const HeightFunction& h, const BoundaryCondition& bc) {
  for (auto& [v, s] : bc.entries())
    if (!s.contains(h.at(v))) return false;
  return true;
}

inline int gradient(const HeightFunction& h, Vertex u, Vertex v) {
  int iu = h.domain().index_of(u), iv = h.domain().index_of(v);
  if (iu < 0 || iv < 0) throw InvalidArgument("gradient endpoint outside domain");
  return h[iu] - h[iv];
}

// ---------------------------------------------------------------------------
// Arrows

/// Orientation of every dual edge, stored as the height increment along the
/// primal edge it crosses: east[i] = h(v+(1,0)) - h(v), north[i] = h(v+(0,1)) - h(v),
/// 0 when the edge leaves the domain.
///
/// Orientation convention: "left of u->v" is 90 degrees counter-clockwise from
/// v-u. An increment of +1 means the dual arrow crosses u->v from left to
/// right, so east = +1 is a downward arrow and north = +1 a rightward one.
struct ArrowConfiguration {
  DomainRef domain;
  std::vector<std::int8_t> east;
  std::vector<std::int8_t> north;

  std::optional<int> period() const { return domain->torus_period(); }
  friend bool operator==(const ArrowConfiguration& a, const ArrowConfiguration& b) {
    return a.east == b.east && a.north == b.north;
  }
};

/// The six local patterns at a dual vertex, as increments around the
/// plaquette A=(x,y), B=(x+1,y), C=(x+1,y+1), D=(x,y+1):
/// (B-A, C-B, D-C, A-D). Types are numbered 1..6 in this table's order.
inline constexpr std::array<std::array<int, 4>, 6> kVertexTypes{{
    {1, 1, -1, -1},
    {-1, -1, 1, 1},
    {1, -1, -1, 1},
    {-1, 1, 1, -1},
    {1, -1, 1, -1},
    {-1, 1, -1, 1},
}};

namespace detail {

/// Calls f(A, B, C, D) with vertex indices for every plaquette fully inside the domain.
template <class F>
void for_each_plaquette(const Domain& d, F&& f) {
  for (int a = 0; a < static_cast<int>(d.size()); ++a) {
    Vertex v = d.vertex(a);
    int b = d.index_of(v + Vertex{1, 0});
    int c = d.index_of(v + Vertex{1, 1});
    int dd = d.index_of(v + Vertex{0, 1});
    if (b < 0 || c < 0 || dd < 0) continue;
    f(a, b, c, dd);
  }
}

}  // namespace detail

inline ArrowConfiguration heights_to_arrows(const HeightFunction& h) {
  if (!validate(h)) throw InvalidArgument("heights_to_arrows needs a valid height function");
  const auto& d = h.domain();
  ArrowConfiguration a{h.domain_ref(), std::vector<std::int8_t>(d.size(), 0), std::vector<std::int8_t>(d.size(), 0)};
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    Vertex v = d.vertex(i);
    int e = d.index_of(v + Vertex{1, 0});
    int n = d.index_of(v + Vertex{0, 1});
    if (e >= 0) a.east[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(h[e] - h[i]);
    if (n >= 0) a.north[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(h[n] - h[i]);
  }
  return a;
}

/// Increment pattern at the plaquette with lower-left corner index `a`.
inline std::array<int, 4> plaquette_pattern(const ArrowConfiguration& ar, int a, int b, int dd) {
  return {ar.east[static_cast<std::size_t>(a)], ar.north[static_cast<std::size_t>(b)],
          -ar.east[static_cast<std::size_t>(dd)], -ar.north[static_cast<std::size_t>(a)]};
}

/// Type 1..6 of a pattern, or 0 if it breaks the ice rule.
inline int vertex_type(const std::array<int, 4>& p) {
  for (std::size_t t = 0; t < kVertexTypes.size(); ++t)
    if (kVertexTypes[t] == p) return static_cast<int>(t) + 1;
  return 0;
}

/// Two arrows in and two out at every dual vertex.
inline bool ice_rule_holds(const ArrowConfiguration& ar) {
  bool ok = true;
  detail::for_each_plaquette(*ar.domain, [&](int a, int b, int, int dd) {
    if (vertex_type(plaquette_pattern(ar, a, b, dd)) == 0) ok = false;
  });
  return ok;
}

/// Number of dual vertices of each type; index 0 counts ice-rule violations.
inline std::array<long long, 7> vertex_type_census(const ArrowConfiguration& ar) {
  std::array<long long, 7> census{};
  detail::for_each_plaquette(*ar.domain, [&](int a, int b, int, int dd) {
    ++census[static_cast<std::size_t>(vertex_type(plaquette_pattern(ar, a, b, dd)))];
  });
  return census;
}

/// The unique height function with the given gradient and value at `base`.
inline HeightFunction arrows_to_heights(const ArrowConfiguration& ar, int base_value, int base = 0) {
  const auto& d = *ar.domain;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    Vertex v = d.vertex(i);
    auto ok = [](int s, bool present) { return present ? (s == 1 || s == -1) : s == 0; };
    if (!ok(ar.east[static_cast<std::size_t>(i)], d.contains(v + Vertex{1, 0})) ||
        !ok(ar.north[static_cast<std::size_t>(i)], d.contains(v + Vertex{0, 1})))
      throw InvalidArgument("arrow configuration does not match its domain");
  }
  if (!ice_rule_holds(ar)) throw InvalidArgument("ice rule violated");
  if (parity(base_value) != parity(d.vertex(base))) throw InvalidArgument("base value has the wrong parity");
  if (auto n = d.torus_period()) {
    for (int y = 0; y < *n; ++y) {
      int s = 0;
      for (int x = 0; x < *n; ++x) s += ar.east[static_cast<std::size_t>(d.index_of({x, y}))];
      if (s != 0) throw WindingError("row " + std::to_string(y) + " is unbalanced");
    }
    for (int x = 0; x < *n; ++x) {
      int s = 0;
      for (int y = 0; y < *n; ++y) s += ar.north[static_cast<std::size_t>(d.index_of({x, y}))];
      if (s != 0) throw WindingError("column " + std::to_string(x) + " is unbalanced");
    }
  }
  std::vector<int> h(d.size(), 0);
  std::vector<char> seen(d.size(), 0);
  std::deque<int> queue{base};
  h[static_cast<std::size_t>(base)] = base_value;
  seen[static_cast<std::size_t>(base)] = 1;
  auto visit = [&](int from, int to, int delta) {
    if (to < 0) return;
    int want = h[static_cast<std::size_t>(from)] + delta;
    if (seen[static_cast<std::size_t>(to)]) {
      if (h[static_cast<std::size_t>(to)] != want) throw WindingError("gradient does not lift to a height function");
      return;
    }
    seen[static_cast<std::size_t>(to)] = 1;
    h[static_cast<std::size_t>(to)] = want;
    queue.push_back(to);
  };
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    Vertex v = d.vertex(i);
    visit(i, d.index_of(v + Vertex{1, 0}), ar.east[static_cast<std::size_t>(i)]);
    visit(i, d.index_of(v + Vertex{0, 1}), ar.north[static_cast<std::size_t>(i)]);
    int w = d.index_of(v - Vertex{1, 0});
    if (w >= 0) visit(i, w, -ar.east[static_cast<std::size_t>(w)]);
    int s = d.index_of(v - Vertex{0, 1});
    if (s >= 0) visit(i, s, -ar.north[static_cast<std::size_t>(s)]);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidArgument("domain is disconnected; one base value cannot fix the lift");
  return HeightFunction(ar.domain, std::move(h), base);
}

// ---------------------------------------------------------------------------
// Extremal height functions

namespace detail {

/// Least (sign = +1) or greatest (sign = -1) homomorphism within the
/// propagated sets, by monotone fixpoint iteration of h_v >= h_u - 1.
inline HeightFunction extremal(DomainRef d, const BoundaryCondition& bc, int sign) {
  auto sets = admissible_sets(*d, bc);
  if (!sets) throw InvalidArgument("boundary condition is not admissible");
  const int n = static_cast<int>(d->size());
  std::vector<int> h(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& s = (*sets)[static_cast<std::size_t>(i)];
    h[static_cast<std::size_t>(i)] = sign > 0 ? s.lo : s.hi;
  }
  // smallest allowed value >= t (sign +1), or largest <= t (sign -1)
  auto snap = [&](int i, int t) {
    const auto& s = (*sets)[static_cast<std::size_t>(i)];
    if (s.listed) {
      if (sign > 0) {
        auto it = std::lower_bound(s.list.begin(), s.list.end(), t);
        if (it == s.list.end()) throw InternalCorruption("extremal iteration left the allowed set");
        return *it;
      }
      auto it = std::upper_bound(s.list.begin(), s.list.end(), t);
      if (it == s.list.begin()) throw InternalCorruption("extremal iteration left the allowed set");
      return *(it - 1);
    }
    int v = sign > 0 ? std::max(t, s.lo) : std::min(t, s.hi);
    if (parity(v) != parity(d->vertex(i))) v += sign;
    if (v < s.lo || v > s.hi) throw InternalCorruption("extremal iteration left the allowed set");
    return v;
  };
  std::deque<int> work;
  std::vector<char> queued(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) work.push_back(i);
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    queued[static_cast<std::size_t>(v)] = 0;
    int target = h[static_cast<std::size_t>(v)];
    for (int u : d->neighbours(v))
      target = sign > 0 ? std::max(target, h[static_cast<std::size_t>(u)] - 1)
                        : std::min(target, h[static_cast<std::size_t>(u)] + 1);
    int nv = snap(v, target);
    if (nv == h[static_cast<std::size_t>(v)]) continue;
    h[static_cast<std::size_t>(v)] = nv;
    for (int u : d->neighbours(v))
      if (!queued[static_cast<std::size_t>(u)]) {
        queued[static_cast<std::size_t>(u)] = 1;
        work.push_back(u);
      }
  }
  HeightFunction out(std::move(d), std::move(h));
  if (!validate(out) || !satisfies(out, bc)) throw InternalCorruption("extremal height function is invalid");
  return out;
}

}  // namespace detail

/// Pointwise-lowest element of Hom(D, B, kappa).
inline HeightFunction minimal_height(DomainRef d, const BoundaryCondition& bc) { return detail::extremal(std::move(d), bc, +1); }

/// Pointwise-highest element of Hom(D, B, kappa).
inline HeightFunction maximal_height(DomainRef d, const BoundaryCondition& bc) { return detail::extremal(std::move(d), bc, -1); }

}  // namespace squareice
