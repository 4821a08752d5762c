#pragma once

// Connectivity of level sets: crossings, annulus circuits, nested loops,
// cluster diameters and the duality identities between them.

#include <array>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "squareice/height.hpp"

namespace squareice {

/// NN: Euclidean distance 1. Cross: Euclidean distance sqrt(2). Star: graph
/// distance exactly 2. King is NN together with Cross; it only appears as the
/// dual of NN.
enum class Adjacency { NN, Cross, Star, King };

inline std::span<const Vertex> adjacency_steps(Adjacency a) {
  static constexpr std::array<Vertex, 4> nn{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  static constexpr std::array<Vertex, 4> cross{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  static constexpr std::array<Vertex, 8> star{{{2, 0}, {0, 2}, {-2, 0}, {0, -2}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  static constexpr std::array<Vertex, 8> king{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  switch (a) {
    case Adjacency::NN: return nn;
    case Adjacency::Cross: return cross;
    case Adjacency::Star: return star;
    case Adjacency::King: return king;
  }
  return nn;
}

inline std::string to_string(Adjacency a) {
  switch (a) {
    case Adjacency::NN: return "nn";
    case Adjacency::Cross: return "cross";
    case Adjacency::Star: return "star";
    case Adjacency::King: return "king";
  }
  return "nn";
}

inline Adjacency adjacency_from_string(const std::string& s) {
  if (s == "nn") return Adjacency::NN;
  if (s == "cross" || s == "x") return Adjacency::Cross;
  if (s == "star" || s == "*") return Adjacency::Star;
  if (s == "king") return Adjacency::King;
  throw InvalidArgument("unknown adjacency '" + s + "'");
}

/// Membership of transform(h_v) in a value set.
struct LevelPredicate {
  enum class Transform { Identity, Absolute, Shift };
  Transform transform = Transform::Identity;
  int shift = 0;
  ValueSet set = ValueSet::all();

  bool operator()(int h) const {
    int t = h;
    if (transform == Transform::Absolute) t = std::abs(h);
    else if (transform == Transform::Shift) t = h + shift;
    return set.contains(t);
  }

  static LevelPredicate ge(int k) { return {Transform::Identity, 0, ValueSet::at_least(k)}; }
  static LevelPredicate gt(int k) { return ge(k + 1); }
  static LevelPredicate le(int k) { return {Transform::Identity, 0, ValueSet::at_most(k)}; }
  static LevelPredicate lt(int k) { return le(k - 1); }
  static LevelPredicate eq(int k) { return {Transform::Identity, 0, ValueSet::single(k)}; }
  static LevelPredicate in(ValueSet s) { return {Transform::Identity, 0, std::move(s)}; }
  static LevelPredicate abs_ge(int k) { return {Transform::Absolute, 0, ValueSet::at_least(k)}; }
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[static_cast<std::size_t>(a)] < rank_[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    if (rank_[static_cast<std::size_t>(a)] == rank_[static_cast<std::size_t>(b)]) ++rank_[static_cast<std::size_t>(a)];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

/// Breadth-first search over domain vertices with `allowed[i]`, from `sources`.
inline std::vector<char> reach(const Domain& d, const std::vector<char>& allowed, const std::vector<int>& sources,
                               Adjacency adj) {
  std::vector<char> seen(d.size(), 0);
  std::deque<int> queue;
  for (int s : sources) {
    if (!allowed[static_cast<std::size_t>(s)] || seen[static_cast<std::size_t>(s)]) continue;
    seen[static_cast<std::size_t>(s)] = 1;
    queue.push_back(s);
  }
  auto steps = adjacency_steps(adj);
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    Vertex v = d.vertex(i);
    for (auto s : steps) {
      int j = d.index_of(v + s);
      if (j < 0 || seen[static_cast<std::size_t>(j)] || !allowed[static_cast<std::size_t>(j)]) continue;
      seen[static_cast<std::size_t>(j)] = 1;
      queue.push_back(j);
    }
  }
  return seen;
}

inline std::vector<char> qualifying(const HeightFunction& h, const LevelPredicate& p) {
  std::vector<char> q(h.values().size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = p(h.values()[i]) ? 1 : 0;
  return q;
}

inline bool boundary_is_nn_connected(const Domain& d) {
  const auto& idx = d.boundary_indices();
  if (idx.empty()) return true;
  std::vector<char> on(d.size(), 0);
  for (int i : idx) on[static_cast<std::size_t>(i)] = 1;
  auto seen = reach(d, on, {idx.front()}, Adjacency::NN);
  for (int i : idx)
    if (!seen[static_cast<std::size_t>(i)]) return false;
  return true;
}

}  // namespace detail

/// Some adj-path of vertices satisfying p joins `from` to `to`.
inline bool connects(const HeightFunction& h, const std::vector<int>& from, const std::vector<int>& to,
                     const LevelPredicate& p, Adjacency adj) {
  auto q = detail::qualifying(h, p);
  auto seen = detail::reach(h.domain(), q, from, adj);
  for (int t : to)
    if (seen[static_cast<std::size_t>(t)]) return true;
  return false;
}

/// C_p^adj(D, a, b, c, d): a path of vertices satisfying p from [ab] to [cd].
inline bool crosses(const HeightFunction& h, const Quad& q, const LevelPredicate& p, Adjacency adj) {
  return connects(h, q.arc(0), q.arc(2), p, adj);
}

// ---------------------------------------------------------------------------
// Annulus circuits

namespace detail {

inline std::vector<int> annulus_vertices(const Domain& d, const Annulus& a) {
  std::vector<int> out;
  for (int y = a.center.y - a.outer; y <= a.center.y + a.outer; ++y) {
    for (int x = a.center.x - a.outer; x <= a.center.x + a.outer; ++x) {
      Vertex v{x, y};
      if (!a.contains(v)) continue;
      int i = d.index_of(v);
      if (i < 0 || (d.is_torus() && d.wrap(v) != v)) throw InvalidArgument("annulus is not contained in the domain");
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

inline bool circuit_in_annulus_winding(const HeightFunction& h, const Annulus& a, const LevelPredicate& p,
                                       Adjacency adj);

/// An adj-circuit of vertices satisfying p inside the annulus, winding around
/// its centre. For NN and Cross this is the absence of a blocking path through
/// the complement from the hole to the outside: King-paths block NN-circuits,
/// NN-paths block Cross-circuits of level sets. Star-circuits and annuli one
/// vertex wide go to the direct winding detector.
inline bool circuit_in_annulus(const HeightFunction& h, const Annulus& a, const LevelPredicate& p, Adjacency adj) {
  if (adj == Adjacency::Star || a.outer == a.inner + 1) return circuit_in_annulus_winding(h, a, p, adj);
  const auto& d = h.domain();
  auto verts = detail::annulus_vertices(d, a);
  Adjacency dual = adj == Adjacency::NN || adj == Adjacency::King ? Adjacency::King : Adjacency::NN;
  std::vector<char> blocked(d.size(), 0);
  std::vector<int> sources;
  for (int i : verts) {
    if (p(h[i])) continue;
    blocked[static_cast<std::size_t>(i)] = 1;
    Vertex v = d.vertex(i) - a.center;
    // a blocking path leaves the hole through a dual step
    bool corner = std::abs(v.x) == std::abs(v.y);
    if (a.on_inner_ring(d.vertex(i)) && (dual == Adjacency::King || !corner)) sources.push_back(i);
  }
  auto seen = detail::reach(d, blocked, sources, dual);
  for (int i : verts)
    if (seen[static_cast<std::size_t>(i)] && a.on_outer_ring(d.vertex(i))) return false;
  return true;
}

/// Direct detector: lifts each component to the cover of the punctured plane,
/// tracking sheet changes across a ray from the centre. A component
/// contains a circuit with nonzero winding iff a vertex is reached on two sheets.
inline bool circuit_in_annulus_winding(const HeightFunction& h, const Annulus& a, const LevelPredicate& p, Adjacency adj) {
  const auto& d = h.domain();
  auto verts = detail::annulus_vertices(d, a);
  std::vector<char> in(d.size(), 0);
  for (int i : verts) in[static_cast<std::size_t>(i)] = p(h[i]) ? 1 : 0;
  // The puncture sits at c + (1/4, 1/4) and the ray leaves it along +x; no
  // step between annulus vertices passes through it. Coordinates are scaled by 4.
  const long long cx = a.center.x, cy = a.center.y;
  auto crossing = [&](Vertex u, Vertex s) {
    long long y0 = 4 * (u.y - cy), y1 = 4 * (u.y + s.y - cy);
    if (!((y0 < 1 && y1 > 1) || (y0 > 1 && y1 < 1))) return 0;
    long long x4 = 4 * (u.x - cx) + (1 - y0) * s.x / s.y;
    if (x4 <= 1) return 0;
    return y1 > y0 ? 1 : -1;
  };
  std::vector<int> sheet(d.size(), 0);
  std::vector<char> seen(d.size(), 0);
  auto steps = adjacency_steps(adj);
  for (int s : verts) {
    if (!in[static_cast<std::size_t>(s)] || seen[static_cast<std::size_t>(s)]) continue;
    seen[static_cast<std::size_t>(s)] = 1;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int i = queue.front();
      queue.pop_front();
      Vertex u = d.vertex(i);
      for (auto st : steps) {
        Vertex w = u + st;
        if (!a.contains(w)) continue;
        int j = d.index_of(w);
        if (j < 0 || !in[static_cast<std::size_t>(j)]) continue;
        int want = sheet[static_cast<std::size_t>(i)] + crossing(u, st);
        if (!seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          sheet[static_cast<std::size_t>(j)] = want;
          queue.push_back(j);
        } else if (sheet[static_cast<std::size_t>(j)] != want) {
          return true;
        }
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Duality identities

struct DualityOptions {
  // The adjacency used wherever a Cross- or Star-connection is meant; only
  // overridden to check that the identities detect a wrong convention.
  Adjacency cross = Adjacency::Cross;
  Adjacency star = Adjacency::Star;
};

/// Every applicable identity of the crossing duality for this configuration;
/// returns a description of the first one that fails.
///
/// (i)   no Cross-crossing of h > m from [ab] to [cd]  <=>  NN-crossing of
///       h <= m from [bc] to [da] (on domains bounded by a Cross-circuit the
///       blocking Cross-path may instead start next to [ab] or [cd]); that event contains the Star-crossing of
///       h < m, which contains the Cross-crossing of h < m, and equals it
///       when no vertex of [bc] or [da] has h = m.
/// (ii)  when h >= k on [ab] and [cd] and h <= k on [bc] and [da], for m >= k:
///       C_{h>=m} = C_{h in {m,m+1}} and C^x_{h>=m} = C^x_{h=m}; also
///       C_{h>=m} = C^*_{h=m+1} when no vertex of [ab] or [cd] has h = m.
/// (iii) for m >= 1, C_{|h|>=m} = C_{h>=m} or C_{h<=-m}.
inline std::optional<std::string> duality_violation(const HeightFunction& h, const Quad& q, int m,
                                                    const DualityOptions& opt = {}) {
  const auto& ab = q.arc(0);
  const auto& bc = q.arc(1);
  const auto& cd = q.arc(2);
  const auto& da = q.arc(3);
  using P = LevelPredicate;
  const Adjacency X = opt.cross, S = opt.star, N = Adjacency::NN;

  bool x_gt = connects(h, ab, cd, P::gt(m), X);
  bool nn_le = connects(h, bc, da, P::le(m), N);
  if (x_gt && nn_le) return "(i) Cross-crossing of h>m and NN-crossing of h<=m on the rotated quad both occur";
  // When the boundary is only a Cross-circuit, a blocking Cross-path of h > m may
  // end next to [ab] or [cd] instead of on it; that needs a vertex with h = m there.
  bool sides_at_m = false;
  for (const auto* arc : {&ab, &cd})
    for (int i : *arc) sides_at_m |= h[i] == m;
  if (!x_gt && !nn_le) {
    bool guarded = false;
    if (!detail::boundary_is_nn_connected(h.domain())) {
      // ... or run on the other parity, starting next to an arc vertex
      auto thick = [&](const std::vector<int>& arc) {
        std::vector<int> out = arc;
        for (int i : arc)
          for (int j : h.domain().neighbours(i))
            if (!h.domain().on_boundary(j)) out.push_back(j);
        return out;
      };
      guarded = sides_at_m || connects(h, thick(ab), thick(cd), P::gt(m), X);
    }
    if (!guarded) return "(i) neither the Cross-crossing of h>m nor the NN-crossing of h<=m on the rotated quad occurs";
  }
  bool star_lt = connects(h, bc, da, P::lt(m), S);
  bool x_lt = connects(h, bc, da, P::lt(m), X);
  if (star_lt && !nn_le) return "(i) Star-crossing of h<m without NN-crossing of h<=m";
  if (x_lt && !star_lt) return "(i) Cross-crossing of h<m without Star-crossing";
  bool arcs_hit_m = false;
  for (const auto* arc : {&bc, &da})
    for (int i : *arc) arcs_hit_m |= h[i] == m;
  if (!arcs_hit_m && star_lt != nn_le) return "(i) NN-crossing of h<=m and Star-crossing of h<m differ";

  // (ii): the largest admissible k is min over [ab] u [cd]; it must dominate [bc] u [da]
  int lo_sides = kPosInf, hi_caps = kNegInf;
  for (const auto* arc : {&ab, &cd})
    for (int i : *arc) lo_sides = std::min(lo_sides, h[i]);
  for (const auto* arc : {&bc, &da})
    for (int i : *arc) hi_caps = std::max(hi_caps, h[i]);
  if (hi_caps <= lo_sides && m >= hi_caps) {
    bool ge = connects(h, ab, cd, P::ge(m), N);
    bool two = connects(h, ab, cd, P::in(ValueSet::interval(m, m + 1)), N);
    if (ge != two) return "(ii) C_{h>=m} and C_{h in {m,m+1}} differ";
    bool xge = connects(h, ab, cd, P::ge(m), X);
    bool xeq = connects(h, ab, cd, P::eq(m), X);
    if (xge != xeq) return "(ii) Cross-crossings of h>=m and h=m differ";
    if (!sides_at_m) {
      bool seq = connects(h, ab, cd, P::eq(m + 1), S);
      if (ge != seq) return "(ii) C_{h>=m} and C^*_{h=m+1} differ";
    }
  }

  if (m >= 1) {
    bool a = connects(h, ab, cd, P::abs_ge(m), N);
    bool b = connects(h, ab, cd, P::ge(m), N) || connects(h, ab, cd, P::le(-m), N);
    if (a != b) return "(iii) C_{|h|>=m} differs from C_{h>=m} or C_{h<=-m}";
  }
  return std::nullopt;
}

inline bool duality_check(const HeightFunction& h, const Quad& q, int m, const DualityOptions& opt = {}) {
  return !duality_violation(h, q, m, opt).has_value();
}

/// Exactly one of: an NN-crossing of |h| >= 1 from the inner ring to the
/// outer ring of the annulus, or a Cross-circuit of h = 0 inside it.
inline bool annulus_duality_check(const HeightFunction& h, const Annulus& a, const DualityOptions& opt = {}) {
  const auto& d = h.domain();
  auto verts = detail::annulus_vertices(d, a);
  std::vector<char> allowed(d.size(), 0);
  std::vector<int> inner, outer;
  for (int i : verts) {
    allowed[static_cast<std::size_t>(i)] = std::abs(h[i]) >= 1;
    if (a.on_inner_ring(d.vertex(i))) inner.push_back(i);
    if (a.on_outer_ring(d.vertex(i))) outer.push_back(i);
  }
  auto seen = detail::reach(d, allowed, inner, Adjacency::NN);
  bool crossing = false;
  for (int i : outer) crossing |= seen[static_cast<std::size_t>(i)] != 0;
  bool loop = circuit_in_annulus_winding(h, a, LevelPredicate::eq(0), opt.cross);
  return crossing != loop;
}

inline bool annulus_duality_check(const HeightFunction& h, int m) {
  return annulus_duality_check(h, Annulus({0, 0}, m, 2 * m));
}

// ---------------------------------------------------------------------------
// Nested loops and clusters

struct NestedLoop {
  int k = 0;                   // level: the loop has h >= 2k
  std::vector<Vertex> loop;    // vertices of the outermost loop
  int radius = 0;              // max L-infinity distance to the origin
};

struct NestedLoopReport {
  std::vector<NestedLoop> loops;
  std::vector<int> census;  // census[i] = #{k : radius in [2^i, 2^{i+1})}
};

/// For k = 1, 2, ...: the outermost Cross-loop of h >= 2k strictly surrounding
/// the origin, while one exists. Loops through the origin do not surround it.
inline NestedLoopReport nested_loops(const HeightFunction& h) {
  const auto& d = h.domain();
  if (d.is_torus()) throw Unsupported("nested loops need a planar domain");
  int origin = d.index_of({0, 0});
  if (origin < 0) throw InvalidArgument("the domain must contain the origin");
  int top = *std::max_element(h.values().begin(), h.values().end());
  NestedLoopReport rep;
  std::vector<int> exterior_seeds;
  for (int i = 0; i < static_cast<int>(d.size()); ++i)
    if (d.on_boundary(i)) exterior_seeds.push_back(i);
  for (int k = 1; 2 * k <= top; ++k) {
    std::vector<char> passable(d.size());
    for (std::size_t i = 0; i < passable.size(); ++i) passable[i] = h.values()[i] < 2 * k;
    passable[static_cast<std::size_t>(origin)] = 1;
    auto outside = detail::reach(d, passable, exterior_seeds, Adjacency::NN);
    if (outside[static_cast<std::size_t>(origin)]) break;
    std::vector<char> rest(d.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = !outside[i];
    auto enclosed = detail::reach(d, rest, {origin}, Adjacency::NN);
    NestedLoop loop;
    loop.k = k;
    for (int i = 0; i < static_cast<int>(d.size()); ++i) {
      if (!enclosed[static_cast<std::size_t>(i)]) continue;
      bool edge = d.on_boundary(i);
      for (int j : d.neighbours(i)) edge |= outside[static_cast<std::size_t>(j)] != 0;
      if (!edge) continue;
      loop.loop.push_back(d.vertex(i));
      loop.radius = std::max(loop.radius, linf_norm(d.vertex(i)));
    }
    rep.loops.push_back(std::move(loop));
  }
  for (auto& l : rep.loops) {
    int i = 0;
    while ((2 << i) <= l.radius) ++i;
    if (rep.census.size() <= static_cast<std::size_t>(i)) rep.census.resize(static_cast<std::size_t>(i) + 1, 0);
    ++rep.census[static_cast<std::size_t>(i)];
  }
  return rep;
}

/// Largest L-infinity extent of an adj-component of {v in region : p(h_v)}.
/// `region` lists vertex indices of h's domain; empty means the whole domain.
inline int max_cluster_diameter(const HeightFunction& h, const std::vector<int>& region, const LevelPredicate& p,
                                Adjacency adj) {
  const auto& d = h.domain();
  std::vector<char> in(d.size(), 0);
  if (region.empty()) {
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = p(h.values()[i]);
  } else {
    for (int i : region) in[static_cast<std::size_t>(i)] = p(h[i]);
  }
  detail::DisjointSets ds(d.size());
  auto steps = adjacency_steps(adj);
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    if (!in[static_cast<std::size_t>(i)]) continue;
    for (auto s : steps) {
      int j = d.index_of(d.vertex(i) + s);
      if (j >= 0 && in[static_cast<std::size_t>(j)]) ds.unite(i, j);
    }
  }
  std::map<int, std::array<int, 4>> box;  // xmin, xmax, ymin, ymax
  int best = 0;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    if (!in[static_cast<std::size_t>(i)]) continue;
    Vertex v = d.vertex(i);
    auto [it, fresh] = box.try_emplace(ds.find(i), std::array<int, 4>{v.x, v.x, v.y, v.y});
    auto& b = it->second;
    b[0] = std::min(b[0], v.x);
    b[1] = std::max(b[1], v.x);
    b[2] = std::min(b[2], v.y);
    b[3] = std::max(b[3], v.y);
    best = std::max({best, b[1] - b[0], b[3] - b[2]});
  }
  return best;
}

/// Indices of the vertices of h's domain inside the box [-nx,nx] x [-ny,ny].
inline std::vector<int> box_region(const Domain& d, int nx, int ny) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    Vertex v = d.vertex(i);
    if (std::abs(v.x) <= nx && std::abs(v.y) <= ny) out.push_back(i);
  }
  return out;
}

/// Axis-parallel box [-nx,nx] x [-ny,ny] inside a larger domain.
struct Box {
  int nx = 1;
  int ny = 1;
  bool horizontal = true;  // crossing from x = -nx to x = nx; else from y = -ny to y = ny
};

/// H_p(box) (or V_p when !b.horizontal): an adj-path of vertices satisfying p
/// inside the box joining its two opposite sides.
inline bool box_crossing(const HeightFunction& h, const Box& b, const LevelPredicate& p, Adjacency adj) {
  const auto& d = h.domain();
  std::vector<char> allowed(d.size(), 0);
  std::vector<int> from;
  std::vector<int> to;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    Vertex v = d.vertex(i);
    if (std::abs(v.x) > b.nx || std::abs(v.y) > b.ny) continue;
    if (!p(h[i])) continue;
    allowed[static_cast<std::size_t>(i)] = 1;
    int t = b.horizontal ? v.x : v.y;
    int r = b.horizontal ? b.nx : b.ny;
    if (t == -r) from.push_back(i);
    if (t == r) to.push_back(i);
  }
  for (Vertex c : {Vertex{-b.nx, -b.ny}, Vertex{b.nx, b.ny}})
    if (!d.contains(c)) throw InvalidArgument("box does not fit in the domain");
  auto seen = detail::reach(d, allowed, from, adj);
  for (int t : to)
    if (seen[static_cast<std::size_t>(t)]) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Events

/// A crossing of a quad or a box, or a circuit in an annulus, as one evaluable object.
struct EventSpec {
  enum class Mode { Crossing, Circuit, BoxCrossing };
  Mode mode = Mode::Crossing;
  std::optional<Quad> quad;
  std::optional<Annulus> annulus;
  std::optional<Box> box;
  LevelPredicate predicate;
  Adjacency adjacency = Adjacency::NN;

  static EventSpec crossing(Quad q, LevelPredicate p, Adjacency adj) {
    EventSpec e;
    e.mode = Mode::Crossing;
    e.quad = std::move(q);
    e.predicate = std::move(p);
    e.adjacency = adj;
    return e;
  }
  static EventSpec circuit(Annulus a, LevelPredicate p, Adjacency adj) {
    EventSpec e;
    e.mode = Mode::Circuit;
    e.annulus = a;
    e.predicate = std::move(p);
    e.adjacency = adj;
    return e;
  }

  static EventSpec box_crossing(Box b, LevelPredicate p, Adjacency adj) {
    EventSpec e;
    e.mode = Mode::BoxCrossing;
    e.box = b;
    e.predicate = std::move(p);
    e.adjacency = adj;
    return e;
  }

  bool operator()(const HeightFunction& h) const {
    if (mode == Mode::BoxCrossing) {
      if (!box) throw InvalidArgument("box crossing events need a box");
      return squareice::box_crossing(h, *box, predicate, adjacency);
    }
    if (mode == Mode::Crossing) {
      if (!quad) throw InvalidArgument("crossing events need a quad");
      return crosses(h, *quad, predicate, adjacency);
    }
    if (!annulus) throw InvalidArgument("circuit events need an annulus");
    return circuit_in_annulus(h, *annulus, predicate, adjacency);
  }
};

}  // namespace squareice
