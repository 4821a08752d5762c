#pragma once

// Integer-lattice geometry: vertices, domains, quads, annuli, boundary
// conditions, and the admissibility decision procedure.

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "squareice/error.hpp"

namespace squareice {

struct Vertex {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
  friend constexpr Vertex operator+(Vertex a, Vertex b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vertex operator-(Vertex a, Vertex b) { return {a.x - b.x, a.y - b.y}; }
};

/// 0 for even vertices, 1 for odd ones.
constexpr int parity(Vertex v) { return ((v.x + v.y) % 2 + 2) % 2; }
constexpr int parity(int value) { return ((value % 2) + 2) % 2; }
constexpr int linf_norm(Vertex v) { return std::max(std::abs(v.x), std::abs(v.y)); }
constexpr int l1_norm(Vertex v) { return std::abs(v.x) + std::abs(v.y); }

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x)) << 32) |
                                      static_cast<std::uint32_t>(v.y));
  }
};

inline constexpr std::array<Vertex, 4> kNearestSteps{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

enum class DomainKind { Even, Mixed, Torus, General };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::Even: return "even";
    case DomainKind::Mixed: return "mixed";
    case DomainKind::Torus: return "torus";
    case DomainKind::General: return "general";
  }
  return "general";
}

inline DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "even") return DomainKind::Even;
  if (s == "mixed") return DomainKind::Mixed;
  if (s == "torus") return DomainKind::Torus;
  if (s == "general") return DomainKind::General;
  throw InvalidArgument("unknown domain kind '" + s + "'");
}

/// A finite vertex set with its nearest-neighbour graph, or the torus (Z/nZ)^2.
///
/// Vertices are stored row-major (by y, then x); a vertex's position in
/// vertices() is its index everywhere else in the library. The boundary is
/// the set of vertices with a nearest neighbour outside the set, listed
/// counter-clockwise along the outer contour. Tori have no boundary.
class Domain {
 public:
  static Domain from_vertices(std::vector<Vertex> vs, DomainKind kind = DomainKind::General) {
    if (kind == DomainKind::Torus) throw InvalidArgument("use Domain::torus for torus domains");
    if (vs.empty()) throw InvalidArgument("domain must be nonempty");
    std::sort(vs.begin(), vs.end(), [](Vertex a, Vertex b) { return std::pair(a.y, a.x) < std::pair(b.y, b.x); });
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    Domain d;
    d.kind_ = kind;
    d.vertices_ = std::move(vs);
    d.index_grid();
    d.build_neighbours();
    d.build_boundary();
    return d;
  }

  static Domain torus(int n) {
    if (n < 2 || n % 2 != 0) throw InvalidArgument("torus period must be even and >= 2");
    Domain d;
    d.kind_ = DomainKind::Torus;
    d.period_ = n;
    d.vertices_.reserve(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) d.vertices_.push_back({x, y});
    d.index_grid();
    d.build_neighbours();
    return d;
  }

  DomainKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == DomainKind::Torus; }
  std::optional<int> torus_period() const {
    return is_torus() ? std::optional<int>(period_) : std::nullopt;
  }

  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  Vertex vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<Vertex>& boundary() const { return boundary_; }
  const std::vector<int>& boundary_indices() const { return boundary_idx_; }
  bool on_boundary(int i) const { return on_boundary_[static_cast<std::size_t>(i)] != 0; }

  Vertex wrap(Vertex v) const {
    if (!is_torus()) return v;
    return {((v.x % period_) + period_) % period_, ((v.y % period_) + period_) % period_};
  }

  /// Index of v (wrapped on the torus), or -1 when v is not in the domain.
  int index_of(Vertex v) const {
    v = wrap(v);
    if (v.x < xmin_ || v.x > xmax_ || v.y < ymin_ || v.y > ymax_) return -1;
    return grid_[static_cast<std::size_t>((v.y - ymin_) * width() + (v.x - xmin_))];
  }
  bool contains(Vertex v) const { return index_of(v) >= 0; }

  /// Nearest neighbours inside the domain, without repetition.
  std::span<const int> neighbours(int i) const {
    auto b = nbr_offset_[static_cast<std::size_t>(i)];
    auto e = nbr_offset_[static_cast<std::size_t>(i) + 1];
    return {nbr_.data() + b, nbr_.data() + e};
  }

  int xmin() const { return xmin_; }
  int xmax() const { return xmax_; }
  int ymin() const { return ymin_; }
  int ymax() const { return ymax_; }
  int width() const { return xmax_ - xmin_ + 1; }
  int height() const { return ymax_ - ymin_ + 1; }

  /// Connected components of the nearest-neighbour graph, as a label per vertex.
  std::vector<int> component_labels(int* count = nullptr) const {
    std::vector<int> label(size(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int s = 0; s < static_cast<int>(size()); ++s) {
      if (label[static_cast<std::size_t>(s)] >= 0) continue;
      label[static_cast<std::size_t>(s)] = next;
      stack.push_back(s);
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : neighbours(v)) {
          if (label[static_cast<std::size_t>(u)] < 0) {
            label[static_cast<std::size_t>(u)] = next;
            stack.push_back(u);
          }
        }
      }
      ++next;
    }
    if (count) *count = next;
    return label;
  }

  friend bool operator==(const Domain& a, const Domain& b) {
    return a.kind_ == b.kind_ && a.period_ == b.period_ && a.vertices_ == b.vertices_;
  }

 private:
  void index_grid() {
    xmin_ = ymin_ = INT_MAX;
    xmax_ = ymax_ = INT_MIN;
    for (auto v : vertices_) {
      xmin_ = std::min(xmin_, v.x);
      xmax_ = std::max(xmax_, v.x);
      ymin_ = std::min(ymin_, v.y);
      ymax_ = std::max(ymax_, v.y);
    }
    grid_.assign(static_cast<std::size_t>(width()) * height(), -1);
    for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
      auto v = vertices_[static_cast<std::size_t>(i)];
      grid_[static_cast<std::size_t>((v.y - ymin_) * width() + (v.x - xmin_))] = i;
    }
  }

  void build_neighbours() {
    nbr_offset_.assign(1, 0);
    on_boundary_.assign(size(), 0);
    for (int i = 0; i < static_cast<int>(size()); ++i) {
      auto v = vertices_[static_cast<std::size_t>(i)];
      std::array<int, 4> found{};
      int nf = 0;
      for (auto s : kNearestSteps) {
        int j = index_of(v + s);
        if (j < 0) {
          on_boundary_[static_cast<std::size_t>(i)] = 1;
          continue;
        }
        if (std::find(found.begin(), found.begin() + nf, j) == found.begin() + nf) found[nf++] = j;
      }
      for (int k = 0; k < nf; ++k) nbr_.push_back(found[k]);
      nbr_offset_.push_back(static_cast<int>(nbr_.size()));
    }
    if (is_torus()) std::fill(on_boundary_.begin(), on_boundary_.end(), 0);
  }

  // Traces the outer contour of the union of unit squares centred on the
  // vertices (interior on the left, preferring left turns at pinch corners)
  // and lists boundary vertices by first appearance. Boundary vertices on
  // holes, if any, follow in row-major order.
  void build_boundary() {
    struct Edge {
      int sx, sy, ex, ey, owner;
    };
    std::map<std::pair<int, int>, std::vector<int>> out_of;
    std::vector<Edge> edges;
    for (int i = 0; i < static_cast<int>(size()); ++i) {
      Vertex v = vertices_[static_cast<std::size_t>(i)];
      int x = 2 * v.x, y = 2 * v.y;
      auto add = [&](Vertex step, int sx, int sy, int ex, int ey) {
        if (index_of(v + step) >= 0) return;
        out_of[{sx, sy}].push_back(static_cast<int>(edges.size()));
        edges.push_back({sx, sy, ex, ey, i});
      };
      add({1, 0}, x + 1, y - 1, x + 1, y + 1);
      add({0, 1}, x + 1, y + 1, x - 1, y + 1);
      add({-1, 0}, x - 1, y + 1, x - 1, y - 1);
      add({0, -1}, x - 1, y - 1, x + 1, y - 1);
    }
    std::vector<char> listed(size(), 0);
    auto emit = [&](int i) {
      if (listed[static_cast<std::size_t>(i)]) return;
      listed[static_cast<std::size_t>(i)] = 1;
      boundary_idx_.push_back(i);
      boundary_.push_back(vertices_[static_cast<std::size_t>(i)]);
    };
    if (!edges.empty()) {
      // vertices_ is row-major, so the first edge list entry of vertex 0 with a
      // south side starts on the outer contour
      int start = -1;
      for (int e = 0; e < static_cast<int>(edges.size()) && start < 0; ++e)
        if (edges[static_cast<std::size_t>(e)].owner == 0 && edges[static_cast<std::size_t>(e)].sy == edges[static_cast<std::size_t>(e)].ey &&
            edges[static_cast<std::size_t>(e)].sx < edges[static_cast<std::size_t>(e)].ex)
          start = e;
      if (start < 0) throw InternalCorruption("contour start not found");
      int e = start;
      std::size_t guard = 0;
      do {
        const Edge& cur = edges[static_cast<std::size_t>(e)];
        emit(cur.owner);
        int dx = cur.ex - cur.sx, dy = cur.ey - cur.sy;
        const auto& cand = out_of[{cur.ex, cur.ey}];
        int best = -1, best_rank = 4;
        for (int c : cand) {
          const Edge& nx = edges[static_cast<std::size_t>(c)];
          int ndx = nx.ex - nx.sx, ndy = nx.ey - nx.sy;
          int cross = dx * ndy - dy * ndx;
          int rank = cross > 0 ? 0 : (cross == 0 ? 1 : 2);
          if (rank < best_rank) {
            best_rank = rank;
            best = c;
          }
        }
        if (best < 0 || ++guard > edges.size()) throw InternalCorruption("contour trace failed");
        e = best;
      } while (e != start);
    }
    for (int i = 0; i < static_cast<int>(size()); ++i)
      if (on_boundary_[static_cast<std::size_t>(i)]) emit(i);
  }

  DomainKind kind_ = DomainKind::General;
  int period_ = 0;
  std::vector<Vertex> vertices_;
  std::vector<Vertex> boundary_;
  std::vector<int> boundary_idx_;
  std::vector<char> on_boundary_;
  std::vector<int> nbr_offset_;
  std::vector<int> nbr_;
  std::vector<int> grid_;
  int xmin_ = 0, xmax_ = 0, ymin_ = 0, ymax_ = 0;
};

using DomainRef = std::shared_ptr<const Domain>;

inline DomainRef share(Domain d) { return std::make_shared<const Domain>(std::move(d)); }

/// A quad: a domain with four marked boundary points in counter-clockwise
/// order. arcs()[0..3] are [ab], [bc], [cd], [da] as vertex indices, each
/// listed in counter-clockwise order and sharing only their endpoints.
class Quad {
 public:
  Quad(DomainRef domain, Vertex a, Vertex b, Vertex c, Vertex d) : domain_(std::move(domain)) {
    if (!domain_ || domain_->is_torus()) throw InvalidArgument("quads need a planar domain");
    const auto& bnd = domain_->boundary();
    std::array<Vertex, 4> marks{a, b, c, d};
    for (int k = 0; k < 4; ++k) {
      auto it = std::find(bnd.begin(), bnd.end(), marks[static_cast<std::size_t>(k)]);
      if (it == bnd.end()) throw InvalidArgument("marked point is not a boundary vertex");
      pos_[static_cast<std::size_t>(k)] = static_cast<int>(it - bnd.begin());
    }
    const int m = static_cast<int>(bnd.size());
    // counter-clockwise order: cumulative forward offsets from a must increase
    int total = 0;
    for (int k = 0; k < 4; ++k) {
      int from = pos_[static_cast<std::size_t>(k)];
      int to = pos_[static_cast<std::size_t>((k + 1) % 4)];
      int len = ((to - from) % m + m) % m;
      if (len == 0) throw InvalidArgument("marked points must be distinct");
      total += len;
      auto& arc = arcs_[static_cast<std::size_t>(k)];
      for (int s = 0; s <= len; ++s) arc.push_back(domain_->boundary_indices()[static_cast<std::size_t>((from + s) % m)]);
    }
    if (total != m) throw InvalidArgument("marked points are not in counter-clockwise order");
    marks_ = marks;
  }

  const DomainRef& domain_ref() const { return domain_; }
  const Domain& domain() const { return *domain_; }
  const std::array<std::vector<int>, 4>& arcs() const { return arcs_; }
  const std::vector<int>& arc(int k) const { return arcs_[static_cast<std::size_t>(k)]; }
  const std::array<Vertex, 4>& marks() const { return marks_; }

  /// (D, b, c, d, a): swaps the roles of the arc pairs.
  Quad rotated() const { return Quad(domain_, marks_[1], marks_[2], marks_[3], marks_[0]); }

 private:
  DomainRef domain_;
  std::array<int, 4> pos_{};
  std::array<Vertex, 4> marks_{};
  std::array<std::vector<int>, 4> arcs_;
};

/// L-infinity box annulus centre + (Lambda_outer \ Lambda_inner).
struct Annulus {
  Vertex center;
  int inner = 1;
  int outer = 2;

  Annulus(Vertex c, int in, int out) : center(c), inner(in), outer(out) {
    if (!(0 < inner && inner < outer)) throw InvalidArgument("annulus needs 0 < inner < outer");
  }
  bool contains(Vertex v) const {
    int r = linf_norm(v - center);
    return r > inner && r <= outer;
  }
  bool on_inner_ring(Vertex v) const { return linf_norm(v - center) == inner + 1; }
  bool on_outer_ring(Vertex v) const { return linf_norm(v - center) == outer; }
};

// ---------------------------------------------------------------------------
// Value sets and boundary conditions

inline constexpr int kPosInf = 1 << 28;
inline constexpr int kNegInf = -(1 << 28);

/// Allowed values at a boundary vertex: an integer interval with optional
/// infinite ends, or an explicit finite set.
class ValueSet {
 public:
  static ValueSet interval(int lo, int hi) {
    ValueSet s;
    s.lo_ = std::max(lo, kNegInf);
    s.hi_ = std::min(hi, kPosInf);
    return s;
  }
  static ValueSet single(int v) { return interval(v, v); }
  static ValueSet at_least(int lo) { return interval(lo, kPosInf); }
  static ValueSet at_most(int hi) { return interval(kNegInf, hi); }
  static ValueSet all() { return interval(kNegInf, kPosInf); }
  static ValueSet finite(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    ValueSet s;
    s.listed_ = true;
    s.values_ = std::move(values);
    s.lo_ = s.values_.empty() ? 1 : s.values_.front();
    s.hi_ = s.values_.empty() ? 0 : s.values_.back();
    return s;
  }

  bool is_interval() const { return !listed_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  const std::vector<int>& values() const { return values_; }
  bool bounded_below() const { return lo_ > kNegInf; }
  bool bounded_above() const { return hi_ < kPosInf; }
  bool bounded() const { return bounded_below() && bounded_above(); }

  bool contains(int v) const {
    if (listed_) return std::binary_search(values_.begin(), values_.end(), v);
    return lo_ <= v && v <= hi_;
  }
  /// True when the set contains at least one value of the given parity.
  bool has_parity(int p) const {
    if (listed_)
      return std::any_of(values_.begin(), values_.end(), [p](int v) { return parity(v) == p; });
    if (lo_ > hi_) return false;
    if (!bounded_below() || !bounded_above()) return true;
    return lo_ < hi_ || parity(lo_) == p;
  }
  bool symmetric() const {
    if (listed_) {
      return std::all_of(values_.begin(), values_.end(),
                         [this](int v) { return std::binary_search(values_.begin(), values_.end(), -v); });
    }
    return lo_ == -hi_;
  }
  bool nonnegative() const { return lo_ >= 0; }

  friend bool operator==(const ValueSet& a, const ValueSet& b) {
    return a.listed_ == b.listed_ && a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.values_ == b.values_;
  }

 private:
  bool listed_ = false;
  int lo_ = kNegInf;
  int hi_ = kPosInf;
  std::vector<int> values_;
};

/// (B, kappa): allowed value sets on a support B, plus an optional B_pos for
/// |h|-adapted conditions.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;

  void set(Vertex v, ValueSet s) {
    for (auto& e : entries_) {
      if (e.first == v) {
        e.second = std::move(s);
        return;
      }
    }
    entries_.emplace_back(v, std::move(s));
  }
  const ValueSet* find(Vertex v) const {
    for (auto& e : entries_)
      if (e.first == v) return &e.second;
    return nullptr;
  }
  const std::vector<std::pair<Vertex, ValueSet>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  void set_pos_part(std::vector<Vertex> pos) {
    std::sort(pos.begin(), pos.end());
    pos_ = std::move(pos);
  }
  const std::optional<std::vector<Vertex>>& pos_part() const { return pos_; }
  bool in_pos_part(Vertex v) const {
    return pos_ && std::binary_search(pos_->begin(), pos_->end(), v);
  }

  /// Checks the |h|-adapted partition: B_pos sets are in Z_+, the rest symmetric.
  bool abs_adapted() const {
    if (!pos_) return false;
    for (auto& [v, s] : entries_) {
      if (in_pos_part(v)) {
        if (!s.nonnegative()) return false;
      } else if (!s.symmetric()) {
        return false;
      }
    }
    return std::all_of(pos_->begin(), pos_->end(), [this](Vertex v) { return find(v) != nullptr; });
  }

  // --- named constructors -------------------------------------------------

  /// {0} on every boundary vertex.
  static BoundaryCondition zero(const Domain& d) { return constant(d, 0); }

  /// {g} on every boundary vertex; the boundary must have the parity of g.
  static BoundaryCondition constant(const Domain& d, int g) {
    BoundaryCondition bc;
    for (auto v : d.boundary()) {
      if (parity(v) != parity(g)) throw InvalidArgument("constant boundary value has the wrong parity");
      bc.set(v, ValueSet::single(g));
    }
    return bc;
  }

  /// g on boundary vertices of parity g and g+1 on the others.
  static BoundaryCondition flat(const Domain& d, int g) {
    BoundaryCondition bc;
    for (auto v : d.boundary()) bc.set(v, ValueSet::single(parity(v) == parity(g) ? g : g + 1));
    return bc;
  }

  /// high on [ab] and [cd], low on the open arcs (bc) and (da). With
  /// (high, low) = (2, 0) on an even quad this is the 2/0 condition; with
  /// (2, 1) on a mixed quad the 2/1 condition.
  static BoundaryCondition quad_two_arcs(const Quad& q, int high, int low) {
    BoundaryCondition bc;
    const auto& d = q.domain();
    for (int k : {1, 3})
      for (int i : q.arc(k)) bc.set(d.vertex(i), ValueSet::single(low));
    for (int k : {0, 2})
      for (int i : q.arc(k)) bc.set(d.vertex(i), ValueSet::single(high));
    for (auto& [v, s] : bc.entries_)
      if (!s.has_parity(parity(v))) throw InvalidArgument("two-arc boundary value has the wrong parity");
    return bc;
  }

  /// A single fixed vertex; makes every configuration of a connected domain
  /// admissible up to the global shift.
  static BoundaryCondition pinned(Vertex v, int value) {
    BoundaryCondition bc;
    bc.set(v, ValueSet::single(value));
    return bc;
  }

 private:
  std::vector<std::pair<Vertex, ValueSet>> entries_;
  std::optional<std::vector<Vertex>> pos_;
};

// ---------------------------------------------------------------------------
// Per-vertex allowed sets and constraint propagation

/// Allowed values at one vertex after resolving a boundary condition. Values
/// always have the vertex's parity. When `listed`, `list` is authoritative.
struct Allowed {
  int lo = kNegInf;
  int hi = kPosInf;
  bool listed = false;
  std::vector<int> list;

  bool empty() const { return listed ? list.empty() : lo > hi; }
  bool bounded() const { return lo > kNegInf && hi < kPosInf; }
  bool fixed() const { return listed ? list.size() == 1 : lo == hi; }
  bool contains(int v) const {
    if (listed) return std::binary_search(list.begin(), list.end(), v);
    return lo <= v && v <= hi && ((v - lo) % 2 == 0 || lo == kNegInf);
  }
  std::size_t count() const {
    if (listed) return list.size();
    if (lo > hi) return 0;
    return static_cast<std::size_t>((hi - lo) / 2 + 1);
  }
  /// Enumerates the values; the set must be bounded.
  std::vector<int> values() const {
    if (listed) return list;
    std::vector<int> out;
    for (int v = lo; v <= hi; v += 2) out.push_back(v);
    return out;
  }

  friend bool operator==(const Allowed&, const Allowed&) = default;
};

namespace detail {

inline int round_up_parity(int v, int p) {
  if (v <= kNegInf) return kNegInf;
  return parity(v) == p ? v : v + 1;
}
inline int round_down_parity(int v, int p) {
  if (v >= kPosInf) return kPosInf;
  return parity(v) == p ? v : v - 1;
}

inline Allowed allowed_from(const ValueSet& s, int p) {
  Allowed a;
  if (s.is_interval()) {
    a.lo = round_up_parity(s.lo(), p);
    a.hi = round_down_parity(s.hi(), p);
    if (a.lo > kNegInf && a.hi < kPosInf && a.lo > a.hi) {
      a.lo = 1;
      a.hi = 0;
    }
  } else {
    a.listed = true;
    for (int v : s.values())
      if (parity(v) == p) a.list.push_back(v);
    a.lo = a.list.empty() ? 1 : a.list.front();
    a.hi = a.list.empty() ? 0 : a.list.back();
  }
  return a;
}

/// Intersects `a` with the +-1 image of `b`. Returns true when `a` shrank.
inline bool restrict_by_neighbour(Allowed& a, const Allowed& b) {
  if (a.empty()) return false;
  if (b.empty()) {
    bool changed = !a.empty();
    a.listed = true;
    a.list.clear();
    a.lo = 1;
    a.hi = 0;
    return changed;
  }
  if (!b.listed) {
    int lo = b.lo <= kNegInf ? kNegInf : b.lo - 1;
    int hi = b.hi >= kPosInf ? kPosInf : b.hi + 1;
    if (a.listed) {
      auto old = a.list.size();
      std::erase_if(a.list, [&](int v) { return v < lo || v > hi; });
      a.lo = a.list.empty() ? 1 : a.list.front();
      a.hi = a.list.empty() ? 0 : a.list.back();
      return a.list.size() != old;
    }
    int nlo = std::max(a.lo, lo);
    int nhi = std::min(a.hi, hi);
    bool changed = nlo != a.lo || nhi != a.hi;
    a.lo = nlo;
    a.hi = nhi;
    return changed;
  }
  // b is an explicit list: a becomes explicit too
  std::vector<int> image;
  image.reserve(2 * b.list.size());
  for (int v : b.list) {
    image.push_back(v - 1);
    image.push_back(v + 1);
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  std::vector<int> out;
  if (a.listed) {
    std::set_intersection(a.list.begin(), a.list.end(), image.begin(), image.end(), std::back_inserter(out));
  } else {
    for (int v : image)
      if (a.lo <= v && v <= a.hi) out.push_back(v);
  }
  bool changed = !a.listed || out.size() != a.list.size();
  a.listed = true;
  a.list = std::move(out);
  a.lo = a.list.empty() ? 1 : a.list.front();
  a.hi = a.list.empty() ? 0 : a.list.back();
  return changed;
}

}  // namespace detail

/// Per-vertex sets before propagation. Throws if the support leaves the domain
/// or a set has no value of its vertex's parity.
inline std::vector<Allowed> resolve(const Domain& d, const BoundaryCondition& bc) {
  std::vector<Allowed> out(d.size());
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    out[static_cast<std::size_t>(i)].lo = detail::round_up_parity(kNegInf, parity(d.vertex(i)));
    out[static_cast<std::size_t>(i)].hi = detail::round_down_parity(kPosInf, parity(d.vertex(i)));
  }
  for (auto& [v, s] : bc.entries()) {
    int i = d.index_of(v);
    if (i < 0) throw InvalidArgument("boundary condition support leaves the domain");
    if (d.is_torus() && d.wrap(v) != v) throw InvalidArgument("torus support must use canonical coordinates");
    int p = parity(v);
    out[static_cast<std::size_t>(i)] = detail::allowed_from(s, p);
  }
  return out;
}

/// Arc consistency for the edge relation |h_u - h_v| = 1, run to a fixpoint.
inline void propagate(const Domain& d, std::vector<Allowed>& sets) {
  const int n = static_cast<int>(d.size());
  std::vector<char> queued(static_cast<std::size_t>(n), 1);
  std::deque<int> work;
  for (int i = 0; i < n; ++i) work.push_back(i);
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    queued[static_cast<std::size_t>(v)] = 0;
    auto& sv = sets[static_cast<std::size_t>(v)];
    bool changed = false;
    for (int u : d.neighbours(v)) changed |= detail::restrict_by_neighbour(sv, sets[static_cast<std::size_t>(u)]);
    if (!changed) continue;
    for (int u : d.neighbours(v)) {
      if (!queued[static_cast<std::size_t>(u)]) {
        queued[static_cast<std::size_t>(u)] = 1;
        work.push_back(u);
      }
    }
  }
}

/// True when every nearest-neighbour component carries a vertex with a bounded set.
inline bool is_finite(const Domain& d, const std::vector<Allowed>& sets) {
  int ncomp = 0;
  auto label = d.component_labels(&ncomp);
  std::vector<char> bounded(static_cast<std::size_t>(ncomp), 0);
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (sets[i].bounded()) bounded[static_cast<std::size_t>(label[i])] = 1;
  return std::all_of(bounded.begin(), bounded.end(), [](char b) { return b != 0; });
}

/// Resolved and propagated sets, or nullopt when Hom(D,B,kappa) is empty or infinite.
inline std::optional<std::vector<Allowed>> admissible_sets(const Domain& d, const BoundaryCondition& bc) {
  auto sets = resolve(d, bc);
  if (!is_finite(d, sets)) return std::nullopt;
  propagate(d, sets);
  if (std::any_of(sets.begin(), sets.end(), [](const Allowed& a) { return a.empty(); })) return std::nullopt;
  return sets;
}

/// Hom(D,B,kappa) is nonempty and finite.
inline bool is_admissible(const Domain& d, const BoundaryCondition& bc) {
  return admissible_sets(d, bc).has_value();
}

// ---------------------------------------------------------------------------
// Builders

/// Lambda_n^even: the vertices inside or on the even x-circuit of
/// Lambda_{n+1} \ Lambda_{n-1} surrounding the origin.
inline Domain build_even_rect(int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidArgument("even box needs positive half-widths");
  if (parity(nx) != parity(ny)) throw InvalidArgument("even rectangle half-widths must share parity");
  std::vector<Vertex> vs;
  for (int y = -ny - 1; y <= ny + 1; ++y) {
    for (int x = -nx - 1; x <= nx + 1; ++x) {
      bool core = std::abs(x) <= nx && std::abs(y) <= ny;
      bool side = std::abs(x) == nx + 1 && std::abs(y) <= ny - 1 && parity(Vertex{x, y}) == 0;
      bool cap = std::abs(y) == ny + 1 && std::abs(x) <= nx - 1 && parity(Vertex{x, y}) == 0;
      if (core || side || cap) vs.push_back({x, y});
    }
  }
  return Domain::from_vertices(std::move(vs), DomainKind::Even);
}

inline Domain build_even_box(int n) {
  if (n < 1) throw InvalidArgument("build_even_box needs n >= 1");
  return build_even_rect(n, n);
}

/// Rectangle [x0, x0+w-1] x [y0, y0+h-1] with its nearest-neighbour ring as boundary.
inline Domain build_rect(int w, int h, int x0 = 0, int y0 = 0) {
  if (w < 1 || h < 1) throw InvalidArgument("rectangle needs positive sides");
  std::vector<Vertex> vs;
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) vs.push_back({x, y});
  return Domain::from_vertices(std::move(vs), DomainKind::General);
}

/// Corners of a rectangle domain as a quad (a top-left, then counter-clockwise),
/// so crosses(.., quad) is a horizontal crossing.
inline Quad rect_quad(const DomainRef& d) {
  return Quad(d, {d->xmin(), d->ymax()}, {d->xmin(), d->ymin()}, {d->xmax(), d->ymin()}, {d->xmax(), d->ymax()});
}

namespace detail {

/// Flood fill through non-wall vertices from `seed`, keeping every wall vertex touched.
inline std::vector<Vertex> fill_inside(const std::set<Vertex>& wall, Vertex seed, int limit) {
  std::set<Vertex> seen{seed};
  std::vector<Vertex> stack{seed};
  std::vector<Vertex> out;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    out.push_back(v);
    if (wall.count(v)) continue;
    for (auto s : kNearestSteps) {
      Vertex u = v + s;
      if (linf_norm(u) > limit) throw InternalCorruption("flood fill escaped its wall");
      if (seen.insert(u).second) stack.push_back(u);
    }
  }
  return out;
}

}  // namespace detail

/// Approximation R_{n,m}^g of [-n,n] x [0,m] with its 0/g boundary condition.
struct StripInstance {
  Domain domain;
  BoundaryCondition bc;
};

inline StripInstance build_strip_rect(int n, int m, int g) {
  if (n < 1 || m < 1 || g < 0) throw InvalidArgument("strip needs n, m >= 1 and g >= 0");
  n = 2 * (n / 2);
  if (n < 2) throw InvalidArgument("strip needs 2*floor(n/2) >= 2");
  std::set<Vertex> top;  // sides and top: the even path from (n,0) to (-n,0)
  for (int y = 0; y <= m + 1; ++y) {
    for (int x : {n, n + 1, -n - 1, -n})
      if (parity(Vertex{x, y}) == 0) top.insert({x, y});
  }
  for (int x = -n - 1; x <= n + 1; ++x)
    for (int y : {m, m + 1})
      if (parity(Vertex{x, y}) == 0) top.insert({x, y});
  std::set<Vertex> bottom;
  for (int x = -n; x <= n; ++x)
    for (int y : {-1, 0})
      if (parity(Vertex{x, y}) == parity(g)) bottom.insert({x, y});
  // the side paths start at height 0; drop the parts below the bottom path
  std::erase_if(top, [](Vertex v) { return v.y < 0; });
  std::set<Vertex> wall = top;
  wall.insert(bottom.begin(), bottom.end());
  auto vs = detail::fill_inside(wall, {0, 1}, n + m + 8);
  Domain d = Domain::from_vertices(vs, g % 2 == 0 ? DomainKind::Even : DomainKind::Mixed);

  BoundaryCondition bc;
  std::vector<Vertex> zero_side;
  for (auto v : d.boundary())
    if (!bottom.count(v)) zero_side.push_back(v);
  for (auto v : d.boundary()) {
    if (!bottom.count(v)) {
      bc.set(v, ValueSet::single(0));
      continue;
    }
    int dist = INT_MAX;
    for (auto z : zero_side) dist = std::min(dist, l1_norm(v - z));
    bc.set(v, ValueSet::single(std::min(g, dist)));
  }
  return {std::move(d), std::move(bc)};
}

/// Mixed rectangle: even x-arcs on the left and right of [-w,w] x [-n,n],
/// odd x-arcs on top and bottom. The quad marks a, b (left arc, top to
/// bottom) and c, d (right arc, bottom to top).
struct MixedInstance {
  DomainRef domain;
  Quad quad;
};

inline MixedInstance build_mixed_rect(int w, int n) {
  if (w < 1 || n < 1) throw InvalidArgument("mixed rectangle needs positive sizes");
  std::vector<Vertex> vs;
  for (int y = -n - 1; y <= n + 1; ++y) {
    for (int x = -w - 1; x <= w + 1; ++x) {
      Vertex v{x, y};
      bool core = std::abs(x) <= w && std::abs(y) <= n;
      bool side = std::abs(x) == w + 1 && std::abs(y) <= n && parity(v) == 0;
      bool cap = std::abs(y) == n + 1 && std::abs(x) <= w && parity(v) == 1;
      if (core || side || cap) vs.push_back(v);
    }
  }
  auto d = share(Domain::from_vertices(std::move(vs), DomainKind::Mixed));
  // runs of equal parity along the counter-clockwise boundary
  const auto& bnd = d->boundary();
  const int m = static_cast<int>(bnd.size());
  int start = 0;
  while (parity(bnd[static_cast<std::size_t>(start)]) == parity(bnd[static_cast<std::size_t>((start + m - 1) % m)])) {
    if (++start == m) throw InternalCorruption("mixed boundary has a single parity");
  }
  std::vector<std::pair<int, int>> runs;  // (first position, last position)
  int s = start;
  for (int k = 1; k <= m; ++k) {
    int pos = (start + k) % m;
    int prev = (start + k - 1) % m;
    if (k == m || parity(bnd[static_cast<std::size_t>(pos)]) != parity(bnd[static_cast<std::size_t>(prev)])) {
      runs.push_back({s, prev});
      s = pos;
    }
  }
  std::vector<std::pair<int, int>> even_runs;
  for (auto r : runs)
    if (parity(bnd[static_cast<std::size_t>(r.first)]) == 0) even_runs.push_back(r);
  if (even_runs.size() != 2) throw InternalCorruption("mixed boundary should have two even arcs");
  auto left = bnd[static_cast<std::size_t>(even_runs[0].first)].x < 0 ? even_runs[0] : even_runs[1];
  auto right = bnd[static_cast<std::size_t>(even_runs[0].first)].x < 0 ? even_runs[1] : even_runs[0];
  Quad q(d, bnd[static_cast<std::size_t>(left.first)], bnd[static_cast<std::size_t>(left.second)],
         bnd[static_cast<std::size_t>(right.first)], bnd[static_cast<std::size_t>(right.second)]);
  return {d, q};
}

}  // namespace squareice
