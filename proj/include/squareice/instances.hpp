#pragma once

// Named small instances shared by the tests, the acceptance suite and the CLI.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "squareice/lattice.hpp"

namespace squareice {

struct Instance {
  std::string name;
  DomainRef domain;
  BoundaryCondition bc;
  std::optional<Quad> quad;
};

/// An odd vertex whose four even neighbours are fixed to 0.
inline Instance single_odd_vertex() {
  Vertex c{1, 0};
  std::vector<Vertex> vs{c};
  BoundaryCondition bc;
  for (auto s : kNearestSteps) {
    vs.push_back(c + s);
    bc.set(c + s, ValueSet::single(0));
  }
  return {"single-odd-vertex", share(Domain::from_vertices(vs)), bc, std::nullopt};
}

/// An even vertex whose four odd neighbours are fixed to 1.
inline Instance single_even_vertex() {
  Vertex c{0, 0};
  std::vector<Vertex> vs{c};
  BoundaryCondition bc;
  for (auto s : kNearestSteps) {
    vs.push_back(c + s);
    bc.set(c + s, ValueSet::single(1));
  }
  return {"single-even-vertex", share(Domain::from_vertices(vs)), bc, std::nullopt};
}

/// Lambda_n^even with zero boundary.
inline Instance even_box_zero(int n) {
  auto d = share(build_even_box(n));
  return {"even-box-" + std::to_string(n), d, BoundaryCondition::zero(*d), std::nullopt};
}

/// w x h rectangle at the origin; the ring carries the parity function.
inline Instance rect_ring_parity(int w, int h) {
  auto d = share(build_rect(w, h));
  return {"rect-" + std::to_string(w) + "x" + std::to_string(h) + "-ring-parity", d, BoundaryCondition::flat(*d, 0),
          rect_quad(d)};
}

/// 5x5 grid with the parity function on its ring: small state space for sampler checks.
inline Instance grid5_ring_parity() {
  auto inst = rect_ring_parity(5, 5);
  inst.name = "grid5-ring-parity";
  return inst;
}

/// [0,L]^2 (L even) with 4 (3 on odd vertices) in the middle of the top and
/// bottom sides, 0 (1 on odd vertices) in the middle of the left and right
/// sides, 2 at the corners, interpolated in between. Rotating by a quarter
/// turn and mapping h to 4 - h preserves the instance.
inline Instance fig2_square(int L = 6) {
  if (L < 2 || L % 2) throw InvalidArgument("the square side must be even and at least 2");
  auto d = share(build_rect(L + 1, L + 1));
  BoundaryCondition bc;
  for (auto v : d->boundary()) {
    bool corner = (v.x == 0 || v.x == L) && (v.y == 0 || v.y == L);
    int val;
    if (corner) {
      val = 2;
    } else if (v.y == 0 || v.y == L) {
      int g = std::min(v.x, L - v.x);
      val = std::min(2 + g, 4 - parity(v));
    } else {
      int k = std::min(v.y, L - v.y);
      val = std::max(2 - k, parity(v));
    }
    bc.set(v, ValueSet::single(val));
  }
  return {"fig2", d, bc, rect_quad(d)};
}

/// Thin even quad: Lambda_{1,5}^even with 2 on the sides (corners included)
/// and 0 on the open top and bottom arcs.
inline Instance even_quad_two_zero(int w = 1, int n = 5) {
  auto d = share(build_even_rect(w, n));
  Quad q(d, {-w, n}, {-w, -n}, {w, -n}, {w, n});
  auto bc = BoundaryCondition::quad_two_arcs(q, 2, 0);
  return {"even-quad-2-0", d, bc, q};
}

/// Mixed quad with 2 on the even side arcs and 1 on the odd top and bottom arcs.
inline Instance mixed_quad_two_one(int w = 1, int n = 4) {
  auto m = build_mixed_rect(w, n);
  auto bc = BoundaryCondition::quad_two_arcs(m.quad, 2, 1);
  return {"mixed-quad-2-1", m.domain, bc, m.quad};
}

/// The torus T_n with its base vertex pinned to 0.
inline Instance torus_instance(int n) {
  auto d = share(Domain::torus(n));
  return {"torus-" + std::to_string(n), d, BoundaryCondition::pinned({0, 0}, 0), std::nullopt};
}

/// Looks up an instance by name: single-odd-vertex, single-even-vertex,
/// grid5-ring-parity, fig2, even-quad-2-0, mixed-quad-2-1, even-box-<n>,
/// torus-<n>, rect-<w>x<h>-ring-parity.
inline Instance named_instance(const std::string& name) {
  if (name == "single-odd-vertex") return single_odd_vertex();
  if (name == "single-even-vertex") return single_even_vertex();
  if (name == "grid5-ring-parity") return grid5_ring_parity();
  if (name == "fig2") return fig2_square();
  if (name == "even-quad-2-0") return even_quad_two_zero();
  if (name == "mixed-quad-2-1") return mixed_quad_two_one();
  auto number_after = [&](const std::string& prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    try {
      std::size_t used = 0;
      int n = std::stoi(name.substr(prefix.size()), &used);
      if (used != name.size() - prefix.size()) return std::nullopt;
      return n;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (auto n = number_after("even-box-")) return even_box_zero(*n);
  if (auto n = number_after("torus-")) return torus_instance(*n);
  if (name.rfind("rect-", 0) == 0) {
    int w = 0, h = 0;
    char tail[32] = {0};
    if (std::sscanf(name.c_str(), "rect-%dx%d-%31s", &w, &h, tail) == 3 && std::string(tail) == "ring-parity")
      return rect_ring_parity(w, h);
  }
  throw InvalidArgument("unknown instance '" + name + "'");
}

}  // namespace squareice
