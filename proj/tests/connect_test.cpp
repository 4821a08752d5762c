#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "squareice/connect.hpp"
#include "squareice/exact.hpp"
#include "squareice/instances.hpp"
#include "squareice/mcmc.hpp"

using namespace squareice;

namespace {

HeightFunction make(const DomainRef& d, auto f) {
  std::vector<int> vals(d->size());
  for (int i = 0; i < static_cast<int>(d->size()); ++i) vals[static_cast<std::size_t>(i)] = f(d->vertex(i));
  return HeightFunction(d, vals);
}

// max(K - |v|_1, parity): concentric diamonds around the origin
HeightFunction pyramid(const DomainRef& d, int K) {
  return make(d, [K](Vertex v) { return std::max(K - l1_norm(v), parity(v)); });
}

}  // namespace

TEST(Crossing, ParityFunctionCrossesAtLevelOneOnly) {
  auto inst = rect_ring_parity(5, 4);
  auto h = HeightFunction::parity_function(inst.domain);
  const auto& q = *inst.quad;
  EXPECT_TRUE(crosses(h, q, LevelPredicate::le(1), Adjacency::NN));
  EXPECT_FALSE(crosses(h, q, LevelPredicate::ge(1), Adjacency::NN));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::ge(1), Adjacency::Cross));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::eq(0), Adjacency::Cross));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::eq(0), Adjacency::Star));
  EXPECT_FALSE(crosses(h, q, LevelPredicate::eq(2), Adjacency::Star));
}

TEST(Crossing, CentralPeakBlocksLowCrossings) {
  auto d = share(build_rect(5, 5));
  auto q = rect_quad(d);
  auto h = make(d, [](Vertex v) { return std::max(4 - l1_norm(v - Vertex{2, 2}), parity(v)); });
  ASSERT_TRUE(validate(h));
  EXPECT_FALSE(crosses(h, q, LevelPredicate::le(1), Adjacency::NN));
  EXPECT_FALSE(crosses(h, q.rotated(), LevelPredicate::le(1), Adjacency::NN));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::ge(2), Adjacency::NN));
  EXPECT_TRUE(crosses(h, q.rotated(), LevelPredicate::ge(2), Adjacency::NN));
  EXPECT_FALSE(crosses(h, q, LevelPredicate::ge(3), Adjacency::NN));
}

TEST(Duality, ExhaustiveOnSmallRectangles) {
  long long configs = 0;
  for (int w = 2; w <= 4; ++w) {
    for (int hgt = 2; hgt <= 4; ++hgt) {
      auto d = share(build_rect(w, hgt));
      auto q = rect_quad(d);
      auto bc = BoundaryCondition::pinned({0, 0}, 0);
      for_each_hom(d, bc, [&](const HeightFunction& h) {
        ++configs;
        for (int m = -2; m <= 2; ++m) {
          auto bad = duality_violation(h, q, m);
          ASSERT_FALSE(bad) << *bad << " m=" << m << " " << w << "x" << hgt;
          bad = duality_violation(h, q.rotated(), m);
          ASSERT_FALSE(bad) << *bad << " rotated m=" << m;
        }
      });
    }
  }
  EXPECT_GT(configs, 3000);
}

TEST(Duality, EveryQuadOnThreeByThree) {
  auto d = share(build_rect(3, 3));
  auto ring = d->boundary();
  std::vector<Quad> quads;
  const int n = static_cast<int>(ring.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l)
          quads.emplace_back(d, ring[static_cast<std::size_t>(i)], ring[static_cast<std::size_t>(j)],
                             ring[static_cast<std::size_t>(k)], ring[static_cast<std::size_t>(l)]);
  ASSERT_EQ(quads.size(), 70u);
  for_each_hom(d, BoundaryCondition::pinned({0, 0}, 0), [&](const HeightFunction& h) {
    for (const auto& q : quads) {
      for (int m = -2; m <= 2; ++m) {
        auto bad = duality_violation(h, q, m);
        ASSERT_FALSE(bad) << *bad;
      }
    }
  });
}

TEST(Duality, HoldsOnSampledEvenBoxes) {
  auto inst = even_box_zero(3);
  Quad q(inst.domain, {-3, 3}, {-3, -3}, {3, -3}, {3, 3});
  ExactSampler sampler(inst.domain, inst.bc);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    auto h = sampler(rng);
    for (int m = -2; m <= 2; ++m) {
      auto bad = duality_violation(h, q, m);
      ASSERT_FALSE(bad) << *bad;
    }
  }
}

TEST(Duality, WrongCrossAdjacencyIsDetected) {
  auto d = share(build_rect(3, 3));
  auto q = rect_quad(d);
  DualityOptions wrong;
  wrong.cross = Adjacency::NN;
  bool caught = false;
  for_each_hom(d, BoundaryCondition::pinned({0, 0}, 0), [&](const HeightFunction& h) {
    for (int m = -2; m <= 2; ++m) caught |= !duality_check(h, q, m, wrong);
  });
  EXPECT_TRUE(caught);
}

TEST(Circuit, CanonicalMatchesWindingOracle) {
  std::vector<LevelPredicate> preds;
  for (int k = -2; k <= 3; ++k) {
    preds.push_back(LevelPredicate::ge(k));
    preds.push_back(LevelPredicate::le(k));
    preds.push_back(LevelPredicate::eq(k));
  }
  preds.push_back(LevelPredicate::abs_ge(1));
  auto check = [&](const HeightFunction& h, const Annulus& a) {
    for (const auto& p : preds) {
      for (auto adj : {Adjacency::NN, Adjacency::Cross, Adjacency::Star}) {
        ASSERT_EQ(circuit_in_annulus(h, a, p, adj), circuit_in_annulus_winding(h, a, p, adj))
            << to_string(adj) << " inner=" << a.inner << " outer=" << a.outer;
      }
    }
  };
  auto small = even_box_zero(2);
  for_each_hom(small.domain, small.bc, [&](const HeightFunction& h) { check(h, Annulus({0, 0}, 1, 2)); });
  auto big = even_box_zero(4);
  ExactSampler sampler(big.domain, big.bc);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 400; ++t) {
    auto h = sampler(rng);
    check(h, Annulus({0, 0}, 1, 3));
    check(h, Annulus({0, 0}, 2, 4));
    check(h, Annulus({1, 0}, 1, 3));
  }
}

TEST(Circuit, RingOfZerosAroundTheCentre) {
  auto inst = even_box_zero(4);
  // zero on the even vertices of the ring |v|_1 = 4, rising inside
  auto h = make(inst.domain, [](Vertex v) { return std::max(4 - l1_norm(v), parity(v)); });
  ASSERT_TRUE(validate(h));
  Annulus a({0, 0}, 1, 4);
  EXPECT_TRUE(circuit_in_annulus(h, a, LevelPredicate::eq(0), Adjacency::Cross));
  EXPECT_FALSE(circuit_in_annulus(h, a, LevelPredicate::eq(0), Adjacency::NN));
  EXPECT_TRUE(circuit_in_annulus(h, a, LevelPredicate::ge(1), Adjacency::Cross));
  EXPECT_FALSE(circuit_in_annulus(h, a, LevelPredicate::ge(2), Adjacency::Cross));
}

TEST(Circuit, AnnulusMustFitInTheDomain) {
  auto inst = even_box_zero(2);
  auto h = minimal_height(inst.domain, inst.bc);
  EXPECT_THROW(circuit_in_annulus(h, Annulus({0, 0}, 1, 5), LevelPredicate::ge(0), Adjacency::NN), InvalidArgument);
}

TEST(AnnulusDuality, ExhaustiveOnSmallestBox) {
  auto inst = even_box_zero(2);
  long long n = 0;
  for_each_hom(inst.domain, inst.bc, [&](const HeightFunction& h) {
    ++n;
    ASSERT_TRUE(annulus_duality_check(h, 1));
  });
  EXPECT_GT(n, 100);
}

TEST(AnnulusDuality, HoldsOnSampledBoxes) {
  auto inst = even_box_zero(4);
  ExactSampler sampler(inst.domain, inst.bc);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 500; ++t) {
    auto h = sampler(rng);
    ASSERT_TRUE(annulus_duality_check(h, 2));
    ASSERT_TRUE(annulus_duality_check(h, Annulus({0, 0}, 1, 3)));
  }
}

TEST(NestedLoops, ConcentricDiamonds) {
  auto d = share(build_even_box(10));
  auto h = pyramid(d, 8);
  ASSERT_TRUE(validate(h));
  auto rep = nested_loops(h);
  ASSERT_EQ(rep.loops.size(), 3u);
  for (int k = 1; k <= 3; ++k) {
    const auto& l = rep.loops[static_cast<std::size_t>(k - 1)];
    EXPECT_EQ(l.k, k);
    EXPECT_EQ(l.radius, 8 - 2 * k);
    for (auto v : l.loop) EXPECT_GE(h.at(v), 2 * k);
  }
  // radii 6, 4, 2 fall into [4,8), [4,8), [2,4)
  std::vector<int> census{0, 1, 2};
  EXPECT_EQ(rep.census, census);
}

TEST(NestedLoops, FlatConfigurationHasNone) {
  auto d = share(build_even_box(5));
  EXPECT_TRUE(nested_loops(HeightFunction::parity_function(d)).loops.empty());
}

TEST(NestedLoops, RadiiDecreaseOnSamples) {
  auto inst = even_box_zero(4);
  ExactSampler sampler(inst.domain, inst.bc);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 300; ++t) {
    auto h = sampler(rng);
    auto rep = nested_loops(h);
    for (std::size_t i = 0; i < rep.loops.size(); ++i) {
      for (auto v : rep.loops[i].loop) {
        EXPECT_GE(h.at(v), 2 * rep.loops[i].k);
      }
      if (i > 0) {
        EXPECT_LE(rep.loops[i].radius, rep.loops[i - 1].radius);
      }
    }
  }
}

TEST(Cluster, DiameterOfSimpleShapes) {
  auto d = share(build_rect(7, 5, -3, -2));
  // even vertices of the row y = 0 with |x| <= 2 raised to 2
  auto h = make(d, [](Vertex v) { return v.y == 0 && std::abs(v.x) <= 2 && parity(v) == 0 ? 2 : parity(v); });
  ASSERT_TRUE(validate(h));
  EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::ge(2), Adjacency::NN), 0);
  EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::ge(2), Adjacency::Cross), 0);
  EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::ge(2), Adjacency::Star), 4);
  EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::ge(1), Adjacency::NN), 6);
  EXPECT_EQ(max_cluster_diameter(h, box_region(*d, 1, 2), LevelPredicate::ge(2), Adjacency::Star), 0);
  EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::ge(9), Adjacency::NN), 0);
}

TEST(EventSpec, EvaluatesCrossingsAndCircuits) {
  auto inst = rect_ring_parity(5, 5);
  auto h = HeightFunction::parity_function(inst.domain);
  auto e = EventSpec::crossing(*inst.quad, LevelPredicate::le(1), Adjacency::NN);
  EXPECT_TRUE(e(h));
  auto c = EventSpec::circuit(Annulus({2, 2}, 1, 2), LevelPredicate::ge(0), Adjacency::NN);
  EXPECT_TRUE(c(h));
  EventSpec broken;
  broken.mode = EventSpec::Mode::Circuit;
  EXPECT_THROW(broken(h), InvalidArgument);
}

TEST(Crossing, ParityFunctionExamples) {
  auto inst = rect_ring_parity(6, 5);
  auto h = HeightFunction::parity_function(inst.domain);
  const auto& q = *inst.quad;
  EXPECT_TRUE(crosses(h, q, LevelPredicate::ge(0), Adjacency::NN));
  EXPECT_FALSE(crosses(h, q, LevelPredicate::ge(2), Adjacency::Cross));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::eq(1), Adjacency::Cross));
  EXPECT_TRUE(crosses(h, q.rotated(), LevelPredicate::eq(1), Adjacency::Cross));
  EXPECT_TRUE(duality_check(h, q, 0));
  EXPECT_TRUE(crosses(h, q, LevelPredicate::gt(0), Adjacency::Cross));
  EXPECT_FALSE(crosses(h, q.rotated(), LevelPredicate::le(0), Adjacency::NN));
}

TEST(Crossing, MonotoneInPredicateAndBox) {
  auto inst = even_box_zero(6);
  ExactSampler sampler(inst.domain, inst.bc);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    auto h = sampler(rng);
    for (auto adj : {Adjacency::NN, Adjacency::Cross, Adjacency::Star}) {
      for (int k = -3; k <= 3; ++k) {
        for (int nx = 1; nx <= 4; ++nx) {
          for (int ny = 1; ny <= 4; ++ny) {
            Box b{nx, ny, t % 2 == 0};
            bool c = box_crossing(h, b, LevelPredicate::ge(k), adj);
            // a larger level set
            if (c) {
              EXPECT_TRUE(box_crossing(h, b, LevelPredicate::ge(k - 1), adj));
            }
            if (box_crossing(h, b, LevelPredicate::eq(k), adj)) {
              EXPECT_TRUE(c);
            }
            // a thinner box (same length) admits fewer crossings
            Box thin = b;
            (b.horizontal ? thin.ny : thin.nx) -= 1;
            if (thin.nx >= 0 && thin.ny >= 0 && box_crossing(h, thin, LevelPredicate::ge(k), adj)) {
              EXPECT_TRUE(c);
            }
            // a longer box admits fewer crossings (Star steps can jump a column)
            if (adj == Adjacency::Star) continue;
            Box longer = b;
            (b.horizontal ? longer.nx : longer.ny) += 1;
            if ((b.horizontal ? longer.nx : longer.ny) <= 5 && box_crossing(h, longer, LevelPredicate::ge(k), adj)) {
              EXPECT_TRUE(c);
            }
          }
        }
      }
    }
    // the same on the whole quad: shrinking the level set only removes crossings
    Quad q(inst.domain, {-6, 6}, {-6, -6}, {6, -6}, {6, 6});
    for (int k = -3; k <= 3; ++k)
      if (crosses(h, q, LevelPredicate::ge(k), Adjacency::Cross)) {
        EXPECT_TRUE(crosses(h, q, LevelPredicate::ge(k - 2), Adjacency::Cross));
      }
  }
}

TEST(Circuit, ParityFunctionExamples) {
  auto d = share(build_rect(9, 9, -4, -4));
  auto h = HeightFunction::parity_function(d);
  Annulus a({0, 0}, 1, 3);
  EXPECT_TRUE(circuit_in_annulus(h, a, LevelPredicate::eq(0), Adjacency::Cross));
  EXPECT_TRUE(circuit_in_annulus(h, a, LevelPredicate::eq(1), Adjacency::Cross));
  EXPECT_FALSE(circuit_in_annulus(h, a, LevelPredicate::ge(2), Adjacency::Cross));
  EXPECT_FALSE(circuit_in_annulus(h, a, LevelPredicate::eq(0), Adjacency::NN));
}

TEST(AnnulusDuality, AllPlusInstance) {
  auto d = share(build_rect(9, 9, -4, -4));
  auto h = make(d, [](Vertex v) { return 2 - parity(v); });
  Annulus a({0, 0}, 2, 4);
  EXPECT_TRUE(connects(h, {d->index_of({3, 0})}, {d->index_of({4, 4})}, LevelPredicate::abs_ge(1), Adjacency::NN));
  EXPECT_FALSE(circuit_in_annulus_winding(h, a, LevelPredicate::eq(0), Adjacency::Cross));
  EXPECT_TRUE(annulus_duality_check(h, 2));
}

TEST(AnnulusDuality, MonteCarloSamplesOnEightByEight) {
  auto d = share(build_rect(9, 9, -4, -4));
  auto bc = BoundaryCondition::flat(*d, 0);
  ChainConfig cfg;
  cfg.burn_in = 100;
  cfg.thin = 5;
  cfg.sweeps = cfg.burn_in + 1000 * cfg.thin;
  cfg.seed = 4;
  Quad q(d, {-4, 4}, {-4, -4}, {4, -4}, {4, 4});
  long checked = 0;
  run_chain(median_height(d, bc), bc, cfg, [&](const HeightFunction& h, long) {
    for (int m = -2; m <= 2; ++m) {
      ASSERT_TRUE(duality_check(h, q, m)) << m;
      ASSERT_TRUE(duality_check(h, q.rotated(), m)) << m;
    }
    ++checked;
  });
  EXPECT_EQ(checked, 1000);
}

namespace {

/// Independent loop finder: every simple Cross-cycle of vertices with
/// h >= level that avoids the origin, with its winding number computed from
/// summed angles. Returns the largest L-infinity norm of a vertex on a cycle
/// with nonzero winding, or -1.
int outermost_radius_by_cycles(const HeightFunction& h, int level) {
  const auto& d = h.domain();
  std::vector<int> q;
  for (int i = 0; i < static_cast<int>(d.size()); ++i)
    if (h[i] >= level && d.vertex(i) != Vertex{0, 0}) q.push_back(i);
  std::vector<char> ok(d.size(), 0);
  for (int i : q) ok[static_cast<std::size_t>(i)] = 1;
  int best = -1;
  std::vector<int> path;
  std::vector<char> on(d.size(), 0);
  auto angle = [&](int a, int b) {
    Vertex u = d.vertex(a), v = d.vertex(b);
    double t = std::atan2(static_cast<double>(v.y), static_cast<double>(v.x)) -
               std::atan2(static_cast<double>(u.y), static_cast<double>(u.x));
    while (t > M_PI) t -= 2 * M_PI;
    while (t < -M_PI) t += 2 * M_PI;
    return t;
  };
  std::function<void(int, int, double)> dfs = [&](int start, int cur, double turn) {
    for (auto s : adjacency_steps(Adjacency::Cross)) {
      int j = d.index_of(d.vertex(cur) + s);
      if (j < 0 || !ok[static_cast<std::size_t>(j)]) continue;
      if (j == start && path.size() >= 4) {
        double w = turn + angle(cur, start);
        if (std::abs(w) > M_PI) {
          for (int i : path) best = std::max(best, linf_norm(d.vertex(i)));
        }
        continue;
      }
      if (j <= start || on[static_cast<std::size_t>(j)]) continue;
      on[static_cast<std::size_t>(j)] = 1;
      path.push_back(j);
      dfs(start, j, turn + angle(cur, j));
      path.pop_back();
      on[static_cast<std::size_t>(j)] = 0;
    }
  };
  for (int s : q) {
    path = {s};
    on[static_cast<std::size_t>(s)] = 1;
    dfs(s, s, 0.0);
    on[static_cast<std::size_t>(s)] = 0;
  }
  return best;
}

void expect_census_matches(const HeightFunction& h) {
  auto rep = nested_loops(h);
  std::vector<int> radii;
  for (int k = 1;; ++k) {
    int r = outermost_radius_by_cycles(h, 2 * k);
    if (r < 0) break;
    radii.push_back(r);
  }
  ASSERT_EQ(rep.loops.size(), radii.size());
  std::vector<int> census;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    EXPECT_EQ(rep.loops[k].radius, radii[k]) << "k = " << k + 1;
    int i = 0;
    while ((2 << i) <= radii[k]) ++i;
    if (census.size() <= static_cast<std::size_t>(i)) census.resize(static_cast<std::size_t>(i) + 1, 0);
    ++census[static_cast<std::size_t>(i)];
  }
  EXPECT_EQ(rep.census, census);
}

}  // namespace

namespace {

// box [-n, n]^2 with boundary values 2 + parity, so loops of h >= 2 exist
Instance raised_box(int n) {
  auto d = share(build_rect(2 * n + 1, 2 * n + 1, -n, -n));
  BoundaryCondition bc;
  for (auto v : d->boundary()) bc.set(v, ValueSet::single(2 + parity(v)));
  return {"raised_box", d, bc, std::nullopt};
}

}  // namespace

TEST(NestedLoops, CensusMatchesCycleEnumerationExhaustively) {
  auto inst = raised_box(2);
  long n = 0, with_loops = 0;
  for_each_hom(inst.domain, inst.bc, [&](const HeightFunction& h) {
    expect_census_matches(h);
    ++n;
    with_loops += !nested_loops(h).loops.empty();
  });
  EXPECT_EQ(n, 64);
  EXPECT_EQ(with_loops, n);
}

TEST(NestedLoops, CensusMatchesCycleEnumerationOnSamples) {
  for (auto inst : {even_box_zero(3), raised_box(3)}) {
    ExactSampler sampler(inst.domain, inst.bc);
    std::mt19937_64 rng(32);
    int deep = 0;
    for (int t = 0; t < 300; ++t) {
      auto h = sampler(rng);
      expect_census_matches(h);
      deep += nested_loops(h).loops.size() >= 2;
    }
    if (inst.name == "raised_box") {
      EXPECT_GT(deep, 0);
    }
  }
}

TEST(Cluster, ParityFunctionOddSublattice) {
  for (int n : {2, 3, 5}) {
    auto d = share(build_rect(2 * n + 1, 2 * n + 1, -n, -n));
    auto h = HeightFunction::parity_function(d);
    EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::eq(1), Adjacency::Cross), 2 * n);
    EXPECT_EQ(max_cluster_diameter(h, {}, LevelPredicate::eq(2), Adjacency::Cross), 0);
  }
}

TEST(Cluster, MonotoneInThePredicate) {
  auto inst = even_box_zero(5);
  ExactSampler sampler(inst.domain, inst.bc);
  std::mt19937_64 rng(33);
  for (int t = 0; t < 100; ++t) {
    auto h = sampler(rng);
    for (auto adj : {Adjacency::NN, Adjacency::Cross, Adjacency::Star})
      for (int k = -4; k <= 4; ++k)
        EXPECT_LE(max_cluster_diameter(h, {}, LevelPredicate::ge(k), adj),
                  max_cluster_diameter(h, {}, LevelPredicate::ge(k - 1), adj));
  }
}
