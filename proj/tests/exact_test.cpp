#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <random>

#include "squareice/exact.hpp"
#include "squareice/instances.hpp"

using namespace squareice;

TEST(Enumerate, SingleOddVertex) {
  auto inst = single_odd_vertex();
  auto all = enumerate(inst.domain, inst.bc);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].at({1, 0}), -1);
  EXPECT_EQ(all[1].at({1, 0}), 1);
  EXPECT_EQ(transfer_count(inst.domain, inst.bc), 2);
}

TEST(Enumerate, SingleEvenVertex) {
  auto inst = single_even_vertex();
  auto all = enumerate(inst.domain, inst.bc);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].at({0, 0}), 0);
  EXPECT_EQ(all[1].at({0, 0}), 2);
  EXPECT_EQ(transfer_count(inst.domain, inst.bc), 2);
}

TEST(Enumerate, InadmissibleIsEmpty) {
  auto d = share(build_rect(3, 1));
  BoundaryCondition bc;
  bc.set({0, 0}, ValueSet::single(0));
  bc.set({2, 0}, ValueSet::single(4));
  EXPECT_TRUE(enumerate(d, bc).empty());
  EXPECT_EQ(transfer_count(d, bc), 0);
}

TEST(Enumerate, CapIsEnforced) {
  auto inst = even_box_zero(4);
  EXPECT_THROW(enumerate(inst.domain, inst.bc), TooLarge);
  ExactLimits lim;
  lim.max_free = 5;
  EXPECT_THROW(enumerate(even_box_zero(2).domain, even_box_zero(2).bc, lim), TooLarge);
}

TEST(Enumerate, AllDistinctAndValid) {
  auto inst = fig2_square();
  auto all = enumerate(inst.domain, inst.bc);
  std::set<std::vector<int>> seen;
  for (auto& h : all) {
    EXPECT_TRUE(validate(h));
    EXPECT_TRUE(satisfies(h, inst.bc));
    EXPECT_TRUE(seen.insert(h.values()).second);
  }
}

TEST(Transfer, AgreesWithEnumerationOnEvenBoxes) {
  for (int n : {1, 2}) {
    auto inst = even_box_zero(n);
    EXPECT_EQ(transfer_count(inst.domain, inst.bc), enumerate_count(inst.domain, inst.bc)) << n;
  }
  EXPECT_EQ(transfer_count(even_box_zero(1).domain, even_box_zero(1).bc), 18);
}

TEST(Transfer, AgreesWithEnumerationOnRandomRectangles) {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int w = 1; w <= 4; ++w) {
    for (int h = 1; h <= 6; ++h) {
      auto d = share(build_rect(w, h));
      for (int trial = 0; trial < 12; ++trial) {
        BoundaryCondition bc;
        for (auto v : d->boundary()) {
          int r = static_cast<int>(rng() % 6);
          int base = parity(v) + 2 * (static_cast<int>(rng() % 3) - 1);
          if (r < 3) bc.set(v, ValueSet::single(base));
          else if (r < 5) bc.set(v, ValueSet::interval(base - 2, base + 2));
          else bc.set(v, ValueSet::finite({base - 2, base + 2}));
        }
        if (!is_admissible(*d, bc)) continue;
        EXPECT_EQ(transfer_count(d, bc), enumerate_count(d, bc)) << w << "x" << h;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 90);
}

TEST(Transfer, WideningTheRangeChangesNothing) {
  std::vector<Instance> insts{fig2_square(), even_box_zero(3), grid5_ring_parity(), mixed_quad_two_one()};
  auto s = build_strip_rect(4, 3, 2);
  insts.push_back({"strip", share(s.domain), s.bc, std::nullopt});
  for (auto& inst : insts) {
    ExactLimits wide;
    wide.extra_range = 2;
    EXPECT_EQ(transfer_count(inst.domain, inst.bc), transfer_count(inst.domain, inst.bc, wide)) << inst.name;
  }
}

TEST(Transfer, TorusCounts) {
  auto t2 = torus_instance(2);
  EXPECT_EQ(enumerate_count(t2.domain, t2.bc), 6);
  EXPECT_EQ(transfer_count(t2.domain, t2.bc), 6);
  auto t4 = torus_instance(4);
  EXPECT_EQ(transfer_count(t4.domain, t4.bc), enumerate_count(t4.domain, t4.bc));
}

TEST(Transfer, StateCap) {
  ExactLimits lim;
  lim.max_states = 10;
  auto inst = even_box_zero(4);
  EXPECT_THROW(transfer_count(inst.domain, inst.bc, lim), TooLarge);
}

TEST(EventProb, AlwaysTrueAndComplement) {
  auto inst = fig2_square();
  EXPECT_EQ(exact_event_prob(inst.domain, inst.bc, [](const HeightFunction&) { return true; }), 1);
  auto ev = [](const HeightFunction& h) { return h.at({2, 2}) >= 2; };
  auto p = exact_event_prob(inst.domain, inst.bc, ev);
  auto q = exact_event_prob(inst.domain, inst.bc, [&](const HeightFunction& h) { return !ev(h); });
  EXPECT_EQ(p + q, 1);
}

TEST(EventProb, SingleOddVertexHalf) {
  auto inst = single_odd_vertex();
  EXPECT_EQ(exact_event_prob(inst.domain, inst.bc, [](const HeightFunction& h) { return h.at({1, 0}) == 1; }),
            Rational(1, 2));
}

TEST(ExactSample, SingleOddVertexFrequency) {
  auto inst = single_odd_vertex();
  ExactSampler s(inst.domain, inst.bc);
  std::mt19937_64 rng(2024);
  const int N = 10000;
  int plus = 0;
  for (int i = 0; i < N; ++i) plus += s(rng).at({1, 0}) == 1;
  EXPECT_LE(std::abs(plus - N / 2.0), 3 * std::sqrt(N * 0.25));
}

TEST(ExactSample, ChiSquaredAgainstEnumeration) {
  auto inst = even_box_zero(1);  // 3x3 block inside its zero circuit
  auto all = enumerate(inst.domain, inst.bc);
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < all.size(); ++i) index[all[i].values()] = static_cast<int>(i);
  ExactSampler s(inst.domain, inst.bc);
  std::mt19937_64 rng(77);
  const int N = 100000;
  std::vector<double> counts(all.size(), 0);
  for (int i = 0; i < N; ++i) {
    auto h = s(rng);
    auto it = index.find(h.values());
    ASSERT_NE(it, index.end());
    counts[static_cast<std::size_t>(it->second)] += 1;
  }
  double expected = static_cast<double>(N) / static_cast<double>(all.size());
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(all.size() - 1));
  double p = 1 - boost::math::cdf(dist, chi2);
  EXPECT_GT(p, 0.001) << "chi2=" << chi2;
}

TEST(ExactSample, TorusCoversAllStates) {
  auto inst = torus_instance(4);
  auto all = enumerate(inst.domain, inst.bc);
  std::set<std::vector<int>> seen;
  ExactSampler s(inst.domain, inst.bc);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 40 * static_cast<int>(all.size()); ++i) {
    auto h = s(rng);
    EXPECT_TRUE(validate(h));
    EXPECT_EQ(h.at({0, 0}), 0);
    seen.insert(h.values());
  }
  EXPECT_EQ(seen.size(), all.size());
}

TEST(ExactSample, Determinism) {
  auto inst = even_box_zero(3);
  std::mt19937_64 a(1), b(1), c(2);
  auto ha = exact_sample(inst.domain, inst.bc, a);
  auto hb = exact_sample(inst.domain, inst.bc, b);
  auto hc = exact_sample(inst.domain, inst.bc, c);
  EXPECT_EQ(ha.values(), hb.values());
  EXPECT_NE(ha.values(), hc.values());
  EXPECT_TRUE(validate(ha));
  EXPECT_TRUE(satisfies(ha, inst.bc));
}
