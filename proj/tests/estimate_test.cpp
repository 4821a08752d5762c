#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "squareice/estimate.hpp"
#include "squareice/instances.hpp"

using namespace squareice;

namespace {

RunConfig quick(long burn, long samples, long thin, std::uint64_t seed = 1, int chains = 8) {
  RunConfig rc;
  rc.chain.burn_in = burn;
  rc.chain.thin = thin;
  rc.chain.sweeps = burn + samples * thin;
  rc.chain.seed = seed;
  rc.chains = chains;
  rc.use_oracle = false;
  return rc;
}

std::vector<Vertex> ring_of_5x5() {
  std::vector<Vertex> r;
  for (int x = 0; x < 4; ++x) r.push_back({x, 0});
  for (int y = 0; y < 4; ++y) r.push_back({4, y});
  for (int x = 4; x > 0; --x) r.push_back({x, 4});
  for (int y = 4; y > 0; --y) r.push_back({0, y});
  return r;
}

/// Values of a closed +-1 walk around the 16-vertex ring, starting at 0.
std::vector<int> random_ring_walk(std::mt19937_64& rng) {
  std::vector<int> steps(16, 1);
  std::fill(steps.begin() + 8, steps.end(), -1);
  std::shuffle(steps.begin(), steps.end(), rng);
  std::vector<int> vals{0};
  for (int i = 0; i + 1 < 16; ++i) vals.push_back(vals.back() + steps[static_cast<std::size_t>(i)]);
  return vals;
}

}  // namespace

TEST(EventEstimate, AlwaysTrueEvent) {
  auto inst = even_box_zero(3);
  auto s = estimate_indicator(inst.domain, inst.bc, [](const HeightFunction&) { return true; }, quick(10, 50, 2));
  EXPECT_EQ(s.hits, s.trials);
  EXPECT_EQ(s.trials, 400);
  EXPECT_EQ(s.p_hat, 1.0);
  EXPECT_EQ(s.std_err, 0.0);
  EXPECT_FALSE(s.exact);
}

TEST(EventEstimate, OracleIsUsedWhenSmall) {
  auto inst = fig2_square();
  auto spec = EventSpec::crossing(inst.quad->rotated(), LevelPredicate::ge(2), Adjacency::Cross);
  RunConfig rc;
  rc.oracle_max_free = 30;
  auto s = estimate_event(inst.domain, inst.bc, spec, rc);
  ASSERT_TRUE(s.exact);
  EXPECT_EQ(*s.exact_value, Rational(88, 89));
  EXPECT_EQ(s.trials, 89);
  EXPECT_EQ(s.sigma(), 0.0);
}

TEST(EventEstimate, TwoArcSquareMonteCarloMatchesOracle) {
  auto inst = fig2_square();
  auto spec = EventSpec::crossing(inst.quad->rotated(), LevelPredicate::ge(2), Adjacency::Cross);
  auto s = estimate_event(inst.domain, inst.bc, spec, quick(100, 2000, 2, 3));
  EXPECT_NEAR(s.p_hat, 88.0 / 89.0, 3 * s.sigma() + 1e-9);
  EXPECT_GT(s.split_rhat, 0.9);
  EXPECT_LT(s.split_rhat, 1.1);
}

TEST(EventEstimate, InadmissibleInstanceIsRejected) {
  auto d = share(build_rect(3, 1));
  BoundaryCondition bc;
  bc.set({0, 0}, ValueSet::single(0));
  bc.set({2, 0}, ValueSet::single(4));
  auto spec = EventSpec::box_crossing(Box{1, 0, true}, LevelPredicate::ge(0), Adjacency::NN);
  EXPECT_THROW(estimate_event(d, bc, spec, RunConfig{}), InvalidArgument);
}

TEST(EventEstimate, MonteCarloMatchesOracleOnSmallBoxes) {
  auto inst = even_box_zero(2);
  std::vector<EventSpec> specs{
      EventSpec::box_crossing(Box{1, 1, true}, LevelPredicate::ge(1), Adjacency::NN),
      EventSpec::box_crossing(Box{2, 1, false}, LevelPredicate::le(0), Adjacency::Cross),
      EventSpec::circuit(Annulus({0, 0}, 0 + 1, 2), LevelPredicate::eq(0), Adjacency::Cross),
  };
  RunConfig exact_rc;
  auto mc = quick(50, 3000, 2, 9);
  for (auto& spec : specs) {
    auto e = estimate_event(inst.domain, inst.bc, spec, exact_rc);
    ASSERT_TRUE(e.exact) << describe(spec);
    auto m = estimate_event(inst.domain, inst.bc, spec, mc);
    EXPECT_NEAR(m.p_hat, e.p_hat, 3 * m.sigma() + 1e-9) << describe(spec);
  }
}

TEST(EventEstimate, DeterministicInTheSeed) {
  auto inst = even_box_zero(4);
  auto spec = EventSpec::box_crossing(Box{2, 2, true}, LevelPredicate::ge(1), Adjacency::NN);
  auto a = estimate_event(inst.domain, inst.bc, spec, quick(20, 100, 3, 5));
  auto b = estimate_event(inst.domain, inst.bc, spec, quick(20, 100, 3, 5));
  EXPECT_EQ(a.hits, b.hits);
  auto rc = quick(20, 100, 3, 5);
  rc.threads = 3;
  auto c = estimate_event(inst.domain, inst.bc, spec, rc);
  EXPECT_EQ(a.hits, c.hits);
  EXPECT_EQ(a.split_rhat, c.split_rhat);
}

TEST(EventEstimate, Describe) {
  EXPECT_EQ(describe(LevelPredicate::ge(2)), "h>=2");
  EXPECT_EQ(describe(LevelPredicate::abs_ge(1)), "|h|>=1");
  EXPECT_EQ(describe(LevelPredicate::eq(0)), "h=0");
  auto spec = EventSpec::box_crossing(Box{3, 2, false}, LevelPredicate::le(-1), Adjacency::Cross);
  EXPECT_EQ(describe(spec), "vertical crossing of box(3,2) cross h<=-1");
}

TEST(AnEstimate, SmallestAnnulusHoldsNoLoop) {
  auto s = a_n_estimate(1, quick(20, 200, 5, 2));
  EXPECT_EQ(s.hits, 0);
  EXPECT_EQ(s.p_hat, 0.0);
  EXPECT_EQ(s.label, "a_1");
}

TEST(CrossingEstimate, OracleAndChainsAgree) {
  RunConfig exact_rc;
  exact_rc.oracle_max_free = 30;
  auto e = crossing_estimate(1, exact_rc);
  ASSERT_TRUE(e.exact);
  EXPECT_GT(e.p_hat, 0.0);
  EXPECT_LT(e.p_hat, 1.0);
  auto m = crossing_estimate(1, quick(50, 1000, 2, 8));
  EXPECT_FALSE(m.exact);
  EXPECT_NEAR(m.p_hat, e.p_hat, 3 * m.sigma());
  EXPECT_EQ(m.label, "H_1");
  auto big = crossing_estimate(4, quick(400, 200, 16, 9));
  EXPECT_GT(big.p_hat - 3 * big.sigma(), 0.0);
  EXPECT_LT(big.p_hat + 3 * big.sigma(), 1.0);
}

TEST(AnEstimate, RenormalizationReportPairsDoubles) {
  EventStats a, b, c;
  a.p_hat = 0.5;
  b.p_hat = 0.2;
  c.p_hat = 0.1;
  auto rows = renormalization_report({{4, a}, {8, b}, {16, c}});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n, 4);
  EXPECT_DOUBLE_EQ(rows[0].ratio, 0.8);
  EXPECT_EQ(rows[1].n, 8);
  EXPECT_DOUBLE_EQ(rows[1].ratio, 2.5);
}

TEST(Variance, SingleOddVertexIsExactlyOne) {
  auto inst = single_odd_vertex();
  auto e = vertex_variance(inst.domain, inst.bc, {1, 0}, RunConfig{});
  EXPECT_TRUE(e.exact);
  EXPECT_EQ(e.variance, 1.0);
  // the conditional second moment is 1 in every state
  auto m = vertex_variance(inst.domain, inst.bc, {1, 0}, quick(1, 20, 1));
  EXPECT_FALSE(m.exact);
  EXPECT_EQ(m.variance, 1.0);
  EXPECT_EQ(m.std_err, 0.0);
}

TEST(Variance, MonteCarloMatchesOracle) {
  for (int n : {1, 2}) {
    auto inst = even_box_zero(n);
    RunConfig exact_rc;
    exact_rc.oracle_max_free = 30;
    auto e = vertex_variance(inst.domain, inst.bc, {0, 0}, exact_rc);
    ASSERT_TRUE(e.exact);
    auto m = vertex_variance(inst.domain, inst.bc, {0, 0}, quick(50, 5000, 1, 4));
    EXPECT_NEAR(m.variance, e.variance, 3 * m.std_err) << n;
    EXPECT_GT(m.std_err, 0.0);
    EXPECT_NEAR(m.split_rhat, 1.0, 0.1);
  }
  auto inst = even_box_zero(2);
  auto e = vertex_variance(inst.domain, inst.bc, {1, 0}, RunConfig{});
  auto m = vertex_variance(inst.domain, inst.bc, {1, 0}, quick(50, 5000, 1, 5));
  EXPECT_NEAR(m.variance, e.variance, 3 * m.std_err);
}

TEST(Variance, ScanFitsAgainstLogSize) {
  RunConfig rc = quick(1, 1, 1, 8);
  auto scan = variance_scan({2, 4, 8}, rc, [](int n) {
    ChainConfig c;
    c.burn_in = 20 * n * n;
    c.thin = 1;
    c.sweeps = c.burn_in + 400 * n * n;
    return c;
  });
  ASSERT_EQ(scan.rows.size(), 3u);
  for (auto& r : scan.rows) {
    EXPECT_GT(r.variance, 0.0);
    EXPECT_EQ(r.seed, 8u);
  }
  EXPECT_LT(scan.rows[0].variance, scan.rows[2].variance);
  EXPECT_GT(scan.fit.slope, 0.0);
  EXPECT_GT(scan.fit.slope_se, 0.0);
}

TEST(LeastSquares, ExactLine) {
  auto f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7}, {0.1, 0.1, 0.1, 0.1});
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_NEAR(f.slope_se, 0.1 / std::sqrt(5.0), 1e-12);
}

TEST(Torus, OddSideIsRejected) {
  EXPECT_THROW(torus_pair_variance(5, {0, 0}, {1, 0}, RunConfig{}), InvalidArgument);
}

TEST(Torus, SameVertexIsZero) {
  auto s = torus_pair_variance(8, {2, 3}, {2, 3}, RunConfig{});
  EXPECT_EQ(s.variance, 0.0);
  EXPECT_TRUE(s.exact);
}

TEST(Torus, TwoByTwoMatchesHandEnumeration) {
  // T_2 with h(0,0) = 0 has 6 states; h(1,1) is 0 in four of them and +-2 in two
  auto nn = torus_pair_variance(2, {0, 0}, {1, 0}, RunConfig{});
  auto diag = torus_pair_variance(2, {0, 0}, {1, 1}, RunConfig{});
  ASSERT_TRUE(nn.exact);
  EXPECT_EQ(nn.variance, 1.0);
  EXPECT_DOUBLE_EQ(diag.variance, 4.0 / 3.0);
  for (bool tr : {true, false}) {
    auto m = torus_pair_variance(2, {0, 0}, {1, 1}, quick(10, 4000, 1, 6), tr);
    EXPECT_NEAR(m.variance, 4.0 / 3.0, 3 * m.std_err) << tr;
  }
}

TEST(Torus, FourByFourAgreesWithOracle) {
  RunConfig exact_rc;
  auto e = torus_pair_variance(4, {0, 0}, {2, 2}, exact_rc);
  ASSERT_TRUE(e.exact);
  auto m = torus_pair_variance(4, {0, 0}, {2, 2}, quick(20, 4000, 1, 7));
  EXPECT_NEAR(m.variance, e.variance, 3 * m.std_err);
}

TEST(Torus, ScanGrowsWithSeparation) {
  auto scan = torus_scan(16, {1, 2, 4, 8}, quick(2000, 2000, 4, 10));
  ASSERT_EQ(scan.rows.size(), 4u);
  for (std::size_t i = 1; i < scan.rows.size(); ++i) EXPECT_GT(scan.rows[i].variance, scan.rows[i - 1].variance);
  EXPECT_GT(scan.fit.slope, 2 * scan.fit.slope_se);
  EXPECT_THROW(torus_scan(16, {9}, quick(2, 1, 1)), InvalidArgument);
}

TEST(Diameter, DecayIsMonotoneInTheLevel) {
  auto t = diameter_decay(2, {1, 2, 3, 4, 100}, quick(50, 300, 4, 11), 3);
  ASSERT_EQ(t.rows.size(), 5u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i].stats.hits, t.rows[i - 1].stats.hits);
  EXPECT_EQ(t.rows.back().stats.hits, 0);
  EXPECT_GT(t.rows.front().stats.p_hat, 0.9);
}

TEST(Rsw, SpotCheckAtEight) {
  auto rep = rsw_spot_check(8, 2, quick(5120, 1500, 64, 12));
  for (auto* s : {&rep.vertical_d, &rep.horizontal_dbar}) {
    EXPECT_GT(s->p_hat - 3 * s->sigma(), 0.0) << s->label;
    EXPECT_LT(s->p_hat + 3 * s->sigma(), 1.0) << s->label;
  }
  EXPECT_TRUE(rep.implication_tested);
  EXPECT_TRUE(rep.implication_holds);
  EXPECT_TRUE(rep.widening_ok);
}

TEST(SplitRhat, DetectsShiftedHalves) {
  detail::ChainRecord a{{detail::SeriesSums(1), detail::SeriesSums(1)}};
  auto b = a;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 1000; ++i) {
    double x[1] = {z(rng)};
    a.half[i % 2].add(x);
    double y[1] = {z(rng) + (i % 2 ? 5.0 : 0.0)};
    b.half[i % 2].add(y);
  }
  EXPECT_NEAR(detail::split_rhat({a}, 0), 1.0, 0.05);
  EXPECT_GT(detail::split_rhat({b}, 0), 1.5);
}

TEST(Jackknife, MeanOfEqualChains) {
  std::vector<detail::ChainRecord> rs(4, detail::ChainRecord{{detail::SeriesSums(1), detail::SeriesSums(1)}});
  for (int c = 0; c < 4; ++c) {
    double x[1] = {static_cast<double>(c)};
    rs[static_cast<std::size_t>(c)].half[0].add(x);
  }
  auto [m, se] = detail::jackknife(rs, [](const std::vector<double>& v) { return v[0]; });
  EXPECT_DOUBLE_EQ(m, 1.5);
  // for the mean the jackknife error is the usual standard error of the chain means
  EXPECT_NEAR(se, std::sqrt((1.25 * 4.0 / 3.0) / 4.0), 1e-12);
}

TEST(Fkg, SingleOddVertexCovariance) {
  auto inst = single_odd_vertex();
  auto f = threshold_indicator({1, 0}, 1);
  auto r = fkg_check_exact(inst.domain, inst.bc, {f, f});
  ASSERT_EQ(r.entries.size(), 3u);
  for (auto& e : r.entries) EXPECT_EQ(e.covariance, Rational(1, 4));
  EXPECT_TRUE(r.passed);
}

TEST(Fkg, ThresholdFamiliesOnRandomThreeByThreeBlocks) {
  auto d = share(build_rect(5, 5));
  auto centred = share(build_rect(5, 5, -2, -2));
  auto ring = ring_of_5x5();
  std::mt19937_64 rng(21);
  int tested = 0;
  for (int t = 0; t < 2000 && tested < 60; ++t) {
    auto walk = random_ring_walk(rng);
    BoundaryCondition bc;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int lo = walk[i] - 2 * static_cast<int>(rng() % 4 == 0);
      int hi = walk[i] + 2 * static_cast<int>(rng() % 4 == 0);
      bc.set(ring[i], ValueSet::interval(lo, hi));
    }
    bc.set(ring[0], ValueSet::single(0));
    auto sets = admissible_sets(*d, bc);
    if (!sets || detail::free_vertex_count(*sets) > 12) continue;
    auto fam = threshold_family(*d, bc);
    fam.push_back(height_at({2, 2}));
    // crossing of the central 3x3 block, through a copy centred at the origin
    fam.push_back(event_indicator("H_{h>=1}", [centred](const HeightFunction& h) {
      HeightFunction c(centred, h.values());
      return box_crossing(c, Box{1, 1, true}, LevelPredicate::ge(1), Adjacency::NN);
    }));
    auto r = fkg_check_exact(d, bc, fam, Monotonicity::Height, ExactLimits{20});
    EXPECT_TRUE(r.passed) << "instance " << t;
    ++tested;
  }
  EXPECT_EQ(tested, 60);
}

TEST(Fkg, NonIncreasingMemberIsRejectedWithWitness) {
  auto inst = single_odd_vertex();
  auto bad = event_indicator("1{h<=-1}", [](const HeightFunction& h) { return h.at({1, 0}) <= -1; });
  try {
    fkg_check_exact(inst.domain, inst.bc, {threshold_indicator({1, 0}, 1), bad});
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("1{h<=-1} is not increasing"), std::string::npos) << e.what();
  }
}

TEST(Fkg, AbsoluteValueMode) {
  auto d = share(build_rect(5, 5));
  auto ring = ring_of_5x5();
  std::mt19937_64 rng(22);
  int tested = 0;
  for (int t = 0; t < 400 && tested < 40; ++t) {
    BoundaryCondition bc;
    std::vector<Vertex> pos;
    auto walk = random_ring_walk(rng);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = std::abs(walk[i]);
      if (rng() % 5 == 0) {
        bc.set(ring[i], ValueSet::interval(-a, a));
      } else {
        bc.set(ring[i], ValueSet::interval(a, a + 2 * static_cast<int>(rng() % 5 == 0)));
        pos.push_back(ring[i]);
      }
    }
    bc.set_pos_part(pos);
    auto sets = admissible_sets(*d, bc);
    if (!sets || detail::free_vertex_count(*sets) > 12) continue;
    ++tested;
    auto fam = threshold_family(*d, bc, Monotonicity::AbsHeight);
    auto r = fkg_check_exact(d, bc, fam, Monotonicity::AbsHeight, ExactLimits{20});
    EXPECT_TRUE(r.passed) << t;
  }
  EXPECT_EQ(tested, 40);
  // h itself is not a function of |h|
  auto inst = single_odd_vertex();
  auto bc = inst.bc;
  bc.set_pos_part({});
  EXPECT_THROW(fkg_check_exact(inst.domain, bc, {height_at({1, 0})}, Monotonicity::AbsHeight), InvalidArgument);
  EXPECT_THROW(fkg_check_exact(inst.domain, inst.bc, {}, Monotonicity::AbsHeight), InvalidArgument);
}

TEST(Cbc, ConstantZeroAgainstConstantTwo) {
  auto inst = single_odd_vertex();
  BoundaryCondition hi;
  for (auto& [v, s] : inst.bc.entries()) hi.set(v, ValueSet::single(2));
  auto r = cbc_check_exact(inst.domain, inst.bc, hi, {height_at({1, 0})});
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].low, Rational(0));
  EXPECT_EQ(r.entries[0].high, Rational(2));
  EXPECT_TRUE(r.passed);
}

TEST(Cbc, IdenticalConditionsGiveEqualExpectations) {
  auto inst = grid5_ring_parity();
  auto fam = threshold_family(*inst.domain, inst.bc);
  auto r = cbc_check_exact(inst.domain, inst.bc, inst.bc, fam);
  for (auto& e : r.entries) EXPECT_EQ(e.low, e.high);
}

TEST(Cbc, RandomNestedIntervalsAreMonotone) {
  auto d = share(build_rect(5, 5));
  auto ring = ring_of_5x5();
  std::mt19937_64 rng(23);
  int tested = 0;
  for (int t = 0; t < 2000 && tested < 60; ++t) {
    auto walk = random_ring_walk(rng);
    BoundaryCondition lo, hi;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = walk[i] - 2 * static_cast<int>(rng() % 5 == 0);
      int b = walk[i] + 2 * static_cast<int>(rng() % 5 == 0);
      int a2 = std::min(a + 2 * static_cast<int>(rng() % 3 == 0), b);
      int b2 = std::max(b, a2) + 2 * static_cast<int>(rng() % 5 == 0);
      lo.set(ring[i], ValueSet::interval(a, b));
      hi.set(ring[i], ValueSet::interval(a2, b2));
    }
    auto sl = admissible_sets(*d, lo), sh = admissible_sets(*d, hi);
    if (!sl || !sh || detail::free_vertex_count(*sl) > 12 || detail::free_vertex_count(*sh) > 12) continue;
    auto fam = threshold_family(*d, lo);
    for (auto& f : threshold_family(*d, hi)) fam.push_back(f);
    auto r = cbc_check_exact(d, lo, hi, fam, Monotonicity::Height, ExactLimits{20});
    EXPECT_TRUE(r.passed) << t;
    ++tested;
  }
  EXPECT_EQ(tested, 60);
}

TEST(Cbc, HypothesesAreEnforced) {
  auto inst = single_odd_vertex();
  BoundaryCondition hi;
  for (auto& [v, s] : inst.bc.entries()) hi.set(v, ValueSet::single(-2));
  EXPECT_THROW(cbc_check_exact(inst.domain, inst.bc, hi, {height_at({1, 0})}), InvalidArgument);
  BoundaryCondition partial;
  partial.set({0, 0}, ValueSet::single(0));
  EXPECT_THROW(cbc_check_exact(inst.domain, inst.bc, partial, {}), InvalidArgument);
  // |h| mode needs nested B_pos
  auto lo = inst.bc, up = inst.bc;
  lo.set_pos_part({{0, 0}});
  up.set_pos_part({});
  EXPECT_THROW(cbc_check_exact(inst.domain, lo, up, {}, Monotonicity::AbsHeight), InvalidArgument);
  up.set_pos_part({{0, 0}, {2, 0}});
  EXPECT_NO_THROW(cbc_check_exact(inst.domain, lo, up, {abs_threshold_indicator({1, 0}, 1)}, Monotonicity::AbsHeight));
}
