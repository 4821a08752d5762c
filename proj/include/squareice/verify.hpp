#pragma once

// Verification suites: exhaustive duality checks, FKG and CBC on small
// instances, the heights/arrows bijection, sampler correctness and oracle
// cross-checks. Failures carry a replayable counterexample.

#include <chrono>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "squareice/estimate.hpp"
#include "squareice/io.hpp"

namespace squareice {

struct SuiteResult {
  explicit SuiteResult(std::string n = {}) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  long long checked = 0;
  long long failures = 0;
  double seconds = 0;
  std::string detail;
  std::optional<Json> counterexample;  // first failure only

  void fail(std::string what, Json example) {
    ++failures;
    passed = false;
    if (!counterexample) {
      detail = std::move(what);
      example["suite"] = name;
      counterexample = std::move(example);
    }
  }
};

struct VerifyOptions {
  int max_size = 4;  // rectangles up to max_size x max_size
  int m_min = -2;
  int m_max = 2;
  DualityOptions duality;  // fault injection replaces an adjacency here
  std::uint64_t seed = 1;
  int max_free = 12;  // FKG, CBC and connectivity instance cap
  int fkg_instances = 60;
  int cbc_instances = 60;
  long sampler_samples = 100000;
  long sampler_thin = 4;
  double tv_threshold = 0.02;
  long bijection_samples = 1000;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Corner quad of a rectangle: [ab] is the left side, [cd] the right side.
inline Quad corner_quad(const DomainRef& d, int x0, int y0, int x1, int y1) {
  return Quad(d, {x0, y1}, {x0, y0}, {x1, y0}, {x1, y1});
}

/// Every choice of four distinct boundary points, in boundary order.
inline std::vector<Quad> all_quads(const DomainRef& d) {
  const auto& ring = d->boundary();
  const std::size_t n = ring.size();
  std::vector<Quad> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) out.emplace_back(d, ring[i], ring[j], ring[k], ring[l]);
  return out;
}

inline Json cross_options_json(const DualityOptions& o) {
  return Json{{"cross", to_string(o.cross)}, {"star", to_string(o.star)}};
}

inline DualityOptions cross_options_from_json(const Json& j) {
  DualityOptions o;
  if (j.contains("cross")) o.cross = adjacency_from_string(j.at("cross").get<std::string>());
  if (j.contains("star")) o.star = adjacency_from_string(j.at("star").get<std::string>());
  return o;
}

inline std::vector<Vertex> ring_of_5x5() {
  std::vector<Vertex> r;
  for (int x = 0; x < 4; ++x) r.push_back({x, 0});
  for (int y = 0; y < 4; ++y) r.push_back({4, y});
  for (int x = 4; x > 0; --x) r.push_back({x, 4});
  for (int y = 4; y > 0; --y) r.push_back({0, y});
  return r;
}

/// A closed +-1 walk of length 16 starting at 0, i.e. boundary values for
/// the ring of a 5x5 block.
template <class Rng>
std::vector<int> random_ring_walk(Rng& rng) {
  std::vector<int> steps(16, 1);
  std::fill(steps.begin() + 8, steps.end(), -1);
  std::shuffle(steps.begin(), steps.end(), rng);
  std::vector<int> vals{0};
  for (int i = 0; i + 1 < 16; ++i) vals.push_back(vals.back() + steps[static_cast<std::size_t>(i)]);
  return vals;
}

inline bool small_enough(const Domain& d, const BoundaryCondition& bc, int max_free) {
  auto sets = admissible_sets(d, effective_bc(d, bc));
  return sets && free_vertex_count(*sets) <= max_free;
}

inline std::string rational_string(const Rational& r) {
  std::ostringstream s;
  s << r;
  return s.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Duality

/// Replays a duality counterexample; returns the violated identity, if any.
inline std::optional<std::string> replay_counterexample(const Json& j) {
  auto inst = instance_from_json(j.at("instance"));
  auto h = heights_from_json(j.at("heights"), inst.domain);
  auto opt = detail::cross_options_from_json(j.value("options", Json::object()));
  auto suite = j.value("suite", std::string("duality"));
  if (suite == "annulus") {
    const Json& a = j.at("annulus");
    Annulus ann(a.at("center").get<Vertex>(), a.at("inner").get<int>(), a.at("outer").get<int>());
    if (annulus_duality_check(h, ann, opt)) return std::nullopt;
    return std::string("annulus duality fails");
  }
  auto q = quad_from_json(j.at("quad"), inst.domain);
  return duality_violation(h, q, j.at("m").get<int>(), opt);
}

/// Every configuration of every quad instance against every duality identity
/// for m in [m_min, m_max]: corner quads of all w x h rectangles up to
/// max_size (with rotation), every quad of the rectangles with at most 9
/// vertices, even boxes with zero boundary and the two-arc quads.
inline SuiteResult verify_duality(const VerifyOptions& o) {
  SuiteResult r{"duality"};
  detail::Stopwatch sw;
  auto run = [&](const Instance& inst, const std::vector<Quad>& quads) {
    for_each_hom(inst.domain, inst.bc, [&](const HeightFunction& h) {
      for (const auto& q : quads) {
        for (int m = o.m_min; m <= o.m_max; ++m) {
          ++r.checked;
          if (auto bad = duality_violation(h, q, m, o.duality)) {
            r.fail(*bad + " (" + inst.name + ", m=" + std::to_string(m) + ")",
                   Json{{"instance", instance_json(inst)},
                        {"heights", heights_json(h)},
                        {"quad", quad_json(q)},
                        {"m", m},
                        {"options", detail::cross_options_json(o.duality)},
                        {"violation", *bad}});
          }
        }
      }
    });
  };
  for (int w = 2; w <= o.max_size; ++w) {
    for (int hgt = 2; hgt <= o.max_size; ++hgt) {
      auto d = share(build_rect(w, hgt));
      Instance inst{"rect-" + std::to_string(w) + "x" + std::to_string(hgt), d, BoundaryCondition::pinned({0, 0}, 0),
                    std::nullopt};
      std::vector<Quad> quads;
      if (w * hgt <= 9) {
        quads = detail::all_quads(d);
      } else {
        auto q = detail::corner_quad(d, 0, 0, w - 1, hgt - 1);
        quads = {q, q.rotated()};
      }
      run(inst, quads);
    }
  }
  for (int n = 1; n <= std::min(2, o.max_size / 2); ++n) {
    auto inst = even_box_zero(n);
    auto q = detail::corner_quad(inst.domain, -n, -n, n, n);
    run(inst, {q, q.rotated()});
  }
  if (o.max_size >= 3) {
    for (auto inst : {even_quad_two_zero(1, 3), mixed_quad_two_one(1, 3)}) run(inst, {*inst.quad, inst.quad->rotated()});
  }
  r.seconds = sw.seconds();
  if (r.passed) r.detail = std::to_string(r.checked) + " (configuration, quad, m) checks, 100% pass";
  return r;
}

/// Exactly one of an NN-crossing of |h| >= 1 and a Cross-loop of h = 0 in
/// the annulus, exhaustively on the smallest even box and on exact samples
/// of a larger one.
inline SuiteResult verify_annulus(const VerifyOptions& o) {
  SuiteResult r{"annulus"};
  detail::Stopwatch sw;
  auto check = [&](const Instance& inst, const HeightFunction& h, const Annulus& a) {
    ++r.checked;
    if (!annulus_duality_check(h, a, o.duality)) {
      r.fail("annulus duality fails on " + inst.name,
             Json{{"instance", instance_json(inst)},
                  {"heights", heights_json(h)},
                  {"annulus", {{"center", a.center}, {"inner", a.inner}, {"outer", a.outer}}},
                  {"options", detail::cross_options_json(o.duality)}});
    }
  };
  auto smallest = even_box_zero(2);
  for_each_hom(smallest.domain, smallest.bc,
               [&](const HeightFunction& h) { check(smallest, h, Annulus({0, 0}, 1, 2)); });
  auto larger = even_box_zero(4);
  ExactSampler sampler(larger.domain, larger.bc);
  std::mt19937_64 rng(derive_seed(o.seed, 0, "annulus"));
  for (int t = 0; t < 500; ++t) {
    auto h = sampler(rng);
    check(larger, h, Annulus({0, 0}, 2, 4));
    check(larger, h, Annulus({0, 0}, 1, 3));
  }
  r.seconds = sw.seconds();
  if (r.passed) r.detail = std::to_string(r.checked) + " configurations, 100% pass";
  return r;
}

// ---------------------------------------------------------------------------
// FKG and CBC

/// Exact FKG over threshold families (plus a height and a crossing
/// indicator) on random boundary conditions of a 5x5 block, in both the h
/// and the |h| mode, and on the named small instances.
inline SuiteResult verify_fkg(const VerifyOptions& o) {
  SuiteResult r{"fkg"};
  detail::Stopwatch sw;
  const ExactLimits lim{o.max_free};
  auto record = [&](const Instance& inst, const FkgReport& rep, const std::vector<MonotoneFunction>& fam, bool abs_mode) {
    r.checked += static_cast<long long>(rep.entries.size());
    if (!rep.passed) {
      const auto& w = *rep.worst;
      r.fail("negative covariance " + detail::rational_string(w.covariance) + " between " + fam[w.f].name + " and " +
                 fam[w.g].name + " on " + inst.name,
             Json{{"instance", instance_json(inst)},
                  {"mode", abs_mode ? "abs" : "height"},
                  {"f", fam[w.f].name},
                  {"g", fam[w.g].name},
                  {"covariance", detail::rational_string(w.covariance)}});
    }
  };
  for (auto inst : {single_odd_vertex(), grid5_ring_parity(), even_box_zero(1), rect_ring_parity(4, 5)}) {
    if (!detail::small_enough(*inst.domain, inst.bc, o.max_free)) continue;
    auto fam = threshold_family(*inst.domain, inst.bc);
    record(inst, fkg_check_exact(inst.domain, inst.bc, fam, Monotonicity::Height, lim), fam, false);
  }
  auto d = share(build_rect(5, 5));
  auto centred = share(build_rect(5, 5, -2, -2));
  auto ring = detail::ring_of_5x5();
  std::mt19937_64 rng(derive_seed(o.seed, 0, "fkg"));
  int done = 0;
  for (int t = 0; t < 50 * o.fkg_instances && done < o.fkg_instances; ++t) {
    auto walk = detail::random_ring_walk(rng);
    BoundaryCondition bc;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int lo = walk[i] - 2 * static_cast<int>(rng() % 4 == 0);
      int hi = walk[i] + 2 * static_cast<int>(rng() % 4 == 0);
      bc.set(ring[i], ValueSet::interval(lo, hi));
    }
    bc.set(ring[0], ValueSet::single(0));
    if (!detail::small_enough(*d, bc, o.max_free)) continue;
    Instance inst{"block5-" + std::to_string(t), d, bc, std::nullopt};
    auto fam = threshold_family(*d, bc);
    fam.push_back(height_at({2, 2}));
    fam.push_back(event_indicator("H_{h>=1}(3x3)", [centred](const HeightFunction& h) {
      HeightFunction c(centred, h.values());
      return box_crossing(c, Box{1, 1, true}, LevelPredicate::ge(1), Adjacency::NN);
    }));
    record(inst, fkg_check_exact(d, bc, fam, Monotonicity::Height, lim), fam, false);
    ++done;
  }
  done = 0;
  for (int t = 0; t < 50 * o.fkg_instances && done < o.fkg_instances; ++t) {
    BoundaryCondition bc;
    std::vector<Vertex> pos;
    auto walk = detail::random_ring_walk(rng);
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
    if (!detail::small_enough(*d, bc, o.max_free)) continue;
    Instance inst{"block5-abs-" + std::to_string(t), d, bc, std::nullopt};
    auto fam = threshold_family(*d, bc, Monotonicity::AbsHeight);
    record(inst, fkg_check_exact(d, bc, fam, Monotonicity::AbsHeight, lim), fam, true);
    ++done;
  }
  r.seconds = sw.seconds();
  if (r.passed) r.detail = std::to_string(r.checked) + " covariances, all >= 0";
  return r;
}

/// Exact CBC over random nested interval pairs on a 5x5 block, in the h
/// mode and the |h| mode, with threshold families of both conditions.
inline SuiteResult verify_cbc(const VerifyOptions& o) {
  SuiteResult r{"cbc"};
  detail::Stopwatch sw;
  const ExactLimits lim{o.max_free};
  auto d = share(build_rect(5, 5));
  auto ring = detail::ring_of_5x5();
  std::mt19937_64 rng(derive_seed(o.seed, 0, "cbc"));
  auto record = [&](const BoundaryCondition& lo, const BoundaryCondition& hi, const CbcReport& rep,
                    const std::vector<MonotoneFunction>& fam, bool abs_mode) {
    r.checked += static_cast<long long>(rep.entries.size());
    if (rep.passed) return;
    for (const auto& e : rep.entries) {
      if (e.low <= e.high) continue;
      r.fail("expectation of " + fam[e.f].name + " drops from " + detail::rational_string(e.low) + " to " +
                 detail::rational_string(e.high),
             Json{{"low", instance_json({"low", d, lo, std::nullopt})},
                  {"high", instance_json({"high", d, hi, std::nullopt})},
                  {"mode", abs_mode ? "abs" : "height"},
                  {"f", fam[e.f].name}});
      return;
    }
  };
  int done = 0;
  for (int t = 0; t < 50 * o.cbc_instances && done < o.cbc_instances; ++t) {
    auto walk = detail::random_ring_walk(rng);
    BoundaryCondition lo, hi;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = walk[i] - 2 * static_cast<int>(rng() % 5 == 0);
      int b = walk[i] + 2 * static_cast<int>(rng() % 5 == 0);
      int a2 = std::min(a + 2 * static_cast<int>(rng() % 3 == 0), b);
      int b2 = std::max(b, a2) + 2 * static_cast<int>(rng() % 5 == 0);
      lo.set(ring[i], ValueSet::interval(a, b));
      hi.set(ring[i], ValueSet::interval(a2, b2));
    }
    if (!detail::small_enough(*d, lo, o.max_free) || !detail::small_enough(*d, hi, o.max_free)) continue;
    auto fam = threshold_family(*d, lo);
    for (auto& f : threshold_family(*d, hi)) fam.push_back(f);
    record(lo, hi, cbc_check_exact(d, lo, hi, fam, Monotonicity::Height, lim), fam, false);
    ++done;
  }
  done = 0;
  for (int t = 0; t < 50 * o.cbc_instances && done < o.cbc_instances; ++t) {
    auto walk = detail::random_ring_walk(rng);
    BoundaryCondition lo, hi;
    std::vector<Vertex> pos_lo, pos_hi;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = std::abs(walk[i]);
      int up = 2 * static_cast<int>(rng() % 4 == 0);
      if (rng() % 4 == 0) {
        // symmetric in both, or made positive in the higher condition
        lo.set(ring[i], ValueSet::interval(-a, a));
        if (rng() % 2) {
          hi.set(ring[i], ValueSet::interval(-a - up, a + up));
        } else {
          hi.set(ring[i], ValueSet::interval(a, a + up));
          pos_hi.push_back(ring[i]);
        }
      } else {
        lo.set(ring[i], ValueSet::interval(a, a + up));
        hi.set(ring[i], ValueSet::interval(a + up, a + up + 2 * static_cast<int>(rng() % 4 == 0)));
        pos_lo.push_back(ring[i]);
        pos_hi.push_back(ring[i]);
      }
    }
    lo.set_pos_part(pos_lo);
    hi.set_pos_part(pos_hi);
    if (!detail::small_enough(*d, lo, o.max_free) || !detail::small_enough(*d, hi, o.max_free)) continue;
    auto fam = threshold_family(*d, lo, Monotonicity::AbsHeight);
    for (auto& f : threshold_family(*d, hi, Monotonicity::AbsHeight)) fam.push_back(f);
    record(lo, hi, cbc_check_exact(d, lo, hi, fam, Monotonicity::AbsHeight, lim), fam, true);
    ++done;
  }
  r.seconds = sw.seconds();
  if (r.passed) r.detail = std::to_string(r.checked) + " expectation pairs, all monotone";
  return r;
}

// ---------------------------------------------------------------------------
// Bijection

/// Heights -> arrows -> heights is the identity and the ice rule holds: on
/// every configuration of T_2 and on MCMC samples of T_16 and an even box.
inline SuiteResult verify_bijection(const VerifyOptions& o) {
  SuiteResult r{"bijection"};
  detail::Stopwatch sw;
  auto check = [&](const Instance& inst, const HeightFunction& h) {
    ++r.checked;
    auto ar = heights_to_arrows(h);
    std::string bad;
    if (!ice_rule_holds(ar)) {
      bad = "ice rule fails";
    } else {
      auto back = arrows_to_heights(ar, h[0], 0);
      if (!(back == h)) bad = "round trip changes the heights";
      else if (!(heights_to_arrows(back) == ar)) bad = "round trip changes the arrows";
    }
    if (!bad.empty()) r.fail(bad + " on " + inst.name, Json{{"instance", instance_json(inst)}, {"heights", heights_json(h)}});
  };
  auto t2 = torus_instance(2);
  for_each_hom(t2.domain, detail::effective_bc(*t2.domain, t2.bc), [&](const HeightFunction& h) { check(t2, h); });
  long long exhaustive = r.checked;
  for (auto inst : {torus_instance(16), even_box_zero(8)}) {
    ChainConfig cfg;
    cfg.burn_in = 100;
    cfg.thin = 2;
    cfg.sweeps = cfg.burn_in + (o.bijection_samples / 2 + 1) * cfg.thin;
    cfg.seed = derive_seed(o.seed, 0, "bijection");
    auto bc = detail::effective_bc(*inst.domain, inst.bc);
    run_chain(median_height(inst.domain, bc), bc, cfg, [&](const HeightFunction& h, long) { check(inst, h); });
  }
  r.seconds = sw.seconds();
  if (r.passed)
    r.detail = std::to_string(exhaustive) + " T_2 configurations and " + std::to_string(r.checked - exhaustive) +
               " samples, all round trips exact";
  return r;
}

// ---------------------------------------------------------------------------
// Sampler

/// Total variation between the empirical law of a chain and the uniform law.
inline double sampler_tv(const Instance& inst, long samples, long thin, std::uint64_t seed) {
  auto bc = detail::effective_bc(*inst.domain, inst.bc);
  auto all = enumerate(inst.domain, bc);
  std::map<std::vector<int>, long> counts;
  for (auto& h : all) counts[h.values()] = 0;
  ChainConfig cfg;
  cfg.burn_in = 100;
  cfg.thin = thin;
  cfg.sweeps = cfg.burn_in + samples * thin;
  cfg.seed = seed;
  run_chain(minimal_height(inst.domain, bc), bc, cfg, [&](const HeightFunction& h, long) {
    auto it = counts.find(h.values());
    if (it == counts.end()) throw InternalCorruption("sample outside the enumerated space");
    ++it->second;
  });
  double tv = 0;
  for (auto& [k, c] : counts)
    tv += std::abs(static_cast<double>(c) / static_cast<double>(samples) - 1.0 / static_cast<double>(all.size()));
  return tv / 2;
}

/// TV against the oracle on the 3x3 instance, and a connected single-site
/// transition graph on every instance with at most max_free free vertices
/// (named ones and random rectangles).
inline SuiteResult verify_sampler(const VerifyOptions& o) {
  SuiteResult r{"sampler"};
  detail::Stopwatch sw;
  auto grid = grid5_ring_parity();
  double tv = sampler_tv(grid, o.sampler_samples, o.sampler_thin, derive_seed(o.seed, 0, "sampler"));
  ++r.checked;
  if (!(tv < o.tv_threshold)) {
    r.fail("TV " + format_number(tv) + " >= " + format_number(o.tv_threshold) + " on " + grid.name,
           Json{{"instance", instance_json(grid)}, {"tv", tv}, {"samples", o.sampler_samples}});
  }
  std::vector<Instance> insts{single_odd_vertex(), single_even_vertex(), even_box_zero(1), grid5_ring_parity(),
                              rect_ring_parity(4, 5), torus_instance(2), mixed_quad_two_one(1, 1)};
  std::mt19937_64 rng(derive_seed(o.seed, 1, "sampler"));
  for (int t = 0; t < 120; ++t) {
    int w = 2 + static_cast<int>(rng() % 3), h = 2 + static_cast<int>(rng() % 3);
    auto d = share(build_rect(w, h));
    BoundaryCondition bc;
    for (auto v : d->boundary()) {
      if (rng() % 3 == 0) continue;
      int base = parity(v) + 2 * (static_cast<int>(rng() % 3) - 1);
      bc.set(v, rng() % 2 ? ValueSet::single(base) : ValueSet::interval(base - 2, base + 2));
    }
    bc.set({0, 0}, ValueSet::single(0));
    if (!is_admissible(*d, bc)) continue;
    insts.push_back({"random-rect-" + std::to_string(t), d, bc, std::nullopt});
  }
  long long graphs = 0;
  for (auto& inst : insts) {
    if (!detail::small_enough(*inst.domain, inst.bc, o.max_free)) continue;
    auto [ok, states] = transition_graph_connected(inst.domain, inst.bc);
    ++r.checked;
    ++graphs;
    if (!ok)
      r.fail("transition graph of " + inst.name + " is disconnected",
             Json{{"instance", instance_json(inst)}, {"states", states}});
  }
  r.seconds = sw.seconds();
  if (r.passed)
    r.detail = "TV " + format_number(tv) + " < " + format_number(o.tv_threshold) + "; " + std::to_string(graphs) +
               " transition graphs connected";
  return r;
}

// ---------------------------------------------------------------------------
// Oracle cross-checks

/// Transfer-matrix counts equal enumeration counts, and the two-arc square crossing
/// has exact probability at least 1/2.
inline SuiteResult verify_oracle(const VerifyOptions&) {
  SuiteResult r{"oracle"};
  detail::Stopwatch sw;
  for (auto inst : {single_odd_vertex(), grid5_ring_parity(), even_box_zero(1), even_box_zero(2),
                    fig2_square(), rect_ring_parity(4, 5), mixed_quad_two_one(), torus_instance(2), torus_instance(4)}) {
    auto bc = detail::effective_bc(*inst.domain, inst.bc);
    auto a = enumerate_count(inst.domain, bc);
    auto b = transfer_count(inst.domain, bc);
    ++r.checked;
    if (a != b)
      r.fail("enumeration and transfer counts differ on " + inst.name,
             Json{{"instance", instance_json(inst)}, {"enumerated", a.str()}, {"transfer", b.str()}});
  }
  auto fig = fig2_square();
  auto spec = EventSpec::crossing(fig.quad->rotated(), LevelPredicate::ge(2), Adjacency::Cross);
  auto p = exact_event_prob(fig.domain, fig.bc, spec);
  ++r.checked;
  if (p < Rational(1, 2))
    r.fail("two-arc square crossing probability " + detail::rational_string(p) + " < 1/2",
           Json{{"instance", instance_json(fig)}, {"event", event_json(spec)}});
  r.seconds = sw.seconds();
  if (r.passed) r.detail = "counts agree; two-arc square crossing probability " + detail::rational_string(p);
  return r;
}

inline std::vector<std::string> suite_names() { return {"duality", "annulus", "fkg", "cbc", "bijection", "sampler", "oracle"}; }

inline SuiteResult run_suite(const std::string& name, const VerifyOptions& o) {
  if (name == "duality") return verify_duality(o);
  if (name == "annulus") return verify_annulus(o);
  if (name == "fkg") return verify_fkg(o);
  if (name == "cbc") return verify_cbc(o);
  if (name == "bijection") return verify_bijection(o);
  if (name == "sampler") return verify_sampler(o);
  if (name == "oracle") return verify_oracle(o);
  throw InvalidArgument("unknown suite '" + name + "'");
}

inline std::vector<SuiteResult> verify_all(const VerifyOptions& o) {
  std::vector<SuiteResult> out;
  for (const auto& n : suite_names()) out.push_back(run_suite(n, o));
  return out;
}

inline Json suite_json(const SuiteResult& r) {
  Json j{{"suite", r.name},     {"passed", r.passed},   {"checked", r.checked},
         {"failures", r.failures}, {"seconds", r.seconds}, {"detail", r.detail}};
  return j;
}

}  // namespace squareice
