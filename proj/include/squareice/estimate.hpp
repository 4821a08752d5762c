#pragma once

// Monte Carlo estimators over several independent chains, and exact
// FKG / comparison-between-boundary-conditions verifiers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "squareice/connect.hpp"
#include "squareice/exact.hpp"
#include "squareice/instances.hpp"
#include "squareice/mcmc.hpp"

namespace squareice {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class InitKind { Flat, Minimal };

/// Settings shared by every estimator. Chain c runs `chain` with
/// chain_index = c; `chain.seed` is the master seed.
struct RunConfig {
  ChainConfig chain;
  int chains = 8;
  int threads = 1;
  InitKind init = InitKind::Flat;
  bool use_oracle = true;   // replace MCMC by exact enumeration when small enough
  int oracle_max_free = 20;

  void validate() const {
    chain.validate();
    if (chains < 1) throw InvalidArgument("need at least one chain");
    if (threads < 1) throw InvalidArgument("need at least one thread");
  }
};

/// burn_in = 20 n^2 and 100 n^2 measured sweeps with thin = 1: for cheap
/// scalar observables, where thinning only throws information away.
inline ChainConfig scalar_chain_config(long n, std::uint64_t seed = 0) {
  ChainConfig c;
  c.burn_in = 20 * n * n;
  c.thin = 1;
  c.sweeps = c.burn_in + 100 * n * n;
  c.seed = seed;
  return c;
}

inline std::string describe(const LevelPredicate& p) {
  std::string var = "h";
  if (p.transform == LevelPredicate::Transform::Absolute) var = "|h|";
  if (p.transform == LevelPredicate::Transform::Shift) var = "h" + std::string(p.shift < 0 ? "" : "+") + std::to_string(p.shift);
  const auto& s = p.set;
  if (!s.is_interval()) {
    std::string out = var + " in {";
    for (std::size_t i = 0; i < s.values().size(); ++i) out += (i ? "," : "") + std::to_string(s.values()[i]);
    return out + "}";
  }
  if (s.lo() == s.hi()) return var + "=" + std::to_string(s.lo());
  if (!s.bounded_above() && s.bounded_below()) return var + ">=" + std::to_string(s.lo());
  if (!s.bounded_below() && s.bounded_above()) return var + "<=" + std::to_string(s.hi());
  if (!s.bounded()) return "true";
  return var + " in [" + std::to_string(s.lo()) + "," + std::to_string(s.hi()) + "]";
}

inline std::string describe(const EventSpec& e) {
  std::string what;
  switch (e.mode) {
    case EventSpec::Mode::Crossing:
      what = "crossing";
      break;
    case EventSpec::Mode::Circuit:
      what = e.annulus ? "circuit in annulus(" + std::to_string(e.annulus->inner) + "," +
                             std::to_string(e.annulus->outer) + ")"
                       : "circuit";
      break;
    case EventSpec::Mode::BoxCrossing:
      what = e.box ? std::string(e.box->horizontal ? "horizontal" : "vertical") + " crossing of box(" +
                         std::to_string(e.box->nx) + "," + std::to_string(e.box->ny) + ")"
                   : "box crossing";
      break;
  }
  return what + " " + to_string(e.adjacency) + " " + describe(e.predicate);
}

// ---------------------------------------------------------------------------
// Chain running and error bars

namespace detail {

/// Runs f(c) for c in [0, count) on up to `threads` workers.
template <class F>
void parallel_for(int count, int threads, F&& f) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int c = 0; c < count; ++c) f(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int c = next++; c < count; c = next++) {
        try {
          f(c);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct SeriesSums {
  long n = 0;
  std::vector<double> sum;
  std::vector<double> sumsq;

  explicit SeriesSums(std::size_t k = 0) : sum(k, 0.0), sumsq(k, 0.0) {}
  void add(std::span<const double> x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[i] += x[i];
      sumsq[i] += x[i] * x[i];
    }
  }
  void merge(const SeriesSums& o) {
    n += o.n;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sumsq[i] += o.sumsq[i];
    }
  }
};

/// Retained measurements of one chain, split into its first and second half.
struct ChainRecord {
  std::array<SeriesSums, 2> half;
  SeriesSums total() const {
    SeriesSums t = half[0];
    t.merge(half[1]);
    return t;
  }
};

inline std::vector<double> pooled_means(const std::vector<ChainRecord>& rs, int skip = -1) {
  std::size_t k = rs.empty() ? 0 : rs.front().half[0].sum.size();
  SeriesSums all(k);
  for (int c = 0; c < static_cast<int>(rs.size()); ++c)
    if (c != skip) all.merge(rs[static_cast<std::size_t>(c)].total());
  std::vector<double> m(k, kNaN);
  if (all.n > 0)
    for (std::size_t i = 0; i < k; ++i) m[i] = all.sum[i] / static_cast<double>(all.n);
  return m;
}

/// Delete-one-chain jackknife of stat(pooled means): {estimate, std_err}.
template <class Stat>
std::pair<double, double> jackknife(const std::vector<ChainRecord>& rs, Stat&& stat) {
  double full = stat(pooled_means(rs));
  const int m = static_cast<int>(rs.size());
  if (m < 2) return {full, kNaN};
  std::vector<double> loo;
  for (int c = 0; c < m; ++c) loo.push_back(stat(pooled_means(rs, c)));
  double mean = 0;
  for (double t : loo) mean += t;
  mean /= m;
  double ss = 0;
  for (double t : loo) ss += (t - mean) * (t - mean);
  return {full, std::sqrt(ss * (m - 1) / m)};
}

/// Gelman-Rubin ratio over the half-chains of component `k`.
inline double split_rhat(const std::vector<ChainRecord>& rs, std::size_t k) {
  std::vector<double> means, vars;
  long len = std::numeric_limits<long>::max();
  for (auto& r : rs) {
    for (auto& h : r.half) {
      if (h.n < 2) continue;
      double n = static_cast<double>(h.n);
      double mu = h.sum[k] / n;
      means.push_back(mu);
      vars.push_back(std::max(0.0, (h.sumsq[k] - n * mu * mu) / (n - 1)));
      len = std::min(len, h.n);
    }
  }
  const double m = static_cast<double>(means.size());
  if (m < 2) return kNaN;
  double grand = 0;
  for (double mu : means) grand += mu;
  grand /= m;
  double between = 0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between /= (m - 1);  // variance of the sequence means (= B / L)
  double within = 0;
  for (double v : vars) within += v;
  within /= m;
  if (within == 0) return between == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  double L = static_cast<double>(len);
  return std::sqrt(((L - 1) / L * within + between) / within);
}

inline HeightFunction initial_state(const DomainRef& d, const BoundaryCondition& bc, InitKind kind) {
  return kind == InitKind::Flat ? median_height(d, bc) : minimal_height(d, bc);
}

/// Runs rc.chains chains and records measure(chain, out) at every retained
/// sweep; `k` is the number of components written to `out`.
template <class Measure>
std::vector<ChainRecord> run_chains(const DomainRef& d, const BoundaryCondition& bc_in, const RunConfig& rc,
                                    std::size_t k, Measure&& measure) {
  rc.validate();
  auto bc = effective_bc(*d, bc_in);
  if (!is_admissible(*d, bc)) throw InvalidArgument("boundary condition is not admissible");
  auto init = initial_state(d, bc, rc.init);
  std::vector<ChainRecord> out(static_cast<std::size_t>(rc.chains), ChainRecord{{SeriesSums(k), SeriesSums(k)}});
  parallel_for(rc.chains, rc.threads, [&](int c) {
    ChainConfig cfg = rc.chain;
    cfg.chain_index = static_cast<std::uint64_t>(c);
    Chain chain(init, bc, cfg);
    const long retained = cfg.retained();
    long taken = 0;
    std::vector<double> x(k);
    auto& rec = out[static_cast<std::size_t>(c)];
    for (long s = 1; s <= cfg.sweeps; ++s) {
      chain.sweep();
      if (s <= cfg.burn_in || (s - cfg.burn_in) % cfg.thin != 0) continue;
      measure(static_cast<const Chain&>(chain), std::span<double>(x));
      rec.half[2 * taken < retained ? 0 : 1].add(x);
      ++taken;
    }
  });
  return out;
}

inline bool oracle_supports(const Domain& d, const BoundaryCondition& bc, const RunConfig& rc) {
  if (!rc.use_oracle) return false;
  auto sets = admissible_sets(d, effective_bc(d, bc));
  return sets && free_vertex_count(*sets) <= rc.oracle_max_free;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Events

struct EventStats {
  std::string label;
  std::optional<EventSpec> spec;
  long trials = 0;
  long hits = 0;
  double p_hat = 0;
  double std_err = 0;            // sqrt(p_hat (1 - p_hat) / trials)
  double chain_std_err = kNaN;   // spread of the per-chain frequencies
  std::uint64_t seed = 0;
  int chains = 0;
  double split_rhat = kNaN;
  bool exact = false;            // computed by the oracle; trials counts configurations
  std::optional<Rational> exact_value;

  /// The larger of the two error estimates; 0 for exact values.
  double sigma() const {
    if (exact) return 0;
    if (std::isnan(chain_std_err)) return std_err;
    return std::max(std_err, chain_std_err);
  }
};

namespace detail {

inline void finish_event(EventStats& s) {
  s.p_hat = s.trials ? static_cast<double>(s.hits) / static_cast<double>(s.trials) : 0.0;
  s.std_err = s.trials ? std::sqrt(s.p_hat * (1 - s.p_hat) / static_cast<double>(s.trials)) : 0.0;
}

}  // namespace detail

/// Probability of an arbitrary event: exact when the oracle supports the
/// instance and rc.use_oracle is set, otherwise over all retained samples.
template <class Event>
EventStats estimate_indicator(const DomainRef& d, const BoundaryCondition& bc, Event&& event, const RunConfig& rc,
                              std::string label = "event") {
  rc.validate();
  EventStats s;
  s.label = std::move(label);
  s.seed = rc.chain.seed;
  if (!is_admissible(*d, detail::effective_bc(*d, bc))) throw InvalidArgument("boundary condition is not admissible");
  if (detail::oracle_supports(*d, bc, rc)) {
    BigInt hits = 0, total = 0;
    for_each_hom(d, bc, [&](const HeightFunction& h) {
      ++total;
      if (event(h)) ++hits;
    }, ExactLimits{rc.oracle_max_free});
    s.exact = true;
    s.exact_value = Rational(hits, total);
    s.trials = static_cast<long>(total);
    s.hits = static_cast<long>(hits);
    detail::finish_event(s);
    s.p_hat = s.exact_value->convert_to<double>();
    s.std_err = 0;
    return s;
  }
  auto recs = detail::run_chains(d, bc, rc, 1, [&](const Chain& c, std::span<double> out) {
    out[0] = event(c.snapshot()) ? 1.0 : 0.0;
  });
  s.chains = rc.chains;
  std::vector<double> per_chain;
  for (auto& r : recs) {
    auto t = r.total();
    s.trials += t.n;
    s.hits += std::lround(t.sum[0]);
    if (t.n) per_chain.push_back(t.sum[0] / static_cast<double>(t.n));
  }
  detail::finish_event(s);
  if (per_chain.size() >= 2) {
    double m = 0, ss = 0;
    for (double p : per_chain) m += p;
    m /= static_cast<double>(per_chain.size());
    for (double p : per_chain) ss += (p - m) * (p - m);
    s.chain_std_err = std::sqrt(ss / static_cast<double>(per_chain.size() - 1) / static_cast<double>(per_chain.size()));
  }
  s.split_rhat = detail::split_rhat(recs, 0);
  return s;
}

inline EventStats estimate_event(const DomainRef& d, const BoundaryCondition& bc, const EventSpec& spec,
                                 const RunConfig& rc) {
  auto s = estimate_indicator(d, bc, spec, rc, describe(spec));
  s.spec = spec;
  return s;
}

/// a_n: a Cross-circuit of h >= 2 in Lambda_{2n} \ Lambda_n around the origin,
/// under zero boundary conditions on Lambda_{5n}^even. For n = 1 the annulus
/// is one vertex wide and holds no Cross-circuit, so a_1 = 0.
inline EventStats a_n_estimate(int n, const RunConfig& rc) {
  if (n < 1) throw InvalidArgument("a_n needs n >= 1");
  auto inst = even_box_zero(5 * n);
  auto spec = EventSpec::circuit(Annulus({0, 0}, n, 2 * n), LevelPredicate::ge(2), Adjacency::Cross);
  auto s = estimate_event(inst.domain, inst.bc, spec, rc);
  s.label = "a_" + std::to_string(n);
  return s;
}

/// H_{h>=1}(Lambda_{n,n}): an NN-crossing of h >= 1 between the left and
/// right sides of Lambda_n, under zero boundary conditions on Lambda_{2n}^even.
inline EventStats crossing_estimate(int n, const RunConfig& rc) {
  if (n < 1) throw InvalidArgument("crossing_estimate needs n >= 1");
  auto inst = even_box_zero(2 * n);
  auto spec = EventSpec::box_crossing(Box{n, n, true}, LevelPredicate::ge(1), Adjacency::NN);
  auto s = estimate_event(inst.domain, inst.bc, spec, rc);
  s.label = "H_" + std::to_string(n);
  return s;
}

struct RenormalizationRow {
  int n = 0;
  double a_n = 0;
  double a_2n = 0;
  double ratio = kNaN;  // a_{2n} / a_n^2
};

/// (n, a_n, a_2n, a_2n / a_n^2) for every n whose double is also present.
inline std::vector<RenormalizationRow> renormalization_report(const std::vector<std::pair<int, EventStats>>& an) {
  std::vector<RenormalizationRow> out;
  for (auto& [n, s] : an) {
    for (auto& [m, t] : an) {
      if (m != 2 * n) continue;
      RenormalizationRow r{n, s.p_hat, t.p_hat, kNaN};
      if (s.p_hat > 0) r.ratio = t.p_hat / (s.p_hat * s.p_hat);
      out.push_back(r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variances

struct VarianceStats {
  Vertex u{};
  std::optional<Vertex> v;  // set for pair statistics
  int n = 0;                // size parameter of the instance
  long trials = 0;
  double mean = 0;          // E[h_u], or E[h_u - h_v] for pairs
  double variance = 0;      // Var(h_u), or E[(h_u - h_v)^2] for pairs
  double std_err = kNaN;    // jackknife over chains
  int chains = 0;
  double split_rhat = kNaN;
  bool exact = false;
  std::uint64_t seed = 0;
};

namespace detail {

/// Conditional first and second moments of h_i given its neighbours: the
/// conditional law is uniform on S(i).
inline std::pair<double, double> conditional_moments(const Chain& c, int i, const Allowed& kappa) {
  const auto& d = c.domain();
  int nb[4];
  std::size_t k = 0;
  for (int j : d.neighbours(i)) nb[k++] = c.value(j);
  if (kappa.fixed()) {
    double x = c.value(i);
    return {x, x * x};
  }
  auto s = heat_bath_choices(std::span<const int>(nb, k), kappa);
  double m1 = 0, m2 = 0;
  for (int x : s) {
    m1 += x;
    m2 += static_cast<double>(x) * x;
  }
  return {m1 / static_cast<double>(s.size()), m2 / static_cast<double>(s.size())};
}

}  // namespace detail

/// Var(h_u), Rao-Blackwellized over the heat-bath conditional at u.
inline VarianceStats vertex_variance(const DomainRef& d, const BoundaryCondition& bc_in, Vertex u, const RunConfig& rc) {
  rc.validate();
  auto bc = detail::effective_bc(*d, bc_in);
  int i = d->index_of(u);
  if (i < 0) throw InvalidArgument("vertex outside the domain");
  VarianceStats s;
  s.u = u;
  s.seed = rc.chain.seed;
  if (detail::oracle_supports(*d, bc, rc)) {
    BigInt total = 0, s1 = 0, s2 = 0;
    for_each_hom(d, bc, [&](const HeightFunction& h) {
      ++total;
      s1 += h[i];
      s2 += h[i] * h[i];
    }, ExactLimits{rc.oracle_max_free});
    Rational m1(s1, total), m2(s2, total);
    s.exact = true;
    s.trials = static_cast<long>(total);
    s.mean = m1.convert_to<double>();
    s.variance = Rational(m2 - m1 * m1).convert_to<double>();
    s.std_err = 0;
    return s;
  }
  auto sets = admissible_sets(*d, bc);
  if (!sets) throw InvalidArgument("boundary condition is not admissible");
  // every value of S(u) within kappa_u extends to a configuration, so the
  // propagated set cuts S(u) exactly like kappa_u does
  Allowed k = (*sets)[static_cast<std::size_t>(i)];
  auto recs = detail::run_chains(d, bc, rc, 2, [&](const Chain& c, std::span<double> out) {
    auto [m1, m2] = detail::conditional_moments(c, i, k);
    out[0] = m1;
    out[1] = m2;
  });
  auto [var, se] = detail::jackknife(recs, [](const std::vector<double>& m) { return std::max(0.0, m[1] - m[0] * m[0]); });
  auto means = detail::pooled_means(recs);
  s.mean = means[0];
  s.variance = var;
  s.std_err = se;
  s.chains = rc.chains;
  for (auto& r : recs) s.trials += r.total().n;
  s.split_rhat = detail::split_rhat(recs, 1);
  return s;
}

struct LinearFit {
  double slope = kNaN;
  double intercept = kNaN;
  double slope_se = kNaN;
};

/// Ordinary least squares of y against x; the slope error propagates the
/// per-point errors, taken as independent.
inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& y_se = {}) {
  const std::size_t n = x.size();
  LinearFit f;
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (y_se.size() == n) {
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) v += std::pow((x[i] - mx) / sxx, 2) * y_se[i] * y_se[i];
    f.slope_se = std::sqrt(v);
  }
  return f;
}

struct VarianceScan {
  std::vector<VarianceStats> rows;
  LinearFit fit;  // variance against ln n
};

/// Var(h_0) under zero boundary conditions on Lambda_n^even for every n.
/// `schedule(n)` gives the chain settings; scalar_chain_config by default.
inline VarianceScan variance_scan(const std::vector<int>& ns, const RunConfig& rc,
                                  const std::function<ChainConfig(int)>& schedule = {}) {
  VarianceScan out;
  std::vector<double> x, y, se;
  for (int n : ns) {
    if (n < 1) throw InvalidArgument("box sizes must be positive");
    RunConfig r = rc;
    r.chain = schedule ? schedule(n) : scalar_chain_config(n, rc.chain.seed);
    r.chain.seed = rc.chain.seed;
    auto inst = even_box_zero(n);
    auto v = vertex_variance(inst.domain, inst.bc, {0, 0}, r);
    v.n = n;
    out.rows.push_back(v);
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(v.variance);
    se.push_back(v.std_err);
  }
  out.fit = least_squares(x, y, se);
  return out;
}

namespace detail {

inline void require_even_torus(int n) {
  if (n < 2 || n % 2) throw InvalidArgument("the torus side must be even and at least 2");
}

}  // namespace detail

/// E[(h_u - h_v)^2] on T_n. With `translates`, every sample contributes the
/// average over all translates of the pair, which has the same expectation.
inline VarianceStats torus_pair_variance(int n, Vertex u, Vertex v, const RunConfig& rc, bool translates = true) {
  detail::require_even_torus(n);
  rc.validate();
  auto inst = torus_instance(n);
  const auto& d = inst.domain;
  VarianceStats s;
  s.u = d->wrap(u);
  s.v = d->wrap(v);
  s.n = n;
  s.seed = rc.chain.seed;
  int iu = d->index_of(u), iv = d->index_of(v);
  if (iu == iv) {
    s.exact = true;
    s.std_err = 0;
    return s;
  }
  if (detail::oracle_supports(*d, inst.bc, rc)) {
    BigInt total = 0, s1 = 0, s2 = 0;
    for_each_hom(d, inst.bc, [&](const HeightFunction& h) {
      ++total;
      s1 += h[iu] - h[iv];
      s2 += (h[iu] - h[iv]) * (h[iu] - h[iv]);
    }, ExactLimits{rc.oracle_max_free});
    s.exact = true;
    s.trials = static_cast<long>(total);
    s.mean = Rational(s1, total).convert_to<double>();
    s.variance = Rational(s2, total).convert_to<double>();
    s.std_err = 0;
    return s;
  }
  Vertex delta = v - u;
  std::vector<std::pair<int, int>> pairs;
  if (translates) {
    for (int i = 0; i < static_cast<int>(d->size()); ++i) pairs.emplace_back(d->index_of(d->vertex(i) + delta), i);
  } else {
    pairs.emplace_back(iv, iu);
  }
  // torus gradients do not depend on the pinned representative
  auto recs = detail::run_chains(d, inst.bc, rc, 2, [&](const Chain& c, std::span<double> out) {
    double m1 = 0, m2 = 0;
    for (auto [a, b] : pairs) {
      double g = c.value(b) - c.value(a);
      m1 += g;
      m2 += g * g;
    }
    out[0] = m1 / static_cast<double>(pairs.size());
    out[1] = m2 / static_cast<double>(pairs.size());
  });
  auto [m2, se] = detail::jackknife(recs, [](const std::vector<double>& m) { return m[1]; });
  s.mean = detail::pooled_means(recs)[0];
  s.variance = m2;
  s.std_err = se;
  s.chains = rc.chains;
  for (auto& r : recs) s.trials += r.total().n;
  s.split_rhat = detail::split_rhat(recs, 1);
  return s;
}

struct TorusScan {
  std::vector<VarianceStats> rows;  // one per separation (k, k)
  LinearFit fit;                    // E[(h_u - h_v)^2] against ln ||u - v||_1, jackknife slope error
};

/// E[(h_0 - h_{(k,k)})^2] on T_n for every k, from one set of chains,
/// averaged over translates.
inline TorusScan torus_scan(int n, const std::vector<int>& ks, const RunConfig& rc) {
  detail::require_even_torus(n);
  rc.validate();
  for (int k : ks)
    if (k < 1 || 2 * k > n) throw InvalidArgument("separations must lie in [1, n/2]");
  auto inst = torus_instance(n);
  const auto& d = inst.domain;
  const std::size_t K = ks.size();
  std::vector<std::vector<std::pair<int, int>>> pairs(K);
  for (std::size_t j = 0; j < K; ++j)
    for (int i = 0; i < static_cast<int>(d->size()); ++i)
      pairs[j].emplace_back(i, d->index_of(d->vertex(i) + Vertex{ks[j], ks[j]}));
  auto recs = detail::run_chains(d, inst.bc, rc, K, [&](const Chain& c, std::span<double> out) {
    for (std::size_t j = 0; j < K; ++j) {
      double m2 = 0;
      for (auto [a, b] : pairs[j]) {
        double g = c.value(b) - c.value(a);
        m2 += g * g;
      }
      out[j] = m2 / static_cast<double>(pairs[j].size());
    }
  });
  TorusScan out;
  std::vector<double> x;
  for (int k : ks) x.push_back(std::log(2.0 * k));
  long trials = 0;
  for (auto& r : recs) trials += r.total().n;
  for (std::size_t j = 0; j < K; ++j) {
    auto [m2, se] = detail::jackknife(recs, [j](const std::vector<double>& m) { return m[j]; });
    VarianceStats s;
    s.u = {0, 0};
    s.v = Vertex{ks[j], ks[j]};
    s.n = n;
    s.trials = trials;
    s.variance = m2;
    s.std_err = se;
    s.chains = rc.chains;
    s.split_rhat = detail::split_rhat(recs, j);
    s.seed = rc.chain.seed;
    out.rows.push_back(s);
  }
  auto slope_of = [&](const std::vector<double>& m) { return least_squares(x, m).slope; };
  auto [slope, slope_se] = detail::jackknife(recs, slope_of);
  auto full = least_squares(x, detail::pooled_means(recs));
  out.fit = {slope, full.intercept, slope_se};
  return out;
}

// ---------------------------------------------------------------------------
// Cluster diameters

struct DecayRow {
  int k = 0;
  EventStats stats;
};

struct DecayTable {
  int n = 0;
  int r = 0;
  std::vector<DecayRow> rows;
  LinearFit fit;  // ln P against k over the rows with hits, jackknife slope error
};

/// P[a Cross-cluster of h >= k with diameter >= n] under zero boundary
/// conditions on Lambda_{rn}^even, for every k in the list.
inline DecayTable diameter_decay(int n, const std::vector<int>& ks, const RunConfig& rc, int r = 11) {
  if (n < 1 || r < 1) throw InvalidArgument("diameter_decay needs n, r >= 1");
  rc.validate();
  auto inst = even_box_zero(r * n);
  const std::size_t K = ks.size();
  auto recs = detail::run_chains(inst.domain, inst.bc, rc, K, [&](const Chain& c, std::span<double> out) {
    auto h = c.snapshot();
    for (std::size_t j = 0; j < K; ++j)
      out[j] = max_cluster_diameter(h, {}, LevelPredicate::ge(ks[j]), Adjacency::Cross) >= n ? 1.0 : 0.0;
  });
  DecayTable t;
  t.n = n;
  t.r = r;
  std::vector<double> xs;
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < K; ++j) {
    EventStats s;
    s.label = "diameter >= " + std::to_string(n) + " of h>=" + std::to_string(ks[j]);
    s.seed = rc.chain.seed;
    s.chains = rc.chains;
    std::vector<double> per_chain;
    for (auto& rec : recs) {
      auto tot = rec.total();
      s.trials += tot.n;
      s.hits += std::lround(tot.sum[j]);
      if (tot.n) per_chain.push_back(tot.sum[j] / static_cast<double>(tot.n));
    }
    detail::finish_event(s);
    if (per_chain.size() >= 2) {
      double m = 0, ss = 0;
      for (double p : per_chain) m += p;
      m /= static_cast<double>(per_chain.size());
      for (double p : per_chain) ss += (p - m) * (p - m);
      s.chain_std_err = std::sqrt(ss / static_cast<double>(per_chain.size() - 1) / static_cast<double>(per_chain.size()));
    }
    s.split_rhat = detail::split_rhat(recs, j);
    if (s.hits > 0) {
      xs.push_back(ks[j]);
      used.push_back(j);
    }
    t.rows.push_back({ks[j], s});
  }
  auto slope_of = [&](const std::vector<double>& m) {
    std::vector<double> y;
    for (std::size_t j : used) y.push_back(m[j] > 0 ? std::log(m[j]) : std::log(0.5 / static_cast<double>(t.rows[j].stats.trials)));
    return least_squares(xs, y).slope;
  };
  if (used.size() >= 2) {
    auto [slope, se] = detail::jackknife(recs, slope_of);
    t.fit.slope = slope;
    t.fit.slope_se = se;
    std::vector<double> y;
    for (std::size_t j : used) y.push_back(std::log(t.rows[j].stats.p_hat));
    t.fit.intercept = least_squares(xs, y).intercept;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Crossing comparison in a widened domain

struct RswReport {
  int n = 0;
  int rho = 0;
  EventStats vertical_d;        // V^x_{h>=2}(Lambda_{rho n, n}) in D
  EventStats horizontal_d;      // H^x_{h>=2}(Lambda_{rho n, n}) in D
  EventStats horizontal_dbar;   // the same in the widened domain
  bool implication_tested = false;
  bool implication_holds = true;
  bool widening_ok = true;      // the widened estimate is not lower beyond 3 sigma
};

/// D = Lambda^even_{(rho+1) n, 2n}; the widened domain is the union of its
/// translates by (k, 0), |k| <= rho n. Zero boundary conditions on both.
inline RswReport rsw_spot_check(int n, int rho, const RunConfig& rc) {
  if (n < 1 || rho < 1) throw InvalidArgument("rsw_spot_check needs n, rho >= 1");
  auto d = share(build_even_rect((rho + 1) * n, 2 * n));
  auto dbar = share(build_even_rect((2 * rho + 1) * n, 2 * n));
  auto p = LevelPredicate::ge(2);
  auto vert = EventSpec::box_crossing(Box{rho * n, n, false}, p, Adjacency::Cross);
  auto horiz = EventSpec::box_crossing(Box{rho * n, n, true}, p, Adjacency::Cross);
  RswReport out;
  out.n = n;
  out.rho = rho;
  out.vertical_d = estimate_event(d, BoundaryCondition::zero(*d), vert, rc);
  out.horizontal_d = estimate_event(d, BoundaryCondition::zero(*d), horiz, rc);
  out.horizontal_dbar = estimate_event(dbar, BoundaryCondition::zero(*dbar), horiz, rc);
  const auto& v = out.vertical_d;
  out.implication_tested = v.p_hat - 3 * v.sigma() > 0;
  out.implication_holds = !out.implication_tested || out.horizontal_dbar.p_hat > 0;
  double gap = out.horizontal_d.p_hat - out.horizontal_dbar.p_hat;
  double sd = std::hypot(out.horizontal_d.sigma(), out.horizontal_dbar.sigma());
  out.widening_ok = gap <= 3 * sd;
  return out;
}

// ---------------------------------------------------------------------------
// Exact FKG and comparison checks

enum class Monotonicity { Height, AbsHeight };

/// An integer-valued function of the configuration, assumed increasing in h
/// (or in |h|).
struct MonotoneFunction {
  std::string name;
  std::function<long long(const HeightFunction&)> f;
};

inline MonotoneFunction threshold_indicator(Vertex v, int t) {
  return {"1{h" + std::string("(") + std::to_string(v.x) + "," + std::to_string(v.y) + ")>=" + std::to_string(t) + "}",
          [v, t](const HeightFunction& h) -> long long { return h.at(v) >= t; }};
}

inline MonotoneFunction abs_threshold_indicator(Vertex v, int t) {
  return {"1{|h(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")|>=" + std::to_string(t) + "}",
          [v, t](const HeightFunction& h) -> long long { return std::abs(h.at(v)) >= t; }};
}

inline MonotoneFunction height_at(Vertex v) {
  return {"h(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")",
          [v](const HeightFunction& h) -> long long { return h.at(v); }};
}

inline MonotoneFunction event_indicator(std::string name, std::function<bool(const HeightFunction&)> e) {
  return {std::move(name), [e = std::move(e)](const HeightFunction& h) -> long long { return e(h) ? 1 : 0; }};
}

/// 1{h_v >= t} (or 1{|h_v| >= t}) for every non-fixed vertex and every
/// threshold that splits its admissible values.
inline std::vector<MonotoneFunction> threshold_family(const Domain& d, const BoundaryCondition& bc,
                                                      Monotonicity mode = Monotonicity::Height) {
  auto sets = admissible_sets(d, detail::effective_bc(d, bc));
  if (!sets) throw InvalidArgument("boundary condition is not admissible");
  std::vector<MonotoneFunction> out;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) {
    const auto& a = (*sets)[static_cast<std::size_t>(i)];
    if (a.fixed() || !a.bounded()) continue;
    auto vals = a.values();
    Vertex v = d.vertex(i);
    if (mode == Monotonicity::Height) {
      for (std::size_t j = 1; j < vals.size(); ++j) out.push_back(threshold_indicator(v, vals[j]));
    } else {
      std::vector<int> abs_vals;
      for (int x : vals) abs_vals.push_back(std::abs(x));
      std::sort(abs_vals.begin(), abs_vals.end());
      abs_vals.erase(std::unique(abs_vals.begin(), abs_vals.end()), abs_vals.end());
      for (std::size_t j = 1; j < abs_vals.size(); ++j) out.push_back(abs_threshold_indicator(v, abs_vals[j]));
    }
  }
  return out;
}

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<int>& k) const noexcept {
    std::uint64_t x = 0x9e3779b97f4a7c15ULL;
    for (int v : k) x = splitmix64(x ^ static_cast<std::uint32_t>(v));
    return static_cast<std::size_t>(x);
  }
};

inline std::string values_string(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

/// Throws InvalidArgument with a witness pair when some family member is not
/// increasing over the states. Keys are h (or |h|); all comparable pairs are
/// checked up to `full_limit` distinct keys, covering pairs (one coordinate
/// larger by 2) beyond that.
inline void check_increasing(const std::vector<HeightFunction>& states, const std::vector<MonotoneFunction>& family,
                             const std::vector<std::vector<long long>>& vals, Monotonicity mode,
                             std::size_t full_limit = 2500) {
  std::unordered_map<std::vector<int>, std::size_t, KeyHash> index;
  std::vector<std::vector<int>> keys;
  std::vector<std::size_t> rep;  // a state per key
  for (std::size_t s = 0; s < states.size(); ++s) {
    auto k = states[s].values();
    if (mode == Monotonicity::AbsHeight)
      for (int& x : k) x = std::abs(x);
    auto [it, fresh] = index.emplace(k, keys.size());
    if (fresh) {
      keys.push_back(std::move(k));
      rep.push_back(s);
      continue;
    }
    std::size_t r = rep[it->second];
    for (std::size_t f = 0; f < family.size(); ++f)
      if (vals[f][s] != vals[f][r])
        throw InvalidArgument(family[f].name + " is not a function of |h|: differs between " +
                              values_string(states[r].values()) + " and " + values_string(states[s].values()));
  }
  auto fail = [&](std::size_t f, std::size_t a, std::size_t b) {
    throw InvalidArgument(family[f].name + " is not increasing: " + values_string(states[rep[a]].values()) + " <= " +
                          values_string(states[rep[b]].values()) + " but " + std::to_string(vals[f][rep[a]]) + " > " +
                          std::to_string(vals[f][rep[b]]));
  };
  auto check_pair = [&](std::size_t a, std::size_t b) {
    for (std::size_t f = 0; f < family.size(); ++f)
      if (vals[f][rep[a]] > vals[f][rep[b]]) fail(f, a, b);
  };
  const std::size_t m = keys.size();
  if (m <= full_limit) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        bool leq = true;
        for (std::size_t i = 0; i < keys[a].size() && leq; ++i) leq = keys[a][i] <= keys[b][i];
        if (leq) check_pair(a, b);
      }
    }
    return;
  }
  for (std::size_t a = 0; a < m; ++a) {
    auto k = keys[a];
    for (std::size_t i = 0; i < k.size(); ++i) {
      k[i] += 2;
      if (auto it = index.find(k); it != index.end()) check_pair(a, it->second);
      k[i] -= 2;
    }
  }
}

inline std::vector<std::vector<long long>> evaluate(const std::vector<HeightFunction>& states,
                                                    const std::vector<MonotoneFunction>& family) {
  std::vector<std::vector<long long>> vals(family.size(), std::vector<long long>(states.size()));
  for (std::size_t f = 0; f < family.size(); ++f)
    for (std::size_t s = 0; s < states.size(); ++s) vals[f][s] = family[f].f(states[s]);
  return vals;
}

}  // namespace detail

struct FkgReport {
  struct Entry {
    std::size_t f = 0;
    std::size_t g = 0;
    Rational covariance;
  };
  std::size_t states = 0;
  std::vector<Entry> entries;  // every pair f <= g
  bool passed = true;
  std::optional<Entry> worst;  // smallest covariance
};

/// Exact covariances of every pair of family members under the uniform
/// measure; passes iff all are >= 0. AbsHeight mode needs an |h|-adapted
/// condition and functions of |h|.
inline FkgReport fkg_check_exact(const DomainRef& d, const BoundaryCondition& bc,
                                 const std::vector<MonotoneFunction>& family,
                                 Monotonicity mode = Monotonicity::Height, const ExactLimits& lim = {12}) {
  if (mode == Monotonicity::AbsHeight && !bc.abs_adapted())
    throw InvalidArgument("|h| mode needs an |h|-adapted boundary condition");
  auto states = enumerate(d, bc, lim);
  if (states.empty()) throw InvalidArgument("boundary condition is not admissible");
  auto vals = detail::evaluate(states, family);
  detail::check_increasing(states, family, vals, mode);
  FkgReport r;
  r.states = states.size();
  const BigInt n = states.size();
  std::vector<BigInt> sum(family.size(), 0);
  for (std::size_t f = 0; f < family.size(); ++f)
    for (long long x : vals[f]) sum[f] += x;
  for (std::size_t f = 0; f < family.size(); ++f) {
    for (std::size_t g = f; g < family.size(); ++g) {
      BigInt fg = 0;
      for (std::size_t s = 0; s < states.size(); ++s) fg += BigInt(vals[f][s]) * vals[g][s];
      Rational cov = Rational(fg, n) - Rational(sum[f], n) * Rational(sum[g], n);
      FkgReport::Entry e{f, g, cov};
      if (cov < 0) r.passed = false;
      if (!r.worst || cov < r.worst->covariance) r.worst = e;
      r.entries.push_back(std::move(e));
    }
  }
  return r;
}

struct CbcReport {
  struct Entry {
    std::size_t f = 0;
    Rational low;   // expectation under the lower condition
    Rational high;  // expectation under the higher condition
  };
  std::vector<Entry> entries;
  bool passed = true;
};

namespace detail {

/// [a, b] ends of kappa_v (or of kappa_v intersected with Z_+).
inline std::pair<int, int> interval_ends(const ValueSet& s, bool nonneg_part) {
  if (!nonneg_part) {
    if (!s.is_interval()) throw InvalidArgument("comparison needs interval boundary sets");
    return {s.lo(), s.hi()};
  }
  if (s.is_interval()) return {std::max(s.lo(), 0), s.hi()};
  std::vector<int> nn;
  for (int v : s.values())
    if (v >= 0) nn.push_back(v);
  if (nn.empty()) return {1, 0};
  return {nn.front(), nn.back()};
}

inline void check_cbc_hypotheses(const BoundaryCondition& lo, const BoundaryCondition& hi, Monotonicity mode) {
  bool abs_mode = mode == Monotonicity::AbsHeight;
  if (abs_mode) {
    if (!lo.abs_adapted() || !hi.abs_adapted()) throw InvalidArgument("|h| mode needs |h|-adapted conditions");
    for (auto v : *lo.pos_part())
      if (!hi.in_pos_part(v)) throw InvalidArgument("B_pos of the lower condition must lie in B_pos of the higher one");
  }
  if (lo.entries().size() != hi.entries().size()) throw InvalidArgument("both conditions need the same support");
  for (auto& [v, s] : lo.entries()) {
    const ValueSet* t = hi.find(v);
    if (!t) throw InvalidArgument("both conditions need the same support");
    auto [a, b] = interval_ends(s, abs_mode);
    auto [a2, b2] = interval_ends(*t, abs_mode);
    if (a > a2 || b > b2)
      throw InvalidArgument("interval ends must satisfy a <= a' and b <= b' at (" + std::to_string(v.x) + "," +
                            std::to_string(v.y) + ")");
  }
}

}  // namespace detail

/// Exact expectations of every family member under both conditions; passes
/// iff none decreases from `low` to `high`.
inline CbcReport cbc_check_exact(const DomainRef& d, const BoundaryCondition& low, const BoundaryCondition& high,
                                 const std::vector<MonotoneFunction>& family,
                                 Monotonicity mode = Monotonicity::Height, const ExactLimits& lim = {12}) {
  detail::check_cbc_hypotheses(low, high, mode);
  auto s_low = enumerate(d, low, lim);
  auto s_high = enumerate(d, high, lim);
  if (s_low.empty() || s_high.empty()) throw InvalidArgument("boundary condition is not admissible");
  auto all = s_low;
  all.insert(all.end(), s_high.begin(), s_high.end());
  detail::check_increasing(all, family, detail::evaluate(all, family), mode);
  CbcReport r;
  for (std::size_t f = 0; f < family.size(); ++f) {
    BigInt a = 0, b = 0;
    for (auto& h : s_low) a += family[f].f(h);
    for (auto& h : s_high) b += family[f].f(h);
    CbcReport::Entry e{f, Rational(a, BigInt(s_low.size())), Rational(b, BigInt(s_high.size()))};
    if (e.high < e.low) r.passed = false;
    r.entries.push_back(std::move(e));
  }
  return r;
}

}  // namespace squareice
