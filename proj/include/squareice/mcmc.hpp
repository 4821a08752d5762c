#pragma once

// Heat-bath single-site dynamics for uniform homomorphisms, on planar domains
// and on the torus.

#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <string_view>
#include <vector>

#include "squareice/exact.hpp"
#include "squareice/height.hpp"

namespace squareice {

using Rng = std::mt19937_64;

enum class ScanOrder { Raster, Random };

struct ChainConfig {
  long sweeps = 1000;
  long burn_in = 100;
  long thin = 1;
  std::uint64_t seed = 0;
  std::uint64_t chain_index = 0;
  ScanOrder scan = ScanOrder::Raster;
  bool check_every_sweep = false;  // validate the state after each sweep

  void validate() const {
    if (burn_in < 0) throw InvalidArgument("burn_in must be nonnegative");
    if (sweeps <= burn_in) throw InvalidArgument("sweeps must exceed burn_in");
    if (thin < 1) throw InvalidArgument("thin must be at least 1");
  }
  long retained() const { return (sweeps - burn_in) / thin; }
};

/// burn_in = 20 n^2, thin = n^2 and 100 retained samples, for a domain of size n.
inline ChainConfig default_chain_config(long n, std::uint64_t seed = 0) {
  ChainConfig c;
  c.burn_in = 20 * n * n;
  c.thin = n * n;
  c.sweeps = c.burn_in + 100 * c.thin;
  c.seed = seed;
  return c;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// splitmix64(splitmix64(splitmix64(master) ^ chain_index) + fnv1a(tag)).
/// Injective in chain_index for a fixed master seed and tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t chain_index, std::string_view tag) {
  std::uint64_t x = detail::splitmix64(master);
  x = detail::splitmix64(x ^ chain_index);
  return detail::splitmix64(x + detail::fnv1a(tag));
}

namespace detail {

/// Values allowed by the neighbours and by kappa_v. Absent neighbours impose nothing.
inline std::vector<int> heat_bath_choices(std::span<const int> nbr_values, const Allowed& kappa) {
  std::vector<int> out;
  if (nbr_values.empty()) {
    if (!kappa.bounded()) throw InvalidArgument("isolated vertex with an unbounded set");
    return kappa.values();
  }
  for (int c : {nbr_values[0] - 1, nbr_values[0] + 1}) {
    bool ok = kappa.contains(c);
    for (int u : nbr_values) ok = ok && std::abs(u - c) == 1;
    if (ok) out.push_back(c);
  }
  return out;
}

template <class R>
int pick(const std::vector<int>& s, R& rng) {
  if (s.empty()) throw InternalCorruption("heat-bath set is empty: the state is invalid");
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[rng() & 1U];
  return s[std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng)];
}

}  // namespace detail

/// Resamples h_v uniformly from S(v) = the values within 1 of every neighbour
/// (and in kappa_v when a boundary condition is given).
template <class R>
HeightFunction heat_bath_step(const HeightFunction& h, Vertex v, R& rng, const BoundaryCondition* bc = nullptr) {
  const auto& d = h.domain();
  int i = d.index_of(v);
  if (i < 0) throw InvalidArgument("vertex outside the domain");
  Allowed kappa = detail::allowed_from(ValueSet::all(), parity(d.vertex(i)));
  if (bc) {
    if (const ValueSet* s = bc->find(d.vertex(i))) {
      kappa = detail::allowed_from(*s, parity(d.vertex(i)));
      if (kappa.fixed()) throw InvalidArgument("vertex is fixed by the boundary condition");
    }
  }
  std::vector<int> nb;
  for (int u : d.neighbours(i)) nb.push_back(h[u]);
  HeightFunction out = h;
  out.mutable_values()[static_cast<std::size_t>(i)] = detail::pick(detail::heat_bath_choices(nb, kappa), rng);
  return out;
}

/// max(min_h, min(max_h, parity)): a valid starting point close to flat.
inline HeightFunction median_height(DomainRef d, const BoundaryCondition& bc) {
  auto lo = minimal_height(d, bc);
  auto hi = maximal_height(d, bc);
  std::vector<int> v(d->size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::max(lo.values()[i], std::min(hi.values()[i], parity(d->vertex(static_cast<int>(i)))));
  HeightFunction h(d, std::move(v));
  if (!validate(h) || !satisfies(h, bc)) return lo;
  return h;
}

/// One Markov chain. Sites are stored by sublattice in padded rows so that
/// the update of all unconstrained interior sites of one parity is a
/// branch-free loop; the remaining free sites are updated one at a time.
///
/// A raster sweep updates, in order: interior even sites (row by row), other
/// free even sites, interior odd sites, other free odd sites.
class Chain {
 public:
  Chain(const HeightFunction& init, const BoundaryCondition& bc, const ChainConfig& cfg)
      : domain_(init.domain_ref()), rng_(derive_seed(cfg.seed, cfg.chain_index, "chain")), cfg_(cfg) {
    if (!validate(init) || !satisfies(init, bc)) throw InvalidArgument("initial state is not in Hom(D, B, kappa)");
    const auto& d = *domain_;
    for (int x : init.values())
      if (std::abs(x) > 30000) throw Unsupported("heights beyond the 16-bit range");
    W_ = d.width() + 2;
    if (W_ % 2) ++W_;
    H_ = d.height() + 2;
    K_ = W_ / 2;
    R_ = K_ + 2;
    for (int s = 0; s < 2; ++s) {
      buf_[s].assign(static_cast<std::size_t>(H_ * R_), 0);
      mask_[s].assign(static_cast<std::size_t>(H_ * R_), 0);
      row_lo_[s].assign(static_cast<std::size_t>(H_), K_);
      row_hi_[s].assign(static_cast<std::size_t>(H_), -1);
    }
    rbits_.assign(static_cast<std::size_t>(R_ + 8), 0);
    const int n = static_cast<int>(d.size());
    pos_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Vertex v = d.vertex(i);
      pos_[static_cast<std::size_t>(i)] = position(v);
      slot(i) = static_cast<std::int16_t>(init[i]);
    }
    base_ = init.base();
    int base = d.is_torus() ? base_ : -1;
    for (int i = 0; i < n; ++i) {
      Vertex v = d.vertex(i);
      Allowed kappa = detail::allowed_from(ValueSet::all(), parity(v));
      bool constrained = false;
      if (const ValueSet* s = bc.find(v)) {
        kappa = detail::allowed_from(*s, parity(v));
        constrained = true;
      }
      if (i == base || kappa.fixed()) continue;
      bool interior = true;
      if (!d.is_torus())
        for (auto st : kNearestSteps) interior = interior && d.contains(v + st);
      int s = parity(v);
      if (interior && !constrained) {
        auto [Y, k] = row_col(v);
        mask_[s][static_cast<std::size_t>(Y * R_ + k + 1)] = -1;
        row_lo_[s][static_cast<std::size_t>(Y)] = std::min(row_lo_[s][static_cast<std::size_t>(Y)], k);
        row_hi_[s][static_cast<std::size_t>(Y)] = std::max(row_hi_[s][static_cast<std::size_t>(Y)], k);
        free_.push_back({i, {}, kappa});
      } else {
        Slow sl{i, {}, kappa};
        for (int u : d.neighbours(i)) sl.nbrs.push_back(u);
        slow_[s].push_back(sl);
        free_.push_back(sl);
      }
    }
    for (auto& f : free_)
      if (f.nbrs.empty())
        for (int u : d.neighbours(f.vertex)) f.nbrs.push_back(u);
    if (d.is_torus()) build_ghosts();
    static const auto table = [] {
      std::array<std::array<std::int16_t, 8>, 256> t{};
      for (int b = 0; b < 256; ++b)
        for (int j = 0; j < 8; ++j) t[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)] = static_cast<std::int16_t>((b >> j) & 1);
      return t;
    }();
    bit_table_ = &table;
    for (int s = 0; s < 2; ++s) refresh_ghosts(s);
  }

  const Domain& domain() const { return *domain_; }
  const DomainRef& domain_ref() const { return domain_; }
  long sweeps_done() const { return sweeps_; }
  std::size_t free_sites() const { return free_.size(); }

  int base_index() const { return base_; }
  int value(int i) const { return slot_value(i); }
  int value_at(Vertex v) const {
    int i = domain_->index_of(v);
    if (i < 0) throw InvalidArgument("vertex outside domain");
    return slot_value(i);
  }

  HeightFunction snapshot() const {
    std::vector<int> v(domain_->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = slot_value(static_cast<int>(i));
    return HeightFunction(domain_, std::move(v), base_index());
  }

  void sweep() {
    if (cfg_.scan == ScanOrder::Random) {
      random_sweep();
    } else {
      for (int s = 0; s < 2; ++s) {
        fast_half(s);
        refresh_ghosts(s);
        for (const auto& sl : slow_[s]) update_slow(sl);
        refresh_ghosts(s);
      }
    }
    ++sweeps_;
    if (cfg_.check_every_sweep && !validate(snapshot())) throw InternalCorruption("chain left the state space");
  }

 private:
  struct Slow {
    int vertex;
    std::vector<int> nbrs;
    Allowed kappa;
  };

  std::pair<int, int> row_col(Vertex v) const {
    int X = v.x - domain_->xmin() + 1;
    int Y = v.y - domain_->ymin() + 1;
    return {Y, X / 2};
  }
  int position(Vertex v) const {
    auto [Y, k] = row_col(v);
    return parity(v) * (H_ * R_) + Y * R_ + k + 1;
  }
  std::int16_t& slot(int i) {
    int p = pos_[static_cast<std::size_t>(i)];
    int s = p / (H_ * R_);
    return buf_[s][static_cast<std::size_t>(p - s * H_ * R_)];
  }
  int slot_value(int i) const {
    int p = pos_[static_cast<std::size_t>(i)];
    int s = p / (H_ * R_);
    return buf_[s][static_cast<std::size_t>(p - s * H_ * R_)];
  }
  // first padded column of sublattice s in row Y
  int offset(int s, int Y) const {
    int x = -domain_->xmin() + 1;  // X - x
    int y = -domain_->ymin() + 1;
    // parity(X - x + Y - y) == s  <=>  X == s + x + y - Y (mod 2)
    return ((s + x + y - Y) % 2 + 2) % 2;
  }

  void fill_bits(int count) {
    const auto& table = *bit_table_;
    for (int k = 0; k < count; k += 64) {
      std::uint64_t w = rng_();
      for (int b = 0; b < 8 && k + 8 * b < count; ++b)
        std::memcpy(&rbits_[static_cast<std::size_t>(k + 8 * b)], table[(w >> (8 * b)) & 0xff].data(), 16);
    }
  }

  void fast_half(int s) {
    std::int16_t* T = buf_[s].data();
    const std::int16_t* S = buf_[1 - s].data();
    const std::int16_t* M = mask_[s].data();
    for (int Y = 1; Y + 1 < H_; ++Y) {
      int lo = row_lo_[s][static_cast<std::size_t>(Y)], hi = row_hi_[s][static_cast<std::size_t>(Y)];
      if (hi < lo) continue;
      const int len = hi - lo + 1;
      fill_bits(len);
      const int a = offset(s, Y) - 1;
      std::int16_t* __restrict t = T + Y * R_ + 1 + lo;
      const std::int16_t* __restrict l = S + Y * R_ + 1 + lo + a;
      const std::int16_t* __restrict r = l + 1;
      const std::int16_t* __restrict u = S + (Y + 1) * R_ + 1 + lo;
      const std::int16_t* __restrict dn = S + (Y - 1) * R_ + 1 + lo;
      const std::int16_t* __restrict m = M + Y * R_ + 1 + lo;
      const std::int16_t* __restrict b = rbits_.data();
      for (int k = 0; k < len; ++k) {
        std::int16_t mn = std::min(std::min(l[k], r[k]), std::min(u[k], dn[k]));
        std::int16_t mx = std::max(std::max(l[k], r[k]), std::max(u[k], dn[k]));
        std::int16_t down = static_cast<std::int16_t>((mn == mx) & (b[k] ^ 1));
        std::int16_t nv = static_cast<std::int16_t>(mn + 1 - 2 * down);
        t[k] = static_cast<std::int16_t>((nv & m[k]) | (t[k] & ~m[k]));
      }
    }
  }

  template <class S>
  void update_slow(const S& sl) {
    std::array<int, 4> nb{};
    int cnt = 0;
    for (int u : sl.nbrs) nb[static_cast<std::size_t>(cnt++)] = slot_value(u);
    auto choices = detail::heat_bath_choices(std::span<const int>(nb.data(), static_cast<std::size_t>(cnt)), sl.kappa);
    slot(sl.vertex) = static_cast<std::int16_t>(detail::pick(choices, rng_));
  }

  void random_sweep() {
    if (free_.empty()) return;
    std::uniform_int_distribution<std::size_t> pick_site(0, free_.size() - 1);
    for (std::size_t t = 0; t < free_.size(); ++t) {
      const auto& f = free_[pick_site(rng_)];
      update_slow(f);
      int s = parity(domain_->vertex(f.vertex));
      if (!ghosts_[s].empty()) refresh_ghosts(s);
    }
  }

  // torus: padded copies of the wrapped neighbours
  void build_ghosts() {
    const int n = *domain_->torus_period();
    for (int Y = 0; Y < H_; ++Y) {
      for (int X = 0; X < W_; ++X) {
        bool inside = X >= 1 && X <= n && Y >= 1 && Y <= n;
        if (inside) continue;
        Vertex v{X - 1, Y - 1};
        Vertex w = domain_->wrap(v);
        int src = pos_[static_cast<std::size_t>(domain_->index_of(w))];
        int s = parity(w);
        // parity is preserved by wrapping since n is even
        int dst = s * (H_ * R_) + Y * R_ + X / 2 + 1;
        ghosts_[s].push_back({dst - s * H_ * R_, src - s * H_ * R_});
      }
    }
  }
  void refresh_ghosts(int s) {
    auto& b = buf_[s];
    for (auto [dst, src] : ghosts_[s]) b[static_cast<std::size_t>(dst)] = b[static_cast<std::size_t>(src)];
  }

  DomainRef domain_;
  Rng rng_;
  ChainConfig cfg_;
  int W_ = 0, H_ = 0, K_ = 0, R_ = 0;
  std::array<std::vector<std::int16_t>, 2> buf_, mask_;
  std::array<std::vector<int>, 2> row_lo_, row_hi_;
  std::array<std::vector<Slow>, 2> slow_;
  std::vector<Slow> free_;
  std::array<std::vector<std::pair<int, int>>, 2> ghosts_;
  std::vector<int> pos_;
  std::vector<std::int16_t> rbits_;
  const std::array<std::array<std::int16_t, 8>, 256>* bit_table_ = nullptr;
  long sweeps_ = 0;
  int base_ = 0;
};

/// Runs cfg.sweeps sweeps from `init`, calling visit(h, index) on every
/// thin-th state after the first burn_in sweeps.
template <class Visit>
void run_chain(const HeightFunction& init, const BoundaryCondition& bc, const ChainConfig& cfg, Visit&& visit) {
  cfg.validate();
  Chain chain(init, bc, cfg);
  long kept = 0;
  for (long s = 1; s <= cfg.sweeps; ++s) {
    chain.sweep();
    if (s > cfg.burn_in && (s - cfg.burn_in) % cfg.thin == 0) visit(chain.snapshot(), kept++);
  }
}

template <class Visit>
void run_chain(const DomainRef& d, const BoundaryCondition& bc, const HeightFunction& init, const ChainConfig& cfg,
               Visit&& visit) {
  if (init.domain_ref() != d && !(init.domain() == *d)) throw InvalidArgument("initial state lives on another domain");
  run_chain(init, bc, cfg, std::forward<Visit>(visit));
}

inline std::vector<HeightFunction> collect_chain(const HeightFunction& init, const BoundaryCondition& bc,
                                                 const ChainConfig& cfg) {
  std::vector<HeightFunction> out;
  run_chain(init, bc, cfg, [&](const HeightFunction& h, long) { out.push_back(h); });
  return out;
}

/// Whether the single-site move graph on the enumerated state space is
/// connected, with the number of states. Moves change one free value by 2.
inline std::pair<bool, std::size_t> transition_graph_connected(const DomainRef& d, const BoundaryCondition& bc,
                                                               const ExactLimits& lim = {}) {
  auto eff = detail::effective_bc(*d, bc);
  auto states = enumerate(d, eff, lim);
  if (states.empty()) return {true, 0};
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i].values(), static_cast<int>(i));
  auto sets = resolve(*d, eff);
  std::vector<int> comp(states.size(), -1);
  std::vector<int> stack{0};
  comp[0] = 0;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int a = stack.back();
    stack.pop_back();
    auto vals = states[static_cast<std::size_t>(a)].values();
    for (int v = 0; v < static_cast<int>(d->size()); ++v) {
      if (sets[static_cast<std::size_t>(v)].fixed()) continue;
      int old = vals[static_cast<std::size_t>(v)];
      for (int c : {old - 2, old + 2}) {
        if (!sets[static_cast<std::size_t>(v)].contains(c)) continue;
        bool ok = true;
        for (int u : d->neighbours(v)) ok = ok && std::abs(vals[static_cast<std::size_t>(u)] - c) == 1;
        if (!ok) continue;
        vals[static_cast<std::size_t>(v)] = c;
        auto it = index.find(vals);
        vals[static_cast<std::size_t>(v)] = old;
        if (it == index.end()) throw InternalCorruption("move left the enumerated state space");
        if (comp[static_cast<std::size_t>(it->second)] < 0) {
          comp[static_cast<std::size_t>(it->second)] = 0;
          ++reached;
          stack.push_back(it->second);
        }
      }
    }
  }
  return {reached == states.size(), states.size()};
}

}  // namespace squareice
