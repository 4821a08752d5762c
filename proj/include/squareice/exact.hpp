#pragma once

// Exact oracles on small instances: enumeration, transfer-matrix counting,
// exact event probabilities and exact uniform sampling.

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "squareice/height.hpp"

namespace squareice {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using HomCount = BigInt;

struct ExactLimits {
  int max_free = 30;                   // enumeration cap on free vertices
  std::size_t max_states = 10'000'000;  // transfer-matrix cap on live states
  int extra_range = 0;                 // widen the truncation range (lossless-ness checks)
};

namespace detail {

/// On the torus an empty condition pins the base vertex to 0.
inline BoundaryCondition effective_bc(const Domain& d, const BoundaryCondition& bc) {
  if (d.is_torus() && bc.empty()) return BoundaryCondition::pinned(d.vertex(0), 0);
  return bc;
}

/// Incremental arc consistency after `sets[start]` changed; false on a wipe-out.
inline bool propagate_from(const Domain& d, std::vector<Allowed>& sets, int start) {
  std::deque<int> work;
  std::vector<char> queued(d.size(), 0);
  for (int u : d.neighbours(start)) {
    work.push_back(u);
    queued[static_cast<std::size_t>(u)] = 1;
  }
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    queued[static_cast<std::size_t>(v)] = 0;
    auto& sv = sets[static_cast<std::size_t>(v)];
    bool changed = false;
    for (int u : d.neighbours(v)) changed |= restrict_by_neighbour(sv, sets[static_cast<std::size_t>(u)]);
    if (sv.empty()) return false;
    if (!changed) continue;
    for (int u : d.neighbours(v))
      if (!queued[static_cast<std::size_t>(u)]) {
        queued[static_cast<std::size_t>(u)] = 1;
        work.push_back(u);
      }
  }
  return true;
}

inline int free_vertex_count(const std::vector<Allowed>& sets) {
  int n = 0;
  for (auto& s : sets) n += s.fixed() ? 0 : 1;
  return n;
}

/// Uniform integer in [0, bound) from a 64-bit engine, by masked rejection.
template <class Rng>
BigInt uniform_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw InternalCorruption("uniform_below needs a positive bound");
  std::size_t bits = boost::multiprecision::msb(bound) + 1;
  for (;;) {
    BigInt r = 0;
    std::size_t have = 0;
    while (have < bits) {
      r <<= 64;
      r += static_cast<std::uint64_t>(rng());
      have += 64;
    }
    r >>= (have - bits);
    if (r < bound) return r;
  }
}

/// Index drawn with probability weights[i] / sum(weights).
template <class Rng>
std::size_t sample_weighted(const std::vector<BigInt>& weights, Rng& rng) {
  BigInt total = 0;
  for (auto& w : weights) total += w;
  BigInt r = uniform_below(total, rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  throw InternalCorruption("weighted draw fell off the end");
}

}  // namespace detail

/// Visits every element of Hom(D, B, kappa) once, in lexicographic order of
/// row-major values. Depth-first search with arc-consistency pruning.
template <class F>
void for_each_hom(const DomainRef& d, const BoundaryCondition& bc_in, F&& visit, const ExactLimits& lim = {}) {
  auto bc = detail::effective_bc(*d, bc_in);
  auto root = admissible_sets(*d, bc);
  if (!root) return;
  if (detail::free_vertex_count(*root) > lim.max_free)
    throw TooLarge("enumeration needs " + std::to_string(detail::free_vertex_count(*root)) +
                   " free vertices (cap " + std::to_string(lim.max_free) + "); use MCMC instead");
  const int n = static_cast<int>(d->size());
  HeightFunction h(d, std::vector<int>(static_cast<std::size_t>(n), 0), 0);
  std::function<void(int, std::vector<Allowed>&)> rec = [&](int i, std::vector<Allowed>& sets) {
    while (i < n && sets[static_cast<std::size_t>(i)].fixed()) {
      h.mutable_values()[static_cast<std::size_t>(i)] = sets[static_cast<std::size_t>(i)].values().front();
      ++i;
    }
    if (i == n) {
      visit(static_cast<const HeightFunction&>(h));
      return;
    }
    for (int v : sets[static_cast<std::size_t>(i)].values()) {
      auto child = sets;
      auto& s = child[static_cast<std::size_t>(i)];
      s.listed = false;
      s.list.clear();
      s.lo = s.hi = v;
      if (!detail::propagate_from(*d, child, i)) continue;
      h.mutable_values()[static_cast<std::size_t>(i)] = v;
      rec(i + 1, child);
    }
  };
  rec(0, *root);
}

inline std::vector<HeightFunction> enumerate(const DomainRef& d, const BoundaryCondition& bc, const ExactLimits& lim = {}) {
  std::vector<HeightFunction> out;
  for_each_hom(d, bc, [&](const HeightFunction& h) { out.push_back(h); }, lim);
  return out;
}

inline BigInt enumerate_count(const DomainRef& d, const BoundaryCondition& bc, const ExactLimits& lim = {}) {
  BigInt n = 0;
  for_each_hom(d, bc, [&](const HeightFunction&) { ++n; }, lim);
  return n;
}

/// #{h : event(h)} / #Hom(D, B, kappa), exactly.
template <class Pred>
Rational exact_event_prob(const DomainRef& d, const BoundaryCondition& bc, Pred&& event, const ExactLimits& lim = {}) {
  BigInt hits = 0, total = 0;
  for_each_hom(d, bc, [&](const HeightFunction& h) {
    ++total;
    if (event(h)) ++hits;
  }, lim);
  if (total == 0) throw InvalidArgument("boundary condition is not admissible");
  return Rational(hits, total);
}

// ---------------------------------------------------------------------------
// Transfer matrix

namespace detail {

/// Site-by-site frontier DP over the bounding box in column-major order. The
/// state holds, for every row, the value of the last processed cell of that
/// row (0 = cell absent, else value - offset + 1).
class FrontierDP {
 public:
  using Layer = std::unordered_map<std::string, BigInt>;

  FrontierDP(DomainRef d, const BoundaryCondition& bc, const ExactLimits& lim) : d_(std::move(d)), lim_(lim) {
    if (d_->is_torus()) throw Unsupported("frontier DP handles planar domains only");
    auto sets = admissible_sets(*d_, bc);
    if (!sets) return;
    admissible_ = true;
    int lo = kPosInf, hi = kNegInf;
    for (auto& s : *sets) {
      lo = std::min(lo, s.lo);
      hi = std::max(hi, s.hi);
    }
    if (lim.extra_range > 0) {
      auto raw = resolve(*d_, bc);
      lo -= lim.extra_range;
      hi += lim.extra_range;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        Allowed widened;
        int p = parity(d_->vertex(static_cast<int>(i)));
        widened.lo = parity(lo) == p ? lo : lo + 1;
        widened.hi = parity(hi) == p ? hi : hi - 1;
        if (raw[i].listed) {
          widened = raw[i];
        } else {
          widened.lo = std::max(widened.lo, raw[i].lo);
          widened.hi = std::min(widened.hi, raw[i].hi);
        }
        (*sets)[i] = widened;
      }
    }
    if (hi - lo + 2 > 255) throw Unsupported("height range too wide for the frontier encoding");
    offset_ = lo;
    sets_ = std::move(*sets);
  }

  bool admissible() const { return admissible_; }

  /// Runs the DP. With `keep`, every layer is stored for backward sampling.
  BigInt run(bool keep) {
    if (!admissible_) return 0;
    const int H = d_->height();
    Layer cur;
    cur.emplace(std::string(static_cast<std::size_t>(H), '\0'), BigInt(1));
    if (keep) layers_.push_back(cur);
    for (int x = d_->xmin(); x <= d_->xmax(); ++x) {
      for (int y = d_->ymin(); y <= d_->ymax(); ++y) {
        Layer next;
        const int pos = y - d_->ymin();
        const int cell = d_->index_of({x, y});
        for (auto& [state, count] : cur) {
          if (cell < 0) {
            std::string s = state;
            s[static_cast<std::size_t>(pos)] = '\0';
            next[s] += count;
            continue;
          }
          for_each_value(state, pos, cell, [&](int code) {
            std::string s = state;
            s[static_cast<std::size_t>(pos)] = static_cast<char>(code);
            next[s] += count;
          });
        }
        if (next.size() > lim_.max_states) throw TooLarge("transfer-matrix state count exceeds cap");
        cur = std::move(next);
        if (keep) layers_.push_back(cur);
      }
    }
    BigInt total = 0;
    for (auto& [s, c] : cur) total += c;
    return total;
  }

  template <class Rng>
  HeightFunction sample(Rng& rng) {
    if (layers_.empty()) run(true);
    if (!admissible_) throw InvalidArgument("boundary condition is not admissible");
    std::vector<int> vals(d_->size(), 0);
    const int H = d_->height();
    // final state, drawn proportionally to its count
    std::vector<std::string> keys;
    std::vector<BigInt> weights;
    for (auto& [s, c] : layers_.back()) {
      keys.push_back(s);
      weights.push_back(c);
    }
    sort_together(keys, weights);
    std::string state = keys[sample_weighted(weights, rng)];
    std::size_t k = layers_.size() - 1;
    for (int x = d_->xmax(); x >= d_->xmin(); --x) {
      for (int y = d_->ymax(); y >= d_->ymin(); --y, --k) {
        const int pos = y - d_->ymin();
        const int cell = d_->index_of({x, y});
        if (cell >= 0) vals[static_cast<std::size_t>(cell)] = decode(state[static_cast<std::size_t>(pos)]);
        // predecessors differ only at `pos`
        const Layer& prev = layers_[k - 1];
        keys.clear();
        weights.clear();
        int left = d_->index_of({x - 1, y});
        std::vector<int> codes;
        if (left < 0) {
          codes.push_back(0);
        } else {
          for (int v : sets_[static_cast<std::size_t>(left)].values()) codes.push_back(encode(v));
        }
        for (int code : codes) {
          std::string p = state;
          p[static_cast<std::size_t>(pos)] = static_cast<char>(code);
          auto it = prev.find(p);
          if (it == prev.end()) continue;
          bool ok = false;
          if (cell < 0) {
            ok = state[static_cast<std::size_t>(pos)] == '\0';
          } else {
            for_each_value(p, pos, cell, [&](int c) { ok |= c == static_cast<unsigned char>(state[static_cast<std::size_t>(pos)]); });
          }
          if (!ok) continue;
          keys.push_back(p);
          weights.push_back(it->second);
        }
        if (keys.empty()) throw InternalCorruption("backward sampling found no predecessor");
        state = keys[sample_weighted(weights, rng)];
      }
    }
    (void)H;
    return HeightFunction(d_, std::move(vals));
  }

 private:
  int encode(int v) const { return v - offset_ + 1; }
  int decode(char c) const { return static_cast<unsigned char>(c) + offset_ - 1; }

  template <class F>
  void for_each_value(const std::string& state, int pos, int cell, F&& f) const {
    const auto& allowed = sets_[static_cast<std::size_t>(cell)];
    unsigned char left = static_cast<unsigned char>(state[static_cast<std::size_t>(pos)]);
    unsigned char down = pos > 0 ? static_cast<unsigned char>(state[static_cast<std::size_t>(pos - 1)]) : 0;
    auto try_value = [&](int v) {
      if (!allowed.contains(v)) return;
      if (down && std::abs(decode(static_cast<char>(down)) - v) != 1) return;
      f(encode(v));
    };
    if (left) {
      int lv = decode(static_cast<char>(left));
      try_value(lv - 1);
      try_value(lv + 1);
    } else if (down) {
      int dv = decode(static_cast<char>(down));
      try_value(dv - 1);
      try_value(dv + 1);
    } else {
      for (int v : allowed.values()) try_value(v);
    }
  }

  static void sort_together(std::vector<std::string>& keys, std::vector<BigInt>& w) {
    std::vector<std::size_t> idx(keys.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    std::vector<std::string> k2;
    std::vector<BigInt> w2;
    for (auto i : idx) {
      k2.push_back(keys[i]);
      w2.push_back(w[i]);
    }
    keys = std::move(k2);
    w = std::move(w2);
  }

  DomainRef d_;
  ExactLimits lim_;
  bool admissible_ = false;
  int offset_ = 0;
  std::vector<Allowed> sets_;
  std::vector<Layer> layers_;
};

/// Column transfer on the torus T_n: states are whole columns, counted as
/// closed walks c_0 -> c_1 -> ... -> c_{n-1} -> c_0 with the base pinned.
class TorusTransfer {
 public:
  TorusTransfer(DomainRef d, const BoundaryCondition& bc, const ExactLimits& lim) : d_(std::move(d)), lim_(lim) {
    n_ = *d_->torus_period();
    if (n_ > 10) throw TooLarge("torus transfer supports n <= 10");
    auto sets = admissible_sets(*d_, effective_bc(*d_, bc));
    if (!sets) return;
    sets_ = std::move(*sets);
    admissible_ = true;
    // per column, every cyclic +-1 column respecting the allowed sets
    columns_.resize(static_cast<std::size_t>(n_));
    for (int x = 0; x < n_; ++x) {
      std::vector<int> col(static_cast<std::size_t>(n_));
      const auto& first = allowed(x, 0);
      for (int v0 : first.values()) {
        col[0] = v0;
        for (std::uint32_t mask = 0; mask < (1u << (n_ - 1)); ++mask) {
          bool ok = true;
          for (int y = 1; y < n_ && ok; ++y) {
            col[static_cast<std::size_t>(y)] = col[static_cast<std::size_t>(y - 1)] + (((mask >> (y - 1)) & 1u) ? 1 : -1);
            ok = allowed(x, y).contains(col[static_cast<std::size_t>(y)]);
          }
          if (ok && std::abs(col.back() - col.front()) == 1) columns_[static_cast<std::size_t>(x)].push_back(col);
        }
      }
      if (columns_[static_cast<std::size_t>(x)].size() > lim_.max_states) throw TooLarge("torus column states exceed cap");
      std::sort(columns_[static_cast<std::size_t>(x)].begin(), columns_[static_cast<std::size_t>(x)].end());
    }
  }

  bool admissible() const { return admissible_; }

  BigInt count() {
    if (!admissible_) return 0;
    BigInt total = 0;
    for (std::size_t c0 = 0; c0 < columns_[0].size(); ++c0) total += closing_counts(c0)[0][c0];
    return total;
  }

  template <class Rng>
  HeightFunction sample(Rng& rng) {
    if (!admissible_) throw InvalidArgument("boundary condition is not admissible");
    std::vector<BigInt> w;
    std::vector<std::vector<std::vector<BigInt>>> back;
    for (std::size_t c0 = 0; c0 < columns_[0].size(); ++c0) {
      back.push_back(closing_counts(c0));
      w.push_back(back.back()[0][c0]);
    }
    std::size_t c0 = sample_weighted(w, rng);
    const auto& B = back[c0];
    std::vector<int> vals(d_->size());
    std::size_t cur = c0;
    for (int x = 0; x < n_; ++x) {
      const auto& col = columns_[static_cast<std::size_t>(x)][cur];
      for (int y = 0; y < n_; ++y) vals[static_cast<std::size_t>(d_->index_of({x, y}))] = col[static_cast<std::size_t>(y)];
      if (x == n_ - 1) break;
      std::vector<BigInt> ww;
      std::vector<std::size_t> cand;
      const auto& nextcols = columns_[static_cast<std::size_t>(x + 1)];
      for (std::size_t j = 0; j < nextcols.size(); ++j) {
        if (!compatible(col, nextcols[j]) || B[static_cast<std::size_t>(x + 1)][j] == 0) continue;
        cand.push_back(j);
        ww.push_back(B[static_cast<std::size_t>(x + 1)][j]);
      }
      cur = cand[sample_weighted(ww, rng)];
    }
    return HeightFunction(d_, std::move(vals));
  }

 private:
  const Allowed& allowed(int x, int y) const { return sets_[static_cast<std::size_t>(d_->index_of({x, y}))]; }

  static bool compatible(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) != 1) return false;
    return true;
  }

  /// B[x][j] = number of ways to fill columns x..n-1 starting from state j at
  /// column x and closing onto column-0 state c0.
  std::vector<std::vector<BigInt>> closing_counts(std::size_t c0) const {
    std::vector<std::vector<BigInt>> B(static_cast<std::size_t>(n_));
    const auto& start = columns_[0][c0];
    for (int x = n_ - 1; x >= 0; --x) {
      const auto& cols = columns_[static_cast<std::size_t>(x)];
      auto& bx = B[static_cast<std::size_t>(x)];
      bx.assign(cols.size(), 0);
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (x == 0 && j != c0) continue;
        if (x == n_ - 1) {
          bx[j] = compatible(cols[j], start) ? 1 : 0;
          continue;
        }
        const auto& nextcols = columns_[static_cast<std::size_t>(x + 1)];
        for (std::size_t k = 0; k < nextcols.size(); ++k)
          if (B[static_cast<std::size_t>(x + 1)][k] != 0 && compatible(cols[j], nextcols[k]))
            bx[j] += B[static_cast<std::size_t>(x + 1)][k];
      }
    }
    return B;
  }

  DomainRef d_;
  ExactLimits lim_;
  int n_ = 0;
  bool admissible_ = false;
  std::vector<Allowed> sets_;
  std::vector<std::vector<std::vector<int>>> columns_;
};

}  // namespace detail

/// #Hom(D, B, kappa) by transfer matrix. Planar domains of any shape within
/// the caps, or tori (counted with the base vertex pinned).
inline HomCount transfer_count(const DomainRef& d, const BoundaryCondition& bc, const ExactLimits& lim = {}) {
  if (d->is_torus()) return detail::TorusTransfer(d, bc, lim).count();
  return detail::FrontierDP(d, bc, lim).run(false);
}

/// A uniform element of Hom(D, B, kappa), by backward sampling through the
/// transfer-matrix tables.
template <class Rng>
HeightFunction exact_sample(const DomainRef& d, const BoundaryCondition& bc, Rng& rng, const ExactLimits& lim = {}) {
  if (d->is_torus()) return detail::TorusTransfer(d, bc, lim).sample(rng);
  detail::FrontierDP dp(d, bc, lim);
  dp.run(true);
  return dp.sample(rng);
}

/// Reusable sampler: builds the tables once.
class ExactSampler {
 public:
  ExactSampler(DomainRef d, const BoundaryCondition& bc, const ExactLimits& lim = {}) {
    if (d->is_torus()) {
      torus_ = std::make_unique<detail::TorusTransfer>(d, bc, lim);
    } else {
      planar_ = std::make_unique<detail::FrontierDP>(d, bc, lim);
      planar_->run(true);
    }
  }
  template <class Rng>
  HeightFunction operator()(Rng& rng) {
    return torus_ ? torus_->sample(rng) : planar_->sample(rng);
  }

 private:
  std::unique_ptr<detail::FrontierDP> planar_;
  std::unique_ptr<detail::TorusTransfer> torus_;
};

}  // namespace squareice
