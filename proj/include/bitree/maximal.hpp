#pragma once

// The mu-maximal operator on the bi-tree, the extremal weight that turns a
// maximal-function bound into an embedding with Carleson constant 1, and the
// flow-based sparse selection for the union-Carleson condition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <type_traits>
#include <vector>

#include "bitree/error.hpp"
#include "bitree/fields.hpp"
#include "bitree/hardy.hpp"
#include "bitree/topology.hpp"

namespace bitree {

/// <psi>(a) = I*(psi mu)(a) / I*mu(a), 0 where I*mu vanishes.
template <class T>
std::vector<T> mu_averages(const BiTreeTopology& topo, const std::vector<T>& mu,
                           const std::vector<T>& psi) {
  std::vector<T> num(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) num[i] = (psi[i] < 0 ? T(-psi[i]) : psi[i]) * mu[i];
  num = hardy_adjoint(topo, num);
  const auto den = hardy_adjoint(topo, mu);
  for (std::size_t i = 0; i < num.size(); ++i) num[i] = den[i] > 0 ? T(num[i] / den[i]) : T(0);
  return num;
}

/// M psi(w) = max over a >= w of <|psi|>(a); a max-sweep along x-parents, then y-parents.
template <class T>
std::vector<T> maximal_function(const BiTreeTopology& topo, const std::vector<T>& mu,
                                const std::vector<T>& psi) {
  std::vector<T> out = mu_averages(topo, mu, psi);
  const std::size_t nx = topo.tree_x().size();
  const std::size_t ny = topo.tree_y().size();
  for (std::size_t x = 1; x < nx; ++x) {
    const std::size_t p = TreeTopology::parent(x);
    for (std::size_t y = 0; y < ny; ++y) {
      if (out[p * ny + y] > out[x * ny + y]) out[x * ny + y] = out[p * ny + y];
    }
  }
  for (std::size_t x = 0; x < nx; ++x) {
    T* row = out.data() + x * ny;
    for (std::size_t y = 1; y < ny; ++y) {
      if (row[TreeTopology::parent(y)] > row[y]) row[y] = row[TreeTopology::parent(y)];
    }
  }
  return out;
}

/// sum psi^2 mu.
template <class T>
T l2_norm_sq(const std::vector<T>& mu, const std::vector<T>& psi) {
  T s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += psi[i] * psi[i] * mu[i];
  return s;
}

template <class T>
struct ExtremalWeight {
  std::vector<T> w;
  std::vector<T> maximal;       // M psi
  std::vector<std::size_t> owner;  // owner[b] = a with b in A(a), or npos
  T maximal_norm_sq = 0;        // sum (M psi)^2 mu
  T embedding_sum = 0;          // sum w (I*(psi mu))^2
};

inline constexpr std::size_t kNoOwner = static_cast<std::size_t>(-1);

/// A(a) is assigned greedily in `order` (heap order when empty): each b with
/// mu(b) > 0 joins the first a >= b in the order with I*(psi mu)(a) != 0 and
/// <psi>(a) = M psi(b). Then w(a) = mu(A(a)) / (I*mu(a))^2.
/// Throws InvariantError if sum (M psi)^2 mu != sum w (I*(psi mu))^2 (exactly
/// for Rational, to 1e-10 relative for double).
template <class T>
ExtremalWeight<T> extremal_weight(const BiTreeTopology& topo, const std::vector<T>& mu,
                                  const std::vector<T>& psi,
                                  const std::vector<std::size_t>& order = {}) {
  T norm = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (psi[i] < 0) throw PreconditionError("extremal_weight requires psi >= 0");
    norm += psi[i] * psi[i] * mu[i];
  }
  if (!(norm > 0)) throw PreconditionError("extremal_weight requires psi nonzero in L2(mu)");

  std::vector<std::size_t> rank(topo.size());
  if (order.empty()) {
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  } else {
    if (order.size() != topo.size()) throw PreconditionError("order must be a permutation of the nodes");
    for (std::size_t j = 0; j < order.size(); ++j) rank[order[j]] = j;
  }

  const auto avg = mu_averages(topo, mu, psi);
  const auto imu = hardy_adjoint(topo, mu);
  const auto ipsi = hardy_adjoint(topo, pointwise_product(psi, mu));

  ExtremalWeight<T> r;
  r.maximal = maximal_function(topo, mu, psi);
  r.w.assign(topo.size(), T(0));
  r.owner.assign(topo.size(), kNoOwner);
  std::vector<T> claimed(topo.size(), T(0));
  for (std::size_t b = 0; b < topo.size(); ++b) {
    if (!(mu[b] > 0)) continue;
    std::size_t best = kNoOwner;
    for (auto a : topo.ancestors(b)) {
      if (ipsi[a] == 0 || avg[a] != r.maximal[b]) continue;
      if (best == kNoOwner || rank[a] < rank[best]) best = a;
    }
    if (best == kNoOwner) continue;  // M psi(b) = 0
    r.owner[b] = best;
    claimed[best] += mu[b];
  }
  for (std::size_t a = 0; a < topo.size(); ++a) {
    if (claimed[a] > 0) r.w[a] = claimed[a] / (imu[a] * imu[a]);
  }
  for (std::size_t i = 0; i < topo.size(); ++i) {
    r.maximal_norm_sq += r.maximal[i] * r.maximal[i] * mu[i];
    r.embedding_sum += r.w[i] * ipsi[i] * ipsi[i];
  }
  bool ok;
  if constexpr (std::is_same_v<T, double>) {
    ok = std::abs(r.maximal_norm_sq - r.embedding_sum) <= 1e-10 * std::max(1.0, r.maximal_norm_sq);
  } else {
    ok = r.maximal_norm_sq == r.embedding_sum;
  }
  if (!ok) throw InvariantError("extremal_weight: maximal norm and embedding sum differ");
  return r;
}

/// The chain sum w (I*(phi mu))^2 <= sum w (I*mu)^2 (M phi)^2 <= C sum (M phi)^2 mu,
/// the middle term being the layer-cake integral over the down-sets {M phi > s}.
struct LayerCake {
  double embedding = 0.0;
  double layer_cake = 0.0;
  double maximal_norm_sq = 0.0;
};

LayerCake layer_cake(const BiTreeTopology& topo, const MassFunction& mu, const WeightFunction& w,
                     const std::vector<double>& phi);

/// True when {f > s} is a down-set for every s, i.e. f(b) >= f(a) whenever b <= a.
bool superlevel_sets_are_downsets(const BiTreeTopology& topo, const std::vector<double>& f);

struct ProbeSample {
  double maximal_ratio = 0.0;  // ||M psi||^2 / ||psi||^2
  double embedding = 0.0;      // CE of the extremal weight of psi
  double carleson = 0.0;       // its Carleson constant (<= 1)
  double upper_proxy = 0.0;    // C * ||M phi||^2 / ||phi||^2 at the top eigenvector phi
};

struct ProbeResult {
  double embedding_estimate = 0.0;  // max CE over certified extremal weights
  double maximal_estimate = 0.0;    // max ||M psi||^2 / ||psi||^2
  double upper_proxy = 0.0;
  double gap = 0.0;                 // embedding_estimate - maximal_estimate
  int certified = 0;
  std::vector<ProbeSample> samples;
};

/// Random nonnegative test functions (point masses, heavy-tailed values,
/// dyadic power singularities) with a fixed seed. Samples are drawn up front
/// and evaluated on `jobs` threads, so the result does not depend on `jobs`.
ProbeResult maximal_equivalence_probe(const BiTreeTopology& topo, const MassFunction& mu,
                                      int sample_count, std::uint64_t seed = 0, int jobs = 1);

/// Mass moved from boundary node omega into the set E_Q of member Q.
template <class T>
struct SelectionEntry {
  std::size_t omega = 0;
  std::size_t member = 0;  // node index of Q
  T mass = 0;
};

template <class T>
struct SparseSelection {
  bool feasible = false;
  T demand = 0;  // sum w(Q) mu(Q)^2
  T flow = 0;
  std::vector<SelectionEntry<T>> assignment;
  std::vector<T> totals;  // mu(E_Q), parallel to the collection
  /// When infeasible: members on the source side of the minimum cut. Their
  /// union Omega has sum_{Q in it} w(Q) mu(Q)^2 > mu(Omega).
  std::vector<std::size_t> violating_members;
  std::optional<DownSet> violating_union;
  T violating_demand = 0;
  T violating_mass = 0;
};

/// Fractional disjoint E_Q inside Q with mu(E_Q) >= w(Q) mu(Q)^2 via max-flow;
/// mu must be boundary-supported. Double mode treats a flow within 1e-12
/// (relative) of the demand as saturating.
template <class T>
SparseSelection<T> sparse_selection(const BiTreeTopology& topo, const std::vector<std::size_t>& collection,
                                    const std::vector<T>& w, const std::vector<T>& mu);

extern template SparseSelection<double> sparse_selection(const BiTreeTopology&, const std::vector<std::size_t>&,
                                                         const std::vector<double>&, const std::vector<double>&);
extern template SparseSelection<Rational> sparse_selection(const BiTreeTopology&,
                                                           const std::vector<std::size_t>&,
                                                           const std::vector<Rational>&,
                                                           const std::vector<Rational>&);

}  // namespace bitree
