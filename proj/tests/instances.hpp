#pragma once

// Random admissible inputs for the majorant, balance and dichotomy lemmas,
// shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bitree/fields.hpp"
#include "bitree/hardy.hpp"
#include "bitree/random.hpp"

namespace instances {

using namespace bitree;

inline std::vector<double> random_nonneg(std::size_t n, Rng& rng, double zero_prob = 0.3) {
  std::bernoulli_distribution zero(zero_prob);
  std::uniform_int_distribution<int> k(1, 16);
  std::vector<double> v(n);
  for (auto& x : v) x = zero(rng) ? 0.0 : k(rng) / 8.0;
  return v;
}

struct TreeInstance {
  std::vector<double> g, f, w;
  double lambda, delta;
};

// g = I* nu is superadditive; delta splits the range of I(wg) so that
// U = {I(wg) <= delta} is a nonempty proper up-set; f lives on U.
inline TreeInstance random_tree_instance(const TreeTopology& t, Rng& rng) {
  TreeInstance in;
  in.g = tree_hardy_adjoint(t, random_nonneg(t.size(), rng));
  in.w = random_nonneg(t.size(), rng, 0.2);
  std::vector<double> wg(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) wg[i] = in.w[i] * in.g[i];
  const auto ig = tree_hardy_forward(t, wg);
  const double top = *std::max_element(ig.begin(), ig.end());
  std::uniform_int_distribution<int> pick(1, 63);
  // Dyadic delta keeps rational replays exact.
  in.delta = std::max(top, 1.0) * pick(rng) / 256.0;
  in.f = random_nonneg(t.size(), rng);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (ig[i] > in.delta) in.f[i] = 0.0;
  }
  std::uniform_int_distribution<int> mult(16, 64);
  in.lambda = in.delta * mult(rng) / 4.0;
  return in;
}


struct BiInstance {
  std::vector<double> m;
  WeightFunction w;
  double lambda, delta;
};

// m = I* mu on E_delta, the superadditive function of the truncated-energy lemma.
inline BiInstance random_bitree_instance(const BiTreeTopology& t, Rng& rng) {
  BiInstance in;
  const auto mu = random_mass(t, rng, {.boundary_only = false, .density = 0.5});
  in.w = random_product_weight(t, rng);
  const auto v = potential(t, mu.values(), in.w.values());
  const double top = *std::max_element(v.begin(), v.end());
  std::uniform_int_distribution<int> pick(1, 63);
  in.delta = std::max(top, 1.0) * pick(rng) / 64.0;
  const auto adj = hardy_adjoint(t, mu.values());
  in.m.assign(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (v[i] <= in.delta) in.m[i] = adj[i];
  }
  const auto iwm = hardy_forward(t, pointwise_product(in.w.values(), in.m));
  const double top_m = *std::max_element(iwm.begin(), iwm.end());
  // Put the band {lambda < I(wm) <= 2 lambda} somewhere inside the range when possible.
  std::uniform_int_distribution<int> frac(8, 64);
  in.lambda = std::max(4.0 * in.delta, top_m * frac(rng) / 128.0);
  return in;
}

// Point masses on an antichain at generations (i, N - i), w = 2^{k gx} 2^{k gy}:
// every antichain node sees about delta, a deep node below all of them about
// (N + 1) delta, which populates the band {lambda < I(wm) <= 2 lambda} at lambda >= 4 delta.
inline BiInstance antichain_instance(int depth, Rng& rng) {
  BiTreeTopology t(depth, depth);
  BiInstance in;
  std::uniform_int_distribution<int> kdist(6, 8);
  const int k = kdist(rng);
  std::vector<double> wx(t.tree_x().size());
  std::vector<double> wy(t.tree_y().size());
  for (std::size_t i = 0; i < wx.size(); ++i) wx[i] = std::ldexp(1.0, k * TreeTopology::generation(i));
  for (std::size_t i = 0; i < wy.size(); ++i) wy[i] = std::ldexp(1.0, k * TreeTopology::generation(i));
  in.w = WeightFunction::product(t, wx, wy);
  std::vector<double> mu(t.size(), 0.0);
  std::uniform_int_distribution<int> mass(4, 8);
  for (int i = 0; i <= depth; ++i) {
    mu[t.index(i, 0, depth - i, 0)] = mass(rng) / 8.0;
  }
  in.m = hardy_adjoint(t, mu);
  const auto iwm = hardy_forward(t, pointwise_product(in.w.values(), in.m));
  in.delta = 0.0;
  double top = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (in.m[i] > 0) in.delta = std::max(in.delta, iwm[i]);
    top = std::max(top, iwm[i]);
  }
  std::uniform_int_distribution<int> frac(0, 16);
  const double lo = 4.0 * in.delta;
  in.lambda = std::max(lo, top / 2.0 + (top - lo) * frac(rng) / 64.0);
  return in;
}

}  // namespace instances
