#pragma once

// Superadditivity, the small-energy majorants on trees and bi-trees, the
// balancing construction, and the truncated-energy ratio probe. The majorant
// and balancing routines are templates so they can run in Rational and have
// their contracts checked exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

#include "bitree/error.hpp"
#include "bitree/fields.hpp"
#include "bitree/hardy.hpp"
#include "bitree/topology.hpp"

namespace bitree {

namespace detail {

// kids > own, forgiving relative rounding `rel_tol` for double inputs only.
template <class T>
bool outweighs(const T& kids, const T& own, double rel_tol) {
  if constexpr (std::is_same_v<T, double>) {
    return kids > own + rel_tol * kids;
  } else {
    return kids > own;
  }
}

}  // namespace detail

struct SuperadditivityCheck {
  bool ok = true;
  std::optional<std::size_t> violation;  // first node whose children outweigh it
};

/// g(b) >= sum of g over the children of b, for every b. `rel_tol` forgives
/// rounding in double inputs.
template <class T>
SuperadditivityCheck is_superadditive(const TreeTopology& tree, const std::vector<T>& g,
                                      double rel_tol = 0.0) {
  for (std::size_t b = 0; b < tree.size(); ++b) {
    if (tree.is_leaf(b)) continue;
    const T kids = g[TreeTopology::left_child(b)] + g[TreeTopology::right_child(b)];
    if (detail::outweighs(kids, g[b], rel_tol)) return {false, b};
  }
  return {};
}

/// Bi-tree version, checked per axis: g(b) dominates the sum over its two
/// x-children and, separately, over its two y-children.
template <class T>
SuperadditivityCheck is_superadditive(const BiTreeTopology& topo, const std::vector<T>& g,
                                      double rel_tol = 0.0) {
  const std::size_t ny = topo.tree_y().size();
  for (std::size_t b = 0; b < topo.size(); ++b) {
    const BiNode n = topo.node(b);
    if (!topo.tree_x().is_leaf(n.x)) {
      const T kids = g[TreeTopology::left_child(n.x) * ny + n.y] +
                     g[TreeTopology::right_child(n.x) * ny + n.y];
      if (detail::outweighs(kids, g[b], rel_tol)) return {false, b};
    }
    if (!topo.tree_y().is_leaf(n.y)) {
      const T kids = g[n.x * ny + TreeTopology::left_child(n.y)] +
                     g[n.x * ny + TreeTopology::right_child(n.y)];
      if (detail::outweighs(kids, g[b], rel_tol)) return {false, b};
    }
  }
  return {};
}

struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = sum_{a <= beta} g h, rhs = g(beta) * max_{a <= beta} sum_{a <= a' <= beta} h.
/// Throws PreconditionError unless g is superadditive.
InequalitySides check_l1linf(const TreeTopology& tree, const std::vector<double>& g,
                             const std::vector<double>& h, std::size_t beta);

/// K is rows x cols, row-major, (If)(x) = sum_y K(x, y) f(y); f has length
/// cols, g has length rows. lhs = sum (Kf)^2 g, rhs = max_{supp g} K K^T g * sum f^2.
InequalitySides check_positive_kernel(const std::vector<double>& k, std::size_t rows,
                                      std::size_t cols, const std::vector<double>& f,
                                      const std::vector<double>& g);

template <class T>
struct MajorantResult {
  std::vector<T> phi;
  std::vector<char> band;   // the lemma's own band
  T energy_in = 0;          // int w phi^2
  T energy_ref = 0;         // int w f^2 (tree) or int w m^2 (bi-tree)
  double achieved_lower_const = std::numeric_limits<double>::infinity();  // min over the band of I(w phi) / reference
  double energy_ratio = 0;  // energy_in / ((delta / lambda) energy_ref)
};

/// Energy constant of the majorant: int w phi^2 <= kMajorantEnergyConst (delta/lambda) int w f^2.
inline constexpr double kMajorantEnergyConst = 2.0;
/// Lower-bound constant on the bi-tree band at lambda >= 4 delta.
inline constexpr double kBitreeLowerConst = 1.0 / 8.0;

namespace detail {

template <class T>
bool leq_with_slack(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, double>) {
    return a <= b + 1e-10 * std::max(std::abs(a), std::abs(b));
  } else {
    return a <= b;
  }
}

template <class T>
bool eq_with_slack(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, double>) {
    return std::abs(a - b) <= 1e-10 * std::max({std::abs(a), std::abs(b), 1e-300});
  } else {
    return a == b;
  }
}

}  // namespace detail

/// phi = (1/lambda) 1{delta < I(wg) <= 2 lambda} I(wf) g on one tree.
/// Requires g superadditive, I(wg) <= delta on supp f, lambda >= 4 delta > 0.
/// Checks on {lambda/2 < I(wg) <= 2 lambda} the identity
///   lambda I(w phi)(omega) = I(wf)(omega) (I(wg)(omega) - I(wg)(alpha_min)),
/// the bound I(w phi) >= (1/2 - delta/lambda) I(wf), and the energy bound;
/// throws InvariantError if any fails.
template <class T>
MajorantResult<T> majorant_tree(const TreeTopology& tree, const std::vector<T>& g,
                                const std::vector<T>& f, const std::vector<T>& w, const T& lambda,
                                const T& delta) {
  const std::size_t n = tree.size();
  if (!(delta > 0) || lambda < 4 * delta) {
    throw PreconditionError("majorant_tree requires lambda >= 4 delta > 0");
  }
  if (auto sa = is_superadditive(tree, g, 1e-12); !sa.ok) {
    throw PreconditionError("g is not superadditive at node " + std::to_string(*sa.violation));
  }
  std::vector<T> wg(n);
  std::vector<T> wf(n);
  for (std::size_t i = 0; i < n; ++i) {
    wg[i] = w[i] * g[i];
    wf[i] = w[i] * f[i];
  }
  const auto ig = tree_hardy_forward(tree, wg);
  const auto iff = tree_hardy_forward(tree, wf);
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] != 0 && !detail::leq_with_slack(ig[i], delta)) {
      throw PreconditionError("I(wg) exceeds delta on supp f at node " + std::to_string(i));
    }
  }

  MajorantResult<T> r;
  r.phi.assign(n, T(0));
  r.band.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (delta < ig[i] && ig[i] <= 2 * lambda) r.phi[i] = iff[i] * g[i] / lambda;
    if (lambda / 2 < ig[i] && ig[i] <= 2 * lambda) r.band[i] = 1;
  }
  std::vector<T> wphi(n);
  for (std::size_t i = 0; i < n; ++i) {
    wphi[i] = w[i] * r.phi[i];
    r.energy_in += w[i] * r.phi[i] * r.phi[i];
    r.energy_ref += w[i] * f[i] * f[i];
  }
  const auto iphi = tree_hardy_forward(tree, wphi);

  const T floor_const = T(1) / 2 - delta / lambda;
  for (std::size_t om = 0; om < n; ++om) {
    if (!r.band[om]) continue;
    // alpha_min: first ancestor with I(wg) <= delta.
    T tail = 0;
    for (std::size_t a = om;; a = TreeTopology::parent(a)) {
      if (ig[a] <= delta) {
        tail = ig[a];
        break;
      }
      if (TreeTopology::is_root(a)) break;
    }
    const T expect = iff[om] * (ig[om] - tail);
    if (!detail::eq_with_slack(T(lambda * iphi[om]), expect)) {
      throw InvariantError("majorant_tree telescoping identity fails at node " + std::to_string(om));
    }
    if (!detail::leq_with_slack(T(floor_const * iff[om]), iphi[om])) {
      throw InvariantError("majorant_tree band lower bound fails at node " + std::to_string(om));
    }
    if (iff[om] > 0) {
      r.achieved_lower_const = std::min(r.achieved_lower_const, to_double(T(iphi[om] / iff[om])));
    }
  }
  const T bound = T(kMajorantEnergyConst) * delta / lambda * r.energy_ref;
  if (!detail::leq_with_slack(r.energy_in, bound)) {
    throw InvariantError("majorant_tree energy bound fails");
  }
  const T scale = delta / lambda * r.energy_ref;
  r.energy_ratio = scale > 0 ? to_double(T(r.energy_in / scale)) : 0.0;
  return r;
}

/// Slice-wise majorant on a bi-tree with a product weight. Requires m
/// superadditive (per axis), I(wm) <= delta on supp m, lambda >= 4 delta.
/// Checks int w phi^2 <= 2 (delta/lambda) int w m^2 and, on
/// {lambda < I(wm) <= 2 lambda}, I(w phi) >= kBitreeLowerConst * I(wm).
template <class T>
MajorantResult<T> majorant_bitree(const BiTreeTopology& topo, const std::vector<T>& m,
                                  const WeightFunction& w, const T& lambda, const T& delta) {
  const auto* prod = std::get_if<ProductWeight>(&w.structure());
  if (!prod) throw TagError("majorant_bitree requires a product weight, got " + w.tag_name());
  if (!(delta > 0) || lambda < 4 * delta) {
    throw PreconditionError("majorant_bitree requires lambda >= 4 delta > 0");
  }
  if (auto sa = is_superadditive(topo, m, 1e-12); !sa.ok) {
    throw PreconditionError("m is not superadditive at bi-node " + std::to_string(*sa.violation));
  }
  const std::size_t nx = topo.tree_x().size();
  const std::size_t ny = topo.tree_y().size();
  std::vector<T> wx(nx);
  std::vector<T> wy(ny);
  for (std::size_t i = 0; i < nx; ++i) wx[i] = T(prod->wx[i]);
  for (std::size_t i = 0; i < ny; ++i) wy[i] = T(prod->wy[i]);
  std::vector<T> wfull(topo.size());
  for (std::size_t i = 0; i < topo.size(); ++i) {
    const BiNode n = topo.node(i);
    wfull[i] = wx[n.x] * wy[n.y];
  }
  const auto iwm = hardy_forward(topo, pointwise_product(wfull, m));
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (m[i] != 0 && !detail::leq_with_slack(iwm[i], delta)) {
      throw PreconditionError("I(wm) exceeds delta on supp m at bi-node " + std::to_string(i));
    }
  }

  // G(bx, ay) = sum_{a'y >= ay} m(bx, a'y) wy(a'y): a y-ancestor sweep of m wy.
  std::vector<T> big_g(topo.size());
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) big_g[x * ny + y] = m[x * ny + y] * wy[y];
    for (std::size_t y = 1; y < ny; ++y) big_g[x * ny + y] += big_g[x * ny + TreeTopology::parent(y)];
  }

  MajorantResult<T> r;
  r.phi.assign(topo.size(), T(0));
  std::vector<T> g(nx);
  std::vector<T> f(nx);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      g[x] = big_g[x * ny + y];
      f[x] = m[x * ny + y];
    }
    if (auto sa = is_superadditive(topo.tree_x(), g, 1e-12); !sa.ok) {
      throw InvariantError("slice g is not superadditive at y = " + std::to_string(y));
    }
    const auto slice = majorant_tree(topo.tree_x(), g, f, wx, lambda, delta);
    for (std::size_t x = 0; x < nx; ++x) r.phi[x * ny + y] = slice.phi[x];
  }

  r.band.assign(topo.size(), 0);
  for (std::size_t i = 0; i < topo.size(); ++i) {
    r.energy_in += wfull[i] * r.phi[i] * r.phi[i];
    r.energy_ref += wfull[i] * m[i] * m[i];
    if (lambda < iwm[i] && iwm[i] <= 2 * lambda) r.band[i] = 1;
  }
  const auto iwphi = hardy_forward(topo, pointwise_product(wfull, r.phi));
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (!r.band[i]) continue;
    if (!detail::leq_with_slack(T(T(kBitreeLowerConst) * iwm[i]), iwphi[i])) {
      throw InvariantError("majorant_bitree lower bound fails at bi-node " + std::to_string(i));
    }
    r.achieved_lower_const = std::min(r.achieved_lower_const, to_double(T(iwphi[i] / iwm[i])));
  }
  const T bound = T(kMajorantEnergyConst) * delta / lambda * r.energy_ref;
  if (!detail::leq_with_slack(r.energy_in, bound)) {
    throw InvariantError("majorant_bitree energy bound fails");
  }
  const T scale = delta / lambda * r.energy_ref;
  r.energy_ratio = scale > 0 ? to_double(T(r.energy_in / scale)) : 0.0;
  return r;
}

template <class T>
struct BalanceResult {
  DownSet e_tilde;
  std::vector<T> nu_tilde;
  int iterations = 0;
  T energy_before = 0;
  T energy_after = 0;
  T min_potential = 0;  // min of V^{nu_tilde} over E_tilde (0 if E_tilde is empty)
};

/// Requires E[nu] >= A |nu| with A > 0 and nu nonzero. Peels {V^{nu_k} <= A/3}
/// until stable; checks V^{nu_tilde} >= A/3 on E_tilde and E[nu_tilde] >= E[nu]/3.
template <class T>
BalanceResult<T> balance(const BiTreeTopology& topo, const std::vector<T>& nu,
                         const std::vector<T>& w, const T& a) {
  const T total = sum_of(nu);
  const T e0 = energy(topo, nu, w);
  if (!(a > 0) || !(total > 0) || e0 < a * total) {
    throw PreconditionError("balance requires E[nu] >= A |nu| with A > 0 and nu nonzero");
  }
  // Peeling {V^{nu_k} <= A/3} is the same as peeling {V^{3 nu_k / A} <= 1}.
  const T level = a / 3;
  std::vector<char> e(topo.size(), 1);
  std::vector<T> cur = nu;
  BalanceResult<T> r;
  for (;;) {
    ++r.iterations;
    const auto v = potential(topo, cur, w);
    bool changed = false;
    for (std::size_t i = 0; i < topo.size(); ++i) {
      if (e[i] && v[i] <= level) {
        e[i] = 0;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t i = 0; i < topo.size(); ++i) cur[i] = e[i] ? nu[i] : T(0);
  }
  r.e_tilde = DownSet(topo, e);
  r.nu_tilde = cur;
  r.energy_before = e0;
  r.energy_after = energy(topo, cur, w);
  const auto v = potential(topo, cur, w);
  bool first = true;
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (!e[i]) continue;
    if (first || v[i] < r.min_potential) r.min_potential = v[i];
    first = false;
    if (v[i] < level) throw InvariantError("balance: potential below A/3 on E_tilde");
  }
  if (3 * r.energy_after < e0) throw InvariantError("balance: energy retention below 1/3");
  return r;
}

struct DichotomyCheck {
  bool holds = true;
  std::optional<std::size_t> violation;
};

/// At every node: v_good(eps) > eps, or V_{4 eps} >= V / 2.
template <class T>
DichotomyCheck check_dichotomy(const BiTreeTopology& topo, const std::vector<T>& mu,
                               const std::vector<T>& w, const T& eps) {
  const auto good = v_good(topo, mu, w, eps);
  const auto tr = truncated_potential(topo, mu, w, T(4 * eps));
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (good[i] > eps) continue;
    if (2 * tr.truncated[i] >= tr.full[i]) continue;
    return {false, i};
  }
  return {};
}

struct CecEResult {
  double integral = 0.0;   // int V_delta^mu d rho
  double lhs_cubed = 0.0;  // integral^3
  double rhs = 0.0;        // delta E_delta[mu] E[rho] |rho|
  double ratio = 0.0;      // lhs_cubed / rhs (0/0 = 0)
  double energy_delta = 0.0;
  double energy_rho = 0.0;
};

/// Requires a product weight (TagError otherwise).
CecEResult cEcE_ratio(const BiTreeTopology& topo, const MassFunction& mu, const MassFunction& rho,
                      const WeightFunction& w, double delta);

}  // namespace bitree
