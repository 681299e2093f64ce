#pragma once

// Hardy operator I (ancestor sums), its adjoint I* (descendant sums), and the
// potentials and energies built from them. Everything is templated on the
// scalar so the same sweeps run in double and in exact Rational arithmetic.

#include <cstddef>
#include <vector>

#include "bitree/fields.hpp"
#include "bitree/topology.hpp"

namespace bitree {

/// (I phi)(g) = sum_{g' >= g} phi(g'); x-sweep then y-sweep.
template <class T>
std::vector<T> hardy_forward(const BiTreeTopology& topo, const std::vector<T>& phi) {
  const std::size_t nx = topo.tree_x().size();
  const std::size_t ny = topo.tree_y().size();
  std::vector<T> out = phi;
  for (std::size_t x = 1; x < nx; ++x) {
    const std::size_t p = TreeTopology::parent(x);
    for (std::size_t y = 0; y < ny; ++y) out[x * ny + y] += out[p * ny + y];
  }
  for (std::size_t x = 0; x < nx; ++x) {
    T* row = out.data() + x * ny;
    for (std::size_t y = 1; y < ny; ++y) row[y] += row[TreeTopology::parent(y)];
  }
  return out;
}

/// (I* psi)(g) = sum_{g' <= g} psi(g').
template <class T>
std::vector<T> hardy_adjoint(const BiTreeTopology& topo, const std::vector<T>& psi) {
  const std::size_t nx = topo.tree_x().size();
  const std::size_t ny = topo.tree_y().size();
  std::vector<T> out = psi;
  for (std::size_t x = nx; x-- > 1;) {
    const std::size_t p = TreeTopology::parent(x);
    for (std::size_t y = 0; y < ny; ++y) out[p * ny + y] += out[x * ny + y];
  }
  for (std::size_t x = 0; x < nx; ++x) {
    T* row = out.data() + x * ny;
    for (std::size_t y = ny; y-- > 1;) row[TreeTopology::parent(y)] += row[y];
  }
  return out;
}

/// Single-tree Hardy operator.
template <class T>
std::vector<T> tree_hardy_forward(const TreeTopology& tree, const std::vector<T>& phi) {
  std::vector<T> out = phi;
  for (std::size_t i = 1; i < tree.size(); ++i) out[i] += out[TreeTopology::parent(i)];
  return out;
}

template <class T>
std::vector<T> tree_hardy_adjoint(const TreeTopology& tree, const std::vector<T>& psi) {
  std::vector<T> out = psi;
  for (std::size_t i = tree.size(); i-- > 1;) out[TreeTopology::parent(i)] += out[i];
  return out;
}

template <class T>
std::vector<T> pointwise_product(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <class T>
T inner_product(const std::vector<T>& a, const std::vector<T>& b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
T sum_of(const std::vector<T>& a) {
  T s = 0;
  for (const auto& v : a) s += v;
  return s;
}

/// V^mu = I(w I* mu).
template <class T>
std::vector<T> potential(const BiTreeTopology& topo, const std::vector<T>& mu,
                         const std::vector<T>& w) {
  return hardy_forward(topo, pointwise_product(w, hardy_adjoint(topo, mu)));
}

/// w (I* mu)^2, the per-node energy density.
template <class T>
std::vector<T> energy_density(const BiTreeTopology& topo, const std::vector<T>& mu,
                              const std::vector<T>& w) {
  std::vector<T> a = hardy_adjoint(topo, mu);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = w[i] * a[i] * a[i];
  return a;
}

/// E[mu] = sum w (I* mu)^2.
template <class T>
T energy(const BiTreeTopology& topo, const std::vector<T>& mu, const std::vector<T>& w) {
  return sum_of(energy_density(topo, mu, w));
}

/// The same energy evaluated as the integral of V^mu against mu.
template <class T>
T energy_via_potential(const BiTreeTopology& topo, const std::vector<T>& mu,
                       const std::vector<T>& w) {
  return inner_product(potential(topo, mu, w), mu);
}

/// E_beta[mu] = sum_{a <= beta} w (I* mu)^2.
template <class T>
T energy_box(const BiTreeTopology& topo, const std::vector<T>& mu, const std::vector<T>& w,
             std::size_t beta) {
  const std::vector<T> dens = energy_density(topo, mu, w);
  T s = 0;
  for (auto a : topo.descendants(beta)) s += dens[a];
  return s;
}

/// sum over a in mask of w (I* mu)^2.
template <class T>
T energy_on(const BiTreeTopology& topo, const std::vector<T>& mu, const std::vector<T>& w,
            const std::vector<char>& mask) {
  const std::vector<T> dens = energy_density(topo, mu, w);
  T s = 0;
  for (std::size_t i = 0; i < dens.size(); ++i) {
    if (mask[i]) s += dens[i];
  }
  return s;
}

template <class T>
T energy_downset(const BiTreeTopology& topo, const std::vector<T>& mu, const std::vector<T>& w,
                 const DownSet& d) {
  return energy_on(topo, mu, w, d.mask());
}

template <class T>
struct Truncation {
  std::vector<char> level_set;  // E_delta = {V^mu <= delta}, an up-set
  std::vector<T> full;          // V^mu
  std::vector<T> truncated;     // V_delta^mu = I(w 1_{E_delta} I* mu)
};

template <class T>
Truncation<T> truncated_potential(const BiTreeTopology& topo, const std::vector<T>& mu,
                                  const std::vector<T>& w, const T& delta) {
  Truncation<T> out;
  const std::vector<T> adj = hardy_adjoint(topo, mu);
  std::vector<T> dens(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) dens[i] = w[i] * adj[i];
  out.full = hardy_forward(topo, dens);
  out.level_set.assign(adj.size(), 0);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    if (out.full[i] <= delta) {
      out.level_set[i] = 1;
    } else {
      dens[i] = 0;
    }
  }
  out.truncated = hardy_forward(topo, dens);
  return out;
}

/// E_delta[mu] = sum_{E_delta} w (I* mu)^2.
template <class T>
T energy_delta(const BiTreeTopology& topo, const std::vector<T>& mu, const std::vector<T>& w,
               const T& delta) {
  const Truncation<T> tr = truncated_potential(topo, mu, w, delta);
  return energy_on(topo, mu, w, tr.level_set);
}

/// V^mu_{good,eps}(omega): sum of h = w I* mu over ancestors a of omega whose
/// path box sum_{omega <= b <= a} h(b) exceeds eps.
template <class T>
std::vector<T> v_good(const BiTreeTopology& topo, const std::vector<T>& mu,
                      const std::vector<T>& w, const T& eps) {
  const std::vector<T> adj = hardy_adjoint(topo, mu);
  std::vector<T> h(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) h[i] = w[i] * adj[i];

  std::vector<T> out(adj.size(), T(0));
  std::vector<T> box;
  for (std::size_t i = 0; i < topo.size(); ++i) {
    const BiNode n = topo.node(i);
    const int gx = TreeTopology::generation(n.x);
    const int gy = TreeTopology::generation(n.y);
    const std::size_t cols = static_cast<std::size_t>(gy + 1);
    box.assign(static_cast<std::size_t>(gx + 1) * cols, T(0));
    // box(a, b) = sum of h over generations [a, gx] x [b, gy] of the ancestor grid.
    T total = 0;
    for (int a = gx; a >= 0; --a) {
      const std::size_t ax = TreeTopology::ancestor(n.x, a);
      T row = 0;
      for (int b = gy; b >= 0; --b) {
        const std::size_t ab = topo.index({ax, TreeTopology::ancestor(n.y, b)});
        row += h[ab];
        T val = row;
        if (a < gx) val += box[static_cast<std::size_t>(a + 1) * cols + static_cast<std::size_t>(b)];
        box[static_cast<std::size_t>(a) * cols + static_cast<std::size_t>(b)] = val;
        if (val > eps) total += h[ab];
      }
    }
    out[i] = total;
  }
  return out;
}

}  // namespace bitree
