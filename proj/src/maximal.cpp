#include "bitree/maximal.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <random>
#include <thread>

#include "bitree/constants.hpp"
#include "bitree/maxflow.hpp"
#include "bitree/random.hpp"

namespace bitree {

LayerCake layer_cake(const BiTreeTopology& topo, const MassFunction& mu, const WeightFunction& w,
                     const std::vector<double>& phi) {
  const auto& m = mu.values();
  const auto mphi = maximal_function(topo, m, phi);
  std::vector<double> absphi(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) absphi[i] = std::abs(phi[i]);
  const auto ipsi = hardy_adjoint(topo, pointwise_product(absphi, m));
  const auto imu = hardy_adjoint(topo, m);
  LayerCake r;
  for (std::size_t a = 0; a < topo.size(); ++a) {
    r.embedding += w[a] * ipsi[a] * ipsi[a];
    r.layer_cake += w[a] * imu[a] * imu[a] * mphi[a] * mphi[a];
  }
  r.maximal_norm_sq = l2_norm_sq(m, mphi);
  return r;
}

bool superlevel_sets_are_downsets(const BiTreeTopology& topo, const std::vector<double>& f) {
  const std::size_t ny = topo.tree_y().size();
  for (std::size_t i = 0; i < topo.size(); ++i) {
    const BiNode n = topo.node(i);
    if (n.x > 0 && f[i] < f[TreeTopology::parent(n.x) * ny + n.y]) return false;
    if (n.y > 0 && f[i] < f[n.x * ny + TreeTopology::parent(n.y)]) return false;
  }
  return true;
}

namespace {

std::vector<double> random_test_function(const BiTreeTopology& topo, const std::vector<std::size_t>& supp,
                                         Rng& rng) {
  std::vector<double> psi(topo.size(), 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, supp.size() - 1);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      psi[supp[pick(rng)]] = 1.0;
      break;
    case 1: {
      const double density = 0.2 + 0.8 * u(rng);
      for (auto b : supp) {
        if (u(rng) < density) psi[b] = std::pow(1.0 - u(rng), -2.0 / 3.0);
      }
      psi[supp[pick(rng)]] += 1.0;
      break;
    }
    default: {
      // dyadic power singularity at a boundary node; at finite depth the
      // near-extremal exponents sit above the continuum threshold 1/2
      const BiNode c = topo.node(supp[pick(rng)]);
      const double s = 1.25 * u(rng);
      for (auto b : supp) {
        const BiNode n = topo.node(b);
        const int g = TreeTopology::generation(TreeTopology::lca(n.x, c.x)) +
                      TreeTopology::generation(TreeTopology::lca(n.y, c.y));
        psi[b] = std::exp2(s * g);
      }
    }
  }
  return psi;
}

}  // namespace

ProbeResult maximal_equivalence_probe(const BiTreeTopology& topo, const MassFunction& mu,
                                      int sample_count, std::uint64_t seed, int jobs) {
  if (mu.is_zero()) throw PreconditionError("maximal_equivalence_probe requires nonzero mu");
  if (sample_count < 1) throw PreconditionError("sample_count must be positive");
  const auto supp = mu.support();
  const auto& m = mu.values();
  Rng rng(seed);
  std::vector<std::vector<double>> psis;
  for (int s = 0; s < sample_count; ++s) psis.push_back(random_test_function(topo, supp, rng));

  std::vector<ProbeSample> samples(psis.size());
  std::vector<std::exception_ptr> errors(psis.size());
  auto run = [&](std::size_t s) {
    try {
      const auto& psi = psis[s];
      const auto ew = extremal_weight(topo, m, psi);
      if (!superlevel_sets_are_downsets(topo, ew.maximal)) {
        throw InvariantError("maximal function has a superlevel set that is not a down-set");
      }
      const WeightFunction w(topo, ew.w);
      ProbeSample& ps = samples[s];
      ps.maximal_ratio = ew.maximal_norm_sq / l2_norm_sq(m, psi);
      ps.carleson = carleson_constant(topo, mu, w).value;
      const auto ce = embedding_constant(topo, mu, w);
      ps.embedding = ce.value;
      std::vector<double> phi(topo.size(), 0.0);
      for (std::size_t i = 0; i < ce.support.size(); ++i) phi[ce.support[i]] = std::abs(ce.witness_function[i]);
      const double pn = l2_norm_sq(m, phi);
      if (pn > 0) ps.upper_proxy = ps.carleson * layer_cake(topo, mu, w, phi).maximal_norm_sq / pn;
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1, psis.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t s; (s = next++) < psis.size();) run(s);
    });
  }
  for (std::size_t s; (s = next++) < psis.size();) run(s);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ProbeResult r;
  for (const auto& ps : samples) {
    if (ps.carleson <= 1.0 + 1e-9) {
      ++r.certified;
      r.embedding_estimate = std::max(r.embedding_estimate, ps.embedding);
    }
    r.maximal_estimate = std::max(r.maximal_estimate, ps.maximal_ratio);
    r.upper_proxy = std::max(r.upper_proxy, ps.upper_proxy);
  }
  r.samples = std::move(samples);
  r.gap = r.embedding_estimate - r.maximal_estimate;
  return r;
}

template <class T>
SparseSelection<T> sparse_selection(const BiTreeTopology& topo, const std::vector<std::size_t>& collection,
                                    const std::vector<T>& w, const std::vector<T>& mu) {
  if (w.size() != topo.size() || mu.size() != topo.size()) {
    throw PreconditionError("sparse_selection: w and mu must live on the bi-tree");
  }
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (mu[i] < 0 || w[i] < 0) throw PreconditionError("sparse_selection: negative input");
    if (mu[i] > 0 && !topo.is_boundary(i)) {
      throw PreconditionError("sparse_selection requires a boundary-supported mu");
    }
  }
  for (std::size_t j = 0; j < collection.size(); ++j) {
    if (collection[j] >= topo.size()) throw PreconditionError("sparse_selection: member out of range");
    for (std::size_t k = 0; k < j; ++k) {
      if (collection[k] == collection[j]) throw PreconditionError("sparse_selection: repeated member");
    }
  }

  const auto imu = hardy_adjoint(topo, mu);
  std::vector<std::size_t> omegas;
  std::vector<std::size_t> omega_vertex(topo.size(), 0);
  for (auto b : topo.boundary()) {
    if (mu[b] > 0) {
      omega_vertex[b] = omegas.size();
      omegas.push_back(b);
    }
  }
  const std::size_t q0 = 2;
  const std::size_t o0 = q0 + collection.size();
  FlowNetwork<T> net(o0 + omegas.size());
  T infinite = 1;
  for (auto b : omegas) infinite += mu[b];

  SparseSelection<T> r;
  std::vector<T> demand(collection.size());
  struct Arc {
    std::size_t id, member, omega;
  };
  std::vector<Arc> arcs;
  for (std::size_t j = 0; j < collection.size(); ++j) {
    const std::size_t q = collection[j];
    demand[j] = w[q] * imu[q] * imu[q];
    r.demand += demand[j];
    net.add_edge(0, q0 + j, demand[j]);
    for (auto b : topo.descendants(q)) {
      if (mu[b] > 0 && topo.is_boundary(b)) {
        arcs.push_back({net.add_edge(q0 + j, o0 + omega_vertex[b], infinite), j, b});
      }
    }
  }
  for (std::size_t k = 0; k < omegas.size(); ++k) net.add_edge(o0 + k, 1, mu[omegas[k]]);

  r.flow = net.max_flow(0, 1);
  if constexpr (std::is_same_v<T, double>) {
    r.feasible = r.flow >= r.demand * (1.0 - 1e-12);
  } else {
    r.feasible = r.flow == r.demand;
  }
  r.totals.assign(collection.size(), T(0));
  for (const auto& a : arcs) {
    const T f = net.flow(a.id);
    if (f > 0) {
      r.assignment.push_back({a.omega, collection[a.member], f});
      r.totals[a.member] += f;
    }
  }
  if (!r.feasible) {
    T eps = 0;
    if constexpr (std::is_same_v<T, double>) eps = 1e-12 * std::max(1.0, r.demand);
    const auto side = net.source_side(eps);
    std::vector<char> mask(topo.size(), 0);
    for (std::size_t j = 0; j < collection.size(); ++j) {
      if (!side[q0 + j]) continue;
      r.violating_members.push_back(collection[j]);
      r.violating_demand += demand[j];
      for (auto b : topo.descendants(collection[j])) mask[b] = 1;
    }
    for (std::size_t i = 0; i < topo.size(); ++i) {
      if (mask[i]) r.violating_mass += mu[i];
    }
    r.violating_union = DownSet(topo, std::move(mask));
  }
  return r;
}

template SparseSelection<double> sparse_selection(const BiTreeTopology&, const std::vector<std::size_t>&,
                                                  const std::vector<double>&, const std::vector<double>&);
template SparseSelection<Rational> sparse_selection(const BiTreeTopology&, const std::vector<std::size_t>&,
                                                    const std::vector<Rational>&,
                                                    const std::vector<Rational>&);

}  // namespace bitree
