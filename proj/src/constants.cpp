#include "bitree/constants.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "bitree/error.hpp"
#include "bitree/hardy.hpp"
#include "bitree/maxflow.hpp"

namespace bitree {

std::string to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::Box: return "box";
    case ConstantKind::Carleson: return "carleson";
    case ConstantKind::HereditaryCarleson: return "hereditary_carleson";
    case ConstantKind::CarlesonEmbedding: return "carleson_embedding";
  }
  return "unknown";
}

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  if (num == 0.0) return 0.0;
  return std::numeric_limits<double>::infinity();
}

ConstantReport box_constant(const BiTreeTopology& topo, const MassFunction& mu,
                            const WeightFunction& w) {
  ConstantReport r;
  r.kind = ConstantKind::Box;
  r.diagnostics.method = "descendant_sweep";
  const auto adj = hardy_adjoint(topo, mu.values());
  const auto boxes = hardy_adjoint(topo, energy_density(topo, mu.values(), w.values()));
  for (std::size_t b = 0; b < topo.size(); ++b) {
    if (adj[b] <= 0.0) continue;
    const double ratio = boxes[b] / adj[b];
    if (!r.witness_node || ratio > r.value) {
      r.value = ratio;
      r.witness_node = b;
    }
  }
  return r;
}

namespace {

template <class T>
struct Closure {
  std::vector<char> mask;
  T surplus;
};

// Maximum-weight closure under "a in D forces every child of a in D",
// profits p = e - lambda mu, solved as one s-t min-cut.
template <class T>
Closure<T> max_closure(const BiTreeTopology& topo, const std::vector<T>& p, const T& infinity,
                       const T& eps) {
  const std::size_t n = topo.size();
  const std::size_t s = n;
  const std::size_t t = n + 1;
  FlowNetwork<T> net(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0) {
      net.add_edge(s, i, p[i]);
    } else if (p[i] < 0) {
      net.add_edge(i, t, -p[i]);
    }
    for (auto c : topo.children(i)) net.add_edge(i, c, infinity);
  }
  net.max_flow(s, t);
  auto side = net.source_side(eps);
  Closure<T> out{std::vector<char>(side.begin(), side.begin() + static_cast<std::ptrdiff_t>(n)), T(0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (out.mask[i]) out.surplus += p[i];
  }
  return out;
}

template <class T>
T masked_sum(const std::vector<T>& v, const std::vector<char>& mask) {
  T s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) s += v[i];
  }
  return s;
}

constexpr int kDinkelbachCap = 1000;

}  // namespace

ClosureResult max_surplus_downset(const BiTreeTopology& topo, const std::vector<double>& e,
                                  const std::vector<double>& mu, double lambda) {
  std::vector<double> p(e.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    p[i] = e[i] - lambda * mu[i];
    scale += e[i] + lambda * mu[i];
  }
  const double inf = 1e3 * std::max(scale, 1.0);
  auto c = max_closure<double>(topo, p, inf, 1e-14 * scale);
  return {DownSet(topo, std::move(c.mask)), c.surplus};
}

ConstantReport carleson_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                 const WeightFunction& w, CarlesonMethod method, double tol) {
  ConstantReport r;
  r.kind = ConstantKind::Carleson;
  const auto e = energy_density(topo, mu.values(), w.values());

  if (method == CarlesonMethod::BruteForce) {
    r.diagnostics.method = "brute_force";
    for_each_down_set(topo, [&](const DownSet& d) {
      const double m = masked_sum(mu.values(), d.mask());
      if (m <= 0.0) return;
      const double ratio = masked_sum(e, d.mask()) / m;
      ++r.diagnostics.iterations;
      if (!r.witness_downset || ratio > r.value) {
        r.value = ratio;
        r.witness_downset = d;
      }
    });
    return r;
  }

  r.diagnostics.method = "exact_mincut";
  const double total = mu.total_mass();
  if (total <= 0.0) return r;
  DownSet best = DownSet::full(topo);
  double lambda = sum_of(e) / total;
  const double sum_e = sum_of(e);
  for (int it = 1;; ++it) {
    if (it > kDinkelbachCap) throw SolverError("Dinkelbach iteration cap reached");
    r.diagnostics.iterations = it;
    auto step = max_surplus_downset(topo, e, mu.values(), lambda);
    const double scale = sum_e + lambda * total;
    r.diagnostics.residual = std::max(step.surplus, 0.0) / scale;
    if (step.surplus <= tol * scale) break;
    const double m = masked_sum(mu.values(), step.set.mask());
    if (m <= 0.0) break;
    const double next = masked_sum(e, step.set.mask()) / m;
    if (!(next > lambda)) break;
    lambda = next;
    best = std::move(step.set);
  }
  r.value = lambda;
  r.witness_downset = std::move(best);
  return r;
}

ExactCarleson carleson_constant_exact(const BiTreeTopology& topo, const std::vector<Rational>& mu,
                                      const std::vector<Rational>& w) {
  const auto e = energy_density(topo, mu, w);
  const Rational total = sum_of(mu);
  ExactCarleson out{Rational(0), DownSet::full(topo), 0};
  if (total <= 0) return out;
  const Rational sum_e = sum_of(e);
  Rational lambda = sum_e / total;
  std::vector<Rational> p(e.size());
  for (int it = 1;; ++it) {
    if (it > kDinkelbachCap) throw SolverError("Dinkelbach iteration cap reached");
    out.iterations = it;
    Rational finite = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      p[i] = e[i] - lambda * mu[i];
      finite += abs(p[i]);
    }
    auto c = max_closure<Rational>(topo, p, finite + 1, Rational(0));
    if (c.surplus <= 0) break;
    const Rational m = masked_sum(mu, c.mask);
    lambda = masked_sum(e, c.mask) / m;
    out.witness = DownSet(topo, std::move(c.mask));
  }
  out.value = lambda;
  return out;
}

// ---- hereditary ---------------------------------------------------------

std::vector<double> lca_kernel(const BiTreeTopology& topo, const WeightFunction& w,
                               const std::vector<std::size_t>& nodes) {
  const auto iw = hardy_forward(topo, w.values());
  const std::size_t s = nodes.size();
  std::vector<double> a(s * s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i; j < s; ++j) {
      a[i * s + j] = a[j * s + i] = iw[topo.lca(nodes[i], nodes[j])];
    }
  }
  return a;
}

double restricted_energy_ratio(const BiTreeTopology& topo, const MassFunction& mu,
                               const WeightFunction& w, const std::vector<std::size_t>& subset) {
  std::vector<double> m(topo.size(), 0.0);
  double mass = 0.0;
  for (auto i : subset) {
    m[i] = mu[i];
    mass += mu[i];
  }
  return safe_ratio(energy(topo, m, w.values()), mass);
}

Rational restricted_energy_ratio_exact(const BiTreeTopology& topo, const std::vector<Rational>& mu,
                                       const std::vector<Rational>& w,
                                       const std::vector<std::size_t>& subset) {
  std::vector<Rational> m(topo.size(), Rational(0));
  Rational mass = 0;
  for (auto i : subset) {
    m[i] = mu[i];
    mass += mu[i];
  }
  if (mass == 0) return Rational(0);
  return energy(topo, m, w) / mass;
}

namespace {

// Quadratic form Q(x) = sum_ij x_i mu_i A_ij mu_j x_j with g = A (mu x)
// maintained under single-coordinate flips.
class FlipState {
 public:
  FlipState(const std::vector<double>& a, const std::vector<double>& m)
      : a_(a), m_(m), s_(m.size()), x_(s_, 0), g_(s_, 0.0) {}

  double q() const { return q_; }
  double mass() const { return mass_; }
  bool in(std::size_t i) const { return x_[i] != 0; }
  const std::vector<char>& members() const { return x_; }

  double q_after_flip(std::size_t i) const {
    const double self = a_[i * s_ + i] * m_[i] * m_[i];
    return x_[i] ? q_ - (2.0 * m_[i] * g_[i] - self) : q_ + 2.0 * m_[i] * g_[i] + self;
  }
  double mass_after_flip(std::size_t i) const { return x_[i] ? mass_ - m_[i] : mass_ + m_[i]; }

  void flip(std::size_t i) {
    q_ = q_after_flip(i);
    mass_ = mass_after_flip(i);
    const double sign = x_[i] ? -1.0 : 1.0;
    x_[i] = !x_[i];
    const double* row = a_.data() + i * s_;
    for (std::size_t k = 0; k < s_; ++k) g_[k] += sign * row[k] * m_[i];
  }

  void assign(const std::vector<char>& x) {
    x_ = x;
    recompute();
  }

  void recompute() {
    std::fill(g_.begin(), g_.end(), 0.0);
    mass_ = 0.0;
    for (std::size_t j = 0; j < s_; ++j) {
      if (!x_[j]) continue;
      mass_ += m_[j];
      const double* row = a_.data() + j * s_;
      for (std::size_t k = 0; k < s_; ++k) g_[k] += row[k] * m_[j];
    }
    q_ = 0.0;
    for (std::size_t k = 0; k < s_; ++k) {
      if (x_[k]) q_ += m_[k] * g_[k];
    }
  }

 private:
  const std::vector<double>& a_;
  const std::vector<double>& m_;
  std::size_t s_;
  std::vector<char> x_;
  std::vector<double> g_;
  double q_ = 0.0;
  double mass_ = 0.0;
};

constexpr std::size_t kMaxLocalSearchSupport = 4096;

std::vector<std::size_t> members_to_nodes(const std::vector<char>& x,
                                          const std::vector<std::size_t>& supp) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) out.push_back(supp[i]);
  }
  return out;
}

void hill_climb(FlipState& st, std::mt19937_64& rng, int max_passes) {
  std::vector<std::size_t> order(st.members().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int pass = 0; pass < max_passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (auto i : order) {
      const double m2 = st.mass_after_flip(i);
      if (m2 <= 0.0) continue;
      const double cur = safe_ratio(st.q(), st.mass());
      const double next = st.q_after_flip(i) / m2;
      if (next > cur * (1.0 + 1e-13)) {
        st.flip(i);
        improved = true;
      }
    }
    st.recompute();
    if (!improved) break;
  }
}

}  // namespace

ConstantReport hereditary_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                   const WeightFunction& w, HereditaryMethod method,
                                   const LocalSearchOptions& options) {
  ConstantReport r;
  r.kind = ConstantKind::HereditaryCarleson;
  const auto supp = mu.support();
  const std::size_t s = supp.size();
  if (s == 0) {
    r.diagnostics.method = method == HereditaryMethod::ExactEnum ? "exact_enum" : "local_search";
    return r;
  }
  std::vector<double> m(s);
  for (std::size_t i = 0; i < s; ++i) m[i] = mu[supp[i]];

  if (method == HereditaryMethod::ExactEnum) {
    r.diagnostics.method = "exact_enum";
    if (s > kMaxHereditaryEnumSupport) {
      throw SizeError("exact hereditary enumeration limited to |supp mu| <= " +
                      std::to_string(kMaxHereditaryEnumSupport) + ", got " + std::to_string(s));
    }
    const auto a = lca_kernel(topo, w, supp);
    FlipState st(a, m);
    std::uint64_t best_code = 0;
    double best = -1.0;
    const std::uint64_t steps = std::uint64_t{1} << s;
    for (std::uint64_t k = 1; k < steps; ++k) {
      // Gray code: step k flips the lowest set bit of k.
      st.flip(static_cast<std::size_t>(std::countr_zero(k)));
      if ((k & 0xFFFF) == 0) st.recompute();
      const double ratio = st.q() / st.mass();
      if (ratio > best) {
        best = ratio;
        best_code = k ^ (k >> 1);
      }
    }
    r.diagnostics.iterations = static_cast<int>(steps - 1);
    for (std::size_t i = 0; i < s; ++i) {
      if ((best_code >> i) & 1) r.witness_subset.push_back(supp[i]);
    }
    r.value = restricted_energy_ratio(topo, mu, w, r.witness_subset);
    return r;
  }

  r.diagnostics.method = "local_search";
  r.certified = false;
  if (s > kMaxLocalSearchSupport) {
    throw SizeError("hereditary local search limited to |supp mu| <= " +
                    std::to_string(kMaxLocalSearchSupport));
  }
  const auto a = lca_kernel(topo, w, supp);
  FlipState st(a, m);
  std::mt19937_64 rng(options.seed);

  std::vector<std::vector<char>> seeds;
  seeds.emplace_back(s, 1);
  std::vector<std::size_t> by_single(s);
  std::iota(by_single.begin(), by_single.end(), std::size_t{0});
  std::sort(by_single.begin(), by_single.end(), [&](std::size_t i, std::size_t j) {
    return a[i * s + i] * m[i] > a[j * s + j] * m[j];
  });
  for (std::size_t k = 0; k < std::min<std::size_t>(s, 16); ++k) {
    std::vector<char> x(s, 0);
    x[by_single[k]] = 1;
    seeds.push_back(std::move(x));
  }
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < options.random_seeds; ++k) {
    std::vector<char> x(s, 0);
    for (auto& c : x) c = coin(rng);
    seeds.push_back(std::move(x));
  }
  for (const auto& extra : options.extra_seeds) {
    std::vector<char> x(s, 0);
    for (auto node : extra) {
      auto it = std::lower_bound(supp.begin(), supp.end(), node);
      if (it != supp.end() && *it == node) x[static_cast<std::size_t>(it - supp.begin())] = 1;
    }
    seeds.push_back(std::move(x));
  }

  double best = -1.0;
  std::vector<char> best_x;
  for (const auto& seed : seeds) {
    st.assign(seed);
    if (st.mass() <= 0.0) continue;
    hill_climb(st, rng, options.max_passes);
    ++r.diagnostics.iterations;
    const double ratio = st.q() / st.mass();
    if (ratio > best) {
      best = ratio;
      best_x = st.members();
    }
  }
  r.witness_subset = members_to_nodes(best_x, supp);
  r.value = restricted_energy_ratio(topo, mu, w, r.witness_subset);
  return r;
}

// ---- embedding ----------------------------------------------------------

double embedding_quotient(const BiTreeTopology& topo, const MassFunction& mu,
                          const WeightFunction& w, const std::vector<double>& psi) {
  std::vector<double> pm(topo.size());
  double den = 0.0;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    pm[i] = psi[i] * mu[i];
    den += psi[i] * psi[i] * mu[i];
  }
  return safe_ratio(energy(topo, pm, w.values()), den);
}

ConstantReport embedding_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                  const WeightFunction& w, double tol, int max_iterations) {
  ConstantReport r;
  r.kind = ConstantKind::CarlesonEmbedding;
  r.diagnostics.method = "power_iteration";
  const auto supp = mu.support();
  const std::size_t s = supp.size();
  if (s == 0) return r;
  std::vector<double> sq(s);
  for (std::size_t k = 0; k < s; ++k) sq[k] = std::sqrt(mu[supp[k]]);

  // Small supports use the explicit kernel; otherwise two sweeps per product.
  const bool use_kernel = s * s <= topo.size();
  std::vector<double> kernel;
  if (use_kernel) {
    kernel = lca_kernel(topo, w, supp);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) kernel[i * s + j] *= sq[i] * sq[j];
    }
  }
  std::vector<double> full(topo.size());
  auto apply = [&](const std::vector<double>& x) {
    std::vector<double> y(s, 0.0);
    if (use_kernel) {
      for (std::size_t i = 0; i < s; ++i) {
        const double* row = kernel.data() + i * s;
        double acc = 0.0;
        for (std::size_t j = 0; j < s; ++j) acc += row[j] * x[j];
        y[i] = acc;
      }
      return y;
    }
    std::fill(full.begin(), full.end(), 0.0);
    for (std::size_t k = 0; k < s; ++k) full[supp[k]] = x[k] * sq[k];
    auto h = hardy_adjoint(topo, full);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] *= w[i];
    const auto v = hardy_forward(topo, h);
    for (std::size_t k = 0; k < s; ++k) y[k] = sq[k] * v[supp[k]];
    return y;
  };
  auto norm = [](const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  };

  std::vector<double> x = sq;
  double nx = norm(x);
  for (auto& v : x) v /= nx;
  std::vector<double> y = apply(x);
  double rho = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  double residual = 0.0;
  int stalled = 0;
  bool converged = false;
  int it = 0;
  for (it = 1; it <= max_iterations; ++it) {
    double res2 = 0.0;
    for (std::size_t k = 0; k < s; ++k) res2 += (y[k] - rho * x[k]) * (y[k] - rho * x[k]);
    residual = rho > 0.0 ? std::sqrt(res2) / rho : 0.0;
    if (rho <= 0.0 || residual <= 1e-3 * std::sqrt(tol)) {
      converged = true;
      break;
    }
    const double ny = norm(y);
    for (std::size_t k = 0; k < s; ++k) x[k] = y[k] / ny;
    y = apply(x);
    const double next = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    stalled = std::abs(next - rho) <= tol * next ? stalled + 1 : 0;
    rho = next;
    if (stalled >= 50) {
      converged = true;
      break;
    }
  }
  r.value = rho;
  r.certified = converged;
  r.diagnostics.iterations = std::min(it, max_iterations);
  r.diagnostics.residual = residual;
  r.support = supp;
  r.witness_function.resize(s);
  for (std::size_t k = 0; k < s; ++k) r.witness_function[k] = x[k] / sq[k];
  return r;
}

// ---- hooked-weight battery ---------------------------------------------

SawyerReport sawyer_conditions(const BiTreeTopology& topo, const MassFunction& mu,
                               const WeightFunction& w) {
  const auto* hook = std::get_if<HookedWeight>(&w.structure());
  if (!hook) throw TagError("sawyer_conditions requires a hooked weight, got " + w.tag_name());
  SawyerReport out;
  out.anchor = hook->anchor;
  const auto adj = hardy_adjoint(topo, mu.values());
  const auto iw = hardy_forward(topo, w.values());
  std::vector<double> t(topo.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = mu[i] * iw[i] * iw[i];
  const auto a2_num = hardy_forward(topo, t);
  const auto a3_num = hardy_adjoint(topo, energy_density(topo, mu.values(), w.values()));
  for (auto b : topo.ancestors(hook->anchor)) {
    out.a1_sq = std::max(out.a1_sq, adj[b] * iw[b]);
    out.a2_sq = std::max(out.a2_sq, safe_ratio(a2_num[b], iw[b]));
    out.a3_sq = std::max(out.a3_sq, safe_ratio(a3_num[b], adj[b]));
  }
  return out;
}

// ---- chain ------------------------------------------------------------

namespace {

void check_leq(const ConstantReport& a, const ConstantReport& b) {
  const double slack = kChainSlack * std::max({std::abs(a.value), std::abs(b.value), 1e-300});
  if (a.value > b.value + slack) {
    throw InvariantError("forward chain violated: " + to_string(a.kind) + " = " +
                         std::to_string(a.value) + " exceeds " + to_string(b.kind) + " = " +
                         std::to_string(b.value));
  }
}

}  // namespace

ChainReport verify_chain(const BiTreeTopology& topo, const MassFunction& mu,
                         const WeightFunction& w, std::uint64_t seed) {
  ChainReport c;
  c.box = box_constant(topo, mu, w);
  c.carleson = carleson_constant(topo, mu, w, CarlesonMethod::ExactMincut);
  if (mu.support().size() <= kMaxHereditaryEnumSupport) {
    c.hereditary = hereditary_constant(topo, mu, w, HereditaryMethod::ExactEnum);
  } else {
    LocalSearchOptions opt;
    opt.seed = seed;
    if (c.carleson.witness_downset) {
      std::vector<std::size_t> seed_set;
      for (auto i : mu.support()) {
        if (c.carleson.witness_downset->contains(i)) seed_set.push_back(i);
      }
      opt.extra_seeds.push_back(std::move(seed_set));
    }
    c.hereditary = hereditary_constant(topo, mu, w, HereditaryMethod::LocalSearch, opt);
  }
  c.embedding = embedding_constant(topo, mu, w);
  check_leq(c.box, c.carleson);
  check_leq(c.carleson, c.hereditary);
  check_leq(c.hereditary, c.embedding);
  c.c_over_box = safe_ratio(c.carleson.value, c.box.value);
  c.hc_over_c = safe_ratio(c.hereditary.value, c.carleson.value);
  c.ce_over_hc = safe_ratio(c.embedding.value, c.hereditary.value);
  c.ce_over_box = safe_ratio(c.embedding.value, c.box.value);
  return c;
}

double reevaluate_witness(const BiTreeTopology& topo, const MassFunction& mu,
                          const WeightFunction& w, const ConstantReport& report) {
  switch (report.kind) {
    case ConstantKind::Box: {
      if (!report.witness_node) return 0.0;
      return safe_ratio(energy_box(topo, mu.values(), w.values(), *report.witness_node),
                        hardy_adjoint(topo, mu.values())[*report.witness_node]);
    }
    case ConstantKind::Carleson: {
      if (!report.witness_downset) return 0.0;
      const auto& mask = report.witness_downset->mask();
      return safe_ratio(energy_on(topo, mu.values(), w.values(), mask),
                        masked_sum(mu.values(), mask));
    }
    case ConstantKind::HereditaryCarleson:
      return restricted_energy_ratio(topo, mu, w, report.witness_subset);
    case ConstantKind::CarlesonEmbedding: {
      std::vector<double> psi(topo.size(), 0.0);
      for (std::size_t k = 0; k < report.support.size(); ++k) {
        psi[report.support[k]] = report.witness_function[k];
      }
      return embedding_quotient(topo, mu, w, psi);
    }
  }
  return 0.0;
}

}  // namespace bitree
