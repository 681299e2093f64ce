#include "bitree/majorize.hpp"

#include "bitree/constants.hpp"

namespace bitree {

InequalitySides check_l1linf(const TreeTopology& tree, const std::vector<double>& g,
                             const std::vector<double>& h, std::size_t beta) {
  if (auto sa = is_superadditive(tree, g, 1e-12); !sa.ok) {
    throw PreconditionError("check_l1linf: g is not superadditive at node " +
                            std::to_string(*sa.violation));
  }
  InequalitySides out;
  double best_chain = 0.0;
  for (std::size_t a = 0; a < tree.size(); ++a) {
    if (!TreeTopology::leq(a, beta)) continue;
    out.lhs += g[a] * h[a];
    double chain = 0.0;
    for (std::size_t c = a;; c = TreeTopology::parent(c)) {
      chain += h[c];
      if (c == beta) break;
    }
    best_chain = std::max(best_chain, chain);
  }
  out.rhs = g[beta] * best_chain;
  return out;
}

InequalitySides check_positive_kernel(const std::vector<double>& k, std::size_t rows,
                                      std::size_t cols, const std::vector<double>& f,
                                      const std::vector<double>& g) {
  if (k.size() != rows * cols || f.size() != cols || g.size() != rows) {
    throw PreconditionError("check_positive_kernel: dimension mismatch");
  }
  for (double v : k) {
    if (v < 0.0) throw PreconditionError("check_positive_kernel: kernel has a negative entry");
  }
  for (double v : f) {
    if (v < 0.0) throw PreconditionError("check_positive_kernel: f has a negative entry");
  }
  for (double v : g) {
    if (v < 0.0) throw PreconditionError("check_positive_kernel: g has a negative entry");
  }
  std::vector<double> kf(rows, 0.0);
  std::vector<double> ktg(cols, 0.0);
  for (std::size_t x = 0; x < rows; ++x) {
    for (std::size_t y = 0; y < cols; ++y) {
      kf[x] += k[x * cols + y] * f[y];
      ktg[y] += k[x * cols + y] * g[x];
    }
  }
  InequalitySides out;
  double sup = 0.0;
  for (std::size_t x = 0; x < rows; ++x) {
    out.lhs += kf[x] * kf[x] * g[x];
    if (g[x] <= 0.0) continue;
    double kktg = 0.0;
    for (std::size_t y = 0; y < cols; ++y) kktg += k[x * cols + y] * ktg[y];
    sup = std::max(sup, kktg);
  }
  double f2 = 0.0;
  for (double v : f) f2 += v * v;
  out.rhs = sup * f2;
  return out;
}

CecEResult cEcE_ratio(const BiTreeTopology& topo, const MassFunction& mu, const MassFunction& rho,
                      const WeightFunction& w, double delta) {
  if (!w.is_product()) throw TagError("cEcE_ratio requires a product weight, got " + w.tag_name());
  CecEResult r;
  const auto tr = truncated_potential(topo, mu.values(), w.values(), delta);
  r.integral = inner_product(tr.truncated, rho.values());
  r.energy_delta = energy_on(topo, mu.values(), w.values(), tr.level_set);
  r.energy_rho = energy(topo, rho.values(), w.values());
  r.lhs_cubed = r.integral * r.integral * r.integral;
  r.rhs = delta * r.energy_delta * r.energy_rho * rho.total_mass();
  r.ratio = safe_ratio(r.lhs_cubed, r.rhs);
  return r;
}

}  // namespace bitree
