#include <doctest.h>

#include <cmath>

#include "bitree/error.hpp"
#include "bitree/hardy.hpp"
#include "bitree/majorize.hpp"
#include "bitree/random.hpp"
#include "instances.hpp"

using namespace bitree;
using namespace instances;

TEST_CASE("superadditivity") {
  TreeTopology t(4);
  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    CHECK(is_superadditive(t, tree_hardy_adjoint(t, random_nonneg(t.size(), rng))).ok);
  }
  std::vector<double> leaf(t.size(), 0.0);
  leaf[t.first_leaf() + 3] = 1.0;
  const auto bad = is_superadditive(t, leaf);
  CHECK_FALSE(bad.ok);
  CHECK(*bad.violation == TreeTopology::parent(t.first_leaf() + 3));

  for (int k = 0; k < 50; ++k) {
    const auto g = random_nonneg(t.size(), rng, 0.5);
    bool brute = true;
    for (std::size_t b = 0; b < t.size() && !t.is_leaf(b); ++b) {
      brute = brute && g[b] >= g[2 * b + 1] + g[2 * b + 2];
    }
    bool brute_all = true;
    for (std::size_t b = 0; b < t.size(); ++b) {
      if (!t.is_leaf(b)) brute_all = brute_all && g[b] >= g[2 * b + 1] + g[2 * b + 2];
    }
    CHECK(is_superadditive(t, g).ok == brute_all);
  }

  BiTreeTopology bt(2, 3);
  const auto mu = random_mass(bt, rng);
  CHECK(is_superadditive(bt, hardy_adjoint(bt, mu.values())).ok);
}

TEST_CASE("l1-linf lemma") {
  TreeTopology t(3);
  Rng rng(22);
  const auto g = tree_hardy_adjoint(t, random_nonneg(t.size(), rng));
  const auto zero = check_l1linf(t, g, std::vector<double>(t.size(), 0.0), 0);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  const auto h = random_nonneg(t.size(), rng);
  const std::size_t leaf = t.first_leaf() + 2;
  const auto at_leaf = check_l1linf(t, g, h, leaf);
  CHECK(at_leaf.lhs == doctest::Approx(g[leaf] * h[leaf]));
  CHECK(at_leaf.rhs == doctest::Approx(g[leaf] * h[leaf]));
  for (int k = 0; k < 100; ++k) {
    const auto gg = tree_hardy_adjoint(t, random_nonneg(t.size(), rng));
    const auto hh = random_nonneg(t.size(), rng);
    for (std::size_t b = 0; b < t.size(); ++b) {
      const auto s = check_l1linf(t, gg, hh, b);
      CHECK(s.lhs <= s.rhs * (1 + 1e-12));
    }
  }
  std::vector<double> leafy(t.size(), 0.0);
  leafy[t.first_leaf()] = 1.0;
  CHECK_THROWS_AS(check_l1linf(t, leafy, h, 0), PreconditionError);
}

TEST_CASE("positive-kernel lemma") {
  const std::size_t n = 5;
  std::vector<double> id(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1.0;
  Rng rng(23);
  const auto f = random_nonneg(n, rng, 0.0);
  const auto e = check_positive_kernel(id, n, n, f, std::vector<double>(n, 1.0));
  CHECK(e.lhs == doctest::Approx(e.rhs));

  const auto ones = check_positive_kernel(std::vector<double>(n * n, 1.0), n, n,
                                          std::vector<double>(n, 1.0), std::vector<double>(n, 1.0));
  CHECK(ones.lhs == doctest::Approx(125.0));
  CHECK(ones.rhs == doctest::Approx(125.0));

  for (int k = 0; k < 200; ++k) {
    std::uniform_int_distribution<std::size_t> dim(1, 8);
    const std::size_t r = dim(rng);
    const std::size_t c = dim(rng);
    const auto s = check_positive_kernel(random_nonneg(r * c, rng), r, c, random_nonneg(c, rng),
                                         random_nonneg(r, rng));
    CHECK(s.lhs <= s.rhs * (1 + 1e-12) + 1e-300);
  }
  std::vector<double> neg = id;
  neg[1] = -1.0;
  CHECK_THROWS_AS(check_positive_kernel(neg, n, n, f, f), PreconditionError);
}

TEST_CASE("tree majorant: contracts on random admissible instances") {
  Rng rng(24);
  double worst_energy = 0.0;
  for (int k = 0; k < 300; ++k) {
    TreeTopology t(1 + k % 5);
    const auto in = random_tree_instance(t, rng);
    MajorantResult<double> r;
    REQUIRE_NOTHROW(r = majorant_tree(t, in.g, in.f, in.w, in.lambda, in.delta));
    CHECK(r.energy_in <= 2.0 * in.delta / in.lambda * r.energy_ref * (1 + 1e-10));
    worst_energy = std::max(worst_energy, r.energy_ratio);
    for (double p : r.phi) CHECK(p >= 0.0);
  }
  MESSAGE("max energy ratio int w phi^2 / ((delta/lambda) int w f^2): " << worst_energy);
  CHECK(worst_energy <= 2.0 + 1e-10);
}

TEST_CASE("tree majorant: exact in rational arithmetic, and f = 0") {
  Rng rng(25);
  for (int k = 0; k < 40; ++k) {
    TreeTopology t(2 + k % 3);
    const auto in = random_tree_instance(t, rng);
    const auto g = to_rational(in.g);
    const auto f = to_rational(in.f);
    const auto w = to_rational(in.w);
    REQUIRE_NOTHROW(majorant_tree<Rational>(t, g, f, w, Rational(in.lambda), Rational(in.delta)));
    const auto z = majorant_tree<Rational>(t, g, std::vector<Rational>(t.size(), Rational(0)), w,
                                           Rational(in.lambda), Rational(in.delta));
    for (const auto& p : z.phi) CHECK(p == 0);
  }
}

TEST_CASE("tree majorant on a path: telescoping by hand") {
  // Point mass at a leaf of a depth-3 tree, w = 1: g = 1 on the leaf's
  // ancestors, I(wg) at generation j equals j + 1.
  TreeTopology t(3);
  std::vector<double> nu(t.size(), 0.0);
  const std::size_t leaf = t.first_leaf();
  nu[leaf] = 1.0;
  const auto g = tree_hardy_adjoint(t, nu);
  const std::vector<double> w(t.size(), 1.0);
  std::vector<double> f(t.size(), 0.0);
  f[0] = 2.0;  // I(wg)(root) = 1 <= delta
  const double delta = 1.0;
  const double lambda = 4.0;
  const auto r = majorant_tree(t, g, f, w, lambda, delta);
  // phi = I(wf) g / lambda = 2 / 4 on generations 1..3 of the path.
  for (std::size_t a = leaf;; a = TreeTopology::parent(a)) {
    CHECK(r.phi[a] == (TreeTopology::is_root(a) ? 0.0 : 0.5));
    if (TreeTopology::is_root(a)) break;
  }
  // Band (2, 8]: the leaf (I(wg) = 4) and its parent (3). At the leaf,
  // I(w phi) = 1.5 = I(wf) (4 - 1) / 4.
  CHECK(r.band[leaf]);
  const auto iphi = tree_hardy_forward(t, r.phi);
  CHECK(iphi[leaf] == doctest::Approx(2.0 * (4.0 - 1.0) / 4.0));
}

TEST_CASE("tree majorant preconditions") {
  TreeTopology t(2);
  const std::vector<double> w(t.size(), 1.0);
  std::vector<double> g(t.size(), 0.0);
  g[t.first_leaf()] = 1.0;
  CHECK_THROWS_AS(majorant_tree(t, g, w, w, 4.0, 1.0), PreconditionError);
  const auto ok_g = tree_hardy_adjoint(t, std::vector<double>(t.size(), 1.0));
  CHECK_THROWS_AS(majorant_tree(t, ok_g, w, w, 3.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(majorant_tree(t, ok_g, w, w, 400.0, 1.0), PreconditionError);  // f off U
}

TEST_CASE("bi-tree majorant: energy constant 2 and lower constant 1/8") {
  Rng rng(26);
  double worst_energy = 0.0;
  double worst_lower = INFINITY;
  int banded = 0;
  for (int k = 0; k < 150; ++k) {
    BiTreeTopology t(1 + k % 4, 1 + (k / 4) % 4);
    const auto in = random_bitree_instance(t, rng);
    MajorantResult<double> r;
    REQUIRE_NOTHROW(r = majorant_bitree(t, in.m, in.w, in.lambda, in.delta));
    worst_energy = std::max(worst_energy, r.energy_ratio);
    if (std::isfinite(r.achieved_lower_const)) {
      ++banded;
      worst_lower = std::min(worst_lower, r.achieved_lower_const);
    }
  }
  for (int k = 0; k < 60; ++k) {
    const int depth = 4 + k % 2;
    const auto in = antichain_instance(depth, rng);
    BiTreeTopology t(depth, depth);
    MajorantResult<double> r;
    REQUIRE_NOTHROW(r = majorant_bitree(t, in.m, in.w, in.lambda, in.delta));
    worst_energy = std::max(worst_energy, r.energy_ratio);
    if (std::isfinite(r.achieved_lower_const)) {
      ++banded;
      worst_lower = std::min(worst_lower, r.achieved_lower_const);
    }
  }
  MESSAGE("bi-tree majorant: max energy ratio " << worst_energy << ", min lower ratio "
                                                << worst_lower << " over " << banded << " banded instances");
  CHECK(worst_energy <= 2.0 + 1e-10);
  CHECK(worst_lower >= kBitreeLowerConst);
  CHECK(banded > 20);
}

TEST_CASE("bi-tree majorant: zero m, hand slices, tag check") {
  BiTreeTopology t(1, 1);
  const auto w = WeightFunction::constant(t, 1.0);
  const auto z = majorant_bitree(t, std::vector<double>(t.size(), 0.0), w, 4.0, 1.0);
  for (double p : z.phi) CHECK(p == 0.0);

  // Point mass 1 at boundary (1,0)x(1,0); w = 1; m = I* mu on the up-set where V <= delta.
  std::vector<double> mu(t.size(), 0.0);
  const std::size_t om = t.index(1, 0, 1, 0);
  mu[om] = 1.0;
  // V at omega's ancestors: V(a) = #(ancestors of a), i.e. (gx+1)(gy+1) for a >= omega.
  // delta = 2 keeps the root (1) and the two generation-(1,0)/(0,1) ancestors (2).
  const auto v = potential(t, mu, w.values());
  const auto adj = hardy_adjoint(t, mu);
  std::vector<double> m(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (v[i] <= 2.0) m[i] = adj[i];
  }
  CHECK(m[t.index(0, 0, 0, 0)] == 1.0);
  CHECK(m[t.index(1, 0, 0, 0)] == 1.0);
  CHECK(m[t.index(0, 0, 1, 0)] == 1.0);
  CHECK(m[om] == 0.0);
  // Slice y = root: g = f = 1 on x in {root, (1,0)}, I(wg) <= 2 = delta, so phi = 0.
  // Slice y = (1,0): g = (2, 1, 0) on x = root, (1,0), (1,1); I(wg) = (2, 3, 2).
  // Only x = (1,0) has delta < I(wg); there I(wf) = 1, g = 1, phi = 1 / lambda.
  const auto r = majorant_bitree(t, m, w, 8.0, 2.0);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(r.phi[i] == (i == om ? 0.125 : 0.0));

  Rng rng(27);
  CHECK_THROWS_AS(majorant_bitree(t, m, random_general_weight(t, rng), 8.0, 2.0), TagError);
}

TEST_CASE("bi-tree majorant: rational replay") {
  Rng rng(28);
  for (int k = 0; k < 20; ++k) {
    BiTreeTopology t(2, 2);
    const auto in = random_bitree_instance(t, rng);
    REQUIRE_NOTHROW(majorant_bitree<Rational>(t, to_rational(in.m), in.w, Rational(in.lambda),
                                              Rational(in.delta)));
  }
}

TEST_CASE("balance: point mass closed form") {
  BiTreeTopology t(3, 2);
  const std::size_t om = t.boundary()[5];
  std::vector<double> nu(t.size(), 0.0);
  nu[om] = 2.0;
  const std::vector<double> w(t.size(), 1.0);
  const double e = energy(t, nu, w);
  CHECK(e == 4.0 * 4 * 3);  // c^2 (N_x+1)(N_y+1)
  const double a = e / 2.0;
  const auto r = balance(t, nu, w, a);
  const auto v = potential(t, nu, w);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(r.e_tilde.contains(i) == (v[i] > a / 3));
  CHECK(r.iterations == 2);
  CHECK(r.energy_after == e);
}

TEST_CASE("balance: guarantees on random instances, exact replay") {
  Rng rng(29);
  for (int k = 0; k < 100; ++k) {
    BiTreeTopology t(1 + k % 3, 1 + (k / 3) % 3);
    const auto nu = random_mass(t, rng, {.boundary_only = k % 2 == 0});
    const auto w = random_general_weight(t, rng);
    const double e = energy(t, nu.values(), w.values());
    if (e <= 0.0) continue;
    std::uniform_int_distribution<int> num(1, 64);
    const double a = e / nu.total_mass() * num(rng) / 64.0 * (1 - 1e-12);
    const auto r = balance(t, nu.values(), w.values(), a);
    CHECK(3.0 * r.energy_after >= e * (1 - 1e-12));
    if (k % 10 == 0) {
      const auto nq = to_rational(nu.span());
      const auto wq = to_rational(w.span());
      const Rational aq = energy(t, nq, wq) / sum_of(nq);
      REQUIRE_NOTHROW(balance(t, nq, wq, aq));
    }
  }
  BiTreeTopology t(1, 1);
  const std::vector<double> zero(t.size(), 0.0);
  CHECK_THROWS_AS(balance(t, zero, std::vector<double>(t.size(), 1.0), 1.0), PreconditionError);
}

TEST_CASE("pointwise dichotomy with general weights") {
  Rng rng(30);
  for (int k = 0; k < 100; ++k) {
    BiTreeTopology t(1 + k % 4, 1 + (k / 4) % 3);
    const auto mu = random_mass(t, rng, {.boundary_only = k % 2 == 0});
    const auto w = random_general_weight(t, rng);
    const auto v = potential(t, mu.values(), w.values());
    std::uniform_real_distribution<double> u(0.0, *std::max_element(v.begin(), v.end()));
    const double eps = u(rng) + 1e-9;
    const auto d = check_dichotomy(t, mu.values(), w.values(), eps);
    CHECK(d.holds);
  }
}

TEST_CASE("truncated-energy ratio") {
  Rng rng(31);
  BiTreeTopology t(3, 3);
  for (int k = 0; k < 20; ++k) {
    const auto mu = random_mass(t, rng);
    const auto rho = random_mass(t, rng);
    const auto w = random_product_weight(t, rng);
    const auto v = potential(t, mu.values(), w.values());
    const double vmax = *std::max_element(v.begin(), v.end());

    // delta >= max V and rho = mu: ratio = E[mu] / (delta |mu|).
    const auto full = cEcE_ratio(t, mu, mu, w, vmax);
    const double e = energy(t, mu.values(), w.values());
    CHECK(full.ratio == doctest::Approx(e / (vmax * mu.total_mass())).epsilon(1e-12));

    std::uniform_real_distribution<double> u(0.05, 1.0);
    const double delta = vmax * u(rng);
    const auto base = cEcE_ratio(t, mu, rho, w, delta);
    const auto joint = cEcE_ratio(t, mu.scaled(4.0), rho, w, 4.0 * delta);
    CHECK(joint.ratio == doctest::Approx(base.ratio).epsilon(1e-10));
    const auto rs = cEcE_ratio(t, mu, rho.scaled(0.25), w, delta);
    CHECK(rs.ratio == doctest::Approx(base.ratio).epsilon(1e-10));
    // Cauchy-Schwarz always holds.
    CHECK(base.integral <= std::sqrt(base.energy_delta * base.energy_rho) * (1 + 1e-12));
  }
  BiTreeTopology line(6, 0);
  for (int k = 0; k < 20; ++k) {
    const auto mu = random_mass(line, rng);
    const auto rho = random_mass(line, rng);
    const auto w = random_product_weight(line, rng);
    const double delta = 0.5;
    const auto r = cEcE_ratio(line, mu, rho, w, delta);
    CHECK(r.integral <= delta * rho.total_mass() * (1 + 1e-12));
    CHECK(r.integral <= std::sqrt(r.energy_delta * r.energy_rho) * (1 + 1e-12));
  }
  const auto mu = random_mass(t, rng);
  CHECK_THROWS_AS(cEcE_ratio(t, mu, mu, random_general_weight(t, rng), 1.0), TagError);
}
