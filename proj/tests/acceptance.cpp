// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "bitree/constants.hpp"
#include "bitree/error.hpp"
#include "bitree/extremal.hpp"
#include "bitree/hardy.hpp"
#include "bitree/majorize.hpp"
#include "bitree/maximal.hpp"
#include "bitree/random.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace bitree;

namespace {

// Pinned thresholds.
constexpr double kOracleCarlesonTol = 1e-9;
constexpr double kOracleEigenTol = 1e-8;
constexpr double kChainTol = 1e-9;
constexpr double kCriterion1Seconds = 120.0;
constexpr double kCriterion3Seconds = 300.0;
constexpr double kC1 = 1.0 / 8.0;
constexpr double kC2 = 27.0;
constexpr double kC3 = 1.0 / 864.0;
constexpr double kC4 = 54.0;
constexpr double kCrossCheckTol = 1e-12;
constexpr double kTreeMaximalBound = 4.0 + 1e-6;
constexpr double kProductMaximalBound = 16.0 + 1e-6;
constexpr double kSignTestAlpha = 0.05;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b)});
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double dense_top_eigenvalue(const BiTreeTopology& t, const MassFunction& mu, const WeightFunction& w) {
  const auto supp = mu.support();
  const auto n = static_cast<Eigen::Index>(supp.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double k = 0.0;
      for (std::size_t a = 0; a < t.size(); ++a) {
        if (oracle::contained(t, supp[i], a) && oracle::contained(t, supp[j], a)) k += w[a];
      }
      b(i, j) = std::sqrt(mu[supp[i]] * mu[supp[j]]) * k;
    }
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b).eigenvalues().maxCoeff();
}

struct SuiteInstance {
  BiTreeTopology topo{0, 0};
  MassFunction mu;
  WeightFunction w;
};

std::vector<SuiteInstance> small_suite() {
  const std::vector<std::pair<int, int>> depths = {{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {1, 2}, {3, 0}, {0, 3}};
  const char* kinds[] = {"product", "general", "hooked"};
  Rng rng(1);
  std::vector<SuiteInstance> out;
  for (int k = 0; k < 240; ++k) {
    const auto [dx, dy] = depths[k % depths.size()];
    SuiteInstance s;
    s.topo = BiTreeTopology(dx, dy);
    RandomMassOptions opt;
    // interior masses only where the definitional hereditary enumeration stays small
    opt.boundary_only = s.topo.size() > 9 || k % 2 == 0;
    s.mu = random_mass(s.topo, rng, opt);
    s.w = random_weight(s.topo, rng, kinds[(k / depths.size()) % 3]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SuiteInstance> large_suite() {
  const std::vector<std::pair<int, int>> depths = {{2, 2}, {3, 2}, {3, 3}, {4, 2}};
  const char* kinds[] = {"product", "general", "hooked"};
  Rng rng(2);
  std::vector<SuiteInstance> out;
  for (int k = 0; k < 60; ++k) {
    const auto [dx, dy] = depths[k % depths.size()];
    SuiteInstance s;
    s.topo = BiTreeTopology(dx, dy);
    RandomMassOptions opt;
    opt.boundary_only = k % 2 == 0;
    opt.density = 0.4;
    s.mu = random_mass(s.topo, rng, opt);
    s.w = random_weight(s.topo, rng, kinds[k % 3]);
    out.push_back(std::move(s));
  }
  return out;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto suite = small_suite();
  std::vector<std::vector<std::vector<char>>> downsets;
  std::vector<std::pair<int, int>> cached;
  double worst_c = 0.0, worst_ce = 0.0, worst_hc = 0.0;
  for (const auto& s : suite) {
    const std::pair<int, int> key{s.topo.depth_x(), s.topo.depth_y()};
    auto it = std::find(cached.begin(), cached.end(), key);
    if (it == cached.end()) {
      cached.push_back(key);
      downsets.push_back(oracle::all_down_sets(s.topo));
      it = cached.end() - 1;
    }
    const auto& ds = downsets[static_cast<std::size_t>(it - cached.begin())];
    worst_c = std::max(worst_c, rel(carleson_constant(s.topo, s.mu, s.w).value,
                                    oracle::carleson(s.topo, s.mu.values(), s.w.values(), ds)));
    worst_ce = std::max(worst_ce, rel(embedding_constant(s.topo, s.mu, s.w).value, dense_top_eigenvalue(s.topo, s.mu, s.w)));
    worst_hc = std::max(worst_hc, rel(hereditary_constant(s.topo, s.mu, s.w, HereditaryMethod::ExactEnum).value,
                                      oracle::hereditary(s.topo, s.mu.values(), s.w.values())));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = suite.size() >= 200 && worst_c <= kOracleCarlesonTol && worst_ce <= kOracleEigenTol &&
           worst_hc <= kOracleCarlesonTol && secs < kCriterion1Seconds;
  o.detail = std::to_string(suite.size()) + " instances; max rel err C " + fmt("%.2e", worst_c) + ", CE " +
             fmt("%.2e", worst_ce) + ", HC " + fmt("%.2e", worst_hc) + "; " + fmt("%.1f s", secs);
  return o;
}

Outcome criterion2() {
  auto suite = small_suite();
  for (auto& s : large_suite()) suite.push_back(std::move(s));
  int violations = 0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const auto& s = suite[k];
    const auto c = verify_chain(s.topo, s.mu, s.w, k);
    const auto leq = [](double a, double b) { return a <= b + kChainTol * std::max(std::abs(a), std::abs(b)); };
    if (!leq(c.box.value, c.carleson.value) || !leq(c.carleson.value, c.hereditary.value) ||
        !leq(c.hereditary.value, c.embedding.value)) {
      ++violations;
    }
  }
  return {violations == 0, std::to_string(suite.size()) + " instances, " + std::to_string(violations) + " violations"};
}

std::vector<double> g_simple_ratio;  // HC witness / C for N = 2..8, reused by criterion 8

Outcome criterion3() {
  Outcome o;
  double worst_c = 0.0, secs8 = 0.0;
  g_simple_ratio.clear();
  for (int n = 2; n <= 8; ++n) {
    const auto t0 = Clock::now();
    const auto inst = simple_car_not_rec(n);
    const auto mu = to_rational(inst.mu.span());
    const auto w = to_rational(inst.w.span());
    const Rational hc = restricted_energy_ratio_exact(inst.topo, mu, w, {inst.omega0});
    const auto car = carleson_constant_exact(inst.topo, mu, w);
    if (n == 8) secs8 = seconds_since(t0);
    if (hc != n + 1) {
      o.pass = false;
      o.detail += "witness at N=" + std::to_string(n) + " is " + hc.str() + "; ";
    }
    if (car.value > 4) o.pass = false;
    worst_c = std::max(worst_c, to_double(car.value));
    g_simple_ratio.push_back(to_double(Rational(hc / car.value)));
  }
  if (secs8 >= kCriterion3Seconds) o.pass = false;
  o.detail += "witness = N+1 exactly for N=2..8; max exact C " + fmt("%.6g", worst_c) + " (<= 4); N=8 in " +
              fmt("%.2f s", secs8);
  return o;
}

StructuredNode dense_node(const BiTreeTopology& t, std::size_t i) {
  const BiNode n = t.node(i);
  return {DyadicAxis::from_offset(TreeTopology::generation(n.x), TreeTopology::offset(n.x)),
          DyadicAxis::from_offset(TreeTopology::generation(n.y), TreeTopology::offset(n.y))};
}

Outcome criterion4() {
  Outcome o;
  double min_c1 = INFINITY, max_v = 0.0;
  for (int n : {64, 256, 1024}) {
    const auto c = upset_car_not_rec(n);
    const double v0 = structured_potential(c, omega0_node(n));
    min_c1 = std::min(min_c1, v0 / std::floor(std::log2(n)));
    for (const auto& piece : c.pieces) {
      if (piece.origin_atom) continue;
      for (const auto& node : sample_support(c, piece, static_cast<std::uint64_t>(n))) {
        max_v = std::max(max_v, structured_potential(c, node));
      }
    }
    for (const auto& q : c.q[0]) max_v = std::max(max_v, structured_potential(c, origin_node(q)));
  }
  const auto c8 = upset_car_not_rec(8);
  const auto dense = materialize(c8, PieceSelection::quadrants());
  const auto v = potential(dense.topo, dense.mu.values(), dense.w.values());
  double worst = 0.0;
  for (std::size_t i = 0; i < dense.topo.size(); ++i) {
    worst = std::max(worst, std::abs(v[i] - structured_potential(c8, dense_node(dense.topo, i))) / std::max(1.0, std::abs(v[i])));
  }
  o.pass = min_c1 >= kC1 && max_v <= kC2 && worst <= kCrossCheckTol;
  o.detail = "min V(omega0)/floor(log2 N) " + fmt("%.4f", min_c1) + " (c1 = 1/8); max V " + fmt("%.4f", max_v) +
             " (C2 = 27); dense N=8 max rel diff " + fmt("%.1e", worst);
  return o;
}

Outcome criterion5() {
  Outcome o;
  double min_ratio = INFINITY, max_s = 0.0;
  for (int n : {64, 256, 1024}) {
    const auto c = rec_not_embedding(n);
    const auto t = embedding_lower_test(c);
    min_ratio = std::min(min_ratio, t.ratio / std::log2(static_cast<double>(c.m)));
    for (const auto& piece : c.pieces) {
      for (const auto& node : sample_support(c, piece, static_cast<std::uint64_t>(n))) {
        max_s = std::max(max_s, rec_surrogate(c, piece.family, node));
      }
    }
  }
  o.pass = min_ratio >= kC3 && max_s <= kC4;
  o.detail = "min ratio/log2 M " + fmt("%.4f", min_ratio) + " (c3 = 1/864); max REC surrogate " + fmt("%.4f", max_s) +
             " (C4 = 54)";
  return o;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(6);
  // balance
  int balanced = 0;
  double min_pot = INFINITY, min_keep = INFINITY;
  for (int k = 0; balanced < 500; ++k) {
    BiTreeTopology t(1 + k % 3, 1 + (k / 3) % 3);
    RandomMassOptions opt;
    opt.boundary_only = k % 2 == 0;
    const auto nu = random_mass(t, rng, opt);
    const auto w = random_general_weight(t, rng);
    const double e = energy(t, nu.values(), w.values());
    if (e <= 0.0) continue;
    std::uniform_int_distribution<int> num(1, 64);
    const double a = e / nu.total_mass() * num(rng) / 64.0 * (1 - 1e-12);
    const auto r = balance(t, nu.values(), w.values(), a);
    const auto v = potential(t, r.nu_tilde, w.values());
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (r.e_tilde.contains(i)) min_pot = std::min(min_pot, v[i] / (a / 3));
    }
    min_keep = std::min(min_keep, 3.0 * oracle::energy(t, r.nu_tilde, w.values()) / e);
    ++balanced;
  }
  // dichotomy
  int dichotomy_fail = 0;
  for (int k = 0; k < 500; ++k) {
    BiTreeTopology t(1 + k % 4, 1 + (k / 4) % 3);
    RandomMassOptions opt;
    opt.boundary_only = k % 2 == 0;
    const auto mu = random_mass(t, rng, opt);
    const auto w = random_general_weight(t, rng);
    const auto v = potential(t, mu.values(), w.values());
    std::uniform_real_distribution<double> u(0.0, *std::max_element(v.begin(), v.end()));
    if (!check_dichotomy(t, mu.values(), w.values(), u(rng) + 1e-9).holds) ++dichotomy_fail;
  }
  // tree majorant, exact
  int tree_fail = 0;
  Rational worst_tree_energy = 0;
  for (int k = 0; k < 500; ++k) {
    const int d = 1 + k % 5;
    TreeTopology tr(d);
    BiTreeTopology as_bi(d, 0);
    const auto in = instances::random_tree_instance(tr, rng);
    const auto g = to_rational(in.g), f = to_rational(in.f), w = to_rational(in.w);
    const Rational lambda(in.lambda), delta(in.delta);
    const auto r = majorant_tree<Rational>(tr, g, f, w, lambda, delta);
    const auto ig = oracle::ancestor_sum(as_bi, pointwise_product(w, g));
    const auto iff = oracle::ancestor_sum(as_bi, pointwise_product(w, f));
    const auto iphi = oracle::ancestor_sum(as_bi, pointwise_product(w, r.phi));
    for (std::size_t om = 0; om < tr.size(); ++om) {
      if (!(lambda / 2 < ig[om] && ig[om] <= 2 * lambda)) continue;
      // nearest ancestor with I(wg) <= delta
      Rational tail = 0;
      int best_gen = -1;
      for (std::size_t a = 0; a < tr.size(); ++a) {
        if (oracle::contained(as_bi, om, a) && ig[a] <= delta && TreeTopology::generation(a) > best_gen) {
          best_gen = TreeTopology::generation(a);
          tail = ig[a];
        }
      }
      if (lambda * iphi[om] != iff[om] * (ig[om] - tail)) ++tree_fail;
    }
    Rational ein = 0, eref = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      ein += w[i] * r.phi[i] * r.phi[i];
      eref += w[i] * f[i] * f[i];
    }
    if (ein > 2 * delta / lambda * eref) ++tree_fail;
    if (eref > 0) worst_tree_energy = std::max(worst_tree_energy, Rational(ein / (delta / lambda * eref)));
  }
  // bi-tree majorant, product weights
  int bi_fail = 0, bi_count = 0;
  double worst_bi = 0.0;
  for (int k = 0; k < 240; ++k) {
    instances::BiInstance in;
    BiTreeTopology t(1 + k % 4, 1 + (k / 4) % 4);
    if (k % 4 == 3) {
      const int depth = 4 + (k / 4) % 2;
      t = BiTreeTopology(depth, depth);
      in = instances::antichain_instance(depth, rng);
    } else {
      in = instances::random_bitree_instance(t, rng);
    }
    const auto r = majorant_bitree(t, in.m, in.w, in.lambda, in.delta);
    double ein = 0.0, eref = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      ein += in.w[i] * r.phi[i] * r.phi[i];
      eref += in.w[i] * in.m[i] * in.m[i];
    }
    if (ein > 2.0 * in.delta / in.lambda * eref * (1 + 1e-10)) ++bi_fail;
    if (eref > 0) worst_bi = std::max(worst_bi, ein / (in.delta / in.lambda * eref));
    ++bi_count;
  }
  o.pass = min_pot >= 1 - 1e-9 && min_keep >= 1 - 1e-9 && dichotomy_fail == 0 && tree_fail == 0 && bi_fail == 0;
  o.detail = "balance 500: min V/(A/3) " + fmt("%.3f", min_pot) + ", min 3E~/E " + fmt("%.3f", min_keep) +
             "; dichotomy 500: " + std::to_string(dichotomy_fail) + " failures; tree majorant 500 exact: " +
             std::to_string(tree_fail) + " failures, max energy ratio " + fmt("%.3f", to_double(worst_tree_energy)) +
             "; bi-tree majorant " + std::to_string(bi_count) + ": max energy ratio " + fmt("%.3f", worst_bi);
  return o;
}

MassFunction uniform_boundary(const BiTreeTopology& t) {
  std::vector<double> m(t.size(), 0.0);
  for (auto b : t.boundary()) m[b] = 1.0 / static_cast<double>(t.boundary_size());
  return MassFunction(t, m);
}

Outcome criterion7() {
  Outcome o;
  Rng rng(7);
  // exact audits
  int audits = 0, audit_fail = 0;
  for (auto [dx, dy] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}}) {
    BiTreeTopology t(dx, dy);
    for (int k = 0; k < 6; ++k) {
      RandomMassOptions opt;
      opt.boundary_only = k % 2 == 0;
      const auto mu = to_rational(random_mass(t, rng, opt).span());
      std::vector<Rational> psi(t.size());
      std::uniform_int_distribution<int> val(0, 12);
      for (auto& p : psi) p = Rational(val(rng), 4);
      std::vector<std::size_t> supp;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (mu[i] > 0) supp.push_back(i);
      }
      psi[supp[std::uniform_int_distribution<std::size_t>(0, supp.size() - 1)(rng)]] += 1;
      std::vector<std::size_t> order;
      if (k % 3 == 2) {
        order.resize(t.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
      }
      const auto ew = extremal_weight(t, mu, psi, order);
      const auto ipsi = oracle::descendant_sum(t, pointwise_product(psi, mu));
      Rational lhs = 0, rhs = 0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        lhs += ew.maximal[i] * ew.maximal[i] * mu[i];
        rhs += ew.w[i] * ipsi[i] * ipsi[i];
      }
      if (lhs != rhs || carleson_constant_exact(t, mu, ew.w).value > 1) ++audit_fail;
      ++audits;
    }
  }
  // probe bounds
  double tree_max = 0.0, prod_max = 0.0;
  for (int d = 3; d <= 7; ++d) {
    BiTreeTopology t(d, 0);
    for (int k = 0; k < 2; ++k) {
      const auto mu = k == 0 ? uniform_boundary(t) : random_mass(t, rng);
      const auto p = maximal_equivalence_probe(t, mu, 60, 70 + d * 2 + k);
      tree_max = std::max({tree_max, p.embedding_estimate, p.maximal_estimate, p.upper_proxy});
    }
  }
  for (auto [dx, dy] : {std::pair{2, 2}, {3, 2}, {3, 3}}) {
    BiTreeTopology t(dx, dy);
    for (int k = 0; k < 4; ++k) {
      std::uniform_int_distribution<int> val(1, 8);
      std::vector<double> a(t.tree_x().leaf_count()), b(t.tree_y().leaf_count());
      for (auto& v : a) v = val(rng) / 8.0;
      for (auto& v : b) v = val(rng) / 8.0;
      std::vector<double> m(t.size(), 0.0);
      for (auto i : t.boundary()) {
        const BiNode n = t.node(i);
        m[i] = a[n.x - t.tree_x().first_leaf()] * b[n.y - t.tree_y().first_leaf()];
      }
      const auto p = maximal_equivalence_probe(t, MassFunction(t, m), 15, 700 + k);
      prod_max = std::max({prod_max, p.embedding_estimate, p.maximal_estimate, p.upper_proxy});
    }
  }
  // sparse selection vs union-Carleson by subset enumeration
  int collections = 0, mismatch = 0, feasible = 0;
  for (int rep = 0; rep < 120; ++rep) {
    BiTreeTopology t(rep % 2 ? 2 : 3, 2);
    const auto mu = to_rational(random_mass(t, rng).span());
    std::vector<std::size_t> members(t.size());
    std::iota(members.begin(), members.end(), 0);
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(std::uniform_int_distribution<std::size_t>(1, 7)(rng));
    const auto imu = oracle::descendant_sum(t, mu);
    std::vector<Rational> w(t.size(), Rational(0));
    const Rational scale(std::uniform_int_distribution<int>(1, 12)(rng), 8);
    for (auto q : members) {
      if (imu[q] > 0) w[q] = scale * Rational(std::uniform_int_distribution<int>(1, 8)(rng), 8) / imu[q];
    }
    bool condition = true;
    for (std::uint64_t code = 1; code < (std::uint64_t{1} << members.size()); ++code) {
      Rational mass = 0, demand = 0;
      for (std::size_t c = 0; c < t.size(); ++c) {
        bool in = false;
        for (std::size_t j = 0; j < members.size(); ++j) in |= ((code >> j) & 1) && oracle::contained(t, c, members[j]);
        if (in) mass += mu[c];
      }
      for (std::size_t j = 0; j < members.size(); ++j) {
        if ((code >> j) & 1) demand += w[members[j]] * imu[members[j]] * imu[members[j]];
      }
      if (demand > mass) condition = false;
    }
    const auto s = sparse_selection(t, members, w, mu);
    if (s.feasible != condition) ++mismatch;
    feasible += s.feasible;
    ++collections;
  }
  o.pass = audit_fail == 0 && tree_max <= kTreeMaximalBound && prod_max <= kProductMaximalBound && mismatch == 0 &&
           collections >= 100;
  o.detail = std::to_string(audits) + " exact audits, " + std::to_string(audit_fail) + " failures; probe max tree " +
             fmt("%.4f", tree_max) + " (<= 4), product " + fmt("%.4f", prod_max) + " (<= 16); sparse " +
             std::to_string(collections) + " collections (" + std::to_string(feasible) + " feasible), " +
             std::to_string(mismatch) + " mismatches";
  return o;
}

double binomial_two_sided(int k, int n) {
  // P(|X - n/2| >= |k - n/2|), X ~ Bin(n, 1/2)
  const double dev = std::abs(k - n / 2.0);
  double p = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (std::abs(i - n / 2.0) >= dev - 1e-12) {
      p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
    }
  }
  return std::min(1.0, p);
}

Outcome criterion8() {
  constexpr int kBatches = 25;
  constexpr int kPerBatch = 10;
  const std::vector<int> depths = {1, 2, 3, 4};
  std::vector<std::vector<double>> batch_max(kBatches, std::vector<double>(depths.size(), 0.0));
  double overall = 0.0;
  int count = 0;
  for (std::size_t di = 0; di < depths.size(); ++di) {
    const int d = depths[di];
    BiTreeTopology t(d, d);
    Rng rng(8000 + d);
    for (int b = 0; b < kBatches; ++b) {
      for (int k = 0; k < kPerBatch; ++k) {
        const auto mu = random_mass(t, rng);
        const auto w = random_product_weight(t, rng);
        const double box = box_constant(t, mu, w).value;
        const double ce = embedding_constant(t, mu, w).value;
        const double r = safe_ratio(ce, box);
        batch_max[b][di] = std::max(batch_max[b][di], r);
        overall = std::max(overall, r);
        ++count;
      }
    }
  }
  int pos = 0, neg = 0;
  const double xbar = 2.5;
  for (const auto& row : batch_max) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t di = 0; di < depths.size(); ++di) {
      sxy += (depths[di] - xbar) * row[di];
      sxx += (depths[di] - xbar) * (depths[di] - xbar);
    }
    const double slope = sxy / sxx;
    pos += slope > 0;
    neg += slope < 0;
  }
  const double p = binomial_two_sided(pos, pos + neg);
  // contrast: HC witness / C for the simple family
  double contrast = 0.0;
  if (g_simple_ratio.size() >= 2) {
    const double n = static_cast<double>(g_simple_ratio.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < g_simple_ratio.size(); ++i) {
      const double x = static_cast<double>(i + 2);
      sx += x;
      sy += g_simple_ratio[i];
      sxx += x * x;
      sxy += x * g_simple_ratio[i];
    }
    contrast = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  Outcome o;
  o.pass = count >= 1000 && std::isfinite(overall) && p >= kSignTestAlpha && contrast > 0.0;
  o.detail = std::to_string(count) + " instances, max CE/Box " + fmt("%.4f", overall) + "; batch slopes +" +
             std::to_string(pos) + "/-" + std::to_string(neg) + ", sign-test p " + fmt("%.3f", p) +
             "; simple-family HC/C slope in N " + fmt("%.3f", contrast);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", criterion1},     {"forward chain", criterion2},
      {"simple family", criterion3},          {"upset family potentials", criterion4},
      {"embedding separation", criterion5},   {"constructive lemmas", criterion6},
      {"maximal function and selection", criterion7}, {"product-weight envelope", criterion8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
