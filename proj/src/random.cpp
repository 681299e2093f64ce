#include "bitree/random.hpp"

#include "bitree/error.hpp"

namespace bitree {

namespace {

double dyadic(Rng& rng, int levels, int denom) {
  std::uniform_int_distribution<int> d(1, levels);
  return static_cast<double>(d(rng)) / denom;
}

std::vector<double> random_axis(std::size_t n, Rng& rng, double zero_prob) {
  std::bernoulli_distribution zero(zero_prob);
  std::vector<double> v(n);
  for (auto& x : v) x = zero(rng) ? 0.0 : dyadic(rng, 8, 4);
  return v;
}

}  // namespace

MassFunction random_mass(const BiTreeTopology& topo, Rng& rng, const RandomMassOptions& opt) {
  std::vector<std::size_t> eligible;
  if (opt.boundary_only) {
    eligible = topo.boundary();
  } else {
    eligible.resize(topo.size());
    for (std::size_t i = 0; i < eligible.size(); ++i) eligible[i] = i;
  }
  std::vector<double> v(topo.size(), 0.0);
  std::bernoulli_distribution on(opt.density);
  bool any = false;
  for (auto i : eligible) {
    if (on(rng)) {
      v[i] = dyadic(rng, opt.levels, opt.levels_denominator);
      any = true;
    }
  }
  if (!any) {
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    v[eligible[pick(rng)]] = dyadic(rng, opt.levels, opt.levels_denominator);
  }
  return MassFunction(topo, std::move(v));
}

WeightFunction random_product_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob) {
  auto wx = random_axis(topo.tree_x().size(), rng, zero_prob);
  auto wy = random_axis(topo.tree_y().size(), rng, zero_prob);
  return WeightFunction::product(topo, std::move(wx), std::move(wy));
}

WeightFunction random_general_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob) {
  return WeightFunction(topo, random_axis(topo.size(), rng, zero_prob));
}

WeightFunction random_hooked_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob) {
  const auto bnd = topo.boundary();
  std::uniform_int_distribution<std::size_t> pick(0, bnd.size() - 1);
  const std::size_t anchor = bnd[pick(rng)];
  std::bernoulli_distribution zero(zero_prob);
  std::vector<double> v(topo.size(), 0.0);
  for (auto a : topo.ancestors(anchor)) v[a] = zero(rng) ? 0.0 : dyadic(rng, 8, 4);
  return WeightFunction::hooked(topo, anchor, std::move(v));
}

WeightFunction random_weight(const BiTreeTopology& topo, Rng& rng, const std::string& kind) {
  if (kind == "product") return random_product_weight(topo, rng);
  if (kind == "general") return random_general_weight(topo, rng);
  if (kind == "hooked") return random_hooked_weight(topo, rng);
  throw ParseError("unknown random weight distribution '" + kind + "'");
}

}  // namespace bitree
