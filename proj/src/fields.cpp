#include "bitree/fields.hpp"

#include <algorithm>
#include <cmath>

#include "bitree/error.hpp"

namespace bitree {

namespace {

void check_nonnegative(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw PreconditionError(std::string(what) + ": expected " + std::to_string(expected) +
                            " values, got " + std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw PreconditionError(std::string(what) + ": entry " + std::to_string(i) +
                              " is negative or not finite");
    }
  }
}

std::vector<double> product_values(const BiTreeTopology& topo, const ProductWeight& p) {
  check_nonnegative(p.wx, topo.tree_x().size(), "product weight x-factor");
  check_nonnegative(p.wy, topo.tree_y().size(), "product weight y-factor");
  std::vector<double> v(topo.size());
  for (std::size_t i = 0; i < topo.size(); ++i) {
    const BiNode n = topo.node(i);
    v[i] = p.wx[n.x] * p.wy[n.y];
  }
  return v;
}

}  // namespace

MassFunction::MassFunction(const BiTreeTopology& topo, std::vector<double> values)
    : values_(std::move(values)) {
  check_nonnegative(values_, topo.size(), "mass");
}

MassFunction MassFunction::zero(const BiTreeTopology& topo) {
  return MassFunction(topo, std::vector<double>(topo.size(), 0.0));
}

double MassFunction::total_mass() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

std::vector<std::size_t> MassFunction::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 0.0) out.push_back(i);
  }
  return out;
}

bool MassFunction::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool MassFunction::is_boundary_supported(const BiTreeTopology& topo) const noexcept {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0 && !topo.is_boundary(i)) return false;
  }
  return true;
}

MassFunction MassFunction::restricted(std::span<const char> mask) const {
  MassFunction out = *this;
  for (std::size_t i = 0; i < out.values_.size(); ++i) {
    if (!mask[i]) out.values_[i] = 0.0;
  }
  return out;
}

MassFunction MassFunction::scaled(double c) const {
  MassFunction out = *this;
  for (double& v : out.values_) v *= c;
  return out;
}

WeightFunction::WeightFunction(const BiTreeTopology& topo, std::vector<double> values)
    : values_(std::move(values)) {
  check_nonnegative(values_, topo.size(), "weight");
}

WeightFunction WeightFunction::product(const BiTreeTopology& topo, std::vector<double> wx,
                                       std::vector<double> wy) {
  ProductWeight p{std::move(wx), std::move(wy)};
  WeightFunction w(topo, product_values(topo, p));
  w.structure_ = std::move(p);
  return w;
}

WeightFunction WeightFunction::sum_of_products(const BiTreeTopology& topo,
                                               std::vector<ProductWeight> terms) {
  std::vector<double> v(topo.size(), 0.0);
  for (const auto& t : terms) {
    const auto tv = product_values(topo, t);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += tv[i];
  }
  WeightFunction w(topo, std::move(v));
  w.structure_ = SumOfProductsWeight{std::move(terms)};
  return w;
}

WeightFunction WeightFunction::hooked(const BiTreeTopology& topo, std::size_t anchor,
                                      std::vector<double> values) {
  if (anchor >= topo.size() || !topo.is_boundary(anchor)) {
    throw PreconditionError("hooked weight anchor must be a boundary node");
  }
  WeightFunction w(topo, std::move(values));
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (w.values_[i] != 0.0 && !topo.leq(anchor, i)) {
      throw PreconditionError("hooked weight is nonzero at node " + std::to_string(i) +
                              ", which is not an ancestor of the anchor");
    }
  }
  w.structure_ = HookedWeight{anchor};
  return w;
}

WeightFunction WeightFunction::constant(const BiTreeTopology& topo, double c) {
  return product(topo, std::vector<double>(topo.tree_x().size(), c),
                 std::vector<double>(topo.tree_y().size(), 1.0));
}

std::string WeightFunction::tag_name() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GeneralWeight>) return "general";
        if constexpr (std::is_same_v<S, ProductWeight>) return "product";
        if constexpr (std::is_same_v<S, SumOfProductsWeight>) return "sum_of_products";
        if constexpr (std::is_same_v<S, HookedWeight>) return "hooked";
      },
      structure_);
}

double WeightFunction::structure_defect(const BiTreeTopology& topo) const {
  std::vector<double> expected;
  if (const auto* p = std::get_if<ProductWeight>(&structure_)) {
    expected = product_values(topo, *p);
  } else if (const auto* s = std::get_if<SumOfProductsWeight>(&structure_)) {
    expected.assign(topo.size(), 0.0);
    for (const auto& t : s->terms) {
      const auto tv = product_values(topo, t);
      for (std::size_t i = 0; i < expected.size(); ++i) expected[i] += tv[i];
    }
  } else if (const auto* h = std::get_if<HookedWeight>(&structure_)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < topo.size(); ++i) {
      if (values_[i] != 0.0 && !topo.leq(h->anchor, i)) worst = std::max(worst, 1.0);
    }
    return worst;
  } else {
    return 0.0;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double scale = std::max({std::abs(expected[i]), std::abs(values_[i]), 1e-300});
    worst = std::max(worst, std::abs(expected[i] - values_[i]) / scale);
  }
  return worst;
}

WeightFunction WeightFunction::scaled(double c) const {
  WeightFunction out = *this;
  for (double& v : out.values_) v *= c;
  if (auto* p = std::get_if<ProductWeight>(&out.structure_)) {
    for (double& v : p->wx) v *= c;
  } else if (auto* s = std::get_if<SumOfProductsWeight>(&out.structure_)) {
    for (auto& t : s->terms) {
      for (double& v : t.wx) v *= c;
    }
  }
  return out;
}

}  // namespace bitree
