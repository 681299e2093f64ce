#pragma once

// Nonnegative functions on bi-tree nodes: measures (masses) and weights.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "bitree/topology.hpp"

namespace bitree {

/// Exact arithmetic used to certify equalities on oracle-scale instances.
using Rational = boost::multiprecision::mpq_rational;

/// Every double is a dyadic rational, so this conversion is exact.
inline std::vector<Rational> to_rational(std::span<const double> v) {
  std::vector<Rational> out;
  out.reserve(v.size());
  for (double d : v) out.emplace_back(d);
  return out;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double d) { return d; }

class MassFunction {
 public:
  MassFunction() = default;
  /// Throws PreconditionError on negative or non-finite entries or wrong length.
  MassFunction(const BiTreeTopology& topo, std::vector<double> values);

  static MassFunction zero(const BiTreeTopology& topo);

  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double total_mass() const noexcept;
  std::vector<std::size_t> support() const;
  bool is_zero() const noexcept;
  bool is_boundary_supported(const BiTreeTopology& topo) const noexcept;

  MassFunction restricted(std::span<const char> mask) const;
  MassFunction scaled(double c) const;

 private:
  std::vector<double> values_;
};

struct GeneralWeight {};

/// w(a) = wx(a_x) * wy(a_y).
struct ProductWeight {
  std::vector<double> wx;
  std::vector<double> wy;
};

/// w = sum_j wx_j (x) wy_j.
struct SumOfProductsWeight {
  std::vector<ProductWeight> terms;
};

/// Supported on the ancestors of one boundary node.
struct HookedWeight {
  std::size_t anchor = 0;
};

using WeightStructure = std::variant<GeneralWeight, ProductWeight, SumOfProductsWeight, HookedWeight>;

class WeightFunction {
 public:
  WeightFunction() = default;
  WeightFunction(const BiTreeTopology& topo, std::vector<double> values);

  static WeightFunction product(const BiTreeTopology& topo, std::vector<double> wx,
                                std::vector<double> wy);
  static WeightFunction sum_of_products(const BiTreeTopology& topo,
                                        std::vector<ProductWeight> terms);
  /// Throws PreconditionError when values leave the up-set of the anchor.
  static WeightFunction hooked(const BiTreeTopology& topo, std::size_t anchor,
                               std::vector<double> values);
  static WeightFunction constant(const BiTreeTopology& topo, double c);

  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  const WeightStructure& structure() const noexcept { return structure_; }
  bool is_product() const noexcept { return std::holds_alternative<ProductWeight>(structure_); }
  bool is_hooked() const noexcept { return std::holds_alternative<HookedWeight>(structure_); }
  std::string tag_name() const;

  /// Recomputes the tagged structure and compares with the stored values;
  /// returns the largest relative discrepancy (0 for general weights).
  double structure_defect(const BiTreeTopology& topo) const;

  WeightFunction scaled(double c) const;

 private:
  std::vector<double> values_;
  WeightStructure structure_ = GeneralWeight{};
};

}  // namespace bitree
