#pragma once

// Seeded random instances. Values are small dyadic rationals (k / 2^bits) so
// the same instance is exact in both double and Rational arithmetic.

#include <cstdint>
#include <random>
#include <string>

#include "bitree/fields.hpp"
#include "bitree/topology.hpp"

namespace bitree {

using Rng = std::mt19937_64;

struct RandomMassOptions {
  bool boundary_only = true;
  double density = 0.6;  // probability that an eligible node carries mass
  int levels = 16;       // masses are drawn from {1, ..., levels} / levels_denominator
  int levels_denominator = 16;
};

/// Always returns a nonzero mass: at least one eligible node is forced on.
MassFunction random_mass(const BiTreeTopology& topo, Rng& rng, const RandomMassOptions& opt = {});

WeightFunction random_product_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob = 0.2);
WeightFunction random_general_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob = 0.2);
/// Hooked at a uniformly chosen boundary node.
WeightFunction random_hooked_weight(const BiTreeTopology& topo, Rng& rng, double zero_prob = 0.2);

/// Distribution names accepted by the scenario format: "product", "general", "hooked".
WeightFunction random_weight(const BiTreeTopology& topo, Rng& rng, const std::string& kind);

}  // namespace bitree
