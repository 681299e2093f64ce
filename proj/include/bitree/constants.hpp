#pragma once

// The four embedding constants (box, Carleson, hereditary Carleson, Carleson
// embedding) with witnesses, the hooked-weight condition battery, and the
// forward comparison chain.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitree/fields.hpp"
#include "bitree/topology.hpp"

namespace bitree {

enum class ConstantKind { Box, Carleson, HereditaryCarleson, CarlesonEmbedding };

std::string to_string(ConstantKind k);

struct SolverDiagnostics {
  std::string method;
  int iterations = 0;
  double residual = 0.0;  // duality gap, surplus, or relative eigen-residual
};

struct ConstantReport {
  ConstantKind kind = ConstantKind::Box;
  double value = 0.0;
  bool certified = true;

  std::optional<std::size_t> witness_node;     // Box
  std::optional<DownSet> witness_downset;      // Carleson
  std::vector<std::size_t> witness_subset;     // HereditaryCarleson, a subset of supp mu
  std::vector<std::size_t> support;            // CarlesonEmbedding: nodes of psi
  std::vector<double> witness_function;        // CarlesonEmbedding: psi on `support`

  SolverDiagnostics diagnostics;
};

/// max over beta with I*mu(beta) > 0 of E_beta[mu] / I*mu(beta).
ConstantReport box_constant(const BiTreeTopology& topo, const MassFunction& mu,
                            const WeightFunction& w);

enum class CarlesonMethod { ExactMincut, BruteForce };

/// max over down-sets D with mu(D) > 0 of E_D[mu] / mu(D).
ConstantReport carleson_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                 const WeightFunction& w,
                                 CarlesonMethod method = CarlesonMethod::ExactMincut,
                                 double tol = 1e-12);

struct ExactCarleson {
  Rational value;
  DownSet witness;
  int iterations = 0;
};

/// Dinkelbach + min-cut entirely in rational arithmetic.
ExactCarleson carleson_constant_exact(const BiTreeTopology& topo, const std::vector<Rational>& mu,
                                      const std::vector<Rational>& w);

/// One Dinkelbach step: the down-set maximizing sum_D (e - lambda mu) and that surplus.
struct ClosureResult {
  DownSet set;
  double surplus = 0.0;
};
ClosureResult max_surplus_downset(const BiTreeTopology& topo, const std::vector<double>& e,
                                  const std::vector<double>& mu, double lambda);

enum class HereditaryMethod { ExactEnum, LocalSearch };

inline constexpr std::size_t kMaxHereditaryEnumSupport = 22;

struct LocalSearchOptions {
  std::uint64_t seed = 0;
  int random_seeds = 16;
  int max_passes = 200;
  /// Additional starting subsets (node indices; entries off supp mu are ignored).
  std::vector<std::vector<std::size_t>> extra_seeds;
};

/// max over E subset of supp mu with mu(E) > 0 of E[mu 1_E] / mu(E).
ConstantReport hereditary_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                   const WeightFunction& w,
                                   HereditaryMethod method = HereditaryMethod::ExactEnum,
                                   const LocalSearchOptions& options = {});

/// E[mu 1_E] / mu(E) for the given node subset (0 when mu(E) = 0).
double restricted_energy_ratio(const BiTreeTopology& topo, const MassFunction& mu,
                               const WeightFunction& w, const std::vector<std::size_t>& subset);

Rational restricted_energy_ratio_exact(const BiTreeTopology& topo, const std::vector<Rational>& mu,
                                       const std::vector<Rational>& w,
                                       const std::vector<std::size_t>& subset);

/// Largest eigenvalue of mu^{1/2} A mu^{1/2}, A(a, b) = I w(lca(a, b)), on supp mu.
ConstantReport embedding_constant(const BiTreeTopology& topo, const MassFunction& mu,
                                  const WeightFunction& w, double tol = 1e-10,
                                  int max_iterations = 10000);

/// sum_a w(a) (I*(psi mu)(a))^2 / sum psi^2 mu for a test function psi on nodes.
double embedding_quotient(const BiTreeTopology& topo, const MassFunction& mu,
                          const WeightFunction& w, const std::vector<double>& psi);

/// The LCA kernel I w(lca(a, b)) restricted to the given nodes, row-major.
std::vector<double> lca_kernel(const BiTreeTopology& topo, const WeightFunction& w,
                               const std::vector<std::size_t>& nodes);

struct SawyerReport {
  double a1_sq = 0.0;
  double a2_sq = 0.0;
  double a3_sq = 0.0;
  std::size_t anchor = 0;
};

/// Requires a hooked weight; throws TagError otherwise.
SawyerReport sawyer_conditions(const BiTreeTopology& topo, const MassFunction& mu,
                               const WeightFunction& w);

struct ChainReport {
  ConstantReport box;
  ConstantReport carleson;
  ConstantReport hereditary;
  ConstantReport embedding;
  double c_over_box = 0.0;
  double hc_over_c = 0.0;
  double ce_over_hc = 0.0;
  double ce_over_box = 0.0;
};

inline constexpr double kChainSlack = 1e-9;

/// Computes all four and throws InvariantError if Box <= C <= HC <= CE fails
/// beyond kChainSlack (relative).
ChainReport verify_chain(const BiTreeTopology& topo, const MassFunction& mu,
                         const WeightFunction& w, std::uint64_t seed = 0);

/// Recomputes the value a report claims from its witness alone.
double reevaluate_witness(const BiTreeTopology& topo, const MassFunction& mu,
                          const WeightFunction& w, const ConstantReport& report);

/// 0 when den = 0 and num = 0, +inf when only den = 0.
double safe_ratio(double num, double den);

}  // namespace bitree
