#pragma once

// Counterexample families: dense materialization on T_N^2 for small N and a
// structured evaluator that never builds the bi-tree, for N up to a few
// thousand. Also the rectangle-family and paraproduct-coefficient views.

#include <climits>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitree/fields.hpp"
#include "bitree/random.hpp"
#include "bitree/topology.hpp"

namespace bitree {

/// A dyadic interval of [0, 1] at any generation; the offset is a multiword
/// integer (little-endian 64-bit words) so generations past 63 are addressable.
class DyadicAxis {
 public:
  DyadicAxis() = default;
  DyadicAxis(int generation, std::vector<std::uint64_t> words);
  static DyadicAxis from_offset(int generation, std::uint64_t offset);
  /// [0, 2^-generation].
  static DyadicAxis origin(int generation) { return DyadicAxis(generation, {}); }

  int generation() const noexcept { return gen_; }
  bool bit(int i) const noexcept;
  /// Leading zero bits of the generation-bit offset: the interval lies in [0, 2^-z].
  int leading_zeros() const noexcept;
  DyadicAxis ancestor(int generation) const;
  /// Low 64 bits of the offset (the whole offset when generation <= 64).
  std::uint64_t low_word() const noexcept { return words_.empty() ? 0 : words_[0]; }

  friend bool operator==(const DyadicAxis&, const DyadicAxis&) = default;

 private:
  int gen_ = 0;
  std::vector<std::uint64_t> words_;  // trailing zero words trimmed
};

struct StructuredNode {
  DyadicAxis x;
  DyadicAxis y;
};

/// [0, 2^-a] x [0, 2^-b].
struct OriginRect {
  int a = 0;
  int b = 0;
  friend bool operator==(const OriginRect&, const OriginRect&) = default;
};

enum class ConstructionKind { SimpleCarNotRec, UpsetCarNotRec, RecNotEmbedding, SumOfProducts, LiftedFamily };

std::string to_string(ConstructionKind k);

/// Uniform mass on the upper-right quadrant of `rect`; the origin atom instead
/// sits on omega_0 = [0, 2^-N]^2 (then rect = {N, N}).
struct MassPiece {
  int family = 0;  // k for mu_k; -1 for the origin atom
  int index = 0;   // j
  OriginRect rect;
  double mass = 0.0;
  bool origin_atom = false;
};

/// Which pieces of the measure take part in an evaluation.
struct PieceSelection {
  bool origin_atom = true;
  int min_family = 0;
  int max_family = INT_MAX;

  static PieceSelection all() { return {}; }
  /// Everything except the origin atom (mu rather than nu).
  static PieceSelection quadrants() { return {false, 0, INT_MAX}; }
  static PieceSelection family(int k) { return {false, k, k}; }
  static PieceSelection families_from(int k) { return {false, k, INT_MAX}; }
  static PieceSelection atom_only() { return {true, INT_MAX, INT_MAX}; }

  bool selects(const MassPiece& p) const noexcept {
    return p.origin_atom ? origin_atom : (p.family >= min_family && p.family <= max_family);
  }
};

struct StructuredConstruction {
  ConstructionKind kind = ConstructionKind::UpsetCarNotRec;
  int depth = 0;  // N
  int m = 0;      // M
  int k = 0;      // K (0 unless RecNotEmbedding)
  /// q[k][j - 1] = Q_{k,j}; q[0] are the basic rectangles Q_j.
  std::vector<std::vector<OriginRect>> q;
  std::vector<MassPiece> pieces;
  /// Sum-of-products: w counts the j with Q_j inside; otherwise w is the indicator.
  bool counting_weight = false;
};

/// M = log2(N) - 1: the largest j whose quadrant Q_j^{++} is a node of T_N^2.
int extremal_m(int n);
/// K = floor(log2 M).
int extremal_k(int m);

/// Upset family with nu = mu + (1/N) on omega_0. N a power of two, N >= 4.
StructuredConstruction upset_car_not_rec(int n);
/// Same measure; w = sum_j 1{Q_j inside}.
StructuredConstruction sum_of_products(int n);
/// mu = mu_0 + ... + mu_K, no origin atom. N a power of two with M >= 4.
StructuredConstruction rec_not_embedding(int n);
/// As above without the M >= 4 requirement; for dense cross-checks at small N.
StructuredConstruction rec_not_embedding_small(int n);

/// Precomputed sums over the (N+1)^2 origin rectangles: I*mu, w, and the
/// prefix sums of w I*mu. The weights vanish off origin rectangles, so the
/// potential at a node only sees its origin ancestors: generations up to
/// min(generation, leading zeros) on each axis.
class OriginGrid {
 public:
  OriginGrid(const StructuredConstruction& c, PieceSelection sel = PieceSelection::quadrants());

  int depth() const noexcept { return n_; }
  double mass(int gx, int gy) const { return mass_[at(gx, gy)]; }
  double weight(int gx, int gy) const { return weight_[at(gx, gy)]; }
  /// sum over gx <= x, gy <= y of w I*mu.
  double prefix(int x, int y) const;
  double potential(const StructuredNode& node) const;
  /// sum over origin rectangles of w (I*mu)^2.
  double energy() const noexcept { return energy_; }
  double total_mass() const noexcept { return total_; }

 private:
  std::size_t at(int gx, int gy) const noexcept {
    return static_cast<std::size_t>(gx) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(gy);
  }
  int n_ = 0;
  std::vector<double> mass_;
  std::vector<double> weight_;
  std::vector<double> prefix_;
  double energy_ = 0.0;
  double total_ = 0.0;
};

/// V^mu(node) for the selected pieces (default: mu without the origin atom).
double structured_potential(const StructuredConstruction& c, const StructuredNode& node,
                            PieceSelection sel = PieceSelection::quadrants());

StructuredNode omega0_node(int n);
StructuredNode origin_node(const OriginRect& r);

/// The 4 corner boundary squares of a piece's quadrant plus `random_count`
/// pseudo-random ones; the origin atom yields omega_0 alone.
std::vector<StructuredNode> sample_support(const StructuredConstruction& c, const MassPiece& piece,
                                           std::uint64_t seed, int random_count = 16);

/// HC witness at F = omega_0: E[nu 1_F] / nu(F).
double hc_witness_ratio(const StructuredConstruction& c);

/// Upper bound on the Carleson constant of (w, nu) from the interval counts
/// #C^{[m, m+k]}: max over runs J = [s, t] of
/// sum_{[m, m+k] in J} #C ((k+2)/N)^2 (times k+1 for counting weights) / (#J / N).
double carleson_upper_bound(const StructuredConstruction& c);

/// #C^{[m, m+k]}: origin rectangles whose set {j : Q_j inside} is exactly [m, m+k].
/// Indexed [m - 1][k].
std::vector<std::vector<std::int64_t>> interval_counts(const StructuredConstruction& c);

struct EmbeddingTest {
  double lhs = 0.0;  // integral of (V^{mu_0})^2 dmu
  double rhs = 0.0;  // sum (I* mu_0)^2 w
  double ratio = 0.0;
};
/// Tests the dual embedding with f = I* mu_0.
EmbeddingTest embedding_lower_test(const StructuredConstruction& c);

/// sum_{n >= k} V^{mu_n}(node).
double rec_surrogate(const StructuredConstruction& c, int k, const StructuredNode& node);

/// A dense family on T_N^2.
struct ExtremalInstance {
  BiTreeTopology topo{0, 0};
  MassFunction mu;
  WeightFunction w;
  std::size_t omega0 = 0;
  std::vector<std::size_t> q_nodes;  // Q_1..Q_M (or Q_1..Q_N for the simple family)
};

inline constexpr int kMaxDenseExtremalDepth = 8;

enum class QuadrantMass { Atom, Uniform };

/// Q_i = [0, 2^{-i+1}] x [0, 2^{-N+i}], i = 1..N; unit mass on omega_0 and on
/// each Q_i^{++} (an atom at its lowest-indexed boundary square, or uniform);
/// w = indicator of {omega_0, Q_1, ..., Q_N}.
ExtremalInstance simple_car_not_rec(int n, QuadrantMass placement = QuadrantMass::Atom);

/// Dense copy of a structured construction (N <= kMaxDenseExtremalDepth).
ExtremalInstance materialize(const StructuredConstruction& c,
                             PieceSelection sel = PieceSelection::all());

/// A dyadic rectangle on T_N^2.
struct DyadicRect {
  int gx = 0;
  std::uint64_t ox = 0;
  int gy = 0;
  std::uint64_t oy = 0;
  friend bool operator==(const DyadicRect&, const DyadicRect&) = default;
};

/// [x0, x1] x [y0, y1]; throws ParseError unless it is a dyadic rectangle of
/// generation at most `depth` on each axis.
DyadicRect dyadic_rect(double x0, double x1, double y0, double y1, int depth);

/// Lebesgue boundary mass 4^-N on every boundary square.
MassFunction lebesgue_mass(const BiTreeTopology& topo);

struct LiftedFamily {
  BiTreeTopology topo{0, 0};
  MassFunction mu;
  WeightFunction w;
};

/// mu = Lebesgue, w_R = 1 / m_2(R) on family members, 0 elsewhere.
LiftedFamily lift_carleson_family(const std::vector<DyadicRect>& family, int n);

/// w_R = beta_R^2 / m_2(R)^2 from coefficients indexed by node.
WeightFunction paraproduct_weight(const BiTreeTopology& topo, const std::vector<double>& beta);
/// beta_R = m_2(R) sqrt(w_R).
std::vector<double> paraproduct_coefficients(const BiTreeTopology& topo, const WeightFunction& w);

/// m_2 of the rectangle at a node.
double node_area(const BiTreeTopology& topo, std::size_t i);

}  // namespace bitree
