#include "bitree/extremal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "bitree/error.hpp"

namespace bitree {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(int n) { return std::countr_zero(static_cast<unsigned>(n)); }

void trim(std::vector<std::uint64_t>& w) {
  while (!w.empty() && w.back() == 0) w.pop_back();
}

std::vector<OriginRect> basic_rects(int n, int m) {
  std::vector<OriginRect> q;
  for (int j = 1; j <= m; ++j) q.push_back({1 << j, n >> j});
  return q;
}

StructuredConstruction upset_base(int n, ConstructionKind kind) {
  if (!is_power_of_two(n) || n < 4) {
    throw PreconditionError("N must be a power of two and at least 4, got " + std::to_string(n));
  }
  StructuredConstruction c;
  c.kind = kind;
  c.depth = n;
  c.m = extremal_m(n);
  c.q.push_back(basic_rects(n, c.m));
  const double unit = 1.0 / n;
  for (int j = 1; j <= c.m; ++j) c.pieces.push_back({0, j, c.q[0][j - 1], unit, false});
  c.pieces.push_back({-1, 0, {n, n}, unit, true});
  return c;
}

StructuredConstruction rec_base(int n) {
  if (!is_power_of_two(n) || n < 4) {
    throw PreconditionError("N must be a power of two and at least 4, got " + std::to_string(n));
  }
  StructuredConstruction c;
  c.kind = ConstructionKind::RecNotEmbedding;
  c.depth = n;
  c.m = extremal_m(n);
  c.k = extremal_k(c.m);
  c.q.push_back(basic_rects(n, c.m));
  for (int k = 1; k <= c.k; ++k) {
    // Q_{k,j} is the intersection of Q_j, ..., Q_{j + 2^k - 1}: the x-side of
    // the last, the y-side of the first.
    std::vector<OriginRect> level;
    const int span = 1 << k;
    for (int j = 1; j + span - 1 <= c.m; ++j) level.push_back({c.q[0][j + span - 2].a, c.q[0][j - 1].b});
    c.q.push_back(std::move(level));
  }
  for (int k = 0; k <= c.k; ++k) {
    const double mass = std::ldexp(1.0, -2 * k) / n;
    for (std::size_t j = 0; j < c.q[k].size(); ++j) {
      c.pieces.push_back({k, static_cast<int>(j) + 1, c.q[k][j], mass, false});
    }
  }
  return c;
}

// Index of the j-interval {j : Q_j inside [0, 2^-gx] x [0, 2^-gy]}; empty when lo > hi.
struct JInterval {
  int lo;
  int hi;
};

JInterval j_interval(const StructuredConstruction& c, int gx, int gy) {
  int lo = c.m + 1;
  int hi = 0;
  for (int j = 1; j <= c.m; ++j) {
    const OriginRect& r = c.q[0][j - 1];
    if (gx <= r.a && gy <= r.b) {
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
  }
  return {lo, hi};
}

DyadicAxis quadrant_boundary(int n, int a, std::uint64_t low_bits_seed, bool random_tail, bool fill_ones) {
  // The quadrant side [2^{-a-1}, 2^{-a}] at generation N: bit N-a-1 set, the
  // N-a-1 bits below it free.
  const int free_bits = n - a - 1;
  std::vector<std::uint64_t> words(static_cast<std::size_t>(n / 64 + 1), 0);
  words[static_cast<std::size_t>(free_bits / 64)] |= std::uint64_t{1} << (free_bits % 64);
  if (random_tail || fill_ones) {
    Rng rng(low_bits_seed);
    for (int i = 0; i < free_bits; ++i) {
      const bool bit = fill_ones ? true : (rng() & 1u) != 0;
      if (bit) words[static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64);
    }
  }
  return DyadicAxis(n, std::move(words));
}

}  // namespace

DyadicAxis::DyadicAxis(int generation, std::vector<std::uint64_t> words)
    : gen_(generation), words_(std::move(words)) {
  if (generation < 0) throw PreconditionError("negative generation");
  trim(words_);
  const int bits = static_cast<int>(words_.size()) * 64;
  for (int i = generation; i < bits; ++i) {
    if (bit(i)) throw PreconditionError("offset does not fit the generation");
  }
}

DyadicAxis DyadicAxis::from_offset(int generation, std::uint64_t offset) {
  return DyadicAxis(generation, {offset});
}

bool DyadicAxis::bit(int i) const noexcept {
  const auto w = static_cast<std::size_t>(i / 64);
  if (i < 0 || w >= words_.size()) return false;
  return ((words_[w] >> (i % 64)) & 1u) != 0;
}

int DyadicAxis::leading_zeros() const noexcept {
  if (words_.empty()) return gen_;
  const int top = static_cast<int>(words_.size()) * 64 - std::countl_zero(words_.back());
  return gen_ - top;
}

DyadicAxis DyadicAxis::ancestor(int generation) const {
  if (generation < 0 || generation > gen_) throw PreconditionError("ancestor generation out of range");
  const int shift = gen_ - generation;
  const int word_shift = shift / 64;
  const int bit_shift = shift % 64;
  std::vector<std::uint64_t> out;
  for (std::size_t i = static_cast<std::size_t>(word_shift); i < words_.size(); ++i) {
    std::uint64_t v = words_[i] >> bit_shift;
    if (bit_shift != 0 && i + 1 < words_.size()) v |= words_[i + 1] << (64 - bit_shift);
    out.push_back(v);
  }
  return DyadicAxis(generation, std::move(out));
}

std::string to_string(ConstructionKind k) {
  switch (k) {
    case ConstructionKind::SimpleCarNotRec: return "simple_car_not_rec";
    case ConstructionKind::UpsetCarNotRec: return "upset_car_not_rec";
    case ConstructionKind::RecNotEmbedding: return "rec_not_embedding";
    case ConstructionKind::SumOfProducts: return "sum_of_products";
    case ConstructionKind::LiftedFamily: return "lifted_family";
  }
  return "unknown";
}

int extremal_m(int n) {
  if (!is_power_of_two(n) || n < 4) {
    throw PreconditionError("N must be a power of two and at least 4, got " + std::to_string(n));
  }
  return log2_exact(n) - 1;
}

int extremal_k(int m) {
  if (m < 1) throw PreconditionError("M must be positive");
  return std::bit_width(static_cast<unsigned>(m)) - 1;
}

StructuredConstruction upset_car_not_rec(int n) { return upset_base(n, ConstructionKind::UpsetCarNotRec); }

StructuredConstruction sum_of_products(int n) {
  auto c = upset_base(n, ConstructionKind::SumOfProducts);
  c.counting_weight = true;
  return c;
}

StructuredConstruction rec_not_embedding(int n) {
  auto c = rec_base(n);
  if (c.m < 4) {
    throw PreconditionError("rec_not_embedding needs M >= 4 (N >= 32), got N = " + std::to_string(n));
  }
  return c;
}

StructuredConstruction rec_not_embedding_small(int n) { return rec_base(n); }

OriginGrid::OriginGrid(const StructuredConstruction& c, PieceSelection sel) : n_(c.depth) {
  const std::size_t cells = static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 1);
  mass_.assign(cells, 0.0);
  weight_.assign(cells, 0.0);
  prefix_.assign(cells, 0.0);

  // A piece below origin rectangle (a, b) lies in [0, 2^-gx] x [0, 2^-gy]
  // exactly when gx <= a and gy <= b: deposit at (a, b), then suffix-sum.
  for (const auto& p : c.pieces) {
    if (!sel.selects(p)) continue;
    mass_[at(p.rect.a, p.rect.b)] += p.mass;
    total_ += p.mass;
  }
  for (int gx = n_; gx >= 0; --gx) {
    for (int gy = n_; gy >= 0; --gy) {
      double v = mass_[at(gx, gy)];
      if (gx < n_) v += mass_[at(gx + 1, gy)];
      if (gy < n_) v += mass_[at(gx, gy + 1)];
      if (gx < n_ && gy < n_) v -= mass_[at(gx + 1, gy + 1)];
      mass_[at(gx, gy)] = v;
    }
  }

  for (const auto& r : c.q[0]) weight_[at(r.a, r.b)] += 1.0;
  for (int gx = n_; gx >= 0; --gx) {
    for (int gy = n_; gy >= 0; --gy) {
      double v = weight_[at(gx, gy)];
      if (gx < n_) v += weight_[at(gx + 1, gy)];
      if (gy < n_) v += weight_[at(gx, gy + 1)];
      if (gx < n_ && gy < n_) v -= weight_[at(gx + 1, gy + 1)];
      weight_[at(gx, gy)] = v;
    }
  }
  if (!c.counting_weight) {
    for (auto& w : weight_) w = w > 0 ? 1.0 : 0.0;
  }

  for (int gx = 0; gx <= n_; ++gx) {
    for (int gy = 0; gy <= n_; ++gy) {
      const double h = weight_[at(gx, gy)] * mass_[at(gx, gy)];
      energy_ += h * mass_[at(gx, gy)];
      double v = h;
      if (gx > 0) v += prefix_[at(gx - 1, gy)];
      if (gy > 0) v += prefix_[at(gx, gy - 1)];
      if (gx > 0 && gy > 0) v -= prefix_[at(gx - 1, gy - 1)];
      prefix_[at(gx, gy)] = v;
    }
  }
}

double OriginGrid::prefix(int x, int y) const {
  if (x < 0 || y < 0) return 0.0;
  return prefix_[at(std::min(x, n_), std::min(y, n_))];
}

double OriginGrid::potential(const StructuredNode& node) const {
  if (node.x.generation() > n_ || node.y.generation() > n_) {
    throw PreconditionError("node deeper than the construction");
  }
  const int x = std::min(node.x.generation(), node.x.leading_zeros());
  const int y = std::min(node.y.generation(), node.y.leading_zeros());
  return prefix(x, y);
}

double structured_potential(const StructuredConstruction& c, const StructuredNode& node,
                            PieceSelection sel) {
  return OriginGrid(c, sel).potential(node);
}

StructuredNode omega0_node(int n) { return {DyadicAxis::origin(n), DyadicAxis::origin(n)}; }

StructuredNode origin_node(const OriginRect& r) { return {DyadicAxis::origin(r.a), DyadicAxis::origin(r.b)}; }

std::vector<StructuredNode> sample_support(const StructuredConstruction& c, const MassPiece& piece,
                                           std::uint64_t seed, int random_count) {
  const int n = c.depth;
  if (piece.origin_atom) return {omega0_node(n)};
  const int a = piece.rect.a;
  const int b = piece.rect.b;
  std::vector<StructuredNode> out;
  for (bool hx : {false, true}) {
    for (bool hy : {false, true}) {
      out.push_back({quadrant_boundary(n, a, 0, false, hx), quadrant_boundary(n, b, 0, false, hy)});
    }
  }
  Rng rng(seed ^ (static_cast<std::uint64_t>(piece.family + 1) << 40) ^
          (static_cast<std::uint64_t>(piece.index) << 20));
  for (int i = 0; i < random_count; ++i) {
    out.push_back({quadrant_boundary(n, a, rng(), true, false), quadrant_boundary(n, b, rng(), true, false)});
  }
  return out;
}

double hc_witness_ratio(const StructuredConstruction& c) {
  const OriginGrid atom(c, PieceSelection::atom_only());
  if (atom.total_mass() <= 0) throw PreconditionError("construction has no origin atom");
  return atom.energy() / atom.total_mass();
}

std::vector<std::vector<std::int64_t>> interval_counts(const StructuredConstruction& c) {
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(c.m),
                                                std::vector<std::int64_t>(static_cast<std::size_t>(c.m), 0));
  for (int gx = 0; gx <= c.depth; ++gx) {
    for (int gy = 0; gy <= c.depth; ++gy) {
      const JInterval iv = j_interval(c, gx, gy);
      if (iv.lo > iv.hi) continue;
      ++counts[static_cast<std::size_t>(iv.lo - 1)][static_cast<std::size_t>(iv.hi - iv.lo)];
    }
  }
  return counts;
}

double carleson_upper_bound(const StructuredConstruction& c) {
  if (c.kind != ConstructionKind::UpsetCarNotRec && c.kind != ConstructionKind::SumOfProducts) {
    throw PreconditionError("carleson_upper_bound applies to the upset and sum-of-products families");
  }
  const auto counts = interval_counts(c);
  const double n = c.depth;
  double best = 0.0;
  for (int s = 1; s <= c.m; ++s) {
    for (int t = s; t <= c.m; ++t) {
      double num = 0.0;
      for (int m = s; m <= t; ++m) {
        for (int k = 0; m + k <= t; ++k) {
          const double mass = (k + 2) / n;
          const double w = c.counting_weight ? k + 1.0 : 1.0;
          num += static_cast<double>(counts[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(k)]) *
                 w * mass * mass;
        }
      }
      best = std::max(best, num / ((t - s + 1) / n));
    }
  }
  return best;
}

EmbeddingTest embedding_lower_test(const StructuredConstruction& c) {
  const OriginGrid g0(c, PieceSelection::family(0));
  EmbeddingTest r;
  r.rhs = g0.energy();
  // Every boundary square of a quadrant under origin rectangle (a, b) has the
  // same origin ancestors, so V^{mu_0} is constant on the quadrant.
  for (const auto& p : c.pieces) {
    const double v = p.origin_atom ? g0.prefix(c.depth, c.depth) : g0.prefix(p.rect.a, p.rect.b);
    r.lhs += p.mass * v * v;
  }
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

double rec_surrogate(const StructuredConstruction& c, int k, const StructuredNode& node) {
  return OriginGrid(c, PieceSelection::families_from(k)).potential(node);
}

ExtremalInstance simple_car_not_rec(int n, QuadrantMass placement) {
  if (n < 1) throw PreconditionError("N must be at least 1");
  if (n > kMaxDenseExtremalDepth) {
    throw SizeError("simple_car_not_rec is dense; N <= " + std::to_string(kMaxDenseExtremalDepth));
  }
  ExtremalInstance in;
  in.topo = BiTreeTopology(n, n);
  const auto& t = in.topo;
  std::vector<double> mu(t.size(), 0.0);
  std::vector<double> w(t.size(), 0.0);
  in.omega0 = t.index(n, 0, n, 0);
  mu[in.omega0] = 1.0;
  w[in.omega0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const std::size_t q = t.index(i - 1, 0, n - i, 0);
    in.q_nodes.push_back(q);
    w[q] = 1.0;
    // Q_i^{++}: x-side at generation i offset 1, y-side at generation N-i+1 offset 1.
    const std::uint64_t x_lo = std::uint64_t{1} << (n - i);
    const std::uint64_t y_lo = std::uint64_t{1} << (i - 1);
    if (placement == QuadrantMass::Atom) {
      mu[t.index(n, x_lo, n, y_lo)] += 1.0;
    } else {
      const double share = 1.0 / static_cast<double>(x_lo * y_lo);
      for (std::uint64_t ox = x_lo; ox < 2 * x_lo; ++ox) {
        for (std::uint64_t oy = y_lo; oy < 2 * y_lo; ++oy) mu[t.index(n, ox, n, oy)] += share;
      }
    }
  }
  in.mu = MassFunction(t, std::move(mu));
  in.w = WeightFunction::hooked(t, in.omega0, std::move(w));
  return in;
}

ExtremalInstance materialize(const StructuredConstruction& c, PieceSelection sel) {
  const int n = c.depth;
  if (n > kMaxDenseExtremalDepth) {
    throw SizeError("dense materialization needs N <= " + std::to_string(kMaxDenseExtremalDepth));
  }
  ExtremalInstance in;
  in.topo = BiTreeTopology(n, n);
  const auto& t = in.topo;
  in.omega0 = t.index(n, 0, n, 0);
  std::vector<double> mu(t.size(), 0.0);
  for (const auto& p : c.pieces) {
    if (!sel.selects(p)) continue;
    if (p.origin_atom) {
      mu[in.omega0] += p.mass;
      continue;
    }
    const std::uint64_t x_lo = std::uint64_t{1} << (n - p.rect.a - 1);
    const std::uint64_t y_lo = std::uint64_t{1} << (n - p.rect.b - 1);
    const double share = p.mass / static_cast<double>(x_lo * y_lo);
    for (std::uint64_t ox = x_lo; ox < 2 * x_lo; ++ox) {
      for (std::uint64_t oy = y_lo; oy < 2 * y_lo; ++oy) mu[t.index(n, ox, n, oy)] += share;
    }
  }
  in.mu = MassFunction(t, std::move(mu));
  for (const auto& r : c.q[0]) in.q_nodes.push_back(t.index(r.a, 0, r.b, 0));

  if (c.counting_weight) {
    std::vector<ProductWeight> terms;
    for (const auto& r : c.q[0]) {
      ProductWeight term{std::vector<double>(t.tree_x().size(), 0.0),
                         std::vector<double>(t.tree_y().size(), 0.0)};
      for (int g = 0; g <= r.a; ++g) term.wx[TreeTopology::index(g, 0)] = 1.0;
      for (int g = 0; g <= r.b; ++g) term.wy[TreeTopology::index(g, 0)] = 1.0;
      terms.push_back(std::move(term));
    }
    in.w = WeightFunction::sum_of_products(t, std::move(terms));
  } else {
    std::vector<double> w(t.size(), 0.0);
    for (const auto& r : c.q[0]) {
      for (int gx = 0; gx <= r.a; ++gx) {
        for (int gy = 0; gy <= r.b; ++gy) w[t.index(gx, 0, gy, 0)] = 1.0;
      }
    }
    in.w = WeightFunction::hooked(t, in.omega0, std::move(w));
  }
  return in;
}

DyadicRect dyadic_rect(double x0, double x1, double y0, double y1, int depth) {
  auto axis = [depth](double lo, double hi, int& gen, std::uint64_t& off) {
    const double len = hi - lo;
    if (!(len > 0) || lo < 0 || hi > 1) throw ParseError("interval outside [0, 1] or empty");
    int e = 0;
    const double mant = std::frexp(len, &e);
    if (mant != 0.5) throw ParseError("interval length is not a power of two");
    gen = 1 - e;
    if (gen < 0 || gen > depth) throw ParseError("interval generation exceeds the depth");
    const double pos = std::ldexp(lo, gen);
    if (pos != std::floor(pos)) throw ParseError("interval is not dyadically aligned");
    off = static_cast<std::uint64_t>(pos);
  };
  DyadicRect r;
  axis(x0, x1, r.gx, r.ox);
  axis(y0, y1, r.gy, r.oy);
  return r;
}

MassFunction lebesgue_mass(const BiTreeTopology& topo) {
  std::vector<double> mu(topo.size(), 0.0);
  const double share = std::ldexp(1.0, -(topo.depth_x() + topo.depth_y()));
  for (auto b : topo.boundary()) mu[b] = share;
  return MassFunction(topo, std::move(mu));
}

double node_area(const BiTreeTopology& topo, std::size_t i) {
  const BiNode n = topo.node(i);
  return std::ldexp(1.0, -(TreeTopology::generation(n.x) + TreeTopology::generation(n.y)));
}

LiftedFamily lift_carleson_family(const std::vector<DyadicRect>& family, int n) {
  LiftedFamily out;
  out.topo = BiTreeTopology(n, n);
  const auto& t = out.topo;
  std::vector<double> w(t.size(), 0.0);
  for (const auto& r : family) {
    if (r.gx < 0 || r.gy < 0 || r.gx > n || r.gy > n || r.ox >> r.gx != 0 || r.oy >> r.gy != 0) {
      throw ParseError("rectangle is not a dyadic rectangle of depth " + std::to_string(n));
    }
    w[t.index(r.gx, r.ox, r.gy, r.oy)] = std::ldexp(1.0, r.gx + r.gy);
  }
  out.mu = lebesgue_mass(t);
  out.w = WeightFunction(t, std::move(w));
  return out;
}

WeightFunction paraproduct_weight(const BiTreeTopology& topo, const std::vector<double>& beta) {
  if (beta.size() != topo.size()) throw PreconditionError("coefficient vector has the wrong size");
  std::vector<double> w(topo.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double m = node_area(topo, i);
    w[i] = beta[i] * beta[i] / (m * m);
  }
  return WeightFunction(topo, std::move(w));
}

std::vector<double> paraproduct_coefficients(const BiTreeTopology& topo, const WeightFunction& w) {
  std::vector<double> beta(topo.size());
  for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = node_area(topo, i) * std::sqrt(w[i]);
  return beta;
}

}  // namespace bitree
