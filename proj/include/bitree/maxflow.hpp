#pragma once

// s-t max-flow / min-cut on a small directed network, backed by the
// highest-label push-relabel solver of Boost.Graph (gap + global relabel).
// Templated on the capacity type so closures can be solved in Rational.

#include <cstddef>
#include <limits>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>

#include "bitree/fields.hpp"

namespace bitree {

/// Rational capacity for the solver. The solver compares the source's total
/// capacity against numeric_limits<>::max(), which is 0 for GMP rationals;
/// this wrapper supplies a finite bound instead.
struct ExactFlow {
  Rational v;
  ExactFlow() = default;
  ExactFlow(int x) : v(x) {}
  ExactFlow(Rational x) : v(std::move(x)) {}
  ExactFlow& operator+=(const ExactFlow& o) { v += o.v; return *this; }
  ExactFlow& operator-=(const ExactFlow& o) { v -= o.v; return *this; }
  friend ExactFlow operator+(const ExactFlow& a, const ExactFlow& b) { return ExactFlow(Rational(a.v + b.v)); }
  friend ExactFlow operator-(const ExactFlow& a, const ExactFlow& b) { return ExactFlow(Rational(a.v - b.v)); }
  friend ExactFlow operator-(const ExactFlow& a) { return ExactFlow(Rational(-a.v)); }
  friend bool operator<(const ExactFlow& a, const ExactFlow& b) { return a.v < b.v; }
  friend bool operator>(const ExactFlow& a, const ExactFlow& b) { return a.v > b.v; }
  friend bool operator<=(const ExactFlow& a, const ExactFlow& b) { return a.v <= b.v; }
  friend bool operator>=(const ExactFlow& a, const ExactFlow& b) { return a.v >= b.v; }
  friend bool operator==(const ExactFlow& a, const ExactFlow& b) { return a.v == b.v; }
  friend bool operator!=(const ExactFlow& a, const ExactFlow& b) { return a.v != b.v; }
};

template <class Cap>
struct FlowScalar {
  using type = Cap;
  static const Cap& wrap(const Cap& c) { return c; }
  static const Cap& unwrap(const Cap& c) { return c; }
};

template <>
struct FlowScalar<Rational> {
  using type = ExactFlow;
  static ExactFlow wrap(const Rational& c) { return ExactFlow(c); }
  static const Rational& unwrap(const ExactFlow& c) { return c.v; }
};

template <class Cap>
class FlowNetwork {
  using S = FlowScalar<Cap>;
  using Inner = typename S::type;
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, Inner,
                      boost::property<boost::edge_residual_capacity_t, Inner,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  using Edge = typename boost::graph_traits<Graph>::edge_descriptor;

 public:
  explicit FlowNetwork(std::size_t vertex_count) : g_(vertex_count) {}

  std::size_t vertex_count() const { return boost::num_vertices(g_); }

  /// Adds u -> v with the given capacity; returns an id for flow().
  std::size_t add_edge(std::size_t u, std::size_t v, const Cap& capacity) {
    auto cap = boost::get(boost::edge_capacity, g_);
    auto rev = boost::get(boost::edge_reverse, g_);
    Edge e = boost::add_edge(u, v, g_).first;
    Edge r = boost::add_edge(v, u, g_).first;
    cap[e] = S::wrap(capacity);
    cap[r] = Inner(0);
    rev[e] = r;
    rev[r] = e;
    forward_.push_back(e);
    return forward_.size() - 1;
  }

  Cap max_flow(std::size_t source, std::size_t sink) {
    source_ = source;
    value_ = S::unwrap(boost::push_relabel_max_flow(g_, source, sink));
    return value_;
  }

  Cap value() const { return value_; }

  Cap flow(std::size_t edge_id) const {
    const Edge e = forward_[edge_id];
    return S::unwrap(boost::get(boost::edge_capacity, g_, e)) -
           S::unwrap(boost::get(boost::edge_residual_capacity, g_, e));
  }

  /// Vertices reachable from the source in the residual graph: the source
  /// side of the minimum cut. Residuals at or below `eps` count as saturated.
  std::vector<char> source_side(const Cap& eps = Cap(0)) const {
    std::vector<char> seen(vertex_count(), 0);
    std::vector<std::size_t> stack{source_};
    seen[source_] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (auto [it, end] = boost::out_edges(u, g_); it != end; ++it) {
        const std::size_t v = boost::target(*it, g_);
        if (!seen[v] && S::unwrap(boost::get(boost::edge_residual_capacity, g_, *it)) > eps) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return seen;
  }

 private:
  Graph g_;
  std::vector<Edge> forward_;
  std::size_t source_ = 0;
  Cap value_ = Cap(0);
};

}  // namespace bitree

template <>
class std::numeric_limits<bitree::ExactFlow> : public std::numeric_limits<double> {
 public:
  static bitree::ExactFlow max() noexcept {
    return bitree::ExactFlow(bitree::Rational(std::numeric_limits<double>::max()));
  }
  static bitree::ExactFlow min() noexcept { return bitree::ExactFlow(0); }
};
