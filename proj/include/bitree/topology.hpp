#pragma once

// Finite dyadic trees, their products (bi-trees), and order ideals on them.
//
// Indexing is heap order per axis: the dyadic interval of generation j and
// offset k lives at index 2^j - 1 + k, so parent/child moves are shifts.
// A bi-node (x, y) is stored densely at x * |T_y| + y.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bitree {

class TreeTopology {
 public:
  /// Largest supported depth of a single axis.
  static constexpr int kMaxDepth = 30;

  explicit TreeTopology(int depth);

  int depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return size_; }

  static std::size_t index(int generation, std::uint64_t offset) noexcept {
    return (std::size_t{1} << generation) - 1 + offset;
  }
  static int generation(std::size_t i) noexcept;
  static std::uint64_t offset(std::size_t i) noexcept {
    return i + 1 - (std::size_t{1} << generation(i));
  }

  static bool is_root(std::size_t i) noexcept { return i == 0; }
  static std::size_t parent(std::size_t i) noexcept { return (i - 1) / 2; }
  static std::size_t left_child(std::size_t i) noexcept { return 2 * i + 1; }
  static std::size_t right_child(std::size_t i) noexcept { return 2 * i + 2; }

  bool is_leaf(std::size_t i) const noexcept { return generation(i) == depth_; }
  std::size_t first_leaf() const noexcept { return (std::size_t{1} << depth_) - 1; }
  std::size_t leaf_count() const noexcept { return std::size_t{1} << depth_; }

  /// Ancestor of i at the given generation (generation <= generation(i)).
  static std::size_t ancestor(std::size_t i, int gen) noexcept;

  /// a <= b in the tree order: a is a descendant of b or equal to it.
  static bool leq(std::size_t a, std::size_t b) noexcept;

  static std::size_t lca(std::size_t a, std::size_t b) noexcept;

 private:
  int depth_;
  std::size_t size_;
};

struct BiNode {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const BiNode&, const BiNode&) = default;
};

/// Small fixed-capacity list used for parents (<= 2) and children (<= 4).
struct NodeList {
  std::size_t items[4] = {0, 0, 0, 0};
  int count = 0;
  const std::size_t* begin() const noexcept { return items; }
  const std::size_t* end() const noexcept { return items + count; }
  void push(std::size_t v) noexcept { items[count++] = v; }
};

class BiTreeTopology {
 public:
  /// Dense mode materializes arrays over every bi-node; this caps their length.
  static constexpr std::size_t kMaxDenseNodes = std::size_t{1} << 24;

  BiTreeTopology(int depth_x, int depth_y);

  const TreeTopology& tree_x() const noexcept { return tx_; }
  const TreeTopology& tree_y() const noexcept { return ty_; }
  int depth_x() const noexcept { return tx_.depth(); }
  int depth_y() const noexcept { return ty_.depth(); }

  std::size_t size() const noexcept { return tx_.size() * ty_.size(); }
  std::size_t boundary_size() const noexcept { return tx_.leaf_count() * ty_.leaf_count(); }

  std::size_t index(BiNode n) const noexcept { return n.x * ty_.size() + n.y; }
  std::size_t index(int gx, std::uint64_t ox, int gy, std::uint64_t oy) const noexcept {
    return index({TreeTopology::index(gx, ox), TreeTopology::index(gy, oy)});
  }
  BiNode node(std::size_t i) const noexcept { return {i / ty_.size(), i % ty_.size()}; }

  std::size_t root() const noexcept { return 0; }
  bool is_boundary(std::size_t i) const noexcept;
  std::vector<std::size_t> boundary() const;

  NodeList parents(std::size_t i) const noexcept;
  NodeList children(std::size_t i) const noexcept;

  /// Product order: a <= b iff a_x <= b_x and a_y <= b_y.
  bool leq(std::size_t a, std::size_t b) const noexcept;
  BiNode lca(BiNode a, BiNode b) const noexcept;
  std::size_t lca(std::size_t a, std::size_t b) const noexcept {
    return index(lca(node(a), node(b)));
  }

  /// Every ancestor (>= i, including i), in no particular order.
  std::vector<std::size_t> ancestors(std::size_t i) const;
  /// Every descendant (<= i, including i).
  std::vector<std::size_t> descendants(std::size_t i) const;

  friend bool operator==(const BiTreeTopology& a, const BiTreeTopology& b) noexcept {
    return a.depth_x() == b.depth_x() && a.depth_y() == b.depth_y();
  }

 private:
  TreeTopology tx_;
  TreeTopology ty_;
};

/// Subset of a bi-tree closed under going down.
class DownSet {
 public:
  DownSet() = default;
  DownSet(const BiTreeTopology& topo, std::vector<char> mask);

  static DownSet empty(const BiTreeTopology& topo);
  static DownSet full(const BiTreeTopology& topo);
  /// Down-set generated by the given nodes (all their descendants).
  static DownSet generated_by(const BiTreeTopology& topo, std::span<const std::size_t> gens);

  const std::vector<char>& mask() const noexcept { return mask_; }
  bool contains(std::size_t i) const noexcept { return mask_[i] != 0; }
  std::size_t count() const noexcept;
  bool is_empty() const noexcept { return count() == 0; }

  /// Maximal elements; they are pairwise incomparable and generate the mask.
  std::vector<std::size_t> generators(const BiTreeTopology& topo) const;

  friend bool operator==(const DownSet&, const DownSet&) = default;

 private:
  std::vector<char> mask_;
};

/// Subset of a bi-tree closed under going up.
class UpSet {
 public:
  UpSet() = default;
  UpSet(const BiTreeTopology& topo, std::vector<char> mask);

  static UpSet generated_by(const BiTreeTopology& topo, std::span<const std::size_t> gens);

  const std::vector<char>& mask() const noexcept { return mask_; }
  bool contains(std::size_t i) const noexcept { return mask_[i] != 0; }
  std::size_t count() const noexcept;

  /// Minimal elements.
  std::vector<std::size_t> generators(const BiTreeTopology& topo) const;

  friend bool operator==(const UpSet&, const UpSet&) = default;

 private:
  std::vector<char> mask_;
};

bool is_down_closed(const BiTreeTopology& topo, std::span<const char> mask);
bool is_up_closed(const BiTreeTopology& topo, std::span<const char> mask);

/// Cap on bi-node count for down-set enumeration.
inline constexpr std::size_t kMaxEnumerationNodes = 25;

/// Visits every down-set exactly once, the empty set included.
/// Throws SizeError above kMaxEnumerationNodes bi-nodes.
void for_each_down_set(const BiTreeTopology& topo,
                       const std::function<void(const DownSet&)>& visit);

std::size_t count_down_sets(const BiTreeTopology& topo);

}  // namespace bitree
