#include "bitree/topology.hpp"

#include <bit>
#include <string>

#include "bitree/error.hpp"

namespace bitree {

TreeTopology::TreeTopology(int depth) : depth_(depth) {
  if (depth < 0 || depth > kMaxDepth) {
    throw SizeError("tree depth " + std::to_string(depth) + " outside [0, " +
                    std::to_string(kMaxDepth) + "]");
  }
  size_ = (std::size_t{1} << (depth + 1)) - 1;
}

int TreeTopology::generation(std::size_t i) noexcept {
  return static_cast<int>(std::bit_width(i + 1)) - 1;
}

std::size_t TreeTopology::ancestor(std::size_t i, int gen) noexcept {
  const int g = generation(i);
  return ((i + 1) >> (g - gen)) - 1;
}

bool TreeTopology::leq(std::size_t a, std::size_t b) noexcept {
  const int ga = generation(a);
  const int gb = generation(b);
  return ga >= gb && ancestor(a, gb) == b;
}

std::size_t TreeTopology::lca(std::size_t a, std::size_t b) noexcept {
  std::size_t u = a + 1;
  std::size_t v = b + 1;
  const int gu = static_cast<int>(std::bit_width(u));
  const int gv = static_cast<int>(std::bit_width(v));
  if (gu > gv) u >>= (gu - gv);
  if (gv > gu) v >>= (gv - gu);
  while (u != v) {
    u >>= 1;
    v >>= 1;
  }
  return u - 1;
}

BiTreeTopology::BiTreeTopology(int depth_x, int depth_y) : tx_(depth_x), ty_(depth_y) {
  if (tx_.size() > kMaxDenseNodes / ty_.size()) {
    throw SizeError("bi-tree of depth (" + std::to_string(depth_x) + "," +
                    std::to_string(depth_y) + ") exceeds the dense cap of " +
                    std::to_string(kMaxDenseNodes) + " bi-nodes");
  }
}

bool BiTreeTopology::is_boundary(std::size_t i) const noexcept {
  const BiNode n = node(i);
  return tx_.is_leaf(n.x) && ty_.is_leaf(n.y);
}

std::vector<std::size_t> BiTreeTopology::boundary() const {
  std::vector<std::size_t> out;
  out.reserve(boundary_size());
  for (std::size_t k = 0; k < tx_.leaf_count(); ++k) {
    for (std::size_t l = 0; l < ty_.leaf_count(); ++l) {
      out.push_back(index({tx_.first_leaf() + k, ty_.first_leaf() + l}));
    }
  }
  return out;
}

NodeList BiTreeTopology::parents(std::size_t i) const noexcept {
  NodeList out;
  const BiNode n = node(i);
  if (!TreeTopology::is_root(n.x)) out.push(index({TreeTopology::parent(n.x), n.y}));
  if (!TreeTopology::is_root(n.y)) out.push(index({n.x, TreeTopology::parent(n.y)}));
  return out;
}

NodeList BiTreeTopology::children(std::size_t i) const noexcept {
  NodeList out;
  const BiNode n = node(i);
  if (!tx_.is_leaf(n.x)) {
    out.push(index({TreeTopology::left_child(n.x), n.y}));
    out.push(index({TreeTopology::right_child(n.x), n.y}));
  }
  if (!ty_.is_leaf(n.y)) {
    out.push(index({n.x, TreeTopology::left_child(n.y)}));
    out.push(index({n.x, TreeTopology::right_child(n.y)}));
  }
  return out;
}

bool BiTreeTopology::leq(std::size_t a, std::size_t b) const noexcept {
  const BiNode na = node(a);
  const BiNode nb = node(b);
  return TreeTopology::leq(na.x, nb.x) && TreeTopology::leq(na.y, nb.y);
}

BiNode BiTreeTopology::lca(BiNode a, BiNode b) const noexcept {
  return {TreeTopology::lca(a.x, b.x), TreeTopology::lca(a.y, b.y)};
}

std::vector<std::size_t> BiTreeTopology::ancestors(std::size_t i) const {
  const BiNode n = node(i);
  const int gx = TreeTopology::generation(n.x);
  const int gy = TreeTopology::generation(n.y);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>((gx + 1) * (gy + 1)));
  for (int a = 0; a <= gx; ++a) {
    for (int b = 0; b <= gy; ++b) {
      out.push_back(index({TreeTopology::ancestor(n.x, a), TreeTopology::ancestor(n.y, b)}));
    }
  }
  return out;
}

namespace {

void subtree(const TreeTopology& t, std::size_t i, std::vector<std::size_t>& out) {
  out.push_back(i);
  if (!t.is_leaf(i)) {
    subtree(t, TreeTopology::left_child(i), out);
    subtree(t, TreeTopology::right_child(i), out);
  }
}

}  // namespace

std::vector<std::size_t> BiTreeTopology::descendants(std::size_t i) const {
  const BiNode n = node(i);
  std::vector<std::size_t> xs;
  std::vector<std::size_t> ys;
  subtree(tx_, n.x, xs);
  subtree(ty_, n.y, ys);
  std::vector<std::size_t> out;
  out.reserve(xs.size() * ys.size());
  for (auto x : xs) {
    for (auto y : ys) out.push_back(index({x, y}));
  }
  return out;
}

bool is_down_closed(const BiTreeTopology& topo, std::span<const char> mask) {
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (!mask[i]) continue;
    for (auto c : topo.children(i)) {
      if (!mask[c]) return false;
    }
  }
  return true;
}

bool is_up_closed(const BiTreeTopology& topo, std::span<const char> mask) {
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (!mask[i]) continue;
    for (auto p : topo.parents(i)) {
      if (!mask[p]) return false;
    }
  }
  return true;
}

DownSet::DownSet(const BiTreeTopology& topo, std::vector<char> mask) : mask_(std::move(mask)) {
  if (mask_.size() != topo.size()) throw PreconditionError("down-set mask has wrong length");
  if (!is_down_closed(topo, mask_)) throw PreconditionError("mask is not closed downward");
}

DownSet DownSet::empty(const BiTreeTopology& topo) {
  return DownSet(topo, std::vector<char>(topo.size(), 0));
}

DownSet DownSet::full(const BiTreeTopology& topo) {
  return DownSet(topo, std::vector<char>(topo.size(), 1));
}

DownSet DownSet::generated_by(const BiTreeTopology& topo, std::span<const std::size_t> gens) {
  std::vector<char> mask(topo.size(), 0);
  for (auto g : gens) mask[g] = 1;
  // Children have larger indices than their parents, so one forward pass closes it.
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (!mask[i]) continue;
    for (auto c : topo.children(i)) mask[c] = 1;
  }
  return DownSet(topo, std::move(mask));
}

std::size_t DownSet::count() const noexcept {
  std::size_t n = 0;
  for (char c : mask_) n += c != 0;
  return n;
}

std::vector<std::size_t> DownSet::generators(const BiTreeTopology& topo) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_[i]) continue;
    bool maximal = true;
    for (auto p : topo.parents(i)) maximal = maximal && !mask_[p];
    if (maximal) out.push_back(i);
  }
  return out;
}

UpSet::UpSet(const BiTreeTopology& topo, std::vector<char> mask) : mask_(std::move(mask)) {
  if (mask_.size() != topo.size()) throw PreconditionError("up-set mask has wrong length");
  if (!is_up_closed(topo, mask_)) throw PreconditionError("mask is not closed upward");
}

UpSet UpSet::generated_by(const BiTreeTopology& topo, std::span<const std::size_t> gens) {
  std::vector<char> mask(topo.size(), 0);
  for (auto g : gens) mask[g] = 1;
  for (std::size_t i = topo.size(); i-- > 0;) {
    if (!mask[i]) continue;
    for (auto p : topo.parents(i)) mask[p] = 1;
  }
  return UpSet(topo, std::move(mask));
}

std::size_t UpSet::count() const noexcept {
  std::size_t n = 0;
  for (char c : mask_) n += c != 0;
  return n;
}

std::vector<std::size_t> UpSet::generators(const BiTreeTopology& topo) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_[i]) continue;
    bool minimal = true;
    for (auto c : topo.children(i)) minimal = minimal && !mask_[c];
    if (minimal) out.push_back(i);
  }
  return out;
}

namespace {

// Decides membership from the highest index down: a node may join only when
// all of its children already have, which yields every down-set once.
class DownSetWalker {
 public:
  DownSetWalker(const BiTreeTopology& topo, const std::function<void(const DownSet&)>& visit)
      : topo_(topo), visit_(visit), mask_(topo.size(), 0) {}

  void run() { step(topo_.size()); }

 private:
  void step(std::size_t remaining) {
    if (remaining == 0) {
      current_ = DownSet(topo_, mask_);
      visit_(current_);
      return;
    }
    const std::size_t i = remaining - 1;
    mask_[i] = 0;
    step(i);
    bool allowed = true;
    for (auto c : topo_.children(i)) allowed = allowed && mask_[c];
    if (allowed) {
      mask_[i] = 1;
      step(i);
      mask_[i] = 0;
    }
  }

  const BiTreeTopology& topo_;
  const std::function<void(const DownSet&)>& visit_;
  std::vector<char> mask_;
  DownSet current_;
};

}  // namespace

void for_each_down_set(const BiTreeTopology& topo,
                       const std::function<void(const DownSet&)>& visit) {
  if (topo.size() > kMaxEnumerationNodes) {
    throw SizeError("down-set enumeration limited to " + std::to_string(kMaxEnumerationNodes) +
                    " bi-nodes, instance has " + std::to_string(topo.size()));
  }
  DownSetWalker(topo, visit).run();
}

std::size_t count_down_sets(const BiTreeTopology& topo) {
  std::size_t n = 0;
  for_each_down_set(topo, [&](const DownSet&) { ++n; });
  return n;
}

}  // namespace bitree
