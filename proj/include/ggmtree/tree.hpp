#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ggmtree/errors.hpp"

namespace ggmtree {

/// Vertex of the rooted (d+1)-regular tree, addressed by the path from the
/// root: each step picks a child 0..d-1, and the first step may additionally
/// be the root's remaining neighbor, encoded as the step value d ("up").
struct Vertex {
  std::vector<int> path;

  int depth() const { return static_cast<int>(path.size()); }
  bool is_root() const { return path.empty(); }

  Vertex parent() const {
    if (is_root()) throw std::invalid_argument("Vertex::parent: root has no parent");
    Vertex p{path};
    p.path.pop_back();
    return p;
  }

  Vertex child(int c) const {
    Vertex v{path};
    v.path.push_back(c);
    return v;
  }

  auto operator<=>(const Vertex&) const = default;

  std::string to_string() const {
    if (path.empty()) return "rho";
    std::ostringstream out;
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) out << '.';
      out << path[i];
    }
    return out.str();
  }
};

/// Finite connected vertex set of the tree. The anchor (unique vertex of
/// minimal depth) is an address prefix of every member, so paths from the
/// anchor descend through child steps only.
class FiniteSubtree {
public:
  FiniteSubtree(int d, std::vector<Vertex> vertices) : d_(d) {
    if (d_ < 2) throw std::invalid_argument("FiniteSubtree: d >= 2 required");
    if (vertices.empty()) throw std::invalid_argument("FiniteSubtree: empty vertex set");
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    for (const Vertex& v : vertices) {
      for (size_t i = 0; i < v.path.size(); ++i) {
        const int step = v.path[i];
        const int limit = (i == 0) ? d_ : d_ - 1; // "up" only as the first step
        if (step < 0 || step > limit)
          throw std::invalid_argument("FiniteSubtree: invalid step in address " + v.to_string());
      }
    }
    anchor_ = *std::min_element(vertices.begin(), vertices.end(),
                                [](const Vertex& a, const Vertex& b) { return a.depth() < b.depth(); });
    for (const Vertex& v : vertices) {
      if (v == anchor_) continue;
      if (v.depth() == anchor_.depth())
        throw std::invalid_argument("FiniteSubtree: not connected (two vertices of minimal depth)");
      if (!std::equal(anchor_.path.begin(), anchor_.path.end(), v.path.begin()))
        throw std::invalid_argument("FiniteSubtree: not connected (" + v.to_string() +
                                    " does not descend from the anchor)");
    }
    set_.insert(vertices.begin(), vertices.end());
    for (const Vertex& v : vertices) {
      if (v != anchor_ && !set_.contains(v.parent()))
        throw std::invalid_argument("FiniteSubtree: not connected (missing parent of " + v.to_string() + ")");
    }
    vertices_ = std::move(vertices);
  }

  /// All vertices within the given distance of the root.
  static FiniteSubtree ball(int d, int radius) {
    if (radius < 0) throw std::invalid_argument("FiniteSubtree::ball: radius >= 0 required");
    std::vector<Vertex> vs{Vertex{}};
    size_t frontier_begin = 0;
    for (int r = 0; r < radius; ++r) {
      const size_t frontier_end = vs.size();
      for (size_t i = frontier_begin; i < frontier_end; ++i) {
        const Vertex v = vs[i];
        const int limit = v.is_root() ? d : d - 1;
        for (int c = 0; c <= limit; ++c) vs.push_back(v.child(c));
      }
      frontier_begin = frontier_end;
    }
    return FiniteSubtree(d, std::move(vs));
  }

  /// The path root, child 0, child 0.0, ... of the given length.
  static FiniteSubtree ray(int d, int length) {
    std::vector<Vertex> vs;
    Vertex v;
    vs.push_back(v);
    for (int i = 0; i < length; ++i) {
      v = v.child(0);
      vs.push_back(v);
    }
    return FiniteSubtree(d, std::move(vs));
  }

  int d() const { return d_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Vertex& anchor() const { return anchor_; }
  bool contains(const Vertex& v) const { return set_.contains(v); }

  /// Tree neighbors of a member vertex (always d + 1 of them).
  std::vector<Vertex> neighbors(const Vertex& v) const {
    std::vector<Vertex> out;
    if (v.is_root()) {
      for (int c = 0; c <= d_; ++c) out.push_back(v.child(c));
    } else {
      out.push_back(v.parent());
      for (int c = 0; c < d_; ++c) out.push_back(v.child(c));
    }
    return out;
  }

  /// Outer boundary: vertices outside the set adjacent to a member.
  std::vector<Vertex> boundary() const {
    std::set<Vertex> out;
    for (const Vertex& v : vertices_)
      for (const Vertex& n : neighbors(v))
        if (!set_.contains(n)) out.insert(n);
    return {out.begin(), out.end()};
  }

  /// Keys identifying the edges that touch the set: each edge is keyed by its
  /// endpoint farther from the root (for the anchor's parent edge, the anchor
  /// itself). A keyed increment is oriented parent -> child.
  std::vector<Vertex> increment_keys() const {
    std::vector<Vertex> keys;
    for (const Vertex& v : vertices_) {
      if (v != anchor_) keys.push_back(v);
    }
    if (!anchor_.is_root()) keys.push_back(anchor_); // the anchor's own parent edge
    for (const Vertex& b : boundary()) {
      if (!anchor_.is_root() && b == anchor_.parent()) continue; // already keyed by the anchor
      keys.push_back(b);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  }

  /// Largest depth among members and their boundary.
  int max_depth_touched() const {
    int m = 0;
    for (const Vertex& v : vertices_) m = std::max(m, v.depth() + 1); // children reach one deeper
    if (!anchor_.is_root()) m = std::max(m, anchor_.depth());
    return m;
  }

private:
  int d_;
  std::vector<Vertex> vertices_;
  std::set<Vertex> set_;
  Vertex anchor_;
};

} // namespace ggmtree
