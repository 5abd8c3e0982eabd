#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cavity/geometry.hpp"

namespace cavity {

enum class Shape { UnitSquare, HalfBall, Ball };

/// Computational domain. The flat boundary is the segment of {y = 0}
/// bounding UnitSquare and HalfBall; Ball has none.
struct DomainSpec {
  Shape shape = Shape::UnitSquare;
  double radius = 1.0;
  Vec2 center{};

  static DomainSpec unit_square() { return {}; }
  static DomainSpec half_ball(double r) { return {Shape::HalfBall, r, {}}; }
  static DomainSpec ball(Vec2 c, double r) { return {Shape::Ball, r, c}; }

  bool operator==(const DomainSpec&) const = default;
};

enum class NodeClass : std::uint8_t { Interior, FlatBoundary, CurvedBoundary, Exterior };

struct NodeIndex {
  int i = 0;  // column (x)
  int j = 0;  // row (y)
  bool operator==(const NodeIndex&) const = default;
};

/// Uniform node lattice with per-node classification.
///
/// UnitSquare spans [0,1]^2 with n nodes per side. HalfBall(r) spans
/// [-r,r] x [0,r] with the same spacing as n nodes across the diameter.
/// Ball lives in the ambient box [-1,1]^2 with n nodes per side.
/// Interior nodes always have all eight lattice neighbours inside the
/// domain; masked nodes with an incomplete neighbourhood are CurvedBoundary.
class Grid {
 public:
  Grid(DomainSpec domain, int n);

  const DomainSpec& domain() const { return domain_; }
  int resolution() const { return n_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Vec2 origin() const { return origin_; }
  std::size_t size() const { return cls_.size(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  std::size_t index(NodeIndex p) const { return index(p.i, p.j); }
  NodeIndex node(std::size_t k) const {
    return {static_cast<int>(k % static_cast<std::size_t>(nx_)),
            static_cast<int>(k / static_cast<std::size_t>(nx_))};
  }
  Vec2 position(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  Vec2 position(NodeIndex p) const { return position(p.i, p.j); }
  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

  NodeClass node_class(int i, int j) const { return cls_[index(i, j)]; }
  NodeClass node_class(std::size_t k) const { return cls_[k]; }
  /// False for Exterior nodes and for lattice positions outside the box.
  bool active(int i, int j) const {
    return contains(i, j) && cls_[index(i, j)] != NodeClass::Exterior;
  }
  bool is_boundary(std::size_t k) const {
    return cls_[k] == NodeClass::FlatBoundary || cls_[k] == NodeClass::CurvedBoundary;
  }

  std::size_t count(NodeClass c) const;
  const std::vector<NodeClass>& classes() const { return cls_; }

  /// Nearest lattice node to a point (clamped to the box).
  NodeIndex nearest_node(Vec2 p) const;
  /// True when the point lies inside the closed physical domain.
  bool in_domain(Vec2 p) const;

  bool operator==(const Grid& other) const {
    return domain_ == other.domain_ && n_ == other.n_;
  }

 private:
  DomainSpec domain_;
  int n_;
  int nx_;
  int ny_;
  double h_;
  Vec2 origin_;
  std::vector<NodeClass> cls_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds and classifies a grid. Requires n odd with 17 <= n <= 1025.
GridPtr build_grid(const DomainSpec& domain, int n);

/// Scalar function of position, used for Dirichlet data.
using BoundaryData = std::function<double(Vec2)>;

}  // namespace cavity
