#include "cavity/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavity/error.hpp"

namespace cavity {
namespace {

constexpr double kMaskSlack = 1e-12;

bool inside_disk(Vec2 p, Vec2 c, double r) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return dx * dx + dy * dy <= r * r * (1.0 + kMaskSlack);
}

void validate(const DomainSpec& d, int n) {
  if (n % 2 == 0) throw Error(Errc::NonOddResolution, "n = " + std::to_string(n));
  if (n < 17 || n > 1025) throw Error(Errc::ResolutionOutOfRange, "n = " + std::to_string(n));
  if (d.shape != Shape::UnitSquare && !(d.radius > 0.0)) {
    throw Error(Errc::InvalidDomain, "radius must be positive");
  }
  if (d.shape == Shape::Ball) {
    const double slack = 1e-12;
    if (d.center.x - d.radius < -1.0 - slack || d.center.x + d.radius > 1.0 + slack ||
        d.center.y - d.radius < -1.0 - slack || d.center.y + d.radius > 1.0 + slack) {
      throw Error(Errc::BallOutOfBox, "ball must fit inside [-1,1]^2");
    }
  }
}

}  // namespace

Grid::Grid(DomainSpec domain, int n) : domain_(domain), n_(n) {
  validate(domain, n);
  switch (domain.shape) {
    case Shape::UnitSquare:
      nx_ = ny_ = n;
      h_ = 1.0 / (n - 1);
      origin_ = {0.0, 0.0};
      break;
    case Shape::HalfBall:
      nx_ = n;
      ny_ = (n - 1) / 2 + 1;
      h_ = 2.0 * domain.radius / (n - 1);
      origin_ = {-domain.radius, 0.0};
      break;
    case Shape::Ball:
      nx_ = ny_ = n;
      h_ = 2.0 / (n - 1);
      origin_ = {-1.0, -1.0};
      break;
  }

  cls_.assign(static_cast<std::size_t>(nx_) * ny_, NodeClass::Exterior);
  std::vector<char> mask(cls_.size(), 0);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const Vec2 p = position(i, j);
      bool in = true;
      if (domain.shape == Shape::HalfBall) in = inside_disk(p, {0.0, 0.0}, domain.radius);
      if (domain.shape == Shape::Ball) in = inside_disk(p, domain.center, domain.radius);
      mask[index(i, j)] = in ? 1 : 0;
    }
  }
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const std::size_t k = index(i, j);
      if (!mask[k]) continue;
      if (domain.shape != Shape::Ball && j == 0) {
        cls_[k] = NodeClass::FlatBoundary;
        continue;
      }
      bool full = true;
      for (int dj = -1; dj <= 1 && full; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (!contains(i + di, j + dj) || !mask[index(i + di, j + dj)]) {
            full = false;
            break;
          }
        }
      }
      cls_[k] = full ? NodeClass::Interior : NodeClass::CurvedBoundary;
    }
  }
}

std::size_t Grid::count(NodeClass c) const {
  return static_cast<std::size_t>(std::count(cls_.begin(), cls_.end(), c));
}

NodeIndex Grid::nearest_node(Vec2 p) const {
  const int i = static_cast<int>(std::lround((p.x - origin_.x) / h_));
  const int j = static_cast<int>(std::lround((p.y - origin_.y) / h_));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

bool Grid::in_domain(Vec2 p) const {
  switch (domain_.shape) {
    case Shape::UnitSquare:
      return p.x >= -kMaskSlack && p.x <= 1.0 + kMaskSlack && p.y >= -kMaskSlack &&
             p.y <= 1.0 + kMaskSlack;
    case Shape::HalfBall:
      return p.y >= -kMaskSlack && inside_disk(p, {0.0, 0.0}, domain_.radius);
    case Shape::Ball:
      return inside_disk(p, domain_.center, domain_.radius);
  }
  return false;
}

GridPtr build_grid(const DomainSpec& domain, int n) {
  return std::make_shared<const Grid>(domain, n);
}

}  // namespace cavity
