#include "egdeg/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "egdeg/errors.hpp"

namespace egdeg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TubeGeometry::TubeGeometry(int ambient_dim, std::vector<TubeSubspace> subspaces,
                           std::vector<TubeBall> balls)
    : dim_(ambient_dim), subspaces_(std::move(subspaces)), balls_(std::move(balls)) {
  balls_on_.resize(subspaces_.size());
  for (std::size_t i = 0; i < balls_.size(); ++i) {
    const int j = balls_[i].subspace;
    if (j < 0 || j >= static_cast<int>(subspaces_.size()))
      throw Error(ErrorCode::InvalidArgument, "tube ball refers to unknown subspace");
    balls_on_[j].push_back(static_cast<int>(i));
  }
}

double TubeGeometry::u_signed(int j, const Vec& p) const {
  double best = kInf;
  for (int b : balls_on_[j]) {
    const auto& ball = balls_[b];
    best = std::min(best, (p - ball.center).norm() - ball.radius);
  }
  return best;
}

std::optional<TubeDecomposition> TubeGeometry::decompose(const Vec& z, double r) const {
  if (balls_.empty()) return std::nullopt;
  // Nearest conjugate subspace overall, and the runner-up distance.
  int nearest = -1;
  double d1 = kInf, d2 = kInf;
  for (std::size_t j = 0; j < subspaces_.size(); ++j) {
    const double d = (z - subspaces_[j].projector * z).norm();
    if (d < d1) {
      d2 = d1;
      d1 = d;
      nearest = static_cast<int>(j);
    } else if (d < d2) {
      d2 = d;
    }
  }
  if (d1 >= r) return std::nullopt;
  const Vec x = subspaces_[nearest].projector * z;
  const bool in_u = u_signed(nearest, x) < 0.0;
  if (d2 - d1 < r / 10.0) {
    // Only an error if z actually sits in the tube of some candidate.
    bool candidate = in_u;
    for (std::size_t j = 0; j < subspaces_.size() && !candidate; ++j) {
      const Vec p = subspaces_[j].projector * z;
      if ((z - p).norm() < r && u_signed(static_cast<int>(j), p) < 0.0) candidate = true;
    }
    if (candidate) {
      std::ostringstream os;
      os << "distance gap " << (d2 - d1) << " below r/10 = " << r / 10.0;
      throw Error(ErrorCode::AmbiguousProjection, os.str());
    }
    return std::nullopt;
  }
  if (!in_u) return std::nullopt;
  TubeDecomposition out;
  out.subspace = nearest;
  out.base = x;
  out.normal = z - x;
  out.s = d1;
  return out;
}

double TubeGeometry::region_margin(const Vec& z, double r) const {
  double best = -kInf;
  for (std::size_t j = 0; j < subspaces_.size(); ++j) {
    if (balls_on_[j].empty()) continue;
    const Vec p = subspaces_[j].projector * z;
    const double w = (z - p).norm();
    const double su = u_signed(static_cast<int>(j), p);
    double m;
    if (su < 0.0 && w < r) {
      m = std::min(-su, r - w);
    } else {
      const double a = std::max(0.0, su);
      const double b = std::max(0.0, w - r);
      m = -std::sqrt(a * a + b * b);
    }
    best = std::max(best, m);
  }
  return best;
}

double TubeGeometry::wall_distance(const Vec& z, double r) const {
  double best = kInf;
  for (std::size_t j = 0; j < subspaces_.size(); ++j) {
    // A zero-dimensional stratum has no lateral boundary.
    if (balls_on_[j].empty() || subspaces_[j].dim() == 0) continue;
    const Vec p = subspaces_[j].projector * z;
    const double a = std::abs(u_signed(static_cast<int>(j), p));
    const double b = std::max(0.0, (z - p).norm() - r);
    best = std::min(best, std::sqrt(a * a + b * b));
  }
  return best;
}

double TubeGeometry::min_ball_radius() const {
  double m = kInf;
  for (const auto& b : balls_)
    if (subspaces_[b.subspace].dim() > 0) m = std::min(m, b.radius);
  return m;
}

double TubeGeometry::bound_radius(double r) const {
  double m = 0.0;
  for (const auto& b : balls_) {
    const double reach = subspaces_[b.subspace].dim() == 0 ? r : std::hypot(b.radius, r);
    m = std::max(m, b.center.norm() + reach);
  }
  return m;
}

}  // namespace egdeg
