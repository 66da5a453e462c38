#include "winding_oracle.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

using V3 = std::array<double, 3>;

V3 unit3(const Point& p) {
  const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  if (n < 1e-9) throw std::runtime_error("field vanishes on the boundary");
  return {p[0] / n, p[1] / n, p[2] / n};
}

// Van Oosterom–Strackee signed solid angle of the spherical triangle abc.
double solid_angle(const V3& a, const V3& b, const V3& c) {
  const double triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                        a[2] * (b[0] * c[1] - b[1] * c[0]);
  auto dot = [](const V3& x, const V3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; };
  const double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(triple, den);
}

double winding_2d(const VectorField& f, const Point& lo, const Point& hi, int n, double& max_step) {
  // Counter-clockwise boundary walk.
  const std::array<Point, 5> corners = {Point{lo[0], lo[1]}, Point{hi[0], lo[1]}, Point{hi[0], hi[1]},
                                        Point{lo[0], hi[1]}, Point{lo[0], lo[1]}};
  double total = 0.0;
  max_step = 0.0;
  double prev = 0.0;
  bool first = true;
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / n;
      const Point p{corners[e][0] + t * (corners[e + 1][0] - corners[e][0]),
                    corners[e][1] + t * (corners[e + 1][1] - corners[e][1])};
      const Point v = f(p);
      if (std::hypot(v[0], v[1]) < 1e-9) throw std::runtime_error("field vanishes on the boundary");
      const double a = std::atan2(v[1], v[0]);
      if (!first) {
        double d = a - prev;
        while (d > kPi) d -= 2 * kPi;
        while (d < -kPi) d += 2 * kPi;
        total += d;
        max_step = std::max(max_step, std::abs(d));
      }
      prev = a;
      first = false;
    }
  const Point v = f(corners[0]);
  double d = std::atan2(v[1], v[0]) - prev;
  while (d > kPi) d -= 2 * kPi;
  while (d < -kPi) d += 2 * kPi;
  total += d;
  max_step = std::max(max_step, std::abs(d));
  return total / (2 * kPi);
}

double solid_3d(const VectorField& f, const Point& lo, const Point& hi, int n) {
  double total = 0.0;
  // Each face: fixed axis a at side lo or hi, parameterized by the other
  // two axes (b, c) so that (b, c, outward normal) is right-handed.
  for (int a = 0; a < 3; ++a)
    for (int side = 0; side < 2; ++side) {
      int b = (a + 1) % 3, c = (a + 2) % 3;
      if (side == 0) std::swap(b, c);
      std::vector<V3> grid((n + 1) * (n + 1));
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          Point p(3);
          p[a] = side ? hi[a] : lo[a];
          p[b] = lo[b] + (hi[b] - lo[b]) * i / n;
          p[c] = lo[c] + (hi[c] - lo[c]) * j / n;
          grid[i * (n + 1) + j] = unit3(f(p));
        }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const V3& p00 = grid[i * (n + 1) + j];
          const V3& p10 = grid[(i + 1) * (n + 1) + j];
          const V3& p11 = grid[(i + 1) * (n + 1) + j + 1];
          const V3& p01 = grid[i * (n + 1) + j + 1];
          total += solid_angle(p00, p10, p11) + solid_angle(p00, p11, p01);
        }
    }
  return total / (4 * kPi);
}

}  // namespace

DegreeEstimate box_degree(const VectorField& f, const Point& lo, const Point& hi) {
  const std::size_t d = lo.size();
  DegreeEstimate out;
  if (d == 1) {
    const double a = f({lo[0]})[0], b = f({hi[0]})[0];
    if (std::abs(a) < 1e-12 || std::abs(b) < 1e-12) throw std::runtime_error("field vanishes at an endpoint");
    out.degree = ((b > 0) - (a > 0));
    out.raw = out.degree;
    out.resolution = 1;
    return out;
  }
  if (d == 2) {
    for (int n = 256; n <= (1 << 18); n *= 2) {
      double max_step = 0.0;
      const double w = winding_2d(f, lo, hi, n, max_step);
      if (max_step < kPi / 8 && std::abs(w - std::round(w)) < 1e-6) {
        out.raw = w;
        out.degree = static_cast<int>(std::lround(w));
        out.resolution = n;
        return out;
      }
    }
    throw std::runtime_error("winding number did not settle");
  }
  if (d == 3) {
    double last = std::nan("");
    for (int n = 24; n <= 384; n *= 2) {
      const double w = solid_3d(f, lo, hi, n);
      if (std::abs(w - std::round(w)) < 0.05 && std::abs(w - last) < 0.05) {
        out.raw = w;
        out.degree = static_cast<int>(std::lround(w));
        out.resolution = n;
        return out;
      }
      last = w;
    }
    throw std::runtime_error("solid angle did not settle");
  }
  throw std::runtime_error("box_degree supports dimensions 1 to 3");
}

}  // namespace oracle
