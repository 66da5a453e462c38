#include <doctest.h>

#include <cmath>
#include <numbers>

#include "egdeg/errors.hpp"
#include "egdeg/perturbation.hpp"
#include "line_oracle.hpp"

using namespace egdeg;

namespace {

Vec point(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

int class_named(const GroupAction& g, const std::string& name) {
  for (const auto& c : g.lattice.classes)
    if (c.name == name) return c.id;
  FAIL("no class " << name);
  return -1;
}

// Tube over the three D3 mirror axes with unit-radius balls around the
// points at distance 1.
TubePtr d3_axis_tube() {
  const auto g = dihedral_group(3);
  std::vector<Eigen::MatrixXd> bases;
  std::vector<int> elements;
  conjugate_subspaces(*g, class_named(*g, "(Z2)"), bases, elements);
  std::vector<TubeSubspace> subs;
  std::vector<TubeBall> balls;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    subs.push_back({bases[j], Mat(bases[j] * bases[j].transpose())});
    const Vec c = bases[j].col(0);
    balls.push_back({static_cast<int>(j), c, 0.5});
    balls.push_back({static_cast<int>(j), Vec(-c), 0.5});
  }
  return std::make_shared<const TubeGeometry>(2, std::move(subs), std::move(balls));
}

// D3-invariant potential with a nondegenerate zero on the positive x-axis.
const char* kD3Phi = "(x1^2+x2^2-1)^2/4+0.1*(x1^3-3*x1*x2^2)";
const double kD3Zero = (-0.3 + std::sqrt(4.09)) / 2;

}  // namespace

TEST_CASE("omega and mu agree with the oracle") {
  for (double eps : {0.1, 0.35, 1.0}) {
    for (int i = 0; i <= 60; ++i) {
      const double s = eps * i / 60.0;
      CHECK(well_omega(s, eps) == doctest::Approx(oracle::omega(s, eps)));
      CHECK(bump_mu(s, eps) == doctest::Approx(oracle::mu(s, eps)));
    }
  }
  const double eps = 0.3;
  CHECK(well_omega(0.0, eps) == doctest::Approx(-eps * eps / 9));
  CHECK(well_omega(2 * eps / 3, eps) == doctest::Approx(0.0));
  CHECK(well_omega_prime(eps / 6, eps) == doctest::Approx(eps / 6));
  // ω′ > 0 on (0, 2ε/3) and vanishes beyond.
  for (int i = 1; i < 40; ++i) CHECK(well_omega_prime(2 * eps / 3 * i / 40.0, eps) > 0.0);
  CHECK(well_omega_prime(0.8 * eps, eps) == 0.0);
  CHECK(bump_mu(eps, eps, MuKind::Quintic) == doctest::Approx(1.0));
  CHECK(bump_mu(5 * eps / 6, eps, MuKind::Quintic) == doctest::Approx(0.5));
  CHECK_THROWS_AS(well_omega(-0.01, eps), Error);
  CHECK_THROWS_AS(bump_mu(1.01 * eps, eps), Error);
}

TEST_CASE("tube decomposition") {
  const TubePtr tube = d3_axis_tube();
  const auto dec = tube->decompose(point({1.0, 0.05}), 0.2);
  REQUIRE(dec);
  CHECK(dec->s == doctest::Approx(0.05));
  CHECK(dec->base[0] == doctest::Approx(1.0));
  CHECK(std::abs(dec->base[1]) < 1e-12);
  CHECK((dec->base + dec->normal - point({1.0, 0.05})).norm() < 1e-12);

  // Beyond the tube radius, or over a point outside U.
  CHECK_FALSE(tube->decompose(point({1.0, 0.3}), 0.2));
  CHECK_FALSE(tube->decompose(point({0.2, 0.01}), 0.2));

  // Halfway between two mirror axes.
  const double a = std::numbers::pi / 6;
  try {
    tube->decompose(point({std::cos(a), std::sin(a)}), 0.6);
    FAIL("expected AmbiguousProjection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousProjection);
  }
}

TEST_CASE("perturbing the origin of the line matches the oracle") {
  const auto g = antipodal_group(1);
  for (const char* phi_text : {"x1^2/2", "-x1^2/2", "x1^4-x1^2"}) {
    const Polynomial phi = parse_polynomial(phi_text, 1);
    const auto f = make_map(g, DomainExpr::full(), phi, 2.0);
    Numerics num;
    const TubeSpec tube = select_tube(f, class_named(*g, "(G)"), {point({0.0})}, num);
    REQUIRE_FALSE(tube.empty());
    const double eps = tube.epsilon;
    const auto res = perturb(f, tube, MuKind::Cubic);
    const auto scalar = [&](double x) { return phi.value(point({x})); };
    for (int i = 0; i <= 200; ++i) {
      const double v = 1.5 * eps * i / 200.0;
      CHECK(res.map.value(point({v})) == doctest::Approx(oracle::perturbed(scalar, v, eps)));
      CHECK(res.map.value(point({-v})) == doctest::Approx(res.map.value(point({v}))));
    }
    CHECK(res.map.gradient(point({eps / 6}))[0] == doctest::Approx(eps / 6));
    CHECK(std::abs(res.map.gradient(point({2 * eps / 3}))[0]) < 1e-9);
    // The base point stays a zero; the sphere of zeros around it is new.
    CHECK(res.map.gradient(point({0.0})).norm() == 0.0);
  }
}

TEST_CASE("the perturbed field vanishes on the sphere of radius 2ε/3") {
  const auto g = antipodal_group(2);
  const auto f = make_map(g, DomainExpr::ball(1.8), parse_polynomial("(x1^2-1)^2+x2^2", 2), 2.0);
  const TubeSpec tube = select_tube(f, class_named(*g, "(G)"), {point({0.0, 0.0})}, Numerics{});
  const auto res = perturb(f, tube, MuKind::Cubic);
  const double r = 2 * tube.epsilon / 3;
  for (int k = 0; k < 12; ++k) {
    const double a = 2 * std::numbers::pi * k / 12;
    CHECK(res.map.gradient(point({r * std::cos(a), r * std::sin(a)})).norm() < 1e-9);
    CHECK(res.map.gradient(point({0.5 * r * std::cos(a), 0.5 * r * std::sin(a)})).norm() > 1e-3);
  }
  // Outside the tube the map is unchanged.
  const Vec far = point({1.2, 0.4});
  CHECK((res.map.gradient(far) - f.gradient(far)).norm() < 1e-12);
}

TEST_CASE("an empty tube leaves the map alone") {
  const auto g = dihedral_group(3);
  const auto f = make_map(g, DomainExpr::punctured(), parse_polynomial("(x1^2+x2^2)/2", 2), 2.0);
  const TubeSpec tube = select_tube(f, class_named(*g, "(Z2)"), {}, Numerics{});
  CHECK(tube.empty());
  const auto res = perturb(f, tube, MuKind::Cubic);
  for (const Vec& x : {point({0.3, 0.0}), point({0.4, -0.7})})
    CHECK((res.map.gradient(x) - f.gradient(x)).norm() == 0.0);
  CHECK(res.family.region(1.0, point({1.0, 0.0})) == HomotopyFamily::Region::Outside);
}

TEST_CASE("partition of the homotopy") {
  const auto g = dihedral_group(3);
  const auto f = make_map(g, DomainExpr::punctured(),
                          parse_polynomial(kD3Phi, 2), 2.0);
  const TubeSpec tube = select_tube(f, class_named(*g, "(Z2)"), {point({kD3Zero, 0.0})}, Numerics{});
  const auto res = perturb(f, tube, MuKind::Cubic);
  const auto report = verify_partition(res.family, 300, 7, 1e-8);
  for (const RegionStats* r : {&report.a, &report.b, &report.c, &report.d}) CHECK(r->violations == 0);
  CHECK(report.a.samples > 0);
  CHECK(report.c.samples > 0);

  // Region labels along the normal ray through the zero.
  const double eps = tube.epsilon;
  CHECK(res.family.region(0.3, point({kD3Zero, eps / 2})) == HomotopyFamily::Region::A);
  CHECK(res.family.region(0.8, point({kD3Zero, 0.8 * eps})) == HomotopyFamily::Region::B);
  CHECK(res.family.region(0.8, point({kD3Zero, eps / 3})) == HomotopyFamily::Region::C);
  CHECK(res.family.region(0.8, point({kD3Zero, 0.0})) == HomotopyFamily::Region::D);
}

TEST_CASE("split domains") {
  const auto g = antipodal_group(2);
  const auto f = make_map(g, DomainExpr::ball(1.8), parse_polynomial("(x1^2-1)^2+x2^2", 2), 2.0);
  const TubeSpec tube = select_tube(f, class_named(*g, "(G)"), {point({0.0, 0.0})}, Numerics{});
  const double eps = tube.epsilon;
  const auto parts = split(perturb(f, tube, MuKind::Cubic).map, tube);
  const Vec origin = point({0.0, 0.0});
  const Vec inner = point({eps / 6, 0.0});
  const Vec mid = point({eps / 2, 0.0});
  const Vec far = point({1.0, 0.5});
  CHECK(parts.normal.domain().contains(origin));
  CHECK(parts.normal.domain().contains(inner));
  CHECK_FALSE(parts.normal.domain().contains(mid));
  CHECK_FALSE(parts.complement.domain().contains(origin));
  CHECK(parts.complement.domain().contains(inner));
  CHECK(parts.complement.domain().contains(far));
  CHECK_FALSE(parts.outer.domain().contains(inner));
  CHECK(parts.outer.domain().contains(mid));
  CHECK(parts.outer.domain().contains(far));
}

TEST_CASE("tube radius shrinks near the domain boundary") {
  const auto g = dihedral_group(3);
  const DomainExpr omega = DomainExpr::annulus(0.5, kD3Zero + 0.08);
  const auto f = make_map(g, omega, parse_polynomial(kD3Phi, 2), 2.0);
  const TubeSpec tube = select_tube(f, class_named(*g, "(Z2)"), {point({kD3Zero, 0.0})}, Numerics{});
  CHECK(tube.epsilon < 0.08);
  CHECK(tube.zeros.size() == 3);
  for (const auto& b : tube.geometry->balls()) CHECK(b.radius <= 0.04 + 1e-12);

  const auto line = antipodal_group(1);
  const auto small = make_map(line, DomainExpr::ball(0.15), parse_polynomial("x1^2/2", 1), 2.0);
  const TubeSpec t = select_tube(small, class_named(*line, "(G)"), {point({0.0})}, Numerics{});
  CHECK(t.epsilon <= 0.15);
  CHECK(t.epsilon > 0.0);
}
