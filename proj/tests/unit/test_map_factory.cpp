#include <doctest.h>

#include "egdeg/errors.hpp"
#include "egdeg/map_factory.hpp"

using namespace egdeg;

namespace {

Vec point(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

int class_named(const GroupAction& g, const std::string& name) {
  for (const auto& c : g.lattice.classes)
    if (c.name == name) return c.id;
  FAIL("no class " << name);
  return -1;
}

GroupPtr mirror_group() {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0, -1;
  return group_from_generators({m}, 2);
}

}  // namespace

TEST_CASE("orbit-normal maps") {
  const auto g = dihedral_group(3);
  const DomainExpr omega = DomainExpr::punctured();
  const auto f = orbit_normal(g, omega, point({1.0, 0.0}), 0.2);
  CHECK(f.domain().contains(point({1.1, 0.05})));
  CHECK_FALSE(f.domain().contains(point({1.25, 0.0})));
  CHECK_FALSE(f.domain().contains(point({0.0, 0.0})));
  // f(x + v) = v on every ball of the orbit.
  for (const Vec& c : orbit(*g, point({1.0, 0.0}))) {
    const Vec v = point({0.05, -0.03});
    CHECK((f.gradient(c + v) - v).norm() < 1e-12);
  }
  const auto res = theta(g, omega, f, Numerics{});
  const ThetaContext ctx(g, omega, Numerics{});
  const ThetaLabel label = component_label_of(ctx, point({1.0, 0.0}));
  const auto nz = res.theta.normalized();
  REQUIRE(nz.entries().size() == 1);
  CHECK(nz.entries().begin()->second == 1);
  CHECK(nz.label(nz.entries().begin()->first).orbit_type == label.orbit_type);
  CHECK(nz.label(nz.entries().begin()->first).component == label.component);

  CHECK(code_of([&] { orbit_normal(g, omega, point({1.0, 0.0}), 0.6); }) == ErrorCode::TubeTooWide);
  CHECK(code_of([&] { orbit_normal(g, DomainExpr::ball(1.1), point({1.0, 0.0}), 0.2); }) ==
        ErrorCode::TubeTooWide);
  CHECK(code_of([&] { orbit_normal(g, omega, point({0.3, 0.2}), 0.25); }) == ErrorCode::TubeTooWide);
}

TEST_CASE("H-normal lift over the mirror axis") {
  const auto g = mirror_group();
  const DomainExpr omega = DomainExpr::full();
  Numerics num;
  const int axis = class_named(*g, "(G)");
  const Stratum s = build_stratum(*g, omega, axis, StrataOptions{num.grid_h, num.bbox, true});
  REQUIRE(s.dim() == 1);
  const ThetaContext ctx(g, omega, num);
  const ThetaLabel label = component_label_of(ctx, point({1.0, 0.0}));

  for (int sign : {1, -1}) {
    CAPTURE(sign);
    Polynomial k = parse_polynomial("(x1-1)^2/2", 1) * static_cast<double>(sign);
    const double y0 = s.basis(0, 0) > 0 ? 1.0 : -1.0;
    if (y0 < 0) k = parse_polynomial("(x1+1)^2/2", 1) * static_cast<double>(sign);
    const auto lift = h_normal_lift(g, omega, s, k, {point({y0})}, 0.4, 0.2);

    const Mat hess = lift.hessian(point({1.0, 0.0}));
    CHECK(hess(0, 0) == doctest::Approx(sign).epsilon(1e-4));
    CHECK(hess(1, 1) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(hess(0, 1)) < 1e-4);
    CHECK(lift.gradient(point({1.1, 0.1}))[1] == doctest::Approx(0.1));

    const auto t = theta(ctx, lift).theta.normalized();
    REQUIRE(t.entries().size() == 1);
    const auto& [key, value] = *t.entries().begin();
    CHECK(value == sign);
    CHECK(t.label(key).orbit_type == label.orbit_type);
  }
  // Balls must stay inside Ω.
  CHECK(code_of([&] {
          h_normal_lift(g, DomainExpr::ball(1.3), s, parse_polynomial("x1^2", 1), {point({1.0})}, 0.4, 0.2);
        }) == ErrorCode::TubeTooWide);
}

TEST_CASE("restrict_off") {
  const auto g = antipodal_group(1);
  const auto l = make_map(g, DomainExpr::full(), parse_polynomial("x1^4/4-x1^2/2", 1), 2.0);
  const auto off = restrict_off(l, DomainExpr::annulus(0.3, 0.6), 2.0);
  CHECK(off.domain().contains(point({0.1})));
  CHECK_FALSE(off.domain().contains(point({0.45})));
  CHECK_FALSE(off.domain().contains(point({0.6})));
  CHECK(off.domain().contains(point({1.0})));
  CHECK(restrict_off(l, DomainExpr::empty(), 2.0).domain().contains(point({1.0})));
  CHECK(code_of([&] { restrict_off(l, DomainExpr::annulus(0.8, 1.2), 2.0); }) == ErrorCode::ZeroOnY);
  CHECK(code_of([&] { restrict_off(l, DomainExpr::ball(0.2), 2.0); }) == ErrorCode::ZeroOnY);
}

TEST_CASE("catalog") {
  const auto names = catalog_names();
  CHECK(names.size() == 8);
  for (const auto& n : names) {
    CAPTURE(n);
    const CatalogEntry e = catalog(n);
    CHECK(e.name == n);
    CHECK_FALSE(e.expected.empty());
    for (const auto& x : e.expected) CHECK_FALSE(x.provenance.empty());
    CHECK(e.to_json()["name"] == n);
  }
  CHECK(code_of([] { catalog("no_such_entry"); }) == ErrorCode::UnknownName);

  for (const char* n : {"z2_line_min", "z2_line_max", "trivial_identity", "s1_dancer_minus"}) {
    CAPTURE(n);
    const CatalogEntry e = catalog(n);
    CHECK(e.compute().theta == e.expected_theta());
  }
}
