#include <doctest.h>

#include <cmath>

#include "egdeg/errors.hpp"
#include "egdeg/local_map.hpp"
#include "egdeg/rng.hpp"

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

}  // namespace

TEST_CASE("make_map checks invariance of the potential") {
  const auto g = antipodal_group(1);
  CHECK_NOTHROW(make_map(g, DomainExpr::full(), parse_polynomial("x1^2/2", 1), 2.0));
  CHECK(code_of([&] { make_map(g, DomainExpr::full(), parse_polynomial("x1^3", 1), 2.0); }) ==
        ErrorCode::NotInvariant);
  CHECK(code_of([&] {
          make_map(dihedral_group(3), DomainExpr::full(), parse_polynomial("x1^2+2*x2^2", 2), 2.0);
        }) == ErrorCode::NotInvariant);
}

TEST_CASE("evaluate returns value, gradient and Hessian") {
  const auto g = antipodal_group(2);
  const auto f = make_map(g, DomainExpr::ball(1.8), parse_polynomial("(x1^2-1)^2+x2^2", 2), 2.0);
  const auto e = f.evaluate(point({0.5, 0.25}));
  CHECK(e.value == doctest::Approx(0.5625 + 0.0625));
  CHECK(e.gradient[0] == doctest::Approx(4 * 0.5 * (0.25 - 1)));
  CHECK(e.gradient[1] == doctest::Approx(0.5));
  CHECK(e.hessian(0, 0) == doctest::Approx(12 * 0.25 - 4).epsilon(1e-5));
  CHECK(e.hessian(1, 1) == doctest::Approx(2).epsilon(1e-5));
  CHECK(std::abs(e.hessian(0, 1)) < 1e-5);

  CHECK(code_of([&] { f.evaluate(point({1.8, 0.5})); }) == ErrorCode::OutsideDomain);
  CHECK(code_of([&] { f.with_domain(DomainExpr::punctured()).evaluate(point({0.0, 0.0})); }) ==
        ErrorCode::OutsideDomain);
}

TEST_CASE("restriction to a fixed subspace") {
  Eigen::MatrixXd mirror(2, 2);
  mirror << 1, 0, 0, -1;
  const auto g = group_from_generators({mirror}, 2);
  const auto f = make_map(g, DomainExpr::full(), parse_polynomial("x1^2/2+x2^4", 2), 2.0);
  int h = -1;
  for (const auto& s : g->lattice.subgroups)
    if (s.order == 2) h = g->lattice.find(s.mask);
  REQUIRE(h >= 0);
  const Eigen::MatrixXd basis = g->lattice.subgroups[h].fixed_basis;
  REQUIRE(basis.cols() == 1);

  const StratumField r = restrict_to_stratum(f, basis);
  CHECK(r.dim() == 1);
  const Vec y = point({0.6});
  CHECK(std::abs(r.gradient(y)[0]) == doctest::Approx(0.6));
  CHECK(r.tangency_residual(y) < 1e-12);
  const auto p = r.restricted_polynomial();
  REQUIRE(p);
  CHECK(p->value(y) == doctest::Approx(0.18));
}

TEST_CASE("disjoint union") {
  const auto g = antipodal_group(2);
  const Polynomial phi = parse_polynomial("(x1^2+x2^2)/2", 2);
  const auto inner = make_map(g, DomainExpr::ball(0.5), phi, 2.0);
  const auto outer =
      make_map(g, DomainExpr::annulus(1.0, 1.5), parse_polynomial("-(x1^2+x2^2)/2", 2), 2.0);
  const auto u = disjoint_union(inner, outer);
  CHECK(u.domain().contains(point({0.2, 0.0})));
  CHECK(u.domain().contains(point({0.0, 1.2})));
  CHECK_FALSE(u.domain().contains(point({0.7, 0.0})));
  CHECK(u.gradient(point({0.2, 0.0}))[0] == doctest::Approx(0.2));
  CHECK(u.gradient(point({1.2, 0.0}))[0] == doctest::Approx(-1.2));

  const auto wide = make_map(g, DomainExpr::ball(1.1), phi, 2.0);
  CHECK(code_of([&] { disjoint_union(wide, outer); }) == ErrorCode::DomainsOverlap);
}

TEST_CASE("JSON round trip preserves the map") {
  const auto g = dihedral_group(3);
  const auto f = make_map(g, DomainExpr::annulus(0.5, 1.5),
                          parse_polynomial("(x1^2+x2^2)^2-x1^3+3*x1*x2^2", 2), 2.0);
  const auto back = LocalGradientMap::from_json(f.to_json(), g);
  CHECK(back.to_json() == f.to_json());
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Vec x = rng.normal_vec(2);
    CHECK(back.domain().contains(x) == f.domain().contains(x));
    if (f.domain().contains(x)) CHECK((back.gradient(x) - f.gradient(x)).norm() < 1e-12);
  }
}

TEST_CASE("equivariance defect is tiny for invariant potentials") {
  const auto g = dihedral_group(4);
  const auto f = make_map(g, DomainExpr::full(), parse_polynomial("x1^4+x2^4-(x1^2+x2^2)", 2), 2.0);
  CHECK(equivariance_defect(f, 2.0) < 1e-9);
  CHECK(empty_map(g).domain().kind() == DomainExpr::Kind::Empty);
}
