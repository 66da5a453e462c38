#include <doctest.h>

#include <cmath>

#include "egdeg/errors.hpp"
#include "egdeg/parallel.hpp"
#include "egdeg/theta.hpp"
#include "line_oracle.hpp"

using namespace egdeg;

namespace {

ThetaKey key(const GroupAction& g, const std::string& name, int quotient) {
  for (const auto& c : g.lattice.classes)
    if (c.name == name) return {c.id, quotient};
  FAIL("no class " << name);
  return {};
}

ThetaVector line_theta_of(const std::string& phi, const DomainExpr& omega) {
  const auto g = antipodal_group(1);
  Numerics num;
  const auto f = make_map(g, omega, parse_polynomial(phi, 1), num.bbox);
  return theta(g, omega, f, num).theta;
}

}  // namespace

TEST_CASE("Θ on the line agrees with the line oracle") {
  const auto g = antipodal_group(1);
  const auto free_key = key(*g, "(e)", 0);
  struct Case {
    const char* text;
    double (*phi)(double);
  };
  const Case cases[] = {
      {"x1^2/2", [](double x) { return x * x / 2; }},
      {"-x1^2/2", [](double x) { return -x * x / 2; }},
      {"x1^4/4-x1^2/2", [](double x) { return x * x * x * x / 4 - x * x / 2; }},
      {"-x1^4/4+x1^2/2", [](double x) { return -x * x * x * x / 4 + x * x / 2; }},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    const ThetaVector t = line_theta_of(c.text, DomainExpr::ball(1.8));
    const auto o = oracle::line_theta(c.phi, 1.8, true);
    CHECK(t.theta11 == o.theta11);
    CHECK(t.at(free_key) == o.entry);
  }
  // Without the origin the single free component carries the count.
  const ThetaVector ring = line_theta_of("(x1^2-1)^2/4", DomainExpr::difference(DomainExpr::ball(1.8), DomainExpr::ball(0.2)));
  CHECK_FALSE(ring.theta11);
  CHECK(ring.at(free_key) == 1);
}

TEST_CASE("theta_add") {
  ThetaVector a, b;
  a.set({1, 0}, 2, {"(e)", "q0"});
  b.set({1, 0}, -2, {"(e)", "q0"});
  b.set({0, 0}, 1, {"(G)", "q0"});
  const ThetaVector s = theta_add(a, b);
  CHECK(s.at({1, 0}) == 0);
  CHECK(s.at({0, 0}) == 1);
  CHECK(s.normalized().entries().size() == 1);
  CHECK_FALSE(s.theta11);

  a.theta11 = 1;
  b.theta11 = 0;
  CHECK(theta_add(a, b).theta11 == 1);
  b.theta11 = 1;
  CHECK_THROWS_AS(theta_add(a, b), Error);

  ThetaVector zero;
  CHECK(zero.is_zero());
  CHECK(theta_add(zero, a) == a);
}

TEST_CASE("S¹ demos agree with the radial oracle") {
  Numerics num;
  struct Case {
    const char* text;
    double (*radial)(double);
    bool punctured;
  };
  const Case cases[] = {
      {"(x1^2+x2^2)/2", [](double r) { return r * r / 2; }, false},
      {"-(x1^2+x2^2)/2", [](double r) { return -r * r / 2; }, false},
      {"(x1^2+x2^2-1)^2/4", [](double r) { return (r * r - 1) * (r * r - 1) / 4; }, true},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    const auto res = theta_radial_s1({1}, parse_polynomial(c.text, 2), c.punctured, num);
    const auto o = oracle::line_theta(c.radial, 1.8, !c.punctured);
    CHECK(res.theta.theta11 == o.theta11);
    int total = 0;
    for (const auto& [k, v] : res.theta.entries()) total += v;
    CHECK(total == o.entry);
  }
  CHECK_THROWS_AS(theta_radial_s1({1, 2}, parse_polynomial("x1^2", 4), false, num), Error);
  CHECK_THROWS_AS(theta_radial_s1({}, parse_polynomial("x1^2", 2), false, num), Error);
}

TEST_CASE("the identity on a ball is a unit vector") {
  const auto g = trivial_group(2);
  const DomainExpr omega = DomainExpr::ball(1.5);
  Numerics num;
  const auto f = make_map(g, omega, parse_polynomial("(x1^2+x2^2)/2", 2), num.bbox);
  const ThetaVector t = theta(g, omega, f, num).theta.normalized();
  REQUIRE(t.entries().size() == 1);
  CHECK(t.entries().begin()->second == 1);
  CHECK(t.label(t.entries().begin()->first).orbit_type == "(e)");
}

TEST_CASE("the empty map has Θ = 0") {
  const auto g = dihedral_group(3);
  Numerics num;
  const auto res = theta(g, DomainExpr::empty(), empty_map(g), num);
  CHECK(res.theta.is_zero());
  CHECK(res.trace.steps.empty());
}

TEST_CASE("recursion trace") {
  const auto g = dihedral_group(3);
  const DomainExpr omega = DomainExpr::ball(1.8);
  Numerics num;
  const auto f = make_map(g, omega, parse_polynomial("(x1^2+x2^2-1)^2+(x1^3-3*x1*x2^2-0.5)^2", 2), num.bbox);
  const auto res = theta(g, omega, f, num);
  REQUIRE(res.trace.steps.size() == res.trace.lattice.size());
  CHECK(res.trace.steps.front().orbit_type == "(G)");
  for (std::size_t i = 0; i < res.trace.steps.size(); ++i) {
    CHECK(res.trace.steps[i].step == static_cast<int>(i) + 1);
    CHECK(res.trace.steps[i].domain_nested);
  }
  // Perturbation radii shrink along the recursion.
  double last = std::numeric_limits<double>::infinity();
  for (const auto& s : res.trace.steps)
    if (s.tube && !s.tube->empty()) {
      CHECK(s.tube->epsilon <= last);
      last = s.tube->epsilon;
    }
  CHECK_NOTHROW(res.trace.to_json().dump());
}

TEST_CASE("Θ does not depend on the worker count or a positive scale") {
  const auto g = antipodal_group(2);
  const DomainExpr omega = DomainExpr::ball(1.8);
  Numerics num;
  const auto f = make_map(g, omega, parse_polynomial("(x1^2-1)^2+x2^2", 2), num.bbox);
  set_worker_count(1);
  const auto one = theta(g, omega, f, num);
  set_worker_count(4);
  const auto four = theta(g, omega, f, num);
  set_worker_count(0);
  CHECK(one.theta.to_json() == four.theta.to_json());
  CHECK(one.trace.to_json() == four.trace.to_json());
  CHECK(theta(g, omega, f.scaled(3.0), num).theta == one.theta);
  CHECK(one.theta.theta11 == 1);
}
