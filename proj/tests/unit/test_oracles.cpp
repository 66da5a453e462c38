// Self-checks of the independent oracles on cases with known answers.

#include <doctest.h>

#include <cmath>

#include "group_oracle.hpp"
#include "line_oracle.hpp"
#include "winding_oracle.hpp"

TEST_CASE("omega and mu follow the explicit formulas") {
  const double eps = 0.3;
  CHECK(oracle::omega(0, eps) == doctest::Approx(-eps * eps / 9));
  CHECK(oracle::omega(eps / 3, eps) == doctest::Approx(-eps * eps / 18));
  CHECK(oracle::omega(2 * eps / 3, eps) == doctest::Approx(0.0));
  CHECK(oracle::mu(2 * eps / 3, eps) == 0.0);
  CHECK(oracle::mu(5 * eps / 6, eps) == doctest::Approx(0.5));
  CHECK(oracle::mu(eps, eps) == 1.0);
}

TEST_CASE("line oracle on the pinned potentials") {
  const auto up = oracle::line_theta([](double x) { return x * x / 2; }, 2.0, true);
  CHECK(up.theta11 == 1);
  CHECK(up.entry == 0);
  CHECK(up.boundary_degree == up.entry);

  const auto down = oracle::line_theta([](double x) { return -x * x / 2; }, 2.0, true);
  CHECK(down.entry == -1);
  CHECK(down.boundary_degree == -1);
  REQUIRE(down.crossings.size() == 1);
  CHECK(down.crossings[0].at == doctest::Approx(2 * 0.1 / 3).epsilon(1e-3));

  const auto ring = oracle::line_theta([](double r) { return (r * r - 1) * (r * r - 1) / 4; }, 2.0, false);
  CHECK(!ring.theta11);
  CHECK(ring.entry == 1);

  // The answer does not depend on the tube radius.
  for (double eps : {0.05, 0.2, 0.5})
    CHECK(oracle::line_theta([](double x) { return -x * x / 2; }, 2.0, true, eps).entry == -1);
}

TEST_CASE("winding oracle on linear fields") {
  for (int d = 1; d <= 3; ++d) {
    const oracle::Point lo(d, -1.0), hi(d, 1.0);
    CHECK(oracle::box_degree([](const oracle::Point& p) { return p; }, lo, hi).degree == 1);
    const auto minus = oracle::box_degree(
        [](const oracle::Point& p) {
          oracle::Point q = p;
          for (auto& v : q) v = -v;
          return q;
        },
        lo, hi);
    CHECK(minus.degree == (d % 2 == 0 ? 1 : -1));
  }
  // z² in the plane has degree 2.
  const auto z2 = oracle::box_degree(
      [](const oracle::Point& p) { return oracle::Point{p[0] * p[0] - p[1] * p[1], 2 * p[0] * p[1]}; },
      {-1, -1}, {1, 1});
  CHECK(z2.degree == 2);
  // A field without zeros in the box.
  CHECK(oracle::box_degree([](const oracle::Point& p) { return oracle::Point{p[0] + 3, p[1], p[2]}; },
                           {-1, -1, -1}, {1, 1, 1})
            .degree == 0);
}

TEST_CASE("brute-force closure and subgroup census") {
  Eigen::MatrixXd r(2, 2), s(2, 2);
  r << 0, -1, 1, 0;
  s << 1, 0, 0, -1;
  const auto d4 = oracle::brute_closure({r, s}, 2);
  CHECK(d4.size() == 8);
  const auto census = oracle::brute_subgroups(d4);
  CHECK(census.subgroups == 10);
  CHECK(census.class_orders == std::vector<int>{1, 2, 2, 2, 4, 4, 4, 8});
}
