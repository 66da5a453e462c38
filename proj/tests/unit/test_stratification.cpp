#include <doctest.h>

#include <algorithm>
#include <set>

#include "egdeg/errors.hpp"
#include "egdeg/stratification.hpp"

using namespace egdeg;

namespace {

int class_named(const GroupAction& g, const std::string& name) {
  for (const auto& c : g.lattice.classes)
    if (c.name == name) return c.id;
  FAIL("no class " << name);
  return -1;
}

Vec point(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("iso_types lists maximal classes first") {
  const auto d3 = dihedral_group(3);
  const StrataOptions opt;

  const auto full = iso_types(*d3, DomainExpr::full(), opt);
  REQUIRE(full.classes.size() == 3);
  CHECK(full.classes.front() == class_named(*d3, "(G)"));
  CHECK(full.classes.back() == class_named(*d3, "(e)"));
  CHECK(full.position(class_named(*d3, "(Z3)")) == -1);

  const auto punct = iso_types(*d3, DomainExpr::punctured(), opt);
  REQUIRE(punct.classes.size() == 2);
  CHECK(punct.classes[0] == class_named(*d3, "(Z2)"));
  CHECK(punct.classes[1] == class_named(*d3, "(e)"));
  // Every witness has the orbit type it stands for.
  for (std::size_t i = 0; i < punct.classes.size(); ++i)
    CHECK(d3->lattice.subgroups[isotropy(*d3, punct.witnesses[i])].class_id == punct.classes[i]);

  // The linear order refines the partial order.
  const auto s3 = symmetric_group(3);
  const auto lat = iso_types(*s3, DomainExpr::full(), opt);
  CHECK(lat.classes.size() == 3);
  for (std::size_t a = 0; a < lat.classes.size(); ++a)
    for (std::size_t b = a + 1; b < lat.classes.size(); ++b)
      CHECK_FALSE(s3->lattice.leq[lat.classes[a]][lat.classes[b]]);
}

TEST_CASE("the empty domain has no orbit types") {
  const auto lat = iso_types(*dihedral_group(3), DomainExpr::empty(), StrataOptions{});
  CHECK(lat.classes.empty());
}

TEST_CASE("D3 strata of the punctured plane") {
  const auto g = dihedral_group(3);
  const DomainExpr omega = DomainExpr::punctured();
  const StrataOptions opt;

  const Stratum axis = build_stratum(*g, omega, class_named(*g, "(Z2)"), opt);
  CHECK(axis.dim() == 1);
  CHECK(axis.conjugate_bases.size() == 3);
  CHECK(axis.components.size() == 2);
  CHECK(axis.quotient_reps.size() == 2);  // the Weyl group of Z2 in D3 is trivial

  const Stratum free = build_stratum(*g, omega, class_named(*g, "(e)"), opt);
  CHECK(free.dim() == 2);
  CHECK(free.components.size() == 6);
  CHECK(free.quotient_reps.size() == 1);
  for (const auto& c : free.components) CHECK(c.stabilizer == 1);

  // Components are sorted by label and the cell lists are sorted.
  for (std::size_t i = 1; i < free.components.size(); ++i)
    CHECK(free.components[i - 1].label < free.components[i].label);
  for (const auto& c : free.components) CHECK(std::is_sorted(c.cells.begin(), c.cells.end()));

  // Points of one G-orbit land in one quotient component.
  const Vec x = point({0.7, 0.3});
  std::set<int> labels;
  for (const Vec& y : orbit_images(*g, x)) labels.insert(free.locate(*g, omega, y).second);
  CHECK(labels.size() == 1);
  // Opposite axis rays are different quotient components.
  CHECK(axis.locate(*g, omega, point({1.0, 0.0})).second != axis.locate(*g, omega, point({-1.0, 0.0})).second);
  CHECK_THROWS_AS(free.locate(*g, omega, point({1.0, 0.0})), Error);
}

TEST_CASE("antipodal plane minus a closed disc") {
  const auto g = antipodal_group(2);
  const DomainExpr omega = DomainExpr::difference(DomainExpr::ball(1.8), DomainExpr::ball(0.5));
  const Stratum s = build_stratum(*g, omega, class_named(*g, "(e)"), StrataOptions{});
  REQUIRE(s.components.size() == 1);
  CHECK(s.components[0].stabilizer == 2);
  CHECK(s.quotient_reps.size() == 1);
  CHECK(omega.contains(s.center(s.components[0].label)));
}

TEST_CASE("locate_coords follows the component through narrow regions") {
  const auto g = antipodal_group(2);
  const DomainExpr omega = DomainExpr::ball(1.5);
  const Stratum s = build_stratum(*g, omega, class_named(*g, "(e)"), StrataOptions{});
  // A point very close to the origin still belongs to the single free component.
  CHECK(s.locate_coords(point({1e-3, 0.0}), omega) == 0);
  CHECK(s.locate_coords(point({1.45, 0.0}), omega) == 0);
}

TEST_CASE("component counts are stable under grid halving") {
  const auto g = dihedral_group(4);
  const DomainExpr omega = DomainExpr::annulus(0.5, 1.5);
  StrataOptions coarse;
  coarse.h = 0.1;
  StrataOptions fine = coarse;
  fine.h = 0.05;
  for (int cls : iso_types(*g, omega, coarse).classes) {
    if (g->lattice.representative(cls).fixed_basis.cols() == 0) continue;
    const Stratum a = build_stratum(*g, omega, cls, coarse);
    const Stratum b = build_stratum(*g, omega, cls, fine);
    CHECK(a.components.size() == b.components.size());
    CHECK(a.quotient_reps.size() == b.quotient_reps.size());
  }
}

TEST_CASE("invariance witnesses") {
  const auto g = dihedral_group(3);
  CHECK_FALSE(DomainExpr::punctured().invariance_witness(*g, 2.0));
  CHECK_FALSE(DomainExpr::annulus(0.5, 1.0).invariance_witness(*g, 2.0));
  const DomainExpr shifted = DomainExpr::orbit_balls({point({1.0, 0.0})}, 0.3);
  const auto w = shifted.invariance_witness(*g, 2.0);
  REQUIRE(w);
  CHECK(w->size() == 2);
}
