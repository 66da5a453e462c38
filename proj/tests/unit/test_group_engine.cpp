#include <doctest.h>

#include <cmath>
#include <numbers>

#include "egdeg/errors.hpp"
#include "egdeg/group.hpp"
#include "egdeg/rng.hpp"
#include "group_oracle.hpp"

using namespace egdeg;

namespace {

Eigen::MatrixXd rotation(double a) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Eigen::MatrixXd reflect_x() {
  Eigen::MatrixXd r(2, 2);
  r << 1, 0, 0, -1;
  return r;
}

std::vector<Eigen::MatrixXd> elements_of(const GroupAction& g) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < g.order(); ++i) out.push_back(g.rep.matrix(i));
  return out;
}

int class_of(const GroupAction& g, const Vec& x) { return g.lattice.subgroups[isotropy(g, x)].class_id; }

}  // namespace

TEST_CASE("close_group builds the generated group") {
  Eigen::MatrixXd minus(1, 1);
  minus << -1;
  CHECK(close_group({OrthogonalTransform::from_matrix(minus)}, 1).order() == 2);

  const auto d3 = close_group({OrthogonalTransform::from_matrix(rotation(2 * std::numbers::pi / 3)),
                               OrthogonalTransform::from_matrix(reflect_x())},
                              2);
  CHECK(d3.order() == 6);
  CHECK(static_cast<int>(oracle::brute_closure({rotation(2 * std::numbers::pi / 3), reflect_x()}, 2).size()) == 6);
  CHECK(d3.matrix(0).isIdentity(1e-12));

  CHECK_THROWS_AS(close_group({OrthogonalTransform::from_matrix(rotation(2 * std::numbers::pi / 3))}, 2, 2), Error);
  Eigen::MatrixXd skew(2, 2);
  skew << 1, 0.1, 0, 1;
  CHECK_THROWS_AS(OrthogonalTransform::from_matrix(skew), Error);
}

TEST_CASE("multiplication and inverse tables are consistent") {
  const auto g = dihedral_group(4);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const int a = rng.below(g->order()), b = rng.below(g->order()), c = rng.below(g->order());
    CHECK(g->rep.mul(g->rep.mul(a, b), c) == g->rep.mul(a, g->rep.mul(b, c)));
  }
  for (int a = 0; a < g->order(); ++a) {
    CHECK(g->rep.mul(a, g->rep.inv(a)) == 0);
    CHECK((g->rep.matrix(g->rep.mul(a, 1)) - g->rep.matrix(a) * g->rep.matrix(1)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("subgroup lattices agree with subset enumeration") {
  CHECK(antipodal_group(1)->lattice.classes.size() == 2);
  for (const auto& g : {dihedral_group(3), symmetric_group(3), cyclic_group(4), dihedral_group(4)}) {
    const auto census = oracle::brute_subgroups(elements_of(*g));
    CHECK(static_cast<int>(g->lattice.subgroups.size()) == census.subgroups);
    std::vector<int> orders;
    for (const auto& c : g->lattice.classes) orders.push_back(c.order);
    std::sort(orders.begin(), orders.end());
    CHECK(orders == census.class_orders);
  }
  const auto d3 = dihedral_group(3);
  CHECK(d3->lattice.classes.size() == 4);
  CHECK(symmetric_group(3)->lattice.classes.size() == 4);
  // (e) lies below every class.
  for (const auto& c : d3->lattice.classes) CHECK(d3->lattice.leq[0][c.id]);
}

TEST_CASE("subgroup records satisfy their invariants") {
  for (const auto& g : {dihedral_group(3), symmetric_group(3), cyclic_group(6)}) {
    for (const auto& h : g->lattice.subgroups) {
      CHECK(h.weyl_coset_reps.size() * h.order == h.normalizer.size());
      for (int a : h.members)
        for (Eigen::Index j = 0; j < h.fixed_basis.cols(); ++j)
          CHECK((g->rep.matrix(a) * h.fixed_basis.col(j) - h.fixed_basis.col(j)).norm() < 1e-8);
      // Conjugates stay in the class.
      for (int x = 0; x < g->order(); ++x) {
        SubgroupMask m = 0;
        for (int a : h.members) m |= SubgroupMask{1} << g->rep.mul(g->rep.mul(x, a), g->rep.inv(x));
        const int k = g->lattice.find(m);
        REQUIRE(k >= 0);
        CHECK(g->lattice.subgroups[k].class_id == h.class_id);
      }
    }
    // dim V^K ≤ dim V^H whenever (H) ≤ (K).
    for (const auto& a : g->lattice.classes)
      for (const auto& b : g->lattice.classes)
        if (g->lattice.leq[a.id][b.id])
          CHECK(g->lattice.representative(b.id).fixed_basis.cols() <=
                g->lattice.representative(a.id).fixed_basis.cols());
  }
}

TEST_CASE("fixed subspaces") {
  const auto s3 = symmetric_group(3);
  const auto& e = s3->lattice.representative(0);
  CHECK((e.fixed_basis * e.fixed_basis.transpose()).isIdentity(1e-12));

  const auto& whole = s3->lattice.representative(static_cast<int>(s3->lattice.classes.size()) - 1);
  REQUIRE(whole.fixed_basis.cols() == 1);
  CHECK(std::abs(std::abs(whole.fixed_basis.col(0).sum()) - std::sqrt(3.0)) < 1e-12);

  const auto d3 = dihedral_group(3);
  const int refl = d3->rep.find(reflect_x());
  REQUIRE(refl >= 0);
  const int sub = d3->lattice.find((SubgroupMask{1} << 0) | (SubgroupMask{1} << refl));
  REQUIRE(sub >= 0);
  const auto& basis = d3->lattice.subgroups[sub].fixed_basis;
  REQUIRE(basis.cols() == 1);
  CHECK(std::abs(std::abs(basis(0, 0)) - 1.0) < 1e-12);

  // Projectors do not depend on the class representative.
  for (const auto& h : d3->lattice.subgroups) {
    const auto& rep = d3->lattice.representative(h.class_id);
    if (rep.members == h.members) continue;
    CHECK(rep.fixed_basis.cols() == h.fixed_basis.cols());
  }
}

TEST_CASE("isotropy classification") {
  const auto s3 = symmetric_group(3);
  CHECK(s3->lattice.classes[class_of(*s3, Vec::Constant(3, 1.0))].order == 6);

  Vec x(3);
  x << 1, 1, 0;
  const auto& rec = isotropy_record(*s3, x);
  CHECK(rec.order == 2);
  Eigen::MatrixXd swap12(3, 3);
  swap12 << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  const int t = s3->rep.find(swap12);
  CHECK(std::find(rec.members.begin(), rec.members.end(), t) != rec.members.end());

  Vec y(2);
  y << 1, 1e-6;
  CHECK_THROWS_AS(isotropy(*dihedral_group(3), y), Error);
}

TEST_CASE("orbits") {
  Vec one(1);
  one << 1;
  CHECK(orbit(*antipodal_group(1), one).size() == 2);
  Vec axis(2);
  axis << 1, 0;
  CHECK(orbit(*dihedral_group(3), axis).size() == 3);
  CHECK(orbit(*dihedral_group(3), Vec::Zero(2)).size() == 1);

  // |orbit| · |G_x| = |G| against the brute-force stabilizer count.
  Rng rng(11);
  for (const auto& g : {dihedral_group(3), symmetric_group(3), cyclic_group(4)}) {
    const auto elems = elements_of(*g);
    for (int k = 0; k < 30; ++k) {
      Vec p = rng.normal_vec(g->dim());
      if (k % 3 == 0) p = g->rep.matrix(1) * p + p;  // some points on fixed spaces
      try {
        const auto o = orbit(*g, p);
        CHECK(static_cast<int>(o.size()) * oracle::stabilizer_order(elems, p, 1e-7) == g->order());
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IsotropyAmbiguous);
      }
    }
  }
}
